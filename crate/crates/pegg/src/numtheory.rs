//! Exact integer primitives: p-adic valuations, k-free tests, integer k-th
//! roots, perfect power tests, and the two-congruence minimizer used to build
//! equation multipliers. Everything here is pure and exact; floating point is
//! never load-bearing.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumError {
    #[error("p-adic valuation requires n >= 1")]
    ZeroValuation,
    #[error("modulus or prime out of range: {0}")]
    BadArgument(&'static str),
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut result = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mul_mod(result, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    result
}

/// Deterministic Miller-Rabin for u64 (witness set covers the full range).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let r = (n - 1).trailing_zeros();
    let d = (n - 1) >> r;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    // Brent's cycle variant; n must be odd composite and not a prime power hit
    // by the trial loop below.
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
    }
    unreachable!()
}

/// Full factorization of a u64, sorted by prime.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    let mut stack = vec![n];
    let mut rest = Vec::new();
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            rest.push(m);
        } else {
            let d = pollard_rho(m);
            stack.push(d);
            stack.push(m / d);
        }
    }
    rest.sort_unstable();
    let mut i = 0;
    while i < rest.len() {
        let p = rest[i];
        let mut e = 0;
        while i < rest.len() && rest[i] == p {
            e += 1;
            i += 1;
        }
        out.push((p, e));
    }
    out.sort_unstable();
    out
}

/// Largest r with p^r | n. Rejects n = 0 and p < 2.
pub fn padic_valuation(p: u64, n: &BigUint) -> Result<u64, NumError> {
    if p < 2 {
        return Err(NumError::BadArgument("p must be >= 2"));
    }
    if n.is_zero() {
        return Err(NumError::ZeroValuation);
    }
    let p_big = BigUint::from(p);
    let mut r = 0u64;
    let mut m = n.clone();
    loop {
        let (q, rem) = m.div_rem(&p_big);
        if !rem.is_zero() {
            return Ok(r);
        }
        r += 1;
        m = q;
    }
}

pub fn padic_valuation_u64(p: u64, n: u64) -> Result<u64, NumError> {
    padic_valuation(p, &BigUint::from(n))
}

/// True iff no prime divides n to the k-th power or higher.
pub fn is_k_free(n: u64, k: u64) -> bool {
    debug_assert!(n >= 1 && k >= 2);
    factorize(n).iter().all(|&(_, e)| (e as u64) < k)
}

/// Floor of the k-th root, exact. Rejects k = 0.
pub fn integer_kth_root(n: &BigUint, k: u64) -> Result<BigUint, NumError> {
    if k == 0 {
        return Err(NumError::BadArgument("root degree must be >= 1"));
    }
    let k32 = u32::try_from(k).map_err(|_| NumError::BadArgument("root degree too large"))?;
    let r = n.nth_root(k32);
    debug_assert!(r.pow(k32) <= *n && (&r + 1u32).pow(k32) > *n);
    Ok(r)
}

/// True iff n = r^k for some integer r. Rigorous: root plus multiply-back.
pub fn is_perfect_kth_power(n: &BigUint, k: u64) -> bool {
    debug_assert!(k >= 2);
    let r = integer_kth_root(n, k).expect("k >= 2");
    r.pow(k as u32) == *n
}

/// Smallest q >= 0 with q = 0 (mod m1) and q = r2 (mod m2), or None when the
/// congruence pair has no solution. Scans multiples of m1 up to lcm(m1, m2);
/// the moduli in play are exponent-sized so the scan is a handful of steps.
pub fn smallest_q(m1: u64, m2: u64, r2: u64) -> Option<u64> {
    debug_assert!(m1 >= 1 && m2 >= 1 && r2 < m2);
    let limit = lcm_u64(m1, m2);
    let mut q = 0u64;
    loop {
        if q % m2 == r2 {
            return Some(q);
        }
        q += m1;
        if q > limit {
            return None;
        }
    }
}

/// All primes <= limit by plain sieve.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2usize;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (2..=n).filter(|&i| sieve[i]).map(|i| i as u64).collect()
}

/// Reduction by a fixed modulus via multiplicative inverse: one widening
/// multiply, a shift, and at most two compare-subtract corrections. Used on
/// hot paths so residue checks never issue a division instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reducer {
    m: u64,
    inv: u64, // floor(2^64 / m)
}

impl Reducer {
    pub fn new(m: u64) -> Self {
        assert!(m >= 2);
        let inv = ((1u128 << 64) / m as u128) as u64;
        Reducer { m, inv }
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        // q underestimates x/m by at most 2, so the correction loop is bounded.
        let q = ((x as u128 * self.inv as u128) >> 64) as u64;
        let mut r = x - q.wrapping_mul(self.m);
        while r >= self.m {
            r -= self.m;
        }
        r
    }

    /// Reduce a big integer by folding 32-bit digits; only multiplies, adds
    /// and the compare-subtract correction above.
    pub fn reduce_big(&self, n: &BigUint) -> u64 {
        debug_assert!(self.m < (1 << 16));
        let mut r = 0u64;
        for digit in n.to_u32_digits().iter().rev() {
            r = self.reduce((r << 32) | *digit as u64);
        }
        r
    }
}

/// log2 of a big integer as f64, safe far beyond the f64 exponent range.
pub fn log2_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 53 {
        return (n.to_u64().unwrap() as f64).log2();
    }
    let shift = bits - 53;
    let top = (n >> shift).to_u64().unwrap();
    (top as f64).log2() + shift as f64
}
