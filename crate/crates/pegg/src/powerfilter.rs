//! Residue-based perfect cube / fourth power / fifth power testing.
//!
//! A `ResidueFilterSet` holds, per modulus, the set of k-th power residues
//! and small power lookup tables. Queries test differences of the form
//! `f*c^z - a^x` (or its negation) against each modulus using only table
//! lookups, multiplies, and compare-subtract reductions; inputs that survive
//! go to the rigorous root-and-multiply-back test.

use crate::numtheory::{is_perfect_kth_power, primes_up_to, Reducer};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FilterError {
    #[error("residue filters are defined for k in {{3, 4, 5}}, got {0}")]
    UnsupportedExponent(u64),
    #[error("modulus {0} out of range (need 2 <= m < 65536)")]
    BadModulus(u64),
}

/// Which signed difference is being tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffDirection {
    FcMinusAx,
    AxMinusFc,
}

/// Residue membership table; one byte per residue by default, with a packed
/// single-bit layout selectable at build time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResidueSet {
    Bytes(Vec<u8>),
    Packed(Vec<u64>),
}

impl ResidueSet {
    fn build(m: u64, members: impl Iterator<Item = u64>, packed: bool) -> ResidueSet {
        if packed {
            let mut bits = vec![0u64; (m as usize + 63) / 64];
            for r in members {
                bits[(r / 64) as usize] |= 1 << (r % 64);
            }
            ResidueSet::Packed(bits)
        } else {
            let mut bytes = vec![0u8; m as usize];
            for r in members {
                bytes[r as usize] = 1;
            }
            ResidueSet::Bytes(bytes)
        }
    }

    #[inline]
    pub fn contains(&self, r: u64) -> bool {
        match self {
            ResidueSet::Bytes(b) => b[r as usize] != 0,
            ResidueSet::Packed(bits) => bits[(r / 64) as usize] >> (r % 64) & 1 != 0,
        }
    }

    pub fn count(&self) -> u64 {
        match self {
            ResidueSet::Bytes(b) => b.iter().filter(|&&x| x != 0).count() as u64,
            ResidueSet::Packed(bits) => bits.iter().map(|w| w.count_ones() as u64).sum(),
        }
    }
}

/// One modulus of a filter: k-th residues plus b^e tables for the exponents
/// in play.
#[derive(Debug, Clone)]
pub struct ModulusFilter {
    pub modulus: u64,
    reducer: Reducer,
    pub residues: ResidueSet,
    /// (exponent, table of b^exponent mod m) pairs.
    pow: Vec<(u64, Vec<u16>)>,
}

impl ModulusFilter {
    fn pow_table(&self, exp: u64) -> Option<&[u16]> {
        self.pow
            .iter()
            .find(|(e, _)| *e == exp)
            .map(|(_, t)| t.as_slice())
    }
}

#[derive(Debug, Clone)]
pub struct ResidueFilterSet {
    pub k: u64,
    pub mods: Vec<ModulusFilter>,
}

/// Standard modulus lists: the non-prime helpers first, then the primes with
/// p = 1 (mod k') below the cut-off. Counts are pinned by assertion.
pub fn default_moduli(k: u64) -> Result<Vec<u64>, FilterError> {
    let (head, class, bound, prime_count): (&[u64], u64, u64, usize) = match k {
        3 => (&[9], 3, 367, 34),
        4 => (&[9, 16, 49, 121], 4, 257, 25),
        5 => (&[25], 5, 521, 23),
        other => return Err(FilterError::UnsupportedExponent(other)),
    };
    let primes: Vec<u64> = primes_up_to(bound)
        .into_iter()
        .filter(|p| p % class == 1)
        .collect();
    assert_eq!(primes.len(), prime_count, "prime list for k={k}");
    Ok(head.iter().copied().chain(primes).collect())
}

/// Builds bitsets and power tables by direct enumeration of s = 0..m-1.
/// Power tables are built for every exponent that can appear in a query:
/// 3 through 5 plus k itself.
pub fn build_filter(k: u64, moduli: &[u64]) -> ResidueFilterSet {
    build_filter_with_layout(k, moduli, false)
}

pub fn build_filter_with_layout(k: u64, moduli: &[u64], packed: bool) -> ResidueFilterSet {
    let mut exps: Vec<u64> = vec![3, 4, 5];
    if !exps.contains(&k) {
        exps.push(k);
    }
    let mods = moduli
        .iter()
        .map(|&m| {
            assert!((2..65_536).contains(&m), "modulus {m} out of range");
            let reducer = Reducer::new(m);
            let kth: Vec<u64> = {
                let mut seen = vec![false; m as usize];
                for s in 0..m {
                    seen[crate::numtheory::pow_mod(s, k, m) as usize] = true;
                }
                (0..m).filter(|&r| seen[r as usize]).collect()
            };
            let pow = exps
                .iter()
                .map(|&e| {
                    let table: Vec<u16> = (0..m)
                        .map(|b| crate::numtheory::pow_mod(b, e, m) as u16)
                        .collect();
                    (e, table)
                })
                .collect();
            ModulusFilter {
                modulus: m,
                reducer,
                residues: ResidueSet::build(m, kth.into_iter(), packed),
                pow,
            }
        })
        .collect();
    ResidueFilterSet { k, mods }
}

impl ResidueFilterSet {
    /// Fraction of inputs ruled out assuming independent moduli, as f64.
    /// The default filters reject all but ~5e-17 of inputs, which rounds to
    /// 1.0 in f64; use `elimination_percent_string` for exact digits.
    pub fn analytic_elimination_rate(&self) -> f64 {
        let mut survive = 1.0f64;
        for m in &self.mods {
            survive *= m.residues.count() as f64 / m.modulus as f64;
        }
        1.0 - survive
    }

    /// Exact survival probability as a fraction (numerator, denominator).
    pub fn survival_ratio(&self) -> (BigUint, BigUint) {
        let mut num = BigUint::one();
        let mut den = BigUint::one();
        for m in &self.mods {
            num *= m.residues.count();
            den *= m.modulus;
        }
        (num, den)
    }

    /// Elimination rate as an exact decimal percentage with the given number
    /// of fractional digits, rounded half-up.
    pub fn elimination_percent_string(&self, decimals: usize) -> String {
        let (num, den) = self.survival_ratio();
        let eliminated = &den - &num;
        let scaled = eliminated * 100u32 * BigUint::from(10u32).pow(decimals as u32);
        let (mut q, r) = scaled.div_rem(&den);
        if r * 2u32 >= den {
            q += 1u32;
        }
        let digits = q.to_string();
        let digits = if digits.len() <= decimals {
            format!("{:0>width$}", digits, width = decimals + 1)
        } else {
            digits
        };
        let split = digits.len() - decimals;
        format!("{}.{}", &digits[..split], &digits[split..])
    }

    /// Prepares the per-modulus residues of f*c^z for a run of queries with
    /// varying a.
    pub fn diff_context(
        &self,
        f: u64,
        c: u64,
        z: u64,
        x: u64,
        direction: DiffDirection,
    ) -> DiffContext<'_> {
        let mods = self
            .mods
            .iter()
            .map(|mf| {
                let m = mf.modulus;
                let zt = mf.pow_table(z).expect("power table for z");
                let cz = zt[mf.reducer.reduce(c) as usize] as u64;
                let fc = mf.reducer.reduce(mf.reducer.reduce(f) * cz);
                CtxMod {
                    m,
                    red: mf.reducer,
                    fc,
                    pow_x: mf.pow_table(x).expect("power table for x"),
                    set: &mf.residues,
                }
            })
            .collect();
        DiffContext { mods, direction }
    }

    /// True iff n is a perfect k-th power; residues give the fast rejection,
    /// the rigorous root test confirms survivors.
    pub fn is_kth_power(&self, n: &BigUint) -> bool {
        for mf in &self.mods {
            let r = mf.reducer.reduce_big(n);
            if !mf.residues.contains(r) {
                return false;
            }
        }
        is_perfect_kth_power(n, self.k)
    }
}

struct CtxMod<'a> {
    m: u64,
    red: Reducer,
    fc: u64,
    pow_x: &'a [u16],
    set: &'a ResidueSet,
}

/// Per-(f, c) query context; `passes(a)` costs a reduction, one table lookup
/// and one bitset probe per modulus.
pub struct DiffContext<'a> {
    mods: Vec<CtxMod<'a>>,
    direction: DiffDirection,
}

impl DiffContext<'_> {
    #[inline]
    pub fn passes(&self, a: u64) -> bool {
        for cm in &self.mods {
            let ra = cm.red.reduce(a);
            let ax = cm.pow_x[ra as usize] as u64;
            let mut d = match self.direction {
                DiffDirection::FcMinusAx => cm.fc + cm.m - ax,
                DiffDirection::AxMinusFc => ax + cm.m - cm.fc,
            };
            if d >= cm.m {
                d -= cm.m;
            }
            if !cm.set.contains(d) {
                return false;
            }
        }
        true
    }
}

/// One-shot query: is (f*c^z - a^x) (or its negation) compatible with being
/// a k-th power modulo every filter modulus? `false` is a proof of
/// incompatibility; `true` means "run the rigorous test".
pub fn diff_passes_filter(
    filter: &ResidueFilterSet,
    f: u64,
    c: u64,
    z: u64,
    a: u64,
    x: u64,
    direction: DiffDirection,
) -> bool {
    filter.diff_context(f, c, z, x, direction).passes(a)
}

/// Filtered k-th power test; exactly equivalent to the rigorous test.
pub fn is_kth_power_filtered(filter: &ResidueFilterSet, n: &BigUint) -> bool {
    filter.is_kth_power(n)
}

/// The exact true difference |f*c^z - a^x| and its sign direction.
pub fn exact_difference(f: u64, c: u64, z: u64, a: u64, x: u64) -> (BigUint, DiffDirection) {
    let fc = BigUint::from(f) * BigUint::from(c).pow(z as u32);
    let ax = BigUint::from(a).pow(x as u32);
    if fc >= ax {
        (fc - ax, DiffDirection::FcMinusAx)
    } else {
        (ax - fc, DiffDirection::AxMinusFc)
    }
}
