//! Original and resultant equation models plus the conversion algebra between
//! them: the minimal multiplier N, coefficient spreading, Pegg Value and Pegg
//! Power reporting, min re-association, the coefficient-to-resultant power map
//! (`cvt`), and the identity generator with arbitrary Pegg Value.
//!
//! Conventions: slot 0 holds (d, a, x), slot 1 holds (e, b, y), slot 2 holds
//! (f, c, z). The sign tag names which term equals the sum of the other two.

mod text;

pub use text::ParseError;

use crate::numtheory::{
    factorize, gcd_u64, integer_kth_root, is_k_free, lcm_u64, log2_big, smallest_q,
};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Exponent triple (x, y, z), each at least 3 for valid equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExponentTriple {
    pub x: u64,
    pub y: u64,
    pub z: u64,
}

impl ExponentTriple {
    pub fn new(x: u64, y: u64, z: u64) -> Self {
        ExponentTriple { x, y, z }
    }

    pub fn as_array(&self) -> [u64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn gcd(&self) -> u64 {
        gcd_u64(gcd_u64(self.x, self.y), self.z)
    }

    pub fn lcm(&self) -> u64 {
        lcm_u64(lcm_u64(self.x, self.y), self.z)
    }

    pub fn max(&self) -> u64 {
        self.x.max(self.y).max(self.z)
    }

    /// Sorted multiset view, e.g. {3,3,4} for x=3,y=3,z=4 in any order.
    pub fn sorted(&self) -> [u64; 3] {
        let mut a = self.as_array();
        a.sort_unstable();
        a
    }

    pub fn all_distinct(&self) -> bool {
        self.x != self.y && self.y != self.z && self.x != self.z
    }
}

impl std::fmt::Display for ExponentTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{{},{},{}}}", self.x, self.y, self.z)
    }
}

/// Sign arrangement of the symmetric form, named after what b^y equals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Permutation {
    /// a^x - f c^z = b^y (the a-term is the sum side)
    AxMinusCz,
    /// f c^z - a^x = b^y (the c-term is the sum side)
    CzMinusAx,
    /// a^x + f c^z = b^y (the b-term is the sum side)
    AxPlusCz,
}

impl Permutation {
    /// Index of the term equal to the sum of the other two.
    pub fn sum_index(&self) -> usize {
        match self {
            Permutation::AxMinusCz => 0,
            Permutation::CzMinusAx => 2,
            Permutation::AxPlusCz => 1,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Permutation::AxMinusCz => "ax_minus_cz",
            Permutation::CzMinusAx => "cz_minus_ax",
            Permutation::AxPlusCz => "ax_plus_cz",
        }
    }
}

impl std::fmt::Display for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Permutation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ax_minus_cz" => Ok(Permutation::AxMinusCz),
            "cz_minus_ax" => Ok(Permutation::CzMinusAx),
            "ax_plus_cz" => Ok(Permutation::AxPlusCz),
            _ => Err(format!("unknown permutation `{s}`")),
        }
    }
}

/// Term slot of an equation: A = (d, a, x), B = (e, b, y), C = (f, c, z).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    A = 0,
    B = 1,
    C = 2,
}

impl Slot {
    pub fn index(&self) -> usize {
        *self as usize
    }
}

/// Original Pegg Equation `d a^x + e b^y = f c^z` in symmetric sign form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OriginalEquation {
    pub exps: ExponentTriple,
    /// Coefficients (d, e, f).
    pub coeffs: [u64; 3],
    /// Bases (a, b, c).
    pub bases: [u64; 3],
    pub sign: Permutation,
}

impl OriginalEquation {
    pub fn new(exps: ExponentTriple, coeffs: [u64; 3], bases: [u64; 3], sign: Permutation) -> Self {
        OriginalEquation {
            exps,
            coeffs,
            bases,
            sign,
        }
    }

    pub fn term_value(&self, i: usize) -> BigUint {
        BigUint::from(self.coeffs[i])
            * BigUint::from(self.bases[i]).pow(self.exps.as_array()[i] as u32)
    }

    pub fn sum_index(&self) -> usize {
        self.sign.sum_index()
    }

    /// Exact check that the two addend terms sum to the sum-side term.
    pub fn identity_holds(&self) -> bool {
        let s = self.sum_index();
        let mut total = BigUint::zero();
        for i in 0..3 {
            if i != s {
                total += self.term_value(i);
            }
        }
        total == self.term_value(s)
    }

    pub fn validate(&self) -> Validation {
        validate_original(self)
    }
}

/// A violated admissibility condition, reported as a value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ZeroField,
    ExponentBelowThree {
        slot: usize,
        exponent: u64,
    },
    ExponentGcd {
        gcd: u64,
    },
    TermGcd,
    AllCoefficientsOne,
    CoefficientNotPowerFree {
        slot: usize,
        coefficient: u64,
        degree: u64,
    },
    NonCoprimeExponentsWithCoefficient {
        slots: (usize, usize),
    },
    IdentityViolated,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::ZeroField => write!(f, "bases and coefficients must be >= 1"),
            Violation::ExponentBelowThree { slot, exponent } => {
                write!(f, "exponent {} in slot {} is below 3", exponent, slot)
            }
            Violation::ExponentGcd { gcd } => write!(f, "gcd(x,y,z) = {} != 1", gcd),
            Violation::TermGcd => write!(f, "gcd(d*a, e*b, f*c) != 1"),
            Violation::AllCoefficientsOne => write!(f, "at least one of d,e,f must be > 1"),
            Violation::CoefficientNotPowerFree {
                slot,
                coefficient,
                degree,
            } => {
                write!(
                    f,
                    "coefficient {} in slot {} is not {}-th power free",
                    coefficient, slot, degree
                )
            }
            Violation::NonCoprimeExponentsWithCoefficient { slots } => write!(
                f,
                "bases in slots {} and {} have non-coprime exponents, both coefficients must be 1",
                slots.0, slots.1
            ),
            Violation::IdentityViolated => write!(f, "signed sum of the three terms is not 0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Validation {
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every admissibility condition and reports all failures.
pub fn validate_original(eq: &OriginalEquation) -> Validation {
    let mut v = Vec::new();
    let ex = eq.exps.as_array();
    if eq.bases.iter().any(|&b| b == 0) || eq.coeffs.iter().any(|&c| c == 0) {
        v.push(Violation::ZeroField);
        return Validation { violations: v };
    }
    for (i, &e) in ex.iter().enumerate() {
        if e < 3 {
            v.push(Violation::ExponentBelowThree {
                slot: i,
                exponent: e,
            });
        }
    }
    let g = eq.exps.gcd();
    if g != 1 {
        v.push(Violation::ExponentGcd { gcd: g });
    }
    let terms: Vec<u128> = (0..3)
        .map(|i| eq.coeffs[i] as u128 * eq.bases[i] as u128)
        .collect();
    if terms[0].gcd(&terms[1]).gcd(&terms[2]) != 1 {
        v.push(Violation::TermGcd);
    }
    if eq.coeffs.iter().all(|&c| c == 1) {
        v.push(Violation::AllCoefficientsOne);
    }
    for i in 0..3 {
        if eq.coeffs[i] > 1 && !is_k_free(eq.coeffs[i], ex[i]) {
            v.push(Violation::CoefficientNotPowerFree {
                slot: i,
                coefficient: eq.coeffs[i],
                degree: ex[i],
            });
        }
    }
    for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
        if gcd_u64(ex[i], ex[j]) != 1 && (eq.coeffs[i] != 1 || eq.coeffs[j] != 1) {
            v.push(Violation::NonCoprimeExponentsWithCoefficient { slots: (i, j) });
        }
    }
    if !eq.identity_holds() {
        v.push(Violation::IdentityViolated);
    }
    Validation { violations: v }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConvertError {
    #[error("no multiplier exists: q = 0 (mod {step_modulus}), q = {residue} (mod {target_modulus}) has no solution for prime {prime}")]
    NoSolution {
        prime: u64,
        step_modulus: u64,
        target_modulus: u64,
        residue: u64,
    },
    #[error("coefficients share the prime {prime}; slot-wise multipliers are undefined")]
    NonCoprimeCoefficients { prime: u64 },
    #[error("the original equation terms do not sum to zero")]
    IdentityViolated,
    #[error("cvt domain requires 0 < v < z")]
    CvtDomain,
}

/// Smallest N making N*d an x-th power, N*e a y-th power and N*f a z-th power,
/// as a product of per-prime contributions over the coefficient factorizations.
pub fn smallest_multiplier(eq: &OriginalEquation) -> Result<BigUint, ConvertError> {
    let ex = eq.exps.as_array();
    let mut n = BigUint::one();
    let mut seen: Vec<u64> = Vec::new();
    for i in 0..3 {
        let own = ex[i];
        let others = lcm_u64(ex[(i + 1) % 3], ex[(i + 2) % 3]);
        for (p, vp) in factorize(eq.coeffs[i]) {
            if seen.contains(&p) {
                return Err(ConvertError::NonCoprimeCoefficients { prime: p });
            }
            seen.push(p);
            let r2 = (own - (vp as u64 % own)) % own;
            let q = smallest_q(others, own, r2).ok_or(ConvertError::NoSolution {
                prime: p,
                step_modulus: others,
                target_modulus: own,
                residue: r2,
            })?;
            n *= BigUint::from(p).pow(q as u32);
        }
    }
    Ok(n)
}

/// Resultant Pegg Equation A^x + B^y = C^z with its factor split A = D*a etc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultantEquation {
    pub exps: ExponentTriple,
    /// Resultant bases (A, B, C).
    pub bases: [BigUint; 3],
    /// Resultant coefficients (D, E, F) with D^x = N*d and so on.
    pub coeffs: [BigUint; 3],
    /// The multiplier N applied to the original equation.
    pub multiplier: BigUint,
    pub sign: Permutation,
    pub source: Option<OriginalEquation>,
}

impl ResultantEquation {
    pub fn term_value(&self, i: usize) -> BigUint {
        self.bases[i].pow(self.exps.as_array()[i] as u32)
    }

    pub fn sum_index(&self) -> usize {
        self.sign.sum_index()
    }

    /// Resultant equation size: the value of the sum-side term.
    pub fn size(&self) -> BigUint {
        self.term_value(self.sum_index())
    }

    pub fn log2_size(&self) -> f64 {
        log2_big(&self.size())
    }

    /// Exact re-verification of the identity.
    pub fn verify(&self) -> bool {
        let s = self.sum_index();
        let mut total = BigUint::zero();
        for i in 0..3 {
            if i != s {
                total += self.term_value(i);
            }
        }
        total == self.term_value(s)
    }

    pub fn gcd(&self) -> BigUint {
        self.bases[0].gcd(&self.bases[1]).gcd(&self.bases[2])
    }

    /// Index of the minimal base; ties prefer a carrier on the highest
    /// exponent (re-association is then moot).
    pub fn min_base_index(&self) -> usize {
        let ex = self.exps.as_array();
        let max_exp = self.exps.max();
        let min_val = self.bases.iter().min().unwrap();
        let mut idx = 0;
        for i in 0..3 {
            if &self.bases[i] == min_val {
                idx = i;
                if ex[i] == max_exp {
                    return i;
                }
            }
        }
        // no max-exponent carrier among the ties; smallest slot index wins
        for i in 0..3 {
            if &self.bases[i] == min_val {
                idx = i;
                break;
            }
        }
        idx
    }
}

/// Multiplies an original equation by its minimal N and spreads the
/// coefficients so every term becomes a perfect power of its exponent.
pub fn convert_to_resultant(eq: &OriginalEquation) -> Result<ResultantEquation, ConvertError> {
    if !eq.identity_holds() {
        return Err(ConvertError::IdentityViolated);
    }
    let n = smallest_multiplier(eq)?;
    let ex = eq.exps.as_array();
    let mut bases: [BigUint; 3] = [BigUint::one(), BigUint::one(), BigUint::one()];
    let mut coeffs: [BigUint; 3] = [BigUint::one(), BigUint::one(), BigUint::one()];
    for i in 0..3 {
        let scaled = &n * eq.coeffs[i];
        let root = integer_kth_root(&scaled, ex[i]).expect("exponent >= 3");
        debug_assert_eq!(
            root.pow(ex[i] as u32),
            scaled,
            "N must make each term a perfect power"
        );
        bases[i] = &root * eq.bases[i];
        coeffs[i] = root;
    }
    let res = ResultantEquation {
        exps: eq.exps,
        bases,
        coeffs,
        multiplier: n,
        sign: eq.sign,
        source: Some(eq.clone()),
    };
    debug_assert!(res.verify());
    Ok(res)
}

/// Pegg Value and quality metrics of a resultant equation.
#[derive(Debug, Clone, PartialEq)]
pub struct PeggReport {
    pub pegg_value: BigUint,
    /// log(Pegg Value) / log(equation size); 0 when the Pegg Value is 1.
    pub pegg_power: f64,
    pub gcd: BigUint,
    pub min_base: BigUint,
    pub log2_size: f64,
    /// True when the gcd acquired a factor of the minimal base's original
    /// base, dragging the Pegg Value below that base.
    pub stolen: bool,
}

pub fn pegg_report(res: &ResultantEquation) -> PeggReport {
    let g = res.gcd();
    let mi = res.min_base_index();
    let min_base = res.bases[mi].clone();
    let (pegg, rem) = min_base.div_rem(&g);
    assert!(rem.is_zero(), "gcd(A,B,C) must divide min(A,B,C)");
    let log2_size = res.log2_size();
    let pegg_power = if pegg.is_one() {
        0.0
    } else {
        log2_big(&pegg) / log2_size
    };
    let ex = res.exps.as_array();
    let stolen = ex[mi] == res.exps.max() && g > res.coeffs[mi];
    PeggReport {
        pegg_value: pegg,
        pegg_power,
        gcd: g,
        min_base,
        log2_size,
        stolen,
    }
}

const REASSOCIATION_PRIMES: [u64; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// If min(A,B,C) is not on the highest exponent, tries multiplying the whole
/// equation by p^lcm(x,y,z) to move it there. Primes are tried in increasing
/// order; primes dividing the base that will carry the minimum are skipped
/// (the gcd would steal from it). Returns the first multiplied equation that
/// fits `s_max` with a strictly larger Pegg Value, else the input unchanged.
pub fn reassociate_min(res: &ResultantEquation, s_max: &BigUint) -> ResultantEquation {
    let ex = res.exps.as_array();
    let max_exp = res.exps.max();
    let mi = res.min_base_index();
    if ex[mi] == max_exp {
        return res.clone();
    }
    let base_report = pegg_report(res);
    let lcm = res.exps.lcm();
    // The target carrier is the smallest base on the highest exponent; the
    // multiplier favors high exponents equally, so this is p-independent.
    let target = (0..3)
        .filter(|&i| ex[i] == max_exp)
        .min_by(|&i, &j| res.bases[i].cmp(&res.bases[j]))
        .unwrap();
    for p in REASSOCIATION_PRIMES {
        if (&res.bases[target] % p).is_zero() {
            continue;
        }
        let mut scaled = res.clone();
        for i in 0..3 {
            let factor = BigUint::from(p).pow((lcm / ex[i]) as u32);
            scaled.bases[i] *= &factor;
            scaled.coeffs[i] *= &factor;
        }
        scaled.multiplier *= BigUint::from(p).pow(lcm as u32);
        if &scaled.size() > s_max {
            // size grows with p; no later prime can fit
            break;
        }
        if pegg_report(&scaled).pegg_value > base_report.pegg_value {
            return scaled;
        }
    }
    res.clone()
}

/// Power of a coefficient prime as it appears in the resultant coefficient of
/// the highest-exponent base, for exponent sets {x, x, z}.
pub fn cvt(x: u64, z: u64, v: u64) -> Result<u64, ConvertError> {
    if v == 0 || v >= z {
        return Err(ConvertError::CvtDomain);
    }
    let r2 = (z - v % z) % z;
    let q = smallest_q(x, z, r2).ok_or(ConvertError::NoSolution {
        prime: 0,
        step_modulus: x,
        target_modulus: z,
        residue: r2,
    })?;
    Ok(if z < x { q / x } else { (q + v) / z })
}

/// [log_p D, log_p E, log_p F] contributed by one prime p with valuation v in
/// the coefficient of the given slot.
pub fn prime_power_profile(
    exps: ExponentTriple,
    coeff_slot: Slot,
    v: u64,
) -> Result<(u64, u64, u64), ConvertError> {
    let ex = exps.as_array();
    let i = coeff_slot.index();
    let own = ex[i];
    let others = lcm_u64(ex[(i + 1) % 3], ex[(i + 2) % 3]);
    let r2 = (own - v % own) % own;
    let q = smallest_q(others, own, r2).ok_or(ConvertError::NoSolution {
        prime: 0,
        step_modulus: others,
        target_modulus: own,
        residue: r2,
    })?;
    let powers: Vec<u64> = (0..3)
        .map(|j| (q + if j == i { v } else { 0 }) / ex[j])
        .collect();
    Ok((powers[0], powers[1], powers[2]))
}

/// Builds the {x, x+1, x+2} resultant equation with Pegg Value exactly `v`
/// from the identity (W^(x+2))^x + (W^(x+1))^(x+1) = (W^x V)^(x+2) with
/// W = V^(x+2) - 1.
pub fn generate_identity(v: u64, x: u64) -> ResultantEquation {
    assert!(v >= 2, "target Pegg Value must be >= 2");
    assert!(x >= 3, "smallest exponent must be >= 3");
    let xe = u32::try_from(x).expect("exponent fits u32");
    let w = BigUint::from(v).pow(xe + 2) - 1u32;
    let exps = ExponentTriple::new(x, x + 1, x + 2);
    let bases = [w.pow(xe + 2), w.pow(xe + 1), w.pow(xe) * v];
    let coeffs = [w.pow(xe + 2), w.pow(xe + 1), w.pow(xe)];
    let multiplier = w.pow(xe * (xe + 2));
    let source = w.to_u64().map(|w64| OriginalEquation {
        exps,
        coeffs: [1, w64, 1],
        bases: [1, 1, v],
        sign: Permutation::CzMinusAx,
    });
    let res = ResultantEquation {
        exps,
        bases,
        coeffs,
        multiplier,
        sign: Permutation::CzMinusAx,
        source,
    };
    debug_assert!(res.verify());
    res
}
