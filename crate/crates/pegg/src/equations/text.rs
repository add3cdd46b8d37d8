//! Canonical text form `d*a^x + e*b^y = f*c^z` with unit coefficients
//! omitted. Addends print smaller term first; the sum side prints last.

use super::{ExponentTriple, OriginalEquation, Permutation, ResultantEquation};
use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("expected `P + Q = R` with three `coeff*base^exp` terms: {0}")]
    Shape(String),
    #[error("bad integer `{0}`")]
    Integer(String),
    #[error("term `{0}` must look like [coeff*]base^exp")]
    Term(String),
}

fn fmt_term(coeff: &BigUint, base: &BigUint, exp: u64) -> String {
    if coeff == &BigUint::from(1u32) {
        format!("{}^{}", base, exp)
    } else {
        format!("{}*{}^{}", coeff, base, exp)
    }
}

fn render(terms: [(BigUint, BigUint, u64); 3], sum: usize) -> String {
    let mut addends: Vec<usize> = (0..3).filter(|&i| i != sum).collect();
    let value = |i: usize| -> BigUint { &terms[i].0 * terms[i].1.pow(terms[i].2 as u32) };
    addends.sort_by_key(|&i| value(i));
    format!(
        "{} + {} = {}",
        fmt_term(
            &terms[addends[0]].0,
            &terms[addends[0]].1,
            terms[addends[0]].2
        ),
        fmt_term(
            &terms[addends[1]].0,
            &terms[addends[1]].1,
            terms[addends[1]].2
        ),
        fmt_term(&terms[sum].0, &terms[sum].1, terms[sum].2),
    )
}

impl std::fmt::Display for OriginalEquation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let terms = std::array::from_fn(|i| {
            (
                BigUint::from(self.coeffs[i]),
                BigUint::from(self.bases[i]),
                self.exps.as_array()[i],
            )
        });
        f.write_str(&render(terms, self.sum_index()))
    }
}

impl std::fmt::Display for ResultantEquation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let terms = std::array::from_fn(|i| {
            (
                BigUint::from(1u32),
                self.bases[i].clone(),
                self.exps.as_array()[i],
            )
        });
        f.write_str(&render(terms, self.sum_index()))
    }
}

struct RawTerm {
    coeff: u64,
    base: u64,
    exp: u64,
}

fn parse_u64(s: &str) -> Result<u64, ParseError> {
    s.trim()
        .parse::<u64>()
        .map_err(|_| ParseError::Integer(s.trim().to_string()))
}

fn parse_term(s: &str) -> Result<RawTerm, ParseError> {
    let s = s.trim();
    let (coeff, rest) = match s.split_once('*') {
        Some((c, r)) => (parse_u64(c)?, r),
        None => (1, s),
    };
    let (base, exp) = rest
        .split_once('^')
        .ok_or_else(|| ParseError::Term(s.to_string()))?;
    let exp = parse_u64(exp)?;
    if exp > 1_000_000 {
        return Err(ParseError::Integer(format!("exponent {exp} out of range")));
    }
    Ok(RawTerm {
        coeff,
        base: parse_u64(base)?,
        exp,
    })
}

/// Parses `P + Q = R` and maps the terms onto the (a,x), (b,y), (c,z) slots:
/// a sole coefficient lands in the c slot, the (remaining) sum side in the a
/// slot, and when both addends are coefficient-free the larger one becomes a.
pub fn parse_original(input: &str) -> Result<OriginalEquation, ParseError> {
    let (lhs, rhs) = input
        .split_once('=')
        .ok_or_else(|| ParseError::Shape(input.to_string()))?;
    let (p, q) = lhs
        .split_once('+')
        .ok_or_else(|| ParseError::Shape(input.to_string()))?;
    let terms = [parse_term(p)?, parse_term(q)?, parse_term(rhs)?];
    let value = |t: &RawTerm| BigUint::from(t.coeff) * BigUint::from(t.base).pow(t.exp as u32);

    let coeff_addend = (0..2).find(|&i| terms[i].coeff > 1);
    let (a_i, b_i, c_i, sign) = match coeff_addend {
        // coefficient on an addend: the sum side plays a^x - f c^z = b^y
        Some(ci) if terms[2].coeff == 1 => (2, 1 - ci, ci, Permutation::AxMinusCz),
        // coefficient on the sum (or nowhere): a^x + b^y = f c^z
        _ => {
            let (big, small) = if value(&terms[0]) >= value(&terms[1]) {
                (0, 1)
            } else {
                (1, 0)
            };
            (big, small, 2, Permutation::CzMinusAx)
        }
    };
    Ok(OriginalEquation {
        exps: ExponentTriple::new(terms[a_i].exp, terms[b_i].exp, terms[c_i].exp),
        coeffs: [terms[a_i].coeff, terms[b_i].coeff, terms[c_i].coeff],
        bases: [terms[a_i].base, terms[b_i].base, terms[c_i].base],
        sign,
    })
}

impl std::str::FromStr for OriginalEquation {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_original(s)
    }
}
