//! Range-bounded search for original equations convertible to resultant
//! equations with a minimum desired Pegg Value, plus the ladder mode that
//! walks a size range and records each strictly higher Pegg Value at its
//! smallest equation.
//!
//! Loop structure per permutation: c bases ascending, then the valid
//! coefficients for that c, then the admissible a bases served by the
//! skip-ahead table; survivors of the residue filter get the rigorous y-th
//! power test, then the coprimality check, then conversion and Pegg
//! maximization.

#[cfg(test)]
mod tests;

use crate::equations::{
    convert_to_resultant, pegg_report, reassociate_min, validate_original, ExponentTriple,
    OriginalEquation, PeggReport, Permutation, ResultantEquation,
};
use crate::numtheory::{factorize, integer_kth_root, lcm_u64, mul_mod, pow_mod, smallest_q};
use crate::powerfilter::{build_filter, default_moduli, DiffDirection, ResidueFilterSet};
use crate::residue_tables::{
    build_elimination_table, build_skipahead_table, default_spec, load_skipahead, save_skipahead,
    single_coefficient_spec, suggested_single_coefficients, EliminationTable, SkipaheadTable,
    TableError, TableIoError, TableSpec,
};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{CheckedSub, One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    TableIo(#[from] TableIoError),
    #[error("cached table does not match the search configuration: {0}")]
    SpecMismatch(String),
    #[error("base minimums are undefined for exponent ordering {0}")]
    UnknownMinimums(ExponentTriple),
    #[error("exponent reordering requires three distinct exponents, got {0}")]
    NotDistinct(ExponentTriple),
    #[error("coefficient exponent {0} not in the exponent set")]
    BadPlacement(u64),
    #[error("permutation ax_plus_cz is run via input reordering, not directly")]
    PlusPermutation,
    #[error("loop bound exceeds the 64-bit base range")]
    Overflow,
    #[error("no tables built for permutation {0}")]
    MissingTables(Permutation),
}

/// Bounds and goal for one search run. Exponents follow the run ordering:
/// z is the coefficient exponent, x the looped base, y the power-tested base.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub exps: ExponentTriple,
    pub permutations: Vec<Permutation>,
    pub s_min: BigUint,
    pub s_max: BigUint,
    /// Minimum desired Pegg Value V.
    pub min_pegg: u64,
    pub coefficient_overrides: Option<Vec<u64>>,
    /// Budget for Pegg-maximizing re-association; defaults to s_max.
    pub reassociation_budget: Option<BigUint>,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl SearchConfig {
    pub fn new(exps: ExponentTriple, s_max: BigUint, min_pegg: u64) -> Self {
        SearchConfig {
            exps,
            permutations: vec![Permutation::AxMinusCz, Permutation::CzMinusAx],
            s_min: BigUint::one(),
            s_max,
            min_pegg,
            coefficient_overrides: None,
            reassociation_budget: None,
            workers: 0,
        }
    }

    fn reassoc_budget(&self) -> &BigUint {
        self.reassociation_budget.as_ref().unwrap_or(&self.s_max)
    }
}

/// Smallest admissible original bases for a target Pegg Value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaseMinimums {
    pub a_min1: u64,
    pub b_min1: u64,
    pub c_min1: u64,
}

fn div_ceil_u64(n: u64, d: u64) -> u64 {
    n.div_ceil(d)
}

/// Base minimums per exponent ordering. For {x,x,z} the base(s) on the
/// highest exponent must reach V. For the all-distinct set the coefficient
/// sits on z and the resultant coefficient ratios fix the per-exponent
/// divisors.
pub fn base_minimums(exps: ExponentTriple, v: u64) -> Result<BaseMinimums, SearchError> {
    let (x, y, z) = (exps.x, exps.y, exps.z);
    if x == y && x != z {
        return Ok(if z > x {
            BaseMinimums {
                a_min1: 1,
                b_min1: 1,
                c_min1: v,
            }
        } else {
            BaseMinimums {
                a_min1: v,
                b_min1: v,
                c_min1: 1,
            }
        });
    }
    if exps.all_distinct() && exps.sorted() == [3, 4, 5] {
        let min_for = |e: u64| -> u64 {
            match (z, e) {
                (3, 3) => div_ceil_u64(v, 8),
                (3, 4) => div_ceil_u64(v, 2),
                (4, 3) => div_ceil_u64(v, 4),
                (4, 4) => div_ceil_u64(v, 2),
                (5, 3) => div_ceil_u64(v, 2),
                _ => v,
            }
        };
        return Ok(BaseMinimums {
            a_min1: min_for(x),
            b_min1: min_for(y),
            c_min1: min_for(z),
        });
    }
    Err(SearchError::UnknownMinimums(exps))
}

// ---------------------------------------------------------------------------
// range calculus

/// A range whose lower bound exceeds its upper bound; both are reported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmptyRange {
    pub min: BigUint,
    pub max: BigUint,
}

fn floor_root_ratio(num: &BigUint, den: &BigUint, k: u64) -> BigUint {
    (num / den).nth_root(k as u32)
}

/// Smallest c with c^k * den >= num.
fn ceil_root_ratio(num: &BigUint, den: &BigUint, k: u64) -> BigUint {
    let r = floor_root_ratio(num, den, k);
    if &r.pow(k as u32) * den >= *num {
        r
    } else {
        r + 1u32
    }
}

fn to_u64_range(
    min: &BigUint,
    max: &BigUint,
) -> Result<Result<(u64, u64), EmptyRange>, SearchError> {
    if min > max {
        return Ok(Err(EmptyRange {
            min: min.clone(),
            max: max.clone(),
        }));
    }
    let lo = min.to_u64().ok_or(SearchError::Overflow)?;
    let hi = max.to_u64().ok_or(SearchError::Overflow)?;
    Ok(Ok((lo, hi)))
}

/// Valid c bases for a coefficient under the given permutation.
pub fn c_range(
    f: u64,
    n: &BigUint,
    permutation: Permutation,
    exps: ExponentTriple,
    mins: BaseMinimums,
    s_min: &BigUint,
    s_max: &BigUint,
) -> Result<Result<(u64, u64), EmptyRange>, SearchError> {
    let (x, y, z) = (exps.x, exps.y, exps.z);
    let b_min_pow = BigUint::from(mins.b_min1).pow(y as u32);
    match permutation {
        Permutation::AxMinusCz => {
            // size = N * a^x = N * (f c^z + b^y)
            let c_min = BigUint::from(mins.c_min1);
            let budget = match s_max.checked_sub(&(n * &b_min_pow)) {
                Some(b) => b,
                None => {
                    return Ok(Err(EmptyRange {
                        min: c_min,
                        max: BigUint::zero(),
                    }))
                }
            };
            let c_max = floor_root_ratio(&budget, &(n * f), z);
            to_u64_range(&c_min, &c_max)
        }
        Permutation::CzMinusAx => {
            // size = N * f * c^z
            let nf = n * f;
            let c_min2 = ceil_root_ratio(s_min, &nf, z);
            let a_min_pow = BigUint::from(mins.a_min1).pow(x as u32);
            let c_min3 = ceil_root_ratio(&(a_min_pow + b_min_pow), &BigUint::from(f), z);
            let c_min = BigUint::from(mins.c_min1).max(c_min2).max(c_min3);
            let c_max = floor_root_ratio(s_max, &nf, z);
            to_u64_range(&c_min, &c_max)
        }
        Permutation::AxPlusCz => Err(SearchError::PlusPermutation),
    }
}

/// Valid a bases for a (coefficient, c base) pair under the permutation.
pub fn a_range(
    f: u64,
    n: &BigUint,
    c: u64,
    permutation: Permutation,
    exps: ExponentTriple,
    mins: BaseMinimums,
    s_min: &BigUint,
    s_max: &BigUint,
) -> Result<Result<(u64, u64), EmptyRange>, SearchError> {
    let (x, y, z) = (exps.x, exps.y, exps.z);
    let fcz = BigUint::from(f) * BigUint::from(c).pow(z as u32);
    let b_min_pow = BigUint::from(mins.b_min1).pow(y as u32);
    let one = BigUint::one();
    match permutation {
        Permutation::AxMinusCz => {
            // size = N * a^x; a^x >= f c^z + b_min^y
            let a_min2 = ceil_root_ratio(s_min, n, x);
            let a_min3 = ceil_root_ratio(&(&fcz + &b_min_pow), &one, x);
            let a_min = BigUint::from(mins.a_min1).max(a_min2).max(a_min3);
            let a_max = floor_root_ratio(s_max, n, x);
            to_u64_range(&a_min, &a_max)
        }
        Permutation::CzMinusAx => {
            // a^x <= f c^z - b_min^y; when x = y the a term holds the larger half
            let a_min = if x == y {
                BigUint::from(mins.a_min1).max(ceil_root_ratio(&fcz, &BigUint::from(2u32), x))
            } else {
                BigUint::from(mins.a_min1)
            };
            let budget = match fcz.checked_sub(&b_min_pow) {
                Some(b) => b,
                None => {
                    return Ok(Err(EmptyRange {
                        min: a_min,
                        max: BigUint::zero(),
                    }))
                }
            };
            let a_max = floor_root_ratio(&budget, &one, x);
            to_u64_range(&a_min, &a_max)
        }
        Permutation::AxPlusCz => Err(SearchError::PlusPermutation),
    }
}

// ---------------------------------------------------------------------------
// coefficient candidates

/// Power of p contributed to the resultant coefficient of the
/// highest-exponent base, per unit of coefficient valuation (the coefficient
/// sits on z).
fn coeff_power_in_r(exps: ExponentTriple, v: u64) -> Option<u64> {
    let (x, y, z) = (exps.x, exps.y, exps.z);
    let h = exps.max();
    let r2 = (z - v % z) % z;
    let q = smallest_q(lcm_u64(x, y), z, r2)?;
    Some(if z == h { (q + v) / h } else { q / h })
}

/// Largest ratio of coefficient valuation to its resultant-coefficient power;
/// bounds the coefficient scan at R_max^T.
pub fn max_coefficient_ratio(exps: ExponentTriple) -> Result<u64, SearchError> {
    let mut t = 1u64;
    for v in 1..exps.z {
        let power = coeff_power_in_r(exps, v).ok_or(SearchError::UnknownMinimums(exps))?;
        if power > 0 {
            t = t.max(v.div_ceil(power));
        }
    }
    Ok(t)
}

/// Multiplier for a single coefficient f on the z slot.
fn multiplier_for_coefficient(exps: ExponentTriple, f: u64) -> Option<BigUint> {
    let (x, y, z) = (exps.x, exps.y, exps.z);
    let mut n = BigUint::one();
    for (p, vp) in factorize(f) {
        let r2 = (z - vp as u64 % z) % z;
        let q = smallest_q(lcm_u64(x, y), z, r2)?;
        n *= BigUint::from(p).pow(q as u32);
    }
    Some(n)
}

/// Coefficient candidates surviving the power-free, multiplier-feasibility
/// and c-range steps for one permutation, paired with their multipliers.
pub fn coefficient_candidates_for(
    config: &SearchConfig,
    permutation: Permutation,
) -> Result<Vec<(u64, BigUint)>, SearchError> {
    let exps = config.exps;
    let v = config.min_pegg.max(1);
    let mins = base_minimums(exps, v)?;
    let h = exps.max();
    let r_max = (config.s_max.nth_root(h as u32) / v)
        .to_u64()
        .ok_or(SearchError::Overflow)?;
    if r_max == 0 {
        return Ok(Vec::new());
    }
    let t = max_coefficient_ratio(exps)?;
    let o_max = r_max
        .checked_pow(t.try_into().map_err(|_| SearchError::Overflow)?)
        .ok_or(SearchError::Overflow)?;
    let v_big = BigUint::from(v);
    let mut out = Vec::new();
    let candidates: Vec<u64> = match &config.coefficient_overrides {
        Some(list) => list.clone(),
        None => (2..=o_max).collect(),
    };
    for f in candidates {
        let fac = factorize(f);
        // step 1: z-th power free
        if fac.iter().any(|&(_, e)| e as u64 >= exps.z) {
            continue;
        }
        // step 2: the resultant coefficient R on the highest exponent must
        // leave room for a base >= V inside s_max
        let mut r = BigUint::one();
        let mut solvable = true;
        for &(p, vp) in &fac {
            match coeff_power_in_r(exps, vp as u64) {
                Some(power) => r *= BigUint::from(p).pow(power as u32),
                None => {
                    solvable = false;
                    break;
                }
            }
        }
        if !solvable || (r * &v_big).pow(h as u32) > config.s_max {
            continue;
        }
        // step 3: a nonempty c range must exist
        let n = match multiplier_for_coefficient(exps, f) {
            Some(n) => n,
            None => continue,
        };
        if c_range(f, &n, permutation, exps, mins, &config.s_min, &config.s_max)?.is_ok() {
            out.push((f, n));
        }
    }
    Ok(out)
}

/// Union of the per-permutation candidate lists, ascending.
pub fn coefficient_candidates(config: &SearchConfig) -> Result<Vec<u64>, SearchError> {
    let mut set = Vec::new();
    for &perm in &config.permutations {
        for (f, _) in coefficient_candidates_for(config, perm)? {
            if !set.contains(&f) {
                set.push(f);
            }
        }
    }
    set.sort_unstable();
    Ok(set)
}

/// Run orderings covering all three sign permutations of an all-distinct
/// exponent set with the coefficient on the given exponent.
pub fn reorder_for_distinct_exponents(
    exps: ExponentTriple,
    coefficient_on: u64,
) -> Result<Vec<(ExponentTriple, Permutation)>, SearchError> {
    if !exps.all_distinct() {
        return Err(SearchError::NotDistinct(exps));
    }
    let mut others: Vec<u64> = exps
        .as_array()
        .into_iter()
        .filter(|&e| e != coefficient_on)
        .collect();
    if others.len() != 2 {
        return Err(SearchError::BadPlacement(coefficient_on));
    }
    others.sort_unstable();
    let (small, large) = (others[0], others[1]);
    Ok(vec![
        (
            ExponentTriple::new(large, small, coefficient_on),
            Permutation::AxMinusCz,
        ),
        (
            ExponentTriple::new(large, small, coefficient_on),
            Permutation::CzMinusAx,
        ),
        // the ax_plus_cz case: b^y - f c^z = a^x run as ax_minus_cz with x, y swapped
        (
            ExponentTriple::new(small, large, coefficient_on),
            Permutation::AxMinusCz,
        ),
    ])
}

// ---------------------------------------------------------------------------
// tables wiring

/// Overrides for table construction; the default builds the suggested layout.
#[derive(Debug, Clone, Default)]
pub struct TablePlan {
    pub skip_factors: Option<Vec<u64>>,
    pub elimination_factors: Option<Vec<Vec<u64>>>,
    /// Build single-coefficient skip-ahead tables for these coefficients.
    pub single_coefficients: Vec<u64>,
    pub memory_budget: Option<u64>,
    /// Use the suggested per-coefficient table list for this exponent set.
    pub suggested_singles: bool,
}

impl TablePlan {
    pub fn spec_for(
        &self,
        exps: ExponentTriple,
        permutation: Permutation,
    ) -> Result<TableSpec, TableError> {
        let mut spec = default_spec(exps, permutation)?;
        if let Some(f) = &self.skip_factors {
            spec.skipahead_factors = f.clone();
        }
        if let Some(e) = &self.elimination_factors {
            spec.elimination_cotables = e.clone();
        }
        if let Some(b) = self.memory_budget {
            spec.memory_budget = b;
        }
        Ok(spec)
    }

    fn single_list(&self, exps: ExponentTriple) -> Vec<u64> {
        let mut list = self.single_coefficients.clone();
        if self.suggested_singles {
            list.extend_from_slice(suggested_single_coefficients(exps));
        }
        list.sort_unstable();
        list.dedup();
        list
    }
}

pub struct PermTables {
    pub permutation: Permutation,
    pub elimination: EliminationTable,
    pub skipahead: Arc<SkipaheadTable>,
    pub single: HashMap<u64, Arc<SkipaheadTable>>,
    /// Power-test filter with the standard skip-ahead factors removed.
    pub filter: ResidueFilterSet,
    /// Filter matching the single-coefficient tables, when any exist.
    pub filter_single: Option<ResidueFilterSet>,
}

pub struct SearchTables {
    pub per_perm: Vec<PermTables>,
}

impl SearchTables {
    pub fn for_permutation(&self, p: Permutation) -> Option<&PermTables> {
        self.per_perm.iter().find(|t| t.permutation == p)
    }

    /// Builds every table in memory for the configured permutations.
    pub fn build(config: &SearchConfig, plan: &TablePlan) -> Result<Self, SearchError> {
        Self::load_or_build(None, config, plan)
    }

    /// Loads skip-ahead tables from the cache directory when present (and
    /// matching), building and saving them otherwise. Elimination tables are
    /// cheap and always rebuilt. For odd y the two permutations share one
    /// skip-ahead table: negation maps the y-th residues onto themselves, so
    /// the admissible classes coincide.
    pub fn load_or_build(
        cache_dir: Option<&Path>,
        config: &SearchConfig,
        plan: &TablePlan,
    ) -> Result<Self, SearchError> {
        let mut built: HashMap<String, Arc<SkipaheadTable>> = HashMap::new();
        let mut obtain = |spec: &TableSpec| -> Result<Arc<SkipaheadTable>, SearchError> {
            let spec = canonicalize_spec(spec);
            let key = table_file_name(&spec);
            if let Some(t) = built.get(&key) {
                return Ok(Arc::clone(t));
            }
            let table = Arc::new(obtain_skipahead(cache_dir, &spec)?);
            built.insert(key, Arc::clone(&table));
            Ok(table)
        };
        let mut per_perm = Vec::new();
        for &perm in &config.permutations {
            if perm == Permutation::AxPlusCz {
                return Err(SearchError::PlusPermutation);
            }
            let spec = plan.spec_for(config.exps, perm)?;
            let elimination = build_elimination_table(&spec);
            let skipahead = obtain(&spec)?;
            let mut single = HashMap::new();
            let mut single_factors: Option<Vec<u64>> = None;
            let mut singles = plan.single_list(config.exps);
            if let Some(allowed) = &config.coefficient_overrides {
                singles.retain(|f| allowed.contains(f));
            }
            for f in singles {
                let mut sspec = single_coefficient_spec(config.exps, perm, f)?;
                if let Some(b) = plan.memory_budget {
                    sspec.memory_budget = b;
                }
                single_factors = Some(sspec.skipahead_factors.clone());
                single.insert(f, obtain(&sspec)?);
            }
            let filter = filter_excluding(config.exps.y, &spec.skipahead_factors)?;
            let filter_single = match single_factors {
                Some(fs) => Some(filter_excluding(config.exps.y, &fs)?),
                None => None,
            };
            per_perm.push(PermTables {
                permutation: perm,
                elimination,
                skipahead,
                single,
                filter,
                filter_single,
            });
        }
        Ok(SearchTables { per_perm })
    }
}

/// Skip-ahead content is identical for both permutations when y is odd; use
/// one canonical table (and cache file) in that case.
fn canonicalize_spec(spec: &TableSpec) -> TableSpec {
    let mut spec = spec.clone();
    if spec.exps.y % 2 == 1 {
        spec.permutation = Permutation::CzMinusAx;
    }
    spec
}

fn filter_excluding(y: u64, used: &[u64]) -> Result<ResidueFilterSet, SearchError> {
    let moduli: Vec<u64> = default_moduli(y)
        .map_err(|_| SearchError::UnknownMinimums(ExponentTriple::new(y, y, y)))?
        .into_iter()
        .filter(|m| !used.contains(m))
        .collect();
    Ok(build_filter(y, &moduli))
}

pub fn table_file_name(spec: &TableSpec) -> String {
    let e = spec.exps;
    let single = spec.single_coefficient.map_or(0, |f| f);
    format!(
        "skip_{}_{}_{}_{}_{}_m{}.pggt",
        e.x,
        e.y,
        e.z,
        spec.permutation.label(),
        single,
        spec.skipahead_modulus()
    )
}

fn obtain_skipahead(
    cache_dir: Option<&Path>,
    spec: &TableSpec,
) -> Result<SkipaheadTable, SearchError> {
    if let Some(dir) = cache_dir {
        let path = dir.join(table_file_name(spec));
        if path.exists() {
            let table = load_skipahead(&path)?;
            if !table.matches_spec(spec) {
                return Err(SearchError::SpecMismatch(format!(
                    "{} holds {} {} modulus {}",
                    path.display(),
                    table.exps,
                    table.permutation,
                    table.modulus
                )));
            }
            return Ok(table);
        }
        let table = build_skipahead_table(spec)?;
        std::fs::create_dir_all(dir).map_err(TableIoError::Io)?;
        save_skipahead(&table, &path)?;
        return Ok(table);
    }
    Ok(build_skipahead_table(spec)?)
}

// ---------------------------------------------------------------------------
// the search proper

/// A found equation with its conversion and report.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchRecord {
    pub original: OriginalEquation,
    pub resultant: ResultantEquation,
    pub report: PeggReport,
}

impl SearchRecord {
    fn sort_key(&self) -> (BigUint, u64, u64, u64) {
        (
            self.resultant.size(),
            self.original.bases[0],
            self.original.bases[2],
            self.original.coeffs[2],
        )
    }
}

/// A raw hit plus its re-associated form when that strictly improves the
/// Pegg Value within the budget.
#[derive(Debug, Clone)]
pub struct Hit {
    pub record: SearchRecord,
    pub maximized: Option<SearchRecord>,
}

impl Hit {
    /// The form Algorithm-style callers want: maximum Pegg Value.
    pub fn best(&self) -> &SearchRecord {
        self.maximized.as_ref().unwrap_or(&self.record)
    }
}

/// Collects every hit in range whose maximum Pegg Value reaches the
/// configured minimum, sorted by (size, a, c, f). Deterministic for any
/// worker count.
pub fn search_collect(
    config: &SearchConfig,
    tables: &SearchTables,
) -> Result<Vec<Hit>, SearchError> {
    let run = || -> Result<Vec<Hit>, SearchError> {
        let mut hits: Vec<Hit> = Vec::new();
        for &perm in &config.permutations {
            let pt = tables
                .for_permutation(perm)
                .ok_or(SearchError::MissingTables(perm))?;
            hits.extend(search_permutation(config, pt)?);
        }
        hits.sort_by(|p, q| p.record.sort_key().cmp(&q.record.sort_key()));
        Ok(hits)
    };
    if config.workers == 0 {
        run()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .expect("thread pool");
        pool.install(run)
    }
}

fn search_permutation(config: &SearchConfig, pt: &PermTables) -> Result<Vec<Hit>, SearchError> {
    let perm = pt.permutation;
    let exps = config.exps;
    let mins = base_minimums(exps, config.min_pegg.max(1))?;
    let mut franges: Vec<(u64, BigUint, u64, u64)> = Vec::new();
    for (f, n) in coefficient_candidates_for(config, perm)? {
        if let Ok((lo, hi)) = c_range(f, &n, perm, exps, mins, &config.s_min, &config.s_max)? {
            franges.push((f, n, lo, hi));
        }
    }
    if franges.is_empty() {
        return Ok(Vec::new());
    }
    let c_lo = franges.iter().map(|r| r.2).min().unwrap();
    let c_hi = franges.iter().map(|r| r.3).max().unwrap();
    if c_hi == u64::MAX {
        return Err(SearchError::Overflow);
    }

    let results: Vec<Result<Vec<Hit>, SearchError>> = (c_lo..c_hi + 1)
        .into_par_iter()
        .map(|c| {
            let mut local = Vec::new();
            for (f, n, lo, hi) in &franges {
                if c < *lo || c > *hi {
                    continue;
                }
                scan_a_bases(config, pt, mins, *f, n, c, &mut local)?;
            }
            Ok(local)
        })
        .collect();
    let mut hits = Vec::new();
    for r in results {
        hits.extend(r?);
    }
    Ok(hits)
}

fn scan_a_bases(
    config: &SearchConfig,
    pt: &PermTables,
    mins: BaseMinimums,
    f: u64,
    n: &BigUint,
    c: u64,
    out: &mut Vec<Hit>,
) -> Result<(), SearchError> {
    let perm = pt.permutation;
    let exps = config.exps;
    let (x, y, z) = (exps.x, exps.y, exps.z);
    if pt.elimination.eliminates(f, c) {
        return Ok(());
    }
    let (a_lo, a_hi) = match a_range(f, n, c, perm, exps, mins, &config.s_min, &config.s_max)? {
        Ok(r) => r,
        Err(_) => return Ok(()),
    };
    let (table, filter) = match pt.single.get(&f) {
        Some(t) => (t.as_ref(), pt.filter_single.as_ref().unwrap_or(&pt.filter)),
        None => (pt.skipahead.as_ref(), &pt.filter),
    };
    let m = table.modulus;
    let fc_res = mul_mod(f % m, pow_mod(c, z, m), m);
    let direction = match perm {
        Permutation::AxMinusCz => DiffDirection::AxMinusFc,
        _ => DiffDirection::FcMinusAx,
    };
    let ctx = filter.diff_context(f, c, z, x, direction);
    let fcz = BigUint::from(f) * BigUint::from(c).pow(z as u32);
    for a in table.admissible_iter(fc_res, a_lo, a_hi) {
        if !ctx.passes(a) {
            continue;
        }
        let ax = BigUint::from(a).pow(x as u32);
        let diff = match direction {
            DiffDirection::AxMinusFc => &ax - &fcz,
            DiffDirection::FcMinusAx => &fcz - &ax,
        };
        let b_root = integer_kth_root(&diff, y).expect("y >= 3");
        if b_root.pow(y as u32) != diff {
            continue;
        }
        // gcd check after the power test; gcd(a, f*c) = 1 forces the whole
        // term triple coprime through the sum relation
        if (a as u128).gcd(&(f as u128 * c as u128)) != 1 {
            continue;
        }
        let b = b_root.to_u64().ok_or(SearchError::Overflow)?;
        let original = OriginalEquation::new(exps, [1, 1, f], [a, b, c], perm);
        debug_assert!(validate_original(&original).is_ok(), "{original}");
        let resultant = convert_to_resultant(&original).expect("search hit must convert");
        let report = pegg_report(&resultant);
        debug_assert!(resultant.size() <= config.s_max && resultant.size() >= config.s_min);
        let maximized = {
            let improved = reassociate_min(&resultant, config.reassoc_budget());
            if improved.multiplier != resultant.multiplier {
                let rep = pegg_report(&improved);
                Some(SearchRecord {
                    original: original.clone(),
                    resultant: improved,
                    report: rep,
                })
            } else {
                None
            }
        };
        let raw = SearchRecord {
            original,
            resultant,
            report,
        };
        let hit = Hit {
            record: raw,
            maximized,
        };
        let v_big = BigUint::from(config.min_pegg);
        if hit.best().report.pegg_value >= v_big {
            out.push(hit);
        }
    }
    Ok(())
}

/// First qualifying record by (size, a, c, f), or None when the whole range
/// is exhausted.
pub fn search_once(
    config: &SearchConfig,
    tables: &SearchTables,
) -> Result<Option<SearchRecord>, SearchError> {
    let hits = search_collect(config, tables)?;
    Ok(hits
        .into_iter()
        .map(|h| {
            let best = h.best();
            best.clone()
        })
        .min_by(|p, q| p.sort_key().cmp(&q.sort_key())))
}

/// Walks [s_min, s_max] in power-of-two chunks and emits, per strictly
/// increasing Pegg Value, the smallest resultant equation achieving it.
/// Re-associated forms count at their final (multiplied) size.
pub fn ladder(
    config: &SearchConfig,
    tables: &SearchTables,
) -> Result<Vec<SearchRecord>, SearchError> {
    let mut rows: Vec<SearchRecord> = Vec::new();
    let mut best = BigUint::one();
    let mut pending: Vec<SearchRecord> = Vec::new();
    let k_lo = config.s_min.bits().saturating_sub(1);
    let k_hi = config.s_max.bits().saturating_sub(1);
    for k in k_lo..=k_hi {
        let chunk_lo = (BigUint::one() << k).max(config.s_min.clone());
        let chunk_hi = ((BigUint::one() << (k + 1)) - 1u32).min(config.s_max.clone());
        if chunk_lo > chunk_hi {
            continue;
        }
        let min_pegg = (&best + 1u32).to_u64().ok_or(SearchError::Overflow)?;
        let sub = SearchConfig {
            exps: config.exps,
            permutations: config.permutations.clone(),
            s_min: chunk_lo,
            s_max: chunk_hi.clone(),
            min_pegg,
            coefficient_overrides: config.coefficient_overrides.clone(),
            reassociation_budget: Some(config.s_max.clone()),
            workers: config.workers,
        };
        let mut candidates: Vec<SearchRecord> = Vec::new();
        for hit in search_collect(&sub, tables)? {
            if hit.record.report.pegg_value > best {
                candidates.push(hit.record.clone());
            }
            if let Some(maxi) = hit.maximized {
                if maxi.resultant.size() <= chunk_hi {
                    candidates.push(maxi);
                } else {
                    pending.push(maxi);
                }
            }
        }
        let mut i = 0;
        while i < pending.len() {
            if pending[i].resultant.size() <= chunk_hi {
                candidates.push(pending.swap_remove(i));
            } else {
                i += 1;
            }
        }
        candidates.sort_by(|p, q| p.sort_key().cmp(&q.sort_key()));
        for rec in candidates {
            if rec.report.pegg_value > best {
                best = rec.report.pegg_value.clone();
                rows.push(rec);
            }
        }
    }
    Ok(rows)
}

/// One line of the structured record stream.
#[derive(Debug, Serialize)]
pub struct RecordLine {
    pub exponents: [u64; 3],
    pub permutation: String,
    pub f: u64,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    #[serde(rename = "N")]
    pub n: String,
    #[serde(rename = "A")]
    pub big_a: String,
    #[serde(rename = "B")]
    pub big_b: String,
    #[serde(rename = "C")]
    pub big_c: String,
    pub pegg_value: String,
    pub pegg_power: f64,
    pub log2_size: f64,
    pub stolen: bool,
}

impl From<&SearchRecord> for RecordLine {
    fn from(rec: &SearchRecord) -> Self {
        RecordLine {
            exponents: rec.original.exps.as_array(),
            permutation: rec.original.sign.label().to_string(),
            f: rec.original.coeffs[2],
            a: rec.original.bases[0],
            b: rec.original.bases[1],
            c: rec.original.bases[2],
            n: rec.resultant.multiplier.to_string(),
            big_a: rec.resultant.bases[0].to_string(),
            big_b: rec.resultant.bases[1].to_string(),
            big_c: rec.resultant.bases[2].to_string(),
            pegg_value: rec.report.pegg_value.to_string(),
            pegg_power: rec.report.pegg_power,
            log2_size: rec.report.log2_size,
            stolen: rec.report.stolen,
        }
    }
}
