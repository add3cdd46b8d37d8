//! Precomputed per-residue admissibility tables for the inner search loop.
//!
//! The elimination tables flag f*c^z residue classes for which no a base can
//! make the difference a y-th power residue; a flagged class skips the whole
//! a loop. The skip-ahead table stores, for every f*c^z residue class modulo
//! a product of filter moduli, the cyclic gaps between admissible a residues,
//! so the a loop only ever lands on candidates that are compatible modulo the
//! whole product.
//!
//! Delta encoding per class: first entry is the smallest admissible residue
//! (distance from 0), middle entries are the gaps between neighbours, and the
//! last entry closes the cycle back to the first residue of the next period.
//! Entries therefore sum to the modulus and walking them from any period
//! anchor visits each admissible residue exactly once per period.

mod io;

pub use io::{
    load_elimination_cotable, load_skipahead, save_elimination_cotable, save_skipahead,
    TableIoError,
};

use crate::equations::{ExponentTriple, Permutation};
use crate::numtheory::{factorize, gcd_u64, is_k_free, mul_mod, pow_mod};
use rayon::prelude::*;
use std::sync::atomic::{AtomicBool, Ordering};
use thiserror::Error;

pub const DEFAULT_MEMORY_BUDGET: u64 = 4 << 30;

/// Each elimination co-table flag array stays below this size so the hot
/// lookup stays cache-friendly; the suggested composite moduli are split
/// greedily under this cap.
pub const ELIMINATION_COTABLE_CAP: u64 = 1 << 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("no suggested moduli for exponent set {0} / {1}")]
    UnknownExponentSet(ExponentTriple, Permutation),
    #[error("projected skip-ahead table size {projected} bytes exceeds the {budget} byte budget")]
    BudgetExceeded { projected: u128, budget: u64 },
    #[error("skip-ahead factors must be pairwise coprime prime powers in [2, 65536)")]
    BadFactors,
    #[error("loop bound exceeds the 64-bit base range")]
    Overflow,
}

/// Moduli selection for one (exponent ordering, permutation) search
/// configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSpec {
    pub exps: ExponentTriple,
    pub permutation: Permutation,
    /// Elimination factor moduli grouped into co-tables.
    pub elimination_cotables: Vec<Vec<u64>>,
    pub skipahead_factors: Vec<u64>,
    /// When set, the skip-ahead table only serves classes reachable as
    /// `f * c^z` for this fixed coefficient.
    pub single_coefficient: Option<u64>,
    pub memory_budget: u64,
}

impl TableSpec {
    pub fn skipahead_modulus(&self) -> u64 {
        self.skipahead_factors.iter().product()
    }

    fn validate(&self) -> Result<(), TableError> {
        let fs = &self.skipahead_factors;
        if fs.is_empty() || fs.iter().any(|&m| !(2..65_536).contains(&m)) {
            return Err(TableError::BadFactors);
        }
        for i in 0..fs.len() {
            for j in i + 1..fs.len() {
                if gcd_u64(fs[i], fs[j]) != 1 {
                    return Err(TableError::BadFactors);
                }
            }
        }
        let mut m: u64 = 1;
        for &f in fs {
            m = m.checked_mul(f).ok_or(TableError::Overflow)?;
        }
        if m > u32::MAX as u64 {
            return Err(TableError::Overflow);
        }
        Ok(())
    }
}

struct SpecRow {
    exps: (u64, u64, u64),
    permutation: Option<Permutation>, // None = both
    elimination: &'static [u64],
    skipahead: &'static [u64],
}

/// Suggested moduli per exponent ordering (x loops a bases, y is power
/// tested, z carries the coefficient).
const SPEC_ROWS: &[SpecRow] = &[
    SpecRow {
        exps: (3, 3, 4),
        permutation: None,
        elimination: &[7, 9],
        skipahead: &[13, 19, 31, 37],
    },
    SpecRow {
        exps: (3, 3, 5),
        permutation: None,
        elimination: &[7, 9],
        skipahead: &[13, 19, 31, 37],
    },
    SpecRow {
        exps: (4, 4, 3),
        permutation: Some(Permutation::AxMinusCz),
        elimination: &[5, 16, 17],
        skipahead: &[9, 13, 29, 37],
    },
    SpecRow {
        exps: (4, 4, 3),
        permutation: Some(Permutation::CzMinusAx),
        elimination: &[5, 13, 16, 17, 27, 29, 49, 121, 1849],
        skipahead: &[9, 13, 29, 37],
    },
    SpecRow {
        exps: (4, 4, 5),
        permutation: Some(Permutation::AxMinusCz),
        elimination: &[5, 16, 17],
        skipahead: &[9, 13, 29, 37],
    },
    SpecRow {
        exps: (4, 4, 5),
        permutation: Some(Permutation::CzMinusAx),
        elimination: &[5, 13, 16, 17, 27, 29, 49, 121, 1849],
        skipahead: &[37, 41, 53],
    },
    SpecRow {
        exps: (5, 5, 3),
        permutation: None,
        elimination: &[11, 25, 31, 41, 61],
        skipahead: &[61, 71, 101],
    },
    SpecRow {
        exps: (5, 5, 4),
        permutation: None,
        elimination: &[11, 25, 31, 41, 61],
        skipahead: &[41, 61, 71],
    },
    SpecRow {
        exps: (4, 3, 5),
        permutation: None,
        elimination: &[13],
        skipahead: &[7, 9, 19, 31],
    },
    SpecRow {
        exps: (5, 3, 4),
        permutation: None,
        elimination: &[31],
        skipahead: &[7, 9, 13, 19],
    },
    SpecRow {
        exps: (3, 4, 5),
        permutation: None,
        elimination: &[13],
        skipahead: &[5, 9, 16, 17, 29],
    },
    SpecRow {
        exps: (5, 4, 3),
        permutation: None,
        elimination: &[11, 41],
        skipahead: &[5, 9, 13, 16],
    },
    SpecRow {
        exps: (3, 5, 4),
        permutation: None,
        elimination: &[31],
        skipahead: &[11, 25, 41, 61],
    },
    SpecRow {
        exps: (4, 5, 3),
        permutation: None,
        elimination: &[11, 41],
        skipahead: &[25, 31, 61],
    },
];

fn find_row(exps: ExponentTriple, permutation: Permutation) -> Option<&'static SpecRow> {
    SPEC_ROWS.iter().find(|r| {
        r.exps == (exps.x, exps.y, exps.z) && r.permutation.map_or(true, |p| p == permutation)
    })
}

/// Splits elimination factor moduli into co-tables, first-fit decreasing
/// under the flag-array size cap.
fn split_cotables(factors: &[u64], cap: u64) -> Vec<Vec<u64>> {
    let mut sorted: Vec<u64> = factors.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut groups: Vec<(u64, Vec<u64>)> = Vec::new();
    for f in sorted {
        match groups
            .iter_mut()
            .find(|(prod, _)| prod.saturating_mul(f) <= cap)
        {
            Some((prod, members)) => {
                *prod *= f;
                members.push(f);
            }
            None => groups.push((f, vec![f])),
        }
    }
    groups.into_iter().map(|(_, m)| m).collect()
}

/// Standard table layout for a known exponent ordering and permutation.
pub fn default_spec(
    exps: ExponentTriple,
    permutation: Permutation,
) -> Result<TableSpec, TableError> {
    let row =
        find_row(exps, permutation).ok_or(TableError::UnknownExponentSet(exps, permutation))?;
    Ok(TableSpec {
        exps,
        permutation,
        elimination_cotables: split_cotables(row.elimination, ELIMINATION_COTABLE_CAP),
        skipahead_factors: row.skipahead.to_vec(),
        single_coefficient: None,
        memory_budget: DEFAULT_MEMORY_BUDGET,
    })
}

/// Single-coefficient layout: the standard skip-ahead product extended with
/// the smallest power-test modulus not already used by it.
pub fn single_coefficient_spec(
    exps: ExponentTriple,
    permutation: Permutation,
    coefficient: u64,
) -> Result<TableSpec, TableError> {
    let mut spec = default_spec(exps, permutation)?;
    let defaults = crate::powerfilter::default_moduli(exps.y)
        .map_err(|_| TableError::UnknownExponentSet(exps, permutation))?;
    let mut candidates: Vec<u64> = defaults;
    candidates.sort_unstable();
    let extra = candidates
        .into_iter()
        .find(|&m| spec.skipahead_factors.iter().all(|&s| gcd_u64(m, s) == 1))
        .ok_or(TableError::BadFactors)?;
    spec.skipahead_factors.insert(0, extra);
    spec.skipahead_factors.sort_unstable();
    spec.single_coefficient = Some(coefficient);
    Ok(spec)
}

/// Coefficients worth an individual skip-ahead table, in decreasing order of
/// the combinations they produce.
pub fn suggested_single_coefficients(exps: ExponentTriple) -> &'static [u64] {
    match (exps.x, exps.y, exps.z) {
        (3, 3, 4) => &[3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13],
        (4, 4, 3) => &[4, 2, 9, 25, 3, 36, 49, 18, 100],
        _ => &[],
    }
}

// ---------------------------------------------------------------------------
// elimination tables

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationCoTable {
    pub modulus: u64,
    pub factors: Vec<u64>,
    /// flags[r] != 0 means no a base exists for this f*c^z residue.
    pub flags: Vec<u8>,
}

impl EliminationCoTable {
    #[inline]
    pub fn is_flagged(&self, residue: u64) -> bool {
        self.flags[residue as usize] != 0
    }

    pub fn flagged_count(&self) -> u64 {
        self.flags.iter().filter(|&&f| f != 0).count() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationTable {
    pub exps: ExponentTriple,
    pub permutation: Permutation,
    pub cotables: Vec<EliminationCoTable>,
}

impl EliminationTable {
    /// True when some co-table proves no a base can pair with this (f, c).
    pub fn eliminates(&self, f: u64, c: u64) -> bool {
        let z = self.exps.z;
        self.cotables.iter().any(|ct| {
            let m = ct.modulus;
            let r = mul_mod(f % m, pow_mod(c, z, m), m);
            ct.is_flagged(r)
        })
    }
}

/// Per-factor flag array: r flagged iff no s makes the difference a y-th
/// power residue mod m.
fn factor_flags(m: u64, x: u64, y: u64, permutation: Permutation) -> Vec<bool> {
    let t = factor_admissible_counts(m, x, y, permutation);
    t.into_iter().map(|c| c == 0).collect()
}

/// Per-factor admissible-count table: t[r] = #{s mod m : the (r, s) difference
/// is a y-th power residue mod m}.
fn factor_admissible_counts(m: u64, x: u64, y: u64, permutation: Permutation) -> Vec<u32> {
    let mut yres = vec![false; m as usize];
    for s in 0..m {
        yres[pow_mod(s, y, m) as usize] = true;
    }
    let sx: Vec<u64> = (0..m).map(|s| pow_mod(s, x, m)).collect();
    let mut t = vec![0u32; m as usize];
    for r in 0..m {
        let mut count = 0;
        for &v in &sx {
            let d = match permutation {
                Permutation::CzMinusAx => (r + m - v) % m,
                _ => (v + m - r) % m,
            };
            if yres[d as usize] {
                count += 1;
            }
        }
        t[r as usize] = count;
    }
    t
}

/// Brute-force construction over each co-modulus via its prime-power factors.
pub fn build_elimination_table(spec: &TableSpec) -> EliminationTable {
    let cotables = spec
        .elimination_cotables
        .iter()
        .map(|factors| {
            let modulus: u64 = factors.iter().product();
            let per_factor: Vec<(u64, Vec<bool>)> = factors
                .iter()
                .map(|&m| {
                    (
                        m,
                        factor_flags(m, spec.exps.x, spec.exps.y, spec.permutation),
                    )
                })
                .collect();
            let mut flags = vec![0u8; modulus as usize];
            for (r, slot) in flags.iter_mut().enumerate() {
                let flagged = per_factor.iter().any(|(m, f)| f[(r as u64 % m) as usize]);
                *slot = flagged as u8;
            }
            let mut factors = factors.clone();
            factors.sort_unstable();
            EliminationCoTable {
                modulus,
                factors,
                flags,
            }
        })
        .collect();
    EliminationTable {
        exps: spec.exps,
        permutation: spec.permutation,
        cotables,
    }
}

// ---------------------------------------------------------------------------
// skip-ahead table

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Deltas {
    U16(Vec<u16>),
    U32(Vec<u32>),
}

impl Deltas {
    pub fn len(&self) -> usize {
        match self {
            Deltas::U16(v) => v.len(),
            Deltas::U32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn get(&self, i: usize) -> u64 {
        match self {
            Deltas::U16(v) => v[i] as u64,
            Deltas::U32(v) => v[i] as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkipaheadTable {
    pub exps: ExponentTriple,
    pub permutation: Permutation,
    pub modulus: u64,
    pub factors: Vec<u64>,
    pub single_coefficient: Option<u64>,
    /// Prefix offsets into the delta block, one slot per residue class plus a
    /// final end marker.
    pub class_offsets: Vec<u64>,
    pub deltas: Deltas,
}

impl SkipaheadTable {
    pub fn entry_width(&self) -> u8 {
        match self.deltas {
            Deltas::U16(_) => 2,
            Deltas::U32(_) => 4,
        }
    }

    pub fn class_entry_count(&self, residue: u64) -> u64 {
        self.class_offsets[residue as usize + 1] - self.class_offsets[residue as usize]
    }

    /// Number of admissible a residues in a class (entries minus the closing
    /// gap), zero for eliminated or unreachable classes.
    pub fn class_len(&self, residue: u64) -> u64 {
        self.class_entry_count(residue).saturating_sub(1)
    }

    pub fn total_bytes(&self) -> u64 {
        self.deltas.len() as u64 * self.entry_width() as u64 + self.class_offsets.len() as u64 * 8
    }

    pub fn matches_spec(&self, spec: &TableSpec) -> bool {
        self.exps == spec.exps
            && self.permutation == spec.permutation
            && self.modulus == spec.skipahead_modulus()
            && self.single_coefficient == spec.single_coefficient
    }

    /// Yields exactly the a in [a_start, a_max] whose residue class is
    /// admissible for the given f*c^z residue, in increasing order, advancing
    /// only by stored gaps after the initial alignment walk.
    pub fn admissible_iter(&self, fc_residue: u64, a_start: u64, a_max: u64) -> AdmissibleIter<'_> {
        assert!(fc_residue < self.modulus);
        assert!(
            a_max < u64::MAX - self.modulus,
            "a range exceeds the 64-bit word contract"
        );
        let start = self.class_offsets[fc_residue as usize] as usize;
        let end = self.class_offsets[fc_residue as usize + 1] as usize;
        AdmissibleIter {
            deltas: &self.deltas,
            start,
            end,
            idx: start,
            pos: a_start - a_start % self.modulus,
            a_start,
            a_max,
        }
    }
}

/// Iterator over admissible a bases; see `SkipaheadTable::admissible_iter`.
pub struct AdmissibleIter<'a> {
    deltas: &'a Deltas,
    start: usize,
    end: usize,
    idx: usize,
    pos: u64,
    a_start: u64,
    a_max: u64,
}

impl Iterator for AdmissibleIter<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.start == self.end {
            return None;
        }
        loop {
            let d = self.deltas.get(self.idx);
            self.pos += d;
            let is_value = self.idx + 1 != self.end;
            self.idx += 1;
            if self.idx == self.end {
                self.idx = self.start;
            }
            if self.pos > self.a_max {
                return None;
            }
            if is_value && self.pos >= self.a_start {
                return Some(self.pos);
            }
        }
    }
}

pub fn admissible_a_iterator<'a>(
    table: &'a SkipaheadTable,
    fc_residue: u64,
    a_start: u64,
    a_max: u64,
) -> AdmissibleIter<'a> {
    table.admissible_iter(fc_residue, a_start, a_max)
}

struct FactorData {
    m: u64,
    t: Vec<u32>,
    reachable: Option<Vec<bool>>,
}

fn factor_data(spec: &TableSpec) -> Vec<FactorData> {
    spec.skipahead_factors
        .iter()
        .map(|&m| {
            let t = factor_admissible_counts(m, spec.exps.x, spec.exps.y, spec.permutation);
            let reachable = spec.single_coefficient.map(|f| {
                let mut reach = vec![false; m as usize];
                for c in 0..m {
                    reach[mul_mod(f % m, pow_mod(c, spec.exps.z, m), m) as usize] = true;
                }
                reach
            });
            FactorData { m, t, reachable }
        })
        .collect()
}

/// Exact projected byte size of the table a build would produce (2-byte
/// entries assumed), without allocating it.
pub fn projected_skipahead_bytes(spec: &TableSpec) -> Result<u128, TableError> {
    spec.validate()?;
    let data = factor_data(spec);
    let mut entries: u128 = 1;
    let mut nonempty: u128 = 1;
    let mut modulus: u128 = 1;
    for fd in &data {
        let mut sum: u128 = 0;
        let mut cnt: u128 = 0;
        for r in 0..fd.m as usize {
            if fd.reachable.as_ref().map_or(true, |re| re[r]) {
                sum += fd.t[r] as u128;
                if fd.t[r] > 0 {
                    cnt += 1;
                }
            }
        }
        entries *= sum;
        nonempty *= cnt;
        modulus *= fd.m as u128;
    }
    Ok((entries + nonempty) * 2 + (modulus + 1) * 8)
}

trait DeltaEntry: Copy + Send + Sync + Default {
    const LIMIT: u64;
    fn from_delta(d: u64) -> Self;
}

impl DeltaEntry for u16 {
    const LIMIT: u64 = u16::MAX as u64;
    fn from_delta(d: u64) -> Self {
        d as u16
    }
}

impl DeltaEntry for u32 {
    const LIMIT: u64 = u32::MAX as u64;
    fn from_delta(d: u64) -> Self {
        d as u32
    }
}

/// Builds the per-class delta lists. Classes are partitioned into contiguous
/// blocks filled in parallel; block contents only depend on the block range,
/// so the output is deterministic for any worker count.
pub fn build_skipahead_table(spec: &TableSpec) -> Result<SkipaheadTable, TableError> {
    let projected = projected_skipahead_bytes(spec)?;
    if projected > spec.memory_budget as u128 {
        return Err(TableError::BudgetExceeded {
            projected,
            budget: spec.memory_budget,
        });
    }
    let data = factor_data(spec);
    let m: u64 = spec.skipahead_factors.iter().product();

    // y-th power residues of the full modulus, ascending
    let mut yres_per_factor: Vec<Vec<bool>> = Vec::new();
    for fd in &data {
        let mut yres = vec![false; fd.m as usize];
        for s in 0..fd.m {
            yres[pow_mod(s, spec.exps.y, fd.m) as usize] = true;
        }
        yres_per_factor.push(yres);
    }
    let ys: Vec<u32> = (0..m)
        .filter(|&w| {
            data.iter()
                .zip(&yres_per_factor)
                .all(|(fd, yres)| yres[(w % fd.m) as usize])
        })
        .map(|w| w as u32)
        .collect();

    // per-class entry counts -> prefix offsets
    let mut offsets = vec![0u64; m as usize + 1];
    {
        let mut residues = vec![0u64; data.len()];
        for r in 0..m as usize {
            let mut reachable = true;
            let mut t: u64 = 1;
            for (k, fd) in data.iter().enumerate() {
                let rr = residues[k] as usize;
                if let Some(re) = &fd.reachable {
                    reachable &= re[rr];
                }
                t *= fd.t[rr] as u64;
                residues[k] += 1;
                if residues[k] == fd.m {
                    residues[k] = 0;
                }
            }
            let count = if reachable && t > 0 { t + 1 } else { 0 };
            offsets[r + 1] = offsets[r] + count;
        }
    }
    let total = offsets[m as usize] as usize;

    let sx: Vec<u32> = (0..m).map(|s| pow_mod(s, spec.exps.x, m) as u32).collect();

    let mut deltas16 = vec![0u16; total];
    if fill_deltas(spec, m, &offsets, &ys, &sx, &mut deltas16) {
        return Ok(SkipaheadTable {
            exps: spec.exps,
            permutation: spec.permutation,
            modulus: m,
            factors: spec.skipahead_factors.clone(),
            single_coefficient: spec.single_coefficient,
            class_offsets: offsets,
            deltas: Deltas::U16(deltas16),
        });
    }
    drop(deltas16);

    // a gap overflowed 16 bits: rebuild with 4-byte entries
    let projected32 = projected * 2;
    if projected32 > spec.memory_budget as u128 {
        return Err(TableError::BudgetExceeded {
            projected: projected32,
            budget: spec.memory_budget,
        });
    }
    let mut deltas32 = vec![0u32; total];
    let ok = fill_deltas(spec, m, &offsets, &ys, &sx, &mut deltas32);
    assert!(ok, "gap exceeded 32 bits");
    Ok(SkipaheadTable {
        exps: spec.exps,
        permutation: spec.permutation,
        modulus: m,
        factors: spec.skipahead_factors.clone(),
        single_coefficient: spec.single_coefficient,
        class_offsets: offsets,
        deltas: Deltas::U32(deltas32),
    })
}

/// Scatter fill; returns false if some gap exceeds the entry type.
fn fill_deltas<T: DeltaEntry>(
    spec: &TableSpec,
    m: u64,
    offsets: &[u64],
    ys: &[u32],
    sx: &[u32],
    deltas: &mut [T],
) -> bool {
    let class_count = m as usize;
    let threads = rayon::current_num_threads().max(1);
    let target_blocks = (threads * 4).min(class_count.max(1));
    let per_block = (offsets[class_count] / target_blocks as u64).max(1);

    // cut block boundaries on class edges, balanced by entry count
    let mut bounds = vec![0usize];
    let mut next_target = per_block;
    for r in 0..class_count {
        if offsets[r + 1] >= next_target && r + 1 < class_count {
            bounds.push(r + 1);
            next_target = offsets[r + 1] + per_block;
        }
    }
    bounds.push(class_count);

    // hand each block its disjoint slice of the delta buffer
    let mut jobs: Vec<(usize, usize, &mut [T])> = Vec::new();
    let mut rest = deltas;
    for w in bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let len = (offsets[hi] - offsets[lo]) as usize;
        let (head, tail) = rest.split_at_mut(len);
        jobs.push((lo, hi, head));
        rest = tail;
    }

    let overflow = AtomicBool::new(false);
    jobs.into_par_iter().for_each(|(lo, hi, block)| {
        if fill_block(spec, m, offsets, ys, sx, lo, hi, block).is_err() {
            overflow.store(true, Ordering::Relaxed);
        }
    });
    !overflow.load(Ordering::Relaxed)
}

fn fill_block<T: DeltaEntry>(
    spec: &TableSpec,
    m: u64,
    offsets: &[u64],
    ys: &[u32],
    sx: &[u32],
    lo: usize,
    hi: usize,
    block: &mut [T],
) -> Result<(), ()> {
    let base = offsets[lo];
    let width = hi - lo;
    let mut cursor = vec![u64::MAX; width];
    let mut last = vec![0u32; width];
    for r in lo..hi {
        if offsets[r + 1] > offsets[r] {
            cursor[r - lo] = offsets[r] - base;
        }
    }
    let cz_form = spec.permutation == Permutation::CzMinusAx;
    let (lo64, hi64) = (lo as u64, hi as u64);
    let len = hi64 - lo64;
    {
        let mut push = |r: usize, s: u64| -> Result<(), ()> {
            let slot = r - lo;
            let cur = cursor[slot];
            if cur == u64::MAX {
                return Ok(()); // unreachable class under a single coefficient
            }
            let delta = s - last[slot] as u64;
            if delta > T::LIMIT {
                return Err(());
            }
            block[cur as usize] = T::from_delta(delta);
            cursor[slot] = cur + 1;
            last[slot] = s as u32;
            Ok(())
        };
        for s in 0..m {
            let v = sx[s as usize] as u64;
            // class r = v + y (cz form) or v - y (ax form); find the y window
            // mapping into [lo, hi)
            let start = if cz_form {
                (lo64 + m - v) % m
            } else {
                (v + m - (hi64 - 1)) % m
            };
            // window [start, start+len) cyclically
            let first_len = len.min(m - start);
            for &yv in locate(ys, start, first_len) {
                let r = class_of(v, yv as u64, m, cz_form);
                push(r as usize, s)?;
            }
            if first_len < len {
                for &yv in locate(ys, 0, len - first_len) {
                    let r = class_of(v, yv as u64, m, cz_form);
                    push(r as usize, s)?;
                }
            }
        }
    }
    // close each nonempty class back to its first residue
    for r in lo..hi {
        let slot = r - lo;
        if cursor[slot] == u64::MAX {
            continue;
        }
        let end = offsets[r + 1] - base;
        debug_assert_eq!(cursor[slot], end - 1, "class {r} fill mismatch");
        let delta = m - last[slot] as u64;
        if delta > T::LIMIT {
            return Err(());
        }
        block[(end - 1) as usize] = T::from_delta(delta);
    }
    Ok(())
}

#[inline]
fn class_of(v: u64, y: u64, m: u64, cz_form: bool) -> u64 {
    let mut r = if cz_form { v + y } else { v + m - y };
    if r >= m {
        r -= m;
    }
    r
}

/// Slice of the sorted residue list covering [start, start+len).
fn locate(ys: &[u32], start: u64, len: u64) -> &[u32] {
    let from = ys.partition_point(|&y| (y as u64) < start);
    let to = ys.partition_point(|&y| (y as u64) < start + len);
    &ys[from..to]
}

// ---------------------------------------------------------------------------
// measured elimination rates

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub elimination_pct: f64,
    pub skipahead_pct: f64,
    pub combined_pct: f64,
    pub coefficient_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateWeighting {
    /// f runs over z-th-power-free coefficients 2..=f_limit.
    PowerFreeCoefficients,
    /// f runs over all residue classes of the combined modulus.
    AllResidues,
}

/// Percentage of (f, c residue, a residue) combinations eliminated by the
/// elimination tables alone, the skip-ahead table alone, and both together.
/// Computed exactly per prime-power factor; factors sharing a prime between
/// the elimination and skip-ahead moduli are handled jointly since a flagged
/// class has no admissible a residues at all.
pub fn measure_rates(spec: &TableSpec, f_limit: u64, weighting: RateWeighting) -> RateReport {
    let z = spec.exps.z;
    let elim_factors: Vec<u64> = spec
        .elimination_cotables
        .iter()
        .flatten()
        .copied()
        .collect();
    let skip_factors = spec.skipahead_factors.clone();

    struct PerFactor {
        m: u64,
        flagged_c: Vec<u64>, // per f residue: number of flagged c residues
        t_sum: Vec<u64>,     // per f residue: sum over c of admissible counts
    }
    let build = |m: u64| -> PerFactor {
        let t = factor_admissible_counts(m, spec.exps.x, spec.exps.y, spec.permutation);
        let cz: Vec<u64> = (0..m).map(|c| pow_mod(c, z, m)).collect();
        let mut flagged_c = vec![0u64; m as usize];
        let mut t_sum = vec![0u64; m as usize];
        for g in 0..m {
            for c in 0..m {
                let r = mul_mod(g, cz[c as usize], m) as usize;
                if t[r] == 0 {
                    flagged_c[g as usize] += 1;
                }
                t_sum[g as usize] += t[r] as u64;
            }
        }
        PerFactor {
            m,
            flagged_c,
            t_sum,
        }
    };
    let elim: Vec<PerFactor> = elim_factors.iter().map(|&m| build(m)).collect();
    let skip: Vec<PerFactor> = skip_factors.iter().map(|&m| build(m)).collect();

    // prime groups for the combined statistic
    struct Group {
        max_m: u64,
        elim: Vec<u64>,
        skip: Vec<u64>,
        table: Vec<u64>, // per f residue: sum over c of the joint survival weight
        den_c: u128,     // max_m * prod(skip moduli in the group)
    }
    let prime_of = |m: u64| factorize(m)[0].0;
    let mut groups: Vec<(u64, Group)> = Vec::new();
    for &m in elim_factors.iter() {
        let p = prime_of(m);
        match groups.iter_mut().find(|(gp, _)| *gp == p) {
            Some((_, g)) => g.elim.push(m),
            None => groups.push((
                p,
                Group {
                    max_m: 0,
                    elim: vec![m],
                    skip: vec![],
                    table: vec![],
                    den_c: 0,
                },
            )),
        }
    }
    for &m in skip_factors.iter() {
        let p = prime_of(m);
        match groups.iter_mut().find(|(gp, _)| *gp == p) {
            Some((_, g)) => g.skip.push(m),
            None => groups.push((
                p,
                Group {
                    max_m: 0,
                    elim: vec![],
                    skip: vec![m],
                    table: vec![],
                    den_c: 0,
                },
            )),
        }
    }
    for (_, g) in groups.iter_mut() {
        let mm = g.elim.iter().chain(&g.skip).copied().max().unwrap();
        g.max_m = mm;
        let tables: Vec<(u64, Vec<u32>)> = g
            .elim
            .iter()
            .chain(&g.skip)
            .map(|&m| {
                (
                    m,
                    factor_admissible_counts(m, spec.exps.x, spec.exps.y, spec.permutation),
                )
            })
            .collect();
        let n_elim = g.elim.len();
        let mut table = vec![0u64; mm as usize];
        for gres in 0..mm {
            let mut total = 0u64;
            for c in 0..mm {
                let mut w = 1u64;
                for (i, (m, t)) in tables.iter().enumerate() {
                    let r = mul_mod(gres % m, pow_mod(c, z, *m), *m) as usize;
                    if i < n_elim {
                        if t[r] == 0 {
                            w = 0;
                            break;
                        }
                    } else {
                        w *= t[r] as u64;
                    }
                }
                total += w;
            }
            table[gres as usize] = total;
        }
        g.table = table;
        g.den_c = g.max_m as u128 * g.skip.iter().map(|&m| m as u128).product::<u128>();
    }

    let elim_den: u128 = elim.iter().map(|pf| pf.m as u128).product();
    let skip_den: u128 = skip
        .iter()
        .map(|pf| (pf.m as u128) * (pf.m as u128))
        .product();
    let comb_den: u128 = groups.iter().map(|(_, g)| g.den_c).product();

    match weighting {
        RateWeighting::PowerFreeCoefficients => {
            let mut n: u64 = 0;
            let mut elim_surv: u128 = 0;
            let mut skip_surv: u128 = 0;
            let mut comb_surv: u128 = 0;
            for f in 2..=f_limit {
                if !is_k_free(f, z) {
                    continue;
                }
                n += 1;
                let mut e: u128 = 1;
                for pf in &elim {
                    e *= (pf.m - pf.flagged_c[(f % pf.m) as usize]) as u128;
                }
                elim_surv += e;
                let mut s: u128 = 1;
                for pf in &skip {
                    s *= pf.t_sum[(f % pf.m) as usize] as u128;
                }
                skip_surv += s;
                let mut c: u128 = 1;
                for (_, g) in &groups {
                    c *= g.table[(f % g.max_m) as usize] as u128;
                }
                comb_surv += c;
            }
            let pct = |survived: u128, den: u128| -> f64 {
                100.0 * (1.0 - survived as f64 / (den as f64 * n as f64))
            };
            RateReport {
                elimination_pct: pct(elim_surv, elim_den),
                skipahead_pct: pct(skip_surv, skip_den),
                combined_pct: pct(comb_surv, comb_den),
                coefficient_count: n,
            }
        }
        RateWeighting::AllResidues => {
            // coefficient residues are independent across coprime factors, so
            // each statistic collapses to a product of per-factor averages
            let mut elim_frac = 1.0f64;
            for pf in &elim {
                let surv: u128 = pf.flagged_c.iter().map(|&c| (pf.m - c) as u128).sum();
                elim_frac *= surv as f64 / (pf.m as f64 * pf.m as f64);
            }
            let mut skip_frac = 1.0f64;
            for pf in &skip {
                let surv: u128 = pf.t_sum.iter().map(|&t| t as u128).sum();
                skip_frac *= surv as f64 / (pf.m as f64 * pf.m as f64 * pf.m as f64);
            }
            let mut comb_frac = 1.0f64;
            for (_, g) in &groups {
                let surv: u128 = g.table.iter().map(|&t| t as u128).sum();
                comb_frac *= surv as f64 / (g.max_m as f64 * g.den_c as f64);
            }
            let _ = (elim_den, skip_den, comb_den);
            RateReport {
                elimination_pct: 100.0 * (1.0 - elim_frac),
                skipahead_pct: 100.0 * (1.0 - skip_frac),
                combined_pct: 100.0 * (1.0 - comb_frac),
                coefficient_count: 0,
            }
        }
    }
}
