//! Shared helpers for integration tests: a table-free reference search that
//! walks every a base and applies only the rigorous power test.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use pegg::equations::{
    convert_to_resultant, pegg_report, reassociate_min, validate_original, OriginalEquation,
    Permutation,
};
use pegg::numtheory::integer_kth_root;
use pegg::search::{
    a_range, base_minimums, c_range, coefficient_candidates_for, Hit, SearchConfig, SearchRecord,
};

/// Reference search: same candidate and range calculus as the production
/// path, but no elimination table, no skip-ahead table, and no residue
/// filter. Every a base in range gets the rigorous test.
pub fn naive_search(config: &SearchConfig, gcd_first: bool) -> Vec<Hit> {
    let mut hits = Vec::new();
    for &perm in &config.permutations {
        let exps = config.exps;
        let (x, y, z) = (exps.x, exps.y, exps.z);
        let mins = base_minimums(exps, config.min_pegg.max(1)).unwrap();
        for (f, n) in coefficient_candidates_for(config, perm).unwrap() {
            let (c_lo, c_hi) =
                match c_range(f, &n, perm, exps, mins, &config.s_min, &config.s_max).unwrap() {
                    Ok(r) => r,
                    Err(_) => continue,
                };
            for c in c_lo..=c_hi {
                let (a_lo, a_hi) = match a_range(
                    f,
                    &n,
                    c,
                    perm,
                    exps,
                    mins,
                    &config.s_min,
                    &config.s_max,
                )
                .unwrap()
                {
                    Ok(r) => r,
                    Err(_) => continue,
                };
                let fcz = BigUint::from(f) * BigUint::from(c).pow(z as u32);
                for a in a_lo..=a_hi {
                    let coprime = (a as u128).gcd(&(f as u128 * c as u128)) == 1;
                    if gcd_first && !coprime {
                        continue;
                    }
                    let ax = BigUint::from(a).pow(x as u32);
                    let diff = match perm {
                        Permutation::AxMinusCz => &ax - &fcz,
                        _ => &fcz - &ax,
                    };
                    let root = integer_kth_root(&diff, y).unwrap();
                    if root.pow(y as u32) != diff {
                        continue;
                    }
                    if !coprime {
                        continue;
                    }
                    let b = root.to_u64().unwrap();
                    let original = OriginalEquation::new(exps, [1, 1, f], [a, b, c], perm);
                    assert!(validate_original(&original).is_ok(), "{original}");
                    let resultant = convert_to_resultant(&original).unwrap();
                    let report = pegg_report(&resultant);
                    let budget = config
                        .reassociation_budget
                        .clone()
                        .unwrap_or_else(|| config.s_max.clone());
                    let improved = reassociate_min(&resultant, &budget);
                    let maximized = if improved.multiplier != resultant.multiplier {
                        let rep = pegg_report(&improved);
                        Some(SearchRecord {
                            original: original.clone(),
                            resultant: improved,
                            report: rep,
                        })
                    } else {
                        None
                    };
                    let hit = Hit {
                        record: SearchRecord {
                            original,
                            resultant,
                            report,
                        },
                        maximized,
                    };
                    if hit.best().report.pegg_value >= BigUint::from(config.min_pegg) {
                        hits.push(hit);
                    }
                }
            }
        }
    }
    hits.sort_by_key(|h| {
        (
            h.record.resultant.size(),
            h.record.original.bases[0],
            h.record.original.bases[2],
            h.record.original.coeffs[2],
        )
    });
    hits
}

pub fn originals(hits: &[Hit]) -> Vec<OriginalEquation> {
    hits.iter().map(|h| h.record.original.clone()).collect()
}
