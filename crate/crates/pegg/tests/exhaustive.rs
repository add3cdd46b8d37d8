//! Fully independent cross-check of the range calculus: a dumb enumerator
//! that loops raw (f, c, a) triples with no candidate pruning, no range
//! formulas, and no residue machinery must find exactly the hits the
//! table-driven search finds.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use pegg::equations::{
    convert_to_resultant, pegg_report, reassociate_min, ExponentTriple, OriginalEquation,
    Permutation,
};
use pegg::search::{
    a_range, base_minimums, c_range, search_collect, SearchConfig, SearchTables, TablePlan,
};

fn cube_root_floor(n: u64) -> u64 {
    let mut r = (n as f64).cbrt() as u64;
    while (r + 1).pow(3) <= n {
        r += 1;
    }
    while r.pow(3) > n {
        r -= 1;
    }
    r
}

fn is_cube(n: u64) -> Option<u64> {
    let r = cube_root_floor(n);
    (r.pow(3) == n).then_some(r)
}

fn is_k_free_u64(mut n: u64, k: u32) -> bool {
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            if e >= k {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// Smallest multiplier for a {3,3,4} coefficient by direct scan: the least N
/// that is a cube with N*f a fourth power.
fn brute_multiplier(f: u64) -> u64 {
    let mut b = 1u64;
    loop {
        let n = b * b * b;
        let nf = n * f;
        let r = (nf as f64).powf(0.25) as u64;
        if (r.saturating_sub(2)..=r + 2).any(|c| c.pow(4) == nf) {
            return n;
        }
        b += 1;
    }
}

/// Keeps a hit when its maximum Pegg Value (after re-association within the
/// budget) reaches v.
fn qualifies(eq: &OriginalEquation, s_max: &BigUint, v: u64) -> bool {
    let res = convert_to_resultant(eq).unwrap();
    let raw = pegg_report(&res).pegg_value;
    let maxi = pegg_report(&reassociate_min(&res, s_max)).pegg_value;
    raw.max(maxi) >= BigUint::from(v)
}

#[test]
fn search_matches_unpruned_enumeration_334() {
    let s_max_log2 = 29u64;
    let s_max_u = 1u64 << s_max_log2;
    let s_max = BigUint::one() << s_max_log2;
    let v = 2u64;

    let mut expected: Vec<OriginalEquation> = Vec::new();
    let exps = ExponentTriple::new(3, 3, 4);
    let mut f = 2u64;
    loop {
        // the smallest size any form reaches is N*f = f^4 (c = 1)
        if f.checked_pow(4).map_or(true, |x| x > s_max_u) {
            break;
        }
        if !is_k_free_u64(f, 4) {
            f += 1;
            continue;
        }
        let n = brute_multiplier(f);
        // f c^4 - a^3 = b^3 (includes a = b at the halving point)
        let mut c = 1u64;
        while let Some(t) = f
            .checked_mul(c.pow(4))
            .filter(|t| n.checked_mul(*t).is_some_and(|s| s <= s_max_u))
        {
            for a in 1..=cube_root_floor(t.saturating_sub(1)) {
                let rest = t - a.pow(3);
                if let Some(b) = is_cube(rest) {
                    if b > a || b == 0 {
                        continue; // convention: a holds the larger addend
                    }
                    if (a as u128).gcd(&(f as u128 * c as u128)) != 1 {
                        continue;
                    }
                    let eq =
                        OriginalEquation::new(exps, [1, 1, f], [a, b, c], Permutation::CzMinusAx);
                    if qualifies(&eq, &s_max, v) {
                        expected.push(eq);
                    }
                }
            }
            c += 1;
        }
        // a^3 - f c^4 = b^3
        let a_cap = cube_root_floor(s_max_u / n);
        for a in 2..=a_cap {
            let acube = a.pow(3);
            let mut c = 1u64;
            while let Some(t) = f.checked_mul(c.pow(4)).filter(|t| *t < acube) {
                if let Some(b) = is_cube(acube - t) {
                    if b >= 1 && (a as u128).gcd(&(f as u128 * c as u128)) == 1 {
                        let eq = OriginalEquation::new(
                            exps,
                            [1, 1, f],
                            [a, b, c],
                            Permutation::AxMinusCz,
                        );
                        if qualifies(&eq, &s_max, v) {
                            expected.push(eq);
                        }
                    }
                }
                c += 1;
            }
        }
        f += 1;
    }
    expected.sort_by_key(|e| (e.coeffs[2], e.bases[2], e.bases[0], e.sign.label()));
    expected.dedup();

    let config = SearchConfig::new(exps, s_max, v);
    let plan = TablePlan {
        skip_factors: Some(vec![13, 19]),
        ..TablePlan::default()
    };
    let tables = SearchTables::build(&config, &plan).unwrap();
    let mut got: Vec<OriginalEquation> = search_collect(&config, &tables)
        .unwrap()
        .into_iter()
        .map(|h| h.record.original)
        .collect();
    got.sort_by_key(|e| (e.coeffs[2], e.bases[2], e.bases[0], e.sign.label()));

    assert!(!expected.is_empty(), "the record equation lies below 2^26");
    assert_eq!(got, expected);
}

#[test]
fn range_endpoints_are_tight() {
    // values just outside the computed ranges violate a size bound or a base
    // minimum when checked directly
    let exps = ExponentTriple::new(3, 3, 4);
    let v = 3u64;
    let mins = base_minimums(exps, v).unwrap();
    let s_min = BigUint::one() << 20;
    let s_max = BigUint::one() << 30;
    for f in [2u64, 3, 9, 13] {
        let n = BigUint::from(f).pow(3);
        for perm in [Permutation::AxMinusCz, Permutation::CzMinusAx] {
            let Ok((c_lo, c_hi)) = c_range(f, &n, perm, exps, mins, &s_min, &s_max).unwrap() else {
                continue;
            };
            if perm == Permutation::CzMinusAx {
                // one past the top c overshoots s_max
                let size = &n * f * BigUint::from(c_hi + 1).pow(4);
                assert!(size > s_max, "f={f}");
                // one below the bottom c undershoots s_min or the base floor
                if c_lo > mins.c_min1 {
                    let below = c_lo - 1;
                    let size = &n * f * BigUint::from(below).pow(4);
                    let floor =
                        BigUint::from(mins.a_min1).pow(3) + BigUint::from(mins.b_min1).pow(3);
                    assert!(
                        size < s_min || BigUint::from(f) * BigUint::from(below).pow(4) < floor,
                        "f={f}"
                    );
                }
            }
            for c in [c_lo, (c_lo + c_hi) / 2, c_hi] {
                let Ok((a_lo, a_hi)) = a_range(f, &n, c, perm, exps, mins, &s_min, &s_max).unwrap()
                else {
                    continue;
                };
                let fcz = BigUint::from(f) * BigUint::from(c).pow(4);
                match perm {
                    Permutation::AxMinusCz => {
                        let size = &n * BigUint::from(a_hi + 1).pow(3);
                        assert!(size > s_max, "f={f} c={c}");
                        if a_lo > 1 {
                            let below = BigUint::from(a_lo - 1).pow(3);
                            let min_size = &n * &below;
                            let needed = &fcz + BigUint::from(mins.b_min1).pow(3);
                            assert!(min_size < s_min || below < needed, "f={f} c={c}");
                        }
                    }
                    Permutation::CzMinusAx => {
                        // one past the top a leaves less than b_min^y
                        let over = BigUint::from(a_hi + 1).pow(3);
                        assert!(
                            over > &fcz - BigUint::from(mins.b_min1).pow(3),
                            "f={f} c={c}"
                        );
                        if a_lo > 1 {
                            // one below the bottom a hands the larger half to b
                            let under = BigUint::from(a_lo - 1).pow(3);
                            assert!(&under * 2u32 < fcz, "f={f} c={c}");
                        }
                    }
                    Permutation::AxPlusCz => unreachable!(),
                }
            }
        }
    }
}
