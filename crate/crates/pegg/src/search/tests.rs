use super::*;
use num_traits::FromPrimitive;

fn exps(x: u64, y: u64, z: u64) -> ExponentTriple {
    ExponentTriple::new(x, y, z)
}

fn big2(bits: u64) -> BigUint {
    BigUint::one() << bits
}

#[test]
fn base_minimums_examples() {
    assert_eq!(
        base_minimums(exps(3, 3, 4), 14).unwrap(),
        BaseMinimums {
            a_min1: 1,
            b_min1: 1,
            c_min1: 14
        }
    );
    assert_eq!(
        base_minimums(exps(5, 5, 3), 63743).unwrap(),
        BaseMinimums {
            a_min1: 63743,
            b_min1: 63743,
            c_min1: 1
        }
    );
    // coefficient on the cube: run ordering {5,4,3}
    let m = base_minimums(exps(5, 4, 3), 63743).unwrap();
    assert_eq!(m.c_min1, 63743_u64.div_ceil(8));
    assert_eq!(m.b_min1, 63743_u64.div_ceil(2));
    assert_eq!(m.a_min1, 63743);
    // coefficient on the 4th power: {5,3,4}
    let m = base_minimums(exps(5, 3, 4), 100).unwrap();
    assert_eq!((m.a_min1, m.b_min1, m.c_min1), (100, 25, 50));
    // coefficient on the 5th power: {4,3,5}
    let m = base_minimums(exps(4, 3, 5), 100).unwrap();
    assert_eq!((m.a_min1, m.b_min1, m.c_min1), (100, 50, 100));
    assert!(base_minimums(exps(3, 4, 7), 5).is_err());
}

#[test]
fn coefficient_ratio_examples() {
    assert_eq!(max_coefficient_ratio(exps(5, 5, 4)).unwrap(), 3);
    assert_eq!(max_coefficient_ratio(exps(4, 4, 3)).unwrap(), 2);
    assert_eq!(max_coefficient_ratio(exps(3, 3, 5)).unwrap(), 2);
    assert_eq!(max_coefficient_ratio(exps(3, 3, 4)).unwrap(), 1);
    assert_eq!(max_coefficient_ratio(exps(5, 5, 3)).unwrap(), 1);
    assert_eq!(max_coefficient_ratio(exps(4, 4, 5)).unwrap(), 1);
}

#[test]
fn coefficient_candidates_quintic_golden() {
    let config = SearchConfig::new(exps(3, 3, 5), big2(88), 63743);
    assert_eq!(coefficient_candidates(&config).unwrap(), vec![4, 9]);
}

#[test]
fn coefficient_candidates_553() {
    let config = SearchConfig::new(exps(5, 5, 3), big2(100), 63743);
    let cz = coefficient_candidates_for(&config, Permutation::CzMinusAx).unwrap();
    let fs: Vec<u64> = cz.iter().map(|(f, _)| *f).collect();
    assert!(!fs.contains(&8), "8 is not cube free");
    assert!(!fs.contains(&16), "16 is not cube free");
    assert!(!fs.contains(&15), "15 has no valid c bases");
    assert!(fs.contains(&14));
    // multiplier for f = 15 would be 3^5 * 5^5
    let n = multiplier_for_coefficient(exps(5, 5, 3), 15).unwrap();
    assert_eq!(n, BigUint::from(3u64).pow(5) * BigUint::from(5u64).pow(5));
}

#[test]
fn c_range_empty_golden_553() {
    let config = SearchConfig::new(exps(5, 5, 3), big2(100), 63743);
    let mins = base_minimums(config.exps, config.min_pegg).unwrap();
    let n = multiplier_for_coefficient(config.exps, 15).unwrap();
    let r = c_range(
        15,
        &n,
        Permutation::CzMinusAx,
        config.exps,
        mins,
        &config.s_min,
        &config.s_max,
    )
    .unwrap();
    match r {
        Err(EmptyRange { min, max }) => {
            assert_eq!(min, BigUint::from(51963742u64));
            assert_eq!(max, BigUint::from(48100619u64));
        }
        Ok(r) => panic!("expected empty range, got {r:?}"),
    }
}

#[test]
fn c_range_ax_minimum_is_base_minimum() {
    let config = SearchConfig::new(exps(3, 3, 4), big2(28), 14);
    let mins = base_minimums(config.exps, config.min_pegg).unwrap();
    let n = multiplier_for_coefficient(config.exps, 9).unwrap();
    let (lo, _) = c_range(
        9,
        &n,
        Permutation::AxMinusCz,
        config.exps,
        mins,
        &config.s_min,
        &config.s_max,
    )
    .unwrap()
    .unwrap();
    assert_eq!(lo, 14);

    // bounds cross when s_max is too small
    let tiny = SearchConfig::new(exps(3, 3, 4), BigUint::from(1000u64), 2);
    let r = c_range(
        9,
        &n,
        Permutation::CzMinusAx,
        tiny.exps,
        base_minimums(tiny.exps, 2).unwrap(),
        &tiny.s_min,
        &tiny.s_max,
    )
    .unwrap();
    assert!(r.is_err());
}

#[test]
fn a_range_examples() {
    let config = SearchConfig::new(exps(3, 3, 4), big2(28), 2);
    let mins = base_minimums(config.exps, 2).unwrap();
    let n = multiplier_for_coefficient(config.exps, 9).unwrap();
    // x = y halving bound
    let (lo, _) = a_range(
        9,
        &n,
        14,
        Permutation::CzMinusAx,
        config.exps,
        mins,
        &config.s_min,
        &config.s_max,
    )
    .unwrap()
    .unwrap();
    assert_eq!(lo, 56);
    // the known solution a = 71 is inside the ax range for f=9, c=14
    let (lo, hi) = a_range(
        9,
        &n,
        14,
        Permutation::AxMinusCz,
        config.exps,
        mins,
        &config.s_min,
        &config.s_max,
    )
    .unwrap()
    .unwrap();
    assert!(lo <= 71 && 71 <= hi, "[{lo}, {hi}]");
    // b_min^y above f*c^z empties the cz range
    let big_mins = BaseMinimums {
        a_min1: 1,
        b_min1: 1_000_000,
        c_min1: 1,
    };
    let r = a_range(
        9,
        &n,
        14,
        Permutation::CzMinusAx,
        config.exps,
        big_mins,
        &config.s_min,
        &config.s_max,
    )
    .unwrap();
    assert!(r.is_err());
}

#[test]
fn reorder_examples() {
    let rows = reorder_for_distinct_exponents(exps(3, 4, 5), 3).unwrap();
    assert_eq!(
        rows,
        vec![
            (exps(5, 4, 3), Permutation::AxMinusCz),
            (exps(5, 4, 3), Permutation::CzMinusAx),
            (exps(4, 5, 3), Permutation::AxMinusCz),
        ]
    );
    let rows = reorder_for_distinct_exponents(exps(3, 4, 5), 5).unwrap();
    assert_eq!(rows[0].0, exps(4, 3, 5));
    assert!(reorder_for_distinct_exponents(exps(3, 3, 4), 4).is_err());
    assert!(reorder_for_distinct_exponents(exps(3, 4, 5), 6).is_err());
}

fn reduced_plan() -> TablePlan {
    TablePlan {
        skip_factors: Some(vec![13, 19]),
        ..TablePlan::default()
    }
}

#[test]
fn search_finds_smallest_334_record() {
    let config = SearchConfig::new(exps(3, 3, 4), big2(28), 2);
    let tables = SearchTables::build(&config, &reduced_plan()).unwrap();
    let rec = search_once(&config, &tables)
        .unwrap()
        .expect("known record");
    assert_eq!(rec.original.to_string(), "23^3 + 9*14^4 = 71^3");
    assert_eq!(rec.report.pegg_value, BigUint::from(14u64));
    assert_eq!(rec.resultant.to_string(), "207^3 + 126^4 = 639^3");
    assert!(rec.resultant.verify());
}

#[test]
fn search_exhausted_when_target_too_high() {
    let config = SearchConfig::new(exps(3, 3, 4), big2(28), 15);
    let tables = SearchTables::build(&config, &reduced_plan()).unwrap();
    assert!(search_once(&config, &tables).unwrap().is_none());
}

#[test]
fn search_deterministic_across_worker_counts() {
    let mut config = SearchConfig::new(exps(3, 3, 4), big2(30), 2);
    let tables = SearchTables::build(&config, &reduced_plan()).unwrap();
    config.workers = 1;
    let one: Vec<SearchRecord> = search_collect(&config, &tables)
        .unwrap()
        .into_iter()
        .map(|h| h.record)
        .collect();
    config.workers = 2;
    let two: Vec<SearchRecord> = search_collect(&config, &tables)
        .unwrap()
        .into_iter()
        .map(|h| h.record)
        .collect();
    assert_eq!(one, two);
    assert!(!one.is_empty());
}

#[test]
fn ladder_first_two_rows() {
    let config = SearchConfig::new(exps(3, 3, 4), big2(34), 2);
    let tables = SearchTables::build(&config, &reduced_plan()).unwrap();
    let rows = ladder(&config, &tables).unwrap();
    assert_eq!(rows.len(), 2, "{rows:?}");
    assert_eq!(rows[0].report.pegg_value, BigUint::from(14u64));
    assert!((rows[0].report.log2_size - 27.96).abs() < 0.01);
    assert_eq!(rows[1].original.to_string(), "13*21^4 + 163^3 = 190^3");
    assert_eq!(rows[1].report.pegg_value, BigUint::from(21u64));
    assert!((rows[1].report.log2_size - 33.81).abs() < 0.01);
}

#[test]
fn every_record_is_internally_consistent() {
    let config = SearchConfig::new(exps(3, 3, 4), big2(30), 2);
    let tables = SearchTables::build(&config, &reduced_plan()).unwrap();
    for hit in search_collect(&config, &tables).unwrap() {
        for rec in std::iter::once(&hit.record).chain(hit.maximized.as_ref()) {
            assert!(validate_original(&rec.original).is_ok());
            assert!(rec.resultant.verify());
            let size = rec.resultant.size();
            assert!(size <= config.s_max);
            assert!(hit.best().report.pegg_value >= BigUint::from_u64(config.min_pegg).unwrap());
            // the Pegg Value never beats the smallest original base on the
            // highest exponent
            let ex = rec.original.exps.as_array();
            let max_exp = rec.original.exps.max();
            let bound = (0..3)
                .filter(|&i| ex[i] == max_exp)
                .map(|i| rec.original.bases[i])
                .min()
                .unwrap();
            assert!(
                rec.report.pegg_value <= BigUint::from(bound),
                "{}",
                rec.original
            );
        }
    }
}

#[test]
fn record_line_fields() {
    let config = SearchConfig::new(exps(3, 3, 4), big2(28), 2);
    let tables = SearchTables::build(&config, &reduced_plan()).unwrap();
    let rec = search_once(&config, &tables).unwrap().unwrap();
    let line = RecordLine::from(&rec);
    let json = serde_json::to_value(&line).unwrap();
    assert_eq!(json["exponents"], serde_json::json!([3, 3, 4]));
    assert_eq!(json["f"], 9);
    assert_eq!(json["A"], "639");
    assert_eq!(json["N"], "729");
    assert_eq!(json["pegg_value"], "14");
    assert_eq!(json["stolen"], false);
}
