//! Entry-width behavior on the real quartic table layouts: the standard
//! {4,4,3} table fits 2-byte gaps, while the single-coefficient variant for
//! coefficient 3 under cz_minus_ax produces gaps past 65535 and must escalate
//! to 4-byte entries.

use pegg::equations::{ExponentTriple, Permutation};
use pegg::residue_tables::{build_skipahead_table, default_spec, single_coefficient_spec, Deltas};

#[test]
fn quartic_standard_table_uses_two_byte_entries() {
    let spec = default_spec(ExponentTriple::new(4, 4, 3), Permutation::CzMinusAx).unwrap();
    let table = build_skipahead_table(&spec).unwrap();
    assert_eq!(table.entry_width(), 2);
    assert_eq!(table.modulus, 9 * 13 * 29 * 37);
}

#[test]
fn quartic_single_coefficient_table_escalates_to_four_bytes() {
    let spec =
        single_coefficient_spec(ExponentTriple::new(4, 4, 3), Permutation::CzMinusAx, 3).unwrap();
    let table = build_skipahead_table(&spec).unwrap();
    assert_eq!(table.entry_width(), 4);
    // some class really does contain a gap beyond the 2-byte range
    let max_gap = match &table.deltas {
        Deltas::U32(v) => v.iter().copied().max().unwrap_or(0),
        Deltas::U16(_) => unreachable!(),
    };
    assert!(max_gap > u16::MAX as u32, "max gap {max_gap}");
    // gap lists still close their cycles
    let m = table.modulus;
    let mut checked = 0;
    for r in 0..m {
        let lo = table.class_offsets[r as usize];
        let hi = table.class_offsets[r as usize + 1];
        if lo == hi {
            continue;
        }
        let sum: u64 = match &table.deltas {
            Deltas::U32(v) => v[lo as usize..hi as usize].iter().map(|&d| d as u64).sum(),
            Deltas::U16(_) => unreachable!(),
        };
        assert_eq!(sum, m, "class {r}");
        checked += 1;
        if checked >= 2000 {
            break;
        }
    }
    assert!(checked > 0);
}
