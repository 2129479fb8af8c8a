//! Bottom-up recomputation of the diagonal set, written without the
//! library's memo, run cache or pairing helpers.

mod common;

use common::{diag_table, unpair};
use paramlat::constructions::diag::DiagonalSet;
use paramlat::universe::PairCode;

#[test]
fn diagonal_values_match_bottom_up_table() {
    // Every string of length at most 10.
    let max_code = (1u64 << 11) - 3;
    let reference = diag_table(max_code);
    let d = DiagonalSet::default();
    let mut ones = 0;
    for z in 0..=max_code {
        let (c, _) = unpair(z);
        if c > 2 {
            continue;
        }
        let v = d.decide_code(PairCode(z)).unwrap();
        assert_eq!(v, reference[z as usize], "code {z}");
        ones += v as usize;
    }
    assert!(ones > 0);
}
