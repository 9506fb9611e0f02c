mod common;

use common::lasso_sweep;

#[test]
fn conjunction_lassos_match_the_oracle() {
    let sweep = lasso_sweep(true, 6);
    assert!(sweep.words > 30_000);
    assert!(sweep.mismatches.is_empty(), "{:?}", &sweep.mismatches[..sweep.mismatches.len().min(5)]);
}

#[test]
fn disjunction_lassos_match_the_oracle() {
    let sweep = lasso_sweep(false, 6);
    assert!(sweep.mismatches.is_empty(), "{:?}", &sweep.mismatches[..sweep.mismatches.len().min(5)]);
}
