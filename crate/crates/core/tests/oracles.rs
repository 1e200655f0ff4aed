mod common;

use common::*;

#[test]
fn auc_matches_all_pairs_count() {
    auc_suite().unwrap();
}

#[test]
fn logreg_reaches_newton_optimum() {
    logreg_suite().unwrap();
}

#[test]
fn walk_transitions_are_uniform_over_neighbors() {
    walk_chi_square_suite().unwrap();
}

#[test]
fn metapath_transitions_are_uniform_over_typed_neighbors() {
    metapath_chi_square().unwrap();
}

#[test]
fn ranking_metrics_match_brute_force() {
    ranking_suite().unwrap();
}
