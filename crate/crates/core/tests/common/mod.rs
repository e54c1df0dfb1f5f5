#![allow(dead_code)]

use mcomp::gen::{random_expr, random_lambda_clear, rng, ExprParams};
use mcomp::numeric::{ExtNat, Rat, GQ};
use mcomp::operator::{boundary_predicates, OperatorExpr, PointData};
use mcomp::oracle::{estimate_point_data, GapEvidence, NumericPointData, OracleConfig};

pub const SIZES: [usize; 3] = [64, 128, 256];

pub fn oracle_cfg() -> OracleConfig {
    OracleConfig::default()
}

pub fn oracle_params() -> ExprParams {
    ExprParams { max_atoms: 2, max_mult: 2, p_inf: 0.2, bilateral: true }
}

pub fn pairs(seed: u64, n: usize) -> Vec<(OperatorExpr, OperatorExpr)> {
    let mut r = rng(seed);
    let p = ExprParams::default();
    (0..n).map(|_| (random_expr(&mut r, &p), random_expr(&mut r, &p))).collect()
}

/// Random expressions with a point at distance ≥ 1/8 from their boundaries.
pub fn clear_cases(seed: u64, n: usize) -> Vec<(OperatorExpr, GQ)> {
    let mut r = rng(seed);
    let p = oracle_params();
    (0..n)
        .map(|_| {
            let e = random_expr(&mut r, &p);
            let l = random_lambda_clear(&mut r, &boundary_predicates(&e), &Rat::new(1, 8));
            (e, l)
        })
        .collect()
}

fn count_matches(exact: ExtNat, est: u64, capped: bool) -> bool {
    match exact {
        ExtNat::Fin(k) => est == k && !capped,
        ExtNat::Inf => est > 0 && capped,
    }
}

/// Whether oracle evidence agrees with exact data: nullity, algebraic
/// deficiency (finite or not, zero or not) and closedness.
pub fn agrees(exact: &PointData, np: &NumericPointData) -> bool {
    let gap_ok = if exact.closed {
        np.closed_evidence == GapEvidence::StableGap
    } else {
        np.closed_evidence == GapEvidence::ShrinkingGap
    };
    np.consistent
        && gap_ok
        && count_matches(exact.alpha, np.alpha_est, np.alpha_capped)
        && count_matches(exact.beta_alg(), np.beta_est, np.beta_capped)
}

pub fn estimate(e: &OperatorExpr, l: &GQ) -> NumericPointData {
    estimate_point_data(e.into(), l, &SIZES, &oracle_cfg()).unwrap()
}
