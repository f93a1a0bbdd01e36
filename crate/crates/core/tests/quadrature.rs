mod common;

use bistatic_ipcrlb::bounds::{lambda_factors, BoundVariant, FactorInputs, SampleSet};
use common::oracle::{self, OraclePoint};

const GATE: f64 = 4.0;

fn check(p: OraclePoint, nodes: usize, seed: u64) {
    let (q1, q2) = oracle::factors(&p, GATE, nodes);
    let samples = SampleSet::generate(seed, 40_000, GATE, p.m);
    let inp = FactorInputs { psi: p.psi, pd: p.pd, lambda_vg: p.lambda_vg, p_fa: p.p_fa };
    let f = lambda_factors(&inp, p.m, &samples);
    let l2 = f.lambda2_estimate(BoundVariant::Ipcrlb);
    assert!(
        (f.lambda1.mean - q1).abs() < 3.0 * f.lambda1.std_err,
        "lambda1 {:?} vs quadrature {q1}",
        f.lambda1
    );
    assert!((l2.mean - q2).abs() < 3.0 * l2.std_err, "lambda2 {l2:?} vs quadrature {q2}");
}

#[test]
fn oracle_recovers_the_clutter_free_value() {
    // with no clutter and certain detection the factor is the truncated
    // second moment of a standard normal over [-g, g]
    let p = OraclePoint { psi: 10.0, pd: 1.0, lambda_vg: 0.0, p_fa: 1e-3, m: 1 };
    let (l1, _) = oracle::factors(&p, GATE, 32);
    let tail = 2.0 * GATE * (-GATE * GATE / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let one_dim = statrs::function::erf::erf(GATE / 2f64.sqrt());
    let expected = (one_dim - tail) * one_dim * one_dim;
    assert!((l1 - expected).abs() < 1e-9, "{l1} vs {expected}");
}

#[test]
fn single_measurement_matches_quadrature() {
    check(OraclePoint { psi: 20.0, pd: 0.8, lambda_vg: 1.5, p_fa: 1e-3, m: 1 }, 32, 11);
}

#[test]
fn two_measurements_match_quadrature() {
    check(OraclePoint { psi: 60.0, pd: 0.9, lambda_vg: 1.0, p_fa: 1e-3, m: 2 }, 12, 12);
}
