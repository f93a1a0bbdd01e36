//! Deterministic tensor-grid quadrature of the factor integrands, written
//! directly from the integral definitions with `|R| = 1`.

use std::f64::consts::PI;

use gauss_quad::legendre::GaussLegendre;

const N: f64 = 3.0;

pub struct OraclePoint {
    pub psi: f64,
    pub pd: f64,
    pub lambda_vg: f64,
    pub p_fa: f64,
    pub m: usize,
}

/// Gauss-Legendre nodes and weights mapped to `[-g, g]`.
pub fn rule(nodes: usize, g: f64) -> Vec<(f64, f64)> {
    GaussLegendre::new(nodes.try_into().unwrap())
        .iter()
        .map(|&(x, w)| (x * g, w * g))
        .collect()
}

struct Terms {
    l1: f64,
    l2: f64,
}

fn integrand(p: &OraclePoint, g: f64, z: &[[f64; 3]]) -> Terms {
    let m = p.m as f64;
    let v = (2.0 * g).powi(3);
    let ell = (1.0 - p.pd) * p.lambda_vg + m * p.pd;
    let d = m * p.pd / ell;
    let lam = p.lambda_vg / v;
    let ln_pfa = p.p_fa.ln();
    let sq = |a: &[f64; 3]| a.iter().map(|x| x * x).sum::<f64>();
    let q1 = sq(&z[0]);
    let q2 = if z.len() > 1 { sq(&z[1]) } else { 0.0 };
    let two_pi_n = (2.0 * PI).powf(N);

    let mixture: f64 = z.iter().map(|zi| (-0.5 * sq(zi)).exp()).sum();
    let beta = (1.0 - d) / v.powf(m) + d / (m * v.powf(m - 1.0) * two_pi_n.sqrt()) * mixture;

    let l1 = d * d / (m * v.powf(2.0 * m - 2.0) * two_pi_n) * z[0][0] * z[0][0] * (-q1).exp();

    let pd2 = p.pd * p.pd;
    let u1 = p.lambda_vg.powi(2) * m * m * pd2 * ln_pfa * ln_pfa / (ell.powi(4) * (1.0 + p.psi).powi(4))
        * (((-q1).exp() + (m - 1.0) * (-(q1 + q2) / 2.0).exp()) / (m * v.powf(2.0 * m - 2.0) * two_pi_n)
            - 2.0 * (-q1 / 2.0).exp() / (v.powf(2.0 * m - 1.0) * two_pi_n.sqrt())
            + 1.0 / v.powf(2.0 * m));
    let u2 = d / (p.psi * v.powf(m - 2.0)) * lam * p.pd * ln_pfa / (ell * ell * (1.0 + p.psi).powi(2))
        * (((-q1).exp() * (q1 - N) + (m - 1.0) * (-(q1 + q2) / 2.0).exp() * (q2 - N)) / (v.powf(m - 1.0) * two_pi_n)
            - m * (-q1 / 2.0).exp() * (q1 - N) / (v.powf(m) * two_pi_n.sqrt()));
    let u3 = d * d / (4.0 * p.psi * p.psi * m * m * v.powf(2.0 * m - 2.0) * two_pi_n)
        * (m * (m - 1.0) * (-(q1 + q2) / 2.0).exp() * (q1 - N) * (q2 - N) + m * (-q1).exp() * (q1 - N).powi(2));

    Terms { l1: l1 / beta, l2: (u1 + u2 + u3) / beta }
}

/// `(Lambda1, Lambda2)` by tensor-grid quadrature over all `3 m` coordinates.
pub fn factors(p: &OraclePoint, g: f64, nodes: usize) -> (f64, f64) {
    assert!(p.m == 1 || p.m == 2);
    let r = rule(nodes, g);
    let (mut l1, mut l2) = (0.0, 0.0);
    let mut z = vec![[0.0; 3]; p.m];
    let dims = 3 * p.m;
    let total = r.len().pow(dims as u32);
    for flat in 0..total {
        let mut idx = flat;
        let mut w = 1.0;
        for k in 0..dims {
            let (x, wk) = r[idx % r.len()];
            idx /= r.len();
            z[k / 3][k % 3] = x;
            w *= wk;
        }
        let t = integrand(p, g, &z);
        l1 += w * t.l1;
        l2 += w * t.l2;
    }
    (l1, l2)
}
