//! EKF prediction and PDA update for a single target in clutter.

use std::f64::consts::PI;

use statrs::function::erf::erf;

use crate::clutter::{innovation, measurement_function, measurement_jacobian, ClutterModel, MeasurementSet};
use crate::error::{Error, Result};
use crate::geometry::KinematicState;
use crate::linalg::{spd_inverse, symmetrize};
use crate::tmu::MeasCov;
use crate::{Mat3, Mat4, Vec3, Vec4, MEAS_DIM};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackEstimate {
    pub mean: Vec4,
    pub cov: Mat4,
    pub k: usize,
}

impl TrackEstimate {
    pub fn state(&self) -> KinematicState {
        KinematicState::from_vector(&self.mean)
    }
}

/// Nearly-constant-velocity motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionModel {
    pub f: Mat4,
    pub q: Mat4,
    pub period: f64,
}

impl MotionModel {
    /// NCV model with white-noise acceleration of intensity `q` (m^2/s^3) per axis.
    pub fn ncv(period: f64, q: f64) -> Self {
        let t = period;
        let f = Mat4::new(
            1.0, 0.0, t, 0.0, //
            0.0, 1.0, 0.0, t, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        );
        let (a, b, c) = (t * t * t / 3.0, t * t / 2.0, t);
        let q = Mat4::new(
            a, 0.0, b, 0.0, //
            0.0, a, 0.0, b, //
            b, 0.0, c, 0.0, //
            0.0, b, 0.0, c,
        ) * q;
        Self { f, q, period }
    }
}

pub fn predict(track: &TrackEstimate, model: &MotionModel) -> TrackEstimate {
    TrackEstimate {
        mean: model.f * track.mean,
        cov: symmetrize(&(model.f * track.cov * model.f.transpose() + model.q)),
        k: track.k + 1,
    }
}

/// Probability that a target return falls in a `g`-sigma cube gate, treating
/// the innovation axes as independent.
pub fn gate_probability(gate: f64) -> f64 {
    let per_axis = erf(gate / std::f64::consts::SQRT_2);
    per_axis.powi(MEAS_DIM as i32)
}

/// PDA update about the predicted mean.
///
/// Measurements are gated per axis at `clutter.gate` innovation standard
/// deviations. An empty gate returns the prediction unchanged.
pub fn pda_update(
    track: &TrackEstimate,
    z: &MeasurementSet,
    cov: &MeasCov,
    pd: f64,
    clutter: &ClutterModel,
    tx: &KinematicState,
    rx: &KinematicState,
) -> Result<TrackEstimate> {
    let x = track.state();
    let h = measurement_function(&x, tx, rx)?;
    let hj = measurement_jacobian(&x, tx, rx)?;
    let s: Mat3 = symmetrize(&(hj * track.cov * hj.transpose() + cov.matrix()));
    let s_inv = spd_inverse(&s)?;
    let half_width = Vec3::new(s[(0, 0)].sqrt(), s[(1, 1)].sqrt(), s[(2, 2)].sqrt()) * clutter.gate;

    let gated: Vec<Vec3> = z
        .points
        .iter()
        .map(|zi| innovation(zi, &h))
        .filter(|nu| (0..MEAS_DIM).all(|i| nu[i].abs() < half_width[i]))
        .collect();
    if gated.is_empty() || pd <= 0.0 {
        return Ok(*track);
    }

    // log weights: ln(Pd N(nu; 0, S)) per measurement, ln(lambda (1 - Pd P_G)) for no detection
    let ln_norm = -0.5 * ((2.0 * PI).powi(MEAS_DIM as i32) * s.determinant()).ln();
    let mut ln_w: Vec<f64> = gated
        .iter()
        .map(|nu| pd.ln() + ln_norm - 0.5 * nu.dot(&(s_inv * nu)))
        .collect();
    let b = clutter.density * (1.0 - pd * gate_probability(clutter.gate));
    ln_w.push(if b > 0.0 { b.ln() } else { f64::NEG_INFINITY });
    let top = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = ln_w.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    let beta0 = w[gated.len()] / total;

    let k_gain = track.cov * hj.transpose() * s_inv;
    let mut nu_c = Vec3::zeros();
    let mut spread = Mat3::zeros();
    for (nu, wi) in gated.iter().zip(&w) {
        let bi = wi / total;
        nu_c += nu * bi;
        spread += nu * nu.transpose() * bi;
    }
    spread -= nu_c * nu_c.transpose();

    let p_c = track.cov - k_gain * s * k_gain.transpose();
    let cov_new = track.cov * beta0 + p_c * (1.0 - beta0) + k_gain * spread * k_gain.transpose();
    Ok(TrackEstimate {
        mean: track.mean + k_gain * nu_c,
        cov: symmetrize(&cov_new),
        k: track.k,
    })
}

/// Estimates and truths of one Monte Carlo run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub estimates: Vec<Vec4>,
    pub truths: Vec<Vec4>,
}

/// Per-step RMSE of the position and velocity blocks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RmseSeries {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
}

pub fn rmse(runs: &[RunTrace]) -> Result<RmseSeries> {
    let first = runs.first().ok_or(Error::LengthMismatch { expected: 1, actual: 0 })?;
    let steps = first.truths.len();
    for r in runs {
        for len in [r.estimates.len(), r.truths.len()] {
            if len != steps {
                return Err(Error::LengthMismatch { expected: steps, actual: len });
            }
        }
    }
    let n = runs.len() as f64;
    let mut out = RmseSeries::default();
    for k in 0..steps {
        let (mut sp, mut sv) = (0.0, 0.0);
        for r in runs {
            let e = r.estimates[k] - r.truths[k];
            sp += e[0] * e[0] + e[1] * e[1];
            sv += e[2] * e[2] + e[3] * e[3];
        }
        out.position.push((sp / n).sqrt());
        out.velocity.push((sv / n).sqrt());
    }
    Ok(out)
}
