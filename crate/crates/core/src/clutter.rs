//! Measurement model and measurement-origin uncertainty.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_pi, wrap_two_pi, KinematicState};
use crate::tmu::{evaluate_tmu, CovForm, MeasCov, SignalModel};
use crate::{Mat3x4, Vec3, MEAS_DIM};

/// Poisson clutter with a gate of `gate` standard deviations per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClutterModel {
    /// Clutter density per unit of `m * m/s * rad`.
    pub density: f64,
    pub gate: f64,
}

impl Default for ClutterModel {
    fn default() -> Self {
        Self { density: 1e-5, gate: 4.0 }
    }
}

impl ClutterModel {
    /// Density from a resolution cell count over a measurement volume.
    pub fn from_cells(n_cell: f64, p_fa: f64, volume: f64, gate: f64) -> Result<Self> {
        if !(volume > 0.0) || n_cell < 0.0 {
            return Err(Error::domain("cell count must be non-negative and volume positive"));
        }
        let m = Self { density: n_cell * p_fa / volume, gate };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.density >= 0.0 && self.density.is_finite() && self.gate > 0.0 {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid clutter model {self:?}")))
        }
    }

    /// Gate volume `(2g)^n * sigma_d * sigma_v * sigma_theta`.
    pub fn gate_volume(&self, cov: &MeasCov) -> f64 {
        (2.0 * self.gate).powi(MEAS_DIM as i32) * cov.sigma_product()
    }

    /// Expected clutter count in the gate.
    pub fn expected_count(&self, cov: &MeasCov) -> f64 {
        self.density * self.gate_volume(cov)
    }
}

/// Measurements returned at one scan, each `(d, v, theta)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasurementSet {
    pub points: Vec<Vec3>,
}

impl MeasurementSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn site_vectors(
    target: &KinematicState,
    site: &KinematicState,
    name: &'static str,
) -> Result<(crate::Vec2, crate::Vec2, f64)> {
    let r = target.position() - site.position();
    let range = r.norm();
    if range == 0.0 {
        return Err(Error::Collocated(name));
    }
    Ok((r, target.velocity() - site.velocity(), range))
}

/// Noise-free bistatic range, bistatic range rate and DOA.
pub fn measurement_function(target: &KinematicState, tx: &KinematicState, rx: &KinematicState) -> Result<Vec3> {
    let (rt, wt, range_t) = site_vectors(target, tx, "transmitter")?;
    let (rr, wr, range_r) = site_vectors(target, rx, "receiver")?;
    Ok(Vec3::new(
        range_t + range_r,
        rt.dot(&wt) / range_t + rr.dot(&wr) / range_r,
        wrap_two_pi(rr.y.atan2(rr.x)),
    ))
}

pub fn measurement_jacobian(target: &KinematicState, tx: &KinematicState, rx: &KinematicState) -> Result<Mat3x4> {
    let (rt, wt, range_t) = site_vectors(target, tx, "transmitter")?;
    let (rr, wr, range_r) = site_vectors(target, rx, "receiver")?;
    let ut = rt / range_t;
    let ur = rr / range_r;
    // d/dp of (r . w)/|r| = (w - (u . w) u) / |r|
    let dv_dp = (wt - ut * ut.dot(&wt)) / range_t + (wr - ur * ur.dot(&wr)) / range_r;
    let uv = ut + ur;
    let rr2 = range_r * range_r;
    Ok(Mat3x4::new(
        uv.x, uv.y, 0.0, 0.0, //
        dv_dp.x, dv_dp.y, uv.x, uv.y, //
        -rr.y / rr2, rr.x / rr2, 0.0, 0.0,
    ))
}

/// Innovation `z - h` with the DOA component wrapped to `(-pi, pi]`.
pub fn innovation(z: &Vec3, h: &Vec3) -> Vec3 {
    let mut nu = z - h;
    nu[2] = wrap_pi(nu[2]);
    nu
}

fn ln_factorial(m: usize) -> f64 {
    (2..=m).map(|k| (k as f64).ln()).sum()
}

fn poisson_pmf(mean: f64, m: usize) -> f64 {
    if mean == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    (-mean + m as f64 * mean.ln() - ln_factorial(m)).exp()
}

/// Probability that a scan returns `m` measurements.
pub fn cardinality_probability(pd: f64, lambda_v: f64, m: usize) -> f64 {
    let clutter_only = (1.0 - pd) * poisson_pmf(lambda_v, m);
    if m == 0 {
        clutter_only
    } else {
        clutter_only + pd * poisson_pmf(lambda_v, m - 1)
    }
}

/// Probability that one of the `m` measurements originated from the target.
pub fn association_probability(pd: f64, lambda_v: f64, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("association probability needs at least one measurement"));
    }
    let den = (1.0 - pd) * lambda_v / m as f64 + pd;
    Ok(if den > 0.0 { pd / den } else { 0.0 })
}

/// Gaussian density of an innovation with covariance `cov`.
pub fn gaussian_density(nu: &Vec3, cov: &MeasCov) -> f64 {
    let r = cov.matrix();
    let q = nu.dot(&(cov.inverse() * nu));
    let norm = ((2.0 * PI).powi(MEAS_DIM as i32) * r.determinant()).sqrt();
    (-0.5 * q).exp() / norm
}

/// Likelihood of a measurement set given the predicted measurement `h`.
///
/// The clutter volume is the gate volume of `cov`.
pub fn conditional_likelihood(
    z: &MeasurementSet,
    h: &Vec3,
    cov: &MeasCov,
    pd: f64,
    clutter: &ClutterModel,
) -> Result<f64> {
    let m = z.len();
    let v = clutter.gate_volume(cov);
    let d = association_probability(pd, clutter.density * v, m)?;
    let sum: f64 = z.points.iter().map(|zi| gaussian_density(&innovation(zi, h), cov)).sum();
    let mf = m as f64;
    Ok((1.0 - d) / v.powi(m as i32) + d / (mf * v.powi(m as i32 - 1)) * sum)
}

/// Draws one scan: the target return with probability `Pd`, plus Poisson
/// clutter uniform over the gate cube around the noise-free measurement.
pub fn generate_measurements<R: Rng + ?Sized>(
    rng: &mut R,
    truth: &KinematicState,
    tx: &KinematicState,
    rx: &KinematicState,
    sig: &SignalModel,
    clutter: &ClutterModel,
) -> Result<MeasurementSet> {
    let tmu = evaluate_tmu(truth, tx, rx, sig, CovForm::Assumption1)?;
    let h = measurement_function(truth, tx, rx)?;
    let mut points = Vec::new();
    if rng.random::<f64>() < tmu.pd {
        let chol = tmu
            .cov
            .matrix()
            .cholesky()
            .ok_or_else(|| Error::singular("measurement covariance"))?;
        let w = Vec3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let mut z = h + chol.l() * w;
        z[2] = wrap_two_pi(z[2]);
        points.push(z);
    }
    let mean = clutter.expected_count(&tmu.cov);
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::domain(format!("clutter rate {mean}: {e}")))?
            .sample(rng) as usize
    } else {
        0
    };
    let m = tmu.cov.matrix();
    let half = Vec3::new(m[(0, 0)].sqrt(), m[(1, 1)].sqrt(), m[(2, 2)].sqrt()) * clutter.gate;
    for _ in 0..count {
        let mut z = Vec3::from_fn(|i, _| h[i] + half[i] * (2.0 * rng.random::<f64>() - 1.0));
        z[2] = wrap_two_pi(z[2]);
        points.push(z);
    }
    Ok(MeasurementSet { points })
}
