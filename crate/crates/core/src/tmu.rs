//! Target measurement uncertainty: SNR, detection probability and the
//! measurement error covariance over `(d, v, theta)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_geometry, dxi_dd, KinematicState};
use crate::{Mat3, Vec4, SPEED_OF_LIGHT};

/// Condition number above which the `(d, v)` information block is treated
/// as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// ATSC digital TV illuminator defaults.
pub const ATSC_ROLL_OFF: f64 = 0.05762;
pub const ATSC_SYMBOL_PERIOD: f64 = 93e-9;
pub const ATSC_SYMBOLS: u64 = 1_076_000;
pub const ATSC_CARRIER_HZ: f64 = 63.1e6;

/// Transmitted-signal constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalModel {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub carrier_hz: f64,
    /// Reference DOA standard deviation at unit SNR (rad).
    pub sigma_theta0: f64,
    /// Transmitted signal constant (m).
    pub vartheta0: f64,
    pub p_fa: f64,
}

impl SignalModel {
    /// ATSC waveform with the given signal constant, DOA std and false alarm rate.
    pub fn atsc(vartheta0: f64, sigma_theta0: f64, p_fa: f64) -> Self {
        let (s1, s2, s3) = atsc_signal_fim(ATSC_ROLL_OFF, ATSC_SYMBOL_PERIOD, ATSC_SYMBOLS);
        Self {
            s1,
            s2,
            s3,
            carrier_hz: ATSC_CARRIER_HZ,
            sigma_theta0,
            vartheta0,
            p_fa,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.s1 > 0.0
            && self.s3 > 0.0
            && self.s1 * self.s3 - self.s2 * self.s2 > 0.0
            && self.p_fa > 0.0
            && self.p_fa < 1.0
            && self.carrier_hz > 0.0
            && self.sigma_theta0 > 0.0
            && self.vartheta0 > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid signal model {self:?}")))
        }
    }
}

impl Default for SignalModel {
    fn default() -> Self {
        Self::atsc(5000.0, 3f64.to_radians(), 1e-3)
    }
}

/// Measurement error covariance over `(d, v, theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasCov(Mat3);

impl MeasCov {
    /// Wraps a matrix after checking symmetry, positive definiteness and the
    /// decoupled DOA block.
    pub fn new(m: Mat3) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::singular("covariance has non-finite entries"));
        }
        let scale = m.diagonal().abs().max();
        if (m - m.transpose()).abs().max() > 1e-12 * scale {
            return Err(Error::domain("covariance is not symmetric"));
        }
        if m[(0, 2)] != 0.0 || m[(1, 2)] != 0.0 || m[(2, 0)] != 0.0 || m[(2, 1)] != 0.0 {
            return Err(Error::domain("DOA must be uncorrelated with range and velocity"));
        }
        if m.cholesky().is_none() {
            return Err(Error::singular("covariance is not positive definite"));
        }
        Ok(Self(m))
    }

    pub fn diagonal(sigma_d: f64, sigma_v: f64, sigma_theta: f64) -> Result<Self> {
        Self::new(Mat3::from_diagonal(&crate::Vec3::new(
            sigma_d * sigma_d,
            sigma_v * sigma_v,
            sigma_theta * sigma_theta,
        )))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn sigma_d(&self) -> f64 {
        self.0[(0, 0)].sqrt()
    }

    pub fn sigma_v(&self) -> f64 {
        self.0[(1, 1)].sqrt()
    }

    pub fn sigma_theta(&self) -> f64 {
        self.0[(2, 2)].sqrt()
    }

    /// Product of the three marginal standard deviations.
    pub fn sigma_product(&self) -> f64 {
        (self.0[(0, 0)] * self.0[(1, 1)] * self.0[(2, 2)]).sqrt()
    }

    pub fn is_diagonal(&self) -> bool {
        self.0[(0, 1)] == 0.0 && self.0[(1, 0)] == 0.0
    }

    pub fn inverse(&self) -> Mat3 {
        // PD checked on construction
        let inv = self.0.cholesky().expect("positive definite").inverse();
        (inv + inv.transpose()) * 0.5
    }
}

fn check_ranges(range_tx: f64, range_rx: f64) -> Result<()> {
    if range_tx > 0.0 && range_rx > 0.0 && range_tx.is_finite() && range_rx.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("ranges must be positive, got R_T = {range_tx}, R_R = {range_rx}")))
    }
}

/// Signal-to-noise ratio `vartheta0^4 / (R_T R_R)^2`.
pub fn snr(range_tx: f64, range_rx: f64, vartheta0: f64) -> Result<f64> {
    check_ranges(range_tx, range_rx)?;
    let a = vartheta0 * vartheta0 / (range_tx * range_rx);
    Ok(a * a)
}

/// Swerling I detection probability `P_FA^(1/(1+psi))`.
pub fn detection_probability(psi: f64, p_fa: f64) -> f64 {
    p_fa.powf(1.0 / (1.0 + psi))
}

/// Signal FIM constants `(S1, S2, S3)` of the ATSC waveform, without the SNR factor.
pub fn atsc_signal_fim(alpha: f64, t_sym: f64, n_symbols: u64) -> (f64, f64, f64) {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let a2 = alpha * alpha;
    let s1 = 2.0 * a2 / (t_sym * t_sym) * (-1.0 / pi2 + 1.0 / (96.0 * a2) + 0.125);
    let n = n_symbols as f64;
    let s3 = 2.0 * t_sym * t_sym * (1.0 / (4.0 * alpha) + (n * n - 1.0) / 3.0);
    (s1, 0.0, s3)
}

fn check_psi(psi: f64) -> Result<()> {
    if psi > 0.0 && psi.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("SNR must be positive and finite, got {psi}")))
    }
}

/// Measurement covariance with the Doppler sensitivity to bistatic range
/// `dxi_dd` (Hz/m) retained.
///
/// The `(d, v)` block is the inverse of `psi * P S P^T` with
/// `P = [[1/c, dxi_dd], [0, f_c/c]]`, evaluated in closed form.
pub fn meas_cov_general(sig: &SignalModel, psi: f64, dxi_dd: f64) -> Result<MeasCov> {
    sig.validate()?;
    check_psi(psi)?;
    let c = SPEED_OF_LIGHT;
    let fc = sig.carrier_hz;
    let (s1, s2, s3) = (sig.s1, sig.s2, sig.s3);
    let e = dxi_dd;

    // information block at unit SNR
    let a = fc / c;
    let i_dd = s1 / (c * c) + 2.0 * e * s2 / c + e * e * s3;
    let i_dv = (s2 / c + e * s3) * a;
    let i_vv = a * a * s3;
    let half_tr = 0.5 * (i_dd + i_vv);
    let disc = (0.25 * (i_dd - i_vv) * (i_dd - i_vv) + i_dv * i_dv).sqrt();
    let (l_max, l_min) = (half_tr + disc, half_tr - disc);
    if !(l_min > 0.0) || l_max / l_min > MAX_CONDITION {
        return Err(Error::singular(format!(
            "(d, v) information block is ill-conditioned (eigenvalues {l_min:e}, {l_max:e})"
        )));
    }

    let det = s1 * s3 - s2 * s2;
    let r_dd = c * c * s3 / det;
    let r_dv = -c * c * s2 / (fc * det) - c * c * c * e * s3 / (fc * det);
    let r_vv = c * c * s1 / (fc * fc * det)
        + 2.0 * c * c * c * e * s2 / (fc * fc * det)
        + c * c * c * c * e * e * s3 / (fc * fc * det);
    let r_tt = sig.sigma_theta0 * sig.sigma_theta0;
    let base = Mat3::new(
        r_dd, r_dv, 0.0, //
        r_dv, r_vv, 0.0, //
        0.0, 0.0, r_tt,
    );
    MeasCov::new(base / psi)
}

/// Measurement covariance under the assumption that the Doppler shift does
/// not depend on bistatic range.
pub fn meas_cov_assumption1(sig: &SignalModel, psi: f64) -> Result<MeasCov> {
    meas_cov_general(sig, psi, 0.0)
}

/// Gradient of the SNR with respect to `[px, py, vx, vy]`.
pub fn snr_gradient(
    target: &KinematicState,
    tx: &KinematicState,
    rx: &KinematicState,
    vartheta0: f64,
) -> Result<Vec4> {
    let p = target.position();
    let dt = p - tx.position();
    let dr = p - rx.position();
    let rt2 = dt.norm_squared();
    let rr2 = dr.norm_squared();
    check_ranges(rt2.sqrt(), rr2.sqrt())?;
    let v4 = vartheta0.powi(4);
    let g = (dr * rt2 + dt * rr2) * (-2.0 * v4 / (rt2 * rt2 * rr2 * rr2));
    Ok(Vec4::new(g.x, g.y, 0.0, 0.0))
}

/// Which covariance form to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovForm {
    #[default]
    Assumption1,
    General,
}

/// SNR, detection probability and covariance at one geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tmu {
    pub psi: f64,
    pub pd: f64,
    pub cov: MeasCov,
}

pub fn evaluate_tmu(
    target: &KinematicState,
    tx: &KinematicState,
    rx: &KinematicState,
    sig: &SignalModel,
    form: CovForm,
) -> Result<Tmu> {
    let geom = build_geometry(target, tx, rx)?;
    let psi = snr(geom.range_tx, geom.range_rx, sig.vartheta0)?;
    let cov = match form {
        CovForm::Assumption1 => meas_cov_assumption1(sig, psi)?,
        CovForm::General => {
            let e = dxi_dd(&geom, target.speed(), geom.delta, sig.carrier_hz)?;
            meas_cov_general(sig, psi, e)?
        }
    };
    Ok(Tmu {
        psi,
        pd: detection_probability(psi, sig.p_fa),
        cov,
    })
}
