//! Transmitter/target/receiver triangle and bistatic Doppler.
//!
//! Angle conventions used throughout the crate:
//!
//! - `theta` is the receiver look angle, the direction of the vector from the
//!   receiver to the target, counter-clockwise from the x-axis.
//! - `theta_tx` is the same for the transmitter.
//! - `theta_tr` is the direction of the vector from the transmitter to the
//!   receiver. With this choice the half bistatic angle satisfies
//!   `cos(beta/2) = (d + L cos(theta - theta_tr)) / sqrt(d^2 + L^2 + 2 d L cos(theta - theta_tr))`.
//! - `delta` is measured from the bisector of the target-to-site directions,
//!   so a target closing along the bisector has `delta = 0` and a positive
//!   Doppler shift. The Doppler shift is therefore `-(f_c / c)` times the
//!   bistatic range rate.
//!
//! All angles except `beta` are wrapped to `[0, 2pi)`; `beta` lies in `[0, pi]`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Vec2, Vec4, SPEED_OF_LIGHT};

/// A bistatic angle above `pi - COLLINEAR_TOL` is treated as exactly `pi`.
pub const COLLINEAR_TOL: f64 = 1e-6;

/// 2D position and velocity of a target or a radar site.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KinematicState {
    pub px: f64,
    pub py: f64,
    pub vx: f64,
    pub vy: f64,
}

impl KinematicState {
    pub const fn new(px: f64, py: f64, vx: f64, vy: f64) -> Self {
        Self { px, py, vx, vy }
    }

    pub const fn stationary(px: f64, py: f64) -> Self {
        Self::new(px, py, 0.0, 0.0)
    }

    pub fn from_vector(x: &Vec4) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }

    pub fn to_vector(&self) -> Vec4 {
        Vec4::new(self.px, self.py, self.vx, self.vy)
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.px, self.py)
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::new(self.vx, self.vy)
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }

    pub fn is_finite(&self) -> bool {
        self.px.is_finite() && self.py.is_finite() && self.vx.is_finite() && self.vy.is_finite()
    }

    /// Heading of the velocity vector in `[0, 2pi)`, 0 for a stationary object.
    pub fn heading(&self) -> f64 {
        if self.vx == 0.0 && self.vy == 0.0 {
            0.0
        } else {
            wrap_two_pi(self.vy.atan2(self.vx))
        }
    }
}

/// Speed magnitudes of target, transmitter and receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Speeds {
    pub target: f64,
    pub tx: f64,
    pub rx: f64,
}

impl Speeds {
    pub fn of(target: &KinematicState, tx: &KinematicState, rx: &KinematicState) -> Self {
        Self {
            target: target.speed(),
            tx: tx.speed(),
            rx: rx.speed(),
        }
    }
}

/// Parameters of the bistatic triangle at one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BistaticGeometry {
    /// Baseline range between transmitter and receiver (m).
    pub baseline: f64,
    /// Transmitter-to-target range (m).
    pub range_tx: f64,
    /// Receiver-to-target range (m).
    pub range_rx: f64,
    /// Bistatic range `range_tx + range_rx` (m).
    pub bistatic_range: f64,
    /// Receiver look angle (rad).
    pub theta: f64,
    /// Transmitter look angle (rad).
    pub theta_tx: f64,
    /// Direction of the transmitter-to-receiver line of sight (rad).
    pub theta_tr: f64,
    /// Bistatic angle at the target (rad).
    pub beta: f64,
    /// Target velocity aspect from the bistatic bisector (rad).
    pub delta: f64,
    /// Transmitter velocity heading (rad).
    pub delta_tx: f64,
    /// Receiver velocity heading (rad).
    pub delta_rx: f64,
}

impl BistaticGeometry {
    pub fn is_collinear(&self) -> bool {
        self.beta >= PI
    }
}

/// Wraps an angle into `[0, 2pi)`.
pub fn wrap_two_pi(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_pi(angle: f64) -> f64 {
    let w = wrap_two_pi(angle);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

pub fn build_geometry(
    target: &KinematicState,
    tx: &KinematicState,
    rx: &KinematicState,
) -> Result<BistaticGeometry> {
    let p = target.position();
    let from_tx = p - tx.position();
    let from_rx = p - rx.position();
    let range_tx = from_tx.norm();
    let range_rx = from_rx.norm();
    if range_tx == 0.0 {
        return Err(Error::Collocated("transmitter"));
    }
    if range_rx == 0.0 {
        return Err(Error::Collocated("receiver"));
    }
    let tx_to_rx = rx.position() - tx.position();
    let baseline = tx_to_rx.norm();

    let cos_beta = ((range_tx * range_tx + range_rx * range_rx - baseline * baseline)
        / (2.0 * range_tx * range_rx))
        .clamp(-1.0, 1.0);
    let mut beta = cos_beta.acos();
    if beta > PI - COLLINEAR_TOL {
        beta = PI;
    }

    let theta_tr = if baseline > 0.0 {
        wrap_two_pi(tx_to_rx.y.atan2(tx_to_rx.x))
    } else {
        0.0
    };

    let bisector = bisector_direction(&p, &tx.position(), &rx.position());
    let delta = if target.vx == 0.0 && target.vy == 0.0 {
        0.0
    } else {
        wrap_two_pi(bisector.y.atan2(bisector.x) - target.vy.atan2(target.vx))
    };

    Ok(BistaticGeometry {
        baseline,
        range_tx,
        range_rx,
        bistatic_range: range_tx + range_rx,
        theta: wrap_two_pi(from_rx.y.atan2(from_rx.x)),
        theta_tx: wrap_two_pi(from_tx.y.atan2(from_tx.x)),
        theta_tr,
        beta,
        delta,
        delta_tx: tx.heading(),
        delta_rx: rx.heading(),
    })
}

/// Unit bisector of the target-to-transmitter and target-to-receiver
/// directions. Positions must be distinct from the target.
pub fn bisector_direction(target: &Vec2, tx: &Vec2, rx: &Vec2) -> Vec2 {
    let u_tx = (target - tx).normalize();
    let u_rx = (target - rx).normalize();
    let inward = -(u_tx + u_rx);
    if inward.norm() > 1e-12 {
        inward.normalize()
    } else {
        // target between the sites: the target Doppler term vanishes so any
        // reference direction will do
        Vec2::new(-u_rx.y, u_rx.x)
    }
}

fn check_range_order(d: f64, baseline: f64) -> Result<()> {
    if !(d.is_finite() && baseline.is_finite()) || baseline < 0.0 {
        return Err(Error::domain(format!("invalid ranges d = {d}, L = {baseline}")));
    }
    // rounding in d = R_T + R_R can put a collinear target a hair below L
    if d < baseline * (1.0 - 1e-12) - 1e-9 {
        return Err(Error::domain(format!(
            "bistatic range {d} is shorter than the baseline {baseline}"
        )));
    }
    Ok(())
}

/// `cos(beta/2)` as a function of bistatic range, baseline and look angles.
///
/// Returns 0 on the collinear branch (`beta = pi`).
pub fn cos_half_bistatic_angle(d: f64, baseline: f64, theta: f64, theta_tr: f64) -> Result<f64> {
    check_range_order(d, baseline)?;
    let c = (theta - theta_tr).cos();
    let num = d + baseline * c;
    let den_sq = d * d + baseline * baseline + 2.0 * d * baseline * c;
    if den_sq <= 0.0 || num <= 0.0 {
        return Ok(0.0);
    }
    let value = (num / den_sq.sqrt()).min(1.0);
    if 2.0 * value.acos() > PI - COLLINEAR_TOL {
        return Ok(0.0);
    }
    Ok(value)
}

/// Bistatic Doppler shift (Hz), positive for a closing geometry.
pub fn doppler_shift(geom: &BistaticGeometry, speeds: &Speeds, carrier_hz: f64) -> Result<f64> {
    if !(carrier_hz > 0.0) {
        return Err(Error::domain(format!("carrier frequency must be positive, got {carrier_hz}")));
    }
    let cos_half = cos_half_bistatic_angle(geom.bistatic_range, geom.baseline, geom.theta, geom.theta_tr)?;
    let target_term = 2.0 * speeds.target * geom.delta.cos() * cos_half;
    let tx_term = speeds.tx * (geom.delta_tx - geom.theta_tx).cos();
    let rx_term = speeds.rx * (geom.delta_rx - geom.theta).cos();
    Ok(carrier_hz / SPEED_OF_LIGHT * (target_term + tx_term + rx_term))
}

/// Partial derivative of the Doppler shift with respect to bistatic range
/// (Hz/m) at fixed look angles and baseline. Zero on the collinear branch.
pub fn dxi_dd(geom: &BistaticGeometry, target_speed: f64, delta: f64, carrier_hz: f64) -> Result<f64> {
    let d = geom.bistatic_range;
    let l = geom.baseline;
    let cos_half = cos_half_bistatic_angle(d, l, geom.theta, geom.theta_tr)?;
    if cos_half == 0.0 {
        return Ok(0.0);
    }
    let phi = geom.theta - geom.theta_tr;
    let den = d * d + l * l + 2.0 * d * l * phi.cos();
    let s = phi.sin();
    Ok(carrier_hz / SPEED_OF_LIGHT * 2.0 * target_speed * delta.cos() * l * l * s * s
        / (den * den * den).sqrt())
}
