//! Scenario configuration.
//!
//! A scenario is a JSON object with the sections `signal`, `clutter`,
//! `target`, `transmitter`, `receiver`, `motion`, `bounds`, `control` and
//! `sim`. Every field has a default, so `{}` is a valid scenario (the
//! receiver-control case study). Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clutter::ClutterModel;
use crate::control::{ControlPolicy, ControlSettings, CostKind, ManeuverLimits};
use crate::error::{Error, Result};
use crate::geometry::KinematicState;
use crate::tmu::{atsc_signal_fim, SignalModel, ATSC_CARRIER_HZ, ATSC_ROLL_OFF, ATSC_SYMBOLS, ATSC_SYMBOL_PERIOD};
use crate::tracker::MotionModel;
use crate::{Mat4, Vec4};

use super::sweep::SweepSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SignalConfig {
    pub alpha: f64,
    /// Symbol period (s).
    pub t_sym: f64,
    pub n_symbols: u64,
    pub carrier_hz: f64,
    pub sigma_theta0_deg: f64,
    pub vartheta0: f64,
    pub p_fa: f64,
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            alpha: ATSC_ROLL_OFF,
            t_sym: ATSC_SYMBOL_PERIOD,
            n_symbols: ATSC_SYMBOLS,
            carrier_hz: ATSC_CARRIER_HZ,
            sigma_theta0_deg: 3.0,
            vartheta0: 5000.0,
            p_fa: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClutterConfig {
    /// Clutter density per `m * m/s * rad`. Ignored when `n_cell` is set.
    pub density: f64,
    /// Gate half-width in standard deviations.
    pub gate: f64,
    /// Resolution cell count; with `volume` gives `density = n_cell * P_FA / volume`.
    pub n_cell: Option<f64>,
    pub volume: Option<f64>,
}

impl Default for ClutterConfig {
    fn default() -> Self {
        Self { density: 1e-5, gate: 4.0, n_cell: None, volume: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotionConfig {
    /// Sampling period (s).
    pub period: f64,
    /// White-noise acceleration intensity (m^2/s^3).
    pub q: f64,
    pub prior_pos_std: f64,
    pub prior_vel_std: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self { period: 1.0, q: 0.1, prior_pos_std: 100.0, prior_vel_std: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    pub n_samples: usize,
    pub m_max: usize,
    /// Batches for the batch-means error of bound traces.
    pub batches: usize,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self { n_samples: 20000, m_max: 3, batches: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlConfig {
    pub v_min: f64,
    pub v_max: f64,
    pub w_max_deg: Option<f64>,
    pub a_v: f64,
    pub a_w_deg: f64,
    pub n_v: usize,
    pub n_w: usize,
    /// Samples per factor integral when scoring candidates.
    pub n_samples: usize,
    pub cost: CostKind,
    pub policies: Vec<ControlPolicy>,
    /// Heading of the previous command at step 0; defaults to the receiver heading.
    pub initial_heading_deg: Option<f64>,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            v_min: 1.0,
            v_max: 100.0,
            w_max_deg: None,
            a_v: 5.0,
            a_w_deg: 30.0,
            n_v: 40,
            n_w: 20,
            n_samples: 2000,
            cost: CostKind::Full,
            policies: ControlPolicy::ALL.to_vec(),
            initial_heading_deg: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub seed: u64,
    pub runs: usize,
    pub horizon: usize,
    pub tmu_sweeps: Vec<SweepSpec>,
    pub bound_sweeps: Vec<SweepSpec>,
    pub assumption1_sweeps: Vec<SweepSpec>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            runs: 200,
            horizon: 40,
            tmu_sweeps: SweepSpec::default_tmu(),
            bound_sweeps: SweepSpec::default_bounds(),
            assumption1_sweeps: SweepSpec::default_assumption1(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub signal: SignalConfig,
    pub clutter: ClutterConfig,
    pub target: KinematicState,
    pub transmitter: KinematicState,
    pub receiver: KinematicState,
    pub motion: MotionConfig,
    pub bounds: BoundsConfig,
    pub control: ControlConfig,
    pub sim: SimConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            signal: SignalConfig::default(),
            clutter: ClutterConfig::default(),
            target: KinematicState::new(5000.0, 5000.0, -80.0, -100.0),
            transmitter: KinematicState::default(),
            receiver: KinematicState::stationary(5000.0, 0.0),
            motion: MotionConfig::default(),
            bounds: BoundsConfig::default(),
            control: ControlConfig::default(),
            sim: SimConfig::default(),
        }
    }
}

fn require(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg.to_string()))
    }
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let sg = &self.signal;
        require(sg.alpha > 0.0, "signal.alpha must be positive")?;
        require(sg.t_sym > 0.0, "signal.t_sym must be positive")?;
        require(sg.n_symbols >= 1, "signal.n_symbols must be at least 1")?;
        require(sg.carrier_hz > 0.0, "signal.carrier_hz must be positive")?;
        require(sg.sigma_theta0_deg > 0.0, "signal.sigma_theta0_deg must be positive")?;
        require(sg.vartheta0 > 0.0, "signal.vartheta0 must be positive")?;
        require(sg.p_fa > 0.0 && sg.p_fa < 1.0, "signal.p_fa must lie in (0, 1)")?;
        let c = &self.clutter;
        require(c.density >= 0.0 && c.density.is_finite(), "clutter.density must be non-negative")?;
        require(c.gate > 0.0, "clutter.gate must be positive")?;
        require(c.n_cell.is_some() == c.volume.is_some(), "clutter.n_cell and clutter.volume go together")?;
        if let (Some(n), Some(v)) = (c.n_cell, c.volume) {
            require(n >= 0.0 && v > 0.0, "clutter.n_cell must be non-negative and clutter.volume positive")?;
        }
        for (name, st) in [("target", &self.target), ("transmitter", &self.transmitter), ("receiver", &self.receiver)] {
            require(st.is_finite(), &format!("{name} state must be finite"))?;
        }
        let m = &self.motion;
        require(m.period > 0.0, "motion.period must be positive")?;
        require(m.q >= 0.0, "motion.q must be non-negative")?;
        require(m.prior_pos_std > 0.0 && m.prior_vel_std > 0.0, "motion.prior_pos_std and motion.prior_vel_std must be positive")?;
        let b = &self.bounds;
        require(b.n_samples >= 1, "bounds.n_samples must be at least 1")?;
        require(b.m_max >= 1, "bounds.m_max must be at least 1")?;
        require(b.batches >= 2 && b.batches <= b.n_samples, "bounds.batches must be in [2, bounds.n_samples]")?;
        let k = &self.control;
        require(k.v_min <= k.v_max && k.v_min >= 0.0, "control.v_min must be in [0, control.v_max]")?;
        require(k.a_v >= 0.0 && k.a_w_deg >= 0.0, "control.a_v and control.a_w_deg must be non-negative")?;
        require(k.w_max_deg.is_none_or(|w| w >= 0.0), "control.w_max_deg must be non-negative")?;
        require(k.n_v >= 1 && k.n_w >= 1, "control.n_v and control.n_w must be at least 1")?;
        require(k.n_samples >= 1, "control.n_samples must be at least 1")?;
        require(!k.policies.is_empty(), "control.policies must not be empty")?;
        let s = &self.sim;
        require(s.runs >= 1, "sim.runs must be at least 1")?;
        require(s.horizon >= 1, "sim.horizon must be at least 1")?;
        for (name, list) in [
            ("sim.tmu_sweeps", &s.tmu_sweeps),
            ("sim.bound_sweeps", &s.bound_sweeps),
            ("sim.assumption1_sweeps", &s.assumption1_sweeps),
        ] {
            for (i, sw) in list.iter().enumerate() {
                sw.validate().map_err(|e| Error::Config(format!("{name}[{i}]: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn signal_model(&self) -> SignalModel {
        let s = &self.signal;
        let (s1, s2, s3) = atsc_signal_fim(s.alpha, s.t_sym, s.n_symbols);
        SignalModel {
            s1,
            s2,
            s3,
            carrier_hz: s.carrier_hz,
            sigma_theta0: s.sigma_theta0_deg.to_radians(),
            vartheta0: s.vartheta0,
            p_fa: s.p_fa,
        }
    }

    pub fn clutter_model(&self) -> ClutterModel {
        let c = &self.clutter;
        let density = match (c.n_cell, c.volume) {
            (Some(n), Some(v)) => n * self.signal.p_fa / v,
            _ => c.density,
        };
        ClutterModel { density, gate: c.gate }
    }

    pub fn motion_model(&self) -> MotionModel {
        MotionModel::ncv(self.motion.period, self.motion.q)
    }

    pub fn prior_cov(&self) -> Mat4 {
        let p = self.motion.prior_pos_std.powi(2);
        let v = self.motion.prior_vel_std.powi(2);
        Mat4::from_diagonal(&Vec4::new(p, p, v, v))
    }

    pub fn control_settings(&self) -> ControlSettings {
        let k = &self.control;
        ControlSettings {
            limits: ManeuverLimits {
                v_min: k.v_min,
                v_max: k.v_max,
                w_max: k.w_max_deg.map(f64::to_radians),
                a_v: k.a_v,
                a_w: k.a_w_deg.to_radians(),
            },
            n_v: k.n_v,
            n_w: k.n_w,
            period: self.motion.period,
            cost: k.cost,
            m_max: self.bounds.m_max,
        }
    }
}
