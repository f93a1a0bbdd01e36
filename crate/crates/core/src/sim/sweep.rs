//! Single-geometry sweeps: measurement uncertainty, one-step bound
//! comparison and the range-independence check of the Doppler shift.
//!
//! Sweep geometry: the receiver sits at the origin, the transmitter at
//! `L (cos a, sin a)` with `a` the receiver-to-transmitter angle, and the
//! target at `R_R (cos theta, sin theta)`. The target moves at
//! `target_speed` with aspect `delta` from the bistatic bisector.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    bound_trace, fim_step, measurement_info_batches, BoundVariant, Estimate, FimState, MeasurementContext, SampleSet,
};
use crate::clutter::ClutterModel;
use crate::error::{Error, Result};
use crate::geometry::{bisector_direction, build_geometry, dxi_dd, KinematicState};
use crate::tmu::{evaluate_tmu, meas_cov_assumption1, meas_cov_general, snr, CovForm, SignalModel};
use crate::tracker::MotionModel;
use crate::{Mat4, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    ThetaDeg,
    RrM,
    PFa,
    Vartheta0,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::ThetaDeg => "theta_deg",
            SweepVar::RrM => "rr_m",
            SweepVar::PFa => "p_fa",
            SweepVar::Vartheta0 => "vartheta0",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub variable: SweepVar,
    /// Explicit grid; takes precedence over `grid`.
    pub values: Option<Vec<f64>>,
    /// `[start, stop, step]`, stop inclusive.
    pub grid: Option<[f64; 3]>,
    pub theta_deg: f64,
    pub rr_m: f64,
    pub baseline_m: f64,
    pub rx_to_tx_deg: f64,
    pub target_speed: f64,
    pub delta_deg: f64,
    pub cov_form: CovForm,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            variable: SweepVar::ThetaDeg,
            values: None,
            grid: None,
            theta_deg: 90.0,
            rr_m: 1500.0,
            baseline_m: 5000.0,
            rx_to_tx_deg: 180.0,
            target_speed: 50.0,
            delta_deg: 0.0,
            cov_form: CovForm::Assumption1,
        }
    }
}

impl SweepSpec {
    pub fn theta(rr_m: f64) -> Self {
        Self { variable: SweepVar::ThetaDeg, rr_m, ..Self::default() }
    }

    pub fn range(theta_deg: f64) -> Self {
        Self { variable: SweepVar::RrM, theta_deg, ..Self::default() }
    }

    pub fn default_tmu() -> Vec<Self> {
        vec![Self::theta(1500.0), Self::theta(2000.0), Self::range(0.0), Self::range(90.0), Self::range(178.2)]
    }

    pub fn default_bounds() -> Vec<Self> {
        vec![
            Self::theta(1500.0),
            Self::theta(2000.0),
            Self::theta(4000.0),
            Self::theta(7000.0),
            Self::range(0.0),
            Self::range(90.0),
            Self::range(178.2),
        ]
    }

    pub fn default_assumption1() -> Vec<Self> {
        [7000.0, 4000.0, 1500.0]
            .into_iter()
            .map(|rr| Self { cov_form: CovForm::General, ..Self::theta(rr) })
            .collect()
    }

    pub fn grid_values(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        let [start, stop, step] = self.grid.unwrap_or(match self.variable {
            SweepVar::ThetaDeg => [0.0, 360.0, 2.0],
            SweepVar::RrM => [1000.0, 10000.0, 250.0],
            SweepVar::PFa => [-6.0, -1.0, 1.0],
            SweepVar::Vartheta0 => [2000.0, 10000.0, 500.0],
        });
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        let values = (0..n).map(|i| start + i as f64 * step);
        if self.variable == SweepVar::PFa && self.grid.is_none() {
            // default false-alarm grid is in decades
            values.map(|e| 10f64.powf(e)).collect()
        } else {
            values.collect()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some([start, stop, step]) = self.grid {
            if !(step > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) {
                return Err(Error::Config("grid must be [start, stop, step] with step > 0 and stop >= start".into()));
            }
        }
        let v = self.grid_values();
        if v.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if v.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("sweep grid must be strictly increasing".into()));
        }
        if !(self.baseline_m >= 0.0 && self.target_speed >= 0.0) {
            return Err(Error::Config("baseline_m and target_speed must be non-negative".into()));
        }
        Ok(())
    }

    /// Curve label, naming the swept variable and the parameters held fixed.
    pub fn label(&self) -> String {
        match self.variable {
            SweepVar::ThetaDeg => format!("theta_deg[rr_m={}]", self.rr_m),
            SweepVar::RrM => format!("rr_m[theta_deg={}]", self.theta_deg),
            v => format!("{}[theta_deg={},rr_m={}]", v.name(), self.theta_deg, self.rr_m),
        }
    }

    /// Target, transmitter, receiver and signal model at one grid value.
    pub fn point(&self, value: f64, sig: &SignalModel) -> (KinematicState, KinematicState, KinematicState, SignalModel) {
        let mut sig = *sig;
        let (mut theta_deg, mut rr) = (self.theta_deg, self.rr_m);
        match self.variable {
            SweepVar::ThetaDeg => theta_deg = value,
            SweepVar::RrM => rr = value,
            SweepVar::PFa => sig.p_fa = value,
            SweepVar::Vartheta0 => sig.vartheta0 = value,
        }
        let rx = KinematicState::default();
        let a = self.rx_to_tx_deg.to_radians();
        let tx = KinematicState::stationary(self.baseline_m * a.cos(), self.baseline_m * a.sin());
        let th = theta_deg.to_radians();
        let p = Vec2::new(rr * th.cos(), rr * th.sin());
        let mut target = KinematicState::stationary(p.x, p.y);
        if self.target_speed > 0.0 && p != tx.position() && p != rx.position() {
            let b = bisector_direction(&p, &tx.position(), &rx.position());
            let heading = b.y.atan2(b.x) - self.delta_deg.to_radians();
            target.vx = self.target_speed * heading.cos();
            target.vy = self.target_speed * heading.sin();
        }
        (target, tx, rx, sig)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TmuRow {
    pub label: String,
    pub value: f64,
    pub sigma_d: f64,
    pub sigma_v: f64,
    pub sigma_theta: f64,
    pub pd: f64,
}

pub fn run_tmu_sweep(spec: &SweepSpec, sig: &SignalModel) -> Result<Vec<TmuRow>> {
    spec.validate()?;
    let label = spec.label();
    spec.grid_values()
        .par_iter()
        .map(|&value| {
            let (target, tx, rx, sig) = spec.point(value, sig);
            let t = evaluate_tmu(&target, &tx, &rx, &sig, spec.cov_form)?;
            Ok(TmuRow {
                label: label.clone(),
                value,
                sigma_d: t.cov.sigma_d(),
                sigma_v: t.cov.sigma_v(),
                sigma_theta: t.cov.sigma_theta(),
                pd: t.pd,
            })
        })
        .collect()
}

/// Shared inputs of a one-step bound comparison.
#[derive(Debug, Clone, Copy)]
pub struct BoundSetup<'a> {
    pub sig: &'a SignalModel,
    pub clutter: &'a ClutterModel,
    pub model: &'a MotionModel,
    pub prior_cov: &'a Mat4,
    pub samples: &'a SampleSet,
    pub m_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub label: String,
    pub value: f64,
    /// Trace estimates in [`BoundVariant::ALL`] order.
    pub traces: [Estimate; 3],
}

impl BoundRow {
    pub fn trace(&self, v: BoundVariant) -> Estimate {
        self.traces[BoundVariant::ALL.iter().position(|&x| x == v).expect("variant")]
    }
}

/// One-step bound traces of all variants at a state, from a common prior.
pub fn bound_traces_at(
    target: &KinematicState,
    tx: &KinematicState,
    rx: &KinematicState,
    sig: &SignalModel,
    setup: &BoundSetup<'_>,
) -> Result<[Estimate; 3]> {
    let ctx = MeasurementContext::new(target, tx, rx, sig, setup.clutter)?;
    let prior = FimState::from_prior(setup.prior_cov, setup.model)?;
    let mut out = [Estimate::default(); 3];
    for (slot, variant) in out.iter_mut().zip(BoundVariant::ALL) {
        let (jz, batches) = measurement_info_batches(&ctx, variant, setup.samples, setup.m_max);
        let mean = bound_trace(&fim_step(&prior, &jz)?)?.full;
        let traces = batches
            .iter()
            .map(|jb| Ok(bound_trace(&fim_step(&prior, jb)?)?.full))
            .collect::<Result<Vec<f64>>>()?;
        *slot = Estimate { mean, std_err: batch_std_err(&traces) };
    }
    Ok(out)
}

/// Standard error of the mean from batch estimates.
pub fn batch_std_err(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

pub fn run_bound_comparison(spec: &SweepSpec, setup: &BoundSetup<'_>) -> Result<Vec<BoundRow>> {
    spec.validate()?;
    let label = spec.label();
    spec.grid_values()
        .par_iter()
        .map(|&value| {
            let (target, tx, rx, sig) = spec.point(value, setup.sig);
            Ok(BoundRow {
                label: label.clone(),
                value,
                traces: bound_traces_at(&target, &tx, &rx, &sig, setup)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assumption1Row {
    pub theta_deg: f64,
    pub rr_m: f64,
    pub dxi_dd: f64,
    pub sigma_v_general: f64,
    pub sigma_v_assumption1: f64,
    pub rel_diff: f64,
}

/// Doppler sensitivity to bistatic range and its effect on the velocity
/// standard deviation along a sweep.
pub fn run_assumption1(spec: &SweepSpec, sig: &SignalModel) -> Result<Vec<Assumption1Row>> {
    spec.validate()?;
    spec.grid_values()
        .par_iter()
        .map(|&value| {
            let (target, tx, rx, sig) = spec.point(value, sig);
            let geom = build_geometry(&target, &tx, &rx)?;
            let psi = snr(geom.range_tx, geom.range_rx, sig.vartheta0)?;
            let e = dxi_dd(&geom, spec.target_speed, spec.delta_deg.to_radians(), sig.carrier_hz)?;
            let general = meas_cov_general(&sig, psi, e)?.sigma_v();
            let simple = meas_cov_assumption1(&sig, psi)?.sigma_v();
            Ok(Assumption1Row {
                theta_deg: geom.theta.to_degrees(),
                rr_m: geom.range_rx,
                dxi_dd: e,
                sigma_v_general: general,
                sigma_v_assumption1: simple,
                rel_diff: (general - simple).abs() / simple,
            })
        })
        .collect()
}
