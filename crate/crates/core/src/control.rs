//! Myopic receiver trajectory control.
//!
//! Each step the receiver picks one command `(v, w)` from a grid around the
//! previous command. Bound-based policies score every candidate by the trace
//! of the one-step-ahead bound evaluated at the predicted target mean.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{bound_trace, fim_step, measurement_info, BoundVariant, FimState, MeasurementContext, SampleSet};
use crate::clutter::ClutterModel;
use crate::error::{Error, Result};
use crate::geometry::KinematicState;
use crate::tmu::SignalModel;
use crate::tracker::TrackEstimate;

/// Receiver speed (m/s) and heading (rad, unwrapped).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlCommand {
    pub v: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManeuverLimits {
    pub v_min: f64,
    pub v_max: f64,
    /// Absolute heading bound (rad); unconstrained when `None`.
    pub w_max: Option<f64>,
    /// Maximum acceleration (m/s^2).
    pub a_v: f64,
    /// Maximum turn rate (rad/s).
    pub a_w: f64,
}

impl Default for ManeuverLimits {
    fn default() -> Self {
        Self {
            v_min: 1.0,
            v_max: 100.0,
            w_max: None,
            a_v: 5.0,
            a_w: 30f64.to_radians(),
        }
    }
}

impl ManeuverLimits {
    /// Whether `cmd` is reachable from `prev` within one period.
    pub fn admits(&self, prev: &ControlCommand, cmd: &ControlCommand, period: f64) -> bool {
        let tol = 1e-9;
        let dv = self.a_v * period;
        let dw = self.a_w * period;
        let in_w = self.w_max.is_none_or(|wm| cmd.w.abs() <= wm + tol);
        cmd.v >= self.v_min - tol
            && cmd.v <= self.v_max + tol
            && cmd.v >= prev.v - dv - tol
            && cmd.v <= prev.v + dv + tol
            && (cmd.w - prev.w).abs() <= dw + tol
            && in_w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub command: ControlCommand,
    /// True when the grid value was moved onto a box constraint.
    pub clamped: bool,
}

/// `(n_v + 1)(n_w + 1)` commands around the previous one, velocity-major.
pub fn command_library(
    prev: &ControlCommand,
    limits: &ManeuverLimits,
    n_v: usize,
    n_w: usize,
    period: f64,
) -> Result<Vec<Candidate>> {
    if n_v == 0 || n_w == 0 || !(period > 0.0) {
        return Err(Error::domain("command grid needs n_v >= 1, n_w >= 1 and a positive period"));
    }
    let dv = limits.a_v * period;
    let dw = limits.a_w * period;
    let v_lo = limits.v_min.max(prev.v - dv);
    let v_hi = limits.v_max.min(prev.v + dv);
    if v_lo > v_hi {
        return Err(Error::EmptyLibrary(format!(
            "no speed in [{}, {}] is reachable from {} within {} s",
            limits.v_min, limits.v_max, prev.v, period
        )));
    }
    let (w_lo, w_hi) = match limits.w_max {
        Some(wm) => ((-wm).max(prev.w - dw), wm.min(prev.w + dw)),
        None => (prev.w - dw, prev.w + dw),
    };
    if w_lo > w_hi {
        return Err(Error::EmptyLibrary(format!("no heading within +-{:?} is reachable from {}", limits.w_max, prev.w)));
    }

    let mut out = Vec::with_capacity((n_v + 1) * (n_w + 1));
    for i in 0..=n_v {
        let v_raw = prev.v - dv + i as f64 * 2.0 * dv / n_v as f64;
        let v = v_raw.clamp(limits.v_min, limits.v_max);
        for j in 0..=n_w {
            let w_raw = prev.w - dw + j as f64 * 2.0 * dw / n_w as f64;
            let w = match limits.w_max {
                Some(wm) => w_raw.clamp(-wm, wm),
                None => w_raw,
            };
            out.push(Candidate {
                command: ControlCommand { v, w },
                clamped: v != v_raw || w != w_raw,
            });
        }
    }
    Ok(out)
}

/// Receiver state after holding `cmd` for one period.
pub fn propagate_receiver(rx: &KinematicState, cmd: &ControlCommand, period: f64) -> KinematicState {
    let (s, c) = cmd.w.sin_cos();
    let vx = cmd.v * c;
    let vy = cmd.v * s;
    KinematicState::new(rx.px + vx * period, rx.py + vy * period, vx, vy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlPolicy {
    MinTrIpcrlb,
    MinTrPcrlb,
    MinPdst,
    Fixed,
    Random,
}

impl ControlPolicy {
    pub const ALL: [ControlPolicy; 5] = [
        ControlPolicy::MinTrIpcrlb,
        ControlPolicy::MinTrPcrlb,
        ControlPolicy::MinPdst,
        ControlPolicy::Fixed,
        ControlPolicy::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControlPolicy::MinTrIpcrlb => "min_tr_ipcrlb",
            ControlPolicy::MinTrPcrlb => "min_tr_pcrlb",
            ControlPolicy::MinPdst => "min_pdst",
            ControlPolicy::Fixed => "fixed",
            ControlPolicy::Random => "random",
        }
    }

    pub fn bound_variant(self) -> Option<BoundVariant> {
        match self {
            ControlPolicy::MinTrIpcrlb => Some(BoundVariant::Ipcrlb),
            ControlPolicy::MinTrPcrlb => Some(BoundVariant::Pcrlb),
            _ => None,
        }
    }
}

/// Which trace the bound-based policies minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    #[default]
    Full,
    Position,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSettings {
    pub limits: ManeuverLimits,
    pub n_v: usize,
    pub n_w: usize,
    pub period: f64,
    pub cost: CostKind,
    pub m_max: usize,
}

/// Read-only inputs of one control decision.
#[derive(Debug, Clone, Copy)]
pub struct ControlWorld<'a> {
    /// Predicted target track `x_{k|k-1}`.
    pub predicted: &'a TrackEstimate,
    /// Bound information after the previous step.
    pub fim_prev: &'a FimState,
    pub rx: &'a KinematicState,
    pub tx: &'a KinematicState,
    pub prev: ControlCommand,
    pub sig: &'a SignalModel,
    pub clutter: &'a ClutterModel,
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub command: ControlCommand,
    /// Library index, `None` for the fixed policy.
    pub index: Option<usize>,
    /// Audited cost per library entry; `None` when the policy does not score
    /// candidates or a candidate geometry was invalid.
    pub costs: Vec<Option<f64>>,
    /// Bound state of the chosen candidate for bound-based policies.
    pub fim: Option<FimState>,
}

/// Trace cost of one candidate and the resulting bound state.
pub fn candidate_cost(
    variant: BoundVariant,
    world: &ControlWorld<'_>,
    cmd: &ControlCommand,
    settings: &ControlSettings,
    samples: &SampleSet,
) -> Result<(f64, FimState)> {
    let rx_next = propagate_receiver(world.rx, cmd, settings.period);
    let target = world.predicted.state();
    let ctx = MeasurementContext::new(&target, world.tx, &rx_next, world.sig, world.clutter)?;
    let j_z = measurement_info(&ctx, variant, samples, settings.m_max);
    let fim = fim_step(world.fim_prev, &j_z)?;
    let t = bound_trace(&fim)?;
    let cost = match settings.cost {
        CostKind::Full => t.full,
        CostKind::Position => t.position,
    };
    Ok((cost, fim))
}

/// Lowest finite cost, ties to the lowest index.
pub fn argmin(costs: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in costs.iter().enumerate() {
        if let Some(c) = *c {
            if c.is_finite() && best.is_none_or(|(_, b)| c < b) {
                best = Some((i, c));
            }
        }
    }
    best.map(|(i, _)| i)
}

pub fn select_command<R: Rng + ?Sized>(
    policy: ControlPolicy,
    world: &ControlWorld<'_>,
    library: &[Candidate],
    settings: &ControlSettings,
    samples: &SampleSet,
    rng: &mut R,
) -> Result<Selection> {
    if library.is_empty() {
        return Err(Error::EmptyLibrary("no candidates to choose from".into()));
    }
    let none = || vec![None; library.len()];
    match policy {
        ControlPolicy::Fixed => Ok(Selection {
            command: ControlCommand { v: 0.0, w: world.prev.w },
            index: None,
            costs: none(),
            fim: None,
        }),
        ControlPolicy::Random => {
            let i = rng.random_range(0..library.len());
            Ok(Selection { command: library[i].command, index: Some(i), costs: none(), fim: None })
        }
        ControlPolicy::MinPdst => {
            let target = world.predicted.state().position();
            let costs: Vec<Option<f64>> = library
                .iter()
                .map(|c| Some((propagate_receiver(world.rx, &c.command, settings.period).position() - target).norm()))
                .collect();
            let i = argmin(&costs).ok_or_else(|| Error::EmptyLibrary("no finite distance".into()))?;
            Ok(Selection { command: library[i].command, index: Some(i), costs, fim: None })
        }
        ControlPolicy::MinTrIpcrlb | ControlPolicy::MinTrPcrlb => {
            let variant = policy.bound_variant().expect("bound policy");
            let scored: Vec<Option<(f64, FimState)>> = library
                .par_iter()
                .map(|c| candidate_cost(variant, world, &c.command, settings, samples).ok())
                .collect();
            let costs: Vec<Option<f64>> = scored.iter().map(|s| s.map(|(c, _)| c)).collect();
            let i = argmin(&costs).ok_or_else(|| Error::singular("no candidate has a finite bound"))?;
            Ok(Selection {
                command: library[i].command,
                index: Some(i),
                costs,
                fim: scored[i].map(|(_, f)| f),
            })
        }
    }
}

/// Outcome of one control step.
#[derive(Debug, Clone)]
pub struct ControlStep {
    pub rx: KinematicState,
    pub selection: Selection,
}

/// Builds the library, selects a command and moves the receiver.
pub fn control_step<R: Rng + ?Sized>(
    policy: ControlPolicy,
    world: &ControlWorld<'_>,
    settings: &ControlSettings,
    samples: &SampleSet,
    rng: &mut R,
) -> Result<ControlStep> {
    let library = command_library(&world.prev, &settings.limits, settings.n_v, settings.n_w, settings.period)?;
    let selection = select_command(policy, world, &library, settings, samples, rng)?;
    let rx = if policy == ControlPolicy::Fixed {
        KinematicState::new(world.rx.px, world.rx.py, 0.0, 0.0)
    } else {
        propagate_receiver(world.rx, &selection.command, settings.period)
    };
    Ok(ControlStep { rx, selection })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn library_sizes() {
        let lim = ManeuverLimits::default();
        let prev = ControlCommand { v: 50.0, w: 0.3 };
        let lib = command_library(&prev, &lim, 1, 1, 1.0).unwrap();
        assert_eq!(lib.len(), 4);
        assert_eq!(lib[0].command, ControlCommand { v: 45.0, w: 0.3 - lim.a_w });
        assert_eq!(lib[3].command, ControlCommand { v: 55.0, w: 0.3 + lim.a_w });
        assert_eq!(command_library(&prev, &lim, 40, 20, 1.0).unwrap().len(), 861);
    }

    #[test]
    fn clamps_at_speed_limit() {
        let lim = ManeuverLimits::default();
        let prev = ControlCommand { v: lim.v_max, w: 0.0 };
        let lib = command_library(&prev, &lim, 10, 4, 1.0).unwrap();
        assert!(lib.iter().all(|c| c.command.v <= lim.v_max));
        assert!(lib.iter().any(|c| c.clamped));
        assert!(lib.iter().all(|c| lim.admits(&prev, &c.command, 1.0)));
    }

    #[test]
    fn unreachable_speeds_are_an_error() {
        let lim = ManeuverLimits { v_min: 50.0, ..ManeuverLimits::default() };
        let prev = ControlCommand { v: 0.0, w: 0.0 };
        assert!(matches!(command_library(&prev, &lim, 4, 4, 1.0), Err(Error::EmptyLibrary(_))));
        let bad = ManeuverLimits { v_min: 10.0, v_max: 5.0, ..ManeuverLimits::default() };
        assert!(matches!(command_library(&prev, &bad, 4, 4, 1.0), Err(Error::EmptyLibrary(_))));
    }

    #[test]
    fn receiver_kinematics() {
        let rx = KinematicState::stationary(10.0, -5.0);
        let a = propagate_receiver(&rx, &ControlCommand { v: 1.0, w: 0.0 }, 1.0);
        assert_eq!((a.px, a.py), (11.0, -5.0));
        let b = propagate_receiver(&rx, &ControlCommand { v: 10.0, w: PI / 2.0 }, 2.0);
        assert_relative_eq!(b.px, 10.0, epsilon = 1e-12);
        assert_relative_eq!(b.py, 15.0, epsilon = 1e-12);
        let c = propagate_receiver(&b, &ControlCommand { v: 10.0, w: -PI / 2.0 }, 2.0);
        assert_relative_eq!(c.px, rx.px, epsilon = 1e-9);
        assert_relative_eq!(c.py, rx.py, epsilon = 1e-9);
    }

    #[test]
    fn argmin_ties_go_to_lowest_index() {
        assert_eq!(argmin(&[None, Some(2.0), Some(1.0), Some(1.0)]), Some(2));
        assert_eq!(argmin(&[None, Some(f64::NAN)]), None);
    }
}
