//! Monte Carlo tracking experiments: the tracker against its bound with a
//! passive receiver, and the closed receiver-control loop.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bounds::{bound_trace, fim_step, measurement_info, BoundVariant, FimState, MeasurementContext, SampleSet};
use crate::clutter::generate_measurements;
use crate::control::{control_step, ControlCommand, ControlPolicy, ControlWorld};
use crate::error::{Error, Result};
use crate::geometry::KinematicState;
use crate::rng::{substream, Purpose, SimRng};
use crate::tmu::{evaluate_tmu, CovForm};
use crate::tracker::{pda_update, predict, MotionModel, TrackEstimate};
use crate::{Mat4, Vec4};

use super::scenario::Scenario;

fn gaussian_vector(rng: &mut SimRng, cov: &Mat4) -> Result<Vec4> {
    if *cov == Mat4::zeros() {
        return Ok(Vec4::zeros());
    }
    let l = cov
        .cholesky()
        .ok_or_else(|| Error::singular("sampling covariance is not positive definite"))?
        .l();
    Ok(l * Vec4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal)))
}

/// True target states for steps `0..=horizon`.
pub fn truth_trajectory(scn: &Scenario, run: u64) -> Result<Vec<Vec4>> {
    let model = scn.motion_model();
    let mut rng = substream(scn.sim.seed, run, Purpose::Truth);
    let mut x = scn.target.to_vector();
    let mut out = vec![x];
    for _ in 0..scn.sim.horizon {
        x = model.f * x + gaussian_vector(&mut rng, &model.q)?;
        out.push(x);
    }
    Ok(out)
}

/// Initial track: truth plus a draw from the prior.
pub fn initial_track(scn: &Scenario, run: u64) -> Result<TrackEstimate> {
    let p0 = scn.prior_cov();
    let mut rng = substream(scn.sim.seed, run, Purpose::Prior);
    Ok(TrackEstimate {
        mean: scn.target.to_vector() + gaussian_vector(&mut rng, &p0)?,
        cov: p0,
        k: 0,
    })
}

/// Site state after `k` periods of constant velocity.
fn site_at(site: &KinematicState, k: usize, model: &MotionModel) -> KinematicState {
    let t = k as f64 * model.period;
    KinematicState::new(site.px + site.vx * t, site.py + site.vy * t, site.vx, site.vy)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, Default)]
struct StepRecord {
    pos_sq: f64,
    vel_sq: f64,
    rx: (f64, f64),
    pd: f64,
    sigma: [f64; 3],
}

fn record(track: &TrackEstimate, truth: &Vec4, rx: &KinematicState, scn: &Scenario, tx: &KinematicState) -> Result<StepRecord> {
    let e = track.mean - truth;
    let tmu = evaluate_tmu(&KinematicState::from_vector(truth), tx, rx, &scn.signal_model(), CovForm::Assumption1)?;
    Ok(StepRecord {
        pos_sq: e[0] * e[0] + e[1] * e[1],
        vel_sq: e[2] * e[2] + e[3] * e[3],
        rx: (rx.px, rx.py),
        pd: tmu.pd,
        sigma: [tmu.cov.sigma_d(), tmu.cov.sigma_v(), tmu.cov.sigma_theta()],
    })
}

/// Per-step tracking error against the bound, passive receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackStep {
    pub step: usize,
    pub pos_mse: f64,
    /// Standard error of `pos_mse` over runs.
    pub pos_mse_se: f64,
    pub vel_mse: f64,
    /// Position-block bound trace in [`BoundVariant::ALL`] order.
    pub bound_pos: [f64; 3],
    pub pd_mean: f64,
    pub diverged_runs: usize,
}

fn run_track_once(scn: &Scenario, run: u64) -> Result<Vec<StepRecord>> {
    let model = scn.motion_model();
    let sig = scn.signal_model();
    let clutter = scn.clutter_model();
    let truth = truth_trajectory(scn, run)?;
    let mut track = initial_track(scn, run)?;
    let mut rng = substream(scn.sim.seed, run, Purpose::Measurements);
    let mut out = vec![record(&track, &truth[0], &scn.receiver, scn, &scn.transmitter)?];
    for k in 1..=scn.sim.horizon {
        let tx = site_at(&scn.transmitter, k, &model);
        let rx = site_at(&scn.receiver, k, &model);
        let predicted = predict(&track, &model);
        let truth_k = KinematicState::from_vector(&truth[k]);
        let z = generate_measurements(&mut rng, &truth_k, &tx, &rx, &sig, &clutter)?;
        let tmu = evaluate_tmu(&predicted.state(), &tx, &rx, &sig, CovForm::Assumption1)?;
        track = pda_update(&predicted, &z, &tmu.cov, tmu.pd, &clutter, &tx, &rx)?;
        out.push(record(&track, &truth[k], &rx, scn, &tx)?);
    }
    Ok(out)
}

/// Bound position traces along the noise-free mean trajectory.
pub fn bound_along_mean(scn: &Scenario) -> Result<Vec<[f64; 3]>> {
    let model = scn.motion_model();
    let sig = scn.signal_model();
    let clutter = scn.clutter_model();
    let samples = SampleSet::from_rng(
        &mut substream(scn.sim.seed, 0, Purpose::BoundSamples),
        scn.bounds.n_samples,
        clutter.gate,
        scn.bounds.m_max,
    );
    let prior = FimState::from_prior(&scn.prior_cov(), &model)?;
    let p0 = bound_trace(&prior)?.position;
    let mut fims = [prior; 3];
    let mut out = vec![[p0; 3]];
    let mut x = scn.target.to_vector();
    for k in 1..=scn.sim.horizon {
        x = model.f * x;
        let ctx = MeasurementContext::new(
            &KinematicState::from_vector(&x),
            &site_at(&scn.transmitter, k, &model),
            &site_at(&scn.receiver, k, &model),
            &sig,
            &clutter,
        )?;
        let mut row = [0.0; 3];
        for (i, v) in BoundVariant::ALL.into_iter().enumerate() {
            let jz = measurement_info(&ctx, v, &samples, scn.bounds.m_max);
            fims[i] = fim_step(&fims[i], &jz)?;
            row[i] = bound_trace(&fims[i])?.position;
        }
        out.push(row);
    }
    Ok(out)
}

pub fn run_track_experiment(scn: &Scenario) -> Result<Vec<TrackStep>> {
    let runs: Vec<Vec<StepRecord>> = (0..scn.sim.runs as u64)
        .into_par_iter()
        .map(|r| run_track_once(scn, r))
        .collect::<Result<_>>()?;
    let bound = bound_along_mean(scn)?;
    let limit = (10.0 * scn.motion.prior_pos_std).powi(2);
    let n = runs.len() as f64;
    Ok((0..=scn.sim.horizon)
        .map(|k| {
            let sq: Vec<f64> = runs.iter().map(|r| r[k].pos_sq).collect();
            let (mse, sd) = mean_std(&sq);
            TrackStep {
                step: k,
                pos_mse: mse,
                pos_mse_se: if runs.len() > 1 { sd * (n / (n - 1.0)).sqrt() / n.sqrt() } else { 0.0 },
                vel_mse: runs.iter().map(|r| r[k].vel_sq).sum::<f64>() / n,
                bound_pos: bound[k],
                pd_mean: runs.iter().map(|r| r[k].pd).sum::<f64>() / n,
                diverged_runs: sq.iter().filter(|&&e| e > limit).count(),
            }
        })
        .collect())
}

/// Aggregate of one policy at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyStep {
    pub step: usize,
    pub policy: ControlPolicy,
    pub rx_x: f64,
    pub rx_y: f64,
    pub pos_rmse: f64,
    pub vel_rmse: f64,
    pub pd: (f64, f64),
    pub sigma_d: (f64, f64),
    pub sigma_v: (f64, f64),
    pub sigma_theta: (f64, f64),
    pub diverged_runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopResult {
    /// Policy-major, step-minor.
    pub steps: Vec<PolicyStep>,
    /// Squared position error at the final step, per policy and run.
    pub final_sq_errors: Vec<(ControlPolicy, Vec<f64>)>,
}

fn run_policy_once(scn: &Scenario, policy: ControlPolicy, run: u64, truth: &[Vec4]) -> Result<Vec<StepRecord>> {
    let model = scn.motion_model();
    let sig = scn.signal_model();
    let clutter = scn.clutter_model();
    let settings = scn.control_settings();
    let mut track = initial_track(scn, run)?;
    let mut fim = FimState::from_prior(&scn.prior_cov(), &model)?;
    let mut rx = scn.receiver;
    let mut prev = ControlCommand {
        v: rx.speed(),
        w: scn.control.initial_heading_deg.map_or(rx.heading(), f64::to_radians),
    };
    let mut meas_rng = substream(scn.sim.seed, run, Purpose::Measurements);
    let mut policy_rng = substream(scn.sim.seed, run, Purpose::Policy);
    let mut out = vec![record(&track, &truth[0], &rx, scn, &scn.transmitter)?];
    let needs_samples = policy.bound_variant().is_some();
    for k in 1..=scn.sim.horizon {
        let tx = site_at(&scn.transmitter, k, &model);
        let predicted = predict(&track, &model);
        let samples = if needs_samples {
            let key = (run << 32) | k as u64;
            SampleSet::from_rng(&mut substream(scn.sim.seed, key, Purpose::BoundSamples), scn.control.n_samples, clutter.gate, scn.bounds.m_max)
        } else {
            SampleSet::from_rng(&mut substream(scn.sim.seed, 0, Purpose::BoundSamples), 1, clutter.gate, 1)
        };
        let world = ControlWorld {
            predicted: &predicted,
            fim_prev: &fim,
            rx: &rx,
            tx: &tx,
            prev,
            sig: &sig,
            clutter: &clutter,
        };
        let step = control_step(policy, &world, &settings, &samples, &mut policy_rng)?;
        if let Some(f) = step.selection.fim {
            fim = f;
        }
        rx = step.rx;
        prev = step.selection.command;

        let truth_k = KinematicState::from_vector(&truth[k]);
        let z = generate_measurements(&mut meas_rng, &truth_k, &tx, &rx, &sig, &clutter)?;
        let tmu = evaluate_tmu(&predicted.state(), &tx, &rx, &sig, CovForm::Assumption1)?;
        track = pda_update(&predicted, &z, &tmu.cov, tmu.pd, &clutter, &tx, &rx)?;
        out.push(record(&track, &truth[k], &rx, scn, &tx)?);
    }
    Ok(out)
}

pub fn run_closed_loop(scn: &Scenario) -> Result<ClosedLoopResult> {
    let policies = scn.control.policies.clone();
    // runs[r][p] = per-step records
    let runs: Vec<Vec<Vec<StepRecord>>> = (0..scn.sim.runs as u64)
        .into_par_iter()
        .map(|r| {
            let truth = truth_trajectory(scn, r)?;
            policies.iter().map(|&p| run_policy_once(scn, p, r, &truth)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let limit = (10.0 * scn.motion.prior_pos_std).powi(2);
    let n = runs.len() as f64;
    let mut steps = Vec::new();
    let mut final_sq_errors = Vec::new();
    for (pi, &policy) in policies.iter().enumerate() {
        for k in 0..=scn.sim.horizon {
            let recs: Vec<&StepRecord> = runs.iter().map(|r| &r[pi][k]).collect();
            let col = |f: &dyn Fn(&StepRecord) -> f64| recs.iter().map(|r| f(r)).collect::<Vec<f64>>();
            steps.push(PolicyStep {
                step: k,
                policy,
                rx_x: col(&|r| r.rx.0).iter().sum::<f64>() / n,
                rx_y: col(&|r| r.rx.1).iter().sum::<f64>() / n,
                pos_rmse: (col(&|r| r.pos_sq).iter().sum::<f64>() / n).sqrt(),
                vel_rmse: (col(&|r| r.vel_sq).iter().sum::<f64>() / n).sqrt(),
                pd: mean_std(&col(&|r| r.pd)),
                sigma_d: mean_std(&col(&|r| r.sigma[0])),
                sigma_v: mean_std(&col(&|r| r.sigma[1])),
                sigma_theta: mean_std(&col(&|r| r.sigma[2])),
                diverged_runs: recs.iter().filter(|r| r.pos_sq > limit).count(),
            });
        }
        final_sq_errors.push((policy, runs.iter().map(|r| r[pi][scn.sim.horizon].pos_sq).collect()));
    }
    Ok(ClosedLoopResult { steps, final_sq_errors })
}
