//! Scenario orchestration and tabular output.

pub mod closed_loop;
pub mod scenario;
pub mod sweep;
pub mod table;

pub use closed_loop::{run_closed_loop, run_track_experiment, ClosedLoopResult, PolicyStep, TrackStep};
pub use scenario::Scenario;
pub use sweep::{run_assumption1, run_bound_comparison, run_tmu_sweep, BoundRow, BoundSetup, SweepSpec, SweepVar};
pub use table::{emit_csv, read_csv, Cell, Table};

use crate::bounds::SampleSet;
use crate::error::Result;
use crate::rng::{substream, Purpose};

pub fn tmu_sweep_table(scn: &Scenario) -> Result<Table> {
    let sig = scn.signal_model();
    let mut t = Table::new(&["sweep_var", "value", "sigma_d_m", "sigma_v_mps", "sigma_theta_rad", "pd"]);
    for spec in &scn.sim.tmu_sweeps {
        for r in run_tmu_sweep(spec, &sig)? {
            t.push(vec![r.label.into(), r.value.into(), r.sigma_d.into(), r.sigma_v.into(), r.sigma_theta.into(), r.pd.into()]);
        }
    }
    Ok(t)
}

/// The sample set used by single-step bound comparisons.
pub fn bound_samples(scn: &Scenario) -> SampleSet {
    SampleSet::from_rng(
        &mut substream(scn.sim.seed, 0, Purpose::BoundSamples),
        scn.bounds.n_samples,
        scn.clutter.gate,
        scn.bounds.m_max,
    )
    .with_batches(scn.bounds.batches)
}

pub fn bounds_rows(scn: &Scenario) -> Result<Vec<BoundRow>> {
    let sig = scn.signal_model();
    let clutter = scn.clutter_model();
    let model = scn.motion_model();
    let prior_cov = scn.prior_cov();
    let samples = bound_samples(scn);
    let setup = BoundSetup {
        sig: &sig,
        clutter: &clutter,
        model: &model,
        prior_cov: &prior_cov,
        samples: &samples,
        m_max: scn.bounds.m_max,
    };
    let mut rows = Vec::new();
    for spec in &scn.sim.bound_sweeps {
        rows.extend(run_bound_comparison(spec, &setup)?);
    }
    Ok(rows)
}

pub fn bounds_table(scn: &Scenario) -> Result<Table> {
    let mut t = Table::new(&[
        "sweep_var",
        "value",
        "trace_ipcrlb",
        "std_ipcrlb",
        "trace_efim",
        "std_efim",
        "trace_pcrlb",
        "std_pcrlb",
    ]);
    for r in bounds_rows(scn)? {
        let mut row = vec![r.label.into(), r.value.into()];
        for e in r.traces {
            row.push(e.mean.into());
            row.push(e.std_err.into());
        }
        t.push(row);
    }
    Ok(t)
}

pub fn track_table(steps: &[TrackStep]) -> Table {
    let mut t = Table::new(&[
        "step",
        "pos_mse",
        "pos_mse_std_err",
        "vel_mse",
        "trace_pos_ipcrlb",
        "trace_pos_efim",
        "trace_pos_pcrlb",
        "pd_mean",
        "diverged_runs",
    ]);
    for s in steps {
        let [a, b, c] = s.bound_pos;
        t.push(vec![
            s.step.into(),
            s.pos_mse.into(),
            s.pos_mse_se.into(),
            s.vel_mse.into(),
            a.into(),
            b.into(),
            c.into(),
            s.pd_mean.into(),
            s.diverged_runs.into(),
        ]);
    }
    t
}

pub fn closed_loop_table(res: &ClosedLoopResult) -> Table {
    let mut t = Table::new(&[
        "step",
        "policy",
        "rx_x",
        "rx_y",
        "pos_rmse",
        "vel_rmse",
        "pd_mean",
        "pd_std",
        "sigma_d_mean",
        "sigma_d_std",
        "sigma_v_mean",
        "sigma_v_std",
        "sigma_theta_mean",
        "sigma_theta_std",
        "diverged_runs",
    ]);
    for s in &res.steps {
        t.push(vec![
            s.step.into(),
            s.policy.name().into(),
            s.rx_x.into(),
            s.rx_y.into(),
            s.pos_rmse.into(),
            s.vel_rmse.into(),
            s.pd.0.into(),
            s.pd.1.into(),
            s.sigma_d.0.into(),
            s.sigma_d.1.into(),
            s.sigma_v.0.into(),
            s.sigma_v.1.into(),
            s.sigma_theta.0.into(),
            s.sigma_theta.1.into(),
            s.diverged_runs.into(),
        ]);
    }
    t
}

pub fn assumption1_table(scn: &Scenario) -> Result<Table> {
    let sig = scn.signal_model();
    let mut t = Table::new(&[
        "sweep_var",
        "theta_deg",
        "rr_m",
        "dxi_dd_hz_per_m",
        "sigma_v_general_mps",
        "sigma_v_assumption1_mps",
        "rel_diff",
    ]);
    for spec in &scn.sim.assumption1_sweeps {
        let label = spec.label();
        for r in run_assumption1(spec, &sig)? {
            t.push(vec![
                label.clone().into(),
                r.theta_deg.into(),
                r.rr_m.into(),
                r.dxi_dd.into(),
                r.sigma_v_general.into(),
                r.sigma_v_assumption1.into(),
                r.rel_diff.into(),
            ]);
        }
    }
    Ok(t)
}
