//! Acceptance checks. Prints one PASS/FAIL line per criterion and a summary.
//! Runs without the libtest harness so the lines come out in order and
//! unbuffered; a failed criterion is reported, not panicked on.

#[path = "../../core/tests/common/oracle.rs"]
mod oracle;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use bistatic_ipcrlb::bounds::{
    bound_trace, fim_step, lambda_factors, measurement_info, measurement_info_masked, BoundVariant, FactorInputs,
    FimState, MeasurementContext, SampleSet,
};
use bistatic_ipcrlb::control::ControlPolicy;
use bistatic_ipcrlb::geometry::KinematicState;
use bistatic_ipcrlb::sim::{self, run_assumption1, run_tmu_sweep, Scenario, SweepSpec};
use bistatic_ipcrlb::tmu::{detection_probability, CovForm};
use bistatic_ipcrlb::{Mat4, Result};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn config(name: &str) -> Scenario {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    Scenario::from_path(&path).unwrap_or_else(|e| panic!("{e}"))
}

fn argmin(xs: &[f64]) -> usize {
    (0..xs.len()).min_by(|&a, &b| xs[a].total_cmp(&xs[b])).unwrap()
}

// 1: Doppler insensitivity to bistatic range away from the baseline
fn assumption1() -> Result<Verdict> {
    let spec = SweepSpec { cov_form: CovForm::General, target_speed: 50.0, delta_deg: 0.0, ..SweepSpec::theta(7000.0) };
    let sig = config("case1.json").signal_model();
    let rows = run_assumption1(&spec, &sig)?;
    let (mut worst_e, mut worst_rel) = (0.0f64, 0.0f64);
    for (theta, row) in spec.grid_values().iter().zip(&rows) {
        if *theta <= 170.0 || *theta >= 190.0 {
            worst_e = worst_e.max(row.dxi_dd.abs());
        }
        if *theta <= 175.0 || *theta >= 185.0 {
            worst_rel = worst_rel.max(row.rel_diff);
        }
    }
    Ok(verdict(
        worst_e < 1e-3 && worst_rel < 0.01,
        format!("R_R 7 km: max |dxi/dd| {worst_e:.3e} Hz/m (< 1e-3), max sigma_v rel diff {:.3}% (< 1%)", 100.0 * worst_rel),
    ))
}

// 2: detection and accuracy peak with the target between the sites
fn tmu_extremum() -> Result<Verdict> {
    let sig = config("case1.json").signal_model();
    let mut pass = true;
    let mut detail = Vec::new();
    for rr in [1500.0, 2000.0] {
        let spec = SweepSpec::theta(rr);
        let grid = spec.grid_values();
        let rows = run_tmu_sweep(&spec, &sig)?;
        let col = |f: fn(&sim::sweep::TmuRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
        let neg_pd: Vec<f64> = col(|r| -r.pd);
        let at = [argmin(&neg_pd), argmin(&col(|r| r.sigma_d)), argmin(&col(|r| r.sigma_theta))].map(|i| grid[i]);
        pass &= at.iter().all(|&t| t == 180.0);
        detail.push(format!("R_R {rr}: argmax Pd {}, argmin sigma_d {}, argmin sigma_theta {}", at[0], at[1], at[2]));
    }
    Ok(verdict(pass, detail.join("; ")))
}

// 3: IPCRLB <= EFIM <= PCRLB within Monte Carlo error, gap grows with TMU
fn bound_ordering() -> Result<Verdict> {
    let scn = config("case2.json");
    let rows = sim::bounds_rows(&scn)?;
    let wanted = |label: &str| {
        ["theta_deg[rr_m=1500]", "theta_deg[rr_m=2000]", "rr_m[theta_deg=0]", "rr_m[theta_deg=90]", "rr_m[theta_deg=178.2]"]
            .contains(&label)
    };
    let (mut points, mut strict, mut beyond) = (0, 0, 0);
    for row in rows.iter().filter(|r| wanted(&r.label)) {
        let [i, e, p] = row.traces;
        points += 1;
        for (lo, hi) in [(i, e), (e, p)] {
            if lo.mean > hi.mean {
                strict += 1;
                if lo.mean - hi.mean > 3.0 * (lo.std_err.powi(2) + hi.std_err.powi(2)).sqrt() {
                    beyond += 1;
                }
            }
        }
    }
    let gap = |label: &str| {
        let g: Vec<f64> = rows
            .iter()
            .filter(|r| r.label == label && (80.0..=100.0).contains(&r.value))
            .map(|r| r.traces[2].mean - r.traces[0].mean)
            .collect();
        g.iter().sum::<f64>() / g.len() as f64
    };
    let (g15, g20) = (gap("theta_deg[rr_m=1500]"), gap("theta_deg[rr_m=2000]"));
    Ok(verdict(
        beyond == 0 && g20 > g15,
        format!(
            "{points} points, {strict} raw order inversions, {beyond} beyond 3 sigma; mean gap near 90 deg: {g20:.2} at 2 km vs {g15:.2} at 1.5 km"
        ),
    ))
}

// 4: the bound collapses to the simpler forms when the SNR gradient or the
// gain terms are switched off
fn reductions() -> Result<Verdict> {
    let scn = config("case2.json");
    let samples = sim::bound_samples(&scn);
    let m_max = scn.bounds.m_max;
    let tx = KinematicState::stationary(-5000.0, 0.0);
    let rx = KinematicState::default();
    let prior = FimState::from_prior(&scn.prior_cov(), &scn.motion_model())?;
    let trace = |jz: &Mat4| -> Result<f64> { Ok(bound_trace(&fim_step(&prior, jz)?)?.full) };
    let mut pass = true;
    let mut n = 0;
    for (x, y) in [(1500.0, 200.0), (0.0, 2000.0), (-2500.0, 400.0), (3000.0, -3000.0)] {
        let target = KinematicState::new(x, y, -20.0, 30.0);
        let mut ctx = MeasurementContext::new(&target, &tx, &rx, &scn.signal_model(), &scn.clutter_model())?;
        let efim = measurement_info(&ctx, BoundVariant::Efim, &samples, m_max);
        let masked = measurement_info_masked(&ctx, [true, false, false], &samples, m_max);
        pass &= efim == masked && trace(&efim)? == trace(&masked)?;
        ctx.snr_gradient = Default::default();
        let ip = measurement_info(&ctx, BoundVariant::Ipcrlb, &samples, m_max);
        let pc = measurement_info(&ctx, BoundVariant::Pcrlb, &samples, m_max);
        pass &= ip == pc && trace(&ip)? == trace(&pc)?;
        n += 1;
    }
    Ok(verdict(pass, format!("{n} states: zero SNR gradient gives IPCRLB == PCRLB, gain terms off gives IPCRLB == EFIM, bit-exact")))
}

// 5: Monte Carlo factors against deterministic quadrature
fn quadrature() -> Result<Verdict> {
    let gate = 4.0;
    let points = [(20.0, 1.5, 1e-3, 1), (5.0, 0.3, 1e-3, 1), (200.0, 3.0, 1e-4, 1), (60.0, 1.0, 1e-3, 2), (15.0, 0.5, 1e-2, 2)];
    let mut worst = 0.0f64;
    for (k, &(psi, lambda_vg, p_fa, m)) in points.iter().enumerate() {
        let pd = detection_probability(psi, p_fa);
        let p = oracle::OraclePoint { psi, pd, lambda_vg, p_fa, m };
        let (q1, q2) = oracle::factors(&p, gate, if m == 1 { 32 } else { 16 });
        let samples = SampleSet::generate(500 + k as u64, 40_000, gate, m);
        let f = lambda_factors(&FactorInputs { psi, pd, lambda_vg, p_fa }, m, &samples);
        let l2 = f.lambda2_estimate(BoundVariant::Ipcrlb);
        worst = worst.max((f.lambda1.mean - q1).abs() / f.lambda1.std_err);
        worst = worst.max((l2.mean - q2).abs() / l2.std_err);
    }
    Ok(verdict(worst < 3.0, format!("5 points, m in {{1, 2}}: largest deviation {worst:.2} sigma (< 3)")))
}

// 6: tracker MSE stays above the bound
fn bound_validity() -> Result<Verdict> {
    let scn = config("track.json");
    let steps = sim::run_track_experiment(&scn)?;
    let late: Vec<_> = steps.iter().filter(|s| s.step > 5).collect();
    let ok = late.iter().filter(|s| s.pos_mse >= s.bound_pos[0]).count();
    let frac = ok as f64 / late.len() as f64;
    let pd = late.iter().map(|s| s.pd_mean).sum::<f64>() / late.len() as f64;
    let ratio = late.iter().map(|s| s.pos_mse / s.bound_pos[0]).fold(f64::INFINITY, f64::min);
    Ok(verdict(
        frac >= 0.95,
        format!(
            "{} runs, Pd {pd:.3}: MSE >= IPCRLB at {ok}/{} steps after step 5 ({:.1}%, need 95%), min MSE/bound {ratio:.3}",
            scn.sim.runs,
            late.len(),
            100.0 * frac
        ),
    ))
}

// 7: bound-driven receiver control beats the baselines
fn control_ordering() -> Result<Verdict> {
    let scn = config("case3_ci.json");
    let res = sim::run_closed_loop(&scn)?;
    // final RMSE and its delta-method standard error
    let stat = |p: ControlPolicy| {
        let sq = &res.final_sq_errors.iter().find(|(q, _)| *q == p).expect("policy").1;
        let n = sq.len() as f64;
        let mean = sq.iter().sum::<f64>() / n;
        let var = sq.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let rmse = mean.sqrt();
        (rmse, (var / n).sqrt() / (2.0 * rmse))
    };
    let (ip, ip_se) = stat(ControlPolicy::MinTrIpcrlb);
    let (pc, _) = stat(ControlPolicy::MinTrPcrlb);
    let (fx, fx_se) = stat(ControlPolicy::Fixed);
    let (rn, _) = stat(ControlPolicy::Random);
    let (pdst, _) = stat(ControlPolicy::MinPdst);
    let se = (ip_se * ip_se + fx_se * fx_se).sqrt();
    let pass = ip <= pc && pc <= fx && pc <= rn && fx - ip > 2.0 * se;
    Ok(verdict(
        pass,
        format!(
            "{} runs, final RMSE: ipcrlb {ip:.3}, pcrlb {pc:.3}, pdst {pdst:.3}, fixed {fx:.3}, random {rn:.3}; fixed - ipcrlb {:.2} vs 2 SE {:.2}",
            scn.sim.runs,
            fx - ip,
            2.0 * se
        ),
    ))
}

// 8: with unit gain, certain detection and no clutter the recursion is the
// Kalman filter's covariance
fn kalman() -> Result<Verdict> {
    let scn = config("track.json");
    let model = scn.motion_model();
    let sig = scn.signal_model();
    let clutter = scn.clutter_model();
    let mut fim = FimState::from_prior(&scn.prior_cov(), &model)?;
    let mut p = scn.prior_cov();
    let mut x = scn.target.to_vector();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        x = model.f * x;
        let ctx = MeasurementContext::new(&KinematicState::from_vector(&x), &scn.transmitter, &scn.receiver, &sig, &clutter)?;
        fim = fim_step(&fim, &ctx.standard_information())?;

        let h = ctx.jacobian;
        let r = *ctx.cov.matrix();
        let pp = model.f * p * model.f.transpose() + model.q;
        let s = h * pp * h.transpose() + r;
        let k = pp * h.transpose() * s.try_inverse().expect("innovation covariance");
        let i_kh = Mat4::identity() - k * h;
        p = i_kh * pp * i_kh.transpose() + k * r * k.transpose();

        let inv = fim.j.try_inverse().expect("information");
        worst = worst.max((inv - p).abs().max() / p.abs().max());
    }
    Ok(verdict(worst < 1e-8, format!("50 steps: max relative difference {worst:.2e} (< 1e-8)")))
}

fn run_cli(args: &[&str]) -> std::result::Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ipcrlb")).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn csvs(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().into(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

// 9: every subcommand is reproducible byte for byte
fn determinism() -> std::result::Result<Verdict, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let small = r#"{
        "clutter": { "density": 1.73e-3 },
        "signal": { "vartheta0": 11070 },
        "target": { "px": 2500, "py": 3000, "vx": 5, "vy": -5 },
        "bounds": { "n_samples": 500 },
        "control": { "n_v": 3, "n_w": 3, "n_samples": 200 },
        "sim": {
            "runs": 4, "horizon": 6,
            "tmu_sweeps": [ { "variable": "theta_deg", "rr_m": 1500, "grid": [0, 360, 30] } ],
            "bound_sweeps": [ { "variable": "theta_deg", "rr_m": 2000, "grid": [0, 360, 60] } ],
            "assumption1_sweeps": [ { "variable": "theta_deg", "rr_m": 7000, "grid": [0, 360, 30] } ]
        }
    }"#;
    let cfg = tmp.path().join("small.json");
    std::fs::write(&cfg, small).map_err(|e| e.to_string())?;
    let cfg = cfg.to_str().unwrap();
    let subcommands = ["tmu-sweep", "bounds-compare", "track", "control-compare", "validate-assumption1"];
    let mut identical = 0;
    let mut seed_matters = true;
    for sub in subcommands {
        let dirs = ["a", "b", "c"].map(|d| tmp.path().join(sub).join(d));
        for (d, seed) in dirs.iter().zip(["7", "7", "8"]) {
            run_cli(&[sub, "--config", cfg, "--out", d.to_str().unwrap(), "--seed", seed])?;
        }
        let [a, b, c] = dirs.map(|d| csvs(&d));
        if !a.is_empty() && a == b {
            identical += 1;
        }
        // the sweeps without Monte Carlo ignore the seed
        if matches!(sub, "bounds-compare" | "track" | "control-compare") {
            seed_matters &= a != c;
        }
    }
    Ok(verdict(
        identical == subcommands.len() && seed_matters,
        format!("{identical}/{} subcommands byte-identical on re-run; seed changes stochastic outputs: {seed_matters}", subcommands.len()),
    ))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    check: fn() -> std::result::Result<Verdict, String>,
}

fn lift(r: Result<Verdict>) -> std::result::Result<Verdict, String> {
    r.map_err(|e| e.to_string())
}

fn main() {
    let secs = |s: u64| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { id: 1, name: "assumption-1 validity", limit: secs(5), check: || lift(assumption1()) },
        Criterion { id: 2, name: "TMU extremum", limit: secs(5), check: || lift(tmu_extremum()) },
        Criterion { id: 3, name: "bound ordering", limit: secs(300), check: || lift(bound_ordering()) },
        Criterion { id: 4, name: "reduction identities", limit: secs(10), check: || lift(reductions()) },
        Criterion { id: 5, name: "oracle quadrature", limit: secs(120), check: || lift(quadrature()) },
        Criterion { id: 6, name: "bound validity", limit: secs(300), check: || lift(bound_validity()) },
        Criterion { id: 7, name: "control ordering (CI scale)", limit: secs(1800), check: || lift(control_ordering()) },
        Criterion { id: 8, name: "linear-Gaussian sanity", limit: secs(1), check: || lift(kalman()) },
        Criterion { id: 9, name: "determinism", limit: None, check: determinism },
    ];
    let mut passed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.check)();
        let took = start.elapsed();
        let in_time = c.limit.is_none_or(|l| took <= l);
        let limit = c.limit.map_or(String::new(), |l| format!(" limit {} s", l.as_secs()));
        let (pass, detail) = match result {
            Ok(v) => (v.pass && in_time, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        passed += pass as usize;
        println!(
            "{} {}. {}: {detail} [{:.2} s{limit}]",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            took.as_secs_f64()
        );
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
}
