//! Python bindings. States are `(px, py, vx, vy)` tuples; tables come back
//! as dicts of column lists.

use pyo3::exceptions::{PyArithmeticError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use bistatic_ipcrlb::bounds::{lambda_factors, BoundVariant, FactorInputs, SampleSet};
use bistatic_ipcrlb::error::Error;
use bistatic_ipcrlb::geometry::{self, KinematicState, Speeds};
use bistatic_ipcrlb::sim::sweep::{bound_traces_at, BoundSetup};
use bistatic_ipcrlb::sim::{self as core_sim, Cell, Table};
use bistatic_ipcrlb::tmu::{self, CovForm, SignalModel};

type State = (f64, f64, f64, f64);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Singular(_) => PyArithmeticError::new_err(e.to_string()),
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Csv(_) | Error::EmptyLibrary(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn state(s: State) -> KinematicState {
    KinematicState::new(s.0, s.1, s.2, s.3)
}

fn signal(vartheta0: f64, p_fa: f64) -> PyResult<SignalModel> {
    let sig = SignalModel { vartheta0, p_fa, ..SignalModel::default() };
    sig.validate().map_err(to_py)?;
    Ok(sig)
}

fn table_dict<'py>(py: Python<'py>, t: &Table) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    for (j, name) in t.columns.iter().enumerate() {
        let col = PyList::empty(py);
        for row in &t.rows {
            match &row[j] {
                Cell::Text(s) => col.append(s)?,
                Cell::Int(i) => col.append(i)?,
                Cell::Num(x) => col.append(x)?,
            }
        }
        out.set_item(name, col)?;
    }
    Ok(out)
}

/// Bistatic triangle of a target and the two sites. Angles in radians.
#[pyfunction]
fn bistatic_geometry<'py>(py: Python<'py>, target: State, tx: State, rx: State) -> PyResult<Bound<'py, PyDict>> {
    let g = geometry::build_geometry(&state(target), &state(tx), &state(rx)).map_err(to_py)?;
    let d = PyDict::new(py);
    for (k, v) in [
        ("baseline", g.baseline),
        ("range_tx", g.range_tx),
        ("range_rx", g.range_rx),
        ("bistatic_range", g.bistatic_range),
        ("theta", g.theta),
        ("theta_tr", g.theta_tr),
        ("beta", g.beta),
        ("delta", g.delta),
    ] {
        d.set_item(k, v)?;
    }
    Ok(d)
}

/// Doppler shift (Hz) at the target.
#[pyfunction]
#[pyo3(signature = (target, tx, rx, carrier_hz = tmu::ATSC_CARRIER_HZ))]
fn doppler_shift(target: State, tx: State, rx: State, carrier_hz: f64) -> PyResult<f64> {
    let (t, a, b) = (state(target), state(tx), state(rx));
    let g = geometry::build_geometry(&t, &a, &b).map_err(to_py)?;
    geometry::doppler_shift(&g, &Speeds::of(&t, &a, &b), carrier_hz).map_err(to_py)
}

/// SNR, detection probability and measurement standard deviations.
#[pyfunction]
#[pyo3(signature = (target, tx, rx, vartheta0 = 5000.0, p_fa = 1e-3, general = false))]
fn measurement_uncertainty<'py>(
    py: Python<'py>,
    target: State,
    tx: State,
    rx: State,
    vartheta0: f64,
    p_fa: f64,
    general: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let form = if general { CovForm::General } else { CovForm::Assumption1 };
    let t = tmu::evaluate_tmu(&state(target), &state(tx), &state(rx), &signal(vartheta0, p_fa)?, form).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("psi", t.psi)?;
    d.set_item("pd", t.pd)?;
    d.set_item("sigma_d", t.cov.sigma_d())?;
    d.set_item("sigma_v", t.cov.sigma_v())?;
    d.set_item("sigma_theta", t.cov.sigma_theta())?;
    Ok(d)
}

#[pyfunction]
fn detection_probability(psi: f64, p_fa: f64) -> f64 {
    tmu::detection_probability(psi, p_fa)
}

/// Monte Carlo gain factors for `m` measurements in the gate:
/// `{"lambda1": (mean, se), "lambda2_ipcrlb": .., "lambda2_efim": ..}`.
#[pyfunction]
#[pyo3(signature = (psi, pd, lambda_vg, p_fa, m, n_samples = 20000, seed = 0, gate = 4.0))]
#[allow(clippy::too_many_arguments)]
fn gain_factors<'py>(
    py: Python<'py>,
    psi: f64,
    pd: f64,
    lambda_vg: f64,
    p_fa: f64,
    m: usize,
    n_samples: usize,
    seed: u64,
    gate: f64,
) -> PyResult<Bound<'py, PyDict>> {
    if m == 0 || n_samples == 0 || !(gate > 0.0) {
        return Err(PyValueError::new_err("m and n_samples must be at least 1 and gate positive"));
    }
    let samples = SampleSet::generate(seed, n_samples, gate, m);
    let f = lambda_factors(&FactorInputs { psi, pd, lambda_vg, p_fa }, m, &samples);
    let d = PyDict::new(py);
    d.set_item("lambda1", (f.lambda1.mean, f.lambda1.std_err))?;
    for v in [BoundVariant::Ipcrlb, BoundVariant::Efim] {
        let e = f.lambda2_estimate(v);
        d.set_item(format!("lambda2_{}", v.name()), (e.mean, e.std_err))?;
    }
    Ok(d)
}

/// A scenario loaded from JSON; unset keys take the built-in defaults.
#[pyclass(name = "Scenario", skip_from_py_object)]
struct PyScenario {
    inner: core_sim::Scenario,
}

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (json = "{}"))]
    fn new(json: &str) -> PyResult<Self> {
        Ok(Self { inner: core_sim::Scenario::from_json_str(json).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_path(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Self { inner: core_sim::Scenario::from_path(&path).map_err(to_py)? })
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.sim.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.inner.sim.seed = seed;
    }

    #[getter]
    fn runs(&self) -> usize {
        self.inner.sim.runs
    }

    #[setter]
    fn set_runs(&mut self, runs: usize) -> PyResult<()> {
        if runs == 0 {
            return Err(PyValueError::new_err("sim.runs must be at least 1"));
        }
        self.inner.sim.runs = runs;
        Ok(())
    }

    /// One-step bound traces at a state from the scenario prior:
    /// `{"ipcrlb": (mean, se), "efim": .., "pcrlb": ..}`.
    fn bound_traces<'py>(&self, py: Python<'py>, target: State, tx: State, rx: State) -> PyResult<Bound<'py, PyDict>> {
        let scn = &self.inner;
        let sig = scn.signal_model();
        let clutter = scn.clutter_model();
        let model = scn.motion_model();
        let prior = scn.prior_cov();
        let samples = core_sim::bound_samples(scn);
        let setup = BoundSetup {
            sig: &sig,
            clutter: &clutter,
            model: &model,
            prior_cov: &prior,
            samples: &samples,
            m_max: scn.bounds.m_max,
        };
        let traces = bound_traces_at(&state(target), &state(tx), &state(rx), &sig, &setup).map_err(to_py)?;
        let d = PyDict::new(py);
        for (v, e) in BoundVariant::ALL.iter().zip(traces) {
            d.set_item(v.name(), (e.mean, e.std_err))?;
        }
        Ok(d)
    }

    fn tmu_sweep<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let t = py.detach(|| core_sim::tmu_sweep_table(&self.inner)).map_err(to_py)?;
        table_dict(py, &t)
    }

    fn bounds_compare<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let t = py.detach(|| core_sim::bounds_table(&self.inner)).map_err(to_py)?;
        table_dict(py, &t)
    }

    fn track<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let steps = py.detach(|| core_sim::run_track_experiment(&self.inner)).map_err(to_py)?;
        table_dict(py, &core_sim::track_table(&steps))
    }

    fn control_compare<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let res = py.detach(|| core_sim::run_closed_loop(&self.inner)).map_err(to_py)?;
        table_dict(py, &core_sim::closed_loop_table(&res))
    }

    fn validate_assumption1<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let t = py.detach(|| core_sim::assumption1_table(&self.inner)).map_err(to_py)?;
        table_dict(py, &t)
    }
}

#[pymodule]
fn ipcrlb(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(bistatic_geometry, m)?)?;
    m.add_function(wrap_pyfunction!(doppler_shift, m)?)?;
    m.add_function(wrap_pyfunction!(measurement_uncertainty, m)?)?;
    m.add_function(wrap_pyfunction!(detection_probability, m)?)?;
    m.add_function(wrap_pyfunction!(gain_factors, m)?)?;
    m.add_class::<PyScenario>()?;
    Ok(())
}
