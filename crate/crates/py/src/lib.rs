//! Python bindings.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use kapitsa_core::error::Error;
use kapitsa_core::kapitsa::{self as jump, ConsistencyMode, JumpResult, PhysicalParams};
use kapitsa_core::kernel::Kernel;
use kapitsa_core::moments::{MomentEngine, MomentIndex, QuadratureConfig};
use kapitsa_core::solver::Solver;
use kapitsa_core::spectrum::{self, SpectrumMode, SpectrumParams};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::NonIntegrable { .. } => PyValueError::new_err(e.to_string()),
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn mode(s: &str) -> PyResult<SpectrumMode> {
    s.parse().map_err(py_err)
}

fn consistency(s: &str) -> PyResult<ConsistencyMode> {
    s.parse().map_err(py_err)
}

fn result_dict<'py>(py: Python<'py>, r: &JumpResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("gamma", r.gamma)?;
    d.set_item("q", r.q)?;
    d.set_item("w0", r.w0)?;
    d.set_item("spectrum_mode", r.spectrum_mode.to_string())?;
    d.set_item("order", r.order)?;
    d.set_item("consistency_mode", r.consistency_mode.to_string())?;
    d.set_item("C_coeff", r.c_coeff)?;
    d.set_item("eps0", r.eps0)?;
    d.set_item("eps1", r.eps1)?;
    d.set_item("convergence_ratio", r.convergence_ratio)?;
    d.set_item("quad_err", r.quad_err)?;
    d.set_item("R", r.r)?;
    d.set_item("eps_t_per_flux", r.eps_t_per_flux)?;
    Ok(d)
}

/// Excitation spectrum: mode is "bogoliubov", "phonon" or "free".
#[pyclass(name = "Spectrum", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySpectrum {
    inner: SpectrumParams,
}

#[pymethods]
impl PySpectrum {
    #[new]
    #[pyo3(signature = (mode = "bogoliubov", w0 = 1.0))]
    fn new(mode: &str, w0: f64) -> PyResult<Self> {
        Ok(PySpectrum { inner: SpectrumParams::new(self::mode(mode)?, w0).map_err(py_err)? })
    }

    #[getter]
    fn mode(&self) -> String {
        self.inner.mode.to_string()
    }

    #[getter]
    fn w0(&self) -> f64 {
        self.inner.w0
    }

    fn energy(&self, c: f64) -> PyResult<f64> {
        spectrum::energy(c, &self.inner).map_err(py_err)
    }

    fn group_velocity(&self, c: f64) -> PyResult<f64> {
        spectrum::group_velocity(c, &self.inner).map_err(py_err)
    }

    fn bose_weight(&self, c: f64) -> PyResult<f64> {
        spectrum::bose_weight(c, &self.inner).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Spectrum(mode='{}', w0={})", self.inner.mode, self.inner.w0)
    }
}

/// Moment engine for one collision exponent and spectrum, with its solver.
#[pyclass(name = "Engine", frozen)]
struct PyEngine {
    inner: MomentEngine,
}

#[pymethods]
impl PyEngine {
    #[new]
    #[pyo3(signature = (gamma, spectrum, rel_tol = 1e-10))]
    fn new(gamma: f64, spectrum: &PySpectrum, rel_tol: f64) -> PyResult<Self> {
        let inner = MomentEngine::new(gamma, spectrum.inner, QuadratureConfig::with_rel_tol(rel_tol)).map_err(py_err)?;
        Ok(PyEngine { inner })
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    /// `{g1, g2, g_eps2, g_eps3, g_alpha_eps}`.
    fn scalars<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.inner.scalars();
        let d = PyDict::new(py);
        d.set_item("g1", s.g1)?;
        d.set_item("g2", s.g2)?;
        d.set_item("g_eps2", s.g_eps2)?;
        d.set_item("g_eps3", s.g_eps3)?;
        d.set_item("g_alpha_eps", s.g_alpha_eps)?;
        Ok(d)
    }

    fn t(&self, r: u32, s: u32, m: f64, n: u32, k: f64) -> PyResult<f64> {
        let i = MomentIndex::new(r, s, m, n).map_err(py_err)?;
        Ok(self.inner.t(i, k).map_err(py_err)?.value)
    }

    fn j(&self, r: u32, s: u32, m: f64, n: u32, k: f64, k1: f64) -> PyResult<f64> {
        let i = MomentIndex::new(r, s, m, n).map_err(py_err)?;
        Ok(self.inner.j(i, k, k1).map_err(py_err)?.value)
    }

    /// `(a, b, c, d, omega)` of the dispersion matrix at `k`.
    fn dispersion(&self, k: f64) -> PyResult<(f64, f64, f64, f64, f64)> {
        let r = Kernel::new(&self.inner).reduced(k).map_err(py_err)?;
        Ok((r.a, r.b, r.c, r.d, r.omega))
    }

    fn identity_residuals(&self, k: f64) -> PyResult<(f64, f64)> {
        Kernel::new(&self.inner).identity_residuals(k).map_err(py_err)
    }

    fn eps0(&self) -> f64 {
        Solver::new(&self.inner).eps0()
    }

    fn eps1(&self, py: Python<'_>) -> PyResult<f64> {
        py.detach(|| Solver::new(&self.inner).eps1().map(|e| e.eps1)).map_err(py_err)
    }

    /// Zeroth-order `(e1, e2)` at `k`, for a trial coefficient `eps` (defaults to eps0).
    #[pyo3(signature = (k, eps = None))]
    fn zeroth_density(&self, k: f64, eps: Option<f64>) -> PyResult<(f64, f64)> {
        let s = Solver::new(&self.inner);
        s.zeroth_at(k, eps.unwrap_or_else(|| s.eps0())).map_err(py_err)
    }

    /// Zeroth-order profiles `(w1, w2, temperature)` at the given distances.
    #[pyo3(signature = (xs, panels_per_octave = 4))]
    fn profiles(&self, py: Python<'_>, xs: Vec<f64>, panels_per_octave: usize) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let p = py
            .detach(|| {
                let s = Solver::new(&self.inner);
                let table = s.density_table(panels_per_octave)?;
                s.profiles(&xs, &table)
            })
            .map_err(py_err)?;
        Ok((p.w1, p.w2, p.temperature))
    }

    #[pyo3(signature = (q, mode = "derived"))]
    fn coefficient(&self, q: f64, mode: &str) -> PyResult<f64> {
        jump::coefficient_from(&self.inner, q, consistency(mode)?).map_err(py_err)
    }

    /// Full result as a dict; physical parameters enable `R`.
    #[pyo3(signature = (q, order = 1, mode = "derived", spin = None, t_s = None, mass = None))]
    fn evaluate<'py>(
        &self,
        py: Python<'py>,
        q: f64,
        order: usize,
        mode: &str,
        spin: Option<f64>,
        t_s: Option<f64>,
        mass: Option<f64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let mode = consistency(mode)?;
        let phys = physical(spin, t_s, mass);
        let r = py.detach(|| jump::evaluate(&self.inner, q, order, mode, phys.as_ref())).map_err(py_err)?;
        result_dict(py, &r)
    }
}

fn physical(spin: Option<f64>, t_s: Option<f64>, mass: Option<f64>) -> Option<PhysicalParams> {
    if spin.is_none() && t_s.is_none() && mass.is_none() {
        return None;
    }
    let mut p = PhysicalParams::default();
    if let Some(s) = spin {
        p.spin_s = s;
    }
    if let Some(t) = t_s {
        p.t_s = t;
    }
    if let Some(m) = mass {
        p.mass_m = m;
    }
    Some(p)
}

/// One-shot evaluation at `(gamma, q, w0)`.
#[pyfunction]
#[pyo3(signature = (gamma, q, w0, spectrum = "bogoliubov", order = 1, consistency = "derived", rel_tol = 1e-10))]
#[allow(clippy::too_many_arguments)]
fn compute<'py>(
    py: Python<'py>,
    gamma: f64,
    q: f64,
    w0: f64,
    spectrum: &str,
    order: usize,
    consistency: &str,
    rel_tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let sp = SpectrumParams::new(mode(spectrum)?, w0).map_err(py_err)?;
    let cm = self::consistency(consistency)?;
    let r = py
        .detach(|| {
            let e = MomentEngine::new(gamma, sp, QuadratureConfig::with_rel_tol(rel_tol))?;
            jump::evaluate(&e, q, order, cm, None)
        })
        .map_err(py_err)?;
    result_dict(py, &r)
}

#[pymodule]
fn kapitsa(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpectrum>()?;
    m.add_class::<PyEngine>()?;
    m.add_function(wrap_pyfunction!(compute, m)?)?;
    Ok(())
}
