//! Python bindings for `sglab`.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sglab::dsl::parse_axis_str;
use sglab::prover::{search, verify_paper_assignment, ConstraintSet, Field};
use sglab::{render_report, render_script, Format};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_format(format: &str) -> PyResult<Format> {
    format.parse().map_err(value_error)
}

/// A normalized spin-1/2 state in z coordinates.
#[pyclass(name = "SpinKet", frozen, skip_from_py_object, module = "sglab_py")]
#[derive(Clone)]
struct PySpinKet(sglab::SpinKet);

#[pymethods]
impl PySpinKet {
    /// Normalizes `plus|z+> + minus|z->`.
    #[new]
    fn new(plus: Complex64, minus: Complex64) -> PyResult<Self> {
        sglab::make_ket(plus, minus).map(PySpinKet).map_err(value_error)
    }

    #[staticmethod]
    fn z_plus() -> Self {
        PySpinKet(sglab::SpinKet::Z_PLUS)
    }

    #[staticmethod]
    fn z_minus() -> Self {
        PySpinKet(sglab::SpinKet::Z_MINUS)
    }

    #[getter]
    fn plus(&self) -> Complex64 {
        self.0.plus()
    }

    #[getter]
    fn minus(&self) -> Complex64 {
        self.0.minus()
    }

    fn canonical_phase(&self) -> Self {
        PySpinKet(self.0.canonical_phase())
    }

    fn __repr__(&self) -> String {
        let (p, m) = (self.0.plus(), self.0.minus());
        format!("SpinKet(({}{:+}j), ({}{:+}j))", p.re, p.im, m.re, m.im)
    }
}

/// `<a|b>`, conjugate-linear in `a`.
#[pyfunction]
fn inner_product(a: &PySpinKet, b: &PySpinKet) -> Complex64 {
    sglab::inner_product(&a.0, &b.0)
}

#[pyfunction]
#[pyo3(signature = (a, b, tol = 1e-12))]
fn equal_up_to_global_phase(a: &PySpinKet, b: &PySpinKet, tol: f64) -> PyResult<bool> {
    sglab::equal_up_to_global_phase(&a.0, &b.0, tol).map_err(value_error)
}

/// Eigenkets `(plus, minus)` for an axis such as `"y"` or `"axis(pi/2, 0)"`.
#[pyfunction]
fn eigenbasis(axis: &str) -> PyResult<(PySpinKet, PySpinKet)> {
    let axis = parse_axis_str(axis).map_err(value_error)?;
    let b = sglab::eigenbasis(&axis);
    Ok((PySpinKet(*b.ket_plus()), PySpinKet(*b.ket_minus())))
}

/// Coefficients of `ket` in the eigenbasis of `axis`.
#[pyfunction]
fn basis_expand(ket: &PySpinKet, axis: &str) -> PyResult<(Complex64, Complex64)> {
    let axis = parse_axis_str(axis).map_err(value_error)?;
    Ok(sglab::basis_expand(&ket.0, &sglab::eigenbasis(&axis)))
}

/// Born-rule branch probabilities `(p_plus, p_minus)`.
#[pyfunction]
fn split(ket: &PySpinKet, axis: &str) -> PyResult<(f64, f64)> {
    let axis = parse_axis_str(axis).map_err(value_error)?;
    let r = sglab::split(&ket.0, &sglab::SternGerlach::new(axis));
    Ok((r.p_plus, r.p_minus))
}

/// A parsed experiment script.
#[pyclass(name = "ExperimentScript", frozen, module = "sglab_py")]
struct PyScript(sglab::ExperimentScript);

#[pymethods]
impl PyScript {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        sglab::parse_script(text).map(PyScript).map_err(value_error)
    }

    fn render(&self) -> String {
        render_script(&self.0)
    }

    #[getter]
    fn stage_count(&self) -> usize {
        self.0.stages.len()
    }

    /// Exact detector intensities `(plus, minus)`.
    fn detector(&self) -> PyResult<(f64, f64)> {
        let r = sglab::run_pipeline(&self.0).map_err(value_error)?;
        Ok((r.detector.plus, r.detector.minus))
    }

    /// Exact run rendered as `"table"` or `"json"`.
    #[pyo3(signature = (format = "json"))]
    fn report(&self, format: &str) -> PyResult<String> {
        let r = sglab::run_pipeline(&self.0).map_err(value_error)?;
        Ok(render_report(&r, parse_format(format)?))
    }

    /// Sampled counts as a dict with `plus`, `minus` and `absorbed`.
    fn sample<'py>(&self, py: Python<'py>, shots: u64, seed: u64) -> PyResult<Bound<'py, PyDict>> {
        let c = sglab::sample_shots(&self.0, shots, seed).map_err(value_error)?;
        let d = PyDict::new(py);
        d.set_item("shots", c.shots)?;
        d.set_item("seed", c.seed)?;
        d.set_item("plus", c.plus)?;
        d.set_item("minus", c.minus)?;
        d.set_item("absorbed", c.absorbed)?;
        Ok(d)
    }
}

/// Parses and runs a script, returning the rendered exact report.
#[pyfunction]
#[pyo3(signature = (text, format = "json"))]
fn run_script(text: &str, format: &str) -> PyResult<String> {
    PyScript::parse(text)?.report(format)
}

/// Runs the assignment search and returns the verdict as a dict.
#[pyfunction]
#[pyo3(signature = (field, grid = None))]
fn prove<'py>(py: Python<'py>, field: &str, grid: Option<u32>) -> PyResult<Bound<'py, PyDict>> {
    let field = match field {
        "real" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(value_error(format!("unknown field '{other}'"))),
    };
    let grid = grid.unwrap_or(if field == Field::Real { 2 } else { 8 });
    let v = search(&ConstraintSet::new(field, grid).map_err(value_error)?);
    let d = PyDict::new(py);
    d.set_item("field", v.field.name())?;
    d.set_item("grid", v.grid)?;
    d.set_item("feasible", v.feasible)?;
    d.set_item("search_size", v.search_size)?;
    d.set_item("candidates_per_slot", v.candidates_per_slot)?;
    d.set_item("witness_count", v.witness_count)?;
    d.set_item("violated", v.violated.clone())?;
    match &v.witness {
        Some(w) => {
            let names: Vec<&str> = w.non_real_slots.iter().map(|s| s.name()).collect();
            d.set_item("non_real_slots", names)?;
            let phases: Vec<Vec<Vec<u32>>> = w
                .eighths
                .iter()
                .map(|m| m.iter().map(|r| r.to_vec()).collect())
                .collect();
            d.set_item("witness_phases_pi_over_4", phases)?;
        }
        None => {
            d.set_item("non_real_slots", py.None())?;
            d.set_item("witness_phases_pi_over_4", py.None())?;
        }
    }
    Ok(d)
}

/// True iff the conventional complex assignment passes every check.
#[pyfunction]
fn verify_paper() -> bool {
    verify_paper_assignment().passed()
}

#[pymodule]
fn sglab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpinKet>()?;
    m.add_class::<PyScript>()?;
    m.add_function(wrap_pyfunction!(inner_product, m)?)?;
    m.add_function(wrap_pyfunction!(equal_up_to_global_phase, m)?)?;
    m.add_function(wrap_pyfunction!(eigenbasis, m)?)?;
    m.add_function(wrap_pyfunction!(basis_expand, m)?)?;
    m.add_function(wrap_pyfunction!(split, m)?)?;
    m.add_function(wrap_pyfunction!(run_script, m)?)?;
    m.add_function(wrap_pyfunction!(prove, m)?)?;
    m.add_function(wrap_pyfunction!(verify_paper, m)?)?;
    Ok(())
}
