//! Python bindings: sampling, per-key estimators, variances, aggregates and
//! the finite-domain solver. Vectors and outcomes cross the boundary as
//! plain lists (`None` marks an unsampled entry).

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dispersed::aggregates::{self, AggregateKind, AggregateReport, Selection};
use dispersed::oblivious::{self, OrKind, UVariant, VarEstimator};
use dispersed::sampling::{self, InstanceTable, KeyedSample};
use dispersed::solver::{ProblemFile, TableStatus};
use dispersed::{oracle, weighted, DataVector, Error, FunctionTag, RankFamily};

fn err(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::QuadratureBudget { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for dispersed::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().py()
}

fn or_kind(s: &str) -> PyResult<OrKind> {
    match s.to_ascii_lowercase().as_str() {
        "ht" => Ok(OrKind::Ht),
        "l" => Ok(OrKind::L),
        "u" => Ok(OrKind::U),
        _ => Err(PyValueError::new_err(format!("unknown OR estimator `{s}` (ht, l or u)"))),
    }
}

fn u_variant(s: &str) -> PyResult<UVariant> {
    match s {
        "symmetric" => Ok(UVariant::Symmetric),
        "asymmetric" => Ok(UVariant::Asymmetric),
        _ => Err(PyValueError::new_err(format!("unknown max^(U) variant `{s}`"))),
    }
}

fn vector(v: Vec<f64>) -> PyResult<DataVector> {
    DataVector::new(v).py()
}

/// Sampling scheme for one key across r instances.
#[pyclass(frozen)]
#[derive(Clone)]
struct SamplingSpec {
    inner: dispersed::SamplingSpec,
}

#[pymethods]
impl SamplingSpec {
    #[staticmethod]
    fn oblivious(p: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: dispersed::SamplingSpec::oblivious(p).py()? })
    }

    #[staticmethod]
    #[pyo3(signature = (tau_star, seeds_visible = true))]
    fn pps(tau_star: Vec<f64>, seeds_visible: bool) -> PyResult<Self> {
        Ok(Self { inner: dispersed::SamplingSpec::pps(tau_star).py()?.with_seeds_visible(seeds_visible) })
    }

    #[getter]
    fn seeds_visible(&self) -> bool {
        self.inner.seeds_visible
    }

    fn __repr__(&self) -> String {
        format!("SamplingSpec({:?}, seeds_visible={})", self.inner.scheme, self.inner.seeds_visible)
    }
}

/// Sampled values (None where unsampled) and, when visible, the seeds.
#[pyclass(frozen)]
#[derive(Clone)]
struct Outcome {
    inner: dispersed::Outcome,
}

#[pymethods]
impl Outcome {
    #[new]
    #[pyo3(signature = (values, seeds = None))]
    fn new(values: Vec<Option<f64>>, seeds: Option<Vec<f64>>) -> PyResult<Self> {
        let seeds = seeds.map(dispersed::SeedVector::new).transpose().py()?;
        Ok(Self { inner: dispersed::Outcome::new(values, seeds).py()? })
    }

    #[getter]
    fn values(&self) -> Vec<Option<f64>> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn seeds(&self) -> Option<Vec<f64>> {
        self.inner.seeds().map(|s| s.values().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Outcome(values={:?}, seeds={:?})", self.values(), self.seeds())
    }
}

#[pyfunction]
fn hash_seed(salt: u64, key: &str) -> f64 {
    dispersed::hash_seed(salt, key.as_bytes())
}

#[pyfunction]
fn sample(v: Vec<f64>, spec: &SamplingSpec, seeds: Vec<f64>) -> PyResult<Outcome> {
    let seeds = dispersed::SeedVector::new(seeds).py()?;
    Ok(Outcome { inner: sampling::sample(&vector(v)?, &spec.inner, &seeds).py()? })
}

#[pyfunction]
#[pyo3(signature = (o, p, function = "max"))]
fn est_ht(o: &Outcome, p: Vec<f64>, function: &str) -> PyResult<f64> {
    oblivious::est_ht(&o.inner, &p, parse::<FunctionTag>(function)?).py()
}

#[pyfunction]
fn est_max_l(o: &Outcome, p: Vec<f64>) -> PyResult<f64> {
    oblivious::est_max_l(&o.inner, &p).py()
}

#[pyfunction]
#[pyo3(signature = (o, p1, p2, variant = "symmetric"))]
fn est_max_u(o: &Outcome, p1: f64, p2: f64, variant: &str) -> PyResult<f64> {
    oblivious::est_max_u_r2(&o.inner, p1, p2, u_variant(variant)?).py()
}

#[pyfunction]
fn est_or(o: &Outcome, p: Vec<f64>, kind: &str) -> PyResult<f64> {
    oblivious::est_or(&o.inner, &p, or_kind(kind)?).py()
}

#[pyfunction]
fn coeff_max_l_uniform(r: usize, p: f64) -> PyResult<Vec<f64>> {
    Ok(oblivious::coeff_max_l_uniform(r, p).py()?.alpha)
}

#[pyfunction]
fn est_max_ht_ws(o: &Outcome, tau_star: Vec<f64>) -> PyResult<f64> {
    weighted::est_max_ht_ws(&o.inner, &tau_star).py()
}

#[pyfunction]
fn est_max_l_ws(o: &Outcome, tau_star: Vec<f64>) -> PyResult<f64> {
    weighted::est_max_l_ws_r2(&o.inner, &tau_star).py()
}

#[pyfunction]
fn est_or_ws(o: &Outcome, p: Vec<f64>, kind: &str) -> PyResult<f64> {
    weighted::est_or_ws(&o.inner, &p, or_kind(kind)?).py()
}

/// Variance of an oblivious estimator: "ht:max", "ht:or", "or_l", "or_u",
/// "max_l", "max_u", "max_u_as".
#[pyfunction]
fn variance(v: Vec<f64>, p: Vec<f64>, estimator: &str) -> PyResult<f64> {
    let est = match estimator {
        "or_l" => VarEstimator::OrL,
        "or_u" => VarEstimator::OrU,
        "max_l" => VarEstimator::MaxLR2,
        "max_u" => VarEstimator::MaxUR2(UVariant::Symmetric),
        "max_u_as" => VarEstimator::MaxUR2(UVariant::Asymmetric),
        s => match s.strip_prefix("ht:") {
            Some(f) => VarEstimator::Ht(parse(f)?),
            None => return Err(PyValueError::new_err(format!("unknown estimator `{s}`"))),
        },
    };
    Ok(oblivious::var_closed_form(&vector(v)?, &p, est).py()?.value)
}

/// Variance of the weighted max estimators for r = 2 ("ht" or "l").
#[pyfunction]
fn variance_ws(v: Vec<f64>, tau_star: Vec<f64>, estimator: &str) -> PyResult<f64> {
    let est = match estimator {
        "ht" => weighted::WsEstimator::Ht,
        "l" => weighted::WsEstimator::L,
        s => return Err(PyValueError::new_err(format!("unknown estimator `{s}`"))),
    };
    Ok(weighted::var_max_ws(&vector(v)?, &tau_star, est).py()?.value)
}

/// (mean, variance) of a Python estimator `f(Outcome) -> float`: exact
/// enumeration for discrete schemes, quadrature for weighted r = 2 data.
#[pyfunction]
fn moments(py: Python<'_>, f: PyObject, spec: &SamplingSpec, v: Vec<f64>) -> PyResult<(f64, f64)> {
    let py_err: std::cell::RefCell<Option<PyErr>> = Default::default();
    let result = oracle::moments(
        |o: &dispersed::Outcome| {
            let call = f.call1(py, (Outcome { inner: o.clone() },)).and_then(|x| x.extract::<f64>(py));
            call.map_err(|e| {
                let msg = e.to_string();
                py_err.borrow_mut().get_or_insert(e);
                Error::InvalidData(msg)
            })
        },
        &spec.inner,
        &vector(v)?,
    );
    match (result, py_err.into_inner()) {
        (Ok(m), _) => Ok((m.mean, m.variance)),
        (Err(_), Some(e)) => Err(e),
        (Err(e), None) => Err(err(e)),
    }
}

/// One instance's sample; entries map key → (value, seed).
#[pyclass(frozen)]
struct KeyedSampleRef {
    inner: KeyedSample,
}

#[pymethods]
impl KeyedSampleRef {
    #[getter]
    fn salt(&self) -> u64 {
        self.inner.salt
    }

    #[getter]
    fn entries(&self) -> BTreeMap<String, (f64, f64)> {
        self.inner.entries.iter().map(|(k, e)| (k.clone(), (e.value, e.seed))).collect()
    }

    fn seed_of(&self, key: &str) -> f64 {
        self.inner.seed_of(key)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

fn table(d: BTreeMap<String, f64>) -> PyResult<InstanceTable> {
    InstanceTable::from_pairs(d).py()
}

#[pyfunction]
fn sample_oblivious(instance: BTreeMap<String, f64>, p: f64, salt: u64) -> PyResult<KeyedSampleRef> {
    Ok(KeyedSampleRef { inner: sampling::sample_instance_oblivious(&table(instance)?, None, p, salt).py()? })
}

#[pyfunction]
fn sample_pps(instance: BTreeMap<String, f64>, tau_star: f64, salt: u64) -> PyResult<KeyedSampleRef> {
    Ok(KeyedSampleRef { inner: sampling::sample_instance_pps(&table(instance)?, tau_star, salt).py()? })
}

#[pyfunction]
#[pyo3(signature = (instance, k, salt, family = "exp"))]
fn sample_bottomk(instance: BTreeMap<String, f64>, k: usize, salt: u64, family: &str) -> PyResult<KeyedSampleRef> {
    Ok(KeyedSampleRef { inner: sampling::sample_bottomk(&table(instance)?, k, parse::<RankFamily>(family)?, salt).py()? })
}

fn report<'py>(py: Python<'py>, r: AggregateReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("estimate", r.estimate)?;
    d.set_item("predicted_variance", r.predicted_variance)?;
    d.set_item("kind", r.kind.to_string())?;
    d.set_item("selection", r.selection)?;
    d.set_item("key_counts", r.key_counts)?;
    Ok(d)
}

/// Distinct count of the union from two samples of binary instances.
#[pyfunction]
#[pyo3(signature = (s1, s2, kind = "l", selection = "all"))]
fn distinct<'py>(py: Python<'py>, s1: &KeyedSampleRef, s2: &KeyedSampleRef, kind: &str, selection: &str) -> PyResult<Bound<'py, PyDict>> {
    let r = aggregates::est_distinct_samples(&s1.inner, &s2.inner, &Selection::parse(selection).py()?, parse::<AggregateKind>(kind)?).py()?;
    report(py, r)
}

/// Σ max(v1, v2) from two PPS samples.
#[pyfunction]
#[pyo3(signature = (s1, s2, kind = "l", selection = "all"))]
fn max_dominance<'py>(py: Python<'py>, s1: &KeyedSampleRef, s2: &KeyedSampleRef, kind: &str, selection: &str) -> PyResult<Bound<'py, PyDict>> {
    let r = aggregates::est_max_dominance(&s1.inner, &s2.inner, &Selection::parse(selection).py()?, parse::<AggregateKind>(kind)?).py()?;
    report(py, r)
}

#[pyfunction]
fn predict_distinct_variance(d: f64, j: f64, p1: f64, p2: f64, kind: &str) -> PyResult<f64> {
    aggregates::predict_distinct_variance(d, j, p1, p2, parse(kind)?).py()
}

#[pyfunction]
fn required_p(n: f64, j: f64, cv: f64, kind: &str) -> PyResult<f64> {
    aggregates::required_p(n, j, cv, parse(kind)?).py()
}

/// Solve a JSON problem file's contents; returns
/// {"classes": [...], "estimates": [...], "status": str}.
#[pyfunction]
fn solve<'py>(py: Python<'py>, problem_json: &str) -> PyResult<Bound<'py, PyDict>> {
    let t = ProblemFile::parse(problem_json).and_then(|p| p.solve()).py()?;
    let d = PyDict::new(py);
    d.set_item("classes", t.classes.iter().map(|c| c.label()).collect::<Vec<_>>())?;
    d.set_item("estimates", t.estimates.clone())?;
    d.set_item(
        "status",
        match &t.status {
            TableStatus::Ok => "ok",
            TableStatus::Failure { .. } => "failure",
            TableStatus::NegativityViolated { .. } => "negativity_violated",
        },
    )?;
    Ok(d)
}

#[pymodule]
pub fn pydispersed(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<SamplingSpec>()?;
    m.add_class::<Outcome>()?;
    m.add_class::<KeyedSampleRef>()?;
    m.add_function(wrap_pyfunction!(hash_seed, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(est_ht, m)?)?;
    m.add_function(wrap_pyfunction!(est_max_l, m)?)?;
    m.add_function(wrap_pyfunction!(est_max_u, m)?)?;
    m.add_function(wrap_pyfunction!(est_or, m)?)?;
    m.add_function(wrap_pyfunction!(coeff_max_l_uniform, m)?)?;
    m.add_function(wrap_pyfunction!(est_max_ht_ws, m)?)?;
    m.add_function(wrap_pyfunction!(est_max_l_ws, m)?)?;
    m.add_function(wrap_pyfunction!(est_or_ws, m)?)?;
    m.add_function(wrap_pyfunction!(variance, m)?)?;
    m.add_function(wrap_pyfunction!(variance_ws, m)?)?;
    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(sample_oblivious, m)?)?;
    m.add_function(wrap_pyfunction!(sample_pps, m)?)?;
    m.add_function(wrap_pyfunction!(sample_bottomk, m)?)?;
    m.add_function(wrap_pyfunction!(distinct, m)?)?;
    m.add_function(wrap_pyfunction!(max_dominance, m)?)?;
    m.add_function(wrap_pyfunction!(predict_distinct_variance, m)?)?;
    m.add_function(wrap_pyfunction!(required_p, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    Ok(())
}
