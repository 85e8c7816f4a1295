use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyDict>)>(f: F) {
    pyo3::prepare_freethreaded_python();
    Python::with_gil(|py| {
        let m = pyo3::wrap_pymodule!(pydispersed::pydispersed)(py);
        let locals = PyDict::new(py);
        locals.set_item("d", m).unwrap();
        f(py, &locals);
    });
}

fn eval(py: Python<'_>, locals: &Bound<'_, PyDict>, code: &str) -> f64 {
    let code = std::ffi::CString::new(code).unwrap();
    py.eval(&code, Some(locals), None).unwrap().extract().unwrap()
}

#[test]
fn hash_and_coefficients() {
    with_module(|py, l| {
        assert_eq!(eval(py, l, "d.hash_seed(0, 'alpha')"), 0.07159092162010494);
        assert_eq!(eval(py, l, "d.hash_seed(42, 'key-17')"), 0.6999654114328461);
        let a1 = eval(py, l, "d.coeff_max_l_uniform(3, 0.5)[0]");
        let p: f64 = 0.5;
        let want = (2.0 - 2.0 * p + p * p) / (p.powi(3) * (2.0 - p) * (3.0 - 3.0 * p + p * p));
        assert!((a1 - want).abs() < 1e-12 * want);
    });
}

#[test]
fn python_estimator_moments() {
    with_module(|py, l| {
        let mean = eval(py, l, "d.moments(lambda o: d.est_max_l(o, [0.3, 0.6]), d.SamplingSpec.oblivious([0.3, 0.6]), [2.0, 5.0])[0]");
        assert!((mean - 5.0).abs() < 1e-12);
        let v = eval(py, l, "d.moments(lambda o: d.est_ht(o, [0.5, 0.5]), d.SamplingSpec.oblivious([0.5, 0.5]), [1.0, 1.0])[1]");
        // HT of max over (1,1) at p=.5: 4 w.p. 1/4, else 0
        assert!((v - 3.0).abs() < 1e-12);
    });
}

#[test]
fn errors_surface_as_value_error() {
    with_module(|py, l| {
        let code = std::ffi::CString::new("d.SamplingSpec.oblivious([2.0])").unwrap();
        let e = py.eval(&code, Some(l), None).unwrap_err();
        assert!(e.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let code = std::ffi::CString::new("d.moments(lambda o: 1/0, d.SamplingSpec.oblivious([0.5]), [1.0])").unwrap();
        let e = py.eval(&code, Some(l), None).unwrap_err();
        assert!(e.is_instance_of::<pyo3::exceptions::PyZeroDivisionError>(py));
    });
}
