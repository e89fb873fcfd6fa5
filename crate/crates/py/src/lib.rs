//! Python bindings. Rationals go in as `int`, `fractions.Fraction` or strings
//! like `"-7/2"`, and come back as `int` when integral, `Fraction` otherwise.

use divseq::divisibility::{self, DefViolation, DivisibilityReport};
use divseq::exact::{parse_rat, BigRat, Poly};
use divseq::interval::ComplexInterval;
use divseq::recurrence::{self, LinearRecurrence};
use divseq::vandermonde::{self, Certified, GvEvaluator};
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList, PyString};

create_exception!(pydivseq, DivseqError, PyValueError);
create_exception!(pydivseq, PrecisionError, PyArithmeticError);

fn to_py_err(e: divseq::Error) -> PyErr {
    match e {
        divseq::Error::PrecisionExhausted { .. } => PrecisionError::new_err(e.to_string()),
        _ => DivseqError::new_err(e.to_string()),
    }
}

fn rational(obj: &Bound<'_, PyAny>) -> PyResult<BigRat> {
    if let Ok(s) = obj.cast::<PyString>() {
        return parse_rat(&s.to_cow()?).map_err(to_py_err);
    }
    obj.extract::<BigRat>()
        .map_err(|_| DivseqError::new_err(format!("not a rational: {obj}")))
}

fn rationals(items: &Bound<'_, PyAny>) -> PyResult<Vec<BigRat>> {
    items.try_iter()?.map(|x| rational(&x?)).collect()
}

fn poly(coeffs: &Bound<'_, PyAny>) -> PyResult<Poly> {
    Ok(Poly::new(rationals(coeffs)?))
}

fn py_rat(py: Python<'_>, q: &BigRat) -> PyResult<Py<PyAny>> {
    if q.is_integer() {
        Ok(q.numer().into_pyobject(py)?.into_any().unbind())
    } else {
        Ok(q.clone().into_pyobject(py)?.into_any().unbind())
    }
}

fn py_rats(py: Python<'_>, qs: &[BigRat]) -> PyResult<Py<PyAny>> {
    let out: Vec<Py<PyAny>> = qs.iter().map(|q| py_rat(py, q)).collect::<PyResult<_>>()?;
    Ok(PyList::new(py, out)?.into_any().unbind())
}

fn py_interval<'py>(py: Python<'py>, z: &ComplexInterval) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("re", (py_rat(py, &z.re.lo)?, py_rat(py, &z.re.hi)?))?;
    d.set_item("im", (py_rat(py, &z.im.lo)?, py_rat(py, &z.im.hi)?))?;
    Ok(d)
}

/// `{"exact": q}` or `{"interval": {"re": (lo, hi), "im": (lo, hi)}}`.
fn py_certified<'py>(py: Python<'py>, c: &Certified) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    match c {
        Certified::Exact(v) => d.set_item("exact", py_rat(py, v)?)?,
        Certified::Interval(iv) => d.set_item("interval", py_interval(py, iv)?)?,
    }
    Ok(d)
}

fn precision(p: Option<&Bound<'_, PyAny>>) -> PyResult<BigRat> {
    match p {
        Some(p) => rational(p),
        None => Ok(divisibility::default_precision()),
    }
}

/// Linear recurrence with a monic characteristic polynomial.
#[pyclass(name = "Recurrence", module = "pydivseq", frozen)]
struct PyRecurrence {
    inner: LinearRecurrence,
}

#[pymethods]
impl PyRecurrence {
    #[new]
    fn new(char_poly: &Bound<'_, PyAny>, init: &Bound<'_, PyAny>) -> PyResult<Self> {
        let inner = LinearRecurrence::new(poly(char_poly)?, rationals(init)?).map_err(to_py_err)?;
        Ok(PyRecurrence { inner })
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn char_poly(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        py_rats(py, self.inner.char_poly().coeffs())
    }

    fn terms(&self, py: Python<'_>, count: usize) -> PyResult<Py<PyAny>> {
        py_rats(py, &self.inner.terms(count))
    }

    fn term(&self, py: Python<'_>, n: u64) -> PyResult<Py<PyAny>> {
        py_rat(py, &self.inner.term(n))
    }

    /// Coefficients `a_k` with `S = sum_k a_k X^(k)`.
    fn decompose(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        py_rats(py, &recurrence::decompose(&self.inner))
    }

    fn __repr__(&self) -> String {
        format!("Recurrence({}, order={})", self.inner.char_poly(), self.inner.order())
    }
}

/// Impulse determinant `D(n)` and its closed form for one polynomial.
#[pyclass(name = "Evaluator", module = "pydivseq", frozen)]
struct PyEvaluator {
    inner: GvEvaluator,
}

#[pymethods]
impl PyEvaluator {
    #[new]
    fn new(char_poly: &Bound<'_, PyAny>) -> PyResult<Self> {
        let inner = GvEvaluator::new(&poly(char_poly)?).map_err(to_py_err)?;
        Ok(PyEvaluator { inner })
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn n_exponent(&self) -> u64 {
        self.inner.exponent_structure().n_exponent
    }

    /// Impulse matrix `X^(k)_{hn}`, `h, k = 1 .. r-1`, as a list of rows.
    fn impulse_matrix(&self, py: Python<'_>, n: u64) -> PyResult<Py<PyAny>> {
        let rows = self.inner.impulse_matrix(n).entries.to_rows();
        let out: Vec<Py<PyAny>> = rows.iter().map(|r| py_rats(py, r)).collect::<PyResult<_>>()?;
        Ok(PyList::new(py, out)?.into_any().unbind())
    }

    fn det_exact(&self, py: Python<'_>, n: u64) -> PyResult<Py<PyAny>> {
        py_rat(py, &self.inner.det_exact(n))
    }

    #[pyo3(signature = (n, precision=None))]
    fn closed_form<'py>(&self, py: Python<'py>, n: u64, precision: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyDict>> {
        let p = self::precision(precision)?;
        let c = py.detach(|| self.inner.closed_form(n, &p)).map_err(to_py_err)?;
        py_certified(py, &c)
    }

    /// `{"n", "d_exact", "closed_form", "agreement"}`.
    #[pyo3(signature = (n, precision=None))]
    fn evaluate<'py>(&self, py: Python<'py>, n: u64, precision: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyDict>> {
        let p = self::precision(precision)?;
        let res = py.detach(|| self.inner.evaluate(n, &p)).map_err(to_py_err)?;
        let d = PyDict::new(py);
        d.set_item("n", res.n)?;
        d.set_item("d_exact", py_rat(py, &res.d_exact)?)?;
        d.set_item("closed_form", py_certified(py, &res.closed_form)?)?;
        d.set_item("agreement", res.agreement.as_str())?;
        Ok(d)
    }

    /// `det W(n) / det W(1)`.
    #[pyo3(signature = (n, precision=None))]
    fn w_ratio<'py>(&self, py: Python<'py>, n: u64, precision: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyDict>> {
        let p = self::precision(precision)?;
        let c = py.detach(|| self.inner.w_ratio(n, &p)).map_err(to_py_err)?;
        py_certified(py, &c)
    }
}

#[pyfunction]
fn nondegeneracy_check(char_poly: &Bound<'_, PyAny>) -> PyResult<String> {
    let f = poly(char_poly)?;
    if f.is_zero() {
        return Err(DivseqError::new_err("zero polynomial"));
    }
    Ok(recurrence::nondegeneracy_check(&f).to_string())
}

/// `table[k][n] = X^(k)_n` for `n = 0 ..= n_max`.
#[pyfunction]
fn impulse_table(py: Python<'_>, char_poly: &Bound<'_, PyAny>, n_max: usize) -> PyResult<Py<PyAny>> {
    let basis = recurrence::impulse_basis(&poly(char_poly)?).map_err(to_py_err)?;
    let out: Vec<Py<PyAny>> = basis.table(n_max).iter().map(|s| py_rats(py, s)).collect::<PyResult<_>>()?;
    Ok(PyList::new(py, out)?.into_any().unbind())
}

#[pyfunction]
fn gv_det_exact(py: Python<'_>, char_poly: &Bound<'_, PyAny>, n: u64) -> PyResult<Py<PyAny>> {
    let d = vandermonde::gv_det_exact(&poly(char_poly)?, n).map_err(to_py_err)?;
    py_rat(py, &d)
}

/// Determinant formula for the confluent block matrix on `[(node, multiplicity), ...]`.
#[pyfunction]
fn flowe_harris(py: Python<'_>, nodes: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    let nodes: Vec<(BigRat, u32)> = nodes
        .try_iter()?
        .map(|item| {
            let item = item?;
            Ok((rational(&item.get_item(0)?)?, item.get_item(1)?.extract::<u32>()?))
        })
        .collect::<PyResult<_>>()?;
    py_rat(py, &vandermonde::flowe_harris(&nodes).map_err(to_py_err)?)
}

#[pyfunction]
#[pyo3(signature = (char_poly, n, precision=None))]
fn remark_product<'py>(
    py: Python<'py>,
    char_poly: &Bound<'py, PyAny>,
    n: u64,
    precision: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyDict>> {
    let f = poly(char_poly)?;
    let p = self::precision(precision)?;
    let c = py.detach(|| divisibility::remark_product(&f, n, &p)).map_err(to_py_err)?;
    py_certified(py, &c)
}

fn report_dict<'py>(py: Python<'py>, rep: &DivisibilityReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("checked_up_to", rep.checked_up_to)?;
    d.set_item("is_divisibility_prefix", rep.is_divisibility_prefix)?;
    let violations = PyList::empty(py);
    for v in &rep.def_violations {
        let item = PyDict::new(py);
        match v {
            DefViolation::InitialTerm { index, expected, got } => {
                item.set_item("kind", "initial_term")?;
                item.set_item("index", index)?;
                item.set_item("expected", py_rat(py, expected)?)?;
                item.set_item("got", py_rat(py, got)?)?;
            }
            DefViolation::Divides { n, m } => {
                item.set_item("kind", "prefix_divisibility")?;
                item.set_item("n", n)?;
                item.set_item("m", m)?;
            }
        }
        violations.append(item)?;
    }
    d.set_item("def_violations", violations)?;
    let rows = PyList::empty(py);
    for row in &rep.theorem_results {
        let item = PyDict::new(py);
        item.set_item("n", row.n)?;
        item.set_item("s_n", py_rat(py, &row.s_n)?)?;
        item.set_item("d", py_rat(py, &row.d)?)?;
        item.set_item("divides", row.divides)?;
        item.set_item("agreement", row.agreement.as_str())?;
        rows.append(item)?;
    }
    d.set_item("theorem_results", rows)?;
    d.set_item("theorem_violations", rep.theorem_violations.clone())?;
    d.set_item("finding", rep.is_finding())?;
    Ok(d)
}

#[pyfunction]
fn check_divisibility_prefix<'py>(py: Python<'py>, rec: &PyRecurrence, n_max: u64) -> PyResult<Bound<'py, PyDict>> {
    let rep = divisibility::check_divisibility_prefix(&rec.inner, n_max).map_err(to_py_err)?;
    report_dict(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (rec, n_max, precision=None))]
fn verify_theorem<'py>(
    py: Python<'py>,
    rec: &PyRecurrence,
    n_max: u64,
    precision: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyDict>> {
    let p = self::precision(precision)?;
    let rep = py
        .detach(|| divisibility::verify_theorem_with(&rec.inner, n_max, &p))
        .map_err(to_py_err)?;
    report_dict(py, &rep)
}

#[pyfunction]
fn cramer_certificate<'py>(py: Python<'py>, rec: &PyRecurrence, n: u64) -> PyResult<Bound<'py, PyDict>> {
    let c = divisibility::cramer_certificate(&rec.inner, n).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("n", c.n)?;
    d.set_item("s_n", py_rat(py, &c.s_n)?)?;
    d.set_item("column", py_rats(py, &c.column)?)?;
    d.set_item("numerator_det", py_rat(py, &c.numerator_det)?)?;
    d.set_item("d_value", py_rat(py, &c.d_value)?)?;
    d.set_item("column_divisibility", c.column_divisibility)?;
    Ok(d)
}

#[pymodule]
fn pydivseq(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DivseqError", m.py().get_type::<DivseqError>())?;
    m.add("PrecisionError", m.py().get_type::<PrecisionError>())?;
    m.add_class::<PyRecurrence>()?;
    m.add_class::<PyEvaluator>()?;
    m.add_function(wrap_pyfunction!(nondegeneracy_check, m)?)?;
    m.add_function(wrap_pyfunction!(impulse_table, m)?)?;
    m.add_function(wrap_pyfunction!(gv_det_exact, m)?)?;
    m.add_function(wrap_pyfunction!(flowe_harris, m)?)?;
    m.add_function(wrap_pyfunction!(remark_product, m)?)?;
    m.add_function(wrap_pyfunction!(check_divisibility_prefix, m)?)?;
    m.add_function(wrap_pyfunction!(verify_theorem, m)?)?;
    m.add_function(wrap_pyfunction!(cramer_certificate, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn exception_mapping_keeps_messages() {
        let e = divseq::Error::PrecisionExhausted { bits: 64 };
        let msg = e.to_string();
        Python::initialize();
        Python::attach(|py| {
            let err = to_py_err(e);
            assert!(err.is_instance_of::<PrecisionError>(py));
            assert_eq!(err.value(py).to_string(), msg);
            assert!(to_py_err(divseq::Error::ZeroRoot).is_instance_of::<DivseqError>(py));
        });
    }

    #[test]
    fn rationals_round_trip_through_python() {
        Python::initialize();
        Python::attach(|py| {
            let q = BigRat::new(BigInt::from(-7), BigInt::from(2));
            let obj = py_rat(py, &q).unwrap();
            assert_eq!(rational(obj.bind(py)).unwrap(), q);
            let two = py_rat(py, &BigRat::from_integer(2.into())).unwrap();
            assert_eq!(two.bind(py).get_type().name().unwrap().to_string(), "int");
            let s = PyString::new(py, "3/9");
            assert_eq!(rational(s.as_any()).unwrap(), BigRat::new(1.into(), 3.into()));
        });
    }
}
