//! Python bindings. Heavy calls release the GIL.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use detcount::counting::{count_fast, count_naive, CountQuery};
use detcount::error::Error;
use detcount::expsums::{self, KloostermanQuery};
use detcount::mainterm;
use detcount::modp::{modp_error_scan, XRule};
use detcount::quad::QuadratureSpec;
use detcount::scan;
use detcount::special;
use detcount::spectral::{self, OscWeightParams};
use detcount::weights::WeightSpec;

type ScanRows = Vec<(f64, i64, f64, f64, f64, f64)>;
type ModPRows = Vec<(u64, f64, f64, f64, f64, f64)>;
type MainTermRow = (f64, f64, f64, Option<f64>, Option<f64>);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::QuadratureNotConverged { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn weight(amplitude: f64) -> PyResult<WeightSpec> {
    let w = WeightSpec::with_amplitude(amplitude);
    w.validate().map_err(to_py)?;
    Ok(w)
}

/// (weighted_sum, solution_count) for S_V(X, r).
#[pyfunction]
#[pyo3(signature = (x, r, naive=false, amplitude=1.0))]
fn count(py: Python<'_>, x: f64, r: i64, naive: bool, amplitude: f64) -> PyResult<(f64, u64)> {
    let w = weight(amplitude)?;
    let q = CountQuery::new(x, r).map_err(to_py)?;
    let res = py.detach(|| if naive { count_naive(&w, &q) } else { count_fast(&w, &q) }).map_err(to_py)?;
    Ok((res.weighted_sum, res.solution_count))
}

/// (alpha, I_alpha, closed_form, truncated_value, tail_bound); the last two
/// are None without `truncate`.
#[pyfunction]
#[pyo3(signature = (x, r, truncate=None, amplitude=1.0))]
fn main_term(py: Python<'_>, x: f64, r: i64, truncate: Option<u64>, amplitude: f64) -> PyResult<MainTermRow> {
    let w = weight(amplitude)?;
    let q = CountQuery::new(x, r).map_err(to_py)?;
    let quad = QuadratureSpec::default();
    let b = py
        .detach(|| match truncate {
            Some(k) => mainterm::main_term_truncated(&w, &q, k, &quad),
            None => mainterm::main_term_closed(&w, &q, &quad),
        })
        .map_err(to_py)?;
    Ok((b.alpha, b.i_alpha, b.closed_form, b.truncated_value, b.tail_bound))
}

#[pyfunction]
#[pyo3(signature = (r, amplitude=1.0))]
fn k_constant(r: i64, amplitude: f64) -> PyResult<f64> {
    mainterm::k_constant(&weight(amplitude)?, r, &QuadratureSpec::default()).map_err(to_py)
}

/// Rows (X, r, S, M, E, ratio) and the fitted slope, or None.
#[pyfunction]
#[pyo3(signature = (r, xs, amplitude=1.0))]
fn error_scan(py: Python<'_>, r: i64, xs: Vec<f64>, amplitude: f64) -> PyResult<(ScanRows, Option<f64>)> {
    let w = weight(amplitude)?;
    let rep = py.detach(|| scan::error_scan(&w, r, &xs, &QuadratureSpec::default())).map_err(to_py)?;
    Ok((rep.rows.iter().map(|w| (w.x, w.r, w.s, w.m, w.e, w.ratio)).collect(), rep.fitted_slope))
}

/// Rows (p, X, S, M, E, E/X²) and the fitted slope against p, or None.
#[pyfunction]
#[pyo3(signature = (primes, xrule="2sqrt", amplitude=1.0))]
fn modp_scan(py: Python<'_>, primes: Vec<u64>, xrule: &str, amplitude: f64) -> PyResult<(ModPRows, Option<f64>)> {
    let w = weight(amplitude)?;
    let rule: XRule = xrule.parse().map_err(to_py)?;
    let rep = py.detach(|| modp_error_scan(&w, &primes, rule, 1.0, &QuadratureSpec::default())).map_err(to_py)?;
    Ok((rep.rows.iter().map(|w| (w.p, w.x, w.s, w.m, w.e, w.e_over_x2)).collect(), rep.fitted_slope))
}

#[pyfunction]
fn kloosterman(m: i64, n: i64, c: u64) -> PyResult<f64> {
    Ok(expsums::kloosterman(&KloostermanQuery::new(m, n, c).map_err(to_py)?))
}

/// |S(m, n; c)| / (τ(c) √c √gcd(m, n, c)).
#[pyfunction]
fn weil_gap(m: i64, n: i64, c: u64) -> PyResult<f64> {
    Ok(expsums::weil_gap(&KloostermanQuery::new(m, n, c).map_err(to_py)?).gap)
}

#[pyfunction]
fn ramanujan(q: u64, n: i64) -> PyResult<i64> {
    if q == 0 {
        return Err(to_py(Error::InvalidModulus(0)));
    }
    Ok(expsums::ramanujan(q, n))
}

#[pyfunction]
fn salie(m: i64, n: i64, c: u64) -> PyResult<Complex64> {
    expsums::salie(m, n, c).map_err(to_py)
}

#[pyfunction]
fn complex_gamma(z: Complex64) -> PyResult<Complex64> {
    special::complex_gamma(z).map_err(to_py)
}

#[pyfunction]
fn j_bessel(k: u32, x: f64) -> PyResult<f64> {
    special::j_bessel(k, x).map_err(to_py)
}

/// K_{2iη}(t).
#[pyfunction]
fn k_bessel_imag(eta: f64, t: f64) -> PyResult<f64> {
    special::k_bessel_imag(eta, t, &QuadratureSpec::default()).map_err(to_py)
}

/// (f_check(η), f_ddot(η)) for the weight at (m, n, r₁, l, X).
#[pyfunction]
#[pyo3(signature = (x, eta, m=1, n=1, r=1, l=1))]
fn bessel_transforms(py: Python<'_>, x: f64, eta: f64, m: i64, n: i64, r: i64, l: u64) -> PyResult<(Complex64, Complex64)> {
    let p = OscWeightParams::new(m, n, r, l, x, WeightSpec::default()).map_err(to_py)?;
    let quad = QuadratureSpec::default();
    py.detach(|| Ok((spectral::f_check(&p, eta, &quad)?, spectral::f_ddot(&p, eta, &quad)?))).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (x, y, k_max=80))]
fn bessel_identity_residuals(x: f64, y: f64, k_max: u32) -> PyResult<(f64, f64)> {
    spectral::bessel_identity_residuals(x, y, k_max, &QuadratureSpec::default()).map_err(to_py)
}

/// (signed sum, sum of absolute values) over c <= c_max, which defaults to 2X/l.
#[pyfunction]
#[pyo3(signature = (x, m=1, n=1, r=1, l=1, c_max=None))]
fn weighted_kloosterman_sum(x: f64, m: i64, n: i64, r: i64, l: u64, c_max: Option<u64>) -> PyResult<(Complex64, f64)> {
    let p = OscWeightParams::new(m, n, r, l, x, WeightSpec::default()).map_err(to_py)?;
    let c_max = c_max.unwrap_or((2.0 * x / l as f64).ceil() as u64);
    let w = spectral::weighted_kloosterman_sum(&p, c_max).map_err(to_py)?;
    Ok((w.signed, w.absolute))
}

#[pymodule]
#[pyo3(name = "detcount")]
pub fn detcount_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(count, m)?)?;
    m.add_function(wrap_pyfunction!(main_term, m)?)?;
    m.add_function(wrap_pyfunction!(k_constant, m)?)?;
    m.add_function(wrap_pyfunction!(error_scan, m)?)?;
    m.add_function(wrap_pyfunction!(modp_scan, m)?)?;
    m.add_function(wrap_pyfunction!(kloosterman, m)?)?;
    m.add_function(wrap_pyfunction!(weil_gap, m)?)?;
    m.add_function(wrap_pyfunction!(ramanujan, m)?)?;
    m.add_function(wrap_pyfunction!(salie, m)?)?;
    m.add_function(wrap_pyfunction!(complex_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(j_bessel, m)?)?;
    m.add_function(wrap_pyfunction!(k_bessel_imag, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_transforms, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_identity_residuals, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_kloosterman_sum, m)?)?;
    m.add("THETA", mainterm::THETA)?;
    Ok(())
}
