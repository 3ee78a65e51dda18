//! Error-scaling experiments: `E = S_V − M_V` over a range of `X` or of `r`,
//! with a least-squares fit of `log|E|` against `log X`.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{count_fast, CountQuery};
use crate::error::{Error, Result};
use crate::mainterm::main_term_closed;
use crate::quad::QuadratureSpec;
use crate::weights::WeightSpec;

/// Exponent of the per-row ratio `|E|/X^{1.2}`.
pub const RATIO_EXPONENT: f64 = 1.2;
/// Rows with `|E|` at or below this are left out of the fit.
pub const FIT_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub x: f64,
    pub r: i64,
    pub s: f64,
    pub m: f64,
    pub e: f64,
    pub abs_e: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// `None` when fewer than two rows clear the fit floor.
    pub fitted_slope: Option<f64>,
    pub fit_intercept: Option<f64>,
}

impl ScalingReport {
    fn from_rows(rows: Vec<ScalingRow>) -> Self {
        let fit = fit_loglog(rows.iter().map(|r| (r.x, r.e)));
        ScalingReport { fitted_slope: fit.map(|f| f.0), fit_intercept: fit.map(|f| f.1), rows }
    }

    pub fn max_abs_e(&self) -> f64 {
        self.rows.iter().map(|r| r.abs_e).fold(0.0, f64::max)
    }

    /// Median of the `ratio` column.
    pub fn median_ratio(&self) -> Option<f64> {
        median(self.rows.iter().map(|r| r.ratio).collect())
    }
}

pub(crate) fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Least-squares `(slope, intercept)` of `log|y|` against `log x` over points
/// with `|y| > FIT_FLOOR`.
pub fn fit_loglog(points: impl Iterator<Item = (f64, f64)>) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points.filter(|&(_, y)| y.abs() > FIT_FLOOR).map(|(x, y)| (x.ln(), y.abs().ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

pub fn scaling_row(spec: &WeightSpec, q: &CountQuery, quad: &QuadratureSpec) -> Result<ScalingRow> {
    let s = count_fast(spec, q)?.weighted_sum;
    let m = main_term_closed(spec, q, quad)?.closed_form;
    let e = s - m;
    Ok(ScalingRow { x: q.x, r: q.r, s, m, e, abs_e: e.abs(), ratio: e.abs() / q.x.powf(RATIO_EXPONENT) })
}

/// One row per `X` at fixed `r`. Rows are computed in parallel and kept in input order.
pub fn error_scan(spec: &WeightSpec, r: i64, xs: &[f64], quad: &QuadratureSpec) -> Result<ScalingReport> {
    if xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("X values must be strictly ascending".into()));
    }
    let queries = xs.iter().map(|&x| CountQuery::new(x, r)).collect::<Result<Vec<_>>>()?;
    let rows = queries.par_iter().map(|q| scaling_row(spec, q, quad)).collect::<Result<Vec<_>>>()?;
    Ok(ScalingReport::from_rows(rows))
}

/// One row per distinct `r` at fixed `X`, in ascending `r`.
pub fn r_scan(spec: &WeightSpec, x: f64, rs: &[i64], quad: &QuadratureSpec) -> Result<ScalingReport> {
    if rs.contains(&0) {
        return Err(Error::InvalidR("r must be nonzero".into()));
    }
    let distinct: BTreeSet<i64> = rs.iter().copied().collect();
    let queries = distinct.into_iter().map(|r| CountQuery::new(x, r)).collect::<Result<Vec<_>>>()?;
    let rows = queries.par_iter().map(|q| scaling_row(spec, q, quad)).collect::<Result<Vec<_>>>()?;
    // a fit against X is meaningless at fixed X
    Ok(ScalingReport { rows, fitted_slope: None, fit_intercept: None })
}
