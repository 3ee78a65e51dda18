//! Composite Gauss–Legendre quadrature with global dyadic panel refinement.
//!
//! A rule is evaluated on `P` equal panels, then on `2P`, `4P`, ... until two
//! successive results differ by at most `max(abs_tol, rel_tol * L1)`, where
//! `L1` is the same rule applied to `|f|`. Panel sums are reduced in a fixed
//! order, so results do not depend on the thread count.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::{ComplexSum, NeumaierSum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Initial number of panels along each axis.
    pub panels_per_axis: usize,
    /// Gauss–Legendre order on each panel.
    pub nodes_per_panel: usize,
    pub abs_tol: f64,
    /// Tolerance relative to the integral of `|f|`.
    pub rel_tol: f64,
    /// Number of panel doublings allowed before giving up.
    pub max_refinement_depth: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            panels_per_axis: 4,
            nodes_per_panel: 16,
            abs_tol: 1e-20,
            rel_tol: 1e-10,
            max_refinement_depth: 8,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.panels_per_axis == 0 {
            return Err(Error::InvalidArgument("panels_per_axis must be positive".into()));
        }
        if self.nodes_per_panel < 4 {
            return Err(Error::InvalidArgument("nodes_per_panel must be at least 4".into()));
        }
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.max_refinement_depth == 0 {
            return Err(Error::InvalidArgument("max_refinement_depth must be positive".into()));
        }
        Ok(())
    }

    fn accepts(&self, change: f64, l1: f64) -> bool {
        change <= self.abs_tol.max(self.rel_tol * l1)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights of the composite rule on `panels` equal panels of `[a, b]`,
    /// in ascending node order.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let n = self.nodes.len();
        let mut xs = Vec::with_capacity(panels * n);
        let mut ws = Vec::with_capacity(panels * n);
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + 0.5 * h * x);
                ws.push(0.5 * h * w);
            }
        }
        (xs, ws)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule_complex<F>(f: &F, gl: &GaussLegendre, a: f64, b: f64, panels: usize) -> (Complex64, f64)
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let h = (b - a) / panels as f64;
    let partials: Vec<(ComplexSum, NeumaierSum)> = (0..panels)
        .into_par_iter()
        .map(|p| {
            let mid = a + (p as f64 + 0.5) * h;
            let mut acc = ComplexSum::new();
            let mut l1 = NeumaierSum::new();
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                let v = f(mid + 0.5 * h * x) * (0.5 * h * w);
                acc.add(v);
                l1.add(v.norm());
            }
            (acc, l1)
        })
        .collect();
    let mut acc = ComplexSum::new();
    let mut l1 = NeumaierSum::new();
    for (s, n) in &partials {
        acc.merge(s);
        l1.merge(n);
    }
    (acc.value(), l1.value())
}

/// Integrates a complex-valued `f` over `[a, b]`, starting from at least
/// `min_panels` panels.
pub fn integrate_complex<F>(f: F, a: f64, b: f64, min_panels: usize, quad: &QuadratureSpec) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    quad.validate()?;
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let gl = GaussLegendre::new(quad.nodes_per_panel);
    let mut panels = quad.panels_per_axis.max(min_panels);
    let (mut prev, _) = rule_complex(&f, &gl, a, b, panels);
    let mut last_change = f64::INFINITY;
    for _ in 0..quad.max_refinement_depth {
        panels *= 2;
        let (cur, l1) = rule_complex(&f, &gl, a, b, panels);
        last_change = (cur - prev).norm();
        if quad.accepts(last_change, l1) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNotConverged { depth: quad.max_refinement_depth, last_change })
}

/// Integrates a real-valued `f` over `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, quad: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    integrate_complex(|x| Complex64::new(f(x), 0.0), a, b, 1, quad).map(|z| z.re)
}

fn rule_3d<F>(f: &F, xs: &[f64], ws: &[f64]) -> (f64, f64)
where
    F: Fn(f64, f64, f64) -> f64 + Sync,
{
    let slabs: Vec<(NeumaierSum, NeumaierSum)> = (0..xs.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = NeumaierSum::new();
            let mut l1 = NeumaierSum::new();
            for j in 0..xs.len() {
                let wij = ws[i] * ws[j];
                for k in 0..xs.len() {
                    let v = f(xs[i], xs[j], xs[k]) * wij * ws[k];
                    acc.add(v);
                    l1.add(v.abs());
                }
            }
            (acc, l1)
        })
        .collect();
    let mut acc = NeumaierSum::new();
    let mut l1 = NeumaierSum::new();
    for (s, n) in &slabs {
        acc.merge(s);
        l1.merge(n);
    }
    (acc.value(), l1.value())
}

/// Tensor-product rule over the cube `[lo, hi]^3`.
pub fn integrate_cube<F>(f: F, lo: f64, hi: f64, quad: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64, f64, f64) -> f64 + Sync,
{
    quad.validate()?;
    let gl = GaussLegendre::new(quad.nodes_per_panel);
    let mut panels = quad.panels_per_axis;
    let (xs, ws) = gl.composite(lo, hi, panels);
    let (mut prev, _) = rule_3d(&f, &xs, &ws);
    let mut last_change = f64::INFINITY;
    for _ in 0..quad.max_refinement_depth {
        panels *= 2;
        let (xs, ws) = gl.composite(lo, hi, panels);
        let (cur, l1) = rule_3d(&f, &xs, &ws);
        last_change = (cur - prev).abs();
        if quad.accepts(last_change, l1) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNotConverged { depth: quad.max_refinement_depth, last_change })
}

/// Integrates `f` over the unit cube `[1, 2]^3`.
pub fn integrate_3d<F>(f: F, quad: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64, f64, f64) -> f64 + Sync,
{
    integrate_cube(f, 1.0, 2.0, quad)
}
