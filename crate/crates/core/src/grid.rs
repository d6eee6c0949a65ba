//! Log-uniform radial grids, sampled functions, and the calculus on them.
//!
//! Every operator in this crate is homogeneous, so the natural lattice is
//! uniform in `t = ln x`. Quadrature is the end-corrected trapezoid rule in
//! `t` transported to `x` by `dx = x dt`; derivatives are sixth-order
//! finite differences in `t` mapped back with the chain rule.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::CouplingParameter;
use crate::stencil::{gregory_weights, DiffStencils, GREGORY_TERMS, STENCIL_WIDTH};

/// Smallest admissible number of nodes.
pub const MIN_NODES: usize = 16;

/// Grid parameters, recorded alongside every grid-dependent result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridProvenance {
    pub n: usize,
    pub t_min: f64,
    pub t_max: f64,
}

/// Nodes `x_j = exp(t_j)` with `t_j` uniform on `[t_min, t_max]`.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    t_min: f64,
    t_max: f64,
    dt: f64,
    t: Vec<f64>,
    x: Vec<f64>,
    /// Unit-spacing rule in `t` (trapezoid plus end corrections).
    t_weights: Vec<f64>,
    /// Weights in `x`: `t_weights[j] * dt * x_j`.
    weights: Vec<f64>,
    stencils: DiffStencils,
}

/// Builds the canonical log-uniform grid.
pub fn make_log_grid(t_min: f64, t_max: f64, n: usize) -> Result<Arc<RadialGrid>> {
    RadialGrid::new(t_min, t_max, n).map(Arc::new)
}

impl RadialGrid {
    pub fn new(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if !t_min.is_finite() || !t_max.is_finite() {
            return Err(Error::InvalidGrid("non-finite bounds".into()));
        }
        if t_min >= t_max {
            return Err(Error::InvalidGrid(format!("empty interval [{t_min}, {t_max}]")));
        }
        if n < MIN_NODES {
            return Err(Error::InvalidGrid(format!("n = {n} < {MIN_NODES}")));
        }
        let dt = (t_max - t_min) / (n - 1) as f64;
        let t: Vec<f64> = (0..n)
            .map(|j| if j == n - 1 { t_max } else { t_min + j as f64 * dt })
            .collect();
        let x: Vec<f64> = t.iter().map(|s| s.exp()).collect();
        let t_weights = gregory_weights(n);
        let weights = t_weights.iter().zip(&x).map(|(w, x)| w * dt * x).collect();
        Ok(Self {
            t_min,
            t_max,
            dt,
            t,
            x,
            t_weights,
            weights,
            stencils: DiffStencils::new(n),
        })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }
    pub fn t_min(&self) -> f64 {
        self.t_min
    }
    pub fn t_max(&self) -> f64 {
        self.t_max
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn t(&self) -> &[f64] {
        &self.t
    }
    pub fn x(&self) -> &[f64] {
        &self.x
    }
    pub fn x_min(&self) -> f64 {
        self.x[0]
    }
    pub fn x_max(&self) -> f64 {
        self.x[self.n() - 1]
    }
    /// Quadrature weights in `x`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    /// Quadrature weights in `t` (already multiplied by `dt`).
    pub fn t_weight(&self, j: usize) -> f64 {
        self.t_weights[j] * self.dt
    }

    pub fn provenance(&self) -> GridProvenance {
        GridProvenance { n: self.n(), t_min: self.t_min, t_max: self.t_max }
    }

    pub fn same_as(&self, other: &RadialGrid) -> bool {
        self.provenance() == other.provenance()
    }

    /// Index of the last node `≤ x` (clamped to the grid).
    pub fn index_below(&self, x: f64) -> usize {
        let s = ((x.ln() - self.t_min) / self.dt).floor();
        if s < 0.0 {
            0
        } else {
            (s as usize).min(self.n() - 1)
        }
    }

    /// Sum of the `x`-weights, i.e. the rule applied to the constant one.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn check_range(&self, lo: f64, hi: f64) -> Result<()> {
        let slack = 1e-12;
        if !(lo <= hi) || lo < self.x_min() * (1.0 - slack) || hi > self.x_max() * (1.0 + slack) {
            return Err(Error::OutOfRange { lo, hi, min: self.x_min(), max: self.x_max() });
        }
        Ok(())
    }
}

/// Smooth cutoff equal to one near zero and vanishing beyond `support_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub plateau_end: f64,
    pub support_end: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self { plateau_end: 0.5, support_end: 1.0 }
    }
}

impl CutoffSpec {
    pub fn new(plateau_end: f64, support_end: f64) -> Result<Self> {
        if !(plateau_end > 0.0 && support_end > plateau_end && support_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cutoff needs 0 < plateau_end < support_end, got {plateau_end}, {support_end}"
            )));
        }
        Ok(Self { plateau_end, support_end })
    }

    fn u(&self, x: f64) -> f64 {
        (x - self.plateau_end) / (self.support_end - self.plateau_end)
    }

    /// Value and first two derivatives of the quintic blend `1 − (10u³ − 15u⁴ + 6u⁵)`.
    pub fn eval_with_derivatives(&self, x: f64) -> [f64; 3] {
        if x <= self.plateau_end {
            return [1.0, 0.0, 0.0];
        }
        if x >= self.support_end {
            return [0.0, 0.0, 0.0];
        }
        let u = self.u(x);
        let s = 1.0 / (self.support_end - self.plateau_end);
        let v = 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
        let d1 = -30.0 * u * u * (1.0 - u) * (1.0 - u) * s;
        let d2 = -60.0 * u * (1.0 - u) * (1.0 - 2.0 * u) * s * s;
        [v, d1, d2]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_derivatives(x)[0]
    }
}

/// Complex samples on a [`RadialGrid`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: &Arc<RadialGrid>, f: F) -> Self {
        let values = grid.x().iter().map(|&x| f(x)).collect();
        Self { grid: Arc::clone(grid), values }
    }

    pub fn from_real_fn<F: Fn(f64) -> f64>(grid: &Arc<RadialGrid>, f: F) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        Self { grid: Arc::clone(grid), values: vec![Complex64::new(0.0, 0.0); grid.n()] }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid.provenance(),
                other.grid.provenance()
            )))
        }
    }

    /// Pointwise map keeping the grid.
    pub fn map<F: Fn(f64, Complex64) -> Complex64>(&self, f: F) -> Self {
        let values = self.grid.x().iter().zip(&self.values).map(|(&x, &v)| f(x, v)).collect();
        Self { grid: Arc::clone(&self.grid), values }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|_, v| v * c)
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with<F: Fn(Complex64, Complex64) -> Complex64>(
        &self,
        other: &GridFunction,
        f: F,
    ) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: Arc::clone(&self.grid), values })
    }

    /// `∫ |f|² dx` over the whole grid.
    pub fn norm_sq(&self) -> f64 {
        self.grid.weights().iter().zip(&self.values).map(|(w, v)| w * v.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// L² norm over the node range `lo..hi` with plain `x_j dt` weights.
    pub fn l2_norm_nodes(&self, lo: usize, hi: usize) -> f64 {
        let dt = self.grid.dt();
        (lo..hi)
            .map(|j| self.grid.x()[j] * dt * self.values[j].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Sesquilinear `∫ conj(f) g dx`.
    pub fn inner(&self, other: &GridFunction) -> Result<Complex64> {
        self.check_same_grid(other)?;
        Ok(self
            .grid
            .weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (a, b))| a.conj() * b * *w)
            .sum())
    }

    /// `∫ f dx` over the whole grid with the end-corrected rule.
    pub fn integral(&self) -> Complex64 {
        self.grid.weights().iter().zip(&self.values).map(|(w, v)| v * *w).sum()
    }

    /// `∫_lo^hi f dx` by a composite cubic interpolant in `t`.
    pub fn integrate(&self, lo: f64, hi: f64) -> Result<Complex64> {
        let g = &self.grid;
        g.check_range(lo, hi)?;
        let n = g.n();
        let (ta, tb) = (
            lo.max(g.x_min()).ln().max(g.t_min()),
            hi.min(g.x_max()).ln().min(g.t_max()),
        );
        if tb <= ta {
            return Ok(Complex64::new(0.0, 0.0));
        }
        // Integrand in t: f(e^t) e^t.
        let h = |j: usize| self.values[j] * g.x()[j];
        let cell = |s: f64| (((s - g.t_min()) / g.dt()).floor().max(0.0) as usize).min(n - 2);
        let (ja, jb) = (cell(ta), cell(tb));
        let gauss = [0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt()];
        let mut total = Complex64::new(0.0, 0.0);
        for j in ja..=jb {
            let c0 = g.t()[j];
            let s0 = ((ta.max(c0) - c0) / g.dt()).clamp(0.0, 1.0);
            let s1 = ((tb.min(g.t()[j + 1]) - c0) / g.dt()).clamp(0.0, 1.0);
            if s1 <= s0 {
                continue;
            }
            // Four-point Lagrange interpolant on nodes start..start+4.
            let start = j.saturating_sub(1).min(n - 4);
            let off = j as f64 - start as f64;
            for &gp in &gauss {
                let s = off + s0 + gp * (s1 - s0);
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..4 {
                    let mut l = 1.0;
                    for i in 0..4 {
                        if i != k {
                            l *= (s - i as f64) / (k as f64 - i as f64);
                        }
                    }
                    acc += h(start + k) * l;
                }
                total += acc * (0.5 * (s1 - s0) * g.dt());
            }
        }
        Ok(total)
    }

    /// First or second derivative in `x`.
    pub fn differentiate(&self, order: u8) -> Result<Self> {
        let g = &self.grid;
        let n = g.n();
        if n < STENCIL_WIDTH {
            return Err(Error::InvalidGrid("grid shorter than the stencil".into()));
        }
        let (dt, dt2) = (g.dt(), g.dt() * g.dt());
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let (start, d1, d2) = g.stencils.row(j);
            let slice = &self.values[start..start + STENCIL_WIDTH];
            let ft: Complex64 = d1.iter().zip(slice).map(|(w, v)| v * *w).sum::<Complex64>() / dt;
            let x = g.x()[j];
            let v = match order {
                1 => ft / x,
                2 => {
                    let ftt: Complex64 =
                        d2.iter().zip(slice).map(|(w, v)| v * *w).sum::<Complex64>() / dt2;
                    (ftt - ft) / (x * x)
                }
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "derivative order {order} not supported"
                    )))
                }
            };
            out.push(v);
        }
        Ok(Self { grid: Arc::clone(g), values: out })
    }

    /// Quadratic extrapolation to `x = 0` through the three smallest nodes.
    pub fn limit_at_zero(&self) -> Complex64 {
        let x = self.grid.x();
        richardson_at_zero([x[0], x[1], x[2]], [self.values[0], self.values[1], self.values[2]])
    }

    /// Writes `x,re,im` rows with a header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "re", "im"])?;
        for (x, v) in self.grid.x().iter().zip(&self.values) {
            wr.write_record([format!("{x:e}"), format!("{:e}", v.re), format!("{:e}", v.im)])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads `x,re,im` rows (header required) and reconstructs the log grid
    /// from the first and last abscissae, checking the rest match it.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let headers = rd.headers()?.clone();
        let names: Vec<&str> = headers.iter().map(str::trim).collect();
        if names.len() < 3 || names[0] != "x" {
            return Err(Error::Parse(format!("expected header x,re,im; got {names:?}")));
        }
        let mut xs = Vec::new();
        let mut vals = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Parse("short row".into()))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(e.to_string()))
            };
            xs.push(num(0)?);
            vals.push(Complex64::new(num(1)?, num(2)?));
        }
        if xs.len() < MIN_NODES || xs.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::InvalidGrid("need at least 16 positive abscissae".into()));
        }
        let grid = make_log_grid(xs[0].ln(), xs[xs.len() - 1].ln(), xs.len())?;
        for (a, b) in xs.iter().zip(grid.x()) {
            if ((a - b) / b).abs() > 1e-9 {
                return Err(Error::InvalidGrid(format!("abscissa {a} is not log-uniform")));
            }
        }
        Self::new(grid, vals)
    }
}

/// Value at `0` of the quadratic through three points.
pub fn richardson_at_zero(x: [f64; 3], f: [Complex64; 3]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..3 {
        let mut l = 1.0;
        for i in 0..3 {
            if i != k {
                l *= (0.0 - x[i]) / (x[k] - x[i]);
            }
        }
        acc += f[k] * l;
    }
    acc
}

/// `−f'' + (α − ¼) x^{−2} f` at the nodes.
pub fn apply_bessel(p: &CouplingParameter, f: &GridFunction) -> GridFunction {
    let d2 = f.differentiate(2).expect("order 2 is supported");
    let c = p.alpha() - 0.25;
    let x = f.grid().x();
    let values = (0..f.len())
        .map(|j| -d2.values[j] + c * f.values[j] / (x[j] * x[j]))
        .collect();
    GridFunction { grid: Arc::clone(f.grid()), values }
}

/// Samples `(Uf)(t) = e^{t/2} f(e^t)` on the uniform `t` lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFunction {
    pub t_min: f64,
    pub t_max: f64,
    pub values: Vec<Complex64>,
}

impl LineFunction {
    /// `∫ |u|² dt` with the same end-corrected rule as the grid.
    pub fn norm_sq(&self) -> f64 {
        let n = self.values.len();
        let dt = (self.t_max - self.t_min) / (n - 1) as f64;
        gregory_weights(n)
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * dt * v.norm_sqr())
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

pub fn dilation_transform(f: &GridFunction) -> LineFunction {
    let g = f.grid();
    LineFunction {
        t_min: g.t_min(),
        t_max: g.t_max(),
        values: g.x().iter().zip(f.values()).map(|(x, v)| v * x.sqrt()).collect(),
    }
}

/// Inverse of [`dilation_transform`] onto a grid with the same lattice.
pub fn inverse_dilation(u: &LineFunction, grid: &Arc<RadialGrid>) -> Result<GridFunction> {
    let p = grid.provenance();
    if p.n != u.values.len() || p.t_min != u.t_min || p.t_max != u.t_max {
        return Err(Error::GridMismatch("line samples do not match the grid lattice".into()));
    }
    let values = grid.x().iter().zip(&u.values).map(|(x, v)| v / x.sqrt()).collect();
    GridFunction::new(Arc::clone(grid), values)
}

// Keeps the end-correction width visible to callers choosing interior windows.
pub const END_CORRECTION_WIDTH: usize = GREGORY_TERMS;

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn grid_construction() {
        let g = make_log_grid(-1.0, 1.0, 16).unwrap();
        assert_eq!(g.n(), 16);
        assert!((g.x_min() - (-1f64).exp()).abs() < 1e-15);
        assert!((g.x_max() - 1f64.exp()).abs() < 1e-15);
        assert!(g.x().windows(2).all(|w| w[1] > w[0]));
        assert!(make_log_grid(0.0, 0.0, 32).is_err());
        assert!(make_log_grid(-1.0, 1.0, 15).is_err());
        assert!(make_log_grid(f64::NEG_INFINITY, 1.0, 32).is_err());
        let g = make_log_grid(-12.0, 12.0, 1024).unwrap();
        let t: f64 = 12.0 * (2.0 * 512.0 / 1023.0 - 1.0);
        assert!((g.x()[512] - t.exp()).abs() < 1e-13 * t.exp());
    }

    #[test]
    fn constant_integral_on_default_grid() {
        let g = make_log_grid(-12.0, 12.0, 1024).unwrap();
        let exact = g.x_max() - g.x_min();
        assert!((g.measure() - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn integrate_examples() {
        let g = make_log_grid(-12.0, 12.0, 1024).unwrap();
        let one = GridFunction::from_real_fn(&g, |_| 1.0);
        assert!((one.integrate(1.0, 2.0).unwrap() - 1.0).norm() < 1e-7);
        let inv = GridFunction::from_real_fn(&g, |x| 1.0 / x);
        let v = inv.integrate((-1f64).exp(), 1f64.exp()).unwrap();
        assert!((v - 2.0).norm() < 1e-12, "{v}");
        let e = GridFunction::from_real_fn(&g, |x| (-x).exp());
        let v = e.integrate(0.01, 20.0).unwrap();
        let exact = (-0.01f64).exp() - (-20f64).exp();
        assert!((v.re - exact).abs() < 1e-7 * exact);
        assert!(e.integrate(1e-9, 20.0).is_err());
        assert!(e.integrate(2.0, 1.0).is_err());
    }

    #[test]
    fn integrate_converges_at_fourth_order() {
        let err = |n| {
            let g = make_log_grid(-12.0, 12.0, n).unwrap();
            let e = GridFunction::from_real_fn(&g, |x| (-x).exp());
            let exact = (-0.01f64).exp() - (-20f64).exp();
            (e.integrate(0.01, 20.0).unwrap().re - exact).abs()
        };
        let (e1, e2) = (err(256), err(512));
        assert!(e1 / e2 > 8.0, "{e1} {e2}");
    }

    #[test]
    fn derivatives() {
        let g = make_log_grid(-12.0, 12.0, 1024).unwrap();
        let sq = GridFunction::from_real_fn(&g, |x| x * x);
        let d = sq.differentiate(1).unwrap();
        for j in 3..g.n() - 3 {
            let x = g.x()[j];
            assert!((d.values()[j] - 2.0 * x).norm() < 1e-8 * x.max(1.0));
        }
        let sqrt = GridFunction::from_real_fn(&g, |x| x.sqrt());
        let d2 = sqrt.differentiate(2).unwrap();
        for j in 3..g.n() - 3 {
            let x = g.x()[j];
            let exact = -0.25 * x.powf(-1.5);
            assert!((d2.values()[j].re - exact).abs() < 1e-8 * exact.abs());
        }
        let k = GridFunction::from_real_fn(&g, |_| 3.0);
        let dk = k.differentiate(1).unwrap();
        assert!(dk.values().iter().zip(g.x()).all(|(v, x)| v.norm() * x < 1e-10));
        assert!(k.differentiate(3).is_err());
    }

    #[test]
    fn bessel_expression_examples() {
        let g = make_log_grid(-8.0, 4.0, 1024).unwrap();
        let m = Complex64::new(0.3, 0.4);
        let p = CouplingParameter::from_m(m).unwrap();
        let f = GridFunction::from_fn(&g, |x| crate::param::rpow(x, m + 0.5));
        let r = apply_bessel(&p, &f);
        for j in 3..g.n() - 3 {
            let scale = f.values()[j].norm() / (g.x()[j] * g.x()[j]);
            assert!(r.values()[j].norm() < 1e-8 * scale);
        }
        let quarter = CouplingParameter::from_real_m(0.5).unwrap();
        let sq = GridFunction::from_real_fn(&g, |x| x * x);
        let r = apply_bessel(&quarter, &sq);
        assert!(r.values()[3..g.n() - 3].iter().all(|v| (v + 2.0).norm() < 1e-8));
        let f = GridFunction::from_real_fn(&g, |x| x.powf(1.5));
        let r = apply_bessel(&p, &f);
        for j in 3..g.n() - 3 {
            let exact = (p.alpha() - 1.0) * g.x()[j].powf(-0.5);
            assert!((r.values()[j] - exact).norm() < 1e-8 * exact.norm());
        }
    }

    #[test]
    fn dilation_examples() {
        let g = make_log_grid(-12.0, 6.0, 1024).unwrap();
        let f = GridFunction::from_real_fn(&g, |x| x.sqrt() * (-x).exp());
        let u = dilation_transform(&f);
        for (t, v) in g.t().iter().zip(&u.values) {
            let exact = t.exp() * (-t.exp()).exp();
            assert!((v.re - exact).abs() < 1e-14 * exact.max(1e-300) + 1e-300);
        }
        let back = inverse_dilation(&u, &g).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).norm() <= 1e-12 * b.norm());
        }
        let e = GridFunction::from_real_fn(&g, |x| (-x).exp());
        let ue = dilation_transform(&e);
        assert!((ue.l2_norm() - e.l2_norm()).abs() / e.l2_norm() < 1e-8);
        // missing mass below x_min is about x_min
        assert!((e.norm_sq() - 0.5).abs() < 2.0 * g.x_min());
    }

    #[test]
    fn cutoff_is_c2() {
        let xi = CutoffSpec::default();
        assert_eq!(xi.eval(0.3), 1.0);
        assert_eq!(xi.eval(1.2), 0.0);
        for &x in &[0.5 + 1e-9, 1.0 - 1e-9] {
            let [_, d1, d2] = xi.eval_with_derivatives(x);
            assert!(d1.abs() < 1e-6 && d2.abs() < 1e-6);
        }
        let h = 1e-5;
        for &x in &[0.6, 0.75, 0.9] {
            let [_, d1, d2] = xi.eval_with_derivatives(x);
            let fd1 = (xi.eval(x + h) - xi.eval(x - h)) / (2.0 * h);
            let fd2 = (xi.eval(x + h) - 2.0 * xi.eval(x) + xi.eval(x - h)) / (h * h);
            assert!((d1 - fd1).abs() < 1e-7 && (d2 - fd2).abs() < 1e-3);
        }
        assert!(CutoffSpec::new(1.0, 0.5).is_err());
    }

    #[test]
    fn zero_limit_extrapolation() {
        let g = make_log_grid(-12.0, 2.0, 512).unwrap();
        let f = GridFunction::from_real_fn(&g, |x| (-x).exp());
        assert!((f.limit_at_zero() - 1.0).norm() < 1e-12);
        let x2 = GridFunction::from_real_fn(&g, |x| x * x);
        assert!(x2.limit_at_zero().norm() < 1e-20);
    }

    #[test]
    fn csv_round_trip() {
        let g = make_log_grid(-3.0, 2.0, 64).unwrap();
        let f = GridFunction::from_fn(&g, |x| Complex64::new(x.sin(), x.cos()));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"x,re,im\n"));
        let back = GridFunction::read_csv(buf.as_slice()).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!(GridFunction::read_csv("1,2,3\n".as_bytes()).is_err());
    }

    #[test]
    fn inner_products() {
        let g = make_log_grid(-12.0, 4.0, 512).unwrap();
        let f = GridFunction::from_fn(&g, |x| Complex64::new(0.0, (-x).exp()));
        assert!((f.inner(&f).unwrap() - c(0.5)).norm() < 2.0 * g.x_min());
        let other = make_log_grid(-11.0, 4.0, 512).unwrap();
        assert!(f.inner(&GridFunction::zeros(&other)).is_err());
    }
}
