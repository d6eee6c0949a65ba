//! The family `g_τ(x) = x^{−3/2+m}(ln 1/x)^{−τ}` at `Re m = 1`.
//!
//! These sources are square integrable for `½ < τ < 1`, yet the boundary
//! integral `∫_x^{1/2} y^{1/2−m} g_τ(y) dy` diverges like `(ln 1/x)^{1−τ}`, so
//! the coefficient of `x^{1/2+m}` in `G_m g_τ` has no limit at the origin.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CutoffSpec, GridFunction, RadialGrid};
use crate::kernels::{apply_green, KernelSpec};
use crate::param::rpow;
use crate::quad;

/// Tolerance on `Re m = 1`.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;
const QUAD_TOL: f64 = 1e-14;
/// Point where the closed form hands over to the polynomial extension.
const JOIN: f64 = 0.5;

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.5 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tau = {tau} is outside (1/2, 1)")))
    }
}

/// One member of the family, with the fixed `C²` extension on `[½, 1]`.
#[derive(Debug, Clone)]
pub struct TauFunction {
    tau: f64,
    m: Complex64,
    /// Quintic Hermite coefficients in `s = (x − ½)/(1 − ½)` on `[½, 1]`.
    blend: [Complex64; 6],
    samples: GridFunction,
}

/// Closed-form part `x^{−3/2+m}(ln 1/x)^{−τ}` and its first two derivatives.
fn closed_form(tau: f64, m: Complex64, x: f64) -> [Complex64; 3] {
    let l = -x.ln();
    let p = m - 1.5;
    let v = rpow(x, p) * l.powf(-tau);
    // d/dx ln v = p/x + τ/(x l)
    let r1 = (p + tau / l) / x;
    // d/dx r1 = −p/x² + τ(1 − l)/(x² l²)·(−1)… written out:
    let r1p = -p / (x * x) - tau * (l - 1.0) / (x * x * l * l);
    [v, v * r1, v * (r1 * r1 + r1p)]
}

/// Quintic with given value, slope, curvature at `s = 0` and all zero at `s = 1`.
fn hermite_to_zero(v: Complex64, d1: Complex64, d2: Complex64) -> [Complex64; 6] {
    // p(s) = a0 + a1 s + a2 s² + a3 s³ + a4 s⁴ + a5 s⁵, p(1) = p'(1) = p''(1) = 0
    let (a0, a1, a2) = (v, d1, d2 / 2.0);
    let r0 = -(a0 + a1 + a2);
    let r1 = -(a1 + 2.0 * a2);
    let r2 = -(2.0 * a2);
    // [1 1 1; 3 4 5; 6 12 20] [a3 a4 a5]ᵀ = [r0 r1 r2]ᵀ
    let a3 = 10.0 * r0 - 4.0 * r1 + 0.5 * r2;
    let a4 = -15.0 * r0 + 7.0 * r1 - r2;
    let a5 = 6.0 * r0 - 3.0 * r1 + 0.5 * r2;
    [a0, a1, a2, a3, a4, a5]
}

impl TauFunction {
    pub fn new(tau: f64, m: Complex64, grid: &Arc<RadialGrid>) -> Result<Self> {
        check_tau(tau)?;
        if (m.re - 1.0).abs() > CRITICAL_TOLERANCE {
            return Err(Error::InvalidParameter(format!("Re(m) = {} is not 1", m.re)));
        }
        if grid.x_max() < 1.0 {
            return Err(Error::InvalidGrid("grid must reach x = 1".into()));
        }
        let [v, d1, d2] = closed_form(tau, m, JOIN);
        let h = 1.0 - JOIN;
        let blend = hermite_to_zero(v, d1 * h, d2 * h * h);
        let mut out = Self { tau, m, blend, samples: GridFunction::zeros(grid) };
        out.samples = GridFunction::from_fn(grid, |x| out.eval(x));
        Ok(out)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn m(&self) -> Complex64 {
        self.m
    }
    pub fn samples(&self) -> &GridFunction {
        &self.samples
    }

    /// Value at `x > 0`; zero for `x ≥ 1`.
    pub fn eval(&self, x: f64) -> Complex64 {
        if x < JOIN {
            closed_form(self.tau, self.m, x)[0]
        } else if x < 1.0 {
            let s = (x - JOIN) / (1.0 - JOIN);
            self.blend.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * s + c)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// `(∫_0^x |g_τ|²)^{1/2}` for `x ≤ ½` in closed form.
    pub fn local_norm(&self, x: f64) -> f64 {
        let l = -x.ln();
        (l.powf(1.0 - 2.0 * self.tau) / (2.0 * self.tau - 1.0)).sqrt()
    }

    /// `∫_x^{hi} y^{1/2−m} g_τ(y) dy` by adaptive quadrature of the samples' formula.
    pub fn boundary_integral(&self, x: f64, hi: f64) -> Complex64 {
        let mut breaks = vec![];
        if x < JOIN && JOIN < hi {
            breaks.push(JOIN);
        }
        quad::integrate_log_pieces(|y| rpow(y, 0.5 - self.m) * self.eval(y), x, hi, &breaks, QUAD_TOL)
    }
}

/// Builds `g_τ` on `grid`.
pub fn g_tau(tau: f64, m: Complex64, grid: &Arc<RadialGrid>) -> Result<TauFunction> {
    TauFunction::new(tau, m, grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormCheck {
    pub tau: f64,
    pub closed_form: f64,
    pub quadrature: f64,
    pub relative_gap: f64,
}

/// `∫_0^{1/2} |g_τ|² = (2τ − 1)^{−1}(ln 2)^{1−2τ}`, checked by quadrature on
/// `[x_floor, ½]` plus the exact tail below `x_floor`.
pub fn g_tau_norm_sq(tau: f64, x_floor: f64) -> Result<NormCheck> {
    check_tau(tau)?;
    if !(x_floor > 0.0 && x_floor < 0.5) {
        return Err(Error::InvalidParameter(format!("x_floor = {x_floor} not in (0, 1/2)")));
    }
    let closed_form = (2.0 * tau - 1.0).recip() * 2f64.ln().powf(1.0 - 2.0 * tau);
    // |g_τ|² = x^{−1}(ln 1/x)^{−2τ} whatever Im m is.
    let m = Complex64::new(1.0, 0.0);
    let body = quad::integrate_log(
        |x| Complex64::new(closed_form_value(tau, m, x).norm_sqr(), 0.0),
        x_floor,
        0.5,
        QUAD_TOL,
    )
    .re;
    let tail = (-x_floor.ln()).powf(1.0 - 2.0 * tau) / (2.0 * tau - 1.0);
    let quadrature = body + tail;
    Ok(NormCheck {
        tau,
        closed_form,
        quadrature,
        relative_gap: (quadrature - closed_form).abs() / closed_form,
    })
}

fn closed_form_value(tau: f64, m: Complex64, x: f64) -> Complex64 {
    closed_form(tau, m, x)[0]
}

/// `I(x) = (1 − τ)^{−1}[(ln 1/x)^{1−τ} − (ln 2)^{1−τ}]`.
pub fn boundary_integral_closed_form(tau: f64, x: f64) -> f64 {
    ((-x.ln()).powf(1.0 - tau) - 2f64.ln().powf(1.0 - tau)) / (1.0 - tau)
}

/// `(2(1 − τ))^{−1}(ln 1/x)^{1−τ}`.
pub fn lower_bound_curve(tau: f64, x: f64) -> f64 {
    (-x.ln()).powf(1.0 - tau) / (2.0 * (1.0 - tau))
}

/// Largest `x` below which `I(x)` dominates the lower-bound curve:
/// `x* = 2^{−2^{1/(1−τ)}}`.
pub fn lower_bound_threshold(tau: f64) -> f64 {
    2f64.powf(-(2f64.powf(1.0 / (1.0 - tau))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceDiagnostic {
    pub tau: f64,
    pub m: Complex64,
    pub x_samples: Vec<f64>,
    pub integral_values: Vec<Complex64>,
    pub closed_form: Vec<f64>,
    pub lower_bound_curve: Vec<f64>,
    /// `x` below which the lower bound holds (closed form).
    pub threshold: f64,
    /// Largest relative gap between quadrature and closed form.
    pub max_relative_gap: f64,
    /// Limit-identity residuals when computed, one per sample.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_residual: Option<Vec<f64>>,
}

/// `I(x)` by quadrature against its closed form at each `x` in `(0, ½]`.
pub fn divergence_profile(t: &TauFunction, x_list: &[f64]) -> Result<DivergenceDiagnostic> {
    if let Some(bad) = x_list.iter().find(|x| !(**x > 0.0 && **x <= JOIN)) {
        return Err(Error::InvalidParameter(format!("x = {bad} outside (0, 1/2]")));
    }
    let integral_values: Vec<Complex64> = x_list.iter().map(|&x| t.boundary_integral(x, JOIN)).collect();
    let closed: Vec<f64> = x_list.iter().map(|&x| boundary_integral_closed_form(t.tau, x)).collect();
    let max_relative_gap = integral_values
        .iter()
        .zip(&closed)
        .map(|(q, c)| {
            let d = (q - c).norm();
            if *c == 0.0 {
                d
            } else {
                d / c.abs()
            }
        })
        .fold(0.0, f64::max);
    Ok(DivergenceDiagnostic {
        tau: t.tau,
        m: t.m,
        x_samples: x_list.to_vec(),
        integral_values,
        closed_form: closed,
        lower_bound_curve: x_list.iter().map(|&x| lower_bound_curve(t.tau, x)).collect(),
        threshold: lower_bound_threshold(t.tau),
        max_relative_gap,
        limit_residual: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitResidual {
    /// Nodes actually used (nearest grid node to each requested `x`).
    pub x: Vec<f64>,
    /// `|2m x^{−1/2−m} f(x) − ∫_x^a y^{1/2−m} g(y) dy|` with `f = G_m^a g`.
    pub residual: Vec<f64>,
    /// `‖g‖_{L²[0,x]}`.
    pub bound: Vec<f64>,
}

/// Residual of the limit identity for `f = G_m^a g_τ` at the requested points.
pub fn ellr1_residual(t: &TauFunction, a: f64, x_list: &[f64]) -> Result<LimitResidual> {
    let grid = t.samples.grid();
    let spec = KernelSpec::compressed_two_sided(crate::param::CouplingParameter::from_m(t.m)?, a)?;
    let f = apply_green(&spec, &t.samples)?;
    let mut out = LimitResidual { x: vec![], residual: vec![], bound: vec![] };
    for &x in x_list {
        if !(x >= grid.x_min() && x <= JOIN.min(a)) {
            return Err(Error::OutOfRange { lo: x, hi: x, min: grid.x_min(), max: JOIN.min(a) });
        }
        let j = nearest_node(grid, x);
        let xj = grid.x()[j];
        let lhs = 2.0 * t.m * rpow(xj, -0.5 - t.m) * f.values()[j];
        let r = (lhs - t.boundary_integral(xj, a)).norm();
        out.x.push(xj);
        out.residual.push(r);
        out.bound.push(t.local_norm(xj));
    }
    Ok(out)
}

fn nearest_node(grid: &RadialGrid, x: f64) -> usize {
    let s = ((x.ln() - grid.t_min()) / grid.dt()).round();
    (s.max(0.0) as usize).min(grid.n() - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    pub taus: Vec<f64>,
    pub singular_values: Vec<f64>,
    pub smallest_singular_value: f64,
    pub condition_number: f64,
}

/// Gram matrix of `{g_τ}` in `L²[x_floor, 1]` on the grid.
pub fn independence_gram(taus: &[f64], m: Complex64, grid: &Arc<RadialGrid>) -> Result<GramReport> {
    if taus.is_empty() {
        return Err(Error::InvalidParameter("empty tau set".into()));
    }
    for (i, a) in taus.iter().enumerate() {
        check_tau(*a)?;
        if taus[..i].contains(a) {
            return Err(Error::DuplicateTau(*a));
        }
    }
    let fs: Vec<TauFunction> = taus.iter().map(|&t| TauFunction::new(t, m, grid)).collect::<Result<_>>()?;
    let k = fs.len();
    let gram = DMatrix::from_fn(k, k, |i, j| fs[i].samples.inner(&fs[j].samples).expect("same grid"));
    let sv = gram.singular_values();
    let mut singular_values: Vec<f64> = sv.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let smallest = *singular_values.last().unwrap();
    Ok(GramReport {
        taus: taus.to_vec(),
        condition_number: singular_values[0] / smallest,
        smallest_singular_value: smallest,
        singular_values,
    })
}

/// `g_τ(x)/g_σ(x) = (ln 1/x)^{σ−τ}` evaluated through the family itself.
pub fn dominance_ratio(sigma: f64, tau: f64, m: Complex64, x: f64) -> Result<f64> {
    check_tau(sigma)?;
    check_tau(tau)?;
    Ok((closed_form_value(tau, m, x) / closed_form_value(sigma, m, x)).norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowDrift {
    /// Left ends `x` of the windows `[x, 2x]`.
    pub x: Vec<f64>,
    /// Extracted coefficient of `x^{1/2+m}` on each window.
    pub c_plus: Vec<Complex64>,
    /// Pearson correlation of `|c₊|` with `(ln 1/x)^{1−τ}`.
    pub correlation: f64,
    /// Least-squares slope of `|c₊|` against the model.
    pub slope: f64,
    /// `(max |c₊| − min |c₊|) / mean |c₊|`.
    pub relative_spread: f64,
    /// Correlation ≥ 0.99 and the spread is not negligible.
    pub diverges: bool,
    /// Spread below 1e−3.
    pub converges: bool,
}

/// Fits `f ≈ c₊ x^{1/2+m}` on windows `[x, 2x]` and tests whether `c₊`
/// settles or follows the divergent model `(ln 1/x)^{1−τ}`.
pub fn window_drift(f: &GridFunction, m: Complex64, tau: f64, x_list: &[f64]) -> Result<WindowDrift> {
    let grid = f.grid();
    let x = grid.x();
    let mut c_plus = Vec::with_capacity(x_list.len());
    for &x0 in x_list {
        if x0 < grid.x_min() || 2.0 * x0 > grid.x_max() {
            return Err(Error::OutOfRange { lo: x0, hi: 2.0 * x0, min: grid.x_min(), max: grid.x_max() });
        }
        let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
        for j in 0..grid.n() {
            if x[j] >= x0 && x[j] <= 2.0 * x0 {
                let b = rpow(x[j], 0.5 + m);
                let w = x[j];
                num += b.conj() * f.values()[j] * w;
                den += b.norm_sqr() * w;
            }
        }
        if den == 0.0 {
            return Err(Error::InvalidGrid(format!("no nodes in [{x0}, {}]", 2.0 * x0)));
        }
        c_plus.push(num / den);
    }
    let mags: Vec<f64> = c_plus.iter().map(|c| c.norm()).collect();
    let model: Vec<f64> = x_list.iter().map(|x| (-x.ln()).powf(1.0 - tau)).collect();
    let (correlation, slope) = correlation_and_slope(&model, &mags);
    let mean = mags.iter().sum::<f64>() / mags.len() as f64;
    let (lo, hi) = mags.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let relative_spread = if mean == 0.0 { 0.0 } else { (hi - lo) / mean };
    Ok(WindowDrift {
        x: x_list.to_vec(),
        c_plus,
        correlation,
        slope,
        relative_spread,
        diverges: correlation >= 0.99 && relative_spread > 1e-2,
        converges: relative_spread < 1e-3,
    })
}

fn correlation_and_slope(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    let corr = if saa == 0.0 || sbb == 0.0 { 0.0 } else { sab / (saa * sbb).sqrt() };
    let slope = if saa == 0.0 { 0.0 } else { sab / saa };
    (corr, slope)
}

/// `ξ · G_m^1 g_τ`, the function whose boundary coefficient has no limit.
pub fn pathological_function(t: &TauFunction, cutoff: &CutoffSpec) -> Result<GridFunction> {
    let spec = KernelSpec::compressed_two_sided(crate::param::CouplingParameter::from_m(t.m)?, 1.0)?;
    let f = apply_green(&spec, &t.samples)?;
    Ok(f.map(|x, v| v * cutoff.eval(x)))
}
