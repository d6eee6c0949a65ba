//! Norms of the `x^{−2}`-weighted operators and the critical parabola.
//!
//! Under the dilation transform both weighted operators become convolutions on
//! the line with Fourier multiplier `1/((1 + iω)² − α)`, so their norm is the
//! reciprocal distance from `α` to the parabola `{(1 + iω)² : ω ∈ ℝ}`. The
//! three estimators below compute that number independently.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{make_log_grid, GridProvenance, RadialGrid};
use crate::kernels::{discretize, DiscretizedOperator, KernelKind, KernelSpec};
use crate::param::CouplingParameter;

/// Distance at or below which `α` counts as lying on the parabola.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Largest matrix size handled by a dense singular-value decomposition.
pub const DENSE_SVD_LIMIT: usize = 2048;

/// Squared distance `|α − (1 + iω)²|²`.
fn dist_sq(alpha: Complex64, w: f64) -> f64 {
    let a = alpha.re - 1.0 + w * w;
    let b = alpha.im - 2.0 * w;
    a * a + b * b
}

/// Real roots of `ω³ + pω − q`.
fn depressed_cubic_roots(p: f64, q: f64) -> Vec<f64> {
    let disc = q * q / 4.0 + p * p * p / 27.0;
    if disc >= 0.0 {
        let s = disc.sqrt();
        vec![(q / 2.0 + s).cbrt() + (q / 2.0 - s).cbrt()]
    } else {
        // three real roots, p < 0
        let r = (-p / 3.0).sqrt();
        let phi = (q / (2.0 * r * r * r)).clamp(-1.0, 1.0).acos();
        (0..3)
            .map(|k| 2.0 * r * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos())
            .collect()
    }
}

/// Minimizer `ω*` and distance from `α` to the parabola.
pub fn parabola_nearest(alpha: Complex64) -> (f64, f64) {
    // d/dω |α − (1+iω)²|² = 4(ω³ + (α_R + 1)ω − α_I)
    let p = alpha.re + 1.0;
    let q = alpha.im;
    let newton = |mut w: f64| {
        for _ in 0..4 {
            let f = w * w * w + p * w - q;
            let d = 3.0 * w * w + p;
            if d.abs() < 1e-300 {
                break;
            }
            w -= f / d;
        }
        w
    };
    let mut best = (0.0, f64::INFINITY);
    let mut consider = |w: f64| {
        if w.is_finite() {
            let d = dist_sq(alpha, w);
            if d < best.1 {
                best = (w, d);
            }
        }
    };
    for r in depressed_cubic_roots(p, q) {
        consider(newton(r));
    }
    // Scan fallback guards against branch slips in the closed form.
    let span = 4.0 + 2.0 * alpha.norm().sqrt();
    let steps = 2000;
    let mut scan_best = (0.0, f64::INFINITY);
    for i in 0..=steps {
        let w = -span + 2.0 * span * i as f64 / steps as f64;
        let d = dist_sq(alpha, w);
        if d < scan_best.1 {
            scan_best = (w, d);
        }
    }
    consider(newton(scan_best.0));
    (best.0, best.1.sqrt())
}

/// `dist(α, {(1 + iω)² : ω ∈ ℝ})`.
pub fn parabola_distance(alpha: Complex64) -> f64 {
    parabola_nearest(alpha).1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Inside,
    Boundary,
    Outside,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Region::Inside => "inside",
            Region::Boundary => "boundary",
            Region::Outside => "outside",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionClass {
    pub class: Region,
    pub distance: f64,
}

/// The two algebraic region tests: `α_R + |α| − 2` and `|Re √α| − 1`.
/// Both are negative inside the parabola.
pub fn region_indicators(alpha: Complex64) -> (f64, f64) {
    let cartesian = alpha.re + alpha.norm() - 2.0;
    let root = alpha.sqrt().re.abs() - 1.0;
    (cartesian, root)
}

pub fn region_classify(alpha: Complex64) -> RegionClass {
    let distance = parabola_distance(alpha);
    let (cartesian, root) = region_indicators(alpha);
    let class = if distance <= BOUNDARY_TOLERANCE {
        Region::Boundary
    } else if cartesian < 0.0 {
        Region::Inside
    } else {
        Region::Outside
    };
    debug_assert!(
        class == Region::Boundary || (cartesian < 0.0) == (root < 0.0),
        "region tests disagree at {alpha}"
    );
    RegionClass { class, distance }
}

/// Which weighted operator a norm refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    /// `x^{−2}` times the forward Green's operator.
    Q,
    /// `x^{−2}` times the two-sided Green's operator.
    Z,
}

impl NormKind {
    pub fn kernel_kind(self) -> KernelKind {
        match self {
            NormKind::Q => KernelKind::Q,
            NormKind::Z => KernelKind::Z,
        }
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Q" | "q" => Ok(NormKind::Q),
            "Z" | "z" => Ok(NormKind::Z),
            _ => Err(Error::Parse(format!("unknown operator kind {s:?} (expected Q or Z)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    DistanceClosedForm,
    MultiplierSup,
    DiscretizedSvd,
}

/// SVD estimates at a coarser grid and at the requested one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub n_coarse: usize,
    pub value_coarse: f64,
    pub n_fine: usize,
    pub value_fine: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub method: NormMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridProvenance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinement: Option<Refinement>,
}

/// Checks that `p` gives a bounded operator of the given kind.
pub fn validate_norm_parameter(p: &CouplingParameter, kind: NormKind) -> Result<()> {
    let region = region_classify(p.alpha());
    if region.class == Region::Boundary {
        return Err(Error::OnBoundary { distance: region.distance });
    }
    match kind {
        NormKind::Q if region.class == Region::Outside => Err(Error::OutsideRegion(format!(
            "alpha = {} is outside the parabola; use Z with Re(m) > 1",
            p.alpha()
        ))),
        NormKind::Z if p.m().re <= 1.0 => Err(Error::OutsideRegion(format!(
            "Z needs Re(m) > 1, got m = {}",
            p.m()
        ))),
        _ => Ok(()),
    }
}

/// `1/dist(α, parabola)` in closed form.
pub fn distance_estimate(p: &CouplingParameter, kind: NormKind) -> Result<NormEstimate> {
    validate_norm_parameter(p, kind)?;
    let (w, d) = parabola_nearest(p.alpha());
    Ok(NormEstimate {
        value: 1.0 / d,
        method: NormMethod::DistanceClosedForm,
        grid: None,
        omega_star: Some(w),
        refinement: None,
    })
}

/// `sup_ω |1/((1 + iω)² − m²)|` by scan and golden-section refinement.
pub fn multiplier_sup(p: &CouplingParameter, kind: NormKind) -> Result<NormEstimate> {
    validate_norm_parameter(p, kind)?;
    let alpha = p.alpha();
    let mult = |w: f64| {
        let z = Complex64::new(1.0, w);
        1.0 / (z * z - alpha).norm()
    };
    let span = 4.0 + 2.0 * alpha.norm().sqrt();
    let steps = 4000;
    let h = 2.0 * span / steps as f64;
    let (mut best_w, mut best_v) = (0.0, f64::NEG_INFINITY);
    for i in 0..=steps {
        let w = -span + i as f64 * h;
        let v = mult(w);
        if v > best_v {
            best_v = v;
            best_w = w;
        }
    }
    let (mut lo, mut hi) = (best_w - h, best_w + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (mult(c), mult(d));
    for _ in 0..200 {
        if hi - lo < 1e-15 * (1.0 + best_w.abs()) {
            break;
        }
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = mult(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = mult(d);
        }
    }
    let w = 0.5 * (lo + hi);
    let v = mult(w).max(best_v);
    Ok(NormEstimate {
        value: v,
        method: NormMethod::MultiplierSup,
        grid: None,
        omega_star: Some(w),
        refinement: None,
    })
}

/// Largest singular value of a dense matrix: full decomposition up to
/// [`DENSE_SVD_LIMIT`], deterministic power iteration on `AᴴA` above.
pub fn largest_singular_value(a: &DMatrix<Complex64>) -> f64 {
    if a.nrows().max(a.ncols()) <= DENSE_SVD_LIMIT {
        return a.clone().singular_values().max();
    }
    let n = a.ncols();
    let mut v = DVector::from_element(n, Complex64::new(1.0 / (n as f64).sqrt(), 0.0));
    let mut sigma = 0.0;
    for _ in 0..20_000 {
        let av = a * &v;
        let w = a.adjoint() * av;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm.sqrt();
        v = w / Complex64::new(norm, 0.0);
        if (next - sigma).abs() <= 1e-13 * next {
            return next;
        }
        sigma = next;
    }
    log::warn!("power iteration did not converge; returning last iterate");
    sigma
}

/// `L²` operator norm of a discretized operator (no refinement record).
pub fn discretized_norm(op: &DiscretizedOperator) -> f64 {
    largest_singular_value(&op.symmetrized())
}

/// SVD norm estimate with a refinement record from the half-size grid.
pub fn operator_norm_svd(op: &DiscretizedOperator) -> Result<NormEstimate> {
    if op.spec().kind().is_green() {
        return Err(Error::InvalidParameter(
            "Green's operators are unbounded; use the Q or Z kinds".into(),
        ));
    }
    let grid = op.grid();
    let value = discretized_norm(op);
    let refinement = if grid.n() / 2 >= crate::grid::MIN_NODES {
        let coarse = make_log_grid(grid.t_min(), grid.t_max(), grid.n() / 2)?;
        let value_coarse = discretized_norm(&discretize(op.spec(), &coarse)?);
        Some(Refinement { n_coarse: coarse.n(), value_coarse, n_fine: grid.n(), value_fine: value })
    } else {
        None
    };
    Ok(NormEstimate {
        value,
        method: NormMethod::DiscretizedSvd,
        grid: Some(grid.provenance()),
        omega_star: None,
        refinement,
    })
}

/// All three norm estimates for one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub kind: NormKind,
    pub m: Complex64,
    pub alpha: Complex64,
    pub region: RegionClass,
    pub distance_closed_form: NormEstimate,
    pub multiplier_sup: NormEstimate,
    pub discretized_svd: NormEstimate,
    /// Largest `|a − b| / max(a, b)` over the three pairs.
    pub max_pairwise_deviation: f64,
}

pub fn norm_report(p: &CouplingParameter, kind: NormKind, grid: &Arc<RadialGrid>) -> Result<NormReport> {
    let closed = distance_estimate(p, kind)?;
    let mult = multiplier_sup(p, kind)?;
    let spec = KernelSpec::new(kind.kernel_kind(), *p, None)?;
    let svd = operator_norm_svd(&discretize(&spec, grid)?)?;
    let vals = [closed.value, mult.value, svd.value];
    let mut dev: f64 = 0.0;
    for i in 0..3 {
        for j in i + 1..3 {
            dev = dev.max(relative_gap(vals[i], vals[j]));
        }
    }
    Ok(NormReport {
        kind,
        m: p.m(),
        alpha: p.alpha(),
        region: region_classify(p.alpha()),
        distance_closed_form: closed,
        multiplier_sup: mult,
        discretized_svd: svd,
        max_pairwise_deviation: dev,
    })
}

/// `|a − b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}
