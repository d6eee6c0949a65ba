//! Green's kernels of the Bessel operator and their `x^{−2}`-weighted companions.
//!
//! All kernels are evaluated in the dilation-stable form `√(xy)·h(ln(x/y))`,
//! which avoids forming `x^{1/2±m}` separately and losing digits to cancellation.

use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_bessel, GridFunction, RadialGrid};
use crate::param::CouplingParameter;
use crate::stencil::{gregory_corrections, GREGORY_TERMS};

/// Nodes dropped at each edge of a residual window (the stencil half-width).
pub const RESIDUAL_MARGIN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    /// Supported in `x > y`; inverts the Bessel expression up to sign.
    ForwardGreen,
    /// `x^{−2}` times the forward kernel.
    Q,
    /// Decays on both sides of the diagonal; needs `m ≠ 0`.
    TwoSidedGreen,
    /// `x^{−2}` times the two-sided kernel.
    Z,
    /// Forward kernel restricted to `[0, a] × [0, a]`.
    CompressedForward,
    /// Two-sided kernel restricted to `[0, a] × [0, a]`.
    CompressedTwoSided,
}

impl KernelKind {
    pub fn is_two_sided(self) -> bool {
        matches!(self, Self::TwoSidedGreen | Self::Z | Self::CompressedTwoSided)
    }

    pub fn is_compressed(self) -> bool {
        matches!(self, Self::CompressedForward | Self::CompressedTwoSided)
    }

    /// Green kinds are right inverses (up to sign) of the Bessel expression.
    pub fn is_green(self) -> bool {
        !matches!(self, Self::Q | Self::Z)
    }

    /// Sign `σ` with `L (G g) = σ g` for Green kinds.
    ///
    /// The forward kernel as written is `(x − y)θ(x − y)` at `α = ¼`, whose
    /// second derivative reproduces `g`, so `L G g = −g`; the two-sided
    /// kernel gives `+g`.
    pub fn inversion_sign(self) -> f64 {
        if self.is_two_sided() {
            1.0
        } else {
            -1.0
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "forward" | "forward-green" => Ok(Self::ForwardGreen),
            "q" => Ok(Self::Q),
            "two-sided" | "two-sided-green" => Ok(Self::TwoSidedGreen),
            "z" => Ok(Self::Z),
            "compressed-forward" => Ok(Self::CompressedForward),
            "compressed-two-sided" => Ok(Self::CompressedTwoSided),
            _ => Err(Error::Parse(format!("unknown kernel kind {s:?}"))),
        }
    }
}

/// Immutable description of an integral kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    kind: KernelKind,
    param: CouplingParameter,
    cutoff: Option<f64>,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, param: CouplingParameter, cutoff: Option<f64>) -> Result<Self> {
        if kind.is_two_sided() {
            let m = param.m();
            if m == Complex64::new(0.0, 0.0) {
                return Err(Error::ZeroOrder);
            }
            if m.re <= -1.0 {
                return Err(Error::InvalidParameter(format!(
                    "two-sided kernels need Re(m) > -1, got {}",
                    m.re
                )));
            }
        }
        match (kind.is_compressed(), cutoff) {
            (true, Some(a)) if a > 0.0 && a.is_finite() => {}
            (true, Some(a)) => {
                return Err(Error::InvalidParameter(format!("cutoff a = {a} must be positive")))
            }
            (true, None) => return Err(Error::InvalidParameter("compressed kind needs a cutoff".into())),
            (false, Some(_)) => {
                return Err(Error::InvalidParameter(format!("{kind:?} takes no cutoff")))
            }
            (false, None) => {}
        }
        Ok(Self { kind, param, cutoff })
    }

    pub fn forward(param: CouplingParameter) -> Self {
        Self { kind: KernelKind::ForwardGreen, param, cutoff: None }
    }

    pub fn q(param: CouplingParameter) -> Self {
        Self { kind: KernelKind::Q, param, cutoff: None }
    }

    pub fn two_sided(param: CouplingParameter) -> Result<Self> {
        Self::new(KernelKind::TwoSidedGreen, param, None)
    }

    pub fn z(param: CouplingParameter) -> Result<Self> {
        Self::new(KernelKind::Z, param, None)
    }

    pub fn compressed_forward(param: CouplingParameter, a: f64) -> Result<Self> {
        Self::new(KernelKind::CompressedForward, param, Some(a))
    }

    pub fn compressed_two_sided(param: CouplingParameter, a: f64) -> Result<Self> {
        Self::new(KernelKind::CompressedTwoSided, param, Some(a))
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }
    pub fn param(&self) -> CouplingParameter {
        self.param
    }
    pub fn cutoff(&self) -> Option<f64> {
        self.cutoff
    }

    /// Same kind and cutoff at another parameter (re-validated).
    pub fn with_param(&self, param: CouplingParameter) -> Result<Self> {
        Self::new(self.kind, param, self.cutoff)
    }

    fn inside(&self, x: f64) -> bool {
        self.cutoff.map_or(true, |a| x <= a)
    }
}

/// `sinh(z)/z`, accurate near zero.
fn sinhc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        1.0 + z2 / 6.0 * (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0))
    } else {
        z.sinh() / z
    }
}

/// `G^→(x, y)` with `θ(0) = 0`.
fn forward_value(m: Complex64, log_branch: bool, x: f64, y: f64) -> Complex64 {
    if x <= y {
        return Complex64::new(0.0, 0.0);
    }
    let l = (x / y).ln();
    let s = (x * y).sqrt() * l;
    if log_branch {
        Complex64::new(s, 0.0)
    } else {
        sinhc(m * l) * s
    }
}

/// `G_m(x, y)` with `θ(0) = ½`, i.e. the common limit `x/(2m)` on the diagonal.
fn two_sided_value(m: Complex64, x: f64, y: f64) -> Complex64 {
    // difference of logs keeps G(x, y) == G(y, x) bit for bit
    let l = (x.ln() - y.ln()).abs();
    (-m * l).exp() * ((x * y).sqrt() / (2.0 * m))
}

/// Kernel value at `(x, y)`, both positive.
pub fn kernel_eval(spec: &KernelSpec, x: f64, y: f64) -> Complex64 {
    debug_assert!(x > 0.0 && y > 0.0);
    if !(spec.inside(x) && spec.inside(y)) {
        return Complex64::new(0.0, 0.0);
    }
    let m = spec.param.m();
    match spec.kind {
        KernelKind::ForwardGreen | KernelKind::CompressedForward => {
            forward_value(m, spec.param.is_log_branch(), x, y)
        }
        KernelKind::Q => forward_value(m, spec.param.is_log_branch(), x, y) / (x * x),
        KernelKind::TwoSidedGreen | KernelKind::CompressedTwoSided => two_sided_value(m, x, y),
        KernelKind::Z => two_sided_value(m, x, y) / (x * x),
    }
}

/// Quadrature matrix `M_jk = K(x_j, x_k) w_k`.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    spec: KernelSpec,
    grid: Arc<RadialGrid>,
    matrix: DMatrix<Complex64>,
}

/// Builds the quadrature matrix of `spec` on `grid`.
pub fn discretize(spec: &KernelSpec, grid: &Arc<RadialGrid>) -> Result<DiscretizedOperator> {
    check_cutoff(spec, grid)?;
    let x = grid.x();
    let w = grid.weights();
    let n = grid.n();
    let matrix = DMatrix::from_fn(n, n, |j, k| kernel_eval(spec, x[j], x[k]) * w[k]);
    Ok(DiscretizedOperator { spec: *spec, grid: Arc::clone(grid), matrix })
}

fn check_cutoff(spec: &KernelSpec, grid: &RadialGrid) -> Result<()> {
    if let Some(a) = spec.cutoff {
        if a < grid.x_min() || a > grid.x_max() {
            return Err(Error::OutOfRange { lo: a, hi: a, min: grid.x_min(), max: grid.x_max() });
        }
    }
    Ok(())
}

impl DiscretizedOperator {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if !f.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch("operand lives on another grid".into()));
        }
        let v = nalgebra::DVector::from_column_slice(f.values());
        GridFunction::new(Arc::clone(&self.grid), (&self.matrix * v).as_slice().to_vec())
    }

    /// `W^{1/2} K W^{1/2}`: its spectral norm is the `L²` operator norm.
    pub fn symmetrized(&self) -> DMatrix<Complex64> {
        let s: Vec<f64> = self.grid.weights().iter().map(|w| w.sqrt()).collect();
        let mut out = self.matrix.clone();
        for k in 0..out.ncols() {
            for j in 0..out.nrows() {
                out[(j, k)] *= s[j] / s[k];
            }
        }
        out
    }

    /// Dense row-major CSV, two columns (re, im) per entry.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        for j in 0..self.matrix.nrows() {
            let row: Vec<String> = (0..self.matrix.ncols())
                .flat_map(|k| {
                    let v = self.matrix[(j, k)];
                    [format!("{:e}", v.re), format!("{:e}", v.im)]
                })
                .collect();
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// `f = G g` for a Green kind, evaluated row by row without storing the matrix.
pub fn apply_green(spec: &KernelSpec, g: &GridFunction) -> Result<GridFunction> {
    if !spec.kind.is_green() {
        return Err(Error::InvalidParameter(format!("{:?} is not a Green kernel", spec.kind)));
    }
    apply_kernel(spec, g)
}

/// Unit-spacing weight of node `k` in the rule for `[lo, hi]`: end-corrected
/// trapezoid when the range is long enough, plain trapezoid otherwise.
fn partial_weight(lo: usize, hi: usize, k: usize, corr: &[f64; GREGORY_TERMS]) -> f64 {
    let len = hi - lo + 1;
    if len < 2 {
        return 0.0;
    }
    let mut w = 1.0;
    if k == lo {
        w -= 0.5;
    }
    if k == hi {
        w -= 0.5;
    }
    if len >= 2 * GREGORY_TERMS {
        if k - lo < GREGORY_TERMS {
            w += corr[k - lo];
        }
        if hi - k < GREGORY_TERMS {
            w += corr[hi - k];
        }
    }
    w
}

/// Kernel integral `∫ K(x, y) g(y) dy` at every node for any kind.
///
/// Unlike [`DiscretizedOperator`], each row splits the `y`-range at the
/// diagonal, where every kernel has a kink, and integrates the smooth pieces
/// with their own end-corrected rule. This keeps the high order of the grid
/// quadrature for smooth `g`.
pub fn apply_kernel(spec: &KernelSpec, g: &GridFunction) -> Result<GridFunction> {
    let grid = g.grid();
    check_cutoff(spec, grid)?;
    let x = grid.x();
    let dt = grid.dt();
    let n = grid.n();
    let corr = gregory_corrections();
    let last = match spec.cutoff {
        Some(a) => match x.iter().rposition(|&v| v <= a) {
            Some(k) => k,
            None => return Ok(GridFunction::zeros(grid)),
        },
        None => n - 1,
    };
    let gv = g.values();
    let first_nonzero = gv.iter().position(|v| *v != Complex64::new(0.0, 0.0));
    let last_nonzero = gv.iter().rposition(|v| *v != Complex64::new(0.0, 0.0));
    let (Some(g_lo), Some(g_hi)) = (first_nonzero, last_nonzero) else {
        return Ok(GridFunction::zeros(grid));
    };
    let piece = |j: usize, lo: usize, hi: usize| -> Complex64 {
        let (a, b) = (lo.max(g_lo), hi.min(g_hi));
        if a > b {
            return Complex64::new(0.0, 0.0);
        }
        (a..=b)
            .map(|k| kernel_eval(spec, x[j], x[k]) * gv[k] * (partial_weight(lo, hi, k, &corr) * dt * x[k]))
            .sum()
    };
    let values = (0..n)
        .map(|j| {
            if j > last {
                return Complex64::new(0.0, 0.0);
            }
            let head = if g_lo == 0 { head_integral(spec, x[j], x[0]) * gv[0] } else { Complex64::new(0.0, 0.0) };
            let below = piece(j, 0, j) + head;
            if spec.kind.is_two_sided() {
                below + piece(j, j, last)
            } else {
                below
            }
        })
        .collect();
    GridFunction::new(Arc::clone(grid), values)
}

/// `∫_0^{x0} K(x, y) dy` for `x ≥ x0`, in closed form.
///
/// Stands in for the part of the integral below the first node, with `g`
/// frozen at its first sample. Zero when the integral diverges at `0`.
fn head_integral(spec: &KernelSpec, x: f64, x0: f64) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    let m = spec.param.m();
    let raw = match spec.kind {
        KernelKind::ForwardGreen | KernelKind::CompressedForward | KernelKind::Q => {
            if spec.param.is_log_branch() {
                let c = x.sqrt() * x0.powf(1.5);
                Complex64::new(c * (2.0 / 3.0 * (x / x0).ln() + 4.0 / 9.0), 0.0)
            } else if m.re.abs() >= 1.5 {
                return zero;
            } else {
                let grow = Complex64::new(x, 0.0).powc(0.5 + m) * Complex64::new(x0, 0.0).powc(1.5 - m) / (1.5 - m);
                let decay = Complex64::new(x, 0.0).powc(0.5 - m) * Complex64::new(x0, 0.0).powc(1.5 + m) / (1.5 + m);
                (grow - decay) / (2.0 * m)
            }
        }
        KernelKind::TwoSidedGreen | KernelKind::CompressedTwoSided | KernelKind::Z => {
            if m.re <= -1.5 {
                return zero;
            }
            Complex64::new(x, 0.0).powc(0.5 - m) * Complex64::new(x0, 0.0).powc(1.5 + m) / ((1.5 + m) * (2.0 * m))
        }
    };
    match spec.kind {
        KernelKind::Q | KernelKind::Z => raw / (x * x),
        _ => raw,
    }
}

/// Node window where the Green identity is checked: the grid (or `(x_0, a]`
/// for compressed kinds) minus [`RESIDUAL_MARGIN`] nodes at each edge.
pub fn residual_window(spec: &KernelSpec, grid: &RadialGrid) -> (usize, usize) {
    let end = match spec.cutoff {
        Some(a) => grid.x().iter().take_while(|&&x| x <= a).count(),
        None => grid.n(),
    };
    (RESIDUAL_MARGIN, end.saturating_sub(RESIDUAL_MARGIN).max(RESIDUAL_MARGIN))
}

/// Relative `L²` misfit `‖L(Gg) − σg‖ / ‖g‖` over [`residual_window`].
pub fn green_residual(spec: &KernelSpec, g: &GridFunction) -> Result<f64> {
    let f = apply_green(spec, g)?;
    let lf = apply_bessel(&spec.param, &f);
    let sigma = spec.kind.inversion_sign();
    let r = lf.zip_with(g, |a, b| a - b * sigma)?;
    let (lo, hi) = residual_window(spec, g.grid());
    let gn = g.l2_norm_nodes(lo, hi);
    if gn == 0.0 {
        return Ok(0.0);
    }
    Ok(r.l2_norm_nodes(lo, hi) / gn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_log_grid;
    use crate::quad;

    fn param(re: f64, im: f64) -> CouplingParameter {
        CouplingParameter::from_m(Complex64::new(re, im)).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let q = KernelSpec::q(param(0.5, 0.0));
        assert!((kernel_eval(&q, 2.0, 1.0) - 0.25).norm() < 1e-15);
        let fwd = KernelSpec::forward(param(0.5, 0.0));
        assert!((kernel_eval(&fwd, 2.0, 1.0) - 1.0).norm() < 1e-15);
        assert_eq!(kernel_eval(&fwd, 1.0, 2.0), Complex64::new(0.0, 0.0));
        let log = KernelSpec::forward(param(0.0, 0.0));
        let e = 1f64.exp();
        assert!((kernel_eval(&log, e, 1.0) - e.sqrt()).norm() < 1e-15);
    }

    #[test]
    fn kernels_match_power_form() {
        let m = Complex64::new(0.7, -0.4);
        let p = param(m.re, m.im);
        let pw = |x: f64, e: Complex64| crate::param::rpow(x, e);
        let (x, y) = (3.0, 0.4);
        let direct = (pw(x, 0.5 + m) * pw(y, 0.5 - m) - pw(x, 0.5 - m) * pw(y, 0.5 + m)) / (2.0 * m);
        assert!((kernel_eval(&KernelSpec::forward(p), x, y) - direct).norm() < 1e-13);
        let ts = KernelSpec::two_sided(p).unwrap();
        let below = pw(y, 0.5 + m) * pw(x, 0.5 - m) / (2.0 * m);
        assert!((kernel_eval(&ts, x, y) - below).norm() < 1e-13);
        assert!((kernel_eval(&ts, y, x) - below).norm() < 1e-13);
    }

    #[test]
    fn spec_validation() {
        assert_eq!(KernelSpec::two_sided(param(0.0, 0.0)).unwrap_err(), Error::ZeroOrder);
        assert_eq!(KernelSpec::z(param(0.0, 0.0)).unwrap_err(), Error::ZeroOrder);
        let neg = CouplingParameter::from_m_extended(Complex64::new(-0.5, 0.0)).unwrap();
        assert!(KernelSpec::two_sided(neg).is_ok());
        assert!(KernelSpec::compressed_forward(param(0.5, 0.0), 0.0).is_err());
        assert!(KernelSpec::new(KernelKind::Q, param(0.5, 0.0), Some(1.0)).is_err());
        let g = make_log_grid(-2.0, 2.0, 32).unwrap();
        let far = KernelSpec::compressed_forward(param(0.5, 0.0), 100.0).unwrap();
        assert!(discretize(&far, &g).is_err());
    }

    #[test]
    fn forward_matrix_is_strictly_lower() {
        let g = make_log_grid(-3.0, 3.0, 32).unwrap();
        let op = discretize(&KernelSpec::forward(param(0.3, 0.2)), &g).unwrap();
        for j in 0..32 {
            for k in j..32 {
                assert_eq!(op.matrix()[(j, k)], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn two_sided_kernel_symmetric_for_real_m() {
        let g = make_log_grid(-3.0, 3.0, 32).unwrap();
        let spec = KernelSpec::two_sided(param(0.8, 0.0)).unwrap();
        for &xj in g.x() {
            for &xk in g.x() {
                assert_eq!(kernel_eval(&spec, xj, xk), kernel_eval(&spec, xk, xj));
            }
        }
    }

    #[test]
    fn compressed_masks_rows_and_columns() {
        let g = make_log_grid(-3.0, 3.0, 32).unwrap();
        let spec = KernelSpec::compressed_two_sided(param(0.8, 0.1), 1.0).unwrap();
        let op = discretize(&spec, &g).unwrap();
        for j in 0..32 {
            for k in 0..32 {
                if g.x()[j] > 1.0 || g.x()[k] > 1.0 {
                    assert_eq!(op.matrix()[(j, k)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn matrix_vector_matches_adaptive_quadrature() {
        // Q at α = ¼ applied to y ↦ y: x^{−2}∫_{x_0}^x (x − y) y dy.
        let g = make_log_grid(-2.0, 1.0, 16).unwrap();
        let op = discretize(&KernelSpec::q(param(0.5, 0.0)), &g).unwrap();
        let f = GridFunction::from_real_fn(&g, |y| y);
        let out = op.apply(&f).unwrap();
        let x0 = g.x_min();
        // The end corrections are tuned for integrals spanning at least 12
        // nodes, so rows shorter than that are not a meaningful comparison.
        for j in 12..16 {
            let x = g.x()[j];
            let exact = quad::integrate_log(|y| Complex64::new((x - y) * y / (x * x), 0.0), x0, x, 1e-14);
            // the kink at y = x limits the rule to second order, dt = 0.2 here
            assert!((out.values()[j] - exact).norm() < 5e-2 * exact.norm(), "row {j}");
        }
        let fine = make_log_grid(-2.0, 1.0, 301).unwrap();
        let op = discretize(&KernelSpec::q(param(0.5, 0.0)), &fine).unwrap();
        let out = op.apply(&GridFunction::from_real_fn(&fine, |y| y)).unwrap();
        let j = 300;
        let x = fine.x()[j];
        let exact = quad::integrate_log(|y| Complex64::new((x - y) * y / (x * x), 0.0), x0, x, 1e-14);
        assert!((out.values()[j] - exact).norm() < 1e-5 * exact.norm());
    }

    #[test]
    fn indicator_source_at_half() {
        // m = ½, g = 1 on [1, 2]: f(x) = ∫_1^{min(x,2)} (x − y) dy.
        let g = make_log_grid(-2.0, 2.0, 2049).unwrap();
        let spec = KernelSpec::forward(param(0.5, 0.0));
        let src = GridFunction::from_real_fn(&g, |x| if (1.0..=2.0).contains(&x) { 1.0 } else { 0.0 });
        let f = apply_green(&spec, &src).unwrap();
        for (j, &x) in g.x().iter().enumerate() {
            let exact = if x <= 1.0 {
                0.0
            } else {
                let u = x.min(2.0);
                x * (u - 1.0) - 0.5 * (u * u - 1.0)
            };
            // trapezoid on a jump: first order in dt
            assert!((f.values()[j].re - exact).abs() < 5e-3, "x = {x}");
        }
        assert!(apply_green(&spec, &GridFunction::zeros(&g)).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn green_residual_small_and_second_order() {
        let bump = |x: f64| (-(x.ln() / 0.3).powi(2)).exp();
        let res = |n| {
            let g = make_log_grid(-12.0, 5.0, n).unwrap();
            let b = GridFunction::from_real_fn(&g, bump);
            let p = CouplingParameter::from_alpha(Complex64::new(0.25, 1.0)).unwrap();
            green_residual(&KernelSpec::compressed_forward(p, 8.0).unwrap(), &b).unwrap()
        };
        let (r1, r2) = (res(512), res(1024));
        assert!(r2 < 1e-3, "{r2}");
        assert!(r1 / r2 > 3.5, "{r1} {r2}");
        let g = make_log_grid(-12.0, 5.0, 256).unwrap();
        let spec = KernelSpec::forward(param(0.5, 0.0));
        assert_eq!(green_residual(&spec, &GridFunction::zeros(&g)).unwrap(), 0.0);
    }

    #[test]
    fn forward_support_propagates_rightwards() {
        let g = make_log_grid(-6.0, 3.0, 512).unwrap();
        let src = GridFunction::from_real_fn(&g, |x| if (1.0..2.0).contains(&x) { x } else { 0.0 });
        let f = apply_green(&KernelSpec::forward(param(0.4, 0.9)), &src).unwrap();
        for (x, v) in g.x().iter().zip(f.values()) {
            if *x < 1.0 {
                assert_eq!(*v, Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn csv_export_shape() {
        let g = make_log_grid(-1.0, 1.0, 16).unwrap();
        let op = discretize(&KernelSpec::q(param(0.5, 0.5)), &g).unwrap();
        let mut buf = Vec::new();
        op.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 16);
        assert!(rows.iter().all(|r| r.split(',').count() == 32));
    }
}
