//! Behaviour at the origin: boundary coefficients of `x^{1/2±m}`, the
//! `H₀²` membership test, and the weighted inequalities that tie the
//! realizations together.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_bessel, CutoffSpec, GridFunction};
use crate::kernels::{apply_green, apply_kernel, KernelSpec, RESIDUAL_MARGIN};
use crate::norm::{parabola_distance, region_classify, Region};
use crate::param::{rpow, CouplingParameter};
use crate::quad;

/// Largest accepted condition number of the column-normalized fit basis.
pub const MAX_FIT_CONDITION: f64 = 1e10;
/// `|f(0)|, |f'(0)| < LIMIT_TOLERANCE · ‖f‖` for membership.
pub const LIMIT_TOLERANCE: f64 = 1e-4;
/// Relative change of `‖f''‖` accepted as converged.
pub const STABILITY_TOLERANCE: f64 = 0.05;
/// Growth per ladder step counted as divergence of `‖f''‖`.
pub const DIVERGENCE_GROWTH: f64 = 0.20;
/// Number of rungs in the truncation ladder for `‖f''‖`.
pub const LADDER_RUNGS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisTag {
    /// `x^{1/2+m}`, `x^{1/2−m}`.
    PowerPower,
    /// `x^{1/2}`, `x^{1/2} ln x` (at `m = 0`).
    PowerLog,
}

/// Which right inverse supplies the particular solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParticularSolution {
    /// `−G^{a→} g`: vanishes below the support of `g`.
    Forward,
    /// `G_m^a g`.
    TwoSided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCoefficients {
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    /// `L²(dx)` misfit over the fit window.
    pub residual: f64,
    pub basis: BasisTag,
    pub particular: ParticularSolution,
    /// Condition number of the column-normalized design matrix.
    pub condition: f64,
    /// Fit window `[x_lo, x_hi]`.
    pub window: (f64, f64),
    /// `‖L f − g‖` relative to the size of the terms, on `(0, a)`.
    pub source_mismatch: f64,
}

/// The two solutions of `L u = 0` used as the fit basis.
pub fn nullspace_basis(p: &CouplingParameter, x: f64) -> [Complex64; 2] {
    if p.is_log_branch() {
        let s = x.sqrt();
        [Complex64::new(s, 0.0), Complex64::new(s * x.ln(), 0.0)]
    } else {
        [rpow(x, 0.5 + p.m()), rpow(x, 0.5 - p.m())]
    }
}

/// Particular solution of `L u = g` on `(0, a)`: forward inverse inside the
/// parabola and at the logarithmic point, two-sided inverse for `Re m ≥ 1`.
pub fn particular_solution(
    p: &CouplingParameter,
    g: &GridFunction,
    a: f64,
) -> Result<(GridFunction, ParticularSolution)> {
    if p.is_log_branch() || p.m().re.abs() < 1.0 {
        let spec = KernelSpec::compressed_forward(*p, a)?;
        Ok((apply_green(&spec, g)?.scale(Complex64::new(-1.0, 0.0)), ParticularSolution::Forward))
    } else {
        let spec = KernelSpec::compressed_two_sided(*p, a)?;
        Ok((apply_green(&spec, g)?, ParticularSolution::TwoSided))
    }
}

/// Weighted least squares `r ≈ Σ c_i b_i` over nodes `lo..hi`.
/// Returns coefficients, residual norm and condition number.
fn fit_basis(
    x: &[f64],
    dt: f64,
    r: &[Complex64],
    lo: usize,
    hi: usize,
    basis: &dyn Fn(f64) -> Vec<Complex64>,
) -> Result<(Vec<Complex64>, f64, f64)> {
    let rows = hi - lo;
    let k = basis(x[lo]).len();
    if rows < k + 2 {
        return Err(Error::InvalidParameter("fit window has too few nodes".into()));
    }
    let mut a = DMatrix::<Complex64>::zeros(rows, k);
    let mut b = DVector::<Complex64>::zeros(rows);
    for (i, j) in (lo..hi).enumerate() {
        let sw = (x[j] * dt).sqrt();
        for (c, v) in basis(x[j]).into_iter().enumerate() {
            a[(i, c)] = v * sw;
        }
        b[i] = r[j] * sw;
    }
    let scales: Vec<f64> = (0..k).map(|c| a.column(c).norm()).collect();
    if scales.iter().any(|s| *s == 0.0 || !s.is_finite()) {
        return Err(Error::IllConditionedFit { condition: f64::INFINITY });
    }
    for (c, s) in scales.iter().enumerate() {
        a.column_mut(c).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    if !(condition <= MAX_FIT_CONDITION) {
        return Err(Error::IllConditionedFit { condition });
    }
    let sol = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let residual = (&a * &sol - &b).norm();
    let coeffs = sol.iter().zip(&scales).map(|(c, s)| c / *s).collect();
    Ok((coeffs, residual, condition))
}

/// Node range `[0, hi)` with `x_j ≤ limit`.
fn nodes_up_to(x: &[f64], limit: f64) -> usize {
    x.iter().take_while(|&&v| v <= limit).count()
}

/// Fits `f − (particular solution of L u = g on (0, a))` against the
/// nullspace basis over `[x_min, a/2]`.
pub fn boundary_coefficients(
    p: &CouplingParameter,
    f: &GridFunction,
    g: &GridFunction,
    a: f64,
) -> Result<BoundaryCoefficients> {
    f.check_same_grid(g)?;
    let grid = Arc::clone(f.grid());
    if p.m().re <= -1.0 {
        return Err(Error::InvalidParameter(format!("Re(m) = {} <= -1", p.m().re)));
    }
    if !(a > grid.x_min() && a <= grid.x_max()) {
        return Err(Error::OutOfRange { lo: a, hi: a, min: grid.x_min(), max: grid.x_max() });
    }
    let source_mismatch = source_mismatch(p, f, g, a);
    if source_mismatch > 1e-2 {
        log::warn!("g does not match L f on (0, a): relative mismatch {source_mismatch:.3e}");
    }
    let (part, particular) = particular_solution(p, g, a)?;
    let r = f.sub(&part)?;
    let hi = nodes_up_to(grid.x(), 0.5 * a);
    let basis = |x: f64| nullspace_basis(p, x).to_vec();
    let (c, residual, condition) = fit_basis(grid.x(), grid.dt(), r.values(), 0, hi, &basis)?;
    Ok(BoundaryCoefficients {
        c_plus: c[0],
        c_minus: c[1],
        residual,
        basis: if p.is_log_branch() { BasisTag::PowerLog } else { BasisTag::PowerPower },
        particular,
        condition,
        window: (grid.x_min(), grid.x()[hi.max(1) - 1]),
        source_mismatch,
    })
}

fn source_mismatch(p: &CouplingParameter, f: &GridFunction, g: &GridFunction, a: f64) -> f64 {
    let lf = apply_bessel(p, f);
    let hi = nodes_up_to(f.grid().x(), a).saturating_sub(RESIDUAL_MARGIN);
    let lo = RESIDUAL_MARGIN.min(hi);
    let diff = lf.sub(g).expect("same grid");
    let weighted = f.map(|x, v| v / (x * x));
    let scale = g.l2_norm_nodes(lo, hi).max(weighted.l2_norm_nodes(lo, hi));
    if scale == 0.0 {
        0.0
    } else {
        diff.l2_norm_nodes(lo, hi) / scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainClass {
    /// `H₀²`, the minimal domain.
    MinDomain,
    /// `H₀² + ℂ x^{1/2+m} ξ`.
    HmOnly,
    /// Needs the `x^{1/2−m}` term: maximal domain only.
    MaxOnly,
    Outside,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainReport {
    pub f0_limit: Complex64,
    pub f1_limit: Complex64,
    /// `‖f''‖` over `[x_k, x_max]` for the finest ladder rung.
    pub second_derivative_norm: f64,
    /// `‖f''‖` over `[x_k, x_max]`, `x_k` decreasing towards the grid floor.
    pub second_derivative_ladder: Vec<f64>,
    /// Relative growth between consecutive ladder rungs.
    pub ladder_growth: Vec<f64>,
    pub x2_weighted_norm: f64,
    pub f_norm: f64,
    pub h20_member: bool,
    /// `true` when every ladder step grows by at least 20%.
    pub second_derivative_diverges: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<DomainClass>,
}

/// Tests whether `f` behaves like an element of `H₀²` at the origin.
///
/// `f(0)` and `f'(0)` come from quadratic extrapolation over the three
/// smallest nodes. Square-integrability of `f''` is probed by a ladder of
/// truncated norms over `[x_k, x_max]`, where `t_k = ln x_k` halves its
/// distance to `t_min` at each rung starting from the middle of the grid.
pub fn h20_membership(f: &GridFunction) -> DomainReport {
    let grid = f.grid();
    let d1 = f.differentiate(1).expect("order 1");
    let d2 = f.differentiate(2).expect("order 2");
    let f_norm = f.l2_norm();
    let f0_limit = f.limit_at_zero();
    let f1_limit = d1.limit_at_zero();
    let t_mid = 0.5 * (grid.t_min() + grid.t_max());
    let n = grid.n();
    let ladder: Vec<f64> = (0..LADDER_RUNGS)
        .map(|k| {
            let t_k = grid.t_min() + (t_mid - grid.t_min()) / 2f64.powi(k as i32);
            let lo = ((t_k - grid.t_min()) / grid.dt()).round() as usize;
            d2.l2_norm_nodes(lo.max(RESIDUAL_MARGIN), n - RESIDUAL_MARGIN)
        })
        .collect();
    let growth: Vec<f64> = ladder
        .windows(2)
        .map(|w| if w[0] == 0.0 { if w[1] == 0.0 { 0.0 } else { f64::INFINITY } } else { w[1] / w[0] - 1.0 })
        .collect();
    let diverges = growth.iter().all(|&g| g >= DIVERGENCE_GROWTH);
    let stable = growth.last().is_some_and(|&g| g.abs() < STABILITY_TOLERANCE);
    let scale = f_norm.max(f64::MIN_POSITIVE);
    let h20_member = f0_limit.norm() < LIMIT_TOLERANCE * scale
        && f1_limit.norm() < LIMIT_TOLERANCE * scale
        && stable
        && !diverges;
    let x2_weighted_norm = f.map(|x, v| v / (x * x)).l2_norm();
    DomainReport {
        f0_limit,
        f1_limit,
        second_derivative_norm: *ladder.last().unwrap(),
        second_derivative_ladder: ladder,
        ladder_growth: growth,
        x2_weighted_norm,
        f_norm,
        h20_member,
        second_derivative_diverges: diverges,
        classification: if h20_member { Some(DomainClass::MinDomain) } else { None },
    }
}

/// `f ≈ f0 + c₊ x^{1/2+m} ξ + c₋ x^{1/2−m} ξ` with `f0` tested for `H₀²`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub f0: GridFunction,
    pub coefficients: BoundaryCoefficients,
    pub f0_report: DomainReport,
    pub classification: DomainClass,
}

/// Splits `f` into its `H₀²` part and the two singular terms, using the
/// cutoff `ξ` and fitting on `[x_min, plateau_end/2]`.
pub fn domain_decompose(
    p: &CouplingParameter,
    f: &GridFunction,
    cutoff: &CutoffSpec,
) -> Result<Decomposition> {
    let region = region_classify(p.alpha());
    if region.class != Region::Inside {
        return Err(Error::OutsideRegion(format!(
            "decomposition needs |Re sqrt(alpha)| < 1, alpha = {} is {}",
            p.alpha(),
            region.class
        )));
    }
    let g = apply_bessel(p, f);
    let coefficients = boundary_coefficients(p, f, &g, cutoff.plateau_end)?;
    let (cp, cm) = (coefficients.c_plus, coefficients.c_minus);
    let f0 = f.map(|x, v| {
        let [bp, bm] = nullspace_basis(p, x);
        v - (cp * bp + cm * bm) * cutoff.eval(x)
    });
    let f0_report = h20_membership(&f0);
    // a remainder that is rounding-level against f itself counts as zero, even
    // when its own ‖f''‖ ladder grows
    let f_ladder = h20_membership(f).second_derivative_ladder;
    let negligible = f0_report.f0_limit.norm() < LIMIT_TOLERANCE * f.l2_norm().max(f64::MIN_POSITIVE)
        && f0_report.second_derivative_ladder.iter().zip(&f_ladder).all(|(r, s)| *r <= LIMIT_TOLERANCE * s);
    let tol = LIMIT_TOLERANCE * f.l2_norm().max(1.0);
    let classification = match (f0_report.h20_member || negligible, cp.norm() > tol, cm.norm() > tol) {
        (true, false, false) => DomainClass::MinDomain,
        (true, _, false) => DomainClass::HmOnly,
        (true, _, true) => DomainClass::MaxOnly,
        (false, _, _) => DomainClass::Outside,
    };
    Ok(Decomposition { f0, coefficients, f0_report, classification })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    /// `‖x^{−2}∫_0^x (x − y) f(y) dy‖ ≤ (4/3)‖f‖`.
    Estima,
    /// `∫|u|²/x⁴ ≤ (16/9)∫|u''|²`.
    Rellich,
    /// `∫|u|²/x² ≤ 4∫|u'|²`.
    Hardy,
    /// `‖x^{−2} f‖ ≤ ‖L f‖ / dist(α, parabola)` for `f = G^{a→} g`.
    KatoBound,
}

impl std::str::FromStr for InequalityKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "estima" => Ok(Self::Estima),
            "rellich" => Ok(Self::Rellich),
            "hardy" => Ok(Self::Hardy),
            "kato_bound" | "kato-bound" => Ok(Self::KatoBound),
            _ => Err(Error::Parse(format!("unknown inequality {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub kind: InequalityKind,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl InequalityRecord {
    fn new(kind: InequalityKind, lhs: f64, rhs: f64) -> Self {
        Self { kind, lhs, rhs, ratio: if rhs == 0.0 { 0.0 } else { lhs / rhs } }
    }

    /// `ratio ≤ 1 + 1e−6`.
    pub fn holds(&self) -> bool {
        self.ratio <= 1.0 + 1e-6
    }
}

const QUAD_TOL: f64 = 1e-13;
/// Lower integration limit standing in for `0` in the analytic checks.
const ANALYTIC_FLOOR: f64 = 1e-18;

/// Estimate on grid data: `‖Q_{1/4} f‖` against `(4/3)‖f‖`.
pub fn estima_check(f: &GridFunction) -> Result<InequalityRecord> {
    let spec = KernelSpec::q(CouplingParameter::from_real_m(0.5)?);
    let g = apply_kernel(&spec, f)?;
    Ok(InequalityRecord::new(InequalityKind::Estima, g.l2_norm(), 4.0 / 3.0 * f.l2_norm()))
}

/// Estimate for `f` given in closed form and supported in `[0, support]`.
///
/// `g(x) = ∫_0^1 (1 − s) f(xs) ds` avoids cancellation near `0`; beyond the
/// support `g = (F₀ x − F₁)/x²` with the moments of `f`, which gives the tail
/// integral exactly. `breaks` lists discontinuities of `f`.
pub fn estima_check_analytic(
    f: &dyn Fn(f64) -> Complex64,
    support: f64,
    breaks: &[f64],
) -> Result<InequalityRecord> {
    if !(support > 0.0 && support.is_finite()) {
        return Err(Error::InvalidParameter("support must be positive and finite".into()));
    }
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|b| *b > 0.0 && *b < support).collect();
    pts.push(support);
    pts.sort_by(f64::total_cmp);
    let g = |x: f64| -> Complex64 {
        let mut s_breaks: Vec<f64> =
            pts.iter().map(|b| b / x).filter(|s| *s > 0.0 && *s < 1.0).collect();
        s_breaks.push(1.0);
        let mut lo = 0.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for &hi in &s_breaks {
            acc += quad::integrate(|s| f(x * s) * (1.0 - s), lo, hi, QUAD_TOL);
            lo = hi;
        }
        acc
    };
    let inner = quad::integrate_log_pieces(
        |x| Complex64::new(g(x).norm_sqr(), 0.0),
        ANALYTIC_FLOOR,
        support,
        &pts,
        QUAD_TOL,
    )
    .re;
    let f0 = quad::integrate_log_pieces(&f, ANALYTIC_FLOOR, support, &pts, QUAD_TOL);
    let f1 = quad::integrate_log_pieces(|y| f(y) * y, ANALYTIC_FLOOR, support, &pts, QUAD_TOL);
    let x = support;
    // ∫_X^∞ |F₀/x − F₁/x²|² dx
    let tail = f0.norm_sqr() / x - (f0 * f1.conj()).re / (x * x) + f1.norm_sqr() / (3.0 * x * x * x);
    let f_sq = quad::integrate_log_pieces(
        |y| Complex64::new(f(y).norm_sqr(), 0.0),
        ANALYTIC_FLOOR,
        support,
        &pts,
        QUAD_TOL,
    )
    .re;
    Ok(InequalityRecord::new(
        InequalityKind::Estima,
        (inner + tail).sqrt(),
        4.0 / 3.0 * f_sq.sqrt(),
    ))
}

fn check_vanishing(
    name: &str,
    values: &[(&dyn Fn(f64) -> Complex64, &str)],
) -> Result<()> {
    let eps = 1e-10;
    for (fun, label) in values {
        let v = fun(eps).norm();
        if v > 1e-6 {
            return Err(Error::VanishingCondition(format!(
                "{name}: {label}(0+) = {v:e} does not vanish"
            )));
        }
    }
    Ok(())
}

/// Rellich: `∫|u|²/x⁴` against `(16/9)∫|u''|²` on `(0, hi)`.
/// Requires `u(0) = u'(0) = 0`; `u` should be negligible beyond `hi`.
pub fn rellich_check(
    u: &dyn Fn(f64) -> Complex64,
    du: &dyn Fn(f64) -> Complex64,
    d2u: &dyn Fn(f64) -> Complex64,
    hi: f64,
) -> Result<InequalityRecord> {
    check_vanishing("rellich", &[(u, "u"), (du, "u'")])?;
    let lhs = quad::integrate_log(
        |x| Complex64::new(u(x).norm_sqr() / x.powi(4), 0.0),
        ANALYTIC_FLOOR,
        hi,
        QUAD_TOL,
    )
    .re;
    let d2 = quad::integrate_log(|x| Complex64::new(d2u(x).norm_sqr(), 0.0), ANALYTIC_FLOOR, hi, QUAD_TOL).re;
    Ok(InequalityRecord::new(InequalityKind::Rellich, lhs, 16.0 / 9.0 * d2))
}

/// Hardy: `∫|u|²/x²` against `4∫|u'|²` on `(0, hi)`. Requires `u(0) = 0`.
pub fn hardy_check(
    u: &dyn Fn(f64) -> Complex64,
    du: &dyn Fn(f64) -> Complex64,
    hi: f64,
) -> Result<InequalityRecord> {
    check_vanishing("hardy", &[(u, "u")])?;
    let lhs = quad::integrate_log(
        |x| Complex64::new(u(x).norm_sqr() / (x * x), 0.0),
        ANALYTIC_FLOOR,
        hi,
        QUAD_TOL,
    )
    .re;
    let d1 = quad::integrate_log(|x| Complex64::new(du(x).norm_sqr(), 0.0), ANALYTIC_FLOOR, hi, QUAD_TOL).re;
    Ok(InequalityRecord::new(InequalityKind::Hardy, lhs, 4.0 * d1))
}

/// Minimal-domain bound for `f = G^{a→}_α g` on the grid.
///
/// Both norms are taken over `[x_min, a]`; there `L f = −g`, so `‖L f‖` is
/// the norm of `g` restricted to `[0, a]`.
pub fn kato_bound_check(p: &CouplingParameter, g: &GridFunction, a: f64) -> Result<InequalityRecord> {
    let region = region_classify(p.alpha());
    if region.class != Region::Inside {
        return Err(Error::OutsideRegion(format!(
            "the bound needs alpha inside the parabola, alpha = {} is {}",
            p.alpha(),
            region.class
        )));
    }
    let spec = KernelSpec::compressed_forward(*p, a)?;
    let f = apply_green(&spec, g)?;
    let w = g.grid().weights();
    let x = g.grid().x();
    let hi = nodes_up_to(x, a);
    let lhs: f64 = (0..hi).map(|j| w[j] * (f.values()[j] / (x[j] * x[j])).norm_sqr()).sum::<f64>().sqrt();
    let lf: f64 = (0..hi).map(|j| w[j] * g.values()[j].norm_sqr()).sum::<f64>().sqrt();
    Ok(InequalityRecord::new(InequalityKind::KatoBound, lhs, lf / parabola_distance(p.alpha())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_log_grid;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn param(re: f64, im: f64) -> CouplingParameter {
        CouplingParameter::from_m(Complex64::new(re, im)).unwrap()
    }

    #[test]
    fn recovers_pure_power_terms() {
        let g = make_log_grid(-12.0, 2.0, 1024).unwrap();
        let xi = CutoffSpec::default();
        let p = param(0.5, 0.0);
        let f = GridFunction::from_real_fn(&g, |x| x * xi.eval(x));
        let bc = boundary_coefficients(&p, &f, &GridFunction::zeros(&g), 0.5).unwrap();
        assert!((bc.c_plus - 1.0).norm() < 1e-4 && bc.c_minus.norm() < 1e-4, "{bc:?}");
        let p = param(0.3, 0.0);
        let f = GridFunction::from_real_fn(&g, |x| x.powf(0.2) * xi.eval(x));
        let bc = boundary_coefficients(&p, &f, &GridFunction::zeros(&g), 0.5).unwrap();
        assert!(bc.c_plus.norm() < 1e-4 && (bc.c_minus - 1.0).norm() < 1e-4, "{bc:?}");
    }

    #[test]
    fn log_basis_at_zero_order() {
        let g = make_log_grid(-12.0, 2.0, 1024).unwrap();
        let p = param(0.0, 0.0);
        let f = GridFunction::from_real_fn(&g, |x| x.sqrt() * (2.0 - 3.0 * x.ln()));
        let bc = boundary_coefficients(&p, &f, &GridFunction::zeros(&g), 0.5).unwrap();
        assert_eq!(bc.basis, BasisTag::PowerLog);
        assert!((bc.c_plus - 2.0).norm() < 1e-8 && (bc.c_minus + 3.0).norm() < 1e-8);
    }

    #[test]
    fn minimal_domain_element_has_no_boundary_terms() {
        let g = make_log_grid(-12.0, 2.0, 1024).unwrap();
        let p = param(0.4, 0.3);
        let bump = GridFunction::from_real_fn(&g, |x| (-((x.ln() + 2.0) / 0.4).powi(2)).exp());
        let f = apply_green(&KernelSpec::compressed_forward(p, 1.0).unwrap(), &bump).unwrap();
        let src = bump.scale(c(-1.0));
        let bc = boundary_coefficients(&p, &f, &src, 1.0).unwrap();
        assert!(bc.c_plus.norm() < 1e-4 && bc.c_minus.norm() < 1e-4, "{bc:?}");
        assert!(h20_membership(&f).h20_member);
    }

    #[test]
    fn membership_examples() {
        let g = make_log_grid(-12.0, 4.0, 1024).unwrap();
        let f = GridFunction::from_real_fn(&g, |x| x * x * (-x).exp());
        let r = h20_membership(&f);
        assert!(r.h20_member, "{r:?}");
        let f = GridFunction::from_real_fn(&g, |x| (-x).exp());
        let r = h20_membership(&f);
        assert!(!r.h20_member && (r.f0_limit - 1.0).norm() < 1e-6);
        let xi = CutoffSpec::default();
        let m = Complex64::new(0.3, 0.2);
        let f = GridFunction::from_fn(&g, |x| rpow(x, 0.5 + m) * xi.eval(x));
        let r = h20_membership(&f);
        assert!(!r.h20_member && r.second_derivative_diverges, "{r:?}");
    }

    #[test]
    fn decomposition_recovers_components() {
        let g = make_log_grid(-12.0, 3.0, 2048).unwrap();
        let xi = CutoffSpec::default();
        let m = Complex64::new(0.3, 0.2);
        let p = CouplingParameter::from_m(m).unwrap();
        let f = GridFunction::from_fn(&g, |x| {
            (rpow(x, 0.5 + m) + rpow(x, 0.5 - m)) * xi.eval(x) + x * x * (-x).exp()
        });
        let d = domain_decompose(&p, &f, &xi).unwrap();
        assert!((d.coefficients.c_plus - 1.0).norm() < 1e-3, "{:?}", d.coefficients);
        assert!((d.coefficients.c_minus - 1.0).norm() < 1e-3);
        let target = GridFunction::from_real_fn(&g, |x| x * x * (-x).exp());
        assert!(d.f0.sub(&target).unwrap().l2_norm() < 1e-3);
        assert_eq!(d.classification, DomainClass::MaxOnly, "{:?} {:?}", d.coefficients, d.f0_report);
        assert!(domain_decompose(&CouplingParameter::from_real_m(2.0).unwrap(), &f, &xi).is_err());
    }

    #[test]
    fn pure_power_is_hm_only() {
        let g = make_log_grid(-20.0, 2.0, 1024).unwrap();
        let xi = CutoffSpec::default();
        let p = CouplingParameter::from_real_m(0.3).unwrap();
        let f = GridFunction::from_fn(&g, |x| rpow(x, 0.5 + p.m()) * xi.eval(x));
        let d = domain_decompose(&p, &f, &xi).unwrap();
        assert_eq!(d.classification, DomainClass::HmOnly, "{:?}", d.coefficients);
        let smooth = GridFunction::from_real_fn(&g, |x| x * x * (-x).exp());
        assert_eq!(domain_decompose(&p, &smooth, &xi).unwrap().classification, DomainClass::MinDomain);
    }

    #[test]
    fn inequality_examples() {
        let ind = |x: f64| if x <= 1.0 { c(1.0) } else { c(0.0) };
        let r = estima_check_analytic(&ind, 1.0, &[]).unwrap();
        assert!((r.lhs * r.lhs - 5.0 / 6.0).abs() < 1e-8, "{r:?}");
        assert!(r.holds());
        let u = |x: f64| c(x * (-x).exp());
        let du = |x: f64| c((1.0 - x) * (-x).exp());
        let r = hardy_check(&u, &du, 80.0).unwrap();
        assert!((r.lhs - 0.5).abs() < 1e-10 && (r.rhs - 1.0).abs() < 1e-10);
        assert!((r.ratio - 0.5).abs() < 1e-8);
        let u = |x: f64| c(x * x * (-x).exp());
        let du = |x: f64| c((2.0 * x - x * x) * (-x).exp());
        let d2u = |x: f64| c((2.0 - 4.0 * x + x * x) * (-x).exp());
        let r = rellich_check(&u, &du, &d2u, 80.0).unwrap();
        assert!((r.ratio - 3.0 / 8.0).abs() < 1e-8, "{r:?}");
        let bad = |x: f64| c((-x).exp());
        assert!(matches!(hardy_check(&bad, &bad, 80.0), Err(Error::VanishingCondition(_))));
    }

    #[test]
    fn kato_bound_holds_for_bump() {
        let g = make_log_grid(-12.0, 4.0, 1024).unwrap();
        let p = CouplingParameter::from_alpha(Complex64::new(0.25, 0.5)).unwrap();
        let bump = GridFunction::from_real_fn(&g, |x| (-((x.ln() + 1.0) / 0.5).powi(2)).exp());
        let r = kato_bound_check(&p, &bump, 8.0).unwrap();
        assert!(r.ratio <= 1.0 && r.ratio > 0.0, "{r:?}");
    }
}
