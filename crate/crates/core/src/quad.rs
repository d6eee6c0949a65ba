//! Quadrature of closed-form integrands (used for reference values and the
//! analytic inequality checks). Grid-sampled data goes through [`crate::grid`].

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

const GL_POINTS: usize = 20;
/// Panel disagreement below this many ulps of the panel value is rounding noise.
const ROUNDING_FACTOR: f64 = 64.0;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(GL_POINTS).unwrap()))
        .as_node_weight_pairs()
}

fn panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    rule()
        .iter()
        .map(|&(x, w)| f(mid + half * x) * w)
        .sum::<Complex64>()
        * half
}

/// Adaptive composite Gauss–Legendre on `[a, b]`.
///
/// Panels are bisected until the two-panel estimate agrees with the one-panel
/// estimate to `tol` (absolute, scaled by panel width) or to rounding level,
/// up to depth 40.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tol: f64) -> Complex64 {
    if a == b {
        return Complex64::new(0.0, 0.0);
    }
    if b < a {
        return -integrate(f, b, a, tol);
    }
    let width = b - a;
    let mut stack = vec![(a, b, panel(&f, a, b), 0u32)];
    let mut total = Complex64::new(0.0, 0.0);
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(&f, lo, mid);
        let right = panel(&f, mid, hi);
        let err = (left + right - whole).norm();
        let rounding = ROUNDING_FACTOR * f64::EPSILON * (left.norm() + right.norm());
        if err <= tol * (hi - lo) / width || err <= rounding || depth >= 40 {
            total += left + right;
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    total
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    integrate(|x| Complex64::new(f(x), 0.0), a, b, tol).re
}

/// `∫_{x_lo}^{x_hi} f(x) dx` computed in `t = ln x`, so that integrands
/// spanning many decades are resolved uniformly.
pub fn integrate_log<F: Fn(f64) -> Complex64>(f: F, x_lo: f64, x_hi: f64, tol: f64) -> Complex64 {
    integrate(
        |t| {
            let x = t.exp();
            f(x) * x
        },
        x_lo.ln(),
        x_hi.ln(),
        tol,
    )
}

/// [`integrate_log`] split at interior breakpoints (discontinuities of `f`).
pub fn integrate_log_pieces<F: Fn(f64) -> Complex64>(
    f: F,
    x_lo: f64,
    x_hi: f64,
    breaks: &[f64],
    tol: f64,
) -> Complex64 {
    let mut pts = vec![x_lo];
    pts.extend(breaks.iter().copied().filter(|&b| b > x_lo && b < x_hi));
    pts.push(x_hi);
    pts.sort_by(f64::total_cmp);
    pts.windows(2)
        .map(|w| integrate_log(&f, w[0], w[1], tol))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate_real(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-14);
        assert!((v - 0.0).abs() < 1e-13);
    }

    #[test]
    fn exponential_tail_on_log_scale() {
        let v = integrate_log(|x| Complex64::new((-2.0 * x).exp(), 0.0), 1e-18, 60.0, 1e-15);
        assert!((v.re - 0.5).abs() < 1e-13, "{v}");
    }

    #[test]
    fn handles_breakpoints() {
        let step = |x: f64| Complex64::new(if x < 1.0 { 1.0 } else { 0.0 }, 0.0);
        let v = integrate_log_pieces(step, 0.5, 3.0, &[1.0], 1e-14);
        assert!((v.re - 0.5).abs() < 1e-13);
    }
}
