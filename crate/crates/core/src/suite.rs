//! The acceptance suite: one deterministic check per criterion, collected
//! into a JSON report.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::critical::{
    divergence_profile, ellr1_residual, g_tau, g_tau_norm_sq, lower_bound_curve, pathological_function,
    window_drift,
};
use crate::domain::{
    boundary_coefficients, estima_check, estima_check_analytic, hardy_check, kato_bound_check, rellich_check,
};
use crate::error::Result;
use crate::forms::{
    factorization_check, positivity_check, transpose_gap, two_factorizations_agree, Bump, FactorSign,
    FirstOrderSpec,
};
use crate::grid::{make_log_grid, CutoffSpec, GridFunction, RadialGrid};
use crate::holo::{
    circle_points, conjugation_symmetry, disk_edge_witness, family_analyticity, kato_rellich_check, random_family,
};
use crate::kernels::{apply_green, green_residual, KernelKind, KernelSpec};
use crate::norm::{distance_estimate, multiplier_sup, norm_report, operator_norm_svd, relative_gap, NormKind};
use crate::param::{rpow, CouplingParameter};

/// Outcome of one criterion. Metrics are keyed by name so the JSON order is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
    pub failures: Vec<String>,
}

impl CriterionResult {
    fn new(id: u8, title: &str) -> Self {
        Self { id, title: title.to_string(), passed: true, metrics: BTreeMap::new(), failures: vec![] }
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    fn require(&mut self, label: impl Into<String>, ok: bool) {
        if !ok {
            self.passed = false;
            self.failures.push(label.into());
        }
    }

    fn finish(mut self, outcome: Result<()>) -> Self {
        if let Err(e) = outcome {
            self.require(format!("error: {e}"), false);
        }
        self
    }

    /// `PASS`/`FAIL` line for terminal output.
    pub fn summary_line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut line = format!("criterion {:>2} {status}: {}", self.id, self.title);
        if !self.failures.is_empty() {
            line.push_str(&format!(" [{}]", self.failures.join("; ")));
        }
        line
    }
}

fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn config_grid(cfg: &RunConfig, n: usize) -> Result<Arc<RadialGrid>> {
    make_log_grid(cfg.t_min, cfg.t_max, n)
}

/// Order `m = u + iv` with `0 ≤ u < 0.9`, `|v| ≤ 1.5`; `α = m²` is inside the parabola.
fn random_inside_m(rng: &mut ChaCha8Rng) -> Complex64 {
    cplx(rng.random_range(0.0..0.9), rng.random_range(-1.5..1.5))
}

fn log_bump(center: f64, width: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| (-((x.ln() - center) / width).powi(2) / 2.0).exp()
}

/// 1. `‖Q_{1/4}‖ = 4/3` by all three methods.
pub fn criterion_1(cfg: &RunConfig) -> CriterionResult {
    let mut c = CriterionResult::new(1, "norm of Q at alpha = 1/4");
    let out = (|| {
        let exact = 4.0 / 3.0;
        let p = CouplingParameter::from_alpha(cplx(0.25, 0.0))?;
        let rep = norm_report(&p, NormKind::Q, &config_grid(cfg, cfg.n)?)?;
        let svd_gap = relative_gap(rep.discretized_svd.value, exact);
        c.metric("svd", rep.discretized_svd.value);
        c.metric("svd_gap", svd_gap);
        if let Some(r) = rep.discretized_svd.refinement {
            c.metric("svd_coarse", r.value_coarse);
        }
        c.metric("multiplier_sup", rep.multiplier_sup.value);
        c.metric("inverse_distance", rep.distance_closed_form.value);
        c.require(format!("svd gap {svd_gap:.4} > {}", cfg.tol("norm_svd")), svd_gap <= cfg.tol("norm_svd"));
        for (name, v) in [("multiplier", rep.multiplier_sup.value), ("distance", rep.distance_closed_form.value)] {
            let gap = relative_gap(v, exact);
            c.metric(&format!("{name}_gap"), gap);
            c.require(format!("{name} gap {gap:.2e}"), gap <= cfg.tol("norm_formula"));
        }
        Ok(())
    })();
    c.finish(out)
}

pub const FORMULA_SAMPLES: usize = 50;
pub const SVD_SAMPLES: usize = 5;

/// 2. Multiplier sup against inverse distance for random `α`; SVD on a few.
pub fn criterion_2(cfg: &RunConfig) -> CriterionResult {
    let mut c = CriterionResult::new(2, "norm formula agreement for random alpha");
    let out = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let grid = config_grid(cfg, cfg.n)?;
        let (mut worst_formula, mut worst_svd) = (0.0f64, 0.0f64);
        for k in 0..FORMULA_SAMPLES {
            let p = CouplingParameter::from_m(random_inside_m(&mut rng))?;
            let dist = distance_estimate(&p, NormKind::Q)?.value;
            let mult = multiplier_sup(&p, NormKind::Q)?.value;
            worst_formula = worst_formula.max(relative_gap(mult, dist));
            if k < SVD_SAMPLES {
                let spec = KernelSpec::q(p);
                let svd = operator_norm_svd(&crate::kernels::discretize(&spec, &grid)?)?.value;
                let gap = relative_gap(svd, dist);
                c.metric(&format!("svd_gap_{k}"), gap);
                c.metric(&format!("inverse_distance_{k}"), dist);
                c.require(format!("sample {k} (alpha = {:.3}) svd gap {gap:.4}", p.alpha()), gap <= cfg.tol("norm_svd_cross"));
                worst_svd = worst_svd.max(gap);
            }
        }
        c.metric("max_formula_gap", worst_formula);
        c.metric("max_svd_gap", worst_svd);
        c.require(format!("formula gap {worst_formula:.2e}"), worst_formula <= cfg.tol("norm_agreement"));
        Ok(())
    })();
    c.finish(out)
}

/// 3. Three-method agreement for `Z_m`.
pub fn criterion_3(cfg: &RunConfig) -> CriterionResult {
    let mut c = CriterionResult::new(3, "norm of Z for Re(m) > 1");
    let out = (|| {
        let grid = config_grid(cfg, cfg.n)?;
        for (k, m) in [cplx(1.5, 0.0), cplx(2.0, 0.0), cplx(2.0, 3.0)].into_iter().enumerate() {
            let rep = norm_report(&CouplingParameter::from_m(m)?, NormKind::Z, &grid)?;
            let formula = relative_gap(rep.multiplier_sup.value, rep.distance_closed_form.value);
            let svd = relative_gap(rep.discretized_svd.value, rep.distance_closed_form.value);
            c.metric(&format!("inverse_distance_{k}"), rep.distance_closed_form.value);
            c.metric(&format!("svd_{k}"), rep.discretized_svd.value);
            c.metric(&format!("svd_gap_{k}"), svd);
            c.metric(&format!("formula_gap_{k}"), formula);
            c.require(format!("m = {m} formula gap {formula:.2e}"), formula <= cfg.tol("norm_agreement"));
            c.require(format!("m = {m} svd gap {svd:.4}"), svd <= cfg.tol("norm_svd_cross"));
        }
        Ok(())
    })();
    c.finish(out)
}

/// Parameters for the Green identity: two inside, two on, two outside the parabola.
pub const GREEN_ALPHAS: [(f64, f64); 6] = [(0.25, 1.0), (0.0, 0.5), (-3.0, 4.0), (1.0, 0.0), (4.0, 0.0), (2.0, 1.5)];

/// 4. `L G g = ±g` at `2n` nodes, and the convergence rate from `n` to `2n`.
pub fn criterion_4(cfg: &RunConfig) -> CriterionResult {
    let mut c = CriterionResult::new(4, "Green identity residual and convergence");
    let out = (|| {
        let coarse = config_grid(cfg, cfg.n)?;
        let fine = config_grid(cfg, 2 * cfg.n)?;
        let bump = |x: f64| (-8.0 * (x - 1.0) * (x - 1.0)).exp();
        let (g_coarse, g_fine) = (GridFunction::from_real_fn(&coarse, bump), GridFunction::from_real_fn(&fine, bump));
        let (mut worst, mut slowest) = (0.0f64, f64::INFINITY);
        for (k, (re, im)) in GREEN_ALPHAS.iter().enumerate() {
            let p = CouplingParameter::from_alpha(cplx(*re, *im))?;
            for kind in [KernelKind::ForwardGreen, KernelKind::TwoSidedGreen] {
                let spec = KernelSpec::new(kind, p, None)?;
                let r_fine = green_residual(&spec, &g_fine)?;
                let r_coarse = green_residual(&spec, &g_coarse)?;
                let order = (r_coarse / r_fine).log2();
                let tag = if kind.is_two_sided() { "two_sided" } else { "forward" };
                c.metric(&format!("residual_{tag}_{k}"), r_fine);
                c.metric(&format!("order_{tag}_{k}"), order);
                c.require(format!("{tag} alpha = {re}+{im}i residual {r_fine:.2e}"), r_fine <= cfg.tol("green_residual"));
                c.require(format!("{tag} alpha = {re}+{im}i order {order:.2}"), order >= cfg.tol("green_order"));
                worst = worst.max(r_fine);
                slowest = slowest.min(order);
            }
        }
        c.metric("max_residual", worst);
        c.metric("min_order", slowest);
        Ok(())
    })();
    c.finish(out)
}

/// 5. Boundary coefficients of `x^{1/2+m}ξ` and of minimal-domain elements.
pub fn criterion_5(cfg: &RunConfig) -> CriterionResult {
    let mut c = CriterionResult::new(5, "boundary coefficient recovery");
    let tol = cfg.tol("coefficient");
    let out = (|| {
        let grid = make_log_grid(-12.0, 2.0, 1024)?;
        let xi = CutoffSpec::default();
        let zero = GridFunction::zeros(&grid);
        for (k, m) in [cplx(0.3, 0.0), cplx(0.5, 0.2), cplx(1.5, 0.0)].into_iter().enumerate() {
            let p = CouplingParameter::from_m(m)?;
            let f = GridFunction::from_fn(&grid, |x| rpow(x, 0.5 + m) * xi.eval(x));
            let bc = boundary_coefficients(&p, &f, &zero, xi.plateau_end)?;
            let (dp, dm) = ((bc.c_plus - 1.0).norm(), bc.c_minus.norm());
            c.metric(&format!("power_c_plus_gap_{k}"), dp);
            c.metric(&format!("power_c_minus_{k}"), dm);
            c.require(format!("m = {m}: |c+ - 1| = {dp:.2e}, |c-| = {dm:.2e}"), dp <= tol && dm <= tol);
        }
        // G_α^{a→} g is a minimal-domain element only for α inside the parabola
        let bump = GridFunction::from_real_fn(&grid, log_bump(-2.0, 0.4 / 2f64.sqrt()));
        for (k, m) in [cplx(0.3, 0.0), cplx(0.5, 0.2), cplx(0.8, -0.5)].into_iter().enumerate() {
            let p = CouplingParameter::from_m(m)?;
            let f = apply_green(&KernelSpec::compressed_forward(p, 1.0)?, &bump)?;
            let bc = boundary_coefficients(&p, &f, &bump.scale(cplx(-1.0, 0.0)), 1.0)?;
            let worst = bc.c_plus.norm().max(bc.c_minus.norm());
            c.metric(&format!("minimal_coefficients_{k}"), worst);
            c.require(format!("minimal m = {m}: coefficients {worst:.2e}"), worst <= tol);
            // an H₀² element built independently of the Green operator, with L f in closed form
            let shift = p.alpha() - 0.25;
            let f = GridFunction::from_real_fn(&grid, |x| x * x * (-x).exp());
            let lf = GridFunction::from_fn(&grid, |x| (shift - (2.0 - 4.0 * x + x * x)) * (-x).exp());
            let bc = boundary_coefficients(&p, &f, &lf, 1.0)?;
            let worst = bc.c_plus.norm().max(bc.c_minus.norm());
            c.metric(&format!("h20_coefficients_{k}"), worst);
            c.require(format!("x^2 e^-x m = {m}: coefficients {worst:.2e}"), worst <= tol);
        }
        Ok(())
    })();
    c.finish(out)
}

pub const INEQUALITY_SAMPLES: usize = 100;
pub const KATO_SAMPLES: usize = 20;

/// 6. Estima, Rellich, Hardy and the minimal-domain bound.
pub fn criterion_6(cfg: &RunConfig) -> CriterionResult {
    let mut c = CriterionResult::new(6, "inequality suite");
    let slack = 1.0 + cfg.tol("inequality");
    let exact = cfg.tol("closed_form");
    let out = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6);
        let grid = config_grid(cfg, cfg.n)?;

        let mut worst = 0.0f64;
        for _ in 0..INEQUALITY_SAMPLES {
            let terms: Vec<(Complex64, f64, f64)> = (0..3)
                .map(|_| {
                    let amp = cplx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    (amp, rng.random_range(-6.0..4.0), rng.random_range(0.3..1.2))
                })
                .collect();
            let f = GridFunction::from_fn(&grid, |x| {
                terms.iter().map(|(a, mu, s)| a * log_bump(*mu, *s)(x)).sum()
            });
            worst = worst.max(estima_check(&f)?.ratio);
        }
        c.metric("estima_max_ratio", worst);
        c.require(format!("estima ratio {worst:.6}"), worst <= slack);
        let ind = |x: f64| if x <= 1.0 { cplx(1.0, 0.0) } else { cplx(0.0, 0.0) };
        let r = estima_check_analytic(&ind, 1.0, &[])?;
        let gap = (r.lhs * r.lhs - 5.0 / 6.0).abs();
        c.metric("estima_indicator_gap", gap);
        c.require(format!("indicator |g|^2 gap {gap:.2e}"), gap <= exact);

        let mut worst = 0.0f64;
        for _ in 0..INEQUALITY_SAMPLES {
            let beta = rng.random_range(0.5..2.0);
            let a: Vec<Complex64> = (0..3).map(|_| cplx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            // u = Σ a_k x^{k+2} e^{−βx}
            let u = |x: f64| a.iter().enumerate().map(|(k, ak)| ak * x.powi(k as i32 + 2)).sum::<Complex64>() * (-beta * x).exp();
            let du = |x: f64| {
                a.iter()
                    .enumerate()
                    .map(|(k, ak)| {
                        let p = (k + 2) as f64;
                        ak * (p * x.powf(p - 1.0) - beta * x.powf(p))
                    })
                    .sum::<Complex64>()
                    * (-beta * x).exp()
            };
            let d2u = |x: f64| {
                a.iter()
                    .enumerate()
                    .map(|(k, ak)| {
                        let p = (k + 2) as f64;
                        ak * (p * (p - 1.0) * x.powf(p - 2.0) - 2.0 * beta * p * x.powf(p - 1.0) + beta * beta * x.powf(p))
                    })
                    .sum::<Complex64>()
                    * (-beta * x).exp()
            };
            worst = worst.max(rellich_check(&u, &du, &d2u, 80.0 / beta)?.ratio);
        }
        c.metric("rellich_max_ratio", worst);
        c.require(format!("rellich ratio {worst:.6}"), worst <= slack);
        let u = |x: f64| cplx(x * x * (-x).exp(), 0.0);
        let du = |x: f64| cplx((2.0 * x - x * x) * (-x).exp(), 0.0);
        let d2u = |x: f64| cplx((2.0 - 4.0 * x + x * x) * (-x).exp(), 0.0);
        let gap = (rellich_check(&u, &du, &d2u, 80.0)?.ratio - 3.0 / 8.0).abs();
        c.metric("rellich_example_gap", gap);
        c.require(format!("rellich example gap {gap:.2e}"), gap <= exact);

        let u = |x: f64| cplx(x * (-x).exp(), 0.0);
        let du = |x: f64| cplx((1.0 - x) * (-x).exp(), 0.0);
        let gap = (hardy_check(&u, &du, 80.0)?.ratio - 0.5).abs();
        c.metric("hardy_example_gap", gap);
        c.require(format!("hardy example gap {gap:.2e}"), gap <= exact);

        let mut worst = 0.0f64;
        for _ in 0..KATO_SAMPLES {
            let p = CouplingParameter::from_m(random_inside_m(&mut rng))?;
            let g = GridFunction::from_real_fn(&grid, log_bump(rng.random_range(-4.0..1.5), rng.random_range(0.3..1.0)));
            worst = worst.max(kato_bound_check(&p, &g, 8.0)?.ratio);
        }
        c.metric("kato_bound_max_ratio", worst);
        c.require(format!("kato bound ratio {worst:.6}"), worst <= 1.0);
        Ok(())
    })();
    c.finish(out)
}

pub const TAU_SET: [f64; 3] = [0.6, 0.75, 0.9];

/// 7. The `Re m = 1` family: norms, divergence, and the drifting coefficient.
pub fn criterion_7(cfg: &RunConfig) -> CriterionResult {
    let mut c = CriterionResult::new(7, "critical-line pathology");
    let out = (|| {
        let grid = make_log_grid(-40.0, 0.05, 2 * cfg.n)?;
        let x_floor = grid.x_min();
        for (k, tau) in TAU_SET.iter().enumerate() {
            let r = g_tau_norm_sq(*tau, x_floor)?;
            c.metric(&format!("norm_gap_{k}"), r.relative_gap);
            c.require(format!("tau = {tau} norm gap {:.2e}", r.relative_gap), r.relative_gap <= cfg.tol("tau_norm"));
        }

        let xs: Vec<f64> = (0..10).map(|k| (-(4.0 + 3.8 * k as f64)).exp()).collect();
        let sigma = TAU_SET[0];
        for (k, tau) in TAU_SET.iter().enumerate() {
            let t = g_tau(*tau, cplx(1.0, 1.0), &grid)?;
            let d = divergence_profile(&t, &xs)?;
            c.metric(&format!("profile_gap_{k}"), d.max_relative_gap);
            c.require(format!("tau = {tau} profile gap {:.2e}", d.max_relative_gap), d.max_relative_gap <= cfg.tol("profile"));
            if *tau == sigma {
                let below = xs.iter().zip(&d.integral_values).filter(|(x, _)| **x <= 1e-4);
                let margin = below
                    .map(|(x, v)| v.re - lower_bound_curve(sigma, *x))
                    .fold(f64::INFINITY, f64::min);
                c.metric("lower_bound_margin", margin);
                c.require(format!("lower bound margin {margin:.3e}"), margin >= 0.0);
            }
            let lim = ellr1_residual(&t, 1.0, &[1e-3])?;
            c.metric(&format!("limit_residual_{k}"), lim.residual[0]);
            c.require(format!("tau = {tau} limit residual"), lim.residual[0] <= lim.bound[0] + 1e-6);
        }

        let windows: Vec<f64> = (0..9).map(|k| 10f64.powf(-2.0 - 0.5 * k as f64)).collect();
        let xi = CutoffSpec::default();
        for (j, m) in [cplx(1.0, 0.0), cplx(1.0, 1.0)].into_iter().enumerate() {
            for (k, tau) in TAU_SET.iter().enumerate() {
                let t = g_tau(*tau, m, &grid)?;
                let d = window_drift(&pathological_function(&t, &xi)?, m, *tau, &windows)?;
                c.metric(&format!("drift_correlation_{j}_{k}"), d.correlation);
                c.require(
                    format!("m = {m} tau = {tau} correlation {:.4}", d.correlation),
                    d.correlation >= cfg.tol("correlation") && d.diverges,
                );
            }
            let ctrl = GridFunction::from_fn(&grid, |x| rpow(x, 0.5 + m) * xi.eval(x));
            let d = window_drift(&ctrl, m, TAU_SET[1], &windows)?;
            c.metric(&format!("control_spread_{j}"), d.relative_spread);
            c.require(format!("m = {m} control converges"), d.converges && !d.diverges);
        }
        Ok(())
    })();
    c.finish(out)
}

pub const FORM_ORDERS: [(f64, f64); 6] = [(0.5, 0.0), (1.0, 1.0), (0.3, 0.0), (2.0, 0.0), (-0.5, 0.5), (0.2, -1.3)];
pub const POSITIVITY_ORDERS: [f64; 5] = [-0.5, 0.0, 0.5, 1.0, 2.0];

/// Grid for the form checks: interior bumps on `[0.8, 2.5]` need a fine `t` step.
pub fn form_grid(cfg: &RunConfig) -> Result<Arc<RadialGrid>> {
    make_log_grid(-2.0, 3.0, 2 * cfg.n)
}

/// 8. Factorized forms, transpose relation and positivity.
pub fn criterion_8(cfg: &RunConfig) -> CriterionResult {
    let mut c = CriterionResult::new(8, "factorizations and bilinear forms");
    let tol = cfg.tol("form");
    let out = (|| {
        let grid = form_grid(cfg)?;
        let f = Bump::new(1.0, 2.0, vec![cplx(1.0, 0.0), cplx(0.0, 2.0)])?.sample(&grid);
        let g = Bump::new(0.8, 2.5, vec![cplx(0.5, 0.5), cplx(-1.0, 0.0), cplx(0.2, 0.0)])?.sample(&grid);
        let (mut worst_form, mut worst_two, mut worst_transpose) = (0.0f64, 0.0f64, 0.0f64);
        for (re, im) in FORM_ORDERS {
            let m = cplx(re, im);
            let sign = if re > 0.0 { FactorSign::Minus } else { FactorSign::Plus };
            let r = factorization_check(m, sign, &f, &g)?;
            worst_form = worst_form.max(r.max_deviation());
            c.require(format!("m = {m} form deviation {:.2e}", r.max_deviation()), r.max_deviation() <= tol);
            if re > 0.0 {
                let d = two_factorizations_agree(m, &f, &g)?;
                worst_two = worst_two.max(d);
                c.require(format!("m = {m} two forms {d:.2e}"), d <= tol);
            }
            let d = transpose_gap(&FirstOrderSpec::plus(m), &f, &g)?;
            worst_transpose = worst_transpose.max(d);
            c.require(format!("m = {m} transpose {d:.2e}"), d <= tol);
        }
        c.metric("max_form_deviation", worst_form);
        c.metric("max_two_forms_gap", worst_two);
        c.metric("max_transpose_gap", worst_transpose);
        let real = Bump::plain(1.0, 2.0)?.sample(&grid);
        let mut lowest = f64::INFINITY;
        for m in POSITIVITY_ORDERS {
            let v = positivity_check(m, &real)?;
            lowest = lowest.min(v);
            c.require(format!("m = {m} positivity {v:.3e}"), v >= -cfg.tol("positivity"));
        }
        c.metric("min_positivity", lowest);
        Ok(())
    })();
    c.finish(out)
}

pub const FAMILY_SIZE: usize = 50;
pub const ANALYTICITY_CENTERS: [(f64, f64); 3] = [(0.25, 0.0), (0.0, 0.0), (0.0, 0.5)];

/// 9. Matrix Kato–Rellich checks, analyticity in `α`, conjugation symmetry.
pub fn criterion_9(cfg: &RunConfig) -> CriterionResult {
    let mut c = CriterionResult::new(9, "holomorphic families");
    let out = (|| {
        let fam = random_family(FAMILY_SIZE, 0.5, cfg.seed)?;
        let zs = circle_points(0.9 * fam.radius(), 8, 0.0);
        let rep = kato_rellich_check(&fam, &zs, cfg.seed)?;
        c.metric("relative_bound", fam.c);
        c.metric("polynomial_residual", rep.max_polynomial_residual);
        c.metric("cauchy_riemann_residual", rep.max_cauchy_riemann_residual);
        c.require(format!("polynomial residual {:.2e}", rep.max_polynomial_residual), rep.max_polynomial_residual <= cfg.tol("polynomial"));
        c.require("cauchy-riemann residual", rep.max_cauchy_riemann_residual <= cfg.tol("cauchy_riemann"));
        c.require("graph-norm ratio bounds", rep.all_bounds_hold);
        let (_, edge) = disk_edge_witness(&fam, 0.1)?;
        c.metric("edge_witness_ratio", edge.ratio);
        c.metric("edge_witness_bound", edge.lower_bound);
        c.require("edge witness violates the in-disk bound", edge.violated);

        let grid = make_log_grid(-8.0, 1.0, 256)?;
        let g = GridFunction::from_real_fn(&grid, |x| (-20.0 * (x - 0.5) * (x - 0.5)).exp());
        for (k, (re, im)) in ANALYTICITY_CENTERS.iter().enumerate() {
            let r = family_analyticity(cplx(*re, *im), 0.1, &g, 1.0)?;
            c.metric(&format!("cauchy_residual_{k}"), r.cauchy_residual);
            c.metric(&format!("taylor_decay_{k}"), r.taylor_decay_ratio);
            c.require(format!("alpha0 = {re}+{im}i cauchy {:.2e}", r.cauchy_residual), r.cauchy_residual <= cfg.tol("cauchy"));
            c.require(format!("alpha0 = {re}+{im}i taylor decay"), r.taylor_decay_ratio < 1.0);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9);
        let pts: Vec<(f64, f64)> = (0..100).map(|_| (rng.random_range(0.01..2.0), rng.random_range(0.01..2.0))).collect();
        let p = CouplingParameter::from_m(cplx(0.3, 0.7))?;
        let mut worst = 0.0f64;
        for spec in [KernelSpec::forward(p), KernelSpec::q(p), KernelSpec::two_sided(p)?, KernelSpec::z(p)?] {
            worst = worst.max(conjugation_symmetry(&spec, &pts)?);
        }
        c.metric("conjugation", worst);
        c.require(format!("conjugation {worst:.2e}"), worst <= cfg.tol("conjugation"));
        Ok(())
    })();
    c.finish(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
    pub passed: usize,
    pub total: usize,
    pub criteria: Vec<CriterionResult>,
}

pub type CriterionFn = fn(&RunConfig) -> CriterionResult;

pub const CRITERIA: [CriterionFn; 9] = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
];

/// Runs criteria 1 to 9, returning the report and the wall time of each.
pub fn run_suite_timed(cfg: &RunConfig) -> (SuiteReport, Vec<Duration>) {
    let mut criteria = Vec::with_capacity(CRITERIA.len());
    let mut times = Vec::with_capacity(CRITERIA.len());
    for run in CRITERIA {
        let start = Instant::now();
        criteria.push(run(cfg));
        times.push(start.elapsed());
    }
    let report = SuiteReport {
        seed: cfg.seed,
        t_min: cfg.t_min,
        t_max: cfg.t_max,
        n: cfg.n,
        passed: criteria.iter().filter(|c| c.passed).count(),
        total: criteria.len(),
        criteria,
    };
    (report, times)
}

pub fn run_suite(cfg: &RunConfig) -> SuiteReport {
    run_suite_timed(cfg).0
}

/// The suite report as pretty JSON; identical inputs give identical bytes.
pub fn report_json(report: &SuiteReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}
