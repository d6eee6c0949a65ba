//! Property tests for the structural invariants of the kernels, norms,
//! domain tests, forms and holomorphy checks.

use std::sync::{Arc, OnceLock};

use bessel_core::domain::{boundary_coefficients, h20_membership, DomainClass};
use bessel_core::forms::transpose_gap;
use bessel_core::holo::{disk_edge_witness, random_family, circle_points};
use bessel_core::norm::{distance_estimate, region_classify, Region};
use bessel_core::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fine_grid() -> Arc<RadialGrid> {
    static G: OnceLock<Arc<RadialGrid>> = OnceLock::new();
    G.get_or_init(|| make_log_grid(-12.0, 12.0, 2048).unwrap()).clone()
}

fn form_grid() -> Arc<RadialGrid> {
    static G: OnceLock<Arc<RadialGrid>> = OnceLock::new();
    G.get_or_init(|| make_log_grid(-2.0, 3.0, 2048).unwrap()).clone()
}

fn domain_grid() -> Arc<RadialGrid> {
    static G: OnceLock<Arc<RadialGrid>> = OnceLock::new();
    G.get_or_init(|| make_log_grid(-14.0, 2.0, 1024).unwrap()).clone()
}

/// `m` with `0 ≤ Re m < 0.9`, so `α = m²` is strictly inside the parabola.
fn inside_m() -> impl Strategy<Value = Complex64> {
    (0.0..0.9f64, -1.5..1.5f64).prop_map(|(a, b)| c(a, b))
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn dilation_is_unitary(mu in -6.0..6.0f64, s in 0.3..2.0f64, amp_re in -1.0..1.0f64, amp_im in -1.0..1.0f64) {
        prop_assume!(amp_re.abs() + amp_im.abs() > 1e-3);
        let grid = fine_grid();
        let f = GridFunction::from_fn(&grid, |x| c(amp_re, amp_im) * (-((x.ln() - mu) / s).powi(2)).exp());
        let u = dilation_transform(&f);
        prop_assert!((u.l2_norm() - f.l2_norm()).abs() / f.l2_norm() <= 1e-6);
        let back = inverse_dilation(&u, &grid).unwrap();
        prop_assert!(back.sub(&f).unwrap().max_abs() <= 1e-12 * f.max_abs());
    }

    #[test]
    fn forward_kernels_even_in_m(x in 0.01..50.0f64, y in 0.01..50.0f64, re in -0.95..0.95f64, im in -2.0..2.0f64) {
        let p = CouplingParameter::from_m_extended(c(re, im)).unwrap();
        prop_assume!(!p.is_log_branch());
        let q = CouplingParameter::from_m_extended(-p.m()).unwrap();
        for kind in [KernelKind::ForwardGreen, KernelKind::Q] {
            let a = kernel_eval(&KernelSpec::new(kind, p, None).unwrap(), x, y);
            let b = kernel_eval(&KernelSpec::new(kind, q, None).unwrap(), x, y);
            prop_assert!(rel(a, b) <= 1e-15, "{kind:?}: {a} vs {b}");
        }
    }

    #[test]
    fn kernels_commute_with_conjugation(x in 0.01..50.0f64, y in 0.01..50.0f64, m in inside_m()) {
        prop_assume!(m.norm() > 1e-3);
        let p = CouplingParameter::from_m(m).unwrap();
        for kind in [KernelKind::ForwardGreen, KernelKind::Q, KernelKind::TwoSidedGreen, KernelKind::Z] {
            let a = kernel_eval(&KernelSpec::new(kind, p.conj(), None).unwrap(), x, y);
            let b = kernel_eval(&KernelSpec::new(kind, p, None).unwrap(), x, y).conj();
            prop_assert!(rel(a, b) <= 1e-14, "{kind:?}: {a} vs {b}");
        }
    }

    #[test]
    fn forward_kernel_continuous_at_zero_order(k in 2u32..11, x in 0.05..20.0f64, y in 0.05..20.0f64) {
        let alpha = 10f64.powi(-(k as i32));
        let near = kernel_eval(&KernelSpec::forward(CouplingParameter::from_alpha(c(alpha, 0.0)).unwrap()), x, y);
        let log = kernel_eval(&KernelSpec::forward(CouplingParameter::from_real_m(0.0).unwrap()), x, y);
        // sinh(ml)/(ml) − 1 = α l²/6 + O(α²)
        let l = (x / y).ln().abs();
        let bound = alpha * (x * y).sqrt() * l.powi(3) / 6.0 * 1.01 + 1e-14 * log.norm();
        prop_assert!((near - log).norm() <= bound, "err {} bound {}", (near - log).norm(), bound);
    }

    #[test]
    fn norm_formulas_agree(m in inside_m()) {
        let p = CouplingParameter::from_m(m).unwrap();
        let d = distance_estimate(&p, NormKind::Q).unwrap().value;
        let s = multiplier_sup(&p, NormKind::Q).unwrap().value;
        prop_assert!((d - s).abs() / d <= 1e-8, "{d} vs {s}");
    }

    #[test]
    fn norms_depend_only_on_alpha(re in -0.9..0.9f64, im in -1.5..1.5f64) {
        prop_assume!(re.abs() > 1e-3);
        let p = CouplingParameter::from_m_extended(c(re, im)).unwrap();
        let q = CouplingParameter::from_m_extended(-p.m()).unwrap();
        for kind in [NormKind::Q] {
            let a = distance_estimate(&p, kind).unwrap().value;
            let b = distance_estimate(&q, kind).unwrap().value;
            prop_assert_eq!(a, b);
            let a = multiplier_sup(&p, kind).unwrap().value;
            let b = multiplier_sup(&q, kind).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn distance_vanishes_exactly_on_parabola(omega in -5.0..5.0f64, shift_re in -2.0..2.0f64, shift_im in -2.0..2.0f64) {
        let on = (c(1.0, omega)) * c(1.0, omega);
        let r = region_classify(on);
        prop_assert_eq!(r.class, Region::Boundary);
        prop_assert!(parabola_distance(on) <= 1e-12);
        let off = on + c(shift_re, shift_im);
        let r = region_classify(off);
        prop_assert_eq!(r.distance > 1e-12, r.class != Region::Boundary);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn transpose_relation_on_bumps(re in -2.0..2.0f64, im in -2.0..2.0f64, lo in 0.8..1.5f64, w in 0.5..1.5f64) {
        let grid = form_grid();
        let f = Bump::new(lo, lo + w, vec![c(1.0, 0.0), c(0.3, -0.2)]).unwrap().sample(&grid);
        let g = Bump::new(1.0, 2.5, vec![c(0.5, 0.5), c(-1.0, 0.0)]).unwrap().sample(&grid);
        let gap = transpose_gap(&FirstOrderSpec::plus(c(re, im)), &f, &g).unwrap();
        prop_assert!(gap <= 1e-6, "gap {gap}");
    }

    #[test]
    fn forms_are_homogeneous_of_degree_two(lambda in 0.7..1.4f64, re in -0.5..2.0f64, im in -1.0..1.0f64) {
        let grid = form_grid();
        let fb = Bump::new(1.0, 2.0, vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let gb = Bump::new(1.2, 2.2, vec![c(0.4, 0.1), c(1.0, 0.0)]).unwrap();
        let s = FirstOrderSpec::plus(c(re, im));
        let form = |f: &Bump, g: &Bump| {
            bilinear_pairing(&apply_first_order(&s, &f.sample(&grid)), &apply_first_order(&s, &g.sample(&grid))).unwrap()
        };
        let base = form(&fb, &gb);
        let scaled = form(&fb.dilated(lambda), &gb.dilated(lambda));
        prop_assert!((scaled - base * lambda * lambda).norm() <= 1e-6 * base.norm().max(1.0));
    }

    #[test]
    fn both_factorizations_agree_for_real_order(m in 1.0..3.0f64) {
        let grid = form_grid();
        let f = Bump::new(1.0, 2.0, vec![c(1.0, 0.0), c(0.0, 2.0)]).unwrap().sample(&grid);
        let d = two_factorizations_agree(c(m, 0.0), &f, &f).unwrap();
        prop_assert!(d <= 1e-6, "gap {d}");
        let real = Bump::plain(1.0, 2.0).unwrap().sample(&grid);
        prop_assert!(positivity_check(m, &real).unwrap() >= -1e-10);
    }

    #[test]
    fn matrix_families_satisfy_kato_rellich(seed in 0u64..1000, target in 0.2..0.8f64) {
        let fam = random_family(12, target, seed).unwrap();
        let zs = circle_points(0.9 * fam.radius(), 6, 0.3);
        let rep = kato_rellich_check(&fam, &zs, seed).unwrap();
        prop_assert!(rep.max_polynomial_residual <= 1e-12);
        prop_assert!(rep.all_bounds_hold);
        let (_, edge) = disk_edge_witness(&fam, 0.1).unwrap();
        prop_assert!(edge.violated, "{edge:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    /// `G^{a→}g` belongs to `H₀²` for every `α` inside the parabola.
    #[test]
    fn minimal_domain_is_independent_of_alpha(m in inside_m()) {
        let grid = domain_grid();
        let g = GridFunction::from_real_fn(&grid, |x| (-((x.ln() + 1.0) / 0.4).powi(2)).exp());
        let p = CouplingParameter::from_m(m).unwrap();
        let f = apply_green(&KernelSpec::compressed_forward(p, 1.0).unwrap(), &g).unwrap();
        let r = h20_membership(&f);
        prop_assert!(r.h20_member, "{r:?}");
        let bc = boundary_coefficients(&p, &f, &g.scale(c(-1.0, 0.0)), 1.0).unwrap();
        prop_assert!(bc.c_plus.norm().max(bc.c_minus.norm()) <= 1e-4, "{bc:?}");
    }
}

#[test]
fn nullspace_residual_converges() {
    let m = c(0.3, 0.4);
    let p = CouplingParameter::from_m(m).unwrap();
    let residual = |n: usize| {
        let grid = make_log_grid(-3.0, 3.0, n).unwrap();
        [0.5 + m, 0.5 - m]
            .iter()
            .map(|e| {
                let f = GridFunction::from_fn(&grid, |x| rpow(x, *e));
                let lf = apply_bessel(&p, &f);
                (8..n - 8).map(|j| lf.values()[j].norm() / (f.values()[j].norm() / grid.x()[j].powi(2))).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    };
    assert!(residual(256) < 1e-9);
    let (coarse, fine) = (residual(32), residual(64));
    assert!((coarse / fine).log2() > 4.0, "{coarse} -> {fine}");
}

#[test]
fn svd_estimate_settles_as_n_doubles() {
    let grid = |n| make_log_grid(-12.0, 12.0, n).unwrap();
    for alpha in [c(0.25, 0.0), c(-0.5, 1.0), c(0.5, 0.5), c(0.0, 0.0), c(-2.0, 0.3)] {
        let p = CouplingParameter::from_alpha(alpha).unwrap();
        let exact = distance_estimate(&p, NormKind::Q).unwrap().value;
        let spec = KernelSpec::q(p);
        let v: Vec<f64> = [128, 256, 512].iter().map(|&n| operator_norm_svd(&discretize(&spec, &grid(n)).unwrap()).unwrap().value).collect();
        let gap = |x: f64| (x - exact).abs() / exact;
        assert!((v[2] - v[1]).abs() / exact < gap(v[2]), "alpha {alpha}: {v:?} exact {exact}");
        assert!(gap(v[2]) <= gap(v[1]) && gap(v[1]) <= gap(v[0]), "alpha {alpha}: {v:?}");
    }
}

#[test]
fn power_of_other_order_leaves_domain() {
    let grid = domain_grid();
    let xi = CutoffSpec::default();
    let (m1, m2) = (c(0.3, 0.0), c(0.6, 0.2));
    let f = GridFunction::from_fn(&grid, |x| rpow(x, 0.5 + m1) * xi.eval(x));
    let d = domain_decompose(&CouplingParameter::from_m(m2).unwrap(), &f, &xi).unwrap();
    assert_eq!(d.classification, DomainClass::Outside, "{:?}", d.coefficients);
    let same = domain_decompose(&CouplingParameter::from_m(m1).unwrap(), &f, &xi).unwrap();
    assert_eq!(same.classification, DomainClass::HmOnly);
}

#[test]
fn two_sided_element_is_in_minimal_domain_beyond_one() {
    // f' ~ x^{m − 1/2} reaches 0 slowly, so the floor has to be deep
    let grid = make_log_grid(-30.0, 2.0, 1024).unwrap();
    let g = GridFunction::from_real_fn(&grid, |x| (-((x.ln() + 1.0) / 0.4).powi(2)).exp());
    for m in [c(1.5, 0.0), c(1.2, 0.7)] {
        let p = CouplingParameter::from_m(m).unwrap();
        let f = apply_green(&KernelSpec::compressed_two_sided(p, 1.0).unwrap(), &g).unwrap();
        let r = h20_membership(&f);
        assert!(r.h20_member, "m = {m}: {r:?}");
    }
}
