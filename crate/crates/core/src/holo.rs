//! Holomorphic families at matrix scale, and analyticity of `α ↦ G_α^{a→} g`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, RadialGrid};
use crate::kernels::{apply_green, kernel_eval, KernelSpec};
use crate::norm::{parabola_distance, region_classify, Region};
use crate::param::CouplingParameter;

type CMatrix = DMatrix<Complex64>;
type CVector = nalgebra::DVector<Complex64>;

/// Relative singular-value floor below which the base operator counts as singular.
pub const RANK_TOLERANCE: f64 = 1e-12;
pub const CONTOUR_POINTS: usize = 64;
pub const TAYLOR_TERMS: usize = 8;
pub const PROBE_NODES: usize = 16;

/// `A + zB` with `‖Bv‖ ≤ c‖Av‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFamily {
    pub a: CMatrix,
    pub b: CMatrix,
    pub c: f64,
}

impl MatrixFamily {
    pub fn new(a: CMatrix, b: CMatrix) -> Result<Self> {
        let c = relative_bound(&a, &b)?;
        Ok(Self { a, b, c })
    }

    /// Radius `1/c` of the disk where the family is guaranteed closed.
    pub fn radius(&self) -> f64 {
        if self.c == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.c
        }
    }

    pub fn at(&self, z: Complex64) -> CMatrix {
        &self.a + &self.b * z
    }
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * s, im * s)
    })
}

fn gaussian_vector(n: usize, rng: &mut ChaCha8Rng) -> CVector {
    CVector::from_iterator(n, gaussian_matrix(n, 1, rng).iter().copied())
}

/// Seeded `n × n` family with complex Gaussian entries, `B` rescaled so the
/// relative bound equals `target_c`.
pub fn random_family(n: usize, target_c: f64, seed: u64) -> Result<MatrixFamily> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = gaussian_matrix(n, n, &mut rng);
    let b = gaussian_matrix(n, n, &mut rng);
    let c0 = relative_bound(&a, &b)?;
    let b = b * Complex64::new(target_c / c0, 0.0);
    MatrixFamily::new(a, b)
}

fn pseudo_inverse(a: &CMatrix) -> Result<CMatrix> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if a.nrows() < a.ncols() || !(smin > RANK_TOLERANCE * smax) {
        return Err(Error::RankDeficient { sigma_min: smin });
    }
    svd.pseudo_inverse(0.0).map_err(|e| Error::Numerical(e.to_string()))
}

/// Smallest `c` with `‖Bv‖ ≤ c‖Av‖`, i.e. `‖B A⁺‖₂` for full-column-rank `A`.
pub fn relative_bound(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.ncols() != b.ncols() {
        return Err(Error::InvalidParameter(format!(
            "A has {} columns, B has {}",
            a.ncols(),
            b.ncols()
        )));
    }
    let pinv = pseudo_inverse(a)?;
    Ok((b * pinv).singular_values().max())
}

/// Largest `‖Bv‖/‖Av‖` over seeded random `v`; never exceeds the exact bound.
pub fn sampled_relative_bound(a: &CMatrix, b: &CMatrix, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let v = gaussian_vector(a.ncols(), &mut rng);
            (b * &v).norm() / (a * &v).norm()
        })
        .fold(0.0, f64::max)
}

/// `(A*A + I)^{−1/2}` from the SVD of `A`.
fn graph_normalizer(a: &CMatrix) -> CMatrix {
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        v_t.nrows(),
        svd.singular_values.iter().map(|s| Complex64::new((s * s + 1.0).powf(-0.5), 0.0)),
    ));
    let v = v_t.adjoint();
    // Columns of V beyond the rank are absent only for wide A, which is rejected upstream.
    &v * d * v_t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZSample {
    pub z: Complex64,
    /// `max |M(z) − M(0) − z(M(1) − M(0))|` over entries.
    pub polynomial_residual: f64,
    /// `max |∂M/∂z̄|` by central differences.
    pub cauchy_riemann_residual: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub bounds_hold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KatoRellichReport {
    pub n: usize,
    pub c: f64,
    pub radius: f64,
    pub samples: Vec<ZSample>,
    pub max_polynomial_residual: f64,
    pub max_cauchy_riemann_residual: f64,
    pub all_bounds_hold: bool,
}

const RATIO_SLACK: f64 = 1e-8;
const CR_STEP: f64 = 1e-4;
const GRAPH_SAMPLES: usize = 1000;

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn graph_ratio(fam: &MatrixFamily, az: &CMatrix, f: &CVector) -> f64 {
    let nf = f.norm_squared();
    (nf + (az * f).norm_squared()) / (nf + (&fam.a * f).norm_squared())
}

/// Checks `M(z) = (A + zB)(A*A + I)^{−1/2}` for the degree-one polynomial
/// property, the Cauchy–Riemann equations and the graph-norm equivalence
/// `(1 − |z|c)² ≤ ratio ≤ (1 + |z|c)²` at each `z` with `|z| < 1/c`.
pub fn kato_rellich_check(fam: &MatrixFamily, z_samples: &[Complex64], seed: u64) -> Result<KatoRellichReport> {
    if let Some(z) = z_samples.iter().find(|z| z.norm() >= fam.radius()) {
        return Err(Error::InvalidParameter(format!(
            "|z| = {} is not inside the disk of radius {}",
            z.norm(),
            fam.radius()
        )));
    }
    let s = graph_normalizer(&fam.a);
    let m_of = |z: Complex64| fam.at(z) * &s;
    let m0 = m_of(Complex64::new(0.0, 0.0));
    let m1 = m_of(Complex64::new(1.0, 0.0));
    let slope = &m1 - &m0;
    let n = fam.a.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes: Vec<CVector> = (0..GRAPH_SAMPLES).map(|_| gaussian_vector(n, &mut rng)).collect();
    // the extreme right singular vectors of A, where the bounds are tightest
    let v_t = fam.a.clone().svd(false, true).v_t.expect("requested");
    for row in [0, v_t.nrows() - 1] {
        probes.push(v_t.row(row).adjoint());
    }
    let mut samples = Vec::with_capacity(z_samples.len());
    for &z in z_samples {
        let mz = m_of(z);
        let polynomial_residual = max_entry(&(&mz - (&m0 + &slope * z)));
        let h = CR_STEP;
        let dx = (m_of(z + h) - m_of(z - h)) / Complex64::new(2.0 * h, 0.0);
        let dy = (m_of(z + Complex64::new(0.0, h)) - m_of(z - Complex64::new(0.0, h))) / Complex64::new(2.0 * h, 0.0);
        let cauchy_riemann_residual = max_entry(&((dx + dy * Complex64::new(0.0, 1.0)) * Complex64::new(0.5, 0.0)));
        let az = fam.at(z);
        let (mut ratio_min, mut ratio_max) = (f64::INFINITY, 0.0f64);
        for f in &probes {
            let r = graph_ratio(fam, &az, f);
            ratio_min = ratio_min.min(r);
            ratio_max = ratio_max.max(r);
        }
        let zc = z.norm() * fam.c;
        let lower_bound = (1.0 - zc).powi(2);
        let upper_bound = (1.0 + zc).powi(2);
        samples.push(ZSample {
            z,
            polynomial_residual,
            cauchy_riemann_residual,
            ratio_min,
            ratio_max,
            lower_bound,
            upper_bound,
            bounds_hold: ratio_min >= lower_bound - RATIO_SLACK && ratio_max <= upper_bound + RATIO_SLACK,
        });
    }
    Ok(KatoRellichReport {
        n,
        c: fam.c,
        radius: fam.radius(),
        max_polynomial_residual: samples.iter().map(|s| s.polynomial_residual).fold(0.0, f64::max),
        max_cauchy_riemann_residual: samples.iter().map(|s| s.cauchy_riemann_residual).fold(0.0, f64::max),
        all_bounds_hold: samples.iter().all(|s| s.bounds_hold),
        samples,
    })
}

/// `count` points on the circle of radius `r`, starting at angle `phase`.
pub fn circle_points(r: f64, count: usize, phase: f64) -> Vec<Complex64> {
    (0..count)
        .map(|k| Complex64::from_polar(r, phase + 2.0 * PI * k as f64 / count as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeWitness {
    pub z: Complex64,
    pub c: f64,
    /// Graph-norm ratio of the witness vector.
    pub ratio: f64,
    /// `(1 − |z|c)²`, the lower bound valid inside the disk.
    pub lower_bound: f64,
    /// `‖(A + zB')f‖ / ‖Af‖`.
    pub null_residual: f64,
    pub violated: bool,
}

/// Just outside the disk the equivalence can fail. The witness replaces `B`
/// by `B' = D A` with `‖D‖ = c` chosen so that `A + zB'` annihilates the top
/// right singular vector of `A` at `z = −(1 + ε)/c`.
///
/// A null vector has graph ratio `1/(1 + σ₁²)`, so `A` is first scaled up
/// until `σ₁ ≥ 2/ε`; scaling leaves the relative bound `c` unchanged.
pub fn disk_edge_witness(fam: &MatrixFamily, eps: f64) -> Result<(MatrixFamily, EdgeWitness)> {
    if !(eps > 0.0) || fam.c == 0.0 {
        return Err(Error::InvalidParameter("need eps > 0 and c > 0".into()));
    }
    let svd = fam.a.clone().svd(true, true);
    let (i_max, sigma_max) = svd.singular_values.argmax();
    let scale = (2.0 / (eps * sigma_max)).max(1.0);
    let a = &fam.a * Complex64::new(scale, 0.0);
    let u1 = svd.u.as_ref().expect("requested").column(i_max).into_owned();
    let v1: CVector = svd.v_t.as_ref().expect("requested").row(i_max).adjoint();
    let n = fam.a.nrows();
    let shrink = Complex64::new(fam.c * (1.0 - 1.0 / (1.0 + eps)), 0.0);
    let d = CMatrix::identity(n, n) * Complex64::new(fam.c, 0.0) - &u1 * u1.adjoint() * shrink;
    let witness = MatrixFamily::new(a.clone(), d * &a)?;
    let z = Complex64::new(-(1.0 + eps) / fam.c, 0.0);
    let az = witness.at(z);
    let ratio = graph_ratio(&witness, &az, &v1);
    let lower_bound = (1.0 - z.norm() * witness.c).powi(2);
    let null_residual = (&az * &v1).norm() / (&a * &v1).norm();
    let c = witness.c;
    Ok((witness, EdgeWitness { z, c, ratio, lower_bound, null_residual, violated: ratio < lower_bound }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticityReport {
    pub alpha0: Complex64,
    pub radius: f64,
    pub cutoff: f64,
    pub distance_to_parabola: f64,
    pub probe_x: Vec<f64>,
    pub center_values: Vec<Complex64>,
    /// Per contour point, the largest probe value relative to the center scale.
    pub contour_magnitudes: Vec<f64>,
    /// `max |mean over contour − center| / max |center|`.
    pub cauchy_residual: f64,
    /// Sup-norm remainder of the degree-`N` Taylor polynomial on `|α − α₀| = r/2`.
    pub taylor_remainders: Vec<f64>,
    /// Geometric-mean ratio of successive remainders above rounding level.
    pub taylor_decay_ratio: f64,
}

fn probe_indices(grid: &RadialGrid, hi: f64) -> Vec<usize> {
    let top = grid.index_below(hi.min(grid.x_max()));
    let bottom = crate::stencil::STENCIL_WIDTH.min(top);
    (0..PROBE_NODES)
        .map(|k| bottom + (top - bottom) * k / (PROBE_NODES - 1))
        .collect()
}

fn forward_values(alpha: Complex64, g: &GridFunction, a: f64, probes: &[usize]) -> Result<Vec<Complex64>> {
    let spec = KernelSpec::compressed_forward(CouplingParameter::from_alpha(alpha)?, a)?;
    let f = apply_green(&spec, g)?;
    Ok(probes.iter().map(|&j| f.values()[j]).collect())
}

/// Cauchy-integral test of `α ↦ G_α^{a→} g` on `|α − α₀| = r`, which must
/// stay strictly inside the parabola.
pub fn family_analyticity(alpha0: Complex64, r: f64, g: &GridFunction, a: f64) -> Result<AnalyticityReport> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius {r} must be positive")));
    }
    let class = region_classify(alpha0);
    if class.class != Region::Inside || class.distance <= r {
        return Err(Error::OutsideRegion(format!(
            "disk of radius {r} around {alpha0} leaves the region (distance to parabola {})",
            class.distance
        )));
    }
    let grid: &Arc<RadialGrid> = g.grid();
    let probes = probe_indices(grid, a);
    let center = forward_values(alpha0, g, a, &probes)?;
    let scale = center.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let nodes = circle_points(r, CONTOUR_POINTS, 0.0);
    let contour: Vec<Vec<Complex64>> =
        nodes.iter().map(|d| forward_values(alpha0 + d, g, a, &probes)).collect::<Result<_>>()?;

    let inv = 1.0 / CONTOUR_POINTS as f64;
    let mut cauchy_residual = 0.0f64;
    // coeffs[j][p] = a_j r^j at probe p
    let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); probes.len()]; TAYLOR_TERMS];
    for (k, vals) in contour.iter().enumerate() {
        let theta = 2.0 * PI * k as f64 * inv;
        for (j, row) in coeffs.iter_mut().enumerate() {
            let w = Complex64::from_polar(inv, -(j as f64) * theta);
            for (p, v) in vals.iter().enumerate() {
                row[p] += v * w;
            }
        }
    }
    for p in 0..probes.len() {
        cauchy_residual = cauchy_residual.max((coeffs[0][p] - center[p]).norm() / scale);
    }

    let inner = circle_points(0.5 * r, TAYLOR_TERMS, PI / TAYLOR_TERMS as f64);
    let inner_vals: Vec<Vec<Complex64>> =
        inner.iter().map(|d| forward_values(alpha0 + d, g, a, &probes)).collect::<Result<_>>()?;
    let mut taylor_remainders = Vec::with_capacity(TAYLOR_TERMS);
    for degree in 0..TAYLOR_TERMS {
        let mut worst = 0.0f64;
        for (d, vals) in inner.iter().zip(&inner_vals) {
            let s = d / r;
            for p in 0..probes.len() {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut sp = Complex64::new(1.0, 0.0);
                for row in coeffs.iter().take(degree + 1) {
                    acc += row[p] * sp;
                    sp *= s;
                }
                worst = worst.max((vals[p] - acc).norm() / scale);
            }
        }
        taylor_remainders.push(worst);
    }
    let floor = 1e-13;
    let above: Vec<f64> = taylor_remainders.iter().copied().take_while(|v| *v > floor).collect();
    let taylor_decay_ratio = if above.len() >= 2 {
        (above[above.len() - 1] / above[0]).powf(1.0 / (above.len() - 1) as f64)
    } else {
        0.0
    };

    Ok(AnalyticityReport {
        alpha0,
        radius: r,
        cutoff: a,
        distance_to_parabola: parabola_distance(alpha0),
        probe_x: probes.iter().map(|&j| grid.x()[j]).collect(),
        center_values: center,
        contour_magnitudes: contour
            .iter()
            .map(|v| v.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale)
            .collect(),
        cauchy_residual,
        taylor_remainders,
        taylor_decay_ratio,
    })
}

/// `max |K_{m̄}(x, y) − conj K_m(x, y)| / max(|K_m(x, y)|, 1)` over the samples.
pub fn conjugation_symmetry(spec: &KernelSpec, samples: &[(f64, f64)]) -> Result<f64> {
    let mirrored = spec.with_param(spec.param().conj())?;
    Ok(samples
        .iter()
        .map(|&(x, y)| {
            let k = kernel_eval(spec, x, y);
            (kernel_eval(&mirrored, x, y) - k.conj()).norm() / k.norm().max(1.0)
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_log_grid;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn relative_bound_examples() {
        let fam = random_family(12, 1.0, 3).unwrap();
        assert!((relative_bound(&fam.a, &fam.a).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(relative_bound(&fam.a, &CMatrix::zeros(12, 12)).unwrap(), 0.0);
        // a unitary factor on the left keeps ‖Bv‖ = ½‖Av‖ exactly
        let q = fam.b.clone().qr().q();
        let b = &q * &fam.a * c(0.5, 0.0);
        assert!((relative_bound(&fam.a, &b).unwrap() - 0.5).abs() < 1e-12);
        let sampled = sampled_relative_bound(&fam.a, &fam.b, 10_000, 9);
        assert!(sampled <= fam.c + 1e-10 && sampled > 0.0);
        let mut singular = fam.a.clone();
        singular.set_column(0, &CVector::zeros(12));
        assert!(matches!(relative_bound(&singular, &fam.b), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn kato_rellich_examples() {
        let fam = random_family(50, 0.5, 42).unwrap();
        assert!((fam.c - 0.5).abs() < 1e-10);
        let zs = circle_points(0.9 * fam.radius(), 8, 0.3);
        let rep = kato_rellich_check(&fam, &zs, 7).unwrap();
        assert!(rep.max_polynomial_residual < 1e-12, "{}", rep.max_polynomial_residual);
        assert!(rep.max_cauchy_riemann_residual < 1e-7);
        assert!(rep.all_bounds_hold);

        let rep = kato_rellich_check(&fam, &[c(0.0, 0.0)], 7).unwrap();
        assert!((rep.samples[0].ratio_min - 1.0).abs() < 1e-14 && (rep.samples[0].ratio_max - 1.0).abs() < 1e-14);
        assert!(kato_rellich_check(&fam, &[c(fam.radius(), 0.0)], 7).is_err());

        let flat = MatrixFamily::new(fam.a.clone(), CMatrix::zeros(50, 50)).unwrap();
        let rep = kato_rellich_check(&flat, &[c(3.0, 1.0), c(-10.0, 0.0)], 1).unwrap();
        assert_eq!(rep.max_polynomial_residual, 0.0);
    }

    #[test]
    fn edge_witness() {
        let fam = random_family(50, 0.5, 42).unwrap();
        let (w, e) = disk_edge_witness(&fam, 0.1).unwrap();
        assert!((w.c - fam.c).abs() < 1e-10);
        assert!(e.null_residual < 1e-10);
        assert!(e.violated, "{e:?}");
    }

    #[test]
    fn analyticity_examples() {
        let grid = make_log_grid(-8.0, 1.0, 256).unwrap();
        let g = GridFunction::from_real_fn(&grid, |x| (-(x - 0.5) * (x - 0.5) * 20.0).exp());
        for alpha0 in [c(0.25, 0.0), c(0.0, 0.0), c(0.0, 0.5)] {
            let r = family_analyticity(alpha0, 0.1, &g, 1.0).unwrap();
            assert!(r.cauchy_residual < 1e-6, "{alpha0}: {}", r.cauchy_residual);
            assert!(r.taylor_decay_ratio < 1.0, "{r:?}");
        }
        assert!(family_analyticity(c(0.25, 0.0), 0.05, &g, 1.0).is_ok());
        assert!(matches!(family_analyticity(c(3.5, 0.0), 1.5, &g, 1.0), Err(Error::OutsideRegion(_))));
        assert!(family_analyticity(c(0.9, 0.0), 0.5, &g, 1.0).is_err());
    }

    #[test]
    fn conjugation_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<(f64, f64)> = (0..100).map(|_| (rng.random_range(0.01..2.0), rng.random_range(0.01..2.0))).collect();
        let p = CouplingParameter::from_m(c(0.3, 0.7)).unwrap();
        for spec in [KernelSpec::forward(p), KernelSpec::q(p), KernelSpec::z(p).unwrap(), KernelSpec::two_sided(p).unwrap()] {
            assert!(conjugation_symmetry(&spec, &pts).unwrap() <= 1e-14);
        }
        let real = KernelSpec::forward(CouplingParameter::from_real_m(0.4).unwrap());
        assert_eq!(conjugation_symmetry(&real, &pts).unwrap(), 0.0);
    }
}
