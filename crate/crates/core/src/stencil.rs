//! Finite-difference and end-corrected trapezoid weights on a uniform `t` lattice.

use nalgebra::{DMatrix, DVector};

/// Width of the differentiation stencils (sixth order).
pub const STENCIL_WIDTH: usize = 7;

/// Number of end corrections per side in the trapezoid rule.
pub const GREGORY_TERMS: usize = 6;

/// Fornberg's algorithm: weights for derivatives `0..=max_order` at `z`
/// from values at `nodes`. Returns `w[order][node]`.
pub fn fornberg(z: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] *= c4 / c3;
        }
        c1 = c2;
    }
    c
}

/// Precomputed first/second derivative stencils on a uniform lattice of `n` points
/// with unit spacing. Interior rows are centered; the first and last three rows
/// are one-sided.
#[derive(Debug, Clone)]
pub struct DiffStencils {
    n: usize,
    /// `(start, d1, d2)` for rows `0..half` (left) and the mirrored right rows.
    left: Vec<(Vec<f64>, Vec<f64>)>,
    right: Vec<(Vec<f64>, Vec<f64>)>,
    center: (Vec<f64>, Vec<f64>),
}

impl DiffStencils {
    pub fn new(n: usize) -> Self {
        assert!(n >= STENCIL_WIDTH, "lattice shorter than the stencil");
        let half = STENCIL_WIDTH / 2;
        let offsets: Vec<f64> = (0..STENCIL_WIDTH).map(|k| k as f64).collect();
        let row = |z: f64| {
            let w = fornberg(z, &offsets, 2);
            (w[1].clone(), w[2].clone())
        };
        let left = (0..half).map(|j| row(j as f64)).collect();
        let right = (0..half)
            .map(|j| row((STENCIL_WIDTH - 1 - j) as f64))
            .collect();
        Self { n, left, right, center: row(half as f64) }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Start index and `(d1, d2)` weights for row `j`.
    pub fn row(&self, j: usize) -> (usize, &[f64], &[f64]) {
        let half = STENCIL_WIDTH / 2;
        if j < half {
            let (a, b) = &self.left[j];
            (0, a, b)
        } else if j + half >= self.n {
            let k = self.n - 1 - j;
            let (a, b) = &self.right[k];
            (self.n - STENCIL_WIDTH, a, b)
        } else {
            (j - half, &self.center.0, &self.center.1)
        }
    }
}

/// Left-end corrections `d_0..d_{K-1}` added to the unit-spacing trapezoid
/// weights so that the rule is exact for polynomials of degree `< K`.
pub fn gregory_corrections() -> [f64; GREGORY_TERMS] {
    // Euler–Maclaurin: trapezoid − integral at the left end is −Σ B_{2k}/(2k)! f^{(2k−1)}(0).
    // For f(s) = s^q the correction must supply B_{q+1}/(q+1) when q is odd.
    let bernoulli_over = |q: usize| -> f64 {
        match q {
            1 => 1.0 / 12.0,   // B_2 / 2
            3 => -1.0 / 120.0, // B_4 / 4
            5 => 1.0 / 252.0,  // B_6 / 6
            _ => 0.0,
        }
    };
    let k = GREGORY_TERMS;
    let v = DMatrix::from_fn(k, k, |q, j| (j as f64).powi(q as i32));
    let rhs = DVector::from_fn(k, |q, _| bernoulli_over(q));
    let sol = v.lu().solve(&rhs).expect("Vandermonde system is nonsingular");
    let mut out = [0.0; GREGORY_TERMS];
    out.copy_from_slice(sol.as_slice());
    out
}

/// Unit-spacing end-corrected trapezoid weights for `n` points.
pub fn gregory_weights(n: usize) -> Vec<f64> {
    assert!(n >= 2 * GREGORY_TERMS, "too few points for end corrections");
    let d = gregory_corrections();
    let mut w = vec![1.0; n];
    w[0] = 0.5;
    w[n - 1] = 0.5;
    for (j, dj) in d.iter().enumerate() {
        w[j] += dj;
        w[n - 1 - j] += dj;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_second_order_is_classic() {
        let w = fornberg(1.0, &[0.0, 1.0, 2.0], 2);
        assert!((w[1][0] + 0.5).abs() < 1e-15 && (w[1][2] - 0.5).abs() < 1e-15);
        assert!((w[2][0] - 1.0).abs() < 1e-15 && (w[2][1] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn stencils_exact_on_degree_six() {
        let n = 20;
        let s = DiffStencils::new(n);
        let f: Vec<f64> = (0..n).map(|j| (j as f64 * 0.1).powi(6)).collect();
        for j in 0..n {
            let (start, d1, d2) = s.row(j);
            let a: f64 = d1.iter().zip(&f[start..]).map(|(w, v)| w * v).sum();
            let b: f64 = d2.iter().zip(&f[start..]).map(|(w, v)| w * v).sum();
            let x = j as f64 * 0.1;
            // unit spacing in index, so scale by 0.1
            assert!((a / 0.1 - 6.0 * x.powi(5)).abs() < 1e-9, "d1 row {j}");
            assert!((b / 0.01 - 30.0 * x.powi(4)).abs() < 1e-7, "d2 row {j}");
        }
    }

    #[test]
    fn gregory_rule_exact_on_quintics() {
        let n = 30;
        let w = gregory_weights(n);
        let h = 1.0 / (n - 1) as f64;
        for q in 0..6 {
            let s: f64 = (0..n).map(|j| w[j] * (j as f64 * h).powi(q)).sum::<f64>() * h;
            assert!((s - 1.0 / (q as f64 + 1.0)).abs() < 1e-13, "degree {q}: {s}");
        }
        assert!(w.iter().all(|&v| v > 0.0));
    }
}
