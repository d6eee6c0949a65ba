//! First-order factors `A_ρ = ∂_x − ρ/x` and the bilinear Bessel forms.
//!
//! With `ρ = ½ ± m` both products `−A_{−ρ} A_ρ` reproduce `−d²/dx² + (m² − ¼)/x²`,
//! and pairing `⟨A_ρ f, A_ρ g⟩` without conjugation reproduces `⟨f, H_m g⟩`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_bessel, GridFunction, RadialGrid};
use crate::param::CouplingParameter;
use crate::stencil::STENCIL_WIDTH;

/// Which closed realization a form statement refers to. Both act by the same
/// formula on interior data, so this is carried as a label only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Realization {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderSpec {
    pub rho: Complex64,
    pub realization: Realization,
}

impl FirstOrderSpec {
    pub fn new(rho: Complex64, realization: Realization) -> Self {
        Self { rho, realization }
    }
    /// `A_{1/2+m}` on its maximal domain.
    pub fn plus(m: Complex64) -> Self {
        Self::new(0.5 + m, Realization::Max)
    }
    /// `A_{1/2−m}` on its minimal domain.
    pub fn minus(m: Complex64) -> Self {
        Self::new(0.5 - m, Realization::Min)
    }
    /// The formal transpose partner `A_{−ρ}`.
    pub fn transpose_partner(&self) -> Self {
        let realization = match self.realization {
            Realization::Min => Realization::Max,
            Realization::Max => Realization::Min,
        };
        Self::new(-self.rho, realization)
    }
}

/// `f' − (ρ/x) f` at the nodes.
pub fn apply_first_order(s: &FirstOrderSpec, f: &GridFunction) -> GridFunction {
    let d1 = f.differentiate(1).expect("order 1 is supported");
    let x = f.grid().x();
    let values = (0..f.len()).map(|j| d1.values()[j] - s.rho * f.values()[j] / x[j]).collect();
    GridFunction::new(Arc::clone(f.grid()), values).expect("same length")
}

/// `∫ f g dx` without conjugation.
pub fn bilinear_pairing(f: &GridFunction, g: &GridFunction) -> Result<Complex64> {
    f.check_same_grid(g)?;
    Ok(f.grid()
        .weights()
        .iter()
        .zip(f.values().iter().zip(g.values()))
        .map(|(w, (a, b))| a * b * *w)
        .sum())
}

/// Interior test function `p(x − c)·exp(−(x − c)²/(2s²))` on `[lo, hi]`,
/// with `s` chosen so that the Gaussian drops to 1e−14 at the ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub half_support: f64,
    /// Polynomial coefficients in `x − center`, lowest degree first.
    pub coeffs: Vec<Complex64>,
}

const BUMP_FLOOR: f64 = 1e-14;

impl Bump {
    pub fn new(lo: f64, hi: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) || coeffs.is_empty() {
            return Err(Error::InvalidParameter(format!("bad bump support [{lo}, {hi}]")));
        }
        let half_support = 0.5 * (hi - lo);
        let width = half_support / (2.0 * (1.0 / BUMP_FLOOR).ln()).sqrt();
        Ok(Self { center: 0.5 * (lo + hi), width, half_support, coeffs })
    }

    /// Plain Gaussian bump on `[lo, hi]`.
    pub fn plain(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, vec![Complex64::new(1.0, 0.0)])
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_support, self.center + self.half_support)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let y = x - self.center;
        if y.abs() > self.half_support {
            return Complex64::new(0.0, 0.0);
        }
        let p = self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * y + c);
        p * (-(y * y) / (2.0 * self.width * self.width)).exp()
    }

    /// `λ^{1/2} f(λx)`, which preserves the `L²` norm.
    pub fn dilated(&self, lambda: f64) -> Self {
        let mut scale = lambda.sqrt();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let out = c * scale;
                scale *= lambda;
                out
            })
            .collect();
        Self {
            center: self.center / lambda,
            width: self.width / lambda,
            half_support: self.half_support / lambda,
            coeffs,
        }
    }

    pub fn sample(&self, grid: &Arc<RadialGrid>) -> GridFunction {
        GridFunction::from_fn(grid, |x| self.eval(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorSign {
    Plus,
    Minus,
}

impl std::str::FromStr for FactorSign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(Self::Plus),
            "minus" | "-" => Ok(Self::Minus),
            other => Err(Error::Parse(format!("unknown factorization sign '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormResult {
    pub m: Complex64,
    pub sign: FactorSign,
    /// `⟨A_{1/2+m} f, A_{1/2+m} g⟩`.
    pub value_plus: Complex64,
    /// `⟨A_{1/2−m} f, A_{1/2−m} g⟩`, present when `Re m > 0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_minus: Option<Complex64>,
    /// `⟨f, H_m g⟩`.
    pub reference: Complex64,
    /// `|value − reference| / max(|reference|, 1)`.
    pub deviation_plus: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation_minus: Option<f64>,
    /// Largest interior relative gap between `−A_{−ρ}A_ρ g` and `L g`.
    pub composition_residual: f64,
}

impl FormResult {
    pub fn max_deviation(&self) -> f64 {
        self.deviation_plus.max(self.deviation_minus.unwrap_or(0.0))
    }
}

fn scaled_gap(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn form_value(rho: Complex64, f: &GridFunction, g: &GridFunction) -> Result<Complex64> {
    let s = FirstOrderSpec::new(rho, Realization::Max);
    bilinear_pairing(&apply_first_order(&s, f), &apply_first_order(&s, g))
}

/// Largest `|−A_{−ρ}A_ρ g − L g|` over nodes at least one stencil width from
/// the ends, relative to `max |L g|`.
pub fn composition_residual(p: &CouplingParameter, rho: Complex64, g: &GridFunction) -> f64 {
    let s = FirstOrderSpec::new(rho, Realization::Max);
    let composed = apply_first_order(&s.transpose_partner(), &apply_first_order(&s, g));
    let lg = apply_bessel(p, g);
    let skip = STENCIL_WIDTH;
    let n = g.len();
    if n <= 2 * skip {
        return 0.0;
    }
    let scale = lg.values()[skip..n - skip].iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    (skip..n - skip)
        .map(|j| (composed.values()[j] + lg.values()[j]).norm())
        .fold(0.0, f64::max)
        / scale
}

/// Compares the factorized forms with `⟨f, H_m g⟩`. `Plus` needs `Re m > −1`;
/// `Minus` needs `Re m > 0` and reports both forms.
pub fn factorization_check(
    m: Complex64,
    sign: FactorSign,
    f: &GridFunction,
    g: &GridFunction,
) -> Result<FormResult> {
    f.check_same_grid(g)?;
    let p = CouplingParameter::from_m_extended(m)?;
    if sign == FactorSign::Minus && m.re <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "the minus factorization needs Re(m) > 0, got {}",
            m.re
        )));
    }
    let reference = bilinear_pairing(f, &apply_bessel(&p, g))?;
    let value_plus = form_value(0.5 + m, f, g)?;
    let mut composition = composition_residual(&p, 0.5 + m, g);
    let value_minus = if m.re > 0.0 {
        composition = composition.max(composition_residual(&p, 0.5 - m, g));
        Some(form_value(0.5 - m, f, g)?)
    } else {
        None
    };
    Ok(FormResult {
        m,
        sign,
        value_plus,
        value_minus,
        reference,
        deviation_plus: scaled_gap(value_plus, reference),
        deviation_minus: value_minus.map(|v| scaled_gap(v, reference)),
        composition_residual: composition,
    })
}

/// `|value_plus − value_minus| / max(|value_plus|, 1)` for `Re m > 0`.
pub fn two_factorizations_agree(m: Complex64, f: &GridFunction, g: &GridFunction) -> Result<f64> {
    if m.re <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "the two forms differ for Re(m) = {} <= 0",
            m.re
        )));
    }
    f.check_same_grid(g)?;
    let plus = form_value(0.5 + m, f, g)?;
    let minus = form_value(0.5 - m, f, g)?;
    Ok((plus - minus).norm() / plus.norm().max(1.0))
}

/// `(A_{1/2+m} f | A_{1/2+m} f)` for real `m > −1` and real `f`.
pub fn positivity_check(m: f64, f: &GridFunction) -> Result<f64> {
    if !(m > -1.0) {
        return Err(Error::InvalidParameter(format!("m = {m} <= -1")));
    }
    if f.values().iter().any(|v| v.im != 0.0) {
        return Err(Error::InvalidParameter("positivity needs a real-valued f".into()));
    }
    let af = apply_first_order(&FirstOrderSpec::new(Complex64::new(0.5 + m, 0.0), Realization::Max), f);
    Ok(af.inner(&af)?.re)
}

/// Relative gap in `⟨A_ρ f, g⟩ = −⟨f, A_{−ρ} g⟩`.
pub fn transpose_gap(s: &FirstOrderSpec, f: &GridFunction, g: &GridFunction) -> Result<f64> {
    let lhs = bilinear_pairing(&apply_first_order(s, f), g)?;
    let rhs = -bilinear_pairing(f, &apply_first_order(&s.transpose_partner(), g))?;
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}
