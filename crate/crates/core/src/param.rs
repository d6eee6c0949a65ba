//! The complex coupling `m` and the derived `α = m²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex order `m` of the Bessel operator `−d²/dx² + (m² − ¼)/x²`.
///
/// Only `m` is stored; `α` is always recomputed as `m * m`. The principal
/// branch `Re(m) ≥ 0` is enforced unless the caller explicitly asks for a
/// value in the strip `−1 < Re(m) < 0`, where `H_m` is still defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParameter {
    m: Complex64,
}

impl CouplingParameter {
    /// Principal-branch parameter from `m`.
    pub fn from_m(m: Complex64) -> Result<Self> {
        check_finite(m)?;
        if m.re < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Re(m) = {} < 0; use from_m_extended for -1 < Re(m) < 0",
                m.re
            )));
        }
        Ok(Self { m })
    }

    /// Accepts `Re(m) > −1`, i.e. the full range where `H_m` exists.
    pub fn from_m_extended(m: Complex64) -> Result<Self> {
        check_finite(m)?;
        if m.re <= -1.0 {
            return Err(Error::InvalidParameter(format!("Re(m) = {} <= -1", m.re)));
        }
        Ok(Self { m })
    }

    /// Principal square root of `α`.
    pub fn from_alpha(alpha: Complex64) -> Result<Self> {
        check_finite(alpha)?;
        let mut m = alpha.sqrt();
        // sqrt of a negative real with a -0.0 imaginary part lands on Re = 0, Im < 0;
        // keep it, it is still principal.
        if m.re < 0.0 {
            m = -m;
        }
        Ok(Self { m })
    }

    pub fn from_real_m(m: f64) -> Result<Self> {
        Self::from_m(Complex64::new(m, 0.0))
    }

    #[inline]
    pub fn m(&self) -> Complex64 {
        self.m
    }

    #[inline]
    pub fn alpha(&self) -> Complex64 {
        self.m * self.m
    }

    /// Same `α`, opposite order.
    pub fn negated(&self) -> Self {
        Self { m: -self.m }
    }

    pub fn conj(&self) -> Self {
        Self { m: self.m.conj() }
    }

    /// `|m| < 1e−6`, where the logarithmic branch of the kernels is used.
    pub fn is_log_branch(&self) -> bool {
        self.m.norm() < LOG_BRANCH_RADIUS
    }
}

pub(crate) const LOG_BRANCH_RADIUS: f64 = 1e-6;

fn check_finite(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("non-finite value {z}")))
    }
}

/// `x^p` for real `x > 0` and complex `p`.
#[inline]
pub fn rpow(x: f64, p: Complex64) -> Complex64 {
    (p * x.ln()).exp()
}

/// Parses `a+bi`, `a-bi`, `a`, `bi`, `i`, `-i` (also accepts `j`).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty complex literal".into()));
    }
    let bad = || Error::Parse(format!("cannot parse complex number {s:?}"));
    let body = match s.strip_suffix('i').or_else(|| s.strip_suffix('j')) {
        None => return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad()),
        Some(b) => b,
    };
    // Split at the last sign that is not the leading sign and not part of an exponent.
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let imag = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, imag(&body[i..])?))
        }
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}
