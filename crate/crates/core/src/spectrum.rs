//! Spectrum of the time-independent invariant I = p² + |x|.
//!
//! Even states n = 2j take λ = -a'_{j+1} and satisfy φ'(0) = 0; odd states
//! n = 2j+1 take λ = -a_{j+1} and vanish at the origin:
//!
//! ```text
//! φ_n(x) = N_n Ai(|x| - λ_n)            (even)
//! φ_n(x) = sgn(x) N_n Ai(|x| - λ_n)     (odd, sgn(0) = 0)
//! ```

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::airy::{self, airy_derivative_zero, airy_eval, airy_function_zero, AiryZero};
use crate::error::{Error, Result};
use crate::Region;

/// Beyond the Airy working range, arguments within this angle of the
/// positive real axis have |Ai| below e^{-119} and are returned as zero.
const FAR_SECTOR: f64 = std::f64::consts::FRAC_PI_6;

/// Highest quantum number served by [`level`].
pub const MAX_LEVEL: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Parity {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// φ(-x) = sign · φ(x).
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralLevel {
    pub n: usize,
    pub parity: Parity,
    pub lambda: f64,
    pub norm_const: f64,
    /// The Airy zero fixing λ (a' for even, a for odd).
    pub zero: AiryZero,
}

static LEVELS: OnceLock<Vec<Result<SpectralLevel>>> = OnceLock::new();

pub fn level(n: usize) -> Result<SpectralLevel> {
    if n > MAX_LEVEL {
        return Err(Error::Domain(format!(
            "quantum number must be at most {MAX_LEVEL}, got {n}"
        )));
    }
    LEVELS
        .get_or_init(|| (0..=MAX_LEVEL).map(compute_level).collect())
        .get(n)
        .cloned()
        .expect("table covers 0..=MAX_LEVEL")
}

fn compute_level(n: usize) -> Result<SpectralLevel> {
    let parity = Parity::of(n);
    let (zero, norm_const) = match parity {
        Parity::Even => {
            let z = airy_derivative_zero(n / 2 + 1)?;
            let a = z.location;
            (z, 1.0 / ((-2.0 * a).sqrt() * airy::ai(a)?))
        }
        Parity::Odd => {
            let z = airy_function_zero(n.div_ceil(2))?;
            (z, 1.0 / (2f64.sqrt() * airy::ai_prime(z.location)?))
        }
    };
    Ok(SpectralLevel {
        n,
        parity,
        lambda: -zero.location,
        norm_const,
        zero,
    })
}

impl SpectralLevel {
    /// φ_n(x) on the real line.
    pub fn value(&self, x: f64) -> f64 {
        let radial = self.norm_const * airy::ai(x.abs() - self.lambda).unwrap_or(f64::NAN);
        match self.parity {
            Parity::Even => radial,
            Parity::Odd if x == 0.0 => 0.0,
            Parity::Odd => x.signum() * radial,
        }
    }

    /// φ_n'(x), one-sided from the right at x = 0.
    pub fn derivative(&self, x: f64) -> f64 {
        let slope = self.norm_const * airy::ai_prime(x.abs() - self.lambda).unwrap_or(f64::NAN);
        match self.parity {
            Parity::Even if x < 0.0 => -slope,
            _ => slope,
        }
    }

    /// Analytic continuation of the branch of φ_n belonging to `region`.
    pub fn continued(&self, z: Complex64, region: Region) -> Result<Complex64> {
        let arg = match region {
            Region::Positive => z - self.lambda,
            Region::Negative => -z - self.lambda,
        };
        if arg.norm() > airy::MAX_MODULUS && arg.arg().abs() <= FAR_SECTOR {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let value = airy_eval(arg)?.ai * self.norm_const;
        Ok(match region {
            Region::Positive => value,
            Region::Negative => value * self.parity.sign(),
        })
    }

    /// First derivative of [`Self::continued`] with respect to z.
    pub fn continued_derivative(&self, z: Complex64, region: Region) -> Result<Complex64> {
        let arg = match region {
            Region::Positive => z - self.lambda,
            Region::Negative => -z - self.lambda,
        };
        if arg.norm() > airy::MAX_MODULUS && arg.arg().abs() <= FAR_SECTOR {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let slope = airy_eval(arg)?.ai_prime * self.norm_const;
        Ok(match region {
            Region::Positive => slope,
            Region::Negative => -slope * self.parity.sign(),
        })
    }

    /// |φ_n(x)|².
    pub fn density(&self, x: f64) -> f64 {
        let v = self.value(x);
        v * v
    }

    /// ∫ over one half-line of φ_n², from ∫ₐ^∞ Ai² = Ai'(a)² - a Ai(a)².
    pub fn half_line_norm(&self) -> Result<f64> {
        let a = -self.lambda;
        let p = airy::airy_eval_real(a)?;
        let (v, d) = (p.ai.re, p.ai_prime.re);
        Ok(self.norm_const * self.norm_const * (d * d - a * v * v))
    }

    /// Distance from the origin beyond which φ_n² < 1e-25.
    pub fn support_radius(&self) -> f64 {
        self.lambda + 15.0
    }
}

/// The levels 0..=n_max.
pub fn levels(n_max: usize) -> Result<Vec<SpectralLevel>> {
    (0..=n_max).map(level).collect()
}
