//! Airy functions Ai, Bi and their derivatives for complex arguments, and
//! the negative real zeros of Ai and Ai'.
//!
//! Inside |z| <= [`SWITCH_RADIUS`] the Maclaurin series is summed in
//! double-double arithmetic, which keeps full `f64` accuracy even where
//! Ai is exponentially small next to the series terms. Beyond it the
//! asymptotic expansions with sector-wise connection formulas take over.

mod asymptotic;
mod dd;
mod series;
mod zeros;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub use zeros::{airy_derivative_zero, airy_function_zero, AiryZero, ZeroKind, MAX_ZERO_INDEX};

/// Radius at which evaluation switches from the series to the asymptotic forms.
pub const SWITCH_RADIUS: f64 = 7.0;

/// Largest |z| accepted by [`airy_eval`].
pub const MAX_MODULUS: f64 = 40.0;

/// Ai, Ai', Bi, Bi' at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AiryPair {
    pub ai: Complex64,
    pub ai_prime: Complex64,
    pub bi: Complex64,
    pub bi_prime: Complex64,
}

impl AiryPair {
    /// Ai Bi' - Ai' Bi, which equals 1/π exactly.
    pub fn wronskian(&self) -> Complex64 {
        self.ai * self.bi_prime - self.ai_prime * self.bi
    }

    /// |Ai Bi'| + |Ai' Bi|: the size of the two products the Wronskian
    /// subtracts. Where Ai and Bi share a dominant exponential this exceeds
    /// 1/π by many orders and bounds the attainable f64 accuracy of W.
    pub fn wronskian_scale(&self) -> f64 {
        (self.ai * self.bi_prime).norm() + (self.ai_prime * self.bi).norm()
    }

    /// |W - 1/π| measured against the larger of 1/π and [`Self::wronskian_scale`].
    pub fn wronskian_conditioned_error(&self) -> f64 {
        (self.wronskian() - WRONSKIAN).norm() / self.wronskian_scale().max(WRONSKIAN)
    }
}

pub const WRONSKIAN: f64 = 1.0 / PI;

pub fn airy_eval(z: Complex64) -> Result<AiryPair> {
    let modulus = z.norm();
    if !modulus.is_finite() || modulus > MAX_MODULUS {
        return Err(Error::Range {
            modulus,
            limit: MAX_MODULUS,
        });
    }
    if modulus <= SWITCH_RADIUS {
        Ok(series::airy_series(z))
    } else {
        Ok(asymptotic::airy_asymptotic(z))
    }
}

/// Real-axis evaluation; the imaginary parts are exactly zero.
pub fn airy_eval_real(x: f64) -> Result<AiryPair> {
    let p = airy_eval(Complex64::new(x, 0.0))?;
    let re = |c: Complex64| Complex64::new(c.re, 0.0);
    Ok(AiryPair {
        ai: re(p.ai),
        ai_prime: re(p.ai_prime),
        bi: re(p.bi),
        bi_prime: re(p.bi_prime),
    })
}

/// Ai(x) for real x. Arguments beyond [`MAX_MODULUS`] on the positive side
/// return 0 (Ai(40) is below 1e-70).
pub fn ai(x: f64) -> Result<f64> {
    if x > MAX_MODULUS {
        return Ok(0.0);
    }
    Ok(airy_eval_real(x)?.ai.re)
}

/// Ai'(x) for real x, with the same positive-side cutoff as [`ai`].
pub fn ai_prime(x: f64) -> Result<f64> {
    if x > MAX_MODULUS {
        return Ok(0.0);
    }
    Ok(airy_eval_real(x)?.ai_prime.re)
}

#[doc(hidden)]
pub mod internals {
    //! Raw access to both representations, for overlap tests and benches.
    use super::*;

    pub fn series(z: Complex64) -> AiryPair {
        series::airy_series(z)
    }

    pub fn asymptotic(z: Complex64) -> AiryPair {
        asymptotic::airy_asymptotic(z)
    }
}
