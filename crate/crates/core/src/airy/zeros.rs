use std::f64::consts::PI;

use serde::Serialize;

use super::airy_eval_real;
use crate::error::{Error, Result};

pub const MAX_ZERO_INDEX: usize = 50;
const MAX_NEWTON: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroKind {
    /// Zero of Ai.
    Function,
    /// Zero of Ai'.
    Derivative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AiryZero {
    pub kind: ZeroKind,
    pub index: usize,
    pub location: f64,
}

/// k-th negative zero a_k of Ai.
pub fn airy_function_zero(k: usize) -> Result<AiryZero> {
    find_zero(ZeroKind::Function, k)
}

/// k-th negative zero a'_k of Ai'.
pub fn airy_derivative_zero(k: usize) -> Result<AiryZero> {
    find_zero(ZeroKind::Derivative, k)
}

/// Leading terms of the large-k expansions of -a_k and -a'_k.
fn initial_guess(kind: ZeroKind, k: usize) -> f64 {
    let kf = k as f64;
    match kind {
        ZeroKind::Function => {
            let t = 3.0 * PI * (4.0 * kf - 1.0) / 8.0;
            let t2 = t.powi(-2);
            -t.powf(2.0 / 3.0) * (1.0 + t2 * (5.0 / 48.0 - t2 * 5.0 / 36.0))
        }
        ZeroKind::Derivative => {
            let t = 3.0 * PI * (4.0 * kf - 3.0) / 8.0;
            let t2 = t.powi(-2);
            -t.powf(2.0 / 3.0) * (1.0 - t2 * (7.0 / 48.0 - t2 * 35.0 / 288.0))
        }
    }
}

fn find_zero(kind: ZeroKind, k: usize) -> Result<AiryZero> {
    if k == 0 || k > MAX_ZERO_INDEX {
        return Err(Error::Domain(format!(
            "Airy zero index must lie in 1..={MAX_ZERO_INDEX}, got {k}"
        )));
    }

    // target(x) and its derivative: Ai and Ai', or Ai' and Ai'' = x Ai.
    let eval = |x: f64| -> Result<(f64, f64)> {
        let p = airy_eval_real(x)?;
        Ok(match kind {
            ZeroKind::Function => (p.ai.re, p.ai_prime.re),
            ZeroKind::Derivative => (p.ai_prime.re, x * p.ai.re),
        })
    };

    let guess = initial_guess(kind, k);
    // Neighbouring zeros sit roughly π/sqrt|x| apart; stay well inside that.
    let spacing = PI / guess.abs().max(1.0).sqrt();
    let mut half = 0.4 * spacing;
    let (mut lo, mut hi);
    let mut attempts = 0;
    loop {
        lo = guess - half;
        hi = (guess + half).min(0.0);
        if eval(lo)?.0.signum() != eval(hi)?.0.signum() {
            break;
        }
        attempts += 1;
        if attempts > 4 {
            return Err(Error::Convergence {
                what: "Airy zero bracketing",
                iterations: attempts,
            });
        }
        half *= 1.2;
    }

    let f_lo = eval(lo)?.0;
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        let fm = eval(mid)?.0;
        if fm.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_NEWTON {
        let (f, df) = eval(x)?;
        let step = f / df;
        x -= step;
        if step.abs() <= 4.0 * f64::EPSILON * x.abs() {
            let residual = eval(x)?.0.abs();
            if residual < 1e-12 {
                return Ok(AiryZero {
                    kind,
                    index: k,
                    location: x,
                });
            }
        }
    }
    Err(Error::Convergence {
        what: "Airy zero Newton iteration",
        iterations: MAX_NEWTON,
    })
}
