//! Large-|z| expansions.
//!
//! For |arg w| <= 2π/3 the single-exponential forms
//!   Ai(w)  ~ e^{-ζ} / (2√π w^{1/4}) Σ (-1)^k u_k ζ^{-k}
//!   Ai'(w) ~ -w^{1/4} e^{-ζ} / (2√π) Σ (-1)^k v_k ζ^{-k},   ζ = (2/3) w^{3/2}
//! are used directly; elsewhere the connection formula
//! Ai(z) + ω Ai(ωz) + ω² Ai(ω²z) = 0 maps back into that sector.
//! Bi comes from Bi(z) = e^{iπ/6} Ai(ωz) + e^{-iπ/6} Ai(ω̄z).

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI};
use std::sync::OnceLock;

use num_complex::Complex64;

use super::AiryPair;

const N_COEF: usize = 64;

fn coefficients() -> &'static ([f64; N_COEF], [f64; N_COEF]) {
    static COEF: OnceLock<([f64; N_COEF], [f64; N_COEF])> = OnceLock::new();
    COEF.get_or_init(|| {
        let mut u = [0.0; N_COEF];
        let mut v = [0.0; N_COEF];
        u[0] = 1.0;
        v[0] = 1.0;
        for k in 1..N_COEF {
            let kf = k as f64;
            u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
            v[k] = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u[k];
        }
        (u, v)
    })
}

/// Optimally truncated Σ (-1)^k c_k ζ^{-k}.
fn truncated_sum(c: &[f64], zeta: Complex64) -> Complex64 {
    let inv = -zeta.inv();
    let mut pow = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(c[0], 0.0);
    let mut last = f64::INFINITY;
    for &ck in &c[1..] {
        pow *= inv;
        let term = pow * ck;
        let size = term.norm();
        if size > last {
            break;
        }
        sum += term;
        last = size;
        if size <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

/// Ai and Ai' from the single-exponential expansion; accurate for
/// |arg w| <= 2π/3 and |w| large.
fn ai_sector(w: Complex64) -> (Complex64, Complex64) {
    let (u, v) = coefficients();
    let root = w.sqrt();
    let quarter = root.sqrt();
    let zeta = w * root * (2.0 / 3.0);
    let pref = (-zeta).exp() / (2.0 * PI.sqrt());
    let ai = pref / quarter * truncated_sum(u, zeta);
    let aip = -pref * quarter * truncated_sum(v, zeta);
    (ai, aip)
}

fn omega() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * FRAC_PI_3)
}

fn ai_any(z: Complex64) -> (Complex64, Complex64) {
    if z.arg().abs() <= 2.0 * FRAC_PI_3 {
        return ai_sector(z);
    }
    let w = omega();
    let w2 = w * w;
    let (a1, d1) = ai_sector(w * z);
    let (a2, d2) = ai_sector(w2 * z);
    // Ai'(z) = -ω² Ai'(ωz) - ω⁴ Ai'(ω²z), ω⁴ = ω.
    (-(w * a1) - w2 * a2, -(w2 * d1) - w * d2)
}

pub(crate) fn airy_asymptotic(z: Complex64) -> AiryPair {
    let (ai, ai_prime) = ai_any(z);
    let w = omega();
    let wc = w.conj();
    let (ap, dp) = ai_any(w * z);
    let (am, dm) = ai_any(wc * z);
    let ep = Complex64::from_polar(1.0, FRAC_PI_6);
    let em = ep.conj();
    AiryPair {
        ai,
        ai_prime,
        bi: ep * ap + em * am,
        bi_prime: ep * w * dp + em * wc * dm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_coefficients() {
        let (u, v) = coefficients();
        assert!((u[1] - 5.0 / 72.0).abs() < 1e-16);
        assert!((v[1] + 7.0 / 72.0).abs() < 1e-16);
        assert!((u[2] - 385.0 / 10368.0).abs() < 1e-16);
    }
}
