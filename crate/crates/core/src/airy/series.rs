//! Maclaurin expansion of Ai, Ai', Bi, Bi' in double-double precision.
//!
//! Ai = c1 f - c2 g and Bi = sqrt(3) (c1 f + c2 g), with
//! f = sum_k z^{3k} / prod_{j<=k} (3j-1)(3j) and
//! g = sum_k z^{3k+1} / prod_{j<=k} (3j)(3j+1).

use num_complex::Complex64;

use super::dd::{CDd, Dd};
use super::AiryPair;

// Ai(0), -Ai'(0), Bi(0), Bi'(0) as hi + lo pairs.
const AI0: Dd = Dd::new(0.3550280538878172, 2.05233632436212e-17);
const NEG_AIP0: Dd = Dd::new(0.2588194037928068, -2.522243111610832e-17);
const BI0: Dd = Dd::new(0.6149266274460007, 5.0899207794891416e-17);
const BIP0: Dd = Dd::new(0.4482883573538264, -2.5363237774417305e-17);

const MAX_TERMS: usize = 400;
const REL_STOP: f64 = 1e-34;

pub(crate) fn airy_series(z: Complex64) -> AiryPair {
    let zd = CDd::from_c64(z);
    let z2 = zd.mul(zd);
    let z3 = z2.mul(zd);

    // Running terms of f, f', g, g'.
    let mut tf = CDd::ONE;
    let mut tfp = z2.div_f64(2.0);
    let mut tg = zd;
    let mut tgp = CDd::ONE;

    let mut f = tf;
    let mut fp = tfp;
    let mut g = tg;
    let mut gp = tgp;

    for k in 0..MAX_TERMS {
        let k3 = 3.0 * k as f64;
        tf = tf.mul(z3.div_f64((k3 + 2.0) * (k3 + 3.0)));
        tg = tg.mul(z3.div_f64((k3 + 3.0) * (k3 + 4.0)));
        tgp = tgp.mul(z3.div_f64((k3 + 1.0) * (k3 + 3.0)));
        tfp = tfp.mul(z3.div_f64((k3 + 3.0) * (k3 + 5.0)));
        f = f.add(tf);
        g = g.add(tg);
        fp = fp.add(tfp);
        gp = gp.add(tgp);

        let small = |t: CDd, s: CDd| t.norm_hi() <= REL_STOP * s.norm_hi().max(f64::MIN_POSITIVE);
        if small(tf, f) && small(tg, g) && small(tfp, fp) && small(tgp, gp) {
            break;
        }
    }

    let ai = f.scale(AI0).add(g.scale(NEG_AIP0.neg()));
    let ai_prime = fp.scale(AI0).add(gp.scale(NEG_AIP0.neg()));
    let bi = f.scale(BI0).add(g.scale(BIP0));
    let bi_prime = fp.scale(BI0).add(gp.scale(BIP0));

    AiryPair {
        ai: ai.to_c64(),
        ai_prime: ai_prime.to_c64(),
        bi: bi.to_c64(),
        bi_prime: bi_prime.to_c64(),
    }
}
