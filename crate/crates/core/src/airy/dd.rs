//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`
//! carrying roughly 32 significant digits. Only the handful of operations
//! the Maclaurin series needs are provided.

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn sub(self, b: Dd) -> Dd {
        self.add(b.neg())
    }

    pub fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let (s, f) = two_sum(self.hi, -p);
        let f = f - e + self.lo;
        let q2 = (s + f) / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct CDd {
    pub re: Dd,
    pub im: Dd,
}

impl CDd {
    pub const ONE: CDd = CDd {
        re: Dd::ONE,
        im: Dd::ZERO,
    };

    pub fn from_c64(z: Complex64) -> Self {
        CDd {
            re: Dd::from_f64(z.re),
            im: Dd::from_f64(z.im),
        }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// Cheap magnitude estimate from the leading parts.
    pub fn norm_hi(self) -> f64 {
        self.re.hi.hypot(self.im.hi)
    }

    pub fn add(self, b: CDd) -> CDd {
        CDd {
            re: self.re.add(b.re),
            im: self.im.add(b.im),
        }
    }

    pub fn mul(self, b: CDd) -> CDd {
        CDd {
            re: self.re.mul(b.re).sub(self.im.mul(b.im)),
            im: self.re.mul(b.im).add(self.im.mul(b.re)),
        }
    }

    pub fn scale(self, s: Dd) -> CDd {
        CDd {
            re: self.re.mul(s),
            im: self.im.mul(s),
        }
    }

    pub fn div_f64(self, b: f64) -> CDd {
        CDd {
            re: self.re.div_f64(b),
            im: self.im.div_f64(b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_third_round_trips_beyond_f64() {
        let third = Dd::ONE.div_f64(3.0);
        let back = third.mul(Dd::from_f64(3.0)).sub(Dd::ONE);
        assert!(back.to_f64().abs() < 1e-31, "{:?}", back);
        assert!(third.lo != 0.0);
    }

    #[test]
    fn cancellation_keeps_low_word() {
        // (1 + 2^-60) - 1 is invisible in f64 but exact here.
        let tiny = 2f64.powi(-60);
        let a = Dd::ONE.add(Dd::from_f64(tiny));
        assert_eq!(a.sub(Dd::ONE).to_f64(), tiny);
    }

    #[test]
    fn complex_product_matches_f64_to_rounding() {
        let a = Complex64::new(1.25, -0.5);
        let b = Complex64::new(-3.0, 0.75);
        let p = CDd::from_c64(a).mul(CDd::from_c64(b)).to_c64();
        assert!((p - a * b).norm() < 1e-15);
    }
}
