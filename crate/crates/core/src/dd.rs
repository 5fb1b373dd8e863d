//! Double-double arithmetic (~31 significant digits).
//!
//! Used only for Newton re-polishing of polynomial roots, where plain f64
//! evaluation of the residual cancels catastrophically. Products use the
//! FMA-based error-free transform, so every elementary step is exact.

use num_complex::Complex64;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
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
    (p, f64::mul_add(a, b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul(Dd::from_f64(q1)));
        let q2 = r.hi / other.hi;
        let r = r.sub(other.mul(Dd::from_f64(q2)));
        let q3 = r.hi / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::from_f64(q3))
    }

    #[inline]
    pub fn abs(self) -> f64 {
        self.to_f64().abs()
    }
}

/// Complex number with double-double real and imaginary parts.
#[derive(Clone, Copy, Debug, Default)]
pub struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    pub const ZERO: DdComplex = DdComplex { re: Dd::ZERO, im: Dd::ZERO };

    #[inline]
    pub fn from_c64(z: Complex64) -> DdComplex {
        DdComplex { re: Dd::from_f64(z.re), im: Dd::from_f64(z.im) }
    }

    #[inline]
    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    #[inline]
    pub fn add(self, other: DdComplex) -> DdComplex {
        DdComplex { re: self.re.add(other.re), im: self.im.add(other.im) }
    }

    #[inline]
    pub fn sub(self, other: DdComplex) -> DdComplex {
        DdComplex { re: self.re.sub(other.re), im: self.im.sub(other.im) }
    }

    #[inline]
    pub fn mul(self, other: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re.mul(other.re).sub(self.im.mul(other.im)),
            im: self.re.mul(other.im).add(self.im.mul(other.re)),
        }
    }

    #[inline]
    pub fn div(self, other: DdComplex) -> DdComplex {
        let d = other.re.mul(other.re).add(other.im.mul(other.im));
        let num = self.mul(DdComplex { re: other.re, im: other.im.neg() });
        DdComplex { re: num.re.div(d), im: num.im.div(d) }
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.re.mul(self.re).add(self.im.mul(self.im)).to_f64()
    }

    #[inline]
    pub fn abs(self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_addition_keeps_low_bits() {
        // 1 + 1e-20 is unrepresentable in f64 but exact in Dd.
        let a = Dd::from_f64(1.0).add(Dd::from_f64(1e-20));
        assert_eq!(a.hi, 1.0);
        assert_eq!(a.lo, 1e-20);
        let b = a.sub(Dd::from_f64(1.0));
        assert!((b.to_f64() - 1e-20).abs() < 1e-35);
    }

    #[test]
    fn dd_product_is_error_free() {
        let a = Dd::from_f64(1.0 + 2f64.powi(-30));
        let p = a.mul(a);
        // (1+e)^2 = 1 + 2e + e^2 with e = 2^-30; e^2 = 2^-60 is below f64 ulp of the hi part.
        let expect_lo = 2f64.powi(-60);
        assert!((p.lo - expect_lo).abs() < 1e-25, "lo = {:e}", p.lo);
    }

    #[test]
    fn dd_division_round_trip() {
        let a = Dd::from_f64(std::f64::consts::PI);
        let b = Dd::from_f64(std::f64::consts::E);
        let q = a.div(b).mul(b).sub(a);
        assert!(q.abs() < 1e-30);
    }

    #[test]
    fn ddcomplex_mul_matches_c64() {
        let x = DdComplex::from_c64(Complex64::new(1.25, -0.5));
        let y = DdComplex::from_c64(Complex64::new(-2.0, 3.5));
        let z = x.mul(y).to_c64();
        let w = Complex64::new(1.25, -0.5) * Complex64::new(-2.0, 3.5);
        assert!((z - w).norm() < 1e-15);
    }

    #[test]
    fn ddcomplex_division() {
        let x = DdComplex::from_c64(Complex64::new(3.0, 4.0));
        let y = DdComplex::from_c64(Complex64::new(1.0, -2.0));
        let q = x.div(y).mul(y).sub(x);
        assert!(q.abs() < 1e-29);
    }
}
