//! Dense eigenvalues of complex upper Hessenberg matrices.
//!
//! Both matrix families in this crate (companion matrices of monic
//! polynomials and leading principal submatrices of the Faber Toeplitz
//! matrix) are already upper Hessenberg, so the solver skips the general
//! reduction step: Parlett–Reinsch balancing followed by explicitly shifted
//! QR iteration with Givens rotations, Wilkinson shifts, and the usual
//! exceptional-shift escape hatch.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::{LaurentTail, MonicPoly};

/// Upper Hessenberg matrix, row-major.
#[derive(Clone, Debug)]
pub struct Hessenberg {
    n: usize,
    a: Vec<Complex64>,
}

#[inline]
fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

impl Hessenberg {
    /// Wrap a row-major matrix; entries below the subdiagonal are zeroed.
    pub fn new(n: usize, mut a: Vec<Complex64>) -> Result<Self> {
        if a.len() != n * n || n == 0 {
            return Err(Error::BadConfiguration(format!(
                "expected {n}x{n} matrix, got {} entries",
                a.len()
            )));
        }
        for i in 2..n {
            for j in 0..i - 1 {
                a[i * n + j] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(Hessenberg { n, a })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i * self.n + j] = v;
    }

    /// Diagonal similarity scaling by powers of two (Parlett–Reinsch).
    fn balance(&mut self) {
        let n = self.n;
        let radix = 2.0f64;
        let sqrdx = radix * radix;
        loop {
            let mut done = true;
            for i in 0..n {
                let mut c = 0.0;
                let mut r = 0.0;
                for j in 0..n {
                    if j != i {
                        c += cabs1(self.at(j, i));
                        r += cabs1(self.at(i, j));
                    }
                }
                if c == 0.0 || r == 0.0 {
                    continue;
                }
                let mut f = 1.0;
                let s = c + r;
                let mut cc = c;
                while cc < r / radix {
                    f *= radix;
                    cc *= sqrdx;
                }
                while cc > r * radix {
                    f /= radix;
                    cc /= sqrdx;
                }
                if (cc + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        let v = self.at(i, j) * g;
                        self.set(i, j, v);
                    }
                    for j in 0..n {
                        let v = self.at(j, i) * f;
                        self.set(j, i, v);
                    }
                }
            }
            if done {
                break;
            }
        }
    }

    /// All eigenvalues, via balancing plus shifted QR with deflation.
    pub fn eigenvalues(mut self) -> Result<Vec<Complex64>> {
        self.balance();
        let n = self.n;
        let eps = f64::EPSILON;
        let mut eigs = Vec::with_capacity(n);
        let mut hi = n - 1;
        let mut since_deflation = 0usize;

        'outer: loop {
            if hi == 0 {
                eigs.push(self.at(0, 0));
                break;
            }
            // split at the bottom-most negligible subdiagonal
            let mut lo = 0;
            for m in (1..=hi).rev() {
                let sub = cabs1(self.at(m, m - 1));
                let mut tst = cabs1(self.at(m - 1, m - 1)) + cabs1(self.at(m, m));
                if tst == 0.0 {
                    // fall back to the norm of the active block
                    for i in 0..=hi {
                        tst += cabs1(self.at(i, i));
                        if i > 0 {
                            tst += cabs1(self.at(i, i - 1));
                        }
                    }
                }
                if sub <= eps * tst {
                    self.set(m, m - 1, Complex64::new(0.0, 0.0));
                    lo = m;
                    break;
                }
            }
            if lo == hi {
                eigs.push(self.at(hi, hi));
                hi -= 1;
                since_deflation = 0;
                continue 'outer;
            }

            if since_deflation >= 60 {
                return Err(Error::EigenNonConvergence(hi + 1 - lo));
            }

            // shift
            let shift = if since_deflation % 10 == 9 {
                // exceptional shift to break symmetric stalls
                self.at(hi, hi) + Complex64::new(0.75 * cabs1(self.at(hi, hi - 1)), 0.0)
            } else {
                let p = self.at(hi - 1, hi - 1);
                let q = self.at(hi - 1, hi);
                let r = self.at(hi, hi - 1);
                let s = self.at(hi, hi);
                let t = (p + s) * 0.5;
                let d = ((p - s) * (p - s) * 0.25 + q * r).sqrt();
                let e1 = t + d;
                let e2 = t - d;
                if cabs1(e1 - s) < cabs1(e2 - s) {
                    e1
                } else {
                    e2
                }
            };
            since_deflation += 1;

            self.qr_sweep(lo, hi, shift);
        }
        Ok(eigs)
    }

    /// One explicit shifted QR step on the active window [lo..=hi].
    fn qr_sweep(&mut self, lo: usize, hi: usize, shift: Complex64) {
        for i in lo..=hi {
            let v = self.at(i, i) - shift;
            self.set(i, i, v);
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            let x = self.at(i, i);
            let y = self.at(i + 1, i);
            let (c, s) = givens(x, y);
            rots.push((c, s));
            for j in i..=hi {
                let t0 = self.at(i, j);
                let t1 = self.at(i + 1, j);
                self.set(i, j, c * t0 + s * t1);
                self.set(i + 1, j, -s.conj() * t0 + c * t1);
            }
        }
        for (k, &(c, s)) in rots.iter().enumerate() {
            let i = lo + k;
            let rmax = (i + 1).min(hi);
            for r in lo..=rmax {
                let t0 = self.at(r, i);
                let t1 = self.at(r, i + 1);
                self.set(r, i, c * t0 + s.conj() * t1);
                self.set(r, i + 1, -s * t0 + c * t1);
            }
        }
        for i in lo..=hi {
            let v = self.at(i, i) + shift;
            self.set(i, i, v);
        }
    }
}

/// Givens pair (c real, s complex) with `c^2 + |s|^2 = 1` zeroing y against x.
#[inline]
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let xn = x.norm();
    let yn = y.norm();
    if yn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let nu = xn.hypot(yn);
    if xn == 0.0 {
        return (0.0, y.conj() / yn);
    }
    let alpha = x / xn;
    (xn / nu, alpha * y.conj() / nu)
}

/// Companion matrix of a monic polynomial (ones on the subdiagonal, negated
/// coefficients in the last column).
pub fn companion(p: &MonicPoly) -> Result<Hessenberg> {
    let k = p.degree();
    if k == 0 {
        return Err(Error::BadDegree(0));
    }
    let mut a = vec![Complex64::new(0.0, 0.0); k * k];
    for i in 0..k {
        a[i * k + (k - 1)] = -p.coeff(i);
        if i + 1 < k {
            a[(i + 1) * k + i] = Complex64::new(1.0, 0.0);
        }
    }
    Hessenberg::new(k, a)
}

/// Leading k×k principal submatrix of the Toeplitz matrix with first row
/// `(b_0, b_1, b_2, ...)` and ones on the subdiagonal.
pub fn toeplitz_principal(tail: &LaurentTail, k: usize) -> Result<Hessenberg> {
    if k == 0 {
        return Err(Error::BadDegree(0));
    }
    let mut a = vec![Complex64::new(0.0, 0.0); k * k];
    for i in 0..k {
        for j in i..k {
            a[i * k + j] = tail.coeff(j - i);
        }
        if i + 1 < k {
            a[(i + 1) * k + i] = Complex64::new(1.0, 0.0);
        }
    }
    Hessenberg::new(k, a)
}
