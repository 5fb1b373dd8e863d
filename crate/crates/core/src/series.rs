//! Value types for truncated Laurent tails, monic polynomials, Möbius
//! transformations, and circle-sample ↔ coefficient conversion.
//!
//! A tail stores the coefficients `b_0..b_N` of
//!
//! ```text
//! g(w) = w + b_0 + b_1/w + b_2/w^2 + ... + b_N/w^N
//! ```
//!
//! Coefficients are indexed by the exponent `k` of `w^{-k}`; polynomials are
//! stored ascending by power with the leading coefficient implicitly 1, so
//! both serialize without ambiguity.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Default floor on |det| below which a Möbius matrix is rejected.
pub const MOBIUS_DET_FLOOR: f64 = 1e-14;

// ---------------------------------------------------------------------------
// LaurentTail
// ---------------------------------------------------------------------------

/// Truncated Laurent tail of a map `g(w) = w + Σ_{k=0}^{N} b_k w^{-k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentTail {
    coeffs: Vec<Complex64>,
    rho0_hat: f64,
}

impl LaurentTail {
    /// Build a tail from `b_0..b_N`. All entries must be finite.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::BadConfiguration("tail needs at least b_0".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::BadConfiguration("tail coefficient is not finite".into()));
        }
        let rho0_hat = estimate_rho0(&coeffs);
        Ok(LaurentTail { coeffs, rho0_hat })
    }

    /// The all-zero tail of order `n` (the identity map `g(w) = w`).
    pub fn zero(n: usize) -> Self {
        LaurentTail { coeffs: vec![Complex64::new(0.0, 0.0); n + 1], rho0_hat: 0.0 }
    }

    /// Convenience constructor from `(index, value)` pairs; missing entries are 0.
    pub fn from_pairs(n: usize, pairs: &[(usize, Complex64)]) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        for &(k, v) in pairs {
            if k > n {
                return Err(Error::BadConfiguration(format!("index {k} exceeds order {n}")));
            }
            coeffs[k] = v;
        }
        LaurentTail::new(coeffs)
    }

    /// Truncation order N (the tail holds N+1 coefficients).
    pub fn truncation_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `max_{1<=k<=N} |b_k|^{1/k}`, the finite-range stand-in for limsup |b_k|^{1/k}.
    pub fn rho0_hat(&self) -> f64 {
        self.rho0_hat
    }

    /// Coefficient `b_k`; zero beyond the truncation order.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Evaluate `g(w) = w + Σ b_k w^{-k}`, Horner in 1/w. Errors on w = 0.
    pub fn eval(&self, w: Complex64) -> Result<Complex64> {
        if w.norm() == 0.0 {
            return Err(Error::Domain("eval_laurent at w = 0".into()));
        }
        let v = w.inv();
        let n = self.truncation_order();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (1..=n).rev() {
            acc = self.coeffs[k] + v * acc;
        }
        Ok(w + self.coeffs[0] + v * acc)
    }

    /// Evaluate `g'(w) = 1 - Σ_{k>=1} k b_k w^{-k-1}`.
    pub fn eval_derivative(&self, w: Complex64) -> Result<Complex64> {
        if w.norm() == 0.0 {
            return Err(Error::Domain("derivative at w = 0".into()));
        }
        let v = w.inv();
        let n = self.truncation_order();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (1..=n).rev() {
            acc = (k as f64) * self.coeffs[k] + v * acc;
        }
        Ok(Complex64::new(1.0, 0.0) - v * v * acc)
    }
}

fn estimate_rho0(coeffs: &[Complex64]) -> f64 {
    let mut best = 0.0f64;
    for (k, b) in coeffs.iter().enumerate().skip(1) {
        let m = b.norm();
        if m > 0.0 {
            best = best.max(m.powf(1.0 / k as f64));
        }
    }
    best
}

#[derive(Serialize, Deserialize)]
struct TailSchema {
    b: Vec<(f64, f64)>,
    #[serde(rename = "N")]
    n: usize,
}

impl Serialize for LaurentTail {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TailSchema {
            b: self.coeffs.iter().map(|c| (c.re, c.im)).collect(),
            n: self.truncation_order(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentTail {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = TailSchema::deserialize(d)?;
        if raw.b.len() != raw.n + 1 {
            return Err(serde::de::Error::custom(format!(
                "tail schema mismatch: {} coefficients for N = {}",
                raw.b.len(),
                raw.n
            )));
        }
        LaurentTail::new(raw.b.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
            .map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// MonicPoly
// ---------------------------------------------------------------------------

/// Monic complex polynomial `z^k + c_{k-1} z^{k-1} + ... + c_0`.
///
/// Only the non-leading coefficients are stored, ascending by power, so the
/// representation is unique and the leading coefficient is exactly 1.
#[derive(Clone, Debug, PartialEq)]
pub struct MonicPoly {
    coeffs: Vec<Complex64>,
}

impl MonicPoly {
    /// Monic polynomial with non-leading coefficients `c_0..c_{k-1}`.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        MonicPoly { coeffs }
    }

    /// The constant polynomial 1 (degree 0).
    pub fn one() -> Self {
        MonicPoly { coeffs: Vec::new() }
    }

    /// `z - c` and friends: monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)]; // full coefficients, ascending
        for &r in roots {
            coeffs.push(Complex64::new(0.0, 0.0));
            for j in (0..coeffs.len() - 1).rev() {
                let lower = coeffs[j];
                coeffs[j + 1] += lower;
                coeffs[j] = -r * lower;
            }
            // the loop above computes (poly) * (z - r) in place
        }
        // strip the leading 1
        coeffs.pop();
        MonicPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// Non-leading coefficients, ascending by power.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> Complex64 {
        if j == self.degree() {
            Complex64::new(1.0, 0.0)
        } else {
            self.coeffs.get(j).copied().unwrap_or_else(|| Complex64::new(0.0, 0.0))
        }
    }

    /// Horner evaluation of `z^k + Σ c_j z^j`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for j in (0..self.coeffs.len()).rev() {
            acc = acc * z + self.coeffs[j];
        }
        acc
    }

    /// Simultaneous Horner evaluation of p and p'.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(1.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for j in (0..self.coeffs.len()).rev() {
            dp = dp * z + p;
            p = p * z + self.coeffs[j];
        }
        (p, dp)
    }

    /// Largest coefficient magnitude including the leading 1.
    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct PolySchema {
    degree: usize,
    coeffs: Vec<(f64, f64)>,
}

impl Serialize for MonicPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolySchema {
            degree: self.degree(),
            coeffs: self.coeffs.iter().map(|c| (c.re, c.im)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MonicPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PolySchema::deserialize(d)?;
        if raw.coeffs.len() != raw.degree {
            return Err(serde::de::Error::custom(format!(
                "poly schema mismatch: {} coefficients for degree {}",
                raw.coeffs.len(),
                raw.degree
            )));
        }
        Ok(MonicPoly::new(
            raw.coeffs.into_iter().map(|(re, im)| Complex64::new(re, im)).collect(),
        ))
    }
}

// ---------------------------------------------------------------------------
// Mobius
// ---------------------------------------------------------------------------

/// Point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtComplex {
    Finite(Complex64),
    Infinity,
}

/// Möbius transformation `z ↦ (az + b)/(cz + d)` with `ad - bc` bounded away
/// from zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    #[serde(with = "c64_pair")]
    pub a: Complex64,
    #[serde(with = "c64_pair")]
    pub b: Complex64,
    #[serde(with = "c64_pair")]
    pub c: Complex64,
    #[serde(with = "c64_pair")]
    pub d: Complex64,
}

pub(crate) mod c64_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        (z.re, z.im).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let (re, im) = <(f64, f64)>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

impl Mobius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let m = Mobius { a, b, c, d };
        let det = m.determinant().norm();
        if det < MOBIUS_DET_FLOOR {
            return Err(Error::SingularMobius(det));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        Mobius {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// Apply to a finite point. The pole maps to an infinite float value;
    /// callers that may hit the pole should use [`Mobius::apply_ext`].
    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// Apply with the sphere conventions `m(∞) = a/c` and `m(-d/c) = ∞`.
    pub fn apply_ext(&self, z: ExtComplex) -> ExtComplex {
        match z {
            ExtComplex::Infinity => {
                if self.c.norm() == 0.0 {
                    ExtComplex::Infinity
                } else {
                    ExtComplex::Finite(self.a / self.c)
                }
            }
            ExtComplex::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() == 0.0 {
                    ExtComplex::Infinity
                } else {
                    ExtComplex::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Inverse transformation (adjugate matrix; same projective class).
    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Composition `self ∘ other` (matrix product).
    pub fn compose(&self, other: &Mobius) -> Mobius {
        Mobius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// Scale so the determinant is 1 (branch of the square root is arbitrary).
    pub fn normalized(&self) -> Mobius {
        let s = self.determinant().sqrt();
        Mobius { a: self.a / s, b: self.b / s, c: self.c / s, d: self.d / s }
    }
}

// ---------------------------------------------------------------------------
// CircleSamples
// ---------------------------------------------------------------------------

/// `M` samples of a function on the circle `|w| = R`, `w_j = R e^{2πi j/M}`,
/// with `M` a power of two.
#[derive(Clone, Debug)]
pub struct CircleSamples {
    radius: f64,
    values: Vec<Complex64>,
}

impl CircleSamples {
    pub fn new(radius: f64, values: Vec<Complex64>) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::Domain("sample radius must be positive".into()));
        }
        if !values.len().is_power_of_two() || values.len() < 2 {
            return Err(Error::SampleCount(values.len()));
        }
        Ok(CircleSamples { radius, values })
    }

    /// Sample `f` at the M roots-of-unity nodes on `|w| = radius`.
    pub fn from_fn(
        radius: f64,
        m: usize,
        mut f: impl FnMut(Complex64) -> Result<Complex64>,
    ) -> Result<Self> {
        if !m.is_power_of_two() || m < 2 {
            return Err(Error::SampleCount(m));
        }
        let mut values = Vec::with_capacity(m);
        for j in 0..m {
            values.push(f(circle_node(radius, j, m))?);
        }
        CircleSamples::new(radius, values)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn node(&self, j: usize) -> Complex64 {
        circle_node(self.radius, j, self.values.len())
    }
}

pub fn circle_node(radius: f64, j: usize, m: usize) -> Complex64 {
    let t = TAU * (j as f64) / (m as f64);
    Complex64::new(radius * t.cos(), radius * t.sin())
}

/// Default sample count for a requested truncation order: 4x the order,
/// rounded up to a power of two (2x margin over the aliasing bound).
pub fn default_sample_count(order: usize) -> usize {
    (4 * (order + 1)).next_power_of_two()
}

/// Recover `b_0..b_N` from samples of a map `w + Σ b_k w^{-k}` by discrete
/// Fourier inversion. Returns the tail and the max reconstruction error over
/// the sample circle.
pub fn coeffs_from_samples(samples: &CircleSamples, n: usize) -> Result<(LaurentTail, f64)> {
    let m = samples.len();
    if n + 1 > m / 2 {
        return Err(Error::TruncationOrder { order: n, samples: m });
    }
    let r = samples.radius();
    let values = samples.values();

    // b_0 = mean of (g(w_j) - w_j); the w term carries frequency +1 only.
    let mut b0 = Complex64::new(0.0, 0.0);
    for (j, &v) in values.iter().enumerate() {
        b0 += v - samples.node(j);
    }
    b0 /= m as f64;

    // twiddle table: e^{2πi t/M}
    let tw: Vec<Complex64> = (0..m)
        .map(|t| Complex64::from_polar(1.0, TAU * (t as f64) / (m as f64)))
        .collect();

    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(b0);
    let mut rk = r;
    for k in 1..=n {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &v) in values.iter().enumerate() {
            acc += v * tw[(j * k) % m];
        }
        coeffs.push(acc * rk / m as f64);
        rk *= r;
    }

    let tail = LaurentTail::new(coeffs)?;
    let mut residual = 0.0f64;
    for (j, &v) in values.iter().enumerate() {
        residual = residual.max((tail.eval(samples.node(j))? - v).norm());
    }
    Ok((tail, residual))
}

/// Deterministic random tail with `|b_k| <= decay^k`, for test fixtures and
/// the oracle experiment suite.
pub fn random_decaying_tail(seed: u64, n: usize, decay: f64) -> LaurentTail {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut scale = 1.0;
    for _ in 0..=n {
        let re: f64 = rng.gen_range(-0.5..0.5);
        let im: f64 = rng.gen_range(-0.5..0.5);
        coeffs.push(Complex64::new(re * scale, im * scale));
        scale *= decay;
    }
    LaurentTail::new(coeffs).expect("finite by construction")
}
