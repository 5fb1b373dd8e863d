//! Zero ensembles, empirical-measure diagnostics, and stable point
//! evaluation of the recurrences at large degree.
//!
//! Root extraction is deliberately dual-route: balanced companion-matrix
//! eigenvalues cross-checked against the Toeplitz eigenvalue route, with an
//! extended-precision Newton polish for the ill-conditioned large-k cases.
//! The tolerance ladder (1e-6 for k ≤ 40, 1e-3 for k ≤ 120) reflects the
//! nonnormality of the Toeplitz submatrices, not a bug budget.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dd::DdComplex;
use crate::eigen::{companion, toeplitz_principal};
use crate::error::{Error, Result};
use crate::series::{LaurentTail, MonicPoly};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// ---------------------------------------------------------------------------
// ZeroEnsemble
// ---------------------------------------------------------------------------

/// Which polynomial family an ensemble came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeroSource {
    /// Normalized derivatives P_k.
    Pk,
    /// Faber polynomials F_k.
    Fk,
}

impl ZeroSource {
    pub fn label(&self) -> &'static str {
        match self {
            ZeroSource::Pk => "Pk",
            ZeroSource::Fk => "Fk",
        }
    }
}

/// Multiset of the k zeros of a degree-k polynomial, each carrying weight 1/k.
#[derive(Clone, Debug)]
pub struct ZeroEnsemble {
    degree: usize,
    zeros: Vec<Complex64>,
    source: ZeroSource,
}

impl ZeroEnsemble {
    pub fn new(degree: usize, zeros: Vec<Complex64>, source: ZeroSource) -> Result<Self> {
        if zeros.len() != degree || degree == 0 {
            return Err(Error::BadConfiguration(format!(
                "{} zeros for degree {degree}",
                zeros.len()
            )));
        }
        Ok(ZeroEnsemble { degree, zeros, source })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn source(&self) -> ZeroSource {
        self.source
    }

    /// Uniform weight 1/k.
    pub fn weight(&self) -> f64 {
        1.0 / self.degree as f64
    }

    /// Total mass; exactly 1 whenever the count invariant holds.
    pub fn total_mass(&self) -> f64 {
        self.zeros.len() as f64 / self.degree as f64
    }
}

// ---------------------------------------------------------------------------
// PolylineSet
// ---------------------------------------------------------------------------

/// A union of polylines approximating a (possibly branched) 1-dimensional set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolylineSet {
    /// Max consecutive-point spacing.
    pub h: f64,
    /// Each leg is an ordered list of [re, im] points.
    #[serde(with = "legs_schema")]
    pub legs: Vec<Vec<Complex64>>,
}

mod legs_schema {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        legs: &[Vec<Complex64>],
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let raw: Vec<Vec<(f64, f64)>> = legs
            .iter()
            .map(|leg| leg.iter().map(|p| (p.re, p.im)).collect())
            .collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<Vec<Vec<Complex64>>, D::Error> {
        let raw: Vec<Vec<(f64, f64)>> = Vec::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|leg| leg.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
            .collect())
    }
}

impl PolylineSet {
    /// Build from legs, recording the observed max spacing as the resolution.
    pub fn from_legs(legs: Vec<Vec<Complex64>>) -> Result<Self> {
        if legs.iter().all(|l| l.len() < 2) {
            return Err(Error::EmptyTarget);
        }
        let mut h = 0.0f64;
        for leg in &legs {
            for pair in leg.windows(2) {
                h = h.max((pair[1] - pair[0]).norm());
            }
        }
        Ok(PolylineSet { h, legs })
    }

    pub fn is_empty(&self) -> bool {
        self.legs.iter().all(|l| l.is_empty())
    }

    /// Exact distance from a point to the union of the polyline segments.
    pub fn distance(&self, z: Complex64) -> f64 {
        let mut best = f64::INFINITY;
        for leg in &self.legs {
            if leg.len() == 1 {
                best = best.min((z - leg[0]).norm());
            }
            for pair in leg.windows(2) {
                best = best.min(segment_distance(z, pair[0], pair[1]));
            }
        }
        best
    }

    /// All stored vertices.
    pub fn vertices(&self) -> impl Iterator<Item = &Complex64> {
        self.legs.iter().flatten()
    }
}

/// Distance from z to the segment [a, b].
pub fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = ((z - a).re * ab.re + (z - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

// ---------------------------------------------------------------------------
// Root extraction
// ---------------------------------------------------------------------------

/// Root extraction precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    /// Balanced companion eigenvalues plus a short f64 Newton touch-up.
    Standard,
    /// Re-polish every root by double-double Newton iteration, accepting at
    /// residual |p(z)| ≤ 1e-20 · max|coeff|.
    Extended,
}

/// Sweep cap for the extended polish.
pub const POLISH_SWEEP_CAP: usize = 200;

/// All `deg p` roots with multiplicity.
pub fn roots(p: &MonicPoly, precision: Precision) -> Result<Vec<Complex64>> {
    let k = p.degree();
    if k == 0 {
        return Err(Error::BadDegree(0));
    }
    // peel off exact zeros at the origin; they need no iteration
    let mut zeros_at_origin = 0usize;
    let mut coeffs = p.coeffs().to_vec();
    while zeros_at_origin < k && coeffs[zeros_at_origin].norm() <= 1e-300 {
        zeros_at_origin += 1;
    }
    let mut out = vec![c(0.0, 0.0); zeros_at_origin];
    let reduced = MonicPoly::new(coeffs.split_off(zeros_at_origin));
    drop(coeffs);

    let m = reduced.degree();
    if m > 0 {
        let mut rest = match m {
            1 => vec![-reduced.coeff(0)],
            2 => quadratic_roots(reduced.coeff(1), reduced.coeff(0)),
            _ => companion(&reduced)?.eigenvalues()?,
        };
        match precision {
            Precision::Standard => {
                for z in &mut rest {
                    *z = newton_f64(&reduced, *z, 3);
                }
            }
            Precision::Extended => {
                let target = 1e-20 * reduced.max_coeff_norm();
                let mut failed = 0usize;
                for z in &mut rest {
                    let (polished, ok) = newton_dd(&reduced, *z, target);
                    *z = polished;
                    if !ok {
                        failed += 1;
                    }
                }
                if failed > 0 {
                    out.extend(rest);
                    return Err(Error::RootPolish { failed, total: k, partial: out });
                }
            }
        }
        out.extend(rest);
    }
    Ok(out)
}

fn quadratic_roots(p1: Complex64, p0: Complex64) -> Vec<Complex64> {
    // z^2 + p1 z + p0, stable form avoiding cancellation
    let s = (p1 * p1 - 4.0 * p0).sqrt();
    let q = if (p1 + s).norm() >= (p1 - s).norm() { p1 + s } else { p1 - s };
    if q.norm() == 0.0 {
        return vec![c(0.0, 0.0), c(0.0, 0.0)];
    }
    let r1 = -q * 0.5;
    vec![r1, p0 / r1]
}

fn newton_f64(p: &MonicPoly, mut z: Complex64, sweeps: usize) -> Complex64 {
    let mut best = z;
    let mut best_res = p.eval(z).norm();
    for _ in 0..sweeps {
        let (v, dv) = p.eval_with_derivative(z);
        if dv.norm() == 0.0 {
            break;
        }
        z -= v / dv;
        let res = p.eval(z).norm();
        if res < best_res {
            best_res = res;
            best = z;
        }
    }
    best
}

fn newton_dd(p: &MonicPoly, start: Complex64, target: f64) -> (Complex64, bool) {
    let coeffs: Vec<DdComplex> = p.coeffs().iter().map(|&c| DdComplex::from_c64(c)).collect();
    let one = DdComplex::from_c64(c(1.0, 0.0));
    let mut z = DdComplex::from_c64(start);
    let mut best = start;
    let mut best_res = f64::INFINITY;
    for _ in 0..POLISH_SWEEP_CAP {
        // simultaneous Horner for p and p'
        let mut v = one;
        let mut dv = DdComplex::ZERO;
        for j in (0..coeffs.len()).rev() {
            dv = dv.mul(z).add(v);
            v = v.mul(z).add(coeffs[j]);
        }
        let res = v.abs();
        if res < best_res {
            best_res = res;
            best = z.to_c64();
        }
        if res <= target {
            return (best, true);
        }
        if dv.abs() == 0.0 {
            break;
        }
        z = z.sub(v.div(dv));
    }
    (best, best_res <= target)
}

/// Zeros of P_k as eigenvalues of the k×k Toeplitz principal submatrix.
pub fn pk_zeros_via_eigen(tail: &LaurentTail, k: usize) -> Result<ZeroEnsemble> {
    if k == 0 {
        return Err(Error::BadDegree(0));
    }
    let eig = toeplitz_principal(tail, k)?.eigenvalues()?;
    ZeroEnsemble::new(k, eig, ZeroSource::Pk)
}

// ---------------------------------------------------------------------------
// Measure diagnostics
// ---------------------------------------------------------------------------

/// Directed Hausdorff distances between an ensemble and a polyline target:
/// (sup over zeros of distance to target, sup over target vertices of
/// distance to the zero set).
pub fn hausdorff(ensemble: &ZeroEnsemble, target: &PolylineSet) -> Result<(f64, f64)> {
    if target.is_empty() {
        return Err(Error::EmptyTarget);
    }
    let to_target = ensemble
        .zeros()
        .iter()
        .map(|z| target.distance(*z))
        .fold(0.0f64, f64::max);
    let mut from_target = 0.0f64;
    for v in target.vertices() {
        let d = ensemble
            .zeros()
            .iter()
            .map(|z| (z - v).norm())
            .fold(f64::INFINITY, f64::min);
        from_target = from_target.max(d);
    }
    Ok((to_target, from_target))
}

/// Named reference measures for CDF comparison.
#[derive(Clone, Copy, Debug)]
pub enum ReferenceMeasure {
    /// Equilibrium (arcsine) distribution of a real segment [a, b].
    Arcsine { a: f64, b: f64 },
}

impl ReferenceMeasure {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ReferenceMeasure::Arcsine { a, b } => {
                let t = (2.0 * x - a - b) / (b - a);
                if t <= -1.0 {
                    0.0
                } else if t >= 1.0 {
                    1.0
                } else {
                    0.5 + t.asin() / std::f64::consts::PI
                }
            }
        }
    }
}

/// Sup distance between the empirical CDF of the real projections of the
/// zeros and a reference CDF. Errors if any zero sits materially off the
/// real axis (|Im| > 1e-3).
pub fn cdf_discrepancy(ensemble: &ZeroEnsemble, reference: ReferenceMeasure) -> Result<f64> {
    let mut xs = Vec::with_capacity(ensemble.degree());
    for z in ensemble.zeros() {
        if z.im.abs() > 1e-3 {
            return Err(Error::OffAxisZero(*z, z.im.abs()));
        }
        xs.push(z.re);
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut disc = 0.0f64;
    for (i, x) in xs.iter().enumerate() {
        let f = reference.cdf(*x);
        disc = disc.max(((i + 1) as f64 / n - f).abs());
        disc = disc.max((f - i as f64 / n).abs());
    }
    Ok(disc)
}

/// Logarithmic-potential estimate `-(1/deg) log |p(z)|`.
///
/// Returns +∞ as a sentinel when z is a zero of p, so grid scans complete
/// without exceptions.
pub fn potential_estimate(p: &MonicPoly, z: Complex64) -> f64 {
    let v = p.eval(z).norm();
    if v == 0.0 {
        f64::INFINITY
    } else {
        -v.ln() / p.degree() as f64
    }
}

// ---------------------------------------------------------------------------
// Stable point recurrences and the δ sequence
// ---------------------------------------------------------------------------

/// Which family a point recurrence evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyFamily {
    Pk,
    Fk,
}

/// ln|P_k(z)| (or ln|F_k(z)|) for k = 0..=kmax, evaluated by the recurrence
/// at the point z with per-index normalization plus a running rescale, so no
/// intermediate overflows for desk-scale |z|.
pub fn log_abs_sequence(
    tail: &LaurentTail,
    z: Complex64,
    kmax: usize,
    family: PolyFamily,
) -> Vec<f64> {
    // normalize P_j by s^j; then values span only (δ/s)^j
    let s = 1.0f64.max(z.norm()).max(tail.rho0_hat());
    let ln_s = s.ln();
    let b0 = tail.coeff(0);
    // scaled coefficients b_j / s^{j+1}
    let n_coeff = tail.truncation_order().min(kmax) + 1;
    let mut bs = Vec::with_capacity(n_coeff);
    let mut sj = s; // s^{j+1}
    for j in 0..n_coeff {
        bs.push(tail.coeff(j) / sj);
        sj *= s;
    }
    let zs = (z - b0) / s;

    let mut vals: Vec<Complex64> = Vec::with_capacity(kmax + 1);
    vals.push(c(1.0, 0.0));
    let mut rescale_ln = 0.0f64; // true value = vals[j] * exp(rescale_ln) * s^j
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(0.0);

    for n in 0..kmax {
        let mut next = zs * vals[n];
        for j in 1..=n.min(n_coeff - 1) {
            if bs[j].norm() != 0.0 {
                next -= bs[j] * vals[n - j];
            }
        }
        if family == PolyFamily::Fk && n >= 1 && n < n_coeff {
            // inhomogeneous term -n b_n / s^{n+1}, brought to the running scale
            let bn = bs[n] * (n as f64);
            if bn.norm() > 0.0 {
                let mut e = bn.norm().ln() - rescale_ln;
                if e > 200.0 {
                    // the absolute term dwarfs the current window; shift first
                    let f = (-e).exp();
                    for v in vals.iter_mut() {
                        *v *= f;
                    }
                    next *= f;
                    rescale_ln += e;
                    e = 0.0;
                }
                if e > -700.0 {
                    next -= bn * (-rescale_ln).exp();
                }
            }
        }
        vals.push(next);
        let mag = next.norm();
        out.push(if mag == 0.0 {
            f64::NEG_INFINITY
        } else {
            mag.ln() + rescale_ln + (n + 1) as f64 * ln_s
        });
        // keep the whole history window inside the representable range
        let mag_max = vals.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        let pivot = if mag_max > 1e200 {
            mag_max
        } else if mag > 1e100 || (mag > 0.0 && mag < 1e-100) {
            mag
        } else {
            0.0
        };
        if pivot > 0.0 {
            let f = 1.0 / pivot;
            for v in vals.iter_mut() {
                *v *= f;
            }
            rescale_ln += pivot.ln();
        }
    }
    out
}

/// The sequence |P_k(z)|^{1/k}, k = 1..=kmax (limsup estimate for δ(z)).
pub fn delta_sequence(tail: &LaurentTail, z: Complex64, kmax: usize) -> Result<Vec<f64>> {
    if kmax < 1 {
        return Err(Error::BadConfiguration("kmax must be >= 1".into()));
    }
    let logs = log_abs_sequence(tail, z, kmax, PolyFamily::Pk);
    Ok(logs[1..]
        .iter()
        .enumerate()
        .map(|(i, &l)| (l / (i + 1) as f64).exp())
        .collect())
}

// ---------------------------------------------------------------------------
// Multiset comparison helpers
// ---------------------------------------------------------------------------

/// Greedy bottleneck matching distance between two equal-size multisets:
/// pairs points globally nearest-first and returns the largest matched
/// distance (∞ on size mismatch).
pub fn multiset_match_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    if a.is_empty() {
        return 0.0;
    }
    let n = a.len();
    let mut pairs = Vec::with_capacity(n * n);
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let mut used_a = vec![false; n];
    let mut used_b = vec![false; n];
    let mut matched = 0usize;
    let mut worst = 0.0f64;
    for (d, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(d);
            matched += 1;
            if matched == n {
                break;
            }
        }
    }
    worst
}

/// Symmetric Hausdorff distance between two point multisets.
pub fn point_set_hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let dir = |src: &[Complex64], dst: &[Complex64]| {
        src.iter()
            .map(|x| dst.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0f64, f64::max)
    };
    dir(a, b).max(dir(b, a))
}
