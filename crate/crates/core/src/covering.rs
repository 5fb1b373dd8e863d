//! Normalized universal covering maps g: {|w| > r} ∪ {∞} → C̄ ∖ E for
//! three-point sets E, realized through the modular lambda function.
//!
//! Construction chain, with u the unit-disk coordinate:
//!
//! ```text
//! T : Möbius with T(E) = {0, 1, ∞},  a := T(∞) ∈ H⁺ ∪ (-∞, 0)
//! τ₀ = λ^{-1}(a),   M : D → H Möbius with M(0) = τ₀
//! G(u) = λ(M(u)),   g(w) = T^{-1}( G(phase · r / w) )
//! ```
//!
//! The covering radius r and the rotation phase are forced in closed form by
//! the normalization g(w) = w + O(1) at infinity: writing
//! T^{-1}(ζ) = A/(ζ - a) + O(1) and c₁ = G'(0), the leading coefficient of g
//! is A/(c₁ · phase · r), so phase · r = A/c₁ exactly.
//!
//! Deck transformations are the M-conjugates of the Γ(2) generators
//! τ ↦ τ+2 and τ ↦ τ/(2τ+1); poles of g sit over the deck orbit of 0, and
//! ρ₀ (largest pole modulus) is r divided by the smallest nonzero orbit
//! modulus. The Laurent tail of g is extracted by circle sampling just
//! outside |w| = ρ₀, where the series converges.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambda::{invert_lambda, lambda, lambda_with_derivative};
use crate::series::{
    c64_pair, coeffs_from_samples, CircleSamples, ExtComplex, LaurentTail, Mobius,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// ---------------------------------------------------------------------------
// ThreePointSet
// ---------------------------------------------------------------------------

/// Three distinct finite points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreePointSet {
    points: [Complex64; 3],
}

impl ThreePointSet {
    pub fn new(p1: Complex64, p2: Complex64, p3: Complex64) -> Result<Self> {
        let pts = [p1, p2, p3];
        for p in &pts {
            if !p.is_finite() {
                return Err(Error::BadConfiguration(format!("non-finite point {p}")));
            }
        }
        for i in 0..3 {
            let d = (pts[i] - pts[(i + 1) % 3]).norm();
            if d < 1e-9 {
                return Err(Error::BadConfiguration(format!(
                    "points too close: distance {d:e}"
                )));
            }
        }
        Ok(ThreePointSet { points: pts })
    }

    pub fn points(&self) -> [Complex64; 3] {
        self.points
    }

    /// Scaled copy s·E.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        ThreePointSet::new(
            self.points[0] * s,
            self.points[1] * s,
            self.points[2] * s,
        )
    }

    /// True when the three points lie on a straight line
    /// (Im((p3-p1)/(p2-p1)) vanishes to 1e-12 relative).
    pub fn collinear(&self) -> bool {
        let ratio = (self.points[2] - self.points[0]) / (self.points[1] - self.points[0]);
        ratio.im.abs() <= 1e-12 * (1.0 + ratio.norm())
    }

    /// Minimal distance from z to the set.
    pub fn distance(&self, z: Complex64) -> f64 {
        self.points.iter().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min)
    }
}

// ---------------------------------------------------------------------------
// mobius_to_standard
// ---------------------------------------------------------------------------

/// Möbius transformation sending an ordering of E to (0, 1, ∞) such that
/// a = T(∞) lands in H⁺ ∪ (-∞, 0); ties broken by the lexicographically
/// smallest index permutation, so outputs are reproducible.
pub fn mobius_to_standard(e: &ThreePointSet) -> Result<(Mobius, Complex64)> {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let pts = e.points();
    for perm in PERMS {
        let (z1, z2, z3) = (pts[perm[0]], pts[perm[1]], pts[perm[2]]);
        let a = (z2 - z3) / (z2 - z1);
        let real = a.im.abs() <= 1e-12 * (1.0 + a.norm());
        let admissible = if real { a.re < 0.0 } else { a.im > 0.0 };
        if admissible {
            let a = if real { c(a.re, 0.0) } else { a };
            // z ↦ (z - z1)(z2 - z3) / ((z - z3)(z2 - z1))
            let k = z2 - z3;
            let l = z2 - z1;
            let t = Mobius::new(k, -z1 * k, l, -z3 * l)?;
            return Ok((t, a));
        }
    }
    unreachable!("the anharmonic orbit of a cross-ratio always meets H+ or (-inf,0)")
}

// ---------------------------------------------------------------------------
// CoveringMap
// ---------------------------------------------------------------------------

/// Normalized covering data for a three-point set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoveringMap {
    /// T with T(E) = {0, 1, ∞}.
    #[serde(rename = "T")]
    to_standard: Mobius,
    /// a = T(∞).
    #[serde(rename = "a", with = "c64_pair")]
    standard_base: Complex64,
    /// τ₀ with λ(τ₀) = a, in the Γ(2) fundamental domain.
    #[serde(rename = "tau0", with = "c64_pair")]
    half_plane_base: Complex64,
    /// Unit rotation fixing the Laurent normalization.
    #[serde(rename = "phase", with = "c64_pair")]
    phase: Complex64,
    /// Covering radius r(E).
    #[serde(rename = "r")]
    radius: f64,
    /// Largest modulus of the finite poles of g.
    #[serde(rename = "rho0")]
    pole_radius: f64,
    /// Cached Laurent tail of g.
    tail: LaurentTail,
}

/// Knobs for [`build_covering_with`].
#[derive(Clone, Copy, Debug)]
pub struct CoveringOptions {
    /// Truncation order of the cached tail.
    pub tail_order: usize,
    /// Sampling circle at `radius_factor · ρ₀` (must exceed 1).
    pub radius_factor: f64,
}

impl Default for CoveringOptions {
    fn default() -> Self {
        CoveringOptions { tail_order: 512, radius_factor: 1.02 }
    }
}

/// Hard cap on orbit word length (the orbit grows as 4·3^{L-1}).
pub const WORD_LENGTH_CAP: usize = 12;

impl CoveringMap {
    pub fn to_standard(&self) -> &Mobius {
        &self.to_standard
    }

    pub fn standard_base(&self) -> Complex64 {
        self.standard_base
    }

    pub fn half_plane_base(&self) -> Complex64 {
        self.half_plane_base
    }

    pub fn phase(&self) -> Complex64 {
        self.phase
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn pole_radius(&self) -> f64 {
        self.pole_radius
    }

    pub fn tail(&self) -> &LaurentTail {
        &self.tail
    }

    /// The three punctures, recovered as T^{-1}({0, 1, ∞}).
    pub fn punctures(&self) -> Result<ThreePointSet> {
        let inv = self.to_standard.inverse();
        let mut out = [c(0.0, 0.0); 3];
        let images = [
            ExtComplex::Finite(c(0.0, 0.0)),
            ExtComplex::Finite(c(1.0, 0.0)),
            ExtComplex::Infinity,
        ];
        for (slot, im) in out.iter_mut().zip(images) {
            match inv.apply_ext(im) {
                ExtComplex::Finite(p) => *slot = p,
                ExtComplex::Infinity => {
                    return Err(Error::CoveringCheck("puncture at infinity".into()))
                }
            }
        }
        ThreePointSet::new(out[0], out[1], out[2])
    }

    /// Möbius M: D → H with M(0) = τ₀, fixed convention.
    pub fn disk_to_half_plane(&self) -> Mobius {
        let t0 = self.half_plane_base;
        Mobius { a: -t0.conj(), b: t0, c: c(-1.0, 0.0), d: c(1.0, 0.0) }
    }

    /// G(u) = λ(M(u)) on the unit disk.
    pub fn standard_from_disk(&self, u: Complex64) -> Result<Complex64> {
        lambda(self.disk_to_half_plane().apply(u))
    }

    /// g value seen from the disk coordinate: T^{-1}(G(u)).
    pub fn value_from_disk(&self, u: Complex64) -> Result<Complex64> {
        Ok(self.to_standard.inverse().apply(self.standard_from_disk(u)?))
    }

    /// Disk coordinate of a point w with |w| > r.
    pub fn disk_coordinate(&self, w: Complex64) -> Result<Complex64> {
        if w.norm() <= self.radius {
            return Err(Error::Domain(format!(
                "|w| = {} is not above the covering radius {}",
                w.norm(),
                self.radius
            )));
        }
        Ok(self.phase * self.radius / w)
    }

    /// Evaluate g(w) = T^{-1}(λ(M(phase·r/w))). Errors for |w| ≤ r.
    pub fn eval(&self, w: Complex64) -> Result<Complex64> {
        self.value_from_disk(self.disk_coordinate(w)?)
    }
}

/// Build the normalized covering with default tail options.
pub fn build_covering(e: &ThreePointSet) -> Result<CoveringMap> {
    build_covering_with(e, CoveringOptions::default())
}

pub fn build_covering_with(e: &ThreePointSet, opts: CoveringOptions) -> Result<CoveringMap> {
    if opts.radius_factor <= 1.0 {
        return Err(Error::BadConfiguration(
            "radius_factor must exceed 1 (sampling must clear the poles)".into(),
        ));
    }
    let (t, a) = mobius_to_standard(e)?;
    let tau0 = invert_lambda(a)?;
    let (lam0, dlam0) = lambda_with_derivative(tau0)?;
    if (lam0 - a).norm() > 1e-10 * a.norm().max(1.0) {
        return Err(Error::CoveringCheck(format!(
            "lambda(tau0) misses a by {:e}",
            (lam0 - a).norm()
        )));
    }

    // c₁ = G'(0) = λ'(τ₀) · M'(0), with M'(0) = τ₀ - conj(τ₀)
    let c1 = dlam0 * (tau0 - tau0.conj());
    if c1.norm() < 1e-14 {
        return Err(Error::CoveringCheck("G'(0) vanished".into()));
    }

    // residue of T^{-1} at its pole a
    let residue = (t.b - t.d * a) / t.c;
    let leading = residue / c1; // phase · r
    let radius = leading.norm();
    if radius <= 0.0 || !radius.is_finite() {
        return Err(Error::CoveringCheck(format!("covering radius {radius}")));
    }
    let phase = leading / radius;

    let mut cov = CoveringMap {
        to_standard: t,
        standard_base: a,
        half_plane_base: tau0,
        phase,
        radius,
        pole_radius: f64::INFINITY, // fixed below
        tail: LaurentTail::zero(0), // fixed below
    };

    let deck = deck_generators(&cov)?;
    cov.pole_radius = stabilized_pole_radius(&deck, radius)?;

    let (tail, _residual) = extract_tail(&cov, opts.tail_order, opts.radius_factor)?;
    cov.tail = tail;
    Ok(cov)
}

/// Laurent tail of g of order N by circle sampling above the pole radius,
/// with a reconstruction check on the off-circle R' = 1.1·R.
/// Returns the tail and the off-circle residual.
pub fn laurent_of_g(cov: &CoveringMap, order: usize) -> Result<(LaurentTail, f64)> {
    extract_tail(cov, order, 1.02)
}

fn extract_tail(
    cov: &CoveringMap,
    order: usize,
    radius_factor: f64,
) -> Result<(LaurentTail, f64)> {
    // The truncation tail past order N decays like (ρ₀/R)^{N+1}; the check
    // circle at 1.1·R must see it below 1e-9, which forces a floor on the
    // sampling radius when N is small.
    let floor = 10f64.powf(10.0 / (order as f64 + 1.0)) / 1.1;
    let big_r = radius_factor.max(floor) * cov.pole_radius();
    let m = (4 * (order + 1)).next_power_of_two().max(4096);
    let samples = CircleSamples::from_fn(big_r, m, |w| cov.eval(w))?;
    let (tail, on_circle) = coeffs_from_samples(&samples, order)?;
    if !on_circle.is_finite() {
        return Err(Error::LaurentResidual { residual: on_circle, limit: 1e-8 });
    }
    // independent check on a second circle
    let check_r = 1.1 * big_r;
    let mut residual = 0.0f64;
    for j in 0..64 {
        let w = crate::series::circle_node(check_r, j, 64);
        let d = (tail.eval(w)? - cov.eval(w)?).norm();
        residual = residual.max(d);
    }
    if residual > 1e-8 {
        return Err(Error::LaurentResidual { residual, limit: 1e-8 });
    }
    Ok((tail, residual))
}

// ---------------------------------------------------------------------------
// Deck group and orbits
// ---------------------------------------------------------------------------

/// Two generators of the deck group acting on the unit disk.
#[derive(Clone, Debug)]
pub struct DeckGroup {
    gen_a: Mobius,
    gen_b: Mobius,
    /// Cap for orbit enumeration word length.
    pub word_cap: usize,
}

impl DeckGroup {
    pub fn generators(&self) -> (&Mobius, &Mobius) {
        (&self.gen_a, &self.gen_b)
    }

    /// The four letters a, a⁻¹, b, b⁻¹ with their inverse pairing.
    pub fn letters(&self) -> [Mobius; 4] {
        [self.gen_a, self.gen_a.inverse().normalized(), self.gen_b, self.gen_b.inverse().normalized()]
    }

    /// All non-identity elements represented by reduced words of length ≤ cap.
    pub fn words_up_to(&self, word_len: usize) -> Result<Vec<Mobius>> {
        if word_len > WORD_LENGTH_CAP {
            return Err(Error::WordLengthCap(word_len, WORD_LENGTH_CAP));
        }
        let letters = self.letters();
        let inverse_of = [1usize, 0, 3, 2];
        let mut frontier: Vec<(Mobius, usize)> = Vec::new();
        let mut all = Vec::new();
        for (idx, l) in letters.iter().enumerate() {
            frontier.push((*l, idx));
            all.push(*l);
        }
        for _ in 1..word_len {
            let mut next = Vec::with_capacity(frontier.len() * 3);
            for (m, last) in &frontier {
                for (idx, l) in letters.iter().enumerate() {
                    if idx == inverse_of[*last] {
                        continue;
                    }
                    let w = l.compose(m).normalized();
                    next.push((w, idx));
                    all.push(w);
                }
            }
            frontier = next;
        }
        if word_len == 0 {
            all.clear();
        }
        Ok(all)
    }
}

/// Deck generators of the covering, verified to leave G invariant on a fixed
/// grid of 32 disk points.
pub fn deck_generators(cov: &CoveringMap) -> Result<DeckGroup> {
    let m = cov.disk_to_half_plane();
    let m_inv = m.inverse();
    // Γ(2) generators in the half-plane
    let a_h = Mobius { a: c(1.0, 0.0), b: c(2.0, 0.0), c: c(0.0, 0.0), d: c(1.0, 0.0) };
    let b_h = Mobius { a: c(1.0, 0.0), b: c(0.0, 0.0), c: c(2.0, 0.0), d: c(1.0, 0.0) };
    let gen_a = m_inv.compose(&a_h).compose(&m).normalized();
    let gen_b = m_inv.compose(&b_h).compose(&m).normalized();
    let deck = DeckGroup { gen_a, gen_b, word_cap: WORD_LENGTH_CAP };

    for (gi, gen) in [&deck.gen_a, &deck.gen_b].iter().enumerate() {
        for ring in 0..4 {
            for step in 0..8 {
                let rad = [0.2, 0.45, 0.65, 0.8][ring];
                let ang = std::f64::consts::TAU * (step as f64) / 8.0;
                let u = Complex64::from_polar(rad, ang);
                let gu = gen.apply(u);
                if gu.norm() >= 1.0 {
                    return Err(Error::CoveringCheck(format!(
                        "generator {gi} leaves the disk: |γ(u)| = {}",
                        gu.norm()
                    )));
                }
                let diff = (cov.standard_from_disk(gu)? - cov.standard_from_disk(u)?).norm();
                if diff > 1e-8 {
                    return Err(Error::CoveringCheck(format!(
                        "deck invariance failed on generator {gi}: |G(γu) - G(u)| = {diff:e}"
                    )));
                }
            }
        }
    }
    Ok(deck)
}

/// Distinct deck-orbit points of the disk origin reachable by reduced words
/// of length ≤ word_len (deduplicated at 1e-12). Includes the origin itself.
pub fn orbit_of_center(cov: &CoveringMap, word_len: usize) -> Result<Vec<Complex64>> {
    let deck = deck_generators(cov)?;
    let mut pts = vec![c(0.0, 0.0)];
    for w in deck.words_up_to(word_len)? {
        let u = w.apply(c(0.0, 0.0));
        if pts.iter().all(|p| (p - u).norm() > 1e-12) {
            pts.push(u);
        }
    }
    Ok(pts)
}

/// ρ₀ = r / min{|u| : u ∈ orbit(0), u ≠ 0}, with the minimum required to
/// stabilize across word lengths 4, 5, 6.
pub fn stabilized_pole_radius(deck: &DeckGroup, radius: f64) -> Result<f64> {
    let mut mins = Vec::new();
    for len in [4usize, 5, 6] {
        let mut min_u = f64::INFINITY;
        for w in deck.words_up_to(len)? {
            let u = w.apply(c(0.0, 0.0)).norm();
            if u > 1e-14 {
                min_u = min_u.min(u);
            }
        }
        mins.push(min_u);
    }
    if (mins[0] - mins[2]).abs() > 1e-12 || (mins[1] - mins[2]).abs() > 1e-12 {
        return Err(Error::PoleRadiusUnstable(mins[0], mins[2]));
    }
    Ok(radius / mins[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::third_root_of_unity;

    fn symmetric_set() -> ThreePointSet {
        let eta = third_root_of_unity();
        ThreePointSet::new(c(1.0, 0.0), eta, eta * eta).unwrap()
    }

    fn collinear_set() -> ThreePointSet {
        ThreePointSet::new(c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn collinearity_detection() {
        assert!(collinear_set().collinear());
        assert!(ThreePointSet::new(c(0.0, 0.0), c(1.0, 1.0), c(2.0, 2.0)).unwrap().collinear());
        assert!(!symmetric_set().collinear());
        assert!(ThreePointSet::new(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn standard_map_for_collinear_sets() {
        let (t, a) = mobius_to_standard(&collinear_set()).unwrap();
        assert!(a.im == 0.0 && a.re < 0.0, "a = {a}");
        assert!((a - c(-1.0, 0.0)).norm() < 1e-14);
        // T really maps the chosen ordering to 0, 1, ∞
        assert!((t.apply(c(-1.0, 0.0))).norm() < 1e-14);
        assert!((t.apply(c(0.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-14);

        let (_, a2) = mobius_to_standard(
            &ThreePointSet::new(c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)).unwrap(),
        )
        .unwrap();
        assert!((a2 - c(-1.0, 0.0)).norm() < 1e-14, "equally spaced triple has a = -1");
    }

    #[test]
    fn standard_map_for_symmetric_set() {
        let (_, a) = mobius_to_standard(&symmetric_set()).unwrap();
        assert!(a.im > 0.0, "a = {a}");
        // cross-ratio of the rotated triple is the order-6 anharmonic point
        assert!((a - c(0.5, 0.75f64.sqrt())).norm() < 1e-13, "a = {a}");
    }

    #[test]
    fn build_symmetric_covering_has_rotation_symmetric_tail() {
        let cov = build_covering_with(
            &symmetric_set(),
            CoveringOptions { tail_order: 96, radius_factor: 1.05 },
        )
        .unwrap();
        assert!(cov.radius() > 0.0);
        assert!(cov.pole_radius() > cov.radius());
        let tail = cov.tail();
        // only k ≡ 2 (mod 3) survives the rotation symmetry η^{-1} g(η w) = g(w)
        for k in 0..=tail.truncation_order() {
            if k % 3 != 2 {
                assert!(
                    tail.coeff(k).norm() <= 1e-9,
                    "b_{k} = {} should vanish",
                    tail.coeff(k)
                );
            }
        }
        assert!(tail.coeff(0).norm() <= 1e-9, "b_0 = {}", tail.coeff(0));
        // some coefficient must actually be nonzero
        assert!(tail.coeff(2).norm() > 1e-6, "b_2 = {}", tail.coeff(2));
    }

    #[test]
    fn build_collinear_covering_has_real_odd_tail() {
        let cov = build_covering_with(
            &collinear_set(),
            CoveringOptions { tail_order: 96, radius_factor: 1.05 },
        )
        .unwrap();
        let tail = cov.tail();
        for k in 0..=tail.truncation_order() {
            assert!(tail.coeff(k).im.abs() <= 1e-9, "Im b_{k} = {}", tail.coeff(k).im);
            if k % 2 == 0 {
                assert!(tail.coeff(k).norm() <= 1e-9, "b_{k} = {} should vanish", tail.coeff(k));
            }
        }
        // conjugation symmetry of g on samples
        for j in 0..8 {
            let w = crate::series::circle_node(1.3 * cov.pole_radius(), j, 8);
            let gv = cov.eval(w).unwrap();
            let gc = cov.eval(w.conj()).unwrap();
            assert!((gc - gv.conj()).norm() <= 1e-9);
        }
    }

    #[test]
    fn normalization_at_large_w() {
        let cov = build_covering_with(
            &symmetric_set(),
            CoveringOptions { tail_order: 64, radius_factor: 1.05 },
        )
        .unwrap();
        let w = c(1e4 * cov.radius(), 3.0 * cov.radius());
        let v = cov.eval(w).unwrap();
        assert!(
            (v - w - cov.tail().coeff(0)).norm() < 1e-3 / cov.radius(),
            "g({w}) = {v}"
        );
        let w = c(1e8, 0.0);
        let v = cov.eval(w).unwrap();
        assert!((v - w - cov.tail().coeff(0)).norm() < 1e-6);
    }

    #[test]
    fn eval_rejects_points_inside_the_circle() {
        let cov = build_covering_with(
            &collinear_set(),
            CoveringOptions { tail_order: 32, radius_factor: 1.05 },
        )
        .unwrap();
        assert!(cov.eval(c(0.5 * cov.radius(), 0.0)).is_err());
    }

    #[test]
    fn covering_range_avoids_punctures() {
        let cov = build_covering_with(
            &symmetric_set(),
            CoveringOptions { tail_order: 32, radius_factor: 1.05 },
        )
        .unwrap();
        let e = cov.punctures().unwrap();
        let mut min_dist = f64::INFINITY;
        for j in 0..64 {
            let w = crate::series::circle_node(1.01 * cov.radius(), j, 64);
            let v = cov.eval(w).unwrap();
            min_dist = min_dist.min(e.distance(v));
        }
        assert!(min_dist > 0.0, "covering hit a puncture; min dist {min_dist:e}");
    }

    #[test]
    fn laurent_round_trip_against_direct_eval() {
        let cov = build_covering_with(
            &symmetric_set(),
            CoveringOptions { tail_order: 96, radius_factor: 1.05 },
        )
        .unwrap();
        let (tail, residual) = laurent_of_g(&cov, 96).unwrap();
        assert!(residual <= 1e-8);
        let check_r = 1.4 * cov.pole_radius();
        for j in 0..64 {
            let w = crate::series::circle_node(check_r, j, 64);
            let d = (tail.eval(w).unwrap() - cov.eval(w).unwrap()).norm();
            assert!(d <= 1e-7, "round trip error {d:e}");
        }
    }

    #[test]
    fn deck_generators_act_freely_and_do_not_commute() {
        let cov = build_covering_with(
            &symmetric_set(),
            CoveringOptions { tail_order: 16, radius_factor: 1.05 },
        )
        .unwrap();
        let deck = deck_generators(&cov).unwrap();
        for gen in [deck.gen_a, deck.gen_b] {
            // fixed points of (au+b)/(cu+d): c u² + (d-a) u - b = 0
            let disc = ((gen.d - gen.a) * (gen.d - gen.a) + 4.0 * gen.c * gen.b).sqrt();
            for sign in [1.0, -1.0] {
                let fp = ((gen.a - gen.d) + disc * sign) / (2.0 * gen.c);
                assert!(fp.norm() >= 1.0 - 1e-9, "fixed point {fp} inside the disk");
            }
        }
        let ab = deck.gen_a.compose(&deck.gen_b).normalized();
        let ba = deck.gen_b.compose(&deck.gen_a).normalized();
        let comm = [(ab.a - ba.a), (ab.b - ba.b), (ab.c - ba.c), (ab.d - ba.d)];
        let comm2 = [(ab.a + ba.a), (ab.b + ba.b), (ab.c + ba.c), (ab.d + ba.d)];
        let n1: f64 = comm.iter().map(|z| z.norm()).sum();
        let n2: f64 = comm2.iter().map(|z| z.norm()).sum();
        assert!(n1.min(n2) > 1e-6, "generators commute");
    }

    #[test]
    fn orbit_counts_follow_the_free_group() {
        let cov = build_covering_with(
            &symmetric_set(),
            CoveringOptions { tail_order: 16, radius_factor: 1.05 },
        )
        .unwrap();
        let o0 = orbit_of_center(&cov, 0).unwrap();
        assert_eq!(o0.len(), 1);
        for len in 1..=4usize {
            let orbit = orbit_of_center(&cov, len).unwrap();
            // 1 + Σ_{L=1..len} 4·3^{L-1}
            let expect = 1 + (1..=len).map(|l| 4 * 3usize.pow((l - 1) as u32)).sum::<usize>();
            assert_eq!(orbit.len(), expect, "orbit size at word length {len}");
        }
        assert!(matches!(
            orbit_of_center(&cov, 13),
            Err(Error::WordLengthCap(13, _))
        ));
    }

    #[test]
    fn orbit_points_are_preimages_of_a() {
        let cov = build_covering_with(
            &symmetric_set(),
            CoveringOptions { tail_order: 16, radius_factor: 1.05 },
        )
        .unwrap();
        let a = cov.standard_base();
        for u in orbit_of_center(&cov, 3).unwrap() {
            let g = cov.standard_from_disk(u).unwrap();
            assert!((g - a).norm() <= 1e-8, "G({u}) = {g} != a");
        }
    }

    #[test]
    fn scaling_covariance_of_radius_and_poles() {
        let base = build_covering_with(
            &collinear_set(),
            CoveringOptions { tail_order: 16, radius_factor: 1.05 },
        )
        .unwrap();
        let s = 2.5;
        let scaled = build_covering_with(
            &collinear_set().scaled(s).unwrap(),
            CoveringOptions { tail_order: 16, radius_factor: 1.05 },
        )
        .unwrap();
        assert!(
            (scaled.radius() - s * base.radius()).abs() <= 1e-8 * base.radius() * s,
            "r: {} vs {}",
            scaled.radius(),
            s * base.radius()
        );
        assert!(
            (scaled.pole_radius() - s * base.pole_radius()).abs()
                <= 1e-8 * base.pole_radius() * s
        );
    }

    #[test]
    fn covering_map_schema_round_trip() {
        let cov = build_covering_with(
            &collinear_set(),
            CoveringOptions { tail_order: 16, radius_factor: 1.05 },
        )
        .unwrap();
        let json = serde_json::to_string(&cov).unwrap();
        for key in ["\"T\"", "\"a\"", "\"tau0\"", "\"phase\"", "\"r\"", "\"rho0\"", "\"tail\""] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
        let back: CoveringMap = serde_json::from_str(&json).unwrap();
        assert_eq!(back.radius(), cov.radius());
        let w = c(2.0 * cov.pole_radius(), 0.7);
        assert!((back.eval(w).unwrap() - cov.eval(w).unwrap()).norm() < 1e-12);
    }
}
