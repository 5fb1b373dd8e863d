//! Hyperbolic geometry of the unit disk for the covering's deck group:
//! perpendicular bisectors, the Dirichlet hexagon, the predicted limit set
//! (tripod or segment), and exact δ(z) from maximal-modulus preimages.
//!
//! Everything here works in the disk coordinate u of the covering chain
//! g(w) = T^{-1}(λ(M(u))), u = phase·r/w, where the rotation phase drops out
//! of all modulus computations: a preimage u of T(z) gives δ(z) = r/|u*|
//! with u* the orbit representative of minimal modulus, i.e. the one inside
//! the closed Dirichlet domain centered at 0.

use num_complex::Complex64;

use crate::covering::{deck_generators, CoveringMap, ThreePointSet};
use crate::error::{Error, Result};
use crate::lambda::invert_lambda;
use crate::series::Mobius;
use crate::zeros::PolylineSet;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Default tie tolerance for counting maximal-modulus preimages.
pub const TIE_TOL: f64 = 1e-8;

/// Gap ceiling below which a C1 verdict is flagged ambiguous instead.
pub const AMBIGUITY_CEILING: f64 = 1e-5;

/// Reduction step cap for the modulus descent.
pub const REDUCTION_STEP_CAP: usize = 10_000;

// ---------------------------------------------------------------------------
// Basic disk geometry
// ---------------------------------------------------------------------------

/// Hyperbolic distance d(u, v) = 2 atanh(|u - v| / |1 - ū v|).
pub fn hyp_dist(u: Complex64, v: Complex64) -> Result<f64> {
    if u.norm() >= 1.0 || v.norm() >= 1.0 {
        return Err(Error::Domain("hyperbolic distance needs points inside the disk".into()));
    }
    let num = (u - v).norm();
    let den = (c(1.0, 0.0) - u.conj() * v).norm();
    Ok(2.0 * (num / den).atanh())
}

/// A geodesic of the unit disk.
#[derive(Clone, Copy, Debug)]
pub enum GeodesicKind {
    /// Euclidean circle orthogonal to the unit circle.
    Arc { center: Complex64, radius: f64 },
    /// Diameter in direction `dir` (|dir| = 1).
    Diameter { dir: Complex64 },
}

#[derive(Clone, Copy, Debug)]
pub struct Geodesic {
    pub kind: GeodesicKind,
    /// Traversal orientation; flips when an arc is walked end-to-start.
    pub orientation: bool,
}

impl Geodesic {
    pub fn arc(center: Complex64, radius: f64) -> Result<Self> {
        if (center.norm_sqr() - 1.0 - radius * radius).abs() > 1e-10 {
            return Err(Error::Geometry(format!(
                "arc not orthogonal to the unit circle: |c|^2 - 1 - r^2 = {:e}",
                center.norm_sqr() - 1.0 - radius * radius
            )));
        }
        Ok(Geodesic { kind: GeodesicKind::Arc { center, radius }, orientation: true })
    }

    pub fn diameter(dir: Complex64) -> Result<Self> {
        if (dir.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Geometry("diameter direction must be a unit vector".into()));
        }
        Ok(Geodesic { kind: GeodesicKind::Diameter { dir }, orientation: true })
    }
}

/// Geodesic of points hyperbolically equidistant from 0 and ζ.
///
/// The hyperbolic midpoint of [0, ζ] sits at t = |ζ|/(1 + √(1-|ζ|²)); the
/// bisector is the orthogonal circle through it, centered on the ray of ζ.
pub fn bisector(zeta: Complex64) -> Result<Geodesic> {
    let m = zeta.norm();
    if m == 0.0 {
        return Err(Error::Domain("bisector of coincident points".into()));
    }
    if m >= 1.0 {
        return Err(Error::Domain("bisector center must lie inside the disk".into()));
    }
    let t = m / (1.0 + (1.0 - m * m).sqrt());
    let dir = zeta / m;
    let center = dir * ((1.0 + t * t) / (2.0 * t));
    let radius = (1.0 - t * t) / (2.0 * t);
    Geodesic::arc(center, radius)
}

/// Side test: true iff u is strictly on the 0-side of the bisector of ζ,
/// i.e. d(u, 0) < d(u, ζ).
pub fn closer_to_origin(u: Complex64, bisector_arc: &Geodesic) -> bool {
    match bisector_arc.kind {
        GeodesicKind::Arc { center, radius } => (u - center).norm() > radius,
        GeodesicKind::Diameter { dir } => {
            // 0 is on the bisector itself in this degenerate case
            (u * dir.conj()).re < 0.0
        }
    }
}

// ---------------------------------------------------------------------------
// Six centers and the Dirichlet hexagon
// ---------------------------------------------------------------------------

/// The six deck-orbit points ζ_{j,k} whose bisectors cut out the Dirichlet
/// hexagon (non-collinear case only).
///
/// In the half-plane they are the images of τ₀ under the six compositions of
/// two reflections across the sides of the ideal triangle (0, 1, ∞); each
/// double reflection is a Γ(2) element, so every output satisfies G(ζ) = a,
/// which is verified to 1e-8.
pub fn six_centers(cov: &CoveringMap) -> Result<[Complex64; 6]> {
    let a = cov.standard_base();
    if a.im <= 0.0 {
        return Err(Error::Geometry(
            "six centers exist only in the non-collinear case (a in the upper half-plane)".into(),
        ));
    }
    let tau0 = cov.half_plane_base();
    if !(tau0.re > -1e-9 && tau0.re < 1.0 + 1e-9) {
        return Err(Error::Geometry(format!(
            "base point tau0 = {tau0} is not in the ideal (0,1,infinity) triangle"
        )));
    }
    // reflections across the triangle sides, written as S_j(conj(τ));
    // the composition R_j R_k is the real Möbius map S_j ∘ S_k
    let s1 = Mobius { a: c(-1.0, 0.0), b: c(2.0, 0.0), c: c(0.0, 0.0), d: c(1.0, 0.0) }; // 2 - x
    let s2 = Mobius { a: c(-1.0, 0.0), b: c(0.0, 0.0), c: c(0.0, 0.0), d: c(1.0, 0.0) }; // -x
    let s3 = Mobius { a: c(1.0, 0.0), b: c(0.0, 0.0), c: c(2.0, 0.0), d: c(-1.0, 0.0) }; // x/(2x-1)
    let sides = [s1, s2, s3];

    let m_inv = cov.disk_to_half_plane().inverse();
    let mut out = [c(0.0, 0.0); 6];
    let mut idx = 0;
    for j in 0..3 {
        for k in 0..3 {
            if j == k {
                continue;
            }
            let zeta_h = sides[j].compose(&sides[k]).apply(tau0);
            let u = m_inv.apply(zeta_h);
            if u.norm() >= 1.0 {
                return Err(Error::Geometry(format!("center {idx} left the disk: {u}")));
            }
            let g = cov.standard_from_disk(u)?;
            if (g - a).norm() > 1e-8 {
                return Err(Error::Geometry(format!(
                    "center {idx} fails G(zeta) = a by {:e}",
                    (g - a).norm()
                )));
            }
            out[idx] = u;
            idx += 1;
        }
    }
    for i in 0..6 {
        for j in i + 1..6 {
            if (out[i] - out[j]).norm() < 1e-6 {
                return Err(Error::Geometry(format!("centers {i} and {j} coincide")));
            }
        }
    }
    Ok(out)
}

/// One boundary arc of the hexagon, on the bisector circle of one center.
#[derive(Clone, Debug)]
pub struct HexArc {
    pub center_index: usize,
    pub geodesic: Geodesic,
    pub start: Complex64,
    pub end: Complex64,
    theta_start: f64,
    theta_sweep: f64,
}

impl HexArc {
    /// Point at parameter t ∈ [0, 1] from start to end.
    pub fn point_at(&self, t: f64) -> Complex64 {
        match self.geodesic.kind {
            GeodesicKind::Arc { center, radius } => {
                let th = self.theta_start + t * self.theta_sweep;
                center + Complex64::from_polar(radius, th)
            }
            GeodesicKind::Diameter { .. } => self.start + (self.end - self.start) * t,
        }
    }

    /// Arc with start and end swapped.
    pub fn reversed(&self) -> HexArc {
        let mut g = self.geodesic;
        g.orientation = !g.orientation;
        HexArc {
            center_index: self.center_index,
            geodesic: g,
            start: self.end,
            end: self.start,
            theta_start: self.theta_start + self.theta_sweep,
            theta_sweep: -self.theta_sweep,
        }
    }
}

/// Dirichlet hexagon: six arcs, three finite vertices, three ideal vertices,
/// finite and ideal alternating in cyclic order.
#[derive(Clone, Debug)]
pub struct Hexagon {
    pub arcs: Vec<HexArc>,
    pub finite_vertices: [Complex64; 3],
    pub ideal_vertices: [Complex64; 3],
}

#[derive(Clone, Copy, PartialEq)]
enum VertexKind {
    Finite,
    Ideal,
}

/// Intersect the six half-planes {d(u,0) < d(u,ζ_i)} into the hexagon.
pub fn dirichlet_hexagon(centers: &[Complex64; 6]) -> Result<Hexagon> {
    let mut circles = Vec::with_capacity(6);
    for z in centers {
        match bisector(*z)?.kind {
            GeodesicKind::Arc { center, radius } => circles.push((center, radius)),
            GeodesicKind::Diameter { .. } => {
                return Err(Error::Geometry("bisector degenerated to a diameter".into()))
            }
        }
    }
    let satisfied = |u: Complex64, skip: &[usize], tol: f64| {
        circles.iter().enumerate().all(|(m, (cm, rm))| {
            skip.contains(&m) || (u - cm).norm() >= rm - tol
        })
    };

    // finite vertices: pairwise bisector intersections on the region boundary
    let mut finite: Vec<Complex64> = Vec::new();
    for i in 0..6 {
        for j in i + 1..6 {
            for v in circle_circle(circles[i], circles[j]) {
                if v.norm() < 1.0 - 1e-9 && satisfied(v, &[i, j], 1e-9) {
                    if finite.iter().all(|f| (f - v).norm() > 1e-9) {
                        finite.push(v);
                    }
                }
            }
        }
    }
    if finite.len() != 3 {
        return Err(Error::Geometry(format!(
            "expected 3 finite vertices, found {}",
            finite.len()
        )));
    }

    // ideal vertices: bisector endpoints on the unit circle shared by the region
    let mut ideal: Vec<Complex64> = Vec::new();
    for (i, (cc, _)) in circles.iter().enumerate() {
        let psi = cc.im.atan2(cc.re);
        let half = (1.0 / cc.norm()).acos();
        for th in [psi - half, psi + half] {
            let e = Complex64::from_polar(1.0, th);
            if satisfied(e, &[i], 1e-7) && ideal.iter().all(|f| (f - e).norm() > 1e-7) {
                ideal.push(e);
            }
        }
    }
    if ideal.len() != 3 {
        return Err(Error::Geometry(format!(
            "expected 3 ideal vertices, found {}",
            ideal.len()
        )));
    }

    // cyclic ordering by argument with the alternation invariant
    let mut verts: Vec<(f64, Complex64, VertexKind)> = finite
        .iter()
        .map(|v| (v.im.atan2(v.re), *v, VertexKind::Finite))
        .chain(ideal.iter().map(|v| (v.im.atan2(v.re), *v, VertexKind::Ideal)))
        .collect();
    verts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for w in 0..6 {
        if verts[w].2 == verts[(w + 1) % 6].2 {
            return Err(Error::Geometry(
                "finite and ideal vertices do not alternate".into(),
            ));
        }
    }

    // arcs between consecutive vertices, each on exactly one bisector circle
    let mut arcs = Vec::with_capacity(6);
    let mut used = [false; 6];
    for w in 0..6 {
        let (_, v0, _) = verts[w];
        let (_, v1, _) = verts[(w + 1) % 6];
        let mut owner = None;
        for (i, (cc, rr)) in circles.iter().enumerate() {
            let on = |p: Complex64| ((p - cc).norm() - rr).abs() <= 1e-7;
            if on(v0) && on(v1) {
                if owner.is_some() {
                    return Err(Error::Geometry(format!(
                        "arc {w} lies on more than one bisector"
                    )));
                }
                owner = Some(i);
            }
        }
        let i = owner
            .ok_or_else(|| Error::Geometry(format!("arc {w} lies on no bisector circle")))?;
        if used[i] {
            return Err(Error::Geometry(format!("bisector {i} used by two arcs")));
        }
        used[i] = true;
        let (cc, rr) = circles[i];
        let th0 = (v0 - cc).im.atan2((v0 - cc).re);
        let th1 = (v1 - cc).im.atan2((v1 - cc).re);
        // choose the angular sweep whose midpoint stays on the region boundary
        let mut sweep = th1 - th0;
        while sweep > std::f64::consts::PI {
            sweep -= std::f64::consts::TAU;
        }
        while sweep < -std::f64::consts::PI {
            sweep += std::f64::consts::TAU;
        }
        let mid = cc + Complex64::from_polar(rr, th0 + 0.5 * sweep);
        if !(mid.norm() < 1.0 && satisfied(mid, &[i], 1e-7)) {
            let alt = if sweep > 0.0 { sweep - std::f64::consts::TAU } else { sweep + std::f64::consts::TAU };
            let mid2 = cc + Complex64::from_polar(rr, th0 + 0.5 * alt);
            if !(mid2.norm() < 1.0 && satisfied(mid2, &[i], 1e-7)) {
                return Err(Error::Geometry(format!("arc {w} midpoint off the boundary")));
            }
            sweep = alt;
        }
        arcs.push(HexArc {
            center_index: i,
            geodesic: Geodesic::arc(cc, rr)?,
            start: v0,
            end: v1,
            theta_start: th0,
            theta_sweep: sweep,
        });
    }

    let fv: Vec<Complex64> = verts
        .iter()
        .filter(|v| v.2 == VertexKind::Finite)
        .map(|v| v.1)
        .collect();
    let iv: Vec<Complex64> = verts
        .iter()
        .filter(|v| v.2 == VertexKind::Ideal)
        .map(|v| v.1)
        .collect();
    Ok(Hexagon {
        arcs,
        finite_vertices: [fv[0], fv[1], fv[2]],
        ideal_vertices: [iv[0], iv[1], iv[2]],
    })
}

fn circle_circle(
    (c1, r1): (Complex64, f64),
    (c2, r2): (Complex64, f64),
) -> Vec<Complex64> {
    let d = (c2 - c1).norm();
    if d == 0.0 || d > r1 + r2 || d < (r1 - r2).abs() {
        return Vec::new();
    }
    let a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
    let h2 = r1 * r1 - a * a;
    if h2 < 0.0 {
        return Vec::new();
    }
    let h = h2.sqrt();
    let dir = (c2 - c1) / d;
    let base = c1 + dir * a;
    let off = c(0.0, 1.0) * dir * h;
    vec![base + off, base - off]
}

// ---------------------------------------------------------------------------
// Predicted limit set
// ---------------------------------------------------------------------------

/// Legs approach the punctures only asymptotically; they are truncated and
/// snapped once within this distance of the endpoint.
pub const LEG_SNAP_DISTANCE: f64 = 1e-3;

/// Map the Dirichlet hexagon boundary to the plane: three legs from the
/// common branch point b' toward the three punctures.
pub fn tripod(cov: &CoveringMap, hex: &Hexagon, pts_per_leg: usize) -> Result<PolylineSet> {
    let punctures = cov.punctures()?;
    let t_inv = cov.to_standard().inverse();

    // branch point: common G-image of the three finite vertices
    let mut images = [c(0.0, 0.0); 3];
    for (img, v) in images.iter_mut().zip(hex.finite_vertices.iter()) {
        *img = cov.standard_from_disk(*v)?;
    }
    for i in 0..3 {
        for j in i + 1..3 {
            let gap = (images[i] - images[j]).norm();
            if gap > 1e-6 {
                return Err(Error::Geometry(format!(
                    "finite vertices map to different points: gap {gap:e}"
                )));
            }
        }
    }
    let b_std = (images[0] + images[1] + images[2]) / 3.0;
    let branch_point = t_inv.apply(b_std);

    // group arcs by shared ideal vertex
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for iv in hex.ideal_vertices.iter() {
        let mut members = Vec::new();
        for (ai, arc) in hex.arcs.iter().enumerate() {
            if (arc.start - iv).norm() < 1e-9 || (arc.end - iv).norm() < 1e-9 {
                members.push(ai);
            }
        }
        if members.len() != 2 {
            return Err(Error::Geometry(format!(
                "ideal vertex shared by {} arcs",
                members.len()
            )));
        }
        pairs.push((members[0], members[1]));
    }

    let is_finite_vertex =
        |p: Complex64| hex.finite_vertices.iter().any(|v| (v - p).norm() < 1e-9);

    let mut legs = Vec::with_capacity(3);
    let mut used_punctures: Vec<Complex64> = Vec::new();
    for (a1, a2) in pairs {
        let oriented = |idx: usize| {
            let arc = &hex.arcs[idx];
            if is_finite_vertex(arc.start) {
                arc.clone()
            } else {
                arc.reversed()
            }
        };
        let arc1 = oriented(a1);
        let arc2 = oriented(a2);

        let (leg, puncture) = map_arc_to_leg(cov, &t_inv, &arc1, &punctures, pts_per_leg)?;
        // the paired arc must trace the same leg
        let (check, p2) = map_arc_to_leg(cov, &t_inv, &arc2, &punctures, pts_per_leg / 2)?;
        if (p2 - puncture).norm() > 1e-9 {
            return Err(Error::Geometry("paired arcs approach different punctures".into()));
        }
        let leg_line = PolylineSet::from_legs(vec![leg.clone()])?;
        for q in &check {
            if (q - puncture).norm() < 2.0 * LEG_SNAP_DISTANCE {
                continue;
            }
            let d = leg_line.distance(*q);
            if d > 1e-6 {
                return Err(Error::Geometry(format!(
                    "paired arc images disagree by {d:e}"
                )));
            }
        }
        if used_punctures.iter().any(|p| (p - puncture).norm() < 1e-9) {
            return Err(Error::Geometry("two legs claim the same puncture".into()));
        }
        used_punctures.push(puncture);

        let mut full = vec![branch_point];
        full.extend(leg.into_iter().skip(1));
        legs.push(full);
    }

    PolylineSet::from_legs(legs)
}

/// Adaptively sample the image of one hexagon arc from its finite vertex
/// toward the puncture, snapping the far end.
fn map_arc_to_leg(
    cov: &CoveringMap,
    t_inv: &Mobius,
    arc: &HexArc,
    punctures: &ThreePointSet,
    pts: usize,
) -> Result<(Vec<Complex64>, Complex64)> {
    let pts = pts.max(16);
    let image = |t: f64| -> Result<Complex64> {
        Ok(t_inv.apply(cov.standard_from_disk(arc.point_at(t))?))
    };
    // identify the puncture from a probe near the ideal end
    let probe = image(0.995)?;
    let puncture = *punctures
        .points()
        .iter()
        .min_by(|p, q| {
            (probe - *p)
                .norm()
                .partial_cmp(&(probe - *q).norm())
                .unwrap()
        })
        .expect("three punctures");

    let start = image(0.0)?;
    let mut leg = vec![start];
    let h_target = ((start - puncture).norm() / pts as f64).max(2e-4);
    let mut t = 0.0f64;
    let mut step = 1.0 / pts as f64;
    let mut reached = false;
    let mut guard = 0usize;
    while t < 1.0 {
        guard += 1;
        if guard > 200_000 {
            break;
        }
        let tn = (t + step).min(1.0);
        let z = image(tn)?;
        let prev = *leg.last().expect("nonempty");
        if (z - prev).norm() > h_target && step > 1e-12 {
            step *= 0.5;
            continue;
        }
        leg.push(z);
        t = tn;
        if (z - puncture).norm() <= LEG_SNAP_DISTANCE {
            *leg.last_mut().expect("nonempty") = puncture;
            reached = true;
            break;
        }
        if (z - prev).norm() < 0.25 * h_target {
            step *= 1.8;
        }
    }
    if !reached {
        let last = *leg.last().expect("nonempty");
        return Err(Error::Geometry(format!(
            "leg stalled {:e} away from its puncture",
            (last - puncture).norm()
        )));
    }
    Ok((leg, puncture))
}

/// Collinear prediction: the straight segment from the extreme point to the
/// extreme point through all three.
pub fn segment_prediction(e: &ThreePointSet) -> Result<PolylineSet> {
    segment_prediction_with(e, 512)
}

pub fn segment_prediction_with(e: &ThreePointSet, points: usize) -> Result<PolylineSet> {
    if !e.collinear() {
        return Err(Error::Geometry("segment prediction needs collinear points".into()));
    }
    let pts = e.points();
    // deterministic direction: farthest pair, sign fixed lexicographically
    let mut best = (0usize, 1usize);
    let mut best_d = 0.0;
    for i in 0..3 {
        for j in i + 1..3 {
            let d = (pts[i] - pts[j]).norm();
            if d > best_d {
                best_d = d;
                best = (i, j);
            }
        }
    }
    let mut dir = (pts[best.1] - pts[best.0]) / best_d;
    if dir.re < 0.0 || (dir.re == 0.0 && dir.im < 0.0) {
        dir = -dir;
    }
    let proj: Vec<f64> = pts.iter().map(|p| (p * dir.conj()).re).collect();
    let (lo_i, hi_i) = (
        (0..3).min_by(|&i, &j| proj[i].partial_cmp(&proj[j]).unwrap()).unwrap(),
        (0..3).max_by(|&i, &j| proj[i].partial_cmp(&proj[j]).unwrap()).unwrap(),
    );
    let (a, b) = (pts[lo_i], pts[hi_i]);
    let n = points.max(2);
    let leg = (0..n)
        .map(|i| a + (b - a) * (i as f64 / (n - 1) as f64))
        .collect();
    PolylineSet::from_legs(vec![leg])
}

// ---------------------------------------------------------------------------
// Exact δ(z)
// ---------------------------------------------------------------------------

/// Result of the maximal-modulus preimage search.
#[derive(Clone, Copy, Debug)]
pub struct DeltaValue {
    /// δ(z) = r / |u*|.
    pub delta: f64,
    /// Number of orbit points within `tie_tol` of the minimal modulus.
    pub maximizer_count: usize,
    /// The minimal-modulus disk representative u*.
    pub representative: Complex64,
    /// Modulus gap between the best and second-best orbit branch.
    pub gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointClass {
    /// Unique maximal-modulus preimage.
    C1,
    /// Two or more (the point lies on the zero attractor).
    CpMultiple,
}

#[derive(Clone, Copy, Debug)]
pub struct Classification {
    pub class: PointClass,
    pub count: usize,
    /// Gap fell between tie_tol and the ambiguity ceiling: too close to call.
    pub ambiguous: bool,
    pub delta: f64,
    pub representative: Complex64,
    pub gap: f64,
}

/// Reusable δ solver: precomputes the deck move sets once per covering.
pub struct DeltaSolver<'a> {
    cov: &'a CoveringMap,
    punctures: ThreePointSet,
    /// Descent moves: all reduced words of length ≤ 3 (closed under inverses,
    /// covers every bisector that can bound the Dirichlet domain).
    descent: Vec<Mobius>,
    /// Tie-scan moves: all reduced words of length ≤ 5.
    scan: Vec<Mobius>,
}

impl<'a> DeltaSolver<'a> {
    pub fn new(cov: &'a CoveringMap) -> Result<Self> {
        let deck = deck_generators(cov)?;
        Ok(DeltaSolver {
            cov,
            punctures: cov.punctures()?,
            descent: deck.words_up_to(3)?,
            scan: deck.words_up_to(5)?,
        })
    }

    /// δ(z) with the maximizer count at the default tie tolerance.
    pub fn delta_exact(&self, z: Complex64) -> Result<DeltaValue> {
        self.delta_with_tie_tol(z, TIE_TOL)
    }

    pub fn delta_with_tie_tol(&self, z: Complex64, tie_tol: f64) -> Result<DeltaValue> {
        if self.punctures.distance(z) < 1e-9 {
            return Err(Error::NearPuncture(z));
        }
        let zeta = self.cov.to_standard().apply(z);
        let tau = invert_lambda(zeta)?;
        let mut u = self.cov.disk_to_half_plane().inverse().apply(tau);
        if u.norm() >= 1.0 {
            return Err(Error::Geometry(format!("preimage left the disk: {u}")));
        }

        // greedy modulus descent into the closed Dirichlet domain
        let mut steps = 0usize;
        loop {
            steps += 1;
            if steps > REDUCTION_STEP_CAP {
                return Err(Error::ReductionCap(REDUCTION_STEP_CAP));
            }
            let mut best = u;
            let mut best_mod = u.norm();
            for mv in &self.descent {
                let v = mv.apply(u);
                let m = v.norm();
                if m < best_mod {
                    best_mod = m;
                    best = v;
                }
            }
            if best_mod < u.norm() - 1e-13 {
                u = best;
            } else {
                break;
            }
        }

        // count ties over the word-length-5 neighborhood
        let u_mod = u.norm();
        let mut count = 1usize;
        let mut second = f64::INFINITY;
        for mv in &self.scan {
            let m = mv.apply(u).norm();
            if m <= u_mod + tie_tol {
                count += 1;
            } else if m < second {
                second = m;
            }
        }
        let gap = if count > 1 { 0.0 } else { second - u_mod };
        Ok(DeltaValue {
            delta: self.cov.radius() / u_mod,
            maximizer_count: count,
            representative: u,
            gap,
        })
    }

    /// Classify z as C1 (unique maximal preimage) or on the multi-preimage
    /// ridge, with the near-miss ambiguity flag.
    pub fn classify(&self, z: Complex64, tie_tol: f64) -> Result<Classification> {
        let dv = self.delta_with_tie_tol(z, tie_tol)?;
        let class = if dv.maximizer_count >= 2 {
            PointClass::CpMultiple
        } else {
            PointClass::C1
        };
        let ambiguous =
            class == PointClass::C1 && dv.gap > tie_tol && dv.gap < AMBIGUITY_CEILING;
        Ok(Classification {
            class,
            count: dv.maximizer_count,
            ambiguous,
            delta: dv.delta,
            representative: dv.representative,
            gap: dv.gap,
        })
    }
}

/// One-shot δ(z); builds a solver internally.
pub fn delta_exact(cov: &CoveringMap, z: Complex64) -> Result<DeltaValue> {
    DeltaSolver::new(cov)?.delta_exact(z)
}

/// One-shot classification of a point.
pub fn classify_point(cov: &CoveringMap, z: Complex64, tie_tol: f64) -> Result<Classification> {
    DeltaSolver::new(cov)?.classify(z, tie_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{build_covering_with, CoveringOptions};
    use crate::third_root_of_unity;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_opts() -> CoveringOptions {
        CoveringOptions { tail_order: 16, radius_factor: 1.05 }
    }

    fn symmetric_cov() -> crate::covering::CoveringMap {
        let eta = third_root_of_unity();
        let e = ThreePointSet::new(c(1.0, 0.0), eta, eta * eta).unwrap();
        build_covering_with(&e, small_opts()).unwrap()
    }

    #[test]
    fn hyp_dist_basics() {
        assert_eq!(hyp_dist(c(0.3, 0.1), c(0.3, 0.1)).unwrap(), 0.0);
        let d = hyp_dist(c(0.0, 0.0), c(0.5, 0.0)).unwrap();
        assert!((d - 2.0 * 0.5f64.atanh()).abs() < 1e-15);
        assert!(hyp_dist(c(1.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn hyp_dist_is_mobius_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let alpha = c(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            let rot = Complex64::from_polar(1.0, th);
            let auto = |u: Complex64| rot * (u - alpha) / (c(1.0, 0.0) - alpha.conj() * u);
            let u = c(rng.gen_range(-0.7..0.7), rng.gen_range(-0.5..0.5));
            let v = c(rng.gen_range(-0.7..0.7), rng.gen_range(-0.5..0.5));
            let d1 = hyp_dist(u, v).unwrap();
            let d2 = hyp_dist(auto(u), auto(v)).unwrap();
            assert!((d1 - d2).abs() <= 1e-12 * (1.0 + d1));
        }
    }

    #[test]
    fn bisector_crosses_at_hyperbolic_midpoint() {
        let t = 0.6;
        let g = bisector(c(t, 0.0)).unwrap();
        let crossing = t / (1.0 + (1.0 - t * t).sqrt()); // tanh(atanh(t)/2)
        match g.kind {
            GeodesicKind::Arc { center, radius } => {
                assert!(((center.re - radius) - crossing).abs() < 1e-14);
                assert!(center.im.abs() < 1e-15);
            }
            _ => panic!("expected an arc"),
        }
    }

    #[test]
    fn bisector_rotation_equivariance() {
        let zeta = c(0.4, 0.1);
        let phi = 1.1f64;
        let rot = Complex64::from_polar(1.0, phi);
        let g1 = bisector(zeta).unwrap();
        let g2 = bisector(rot * zeta).unwrap();
        match (g1.kind, g2.kind) {
            (
                GeodesicKind::Arc { center: c1, radius: r1 },
                GeodesicKind::Arc { center: c2, radius: r2 },
            ) => {
                assert!((rot * c1 - c2).norm() < 1e-14);
                assert!((r1 - r2).abs() < 1e-14);
            }
            _ => panic!("expected arcs"),
        }
    }

    #[test]
    fn bisector_points_are_equidistant() {
        let zeta = c(0.35, 0.55);
        let g = bisector(zeta).unwrap();
        if let GeodesicKind::Arc { center, radius } = g.kind {
            for k in 0..32 {
                let th = std::f64::consts::TAU * k as f64 / 32.0;
                let u = center + Complex64::from_polar(radius, th);
                if u.norm() >= 0.999 {
                    continue;
                }
                let d0 = hyp_dist(u, c(0.0, 0.0)).unwrap();
                let dz = hyp_dist(u, zeta).unwrap();
                assert!((d0 - dz).abs() <= 1e-9, "off by {:e}", (d0 - dz).abs());
            }
        }
        assert!(bisector(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn six_centers_of_symmetric_covering() {
        let cov = symmetric_cov();
        let centers = six_centers(&cov).unwrap();
        // the set is invariant under rotation by η
        let eta = third_root_of_unity();
        for z in centers.iter() {
            let rotated = eta * z;
            let best = centers.iter().map(|w| (w - rotated).norm()).fold(f64::INFINITY, f64::min);
            assert!(best <= 1e-8, "rotation sends {z} off the set by {best:e}");
        }
        // rejects the collinear case
        let e = ThreePointSet::new(c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let col = build_covering_with(&e, small_opts()).unwrap();
        assert!(six_centers(&col).is_err());
    }

    #[test]
    fn hexagon_structure_for_symmetric_covering() {
        let cov = symmetric_cov();
        let centers = six_centers(&cov).unwrap();
        let hex = dirichlet_hexagon(&centers).unwrap();
        assert_eq!(hex.arcs.len(), 6);

        // finite and ideal vertices each form an η-orbit
        let eta = third_root_of_unity();
        for set in [&hex.finite_vertices[..], &hex.ideal_vertices[..]] {
            for v in set {
                let rotated = eta * v;
                let best = set.iter().map(|w| (w - rotated).norm()).fold(f64::INFINITY, f64::min);
                assert!(best <= 1e-7, "vertex orbit broken by {best:e}");
            }
        }
        // arc endpoints chain up
        for w in 0..6 {
            let a = &hex.arcs[w];
            let b = &hex.arcs[(w + 1) % 6];
            assert!((a.end - b.start).norm() <= 1e-9);
        }
        // the origin is interior
        for arc in &hex.arcs {
            for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
                assert!(arc.point_at(t).norm() < 1.0);
            }
        }
    }

    #[test]
    fn tripod_of_symmetric_set_is_three_unit_rays() {
        let cov = symmetric_cov();
        let hex = dirichlet_hexagon(&six_centers(&cov).unwrap()).unwrap();
        let tri = tripod(&cov, &hex, 200).unwrap();
        assert_eq!(tri.legs.len(), 3);

        // branch point at the origin
        let b = tri.legs[0][0];
        assert!(b.norm() <= 1e-6, "branch point {b}");

        // each leg hugs a ray {η^j t}
        let eta = third_root_of_unity();
        let rays = [c(1.0, 0.0), eta, eta * eta];
        for leg in &tri.legs {
            let end = *leg.last().unwrap();
            let ray = rays.iter().find(|r| (*r - end).norm() < 1e-9).expect("snapped end");
            for p in leg {
                // distance to the segment [0, ray]
                let t = (p * ray.conj()).re.clamp(0.0, 1.0);
                let d = (p - ray * t).norm();
                assert!(d <= 1e-3, "leg point {p} off its ray by {d:e}");
            }
        }

        // η-invariance of the whole set
        for leg in &tri.legs {
            for p in leg.iter().step_by(9) {
                let q = eta * p;
                assert!(tri.distance(q) <= 1e-8, "rotated point {q} misses the set");
            }
        }
    }

    #[test]
    fn segment_prediction_examples() {
        let e = ThreePointSet::new(c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let seg = segment_prediction(&e).unwrap();
        assert_eq!(seg.legs.len(), 1);
        let first = seg.legs[0][0];
        let last = *seg.legs[0].last().unwrap();
        assert!((first - c(-1.0, 0.0)).norm() < 1e-14 && (last - c(1.0, 0.0)).norm() < 1e-14);

        let e2 = ThreePointSet::new(c(0.0, 0.0), c(1.0, 1.0), c(2.0, 2.0)).unwrap();
        let seg2 = segment_prediction(&e2).unwrap();
        assert!(seg2.distance(c(1.5, 1.5)) < 1e-12);
        assert!((seg2.legs[0][0]).norm() < 1e-14);
        assert!((*seg2.legs[0].last().unwrap() - c(2.0, 2.0)).norm() < 1e-14);

        // relabeling invariance
        let e3 = ThreePointSet::new(c(2.0, 2.0), c(0.0, 0.0), c(1.0, 1.0)).unwrap();
        let seg3 = segment_prediction(&e3).unwrap();
        assert_eq!(seg2.legs[0].len(), seg3.legs[0].len());
        for (a, b) in seg2.legs[0].iter().zip(&seg3.legs[0]) {
            assert!((a - b).norm() < 1e-12);
        }

        assert!(segment_prediction(&ThreePointSet::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)).unwrap()).is_err());
    }

    #[test]
    fn delta_far_field_matches_modulus() {
        let cov = symmetric_cov();
        let solver = DeltaSolver::new(&cov).unwrap();
        for z in [c(1000.0, 0.0), c(-600.0, 800.0)] {
            let dv = solver.delta_exact(z).unwrap();
            assert!(
                (dv.delta / z.norm() - 1.0).abs() <= 0.01,
                "delta {} vs |z| {}",
                dv.delta,
                z.norm()
            );
            assert_eq!(dv.maximizer_count, 1);
        }
    }

    #[test]
    fn delta_on_tripod_leg_sees_multiple_preimages() {
        let cov = symmetric_cov();
        let solver = DeltaSolver::new(&cov).unwrap();
        // midpoints of the three rays are interior tripod points
        let eta = third_root_of_unity();
        for ray in [c(1.0, 0.0), eta, eta * eta] {
            let z = ray * 0.5;
            let dv = solver.delta_exact(z).unwrap();
            assert!(dv.maximizer_count >= 2, "count {} at {z}", dv.maximizer_count);
        }
        // the branch point has three legs meeting
        let cls = solver.classify(c(0.0, 0.0), TIE_TOL).unwrap();
        assert_eq!(cls.class, PointClass::CpMultiple);
        assert!(cls.count >= 3, "count {} at the branch point", cls.count);
    }

    #[test]
    fn classify_far_points_as_c1() {
        let cov = symmetric_cov();
        let solver = DeltaSolver::new(&cov).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            // sample away from the tripod rays
            let r = rng.gen_range(1.4..2.2);
            let th = rng.gen_range(0.25..0.85) * (std::f64::consts::TAU / 3.0);
            let z = Complex64::from_polar(r, th);
            let cls = solver.classify(z, TIE_TOL).unwrap();
            assert_eq!(cls.class, PointClass::C1, "at {z}");
            assert!(!cls.ambiguous);
        }
    }

    #[test]
    fn delta_exceeds_radius_and_decays_toward_punctures() {
        let cov = symmetric_cov();
        let solver = DeltaSolver::new(&cov).unwrap();
        let r = cov.radius();
        // along ten approach paths the trend of δ over the last samples is
        // monotone down toward r
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let target = c(1.0, 0.0);
            let dir = Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
            let mut prev = f64::INFINITY;
            for step in 1..=10 {
                let dist = 0.5 / (step as f64 * step as f64);
                let z = target + dir * dist;
                let dv = solver.delta_exact(z).unwrap();
                assert!(dv.delta > r, "delta {} <= r {}", dv.delta, r);
                if step > 5 {
                    assert!(dv.delta <= prev + 1e-9, "not trending down");
                }
                prev = dv.delta;
            }
        }
        assert!(matches!(
            solver.delta_exact(c(1.0, 0.0)),
            Err(Error::NearPuncture(_))
        ));
    }

    #[test]
    fn delta_matches_the_sequence_limit() {
        // Joukowski-type oracle through the collinear covering is exercised
        // in the acceptance suite; here: symmetric case, far-ish C1 points.
        let eta = third_root_of_unity();
        let e = ThreePointSet::new(c(1.0, 0.0), eta, eta * eta).unwrap();
        let cov = build_covering_with(
            &e,
            CoveringOptions { tail_order: 420, radius_factor: 1.02 },
        )
        .unwrap();
        let solver = DeltaSolver::new(&cov).unwrap();
        for z in [c(1.6, 0.9), c(-0.4, 1.9), c(2.2, -1.2)] {
            let dv = solver.delta_exact(z).unwrap();
            let seq = crate::zeros::delta_sequence(cov.tail(), z, 400).unwrap();
            let est = seq[399];
            assert!(
                (est / dv.delta - 1.0).abs() <= 0.05,
                "z {z}: sequence {est} vs exact {}",
                dv.delta
            );
        }
    }
}
