//! The modular lambda function λ: H → C∖{0,1} and its inversion.
//!
//! λ = θ₂⁴/θ₃⁴ with nome q = exp(iπτ). Direct theta summation is only
//! reliable when |q| is small, and reduction into a Γ(2) fundamental domain
//! alone does not bound |q| (the domain touches the real axis at its cusps),
//! so evaluation reduces τ into the PSL(2,ℤ) fundamental domain instead --
//! there Im τ ≥ √3/2, i.e. |q| ≤ 0.066 -- and then walks the recorded moves
//! back through the anharmonic identities
//!
//! ```text
//! λ(τ + 1) = λ/(λ - 1),      λ(-1/τ) = 1 - λ.
//! ```
//!
//! The derivative comes from dλ/dτ = iπ λ (1-λ) θ₃⁴ plus the chain rule
//! through the same walk (checked against finite differences in the tests).
//!
//! Inversion uses the AGM form of the elliptic nome,
//! τ = i·agm(1, √(1-a))/agm(1, √a), Newton-polished against the series
//! evaluation, with a path-lifting fallback for branch mismatches.

use num_complex::Complex64;

use crate::error::{Error, Result};

const THETA_TERM_CUTOFF: f64 = 1e-18;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// exp(iπτs) for real s, computed without complex powers.
#[inline]
fn q_power(tau: Complex64, s: f64) -> Complex64 {
    let mag = (-std::f64::consts::PI * s * tau.im).exp();
    let ang = std::f64::consts::PI * s * tau.re;
    Complex64::from_polar(mag, ang)
}

/// θ₂(0|τ)⁴ and θ₃(0|τ)⁴ by direct summation; requires |q| small.
fn theta24_theta34(tau: Complex64) -> (Complex64, Complex64) {
    // θ₂ = 2 Σ_{n≥0} q^{(n+1/2)²},  θ₃ = 1 + 2 Σ_{n≥1} q^{n²}
    let mut t2 = c(0.0, 0.0);
    for n in 0..64 {
        let s = (n as f64 + 0.5) * (n as f64 + 0.5);
        let term = q_power(tau, s);
        t2 += term;
        if term.norm() < THETA_TERM_CUTOFF {
            break;
        }
    }
    t2 *= 2.0;
    let mut t3 = c(1.0, 0.0);
    for n in 1..64 {
        let s = (n * n) as f64;
        let term = q_power(tau, s);
        t3 += 2.0 * term;
        if term.norm() < THETA_TERM_CUTOFF {
            break;
        }
    }
    let sq = |z: Complex64| z * z;
    (sq(sq(t2)), sq(sq(t3)))
}

#[derive(Clone, Copy, Debug)]
enum Move {
    Translate(i64),
    Invert,
}

/// Reduce τ into the PSL(2,ℤ) fundamental domain, recording the moves.
fn reduce_full_modular(mut tau: Complex64) -> Result<(Complex64, Vec<Move>)> {
    if !(tau.im > 0.0) || !tau.is_finite() {
        return Err(Error::NotInUpperHalfPlane(tau));
    }
    let mut moves = Vec::new();
    for _ in 0..4000 {
        let n = tau.re.round();
        if n != 0.0 {
            tau.re -= n;
            moves.push(Move::Translate(n as i64));
        }
        if tau.norm() < 1.0 - 1e-15 {
            moves.push(Move::Invert);
            tau = -tau.inv();
        } else {
            return Ok((tau, moves));
        }
    }
    // only reachable for pathological inputs on the boundary orbit
    Ok((tau, moves))
}

/// λ(τ). Errors unless Im τ > 0.
pub fn lambda(tau: Complex64) -> Result<Complex64> {
    Ok(lambda_with_derivative(tau)?.0)
}

/// (λ(τ), dλ/dτ).
pub fn lambda_with_derivative(tau: Complex64) -> Result<(Complex64, Complex64)> {
    let (mut t, moves) = reduce_full_modular(tau)?;
    let (th2, th3) = theta24_theta34(t);
    let mut lam = th2 / th3;
    let mut dlam = c(0.0, std::f64::consts::PI) * lam * (c(1.0, 0.0) - lam) * th3;
    for mv in moves.iter().rev() {
        match *mv {
            Move::Invert => {
                // current point t = -1/t_old; undo it
                dlam = -dlam * t * t;
                lam = c(1.0, 0.0) - lam;
                t = -t.inv();
            }
            Move::Translate(n) => {
                if n.rem_euclid(2) == 1 {
                    let den = lam - c(1.0, 0.0);
                    dlam = -dlam / (den * den);
                    lam = lam / den;
                }
                t += c(n as f64, 0.0);
            }
        }
    }
    Ok((lam, dlam))
}

/// Reduce τ into the Γ(2) fundamental domain {|Re τ| ≤ 1, |2τ ± 1| ≥ 1}.
pub fn reduce_gamma2(mut tau: Complex64) -> Complex64 {
    for _ in 0..500 {
        let n = (tau.re / 2.0).round();
        if n != 0.0 {
            tau.re -= 2.0 * n;
        }
        let two = c(2.0, 0.0) * tau;
        if (two + c(1.0, 0.0)).norm() < 1.0 - 1e-14 {
            tau = tau / (two + c(1.0, 0.0));
        } else if (two - c(1.0, 0.0)).norm() < 1.0 - 1e-14 {
            tau = tau / (c(1.0, 0.0) - two);
        } else {
            break;
        }
    }
    tau
}

/// Optimal complex arithmetic-geometric mean.
fn agm(mut a: Complex64, mut b: Complex64) -> Complex64 {
    for _ in 0..60 {
        if (a - b).norm() <= 1e-17 * a.norm().max(b.norm()) {
            break;
        }
        let an = (a + b) * 0.5;
        let mut bn = (a * b).sqrt();
        // choose the root with Re(bn/an) >= 0 so the iteration contracts
        if (an - bn).norm() > (an + bn).norm() {
            bn = -bn;
        }
        a = an;
        b = bn;
    }
    (a + b) * 0.5
}

/// Preimage τ₀ of `a` under λ, in the Γ(2) fundamental domain, with
/// λ(τ₀) = a verified to 1e-10.
pub fn invert_lambda(a: Complex64) -> Result<Complex64> {
    if a.norm() < 1e-12 || (a - c(1.0, 0.0)).norm() < 1e-12 {
        return Err(Error::LambdaPuncture(a));
    }
    if !a.is_finite() {
        return Err(Error::LambdaPuncture(a));
    }
    let guess = i_times_agm_ratio(a);
    let polished = guess.and_then(|g| polish(g, a).ok());
    let tau = match polished {
        Some(t) => t,
        None => continuation_invert(a)?,
    };
    let tau = reduce_gamma2(tau);
    let tau = polish(tau, a)?;
    let residual = (lambda(tau)? - a).norm();
    let tol = 1e-10 * a.norm().max(1.0);
    if residual > tol {
        return Err(Error::InversionFailure(residual));
    }
    Ok(tau)
}

fn i_times_agm_ratio(a: Complex64) -> Option<Complex64> {
    let num = agm(c(1.0, 0.0), (c(1.0, 0.0) - a).sqrt());
    let den = agm(c(1.0, 0.0), a.sqrt());
    let tau = c(0.0, 1.0) * num / den;
    if tau.is_finite() && tau.im > 1e-300 {
        Some(tau)
    } else {
        None
    }
}

/// Newton polish of λ(τ) = a; returns Err if it fails to reach ~1e-12.
fn polish(mut tau: Complex64, a: Complex64) -> Result<Complex64> {
    let tol = 1e-12 * a.norm().max(1.0);
    let mut best = tau;
    let mut best_res = f64::INFINITY;
    for _ in 0..40 {
        let (lam, dlam) = lambda_with_derivative(tau)?;
        let res = (lam - a).norm();
        if res < best_res {
            best_res = res;
            best = tau;
        }
        if res <= tol {
            return Ok(tau);
        }
        if dlam.norm() == 0.0 {
            break;
        }
        let mut step = (lam - a) / dlam;
        // keep the iterate in the upper half-plane
        let mut next = tau - step;
        let mut halvings = 0;
        while next.im <= 0.0 && halvings < 60 {
            step *= 0.5;
            next = tau - step;
            halvings += 1;
        }
        tau = next;
    }
    if best_res <= 1e-10 * a.norm().max(1.0) {
        Ok(best)
    } else {
        Err(Error::InversionFailure(best_res))
    }
}

/// Path-lifting fallback: walk a from 1/2 (where τ = i) to the target,
/// Newton-tracking the lift and halving the step on failure.
fn continuation_invert(target: Complex64) -> Result<Complex64> {
    let mut waypoints: Vec<Complex64> = vec![c(0.5, 0.0), c(0.5, 1.2)];
    if target.im >= 0.0 {
        waypoints.push(c(target.re, 1.2));
    } else {
        let x_safe = if target.re < 0.5 { -0.5 } else { 1.5 };
        waypoints.push(c(x_safe, 1.2));
        waypoints.push(c(x_safe, target.im.min(-0.4)));
        waypoints.push(c(target.re, target.im.min(-0.4)));
    }
    waypoints.push(target);

    let mut tau = c(0.0, 1.0);
    let mut current = c(0.5, 0.0);
    for &wp in &waypoints[1..] {
        let mut t_param = 0.0f64;
        let mut step = 0.25f64;
        let mut guard = 0usize;
        while t_param < 1.0 {
            guard += 1;
            if guard > 2000 {
                return Err(Error::InversionFailure(f64::NAN));
            }
            let t_next = (t_param + step).min(1.0);
            let a_next = current + (wp - current) * t_next;
            if a_next.norm() < 1e-12 || (a_next - c(1.0, 0.0)).norm() < 1e-12 {
                // nudged onto a puncture: shrink the step
                step *= 0.5;
                if step < 1e-12 {
                    return Err(Error::InversionFailure(f64::NAN));
                }
                continue;
            }
            match polish(tau, a_next) {
                Ok(t) => {
                    tau = t;
                    t_param = t_next;
                    step = (step * 2.0).min(0.25);
                }
                Err(_) => {
                    step *= 0.5;
                    if step < 1e-12 {
                        return Err(Error::InversionFailure(f64::NAN));
                    }
                }
            }
        }
        current = wp;
    }
    Ok(tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tau(rng: &mut ChaCha8Rng) -> Complex64 {
        c(rng.gen_range(-2.0..2.0), rng.gen_range(0.3..3.0))
    }

    #[test]
    fn lambda_at_i_is_half() {
        let v = lambda(c(0.0, 1.0)).unwrap();
        assert!((v - c(0.5, 0.0)).norm() < 1e-14, "{v}");
    }

    #[test]
    fn lambda_at_one_plus_i() {
        // λ(1+i) = -1 via λ(τ+1) = λ/(λ-1) at τ = i
        let v = lambda(c(1.0, 1.0)).unwrap();
        assert!((v - c(-1.0, 0.0)).norm() < 1e-13, "{v}");
    }

    #[test]
    fn lambda_at_2i_matches_landen_value() {
        // (3 - 2√2)² = 17 - 12√2
        let expect = 17.0 - 12.0 * 2f64.sqrt();
        let v = lambda(c(0.0, 2.0)).unwrap();
        assert!((v - c(expect, 0.0)).norm() < 1e-14, "{v}");
    }

    #[test]
    fn lambda_rejects_lower_half_plane() {
        assert!(lambda(c(0.3, -0.1)).is_err());
        assert!(lambda(c(0.3, 0.0)).is_err());
    }

    #[test]
    fn gamma2_periodicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let tau = random_tau(&mut rng);
            let a = lambda(tau).unwrap();
            let b = lambda(tau + c(2.0, 0.0)).unwrap();
            assert!((a - b).norm() <= 1e-11, "gap {:e}", (a - b).norm());
        }
    }

    #[test]
    fn gamma2_second_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..20 {
            let tau = random_tau(&mut rng);
            let moved = tau / (c(2.0, 0.0) * tau + c(1.0, 0.0));
            let a = lambda(tau).unwrap();
            let b = lambda(moved).unwrap();
            assert!((a - b).norm() <= 1e-10, "gap {:e}", (a - b).norm());
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let tau = random_tau(&mut rng);
            let (_, dlam) = lambda_with_derivative(tau).unwrap();
            let h = 1e-6;
            let fd = (lambda(tau + c(h, 0.0)).unwrap() - lambda(tau - c(h, 0.0)).unwrap())
                / c(2.0 * h, 0.0);
            assert!(
                (dlam - fd).norm() <= 1e-6 * (1.0 + dlam.norm()),
                "dλ {dlam} vs fd {fd}"
            );
        }
    }

    #[test]
    fn invert_half_gives_i() {
        let tau = invert_lambda(c(0.5, 0.0)).unwrap();
        assert!((tau - c(0.0, 1.0)).norm() < 1e-10, "{tau}");
    }

    #[test]
    fn invert_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..50 {
            let a = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            if a.norm() < 0.05 || (a - c(1.0, 0.0)).norm() < 0.05 {
                continue;
            }
            let tau = invert_lambda(a).unwrap();
            let back = lambda(tau).unwrap();
            assert!((back - a).norm() <= 1e-9 * a.norm().max(1.0), "a {a}: back {back}");
            assert!(tau.im > 0.0);
        }
    }

    #[test]
    fn invert_negative_real_lands_on_reflection_locus() {
        // λ is real exactly on the Γ(2)-orbit of the lines Re τ ∈ {0, ±1};
        // λ < 0 forces |Re τ₀| = 1 (λ ∈ (0,1) on the imaginary axis).
        let tau = invert_lambda(c(-1.0, 0.0)).unwrap();
        assert!((tau.re.abs() - 1.0).abs() < 1e-9, "{tau}");
        assert!((lambda(tau).unwrap() - c(-1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn invert_rejects_punctures() {
        assert!(matches!(invert_lambda(c(0.0, 0.0)), Err(Error::LambdaPuncture(_))));
        assert!(matches!(invert_lambda(c(1.0, 0.0)), Err(Error::LambdaPuncture(_))));
    }

    #[test]
    fn invert_elliptic_fixed_value() {
        // λ² - λ + 1 = 0 at the order-3 corner; both roots invert cleanly
        let a = c(0.5, 0.75f64.sqrt());
        let tau = invert_lambda(a).unwrap();
        assert!((lambda(tau).unwrap() - a).norm() < 1e-10);
        assert!(tau.im > 0.5);
    }
}
