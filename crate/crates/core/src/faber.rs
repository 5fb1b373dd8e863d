//! Faber polynomials F_k and their normalized derivatives P_k, generated
//! from a Laurent tail by two independent routes.
//!
//! The production route matches powers of w in the generating functions
//!
//! ```text
//! g'(w)/(g(w) - z) = Σ_k F_k(z) w^{-k-1}
//!       1/(g(w) - z) = Σ_k P_k(z) w^{-k-1}
//! ```
//!
//! which yields the recurrences implemented below. Both recurrences are
//! derived facts, so the module also carries trapezoid contour oracles that
//! recover F_k(z) and P_k(z) directly as w^{-k-1} coefficients; the test
//! suite certifies agreement before anything downstream trusts the
//! recurrences.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::{circle_node, LaurentTail, MonicPoly};

/// F_0..F_K via the coefficient recurrence
/// `F_{n+1} = (z - b_0) F_n - Σ_{k=1}^{n} b_k F_{n-k} - n b_n`.
///
/// Coefficients beyond the tail's truncation order are treated as zero; a
/// warning is logged when K exceeds it.
pub fn faber_polys(tail: &LaurentTail, max_degree: usize) -> Vec<MonicPoly> {
    if max_degree > tail.truncation_order() {
        log::warn!(
            "faber_polys: K = {} exceeds truncation order {}; higher coefficients treated as 0",
            max_degree,
            tail.truncation_order()
        );
    }
    // full ascending coefficient vectors, leading coefficient included
    let mut polys: Vec<Vec<Complex64>> = Vec::with_capacity(max_degree + 1);
    polys.push(vec![Complex64::new(1.0, 0.0)]);
    let b0 = tail.coeff(0);
    for n in 0..max_degree {
        let mut next = mul_by_z_minus(&polys[n], b0);
        for k in 1..=n {
            let bk = tail.coeff(k);
            if bk.norm() != 0.0 {
                axpy(&mut next, -bk, &polys[n - k]);
            }
        }
        next[0] -= (n as f64) * tail.coeff(n);
        polys.push(next);
    }
    polys.into_iter().map(into_monic).collect()
}

/// P_k via the Hessenberg characteristic-polynomial recurrence
/// `P_k = (z - b_0) P_{k-1} - Σ_{j=1}^{k-1} b_j P_{k-1-j}`.
pub fn toeplitz_pk(tail: &LaurentTail, k: usize) -> MonicPoly {
    toeplitz_pk_all(tail, k).pop().expect("k+1 entries")
}

/// P_0..P_K in one recurrence pass.
pub fn toeplitz_pk_all(tail: &LaurentTail, max_degree: usize) -> Vec<MonicPoly> {
    let mut polys: Vec<Vec<Complex64>> = Vec::with_capacity(max_degree + 1);
    polys.push(vec![Complex64::new(1.0, 0.0)]);
    let b0 = tail.coeff(0);
    for n in 0..max_degree {
        let mut next = mul_by_z_minus(&polys[n], b0);
        for j in 1..=n {
            let bj = tail.coeff(j);
            if bj.norm() != 0.0 {
                axpy(&mut next, -bj, &polys[n - j]);
            }
        }
        polys.push(next);
    }
    polys.into_iter().map(into_monic).collect()
}

/// `(F_{k+1})'/(k+1)`: monic of degree k. Errors on degree-0 input.
pub fn normalized_derivative(f: &MonicPoly) -> Result<MonicPoly> {
    let k1 = f.degree();
    if k1 == 0 {
        return Err(Error::BadDegree(0));
    }
    let scale = 1.0 / k1 as f64;
    let coeffs = (1..k1).map(|j| f.coeff(j) * (j as f64) * scale).collect();
    Ok(MonicPoly::new(coeffs))
}

/// Contour oracle for F_k(z): trapezoid quadrature of
/// `(1/2πi) ∮_{|w|=R} w^k g'(w)/(g(w) - z) dw`.
///
/// Testing aid only; requires every preimage of z inside the contour.
pub fn contour_faber(
    tail: &LaurentTail,
    k: usize,
    z: Complex64,
    radius: f64,
    nodes: usize,
) -> Result<Complex64> {
    contour_coefficient(tail, k, z, radius, nodes, true)
}

/// Contour oracle for P_k(z): same quadrature with integrand `1/(g(w) - z)`.
pub fn contour_pk(
    tail: &LaurentTail,
    k: usize,
    z: Complex64,
    radius: f64,
    nodes: usize,
) -> Result<Complex64> {
    contour_coefficient(tail, k, z, radius, nodes, false)
}

fn contour_coefficient(
    tail: &LaurentTail,
    k: usize,
    z: Complex64,
    radius: f64,
    nodes: usize,
    with_derivative: bool,
) -> Result<Complex64> {
    if nodes < 256 {
        return Err(Error::Domain(format!("contour oracle needs >= 256 nodes, got {nodes}")));
    }
    if radius <= tail.rho0_hat() {
        return Err(Error::Domain(format!(
            "contour radius {radius} must exceed rho0_hat = {}",
            tail.rho0_hat()
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..nodes {
        let w = circle_node(radius, j, nodes);
        let den = tail.eval(w)? - z;
        if den.norm() < 1e-10 {
            return Err(Error::DegenerateContour(den.norm()));
        }
        let num = if with_derivative { tail.eval_derivative(w)? } else { Complex64::new(1.0, 0.0) };
        // dw = i w dθ folds the 1/(2πi) into a plain average of w^{k+1} f(w)
        acc += w.powu(k as u32 + 1) * num / den;
    }
    Ok(acc / nodes as f64)
}

fn mul_by_z_minus(p: &[Complex64], b0: Complex64) -> Vec<Complex64> {
    // (z - b0) * p, coefficients ascending with explicit leading term
    let mut out = vec![Complex64::new(0.0, 0.0); p.len() + 1];
    for (j, &c) in p.iter().enumerate() {
        out[j + 1] += c;
        out[j] -= b0 * c;
    }
    out
}

fn axpy(target: &mut [Complex64], scale: Complex64, source: &[Complex64]) {
    for (t, &s) in target.iter_mut().zip(source) {
        *t += scale * s;
    }
}

fn into_monic(mut full: Vec<Complex64>) -> MonicPoly {
    let lead = full.pop().expect("nonempty");
    debug_assert!((lead - Complex64::new(1.0, 0.0)).norm() == 0.0);
    MonicPoly::new(full)
}
