use faberlab_core::covering::*;
use faberlab_core::series::circle_node;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 { Complex64::new(re, im) }

fn main() {
    let eta = faberlab_core::third_root_of_unity();
    let e = ThreePointSet::new(c(1.0, 0.0), eta, eta * eta).unwrap();
    let (t, a) = mobius_to_standard(&e).unwrap();
    println!("a = {a}");
    let tau0 = faberlab_core::lambda::invert_lambda(a).unwrap();
    println!("tau0 = {tau0}");
    println!("lambda(tau0) = {}", faberlab_core::lambda::lambda(tau0).unwrap());
    let (_l, dl) = faberlab_core::lambda::lambda_with_derivative(tau0).unwrap();
    println!("dlambda = {dl}");
    let c1 = dl * (tau0 - tau0.conj());
    println!("c1 = {c1}");
    let residue = (t.b - t.d * a) / t.c;
    println!("residue A = {residue}");
    let leading = residue / c1;
    println!("phase*r = {leading}, r = {}", leading.norm());

    // build without tail via low order attempt, catching error
    match build_covering_with(&e, CoveringOptions { tail_order: 16, radius_factor: 1.05 }) {
        Ok(cov) => {
            println!("BUILD OK r={} rho0={}", cov.radius(), cov.pole_radius());
            let w = c(1e6, 0.0);
            println!("g(1e6) - w = {}", cov.eval(w).unwrap() - w);
        }
        Err(err) => {
            println!("BUILD ERR: {err}");
            // manual probing: construct pieces
            let r = leading.norm();
            let phase = leading / r;
            // probe eval at large w directly through the chain
            let m = faberlab_core::series::Mobius {
                a: -tau0.conj(), b: tau0, c: c(-1.0, 0.0), d: c(1.0, 0.0),
            };
            let g = |w: Complex64| -> Complex64 {
                let u = phase * r / w;
                let tau = m.apply(u);
                let lam = faberlab_core::lambda::lambda(tau).unwrap();
                t.inverse().apply(lam)
            };
            for &wmag in &[1e6, 1e4, 100.0, 10.0] {
                let w = c(wmag, 0.3 * wmag);
                println!("w = {w}: g(w) - w = {}", g(w) - w);
            }
        }
    }
}
