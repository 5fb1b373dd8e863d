//! Numerical laboratory for Faber polynomials of universal covering maps.
//!
//! The crate is organized around the pipeline
//!
//! ```text
//! three points E ──covering──▶ normalized covering map g(w) = w + Σ b_k w^{-k}
//!                                   │ (Laurent tail)
//!                                   ▼
//!            faber: F_k and P_k = (F_{k+1})'/(k+1)  (two independent routes)
//!                                   │
//!                                   ▼
//!            zeros: root ensembles, empirical measures, δ-sequences
//!                                   │
//!                                   ▼
//!            hyper: Dirichlet hexagon, tripod/segment prediction, exact δ(z)
//! ```
//!
//! All public types are immutable values; every operation is a pure function
//! of its inputs and safe to call concurrently.

pub mod covering;
pub mod dd;
pub mod eigen;
pub mod error;
pub mod faber;
pub mod hyper;
pub mod lambda;
pub mod series;
pub mod zeros;

pub use error::{Error, Result};

/// Complex double used throughout.
pub type C64 = num_complex::Complex64;

/// Primitive third root of unity `exp(2πi/3)`.
pub fn third_root_of_unity() -> C64 {
    C64::new(-0.5, 0.75f64.sqrt())
}
