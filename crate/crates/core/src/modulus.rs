//! Conformal modulus of a quadrilateral as a function of its cross ratio.
//!
//! A quadrilateral with boundary cross ratio λ (convention of
//! [`crate::geom::cross_ratio`]) is conformally a rectangle; its modulus is
//! the side ratio of that rectangle. Mapping the disk quadrilateral to the
//! upper half-plane with marked points (-1/k, -1, 1, 1/k) gives
//! λ = (1-k)²/(4k), and the Schwarz-Christoffel rectangle map yields
//!
//! ```text
//! M(λ) = K'(k) / (2 K(k)),   k = 1 + 2λ - 2√(λ²+λ) ∈ (0,1),
//! ```
//!
//! with K, K' the complete elliptic integrals. Both are evaluated through the
//! arithmetic-geometric mean: K(k) = π/(2·AGM(1,k')) and K'(k) = π/(2·AGM(1,k)),
//! so the complementary modulus k' is never formed by the cancellation-prone
//! 1-k² route. M(1) = 1 (the singular value k = 3-2√2 where K'/K = 2) and
//! M(1/λ) = 1/M(λ) (quadrilateral rotated by one vertex).

use crate::geom::{cross_ratio, GeomError, Quadruple};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModulusError {
    #[error("cross ratio must be a positive finite real, got {0:e}")]
    OutOfRange(f64),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Arithmetic-geometric mean of (a, b), a ≥ b ≥ 0.
///
/// Terminates when the relative change drops below 1e-15; quadratic
/// convergence makes the cap generous even for b near the subnormal range.
fn agm(mut a: f64, mut b: f64) -> f64 {
    debug_assert!(a > 0.0 && b >= 0.0);
    for _ in 0..80 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        if (a - b).abs() <= 1e-15 * an {
            return an;
        }
        a = an;
        b = bn;
    }
    0.5 * (a + b)
}

/// Elliptic modulus k and its complement for a given cross ratio, computed
/// from the branch that avoids cancellation: k → 0 as λ → ∞ and k → 1 as
/// λ → 0, and in each regime the small quantity is formed directly.
fn elliptic_modulus(lambda: f64) -> (f64, f64) {
    let (k, one_minus_k) = if lambda >= 1.0 {
        // k = 1/((1+2λ) + 2√(λ²+λ)), written to survive λ near f64::MAX
        let k = 1.0 / (lambda * (1.0 / lambda + 2.0 + 2.0 * (1.0 + 1.0 / lambda).sqrt()));
        (k, 1.0 - k)
    } else {
        let omk = 2.0 * ((lambda * (lambda + 1.0)).sqrt() - lambda);
        (1.0 - omk, omk)
    };
    let kc = (one_minus_k * (1.0 + k)).sqrt();
    (k, kc)
}

/// Modulus of any quadrilateral whose cross ratio equals `lambda`.
///
/// Strictly increasing in λ, equal to 1 at λ = 1, with M(1/λ)·M(λ) = 1.
pub fn modulus_from_cross_ratio(lambda: f64) -> Result<f64, ModulusError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(ModulusError::OutOfRange(lambda));
    }
    let (k, kc) = elliptic_modulus(lambda);
    // M = K'(k)/(2K(k)) = AGM(1,kc) / (2 AGM(1,k))
    Ok(agm(1.0, kc) / (2.0 * agm(1.0, k)))
}

/// log M(λ), kept as a difference of logs so extreme λ cannot overflow the
/// ratio.
pub fn log_modulus_from_cross_ratio(lambda: f64) -> Result<f64, ModulusError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(ModulusError::OutOfRange(lambda));
    }
    let (k, kc) = elliptic_modulus(lambda);
    Ok(agm(1.0, kc).ln() - agm(1.0, k).ln() - std::f64::consts::LN_2)
}

/// Modulus of a concrete quadruple.
pub fn modulus(q: &Quadruple) -> Result<f64, ModulusError> {
    let lambda = cross_ratio(q)?;
    modulus_from_cross_ratio(lambda)
}

/// Distance between two cross-ratio values measured through the modulus:
/// |log(M(x)/M(y))|. Vanishes iff x = y and satisfies the triangle
/// inequality by the log/abs structure.
pub fn rho_distance(x: f64, y: f64) -> Result<f64, ModulusError> {
    Ok((log_modulus_from_cross_ratio(x)? - log_modulus_from_cross_ratio(y)?).abs())
}
