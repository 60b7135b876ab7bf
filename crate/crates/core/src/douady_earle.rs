//! Numerical Douady-Earle (conformal barycentric) extension of circle
//! homeomorphisms, Beltrami coefficients, dilatation estimates, and the
//! counter-example experiments.
//!
//! The extension value w = ex(h)(z) is the unique root of the barycenter
//! integral
//!
//! ```text
//! F(z,w) = (1/2π) ∫ (h(ξ)-w)/(1-w̄·h(ξ)) · (1-|z|²)/|z-ξ|² |dξ| = 0,
//! ```
//!
//! found by a damped Newton iteration from the Poisson average F(z,0). At a
//! normalized point (ex(h)(0) = 0) the Beltrami coefficient has the closed
//! form
//!
//! ```text
//! μ(0) = (c₋₁ + d₋₁·c̄₁) / (c₁ + d₋₁·c̄₋₁),
//! c₁ = (1/2π)∫ ξ̄h(ξ), c₋₁ = (1/2π)∫ ξh(ξ), d₋₁ = (1/2π)∫ h(ξ)²,
//! ```
//!
//! and values away from the origin are obtained by conformal naturality:
//! conjugate by the disk Möbius moving z to 0 and renormalize. |μ| is
//! invariant under that transport; the argument picks up the factor
//! conj(g)/g with g = (γ_z⁻¹)'(z), which is real and positive for the
//! symmetric transvection γ_z(u) = (u+z)/(1+z̄u) used here, so the reported
//! μ needs no extra rotation.

use crate::boundary::{BoundaryError, BoundaryMap, Model};
use crate::geom::{cross_ratio, GeomError, Moebius, Point, Quadruple};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use thiserror::Error;

/// Quadrature panels are refined toward arg(z) beyond this radius.
const GRADED_RADIUS: f64 = 0.5;
/// The extension is evaluated only for |z| ≤ this bound; closer to the
/// boundary the Poisson kernel concentration defeats the quadrature.
pub const MAX_RADIUS: f64 = 0.999;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtendError {
    #[error("Newton iteration did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("extension does not fix the origin (|ex(h)(0)| = {0:e}); normalize first")]
    NotNormalized(f64),
    #[error("degenerate denominator in the Beltrami closed form")]
    DegenerateDenominator,
    #[error("evaluation point must satisfy |z| <= {MAX_RADIUS}")]
    OutsideDomain,
    #[error("Beltrami coefficient left the unit disk (|mu| = {0}); input is not a homeomorphism")]
    NonContractiveBeltrami(f64),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x)
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre rule on [0, 2π) whose panel boundaries are split
/// at every breakpoint of the target map; weights are positive and sum to 2π.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Rule aligned to the map's kinks with a fixed node count per panel.
    pub fn with_nodes_per_arc(h: &BoundaryMap, per_arc: usize) -> Self {
        Self::from_cuts(&Self::base_cuts(h), per_arc)
    }

    /// Rule aligned to the map's kinks; the per-panel node count starts at 64
    /// and doubles until two successive c₁ estimates differ by < 1e-12.
    pub fn for_map(h: &BoundaryMap) -> Result<Self, ExtendError> {
        let cuts = Self::base_cuts(h);
        let mut per_arc = 64;
        let mut rule = Self::from_cuts(&cuts, per_arc);
        let mut c1 = rule.c1(h)?;
        while per_arc < 1024 {
            per_arc *= 2;
            let finer = Self::from_cuts(&cuts, per_arc);
            let c1_finer = finer.c1(h)?;
            let settled = (c1_finer - c1).norm() < 1e-12;
            rule = finer;
            c1 = c1_finer;
            if settled {
                break;
            }
        }
        Ok(rule)
    }

    fn base_cuts(h: &BoundaryMap) -> Vec<f64> {
        let mut cuts = h.breakpoints();
        if cuts.len() < 4 {
            // smooth map: quarter-circle panels keep the error spectral
            for q in [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2] {
                cuts.push(q);
            }
        }
        normalize_cuts(cuts)
    }

    fn from_cuts(cuts: &[f64], per_arc: usize) -> Self {
        let (gl_nodes, gl_weights) = gauss_legendre(per_arc);
        let mut nodes = Vec::with_capacity(cuts.len() * per_arc);
        let mut weights = Vec::with_capacity(cuts.len() * per_arc);
        let m = cuts.len();
        for i in 0..m {
            let a = cuts[i];
            let b = if i + 1 == m { cuts[0] + TAU } else { cuts[i + 1] };
            let half = 0.5 * (b - a);
            let mid = 0.5 * (b + a);
            for (x, w) in gl_nodes.iter().zip(&gl_weights) {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }
        QuadratureRule { nodes, weights }
    }

    /// Refinement of the panel set toward arg(z): dyadic cut points at
    /// distances (1-|z|)·2^j from the kernel peak resolve the Poisson
    /// concentration near the boundary.
    fn refined_toward(&self, h: &BoundaryMap, z: Complex64, per_arc: usize) -> Self {
        let r = z.norm();
        if r <= GRADED_RADIUS {
            return self.clone();
        }
        let mut cuts = Self::base_cuts(h);
        let peak = z.arg();
        let mut d = 1.0 - r;
        cuts.push(crate::geom::normalize_angle(peak));
        while d < PI {
            cuts.push(crate::geom::normalize_angle(peak + d));
            cuts.push(crate::geom::normalize_angle(peak - d));
            d *= 2.0;
        }
        Self::from_cuts(&normalize_cuts(cuts), per_arc)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// (1/2π) ∫ ξ̄ h(ξ) |dξ|.
    fn c1(&self, h: &BoundaryMap) -> Result<Complex64, ExtendError> {
        let t = MapTable::new(h, self)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for ((&theta, &w), &u) in self.nodes.iter().zip(&self.weights).zip(&t.values) {
            acc += w * Complex64::from_polar(1.0, -theta) * u;
        }
        Ok(acc / TAU)
    }
}

fn normalize_cuts(mut cuts: Vec<f64>) -> Vec<f64> {
    cuts.iter_mut().for_each(|c| *c = crate::geom::normalize_angle(*c));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    if cuts.is_empty() {
        cuts.push(0.0);
    }
    cuts
}

/// Map samples at the rule's nodes.
struct MapTable {
    values: Vec<Complex64>,
}

impl MapTable {
    fn new(h: &BoundaryMap, rule: &QuadratureRule) -> Result<Self, ExtendError> {
        let mut values = Vec::with_capacity(rule.nodes.len());
        for &theta in &rule.nodes {
            let img = h.evaluate(Point::from_angle(theta))?;
            values.push(img.finite().ok_or(BoundaryError::ModelMismatch)?);
        }
        Ok(MapTable { values })
    }

    /// F together with the Wirtinger derivatives (∂F/∂w, ∂F/∂w̄).
    fn residual_jacobian(
        &self,
        rule: &QuadratureRule,
        z: Complex64,
        w: Complex64,
    ) -> (Complex64, Complex64, Complex64) {
        let one = Complex64::new(1.0, 0.0);
        let zn = z.norm_sqr();
        let mut f = Complex64::new(0.0, 0.0);
        let mut dw = Complex64::new(0.0, 0.0);
        let mut dwb = Complex64::new(0.0, 0.0);
        for ((&theta, &wt), &u) in rule.nodes.iter().zip(&rule.weights).zip(&self.values) {
            let xi = Complex64::from_polar(1.0, theta);
            let p = wt * (1.0 - zn) / (z - xi).norm_sqr();
            let den = one - w.conj() * u;
            f += p * (u - w) / den;
            dw += p * (-one / den);
            dwb += p * u * (u - w) / (den * den);
        }
        (f / TAU, dw / TAU, dwb / TAU)
    }

    fn residual(&self, rule: &QuadratureRule, z: Complex64, w: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let zn = z.norm_sqr();
        let mut f = Complex64::new(0.0, 0.0);
        for ((&theta, &wt), &u) in rule.nodes.iter().zip(&rule.weights).zip(&self.values) {
            let xi = Complex64::from_polar(1.0, theta);
            let p = wt * (1.0 - zn) / (z - xi).norm_sqr();
            f += p * (u - w) / (one - w.conj() * u);
        }
        f / TAU
    }
}

/// Quadrature approximation of the barycenter integral F(z, w).
pub fn barycenter_residual(
    h: &BoundaryMap,
    z: Complex64,
    w: Complex64,
    rule: &QuadratureRule,
) -> Result<Complex64, ExtendError> {
    let t = MapTable::new(h, rule)?;
    Ok(t.residual(rule, z, w))
}

/// The Douady-Earle extension ex(h)(z): the root w of F(z, ·), located by a
/// damped Newton iteration from the Poisson average F(z, 0).
pub fn extend(h: &BoundaryMap, z: Complex64, tol: f64) -> Result<Complex64, ExtendError> {
    let rule = QuadratureRule::for_map(h)?;
    extend_with_rule(h, z, tol, &rule)
}

pub fn extend_with_rule(
    h: &BoundaryMap,
    z: Complex64,
    tol: f64,
    base_rule: &QuadratureRule,
) -> Result<Complex64, ExtendError> {
    if h.model() != Model::Circle {
        return Err(ExtendError::Boundary(BoundaryError::ModelMismatch));
    }
    if z.norm() > MAX_RADIUS {
        return Err(ExtendError::OutsideDomain);
    }
    let rule = base_rule.refined_toward(h, z, 64);
    let table = MapTable::new(h, &rule)?;
    newton(&table, &rule, z, Complex64::new(0.0, 0.0), tol)
}

fn newton(
    table: &MapTable,
    rule: &QuadratureRule,
    z: Complex64,
    start: Complex64,
    tol: f64,
) -> Result<Complex64, ExtendError> {
    // Poisson average as initial guess
    let mut w = table.residual(rule, z, start);
    if w.norm() >= 1.0 {
        w = w / w.norm() * 0.9;
    }
    let mut res = table.residual(rule, z, w);
    for _ in 0..60 {
        if res.norm() < tol {
            return Ok(w);
        }
        let (f, alpha, beta) = table.residual_jacobian(rule, z, w);
        // real 2x2 system from the Wirtinger pair: dF = α dw + β dw̄
        let j11 = (alpha + beta).re;
        let j12 = -(alpha - beta).im;
        let j21 = (alpha + beta).im;
        let j22 = (alpha - beta).re;
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-300 {
            return Err(ExtendError::NoConvergence { residual: res.norm() });
        }
        let dx = (-f.re * j22 + f.im * j12) / det;
        let dy = (-f.im * j11 + f.re * j21) / det;
        let step = Complex64::new(dx, dy);
        // damping: halve until the residual decreases and w stays in the disk
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let cand = w + t * step;
            if cand.norm() < 1.0 {
                let cand_res = table.residual(rule, z, cand);
                if cand_res.norm() < res.norm() {
                    w = cand;
                    res = cand_res;
                    improved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !improved {
            // stagnated: accept only if already at tolerance
            break;
        }
    }
    if res.norm() < tol {
        Ok(w)
    } else {
        Err(ExtendError::NoConvergence { residual: res.norm() })
    }
}

/// The Fourier-type coefficients of F at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OriginCoefficients {
    pub c1: Complex64,
    pub c_minus1: Complex64,
    pub d_minus1: Complex64,
}

/// Whether h commutes with both reflections ξ ↦ ξ̄ and ξ ↦ -ξ̄ (the
/// counter-example symmetries), probed on a grid plus the kinks.
fn has_quadrant_symmetry(h: &BoundaryMap) -> bool {
    let mut angles: Vec<f64> = (0..64).map(|i| TAU * (i as f64 + 0.37) / 64.0).collect();
    angles.extend(h.breakpoints());
    for theta in angles {
        let z = Complex64::from_polar(1.0, theta);
        let Ok(hz) = h.evaluate(Point::Finite(z)) else {
            return false;
        };
        let Ok(hc) = h.evaluate(Point::Finite(z.conj())) else {
            return false;
        };
        let Ok(hm) = h.evaluate(Point::Finite(-z.conj())) else {
            return false;
        };
        let hz = hz.finite().unwrap();
        if (hc.finite().unwrap() - hz.conj()).norm() > 1e-12 {
            return false;
        }
        if (hm.finite().unwrap() + hz.conj()).norm() > 1e-12 {
            return false;
        }
    }
    true
}

/// Rule clipped to [0, π/2] for the quarter-circle reductions.
fn quarter_rule(h: &BoundaryMap, per_arc: usize) -> QuadratureRule {
    let mut cuts: Vec<f64> = h
        .breakpoints()
        .into_iter()
        .filter(|&b| b > 0.0 && b < FRAC_PI_2)
        .collect();
    cuts.push(0.0);
    cuts.sort_by(f64::total_cmp);
    let (gl_nodes, gl_weights) = gauss_legendre(per_arc);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let m = cuts.len();
    for i in 0..m {
        let a = cuts[i];
        let b = if i + 1 == m { FRAC_PI_2 } else { cuts[i + 1] };
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        for (x, w) in gl_nodes.iter().zip(&gl_weights) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    QuadratureRule { nodes, weights }
}

/// c₁, c₋₁, d₋₁ for a map whose extension fixes the origin.
///
/// Maps with the quadrant symmetries are additionally integrated by the
/// quarter-circle real-part forms, which must agree with the full-circle
/// integrals to 1e-10; the quarter values are returned in that case.
pub fn origin_coefficients(
    h: &BoundaryMap,
    rule: &QuadratureRule,
) -> Result<OriginCoefficients, ExtendError> {
    let w0 = extend_with_rule(h, Complex64::new(0.0, 0.0), 1e-11, rule)?;
    if w0.norm() > 1e-8 {
        return Err(ExtendError::NotNormalized(w0.norm()));
    }
    let table = MapTable::new(h, rule)?;
    let mut c1 = Complex64::new(0.0, 0.0);
    let mut cm1 = Complex64::new(0.0, 0.0);
    let mut dm1 = Complex64::new(0.0, 0.0);
    for ((&theta, &w), &u) in rule.nodes.iter().zip(&rule.weights).zip(&table.values) {
        let xi = Complex64::from_polar(1.0, theta);
        c1 += w * xi.conj() * u;
        cm1 += w * xi * u;
        dm1 += w * u * u;
    }
    c1 /= TAU;
    cm1 /= TAU;
    dm1 /= TAU;

    if has_quadrant_symmetry(h) {
        let q = quarter_rule(h, 128);
        let qt = MapTable::new(h, &q)?;
        let mut qc1 = 0.0;
        let mut qcm1 = 0.0;
        let mut qdm1 = 0.0;
        for ((&theta, &w), &u) in q.nodes.iter().zip(&q.weights).zip(&qt.values) {
            let xi = Complex64::from_polar(1.0, theta);
            qc1 += w * (xi.conj() * u).re;
            qcm1 += w * (xi * u).re;
            qdm1 += w * (u * u).re;
        }
        let scale = 2.0 / PI;
        qc1 *= scale;
        qcm1 *= scale;
        qdm1 *= scale;
        assert!(
            (qc1 - c1.re).abs() < 1e-10
                && (qcm1 - cm1.re).abs() < 1e-10
                && (qdm1 - dm1.re).abs() < 1e-10
                && c1.im.abs() < 1e-10
                && cm1.im.abs() < 1e-10
                && dm1.im.abs() < 1e-10,
            "quarter-circle and full-circle coefficient routes disagree"
        );
        return Ok(OriginCoefficients {
            c1: Complex64::new(qc1, 0.0),
            c_minus1: Complex64::new(qcm1, 0.0),
            d_minus1: Complex64::new(qdm1, 0.0),
        });
    }
    Ok(OriginCoefficients {
        c1,
        c_minus1: cm1,
        d_minus1: dm1,
    })
}

/// Beltrami coefficient of ex(h) at the origin via the closed form
/// μ(0) = (c₋₁ + d₋₁c̄₁)/(c₁ + d₋₁c̄₋₁).
pub fn beltrami_at_origin(
    h: &BoundaryMap,
    rule: &QuadratureRule,
) -> Result<Complex64, ExtendError> {
    let c = origin_coefficients(h, rule)?;
    let den = c.c1 + c.d_minus1 * c.c_minus1.conj();
    if den.norm() < 1e-12 {
        return Err(ExtendError::DegenerateDenominator);
    }
    Ok((c.c_minus1 + c.d_minus1 * c.c1.conj()) / den)
}

/// Finite-difference Beltrami at the origin: centered differences of the
/// extension over a 5-point stencil, the independent route to μ(0).
pub fn beltrami_at_origin_fd(h: &BoundaryMap, step: f64) -> Result<Complex64, ExtendError> {
    let rule = QuadratureRule::for_map(h)?;
    let tol = 1e-12;
    let wr = extend_with_rule(h, Complex64::new(step, 0.0), tol, &rule)?;
    let wl = extend_with_rule(h, Complex64::new(-step, 0.0), tol, &rule)?;
    let wu = extend_with_rule(h, Complex64::new(0.0, step), tol, &rule)?;
    let wd = extend_with_rule(h, Complex64::new(0.0, -step), tol, &rule)?;
    let dx = (wr - wl) / (2.0 * step);
    let dy = (wu - wd) / (2.0 * step);
    let i = Complex64::new(0.0, 1.0);
    let fz = 0.5 * (dx - i * dy);
    let fzb = 0.5 * (dx + i * dy);
    Ok(fzb / fz)
}

/// A Beltrami sample: the evaluation point and the coefficient.
#[derive(Debug, Clone, Copy)]
pub struct BeltramiSample {
    pub z: Complex64,
    pub mu: Complex64,
}

impl BeltramiSample {
    pub fn mu_abs(&self) -> f64 {
        self.mu.norm()
    }

    /// Local dilatation (1+|μ|)/(1-|μ|).
    pub fn dilatation(&self) -> f64 {
        let m = self.mu_abs();
        (1.0 + m) / (1.0 - m)
    }
}

/// Beltrami coefficient of ex(h) at z: conjugate by the transvection moving
/// z to 0, renormalize the image, and apply the origin closed form. The
/// transport factor is trivial for this conjugation (see module docs).
pub fn beltrami_at(h: &BoundaryMap, z: Complex64) -> Result<BeltramiSample, ExtendError> {
    if h.model() != Model::Circle {
        return Err(ExtendError::Boundary(BoundaryError::ModelMismatch));
    }
    if z.norm() > MAX_RADIUS {
        return Err(ExtendError::OutsideDomain);
    }
    let w_star = extend(h, z, 1e-11)?;
    let one = Complex64::new(1.0, 0.0);
    let gamma = Moebius::new(one, z, z.conj(), one)?; // 0 -> z
    let sigma = Moebius::new(one, -w_star, -w_star.conj(), one)?; // w* -> 0
    let conjugated = BoundaryMap::compose(vec![
        BoundaryMap::from_disk_moebius(sigma),
        h.clone(),
        BoundaryMap::from_disk_moebius(gamma),
    ])?;
    let rule = QuadratureRule::for_map(&conjugated)?;
    let mu = beltrami_at_origin(&conjugated, &rule)?;
    if mu.norm() >= 1.0 {
        return Err(ExtendError::NonContractiveBeltrami(mu.norm()));
    }
    Ok(BeltramiSample { z, mu })
}

/// Lower bound for the maximal dilatation of ex(h): the sup over the grid of
/// the pointwise dilatation (1+|μ|)/(1-|μ|).
pub fn max_dilatation_estimate(h: &BoundaryMap, grid: &[Complex64]) -> Result<f64, ExtendError> {
    assert!(!grid.is_empty(), "dilatation estimate needs a nonempty grid");
    let mut sup = 1.0f64;
    for &z in grid {
        let s = beltrami_at(h, z)?;
        sup = sup.max(s.dilatation());
    }
    Ok(sup)
}

/// One row of the counter-example experiment.
#[derive(Debug, Clone)]
pub struct CounterexampleRow {
    pub n: u32,
    pub c1: Complex64,
    pub c_minus1: Complex64,
    pub d_minus1: Complex64,
    pub mu0: Complex64,
    pub mu_abs: f64,
    pub dilatation_at_origin: f64,
    pub h_tilde_minus_one: f64,
}

/// Runs the blow-up experiment: for each n the origin coefficients, μ(0),
/// the dilatation at the origin, and the half-plane conjugate's value at -1
/// (which stays exactly -1 while |μ(0)| climbs toward 1).
pub fn counterexample_experiment(ns: &[u32]) -> Result<Vec<CounterexampleRow>, ExtendError> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let h = crate::boundary::counterexample_map(n)?;
        let rule = QuadratureRule::for_map(&h)?;
        let c = origin_coefficients(&h, &rule)?;
        let den = c.c1 + c.d_minus1 * c.c_minus1.conj();
        if den.norm() < 1e-12 {
            return Err(ExtendError::DegenerateDenominator);
        }
        let mu0 = (c.c_minus1 + c.d_minus1 * c.c1.conj()) / den;
        let mu_abs = mu0.norm();
        if mu_abs >= 1.0 {
            return Err(ExtendError::NonContractiveBeltrami(mu_abs));
        }
        let ht = crate::boundary::to_halfplane(&h)?;
        let minus_one = ht
            .evaluate(Point::real(-1.0))?
            .real_part()
            .ok_or(BoundaryError::ModelMismatch)?;
        rows.push(CounterexampleRow {
            n,
            c1: c.c1,
            c_minus1: c.c_minus1,
            d_minus1: c.d_minus1,
            mu0,
            mu_abs,
            dilatation_at_origin: (1.0 + mu_abs) / (1.0 - mu_abs),
            h_tilde_minus_one: minus_one,
        });
    }
    Ok(rows)
}

/// The five control quadruples: Q₀ = {-1,-i,1,i} and the four built from
/// p₁ = (3+4i)/5 and its reflections p₂ = -p̄₁, p₃ = -p₁, p₄ = p̄₁.
pub fn control_quadruples() -> [Quadruple; 5] {
    let p1 = Complex64::new(0.6, 0.8);
    let m1 = Point::Finite(Complex64::new(-1.0, 0.0));
    let p_one = Point::Finite(Complex64::new(1.0, 0.0));
    let i = Point::Finite(Complex64::new(0.0, 1.0));
    let mi = Point::Finite(Complex64::new(0.0, -1.0));
    let q0 = Quadruple::new(m1, mi, p_one, i).unwrap();
    let q1 = Quadruple::new(m1, p_one, Point::Finite(p1), i).unwrap();
    let q2 = Quadruple::new(m1, p_one, i, Point::Finite(-p1.conj())).unwrap();
    let q3 = Quadruple::new(m1, Point::Finite(-p1), mi, p_one).unwrap();
    let q4 = Quadruple::new(m1, mi, Point::Finite(p1.conj()), p_one).unwrap();
    [q0, q1, q2, q3, q4]
}

/// Report of the five-quadruple control: the distortions |log cr(h(Q_j))|,
/// whether they all clear the bound, and the dilatation sup over a grid near
/// the origin.
#[derive(Debug, Clone)]
pub struct ControlReport {
    pub distortions: [f64; 5],
    pub bound: f64,
    pub within_bound: bool,
    pub max_dilatation_on_grid: f64,
}

/// Checks the five-quadruple control for a disk-model map: bounded
/// distortions on the five quadruples against a dilatation sup on a
/// neighborhood of the origin (grid inside |z| < 1/2).
pub fn lemma3_check(
    h: &BoundaryMap,
    bound: f64,
    grid: &[Complex64],
) -> Result<ControlReport, ExtendError> {
    assert!(
        grid.iter().all(|z| z.norm() < 0.5),
        "control grid must stay inside |z| < 1/2"
    );
    let mut distortions = [0.0f64; 5];
    for (j, q) in control_quadruples().iter().enumerate() {
        let [a, b, c, d] = *q.points();
        let imgs = [
            h.evaluate(a)?,
            h.evaluate(b)?,
            h.evaluate(c)?,
            h.evaluate(d)?,
        ];
        let image = Quadruple::new(imgs[0], imgs[1], imgs[2], imgs[3])?;
        distortions[j] = cross_ratio(&image)?.ln().abs();
    }
    let within = distortions.iter().all(|&d| d < bound);
    let k = max_dilatation_estimate(h, grid)?;
    Ok(ControlReport {
        distortions,
        bound,
        within_bound: within,
        max_dilatation_on_grid: k,
    })
}
