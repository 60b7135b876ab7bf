//! Sampled estimators for the cross-ratio and quadrilateral-dilatation
//! metrics between boundary maps, their asymptotic (degenerating-quadruple)
//! versions, and the arc-restricted cross-ratio norm.
//!
//! Every estimator is a maximum over finitely many samples of a quantity
//! whose supremum defines the metric, hence a lower bound; reports label
//! them estimates. The samplers are seeded and deterministic, and extending
//! the sample count with the same seed only refines the same stream, so
//! estimates are monotone in the count.

use crate::boundary::{BoundaryError, BoundaryMap};
use crate::geom::{
    cayley_inv, cross_ratio, solve_fourth_point, GeomError, Point, Quadruple,
};
use crate::modulus::{rho_distance, ModulusError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("sampler produced no admissible quadruple (arc too small or scales unreachable)")]
    SamplerExhausted,
    #[error("maps must share a model")]
    ModelMismatch,
    #[error("degenerating scales must be strictly decreasing and positive")]
    InvalidScales,
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Modulus(#[from] ModulusError),
}

/// Smallest angular gap accepted between sampled points; below this the
/// floating cross ratio carries too little precision to be useful.
const MIN_GAP: f64 = 1e-6;

/// Uniformly random quadruples with cross ratio exactly 1: three points drawn
/// uniformly in cyclic position, the fourth solved from the constraint.
#[derive(Debug, Clone)]
pub struct UnitCrSampler {
    pub count: usize,
    pub seed: u64,
}

impl UnitCrSampler {
    pub fn new(count: usize, seed: u64) -> Self {
        UnitCrSampler { count, seed }
    }

    pub fn quadruples(&self) -> Result<Vec<Quadruple>, MetricsError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.count);
        let mut guard = 0usize;
        while out.len() < self.count {
            guard += 1;
            if guard > 200 * self.count + 1000 {
                return Err(MetricsError::SamplerExhausted);
            }
            let mut angles = [
                rng.gen_range(0.0..TAU),
                rng.gen_range(0.0..TAU),
                rng.gen_range(0.0..TAU),
            ];
            angles.sort_by(f64::total_cmp);
            if angles[1] - angles[0] < MIN_GAP
                || angles[2] - angles[1] < MIN_GAP
                || angles[0] + TAU - angles[2] < MIN_GAP
            {
                continue;
            }
            let a = Point::from_angle(angles[0]);
            let b = Point::from_angle(angles[1]);
            let c = Point::from_angle(angles[2]);
            let Ok(d) = solve_fourth_point(a, b, c, 1.0) else {
                continue;
            };
            let Ok(q) = Quadruple::new(a, b, c, d) else {
                continue;
            };
            debug_assert!((cross_ratio(&q).unwrap() - 1.0).abs() < 1e-12);
            out.push(q);
        }
        Ok(out)
    }
}

/// Unit-cross-ratio quadruples pushed toward random boundary points by
/// hyperbolic transvections until their minimal scale drops below each
/// requested target.
#[derive(Debug, Clone)]
pub struct DegeneratingSampler {
    pub scales: Vec<f64>,
    pub per_scale: usize,
    pub seed: u64,
}

impl DegeneratingSampler {
    pub fn new(scales: Vec<f64>, per_scale: usize, seed: u64) -> Self {
        DegeneratingSampler {
            scales,
            per_scale,
            seed,
        }
    }

    /// Per requested scale, `per_scale` quadruples with minimal scale at or
    /// below it. The template {1, i, -1, -i} has cross ratio exactly 1 and
    /// transvections preserve it.
    pub fn quadruples(&self) -> Result<Vec<(f64, Vec<Quadruple>)>, MetricsError> {
        if self.scales.is_empty()
            || self.scales.iter().any(|&s| !(s > 0.0))
            || self.scales.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(MetricsError::InvalidScales);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.scales.len());
        for &target in &self.scales {
            let mut batch = Vec::with_capacity(self.per_scale);
            for _ in 0..self.per_scale {
                let beta = rng.gen_range(0.0..TAU);
                let zeta = Complex64::from_polar(1.0, rng.gen_range(0.0..TAU));
                let template: Vec<Point> = (0..4)
                    .map(|k| Point::from_angle(beta + k as f64 * TAU / 4.0))
                    .collect();
                let mut r = 0.5;
                let mut quad = None;
                for _ in 0..70 {
                    let pushed = push_toward(&template, zeta, r)?;
                    if minimal_scale(&pushed) <= target {
                        quad = Some(pushed);
                        break;
                    }
                    r = 1.0 - 0.5 * (1.0 - r);
                }
                batch.push(quad.ok_or(MetricsError::SamplerExhausted)?);
            }
            out.push((target, batch));
        }
        Ok(out)
    }
}

use num_complex::Complex64;

/// Applies the transvection u ↦ (u + rζ)/(1 + rζ̄u) to the template.
fn push_toward(template: &[Point], zeta: Complex64, r: f64) -> Result<Quadruple, MetricsError> {
    let a = r * zeta;
    let mut pts = [Point::Infinity; 4];
    for (i, p) in template.iter().enumerate() {
        let z = p.finite().expect("circle template");
        let w = (z + a) / (Complex64::new(1.0, 0.0) + a.conj() * z);
        let n = w.norm();
        pts[i] = Point::Finite(w / n);
    }
    Ok(Quadruple::new_image(pts)?)
}

/// Minimal scale of a quadruple: the smallest of the four side chords
/// |a-b|, |b-c|, |c-d|, |d-a|.
pub fn minimal_scale(q: &Quadruple) -> f64 {
    let p = q.points();
    let chord = |u: &Point, v: &Point| match (u.finite(), v.finite()) {
        (Some(a), Some(b)) => (a - b).norm(),
        _ => f64::INFINITY,
    };
    chord(&p[0], &p[1])
        .min(chord(&p[1], &p[2]))
        .min(chord(&p[2], &p[3]))
        .min(chord(&p[3], &p[0]))
}

/// Image quadruple under a boundary map; the image of an ordered quadruple
/// under an orientation-preserving map is ordered.
pub fn image_quadruple(h: &BoundaryMap, q: &Quadruple) -> Result<Quadruple, MetricsError> {
    let p = q.points();
    let imgs = [
        h.evaluate(p[0])?,
        h.evaluate(p[1])?,
        h.evaluate(p[2])?,
        h.evaluate(p[3])?,
    ];
    Ok(Quadruple::new_image(imgs)?)
}

/// |log(cr(h2 Q)/cr(h1 Q))| for one sample.
pub fn log_cr_ratio(
    h1: &BoundaryMap,
    h2: &BoundaryMap,
    q: &Quadruple,
) -> Result<f64, MetricsError> {
    let a = cross_ratio(&image_quadruple(h1, q)?)?;
    let b = cross_ratio(&image_quadruple(h2, q)?)?;
    Ok((b.ln() - a.ln()).abs())
}

/// (1/2)|log(M(h2 Q)/M(h1 Q))| for one sample; by the modulus construction
/// this is half the rho-distance of the two image cross ratios.
pub fn log_modulus_ratio(
    h1: &BoundaryMap,
    h2: &BoundaryMap,
    q: &Quadruple,
) -> Result<f64, MetricsError> {
    let a = cross_ratio(&image_quadruple(h1, q)?)?;
    let b = cross_ratio(&image_quadruple(h2, q)?)?;
    Ok(0.5 * rho_distance(a, b)?)
}

fn check_models(h1: &BoundaryMap, h2: &BoundaryMap) -> Result<(), MetricsError> {
    if h1.model() != h2.model() {
        return Err(MetricsError::ModelMismatch);
    }
    Ok(())
}

/// Estimate (lower bound) of the cross-ratio distortion metric
/// sup_{cr(Q)=1} |log(cr(h2 Q)/cr(h1 Q))| over the sampler's quadruples.
pub fn d_c_estimate(
    h1: &BoundaryMap,
    h2: &BoundaryMap,
    sampler: &UnitCrSampler,
) -> Result<f64, MetricsError> {
    check_models(h1, h2)?;
    d_c_over(h1, h2, &sampler.quadruples()?)
}

/// The same maximum over an explicit quadruple collection (shared-sample
/// comparisons against the shear metrics use this entry point).
pub fn d_c_over(
    h1: &BoundaryMap,
    h2: &BoundaryMap,
    quads: &[Quadruple],
) -> Result<f64, MetricsError> {
    check_models(h1, h2)?;
    let mut sup: f64 = 0.0;
    for q in quads {
        sup = sup.max(log_cr_ratio(h1, h2, q)?);
    }
    Ok(sup)
}

/// Estimate (lower bound) of the quadrilateral-dilatation metric
/// (1/2) sup |log(M(h2 Q)/M(h1 Q))| over the sampler's quadruples.
pub fn d_m_estimate(
    h1: &BoundaryMap,
    h2: &BoundaryMap,
    sampler: &UnitCrSampler,
) -> Result<f64, MetricsError> {
    check_models(h1, h2)?;
    d_m_over(h1, h2, &sampler.quadruples()?)
}

pub fn d_m_over(
    h1: &BoundaryMap,
    h2: &BoundaryMap,
    quads: &[Quadruple],
) -> Result<f64, MetricsError> {
    check_models(h1, h2)?;
    let mut sup: f64 = 0.0;
    for q in quads {
        sup = sup.max(log_modulus_ratio(h1, h2, q)?);
    }
    Ok(sup)
}

/// Per-scale estimates of the asymptotic cross-ratio distortion: the curve's
/// tail estimates the limsup over degenerating sequences.
pub fn d_ac_estimate(
    h1: &BoundaryMap,
    h2: &BoundaryMap,
    sampler: &DegeneratingSampler,
) -> Result<Vec<(f64, f64)>, MetricsError> {
    check_models(h1, h2)?;
    let mut out = Vec::new();
    for (scale, batch) in sampler.quadruples()? {
        let mut sup: f64 = 0.0;
        for q in &batch {
            sup = sup.max(log_cr_ratio(h1, h2, q)?);
        }
        out.push((scale, sup));
    }
    Ok(out)
}

/// Per-scale estimates of the asymptotic quadrilateral dilatation.
pub fn d_am_estimate(
    h1: &BoundaryMap,
    h2: &BoundaryMap,
    sampler: &DegeneratingSampler,
) -> Result<Vec<(f64, f64)>, MetricsError> {
    check_models(h1, h2)?;
    let mut out = Vec::new();
    for (scale, batch) in sampler.quadruples()? {
        let mut sup: f64 = 0.0;
        for q in &batch {
            sup = sup.max(log_modulus_ratio(h1, h2, q)?);
        }
        out.push((scale, sup));
    }
    Ok(out)
}

/// Arc-restricted cross-ratio norm: sup over unit-cr quadruples inside the
/// arc (lo, hi) of |log cr(h(Q))|. Sampling is rejection inside the arc.
pub fn cross_ratio_norm(
    h: &BoundaryMap,
    arc: (f64, f64),
    sampler: &UnitCrSampler,
) -> Result<f64, MetricsError> {
    let (lo, hi) = arc;
    assert!(hi > lo && hi - lo < TAU, "arc must be a proper interval");
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let mut sup: f64 = 0.0;
    let mut accepted = 0usize;
    let mut guard = 0usize;
    while accepted < sampler.count {
        guard += 1;
        if guard > 500 * sampler.count + 1000 {
            if accepted == 0 {
                return Err(MetricsError::SamplerExhausted);
            }
            break;
        }
        let mut angles = [
            rng.gen_range(lo..hi),
            rng.gen_range(lo..hi),
            rng.gen_range(lo..hi),
        ];
        angles.sort_by(f64::total_cmp);
        if angles[1] - angles[0] < MIN_GAP || angles[2] - angles[1] < MIN_GAP {
            continue;
        }
        let a = Point::from_angle(angles[0]);
        let b = Point::from_angle(angles[1]);
        let c = Point::from_angle(angles[2]);
        let Ok(d) = solve_fourth_point(a, b, c, 1.0) else {
            continue;
        };
        // keep the whole quadruple inside the arc: the solved fourth point
        // lies ccw beyond the third; reject it unless it lands before hi
        let d_angle = match d.finite() {
            Some(z) => crate::geom::normalize_angle(z.arg()),
            None => continue,
        };
        if !(d_angle > angles[2] + MIN_GAP && d_angle < hi) {
            continue;
        }
        let Ok(q) = Quadruple::new(a, b, c, d) else {
            continue;
        };
        accepted += 1;
        let img = image_quadruple(h, &q)?;
        sup = sup.max(cross_ratio(&img)?.ln().abs());
    }
    Ok(sup)
}

/// Transports a circle quadruple to the extended real line through the
/// inverse Cayley map (cross ratios are preserved).
pub fn quadruple_to_halfplane(q: &Quadruple) -> Result<Quadruple, MetricsError> {
    let p = q.points();
    let imgs = [
        cayley_inv(p[0]),
        cayley_inv(p[1]),
        cayley_inv(p[2]),
        cayley_inv(p[3]),
    ];
    // snap the imaginary rounding off the axis
    let snapped: Vec<Point> = imgs
        .iter()
        .map(|p| match p {
            Point::Infinity => Point::Infinity,
            Point::Finite(z) => Point::real(z.re),
        })
        .collect();
    Ok(Quadruple::new_image([
        snapped[0], snapped[1], snapped[2], snapped[3],
    ])?)
}
