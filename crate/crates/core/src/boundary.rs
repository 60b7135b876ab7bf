//! Orientation-preserving boundary homeomorphisms: Möbius maps, maps that are
//! piecewise linear in angle, the blow-up counter-example family, compositions,
//! and the conjugation between the circle and the extended real line.
//!
//! A circle-model map acts on the unit circle; a line-model map acts on
//! ℝ ∪ {∞}. The half-plane conjugate of a circle map h is A⁻¹∘h∘A with A the
//! Cayley map sending 0,1,∞ to 1,i,-1; when h fixes 1, i, -1 the conjugate
//! fixes 0, 1, ∞.

use crate::geom::{cayley, cayley_inv, normalize_angle, GeomError, Moebius, Point};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundaryError {
    #[error("point is not on the boundary of the map's model")]
    ModelMismatch,
    #[error("counter-example parameter must satisfy n >= 2, got {0}")]
    OutOfRange(u32),
    #[error("invalid piecewise-angle data: {0}")]
    InvalidPiecewise(String),
    #[error("matrix does not define an orientation-preserving map of the model: {0}")]
    InvalidMoebius(String),
    #[error("composition mixes circle-model and line-model maps")]
    MixedComposition,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Which boundary a map acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Circle,
    Line,
}

/// Strictly monotone piecewise-linear map of angles covering [0, 2π).
///
/// `breaks[i]` maps to `images[i]`; between breakpoints the angle is
/// interpolated linearly in the lifted (unwrapped) image coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseAngle {
    breaks: Vec<f64>,
    /// Lifted images: strictly increasing, images[0] ∈ [0, 2π),
    /// images[n-1] - images[0] < 2π.
    images: Vec<f64>,
}

impl PiecewiseAngle {
    pub fn new(breaks: Vec<f64>, images: Vec<f64>) -> Result<Self, BoundaryError> {
        if breaks.len() != images.len() {
            return Err(BoundaryError::InvalidPiecewise(
                "breakpoint and image lists must have equal length".into(),
            ));
        }
        if breaks.is_empty() {
            return Err(BoundaryError::InvalidPiecewise("empty breakpoint list".into()));
        }
        if breaks.iter().any(|&b| !(0.0..TAU).contains(&b)) {
            return Err(BoundaryError::InvalidPiecewise(
                "breakpoints must lie in [0, 2pi)".into(),
            ));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(BoundaryError::InvalidPiecewise(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        // lift images to be strictly increasing with total turn < 2π
        let mut lifted = Vec::with_capacity(images.len());
        let first = normalize_angle(images[0]);
        lifted.push(first);
        for &im in &images[1..] {
            let mut v = normalize_angle(im);
            while v <= *lifted.last().unwrap() {
                v += TAU;
            }
            lifted.push(v);
        }
        if lifted.last().unwrap() - first >= TAU {
            return Err(BoundaryError::InvalidPiecewise(
                "images wind around more than once".into(),
            ));
        }
        Ok(PiecewiseAngle {
            breaks,
            images: lifted,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn image_angles(&self) -> &[f64] {
        &self.images
    }

    /// Image of an angle; exact breakpoint matches return the stored image
    /// without interpolation so quadrature nodes aligned to kinks stay exact.
    pub fn eval_angle(&self, theta: f64) -> f64 {
        let t = normalize_angle(theta);
        let n = self.breaks.len();
        let i = match self.breaks.binary_search_by(|b| b.total_cmp(&t)) {
            Ok(i) => return normalize_angle(self.images[i]),
            Err(0) => n - 1, // before the first breakpoint: wrapped final segment
            Err(j) => j - 1,
        };
        let b0 = self.breaks[i];
        let p0 = self.images[i];
        let (b1, p1) = if i + 1 == n {
            (self.breaks[0] + TAU, self.images[0] + TAU)
        } else {
            (self.breaks[i + 1], self.images[i + 1])
        };
        let mut tt = t;
        if tt < b0 {
            tt += TAU; // wrapped segment reached from below
        }
        let s = (tt - b0) / (b1 - b0);
        normalize_angle(p0 + s * (p1 - p0))
    }

    /// Preimage of an angle (the map is strictly monotone).
    pub fn invert_angle(&self, psi: f64) -> f64 {
        let n = self.breaks.len();
        let first = self.images[0];
        let mut p = normalize_angle(psi);
        while p < first {
            p += TAU;
        }
        // p ∈ [images[0], images[0]+2π); locate the segment in lifted images
        let i = match self.images.binary_search_by(|v| v.total_cmp(&p)) {
            Ok(i) => return self.breaks[i],
            Err(0) => unreachable!("p >= images[0]"),
            Err(j) => j - 1,
        };
        let p0 = self.images[i];
        let b0 = self.breaks[i];
        let (p1, b1) = if i + 1 == n {
            (self.images[0] + TAU, self.breaks[0] + TAU)
        } else {
            (self.images[i + 1], self.breaks[i + 1])
        };
        let s = (p - p0) / (p1 - p0);
        normalize_angle(b0 + s * (b1 - b0))
    }
}

/// An orientation-preserving homeomorphism of the circle or the extended real
/// line.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryMap {
    Moebius {
        map: Moebius,
        model: Model,
        /// Raw integer matrix when the map was built from one; enables exact
        /// evaluation on rational boundary points.
        exact: Option<[[i64; 2]; 2]>,
    },
    PiecewiseAngle(PiecewiseAngle),
    Counterexample {
        n: u32,
        map: PiecewiseAngle,
    },
    Composition(Vec<BoundaryMap>),
    HalfPlaneConjugate(Box<BoundaryMap>),
}

impl BoundaryMap {
    pub fn identity(model: Model) -> Self {
        BoundaryMap::Moebius {
            map: Moebius::identity(),
            model,
            exact: Some([[1, 0], [0, 1]]),
        }
    }

    /// Validates that the matrix defines an orientation-preserving map of the
    /// model's boundary. Line model: real entries, positive determinant.
    /// Circle model: preserves the unit circle and the disk.
    pub fn moebius(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
        model: Model,
    ) -> Result<Self, BoundaryError> {
        let det = a * d - b * c;
        match model {
            Model::Line => {
                let im_scale: f64 = [a, b, c, d].iter().map(|z| z.im.abs()).sum();
                if im_scale > 1e-12 * (1.0 + [a, b, c, d].iter().map(|z| z.norm()).sum::<f64>()) {
                    return Err(BoundaryError::InvalidMoebius(
                        "line-model matrix must be real".into(),
                    ));
                }
                if det.re <= 0.0 {
                    return Err(BoundaryError::InvalidMoebius(
                        "line-model determinant must be positive (orientation)".into(),
                    ));
                }
                let m = Moebius::new(
                    Complex64::new(a.re, 0.0),
                    Complex64::new(b.re, 0.0),
                    Complex64::new(c.re, 0.0),
                    Complex64::new(d.re, 0.0),
                )?;
                let exact = integer_matrix(a.re, b.re, c.re, d.re);
                Ok(BoundaryMap::Moebius { map: m, model, exact })
            }
            Model::Circle => {
                let m = Moebius::new(a, b, c, d)?;
                for theta in [0.0, 2.1, 4.3] {
                    let img = m.apply(Point::from_angle(theta));
                    let ok = match img.finite() {
                        Some(z) => (z.norm() - 1.0).abs() < 1e-9,
                        None => false,
                    };
                    if !ok {
                        return Err(BoundaryError::InvalidMoebius(
                            "circle-model matrix must preserve the unit circle".into(),
                        ));
                    }
                }
                let inside = m.apply(Point::Finite(Complex64::new(0.0, 0.0)));
                match inside.finite() {
                    Some(z) if z.norm() < 1.0 => {}
                    _ => {
                        return Err(BoundaryError::InvalidMoebius(
                            "circle-model matrix must preserve the disk (orientation)".into(),
                        ))
                    }
                }
                Ok(BoundaryMap::Moebius {
                    map: m,
                    model,
                    exact: None,
                })
            }
        }
    }

    /// Disk Möbius from a matrix already known to preserve the disk.
    pub fn from_disk_moebius(m: Moebius) -> Self {
        BoundaryMap::Moebius {
            map: m,
            model: Model::Circle,
            exact: None,
        }
    }

    pub fn piecewise(breaks: Vec<f64>, images: Vec<f64>) -> Result<Self, BoundaryError> {
        Ok(BoundaryMap::PiecewiseAngle(PiecewiseAngle::new(breaks, images)?))
    }

    pub fn compose(maps: Vec<BoundaryMap>) -> Result<Self, BoundaryError> {
        if maps.is_empty() {
            return Ok(BoundaryMap::identity(Model::Circle));
        }
        let model = maps[0].model();
        if maps.iter().any(|m| m.model() != model) {
            return Err(BoundaryError::MixedComposition);
        }
        Ok(BoundaryMap::Composition(maps))
    }

    pub fn model(&self) -> Model {
        match self {
            BoundaryMap::Moebius { model, .. } => *model,
            BoundaryMap::PiecewiseAngle(_) | BoundaryMap::Counterexample { .. } => Model::Circle,
            BoundaryMap::Composition(maps) => {
                maps.first().map(|m| m.model()).unwrap_or(Model::Circle)
            }
            BoundaryMap::HalfPlaneConjugate(_) => Model::Line,
        }
    }

    /// Raw integer line-model matrix, when the map carries one.
    pub fn exact_line_matrix(&self) -> Option<[[i64; 2]; 2]> {
        match self {
            BoundaryMap::Moebius {
                model: Model::Line,
                exact,
                ..
            } => *exact,
            _ => None,
        }
    }

    /// Kink angles of a circle-model map (empty for Möbius maps). For
    /// compositions f∘g the kinks of f are pulled back through g.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            BoundaryMap::Moebius { .. } => Vec::new(),
            BoundaryMap::PiecewiseAngle(p) => p.breakpoints().to_vec(),
            BoundaryMap::Counterexample { map, .. } => map.breakpoints().to_vec(),
            BoundaryMap::HalfPlaneConjugate(_) => Vec::new(),
            BoundaryMap::Composition(maps) => {
                // rightmost applies first
                let mut kinks: Vec<f64> = Vec::new();
                let mut earlier: Vec<&BoundaryMap> = Vec::new();
                for m in maps.iter().rev() {
                    for k in m.breakpoints() {
                        let mut angle = k;
                        for inv in earlier.iter().rev() {
                            angle = inv.invert_circle_angle(angle);
                        }
                        kinks.push(angle);
                    }
                    earlier.push(m);
                }
                kinks.sort_by(f64::total_cmp);
                kinks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
                kinks
            }
        }
    }

    /// Preimage of an angle under a circle-model map.
    fn invert_circle_angle(&self, psi: f64) -> f64 {
        debug_assert_eq!(self.model(), Model::Circle);
        match self {
            BoundaryMap::Moebius { map, .. } => {
                let p = map.inverse().apply(Point::from_angle(psi));
                normalize_angle(p.finite().expect("circle stays bounded").arg())
            }
            BoundaryMap::PiecewiseAngle(p) => p.invert_angle(psi),
            BoundaryMap::Counterexample { map, .. } => map.invert_angle(psi),
            BoundaryMap::Composition(maps) => {
                let mut a = psi;
                for m in maps {
                    a = m.invert_circle_angle(a);
                }
                a
            }
            BoundaryMap::HalfPlaneConjugate(_) => unreachable!("line model"),
        }
    }

    /// Image of a boundary point of the map's model.
    pub fn evaluate(&self, x: Point) -> Result<Point, BoundaryError> {
        match self {
            BoundaryMap::Moebius { map, model, .. } => {
                check_on_boundary(&x, *model)?;
                Ok(snap(map.apply(x), *model))
            }
            BoundaryMap::PiecewiseAngle(p) => {
                let z = circle_value(&x)?;
                Ok(eval_piecewise_point(p, z))
            }
            BoundaryMap::Counterexample { map, .. } => {
                let z = circle_value(&x)?;
                Ok(eval_piecewise_point(map, z))
            }
            BoundaryMap::Composition(maps) => {
                let mut y = x;
                for m in maps.iter().rev() {
                    y = m.evaluate(y)?;
                }
                Ok(y)
            }
            BoundaryMap::HalfPlaneConjugate(inner) => {
                check_on_boundary(&x, Model::Line)?;
                let on_circle = cayley(x);
                let image = inner.evaluate(on_circle)?;
                Ok(snap(cayley_inv(image), Model::Line))
            }
        }
    }

    /// Image of an angle under a circle-model map.
    pub fn evaluate_angle(&self, theta: f64) -> Result<f64, BoundaryError> {
        let p = self.evaluate(Point::from_angle(theta))?;
        Ok(normalize_angle(
            p.finite().ok_or(BoundaryError::ModelMismatch)?.arg(),
        ))
    }
}

fn integer_matrix(a: f64, b: f64, c: f64, d: f64) -> Option<[[i64; 2]; 2]> {
    let cast = |x: f64| -> Option<i64> {
        if x.fract() == 0.0 && x.abs() < 2f64.powi(40) {
            Some(x as i64)
        } else {
            None
        }
    };
    Some([[cast(a)?, cast(b)?], [cast(c)?, cast(d)?]])
}

fn check_on_boundary(x: &Point, model: Model) -> Result<(), BoundaryError> {
    match (model, x) {
        (Model::Line, Point::Infinity) => Ok(()),
        (Model::Line, Point::Finite(z)) => {
            if z.im.abs() <= 1e-9 * (1.0 + z.re.abs()) {
                Ok(())
            } else {
                Err(BoundaryError::ModelMismatch)
            }
        }
        (Model::Circle, Point::Finite(z)) => {
            if (z.norm() - 1.0).abs() <= 1e-9 {
                Ok(())
            } else {
                Err(BoundaryError::ModelMismatch)
            }
        }
        (Model::Circle, Point::Infinity) => Err(BoundaryError::ModelMismatch),
    }
}

fn circle_value(x: &Point) -> Result<Complex64, BoundaryError> {
    check_on_boundary(x, Model::Circle)?;
    Ok(x.finite().expect("checked"))
}

fn snap(p: Point, model: Model) -> Point {
    match (model, p) {
        (_, Point::Infinity) => Point::Infinity,
        (Model::Line, Point::Finite(z)) => {
            debug_assert!(
                z.im.abs() <= 1e-8 * (1.0 + z.re.abs()),
                "line image drifted off the axis: {z}"
            );
            Point::Finite(Complex64::new(z.re, 0.0))
        }
        (Model::Circle, Point::Finite(z)) => {
            let n = z.norm();
            if n == 1.0 {
                Point::Finite(z)
            } else {
                Point::Finite(z / n)
            }
        }
    }
}

/// Fixed points return the input value bit-for-bit: an exact breakpoint whose
/// image equals its own angle is a genuine fixed point of the map.
fn eval_piecewise_point(p: &PiecewiseAngle, z: Complex64) -> Point {
    let theta = normalize_angle(z.arg());
    let psi = p.eval_angle(theta);
    if psi == theta {
        return snap(Point::Finite(z), Model::Circle);
    }
    Point::from_angle(psi)
}

/// The counter-example family: piecewise linear in angle with a pivot that
/// compresses most of the first quadrant toward 1. The arc from 1 to
/// e^{iπ/2·(1-1/n)} maps linearly onto the arc from 1 to e^{iπ/(2n)}, the
/// rest of the quadrant expands onto the complement, and the map extends to
/// the full circle by h(ξ̄) = h(ξ)̄ and h(-ξ̄) = -h(ξ)̄. Fixes ±1 and ±i;
/// n = 2 is the identity.
pub fn counterexample_map(n: u32) -> Result<BoundaryMap, BoundaryError> {
    if n < 2 {
        return Err(BoundaryError::OutOfRange(n));
    }
    let nf = n as f64;
    let pivot = FRAC_PI_2 * (1.0 - 1.0 / nf);
    let pivot_image = FRAC_PI_2 / nf;
    let breaks = vec![
        0.0,
        pivot,
        FRAC_PI_2,
        2.0 * FRAC_PI_2 - pivot,
        2.0 * FRAC_PI_2,
        2.0 * FRAC_PI_2 + pivot,
        3.0 * FRAC_PI_2,
        4.0 * FRAC_PI_2 - pivot,
    ];
    let images = vec![
        0.0,
        pivot_image,
        FRAC_PI_2,
        2.0 * FRAC_PI_2 - pivot_image,
        2.0 * FRAC_PI_2,
        2.0 * FRAC_PI_2 + pivot_image,
        3.0 * FRAC_PI_2,
        4.0 * FRAC_PI_2 - pivot_image,
    ];
    Ok(BoundaryMap::Counterexample {
        n,
        map: PiecewiseAngle::new(breaks, images)?,
    })
}

/// Post-composes with the Möbius map sending the images of the triple back to
/// the triple, so the result fixes it pointwise. Maps already fixing the
/// triple are returned unchanged.
pub fn normalize_fix_three(
    h: &BoundaryMap,
    triple: &[Point; 3],
) -> Result<BoundaryMap, BoundaryError> {
    let images = [
        h.evaluate(triple[0])?,
        h.evaluate(triple[1])?,
        h.evaluate(triple[2])?,
    ];
    let already = triple
        .iter()
        .zip(&images)
        .all(|(t, i)| t.chordal_distance(i) < 1e-13);
    if already {
        return Ok(h.clone());
    }
    let post = Moebius::from_triples(&images, triple)?;
    let post_map = match h.model() {
        Model::Line => {
            let [a, b, c, d] = post.entries();
            BoundaryMap::moebius(a, b, c, d, Model::Line)?
        }
        Model::Circle => BoundaryMap::from_disk_moebius(post),
    };
    BoundaryMap::compose(vec![post_map, h.clone()])
}

/// The half-plane conjugate A⁻¹∘h∘A of a circle-model map.
pub fn to_halfplane(h: &BoundaryMap) -> Result<BoundaryMap, BoundaryError> {
    if h.model() != Model::Circle {
        return Err(BoundaryError::ModelMismatch);
    }
    Ok(BoundaryMap::HalfPlaneConjugate(Box::new(h.clone())))
}

/// JSON descriptor for boundary maps, the CLI's input format. Matrix entries
/// are reals or [re, im] pairs; angles are radians.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapDescriptor {
    Moebius {
        matrix: [MatrixEntry; 4],
        /// Overrides the model inference; real matrices like the identity
        /// preserve both boundaries, so "circle" forces the disk model.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        model: Option<Model>,
    },
    PiecewiseAngle {
        breaks: Vec<f64>,
        images: Vec<f64>,
    },
    Counterexample {
        n: u32,
    },
    Compose {
        maps: Vec<MapDescriptor>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixEntry {
    Real(f64),
    Complex([f64; 2]),
}

impl MatrixEntry {
    pub fn value(&self) -> Complex64 {
        match self {
            MatrixEntry::Real(x) => Complex64::new(*x, 0.0),
            MatrixEntry::Complex([re, im]) => Complex64::new(*re, *im),
        }
    }
}

impl MapDescriptor {
    /// Builds the map; Möbius matrices with real entries become line-model
    /// maps, complex ones must preserve the unit circle.
    pub fn build(&self) -> Result<BoundaryMap, BoundaryError> {
        match self {
            MapDescriptor::Moebius { matrix, model } => {
                let [a, b, c, d] = [
                    matrix[0].value(),
                    matrix[1].value(),
                    matrix[2].value(),
                    matrix[3].value(),
                ];
                let all_real = matrix.iter().all(|e| e.value().im == 0.0);
                let model = model.unwrap_or(if all_real { Model::Line } else { Model::Circle });
                BoundaryMap::moebius(a, b, c, d, model)
            }
            MapDescriptor::PiecewiseAngle { breaks, images } => {
                BoundaryMap::piecewise(breaks.clone(), images.clone())
            }
            MapDescriptor::Counterexample { n } => counterexample_map(*n),
            MapDescriptor::Compose { maps } => {
                let built: Result<Vec<_>, _> = maps.iter().map(|m| m.build()).collect();
                BoundaryMap::compose(built?)
            }
        }
    }
}
