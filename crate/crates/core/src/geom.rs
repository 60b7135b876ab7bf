//! Boundary points, Möbius transformations, and cross ratios.
//!
//! Points live on the boundary of one of the two hyperbolic models: the unit
//! circle (disk model) or the extended real line (half-plane model). Both are
//! represented by [`Point`], an extended complex number. The cross ratio of a
//! quadruple (a,b,c,d) follows the convention
//!
//! ```text
//! cr(a,b,c,d) = (b-a)(d-c) / ((c-b)(d-a))
//! ```
//!
//! which is 1 on every counter-clockwise quadruple cut out by two adjacent
//! ideal triangles of the Farey tesselation. Infinity is handled by the
//! symbolic limit of that formula, never by a large finite surrogate.

use num_complex::Complex64;
use thiserror::Error;

/// Comparison tolerance for cyclic-order validation of floating quadruples.
pub const ANGLE_TOL: f64 = 1e-12;

/// Chordal-distance tolerance under which two boundary points are considered
/// coincident (Riemann-sphere metric, range [0,2]).
pub const COINCIDENCE_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("degenerate quadruple: two points coincide within tolerance")]
    DegenerateQuadruple,
    #[error("degenerate triple: points must be pairwise distinct")]
    DegenerateTriple,
    #[error("quadruple is not cyclically ordered counter-clockwise")]
    NotCyclicallyOrdered,
    #[error("cross ratio has non-negligible imaginary part {0:e}")]
    NonRealCrossRatio(f64),
    #[error("cross ratio of an ordered quadruple must be positive, got {0:e}")]
    NonPositiveCrossRatio(f64),
    #[error("no fourth point with the requested cross ratio lies in the admissible arc")]
    NoSolutionInArc,
    #[error("matrix is singular or not normalizable")]
    SingularMatrix,
    #[error("quadruple mixes circle and real-line points")]
    MixedModels,
}

/// A point of the extended complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Finite(Complex64),
    Infinity,
}

impl Point {
    pub fn real(x: f64) -> Self {
        Point::Finite(Complex64::new(x, 0.0))
    }

    pub fn from_angle(theta: f64) -> Self {
        Point::Finite(Complex64::new(theta.cos(), theta.sin()))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match self {
            Point::Finite(z) => Some(*z),
            Point::Infinity => None,
        }
    }

    /// Chordal (Riemann-sphere) distance, range [0,2].
    pub fn chordal_distance(&self, other: &Point) -> f64 {
        match (self, other) {
            (Point::Infinity, Point::Infinity) => 0.0,
            (Point::Finite(z), Point::Infinity) | (Point::Infinity, Point::Finite(z)) => {
                2.0 / (1.0 + z.norm_sqr()).sqrt()
            }
            (Point::Finite(z), Point::Finite(w)) => {
                2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt()
            }
        }
    }

    /// Real coordinate of a half-plane boundary point; `None` for infinity.
    pub fn real_part(&self) -> Option<f64> {
        self.finite().map(|z| z.re)
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::Finite(z)
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::real(x)
    }
}

/// A point on the unit circle; the stored value is renormalized to unit
/// modulus on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirclePoint(Complex64);

impl CirclePoint {
    pub fn new(z: Complex64) -> Self {
        let n = z.norm();
        debug_assert!((n - 1.0).abs() < 1e-9, "not a unit-modulus value: |z|={n}");
        if n == 1.0 {
            CirclePoint(z)
        } else {
            CirclePoint(z / n)
        }
    }

    pub fn from_angle(theta: f64) -> Self {
        CirclePoint(Complex64::new(theta.cos(), theta.sin()))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    /// Angle in [0, 2π).
    pub fn angle(&self) -> f64 {
        normalize_angle(self.0.arg())
    }

    pub fn to_point(&self) -> Point {
        Point::Finite(self.0)
    }
}

/// Wrap an angle into [0, 2π).
pub fn normalize_angle(theta: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut t = theta % two_pi;
    if t < 0.0 {
        t += two_pi;
    }
    if t >= two_pi {
        t -= two_pi;
    }
    t
}

/// A real number or the point at infinity of the extended real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinity,
}

impl ExtendedReal {
    pub fn to_point(&self) -> Point {
        match self {
            ExtendedReal::Finite(x) => Point::real(*x),
            ExtendedReal::Infinity => Point::Infinity,
        }
    }

    pub fn from_point(p: &Point) -> Option<ExtendedReal> {
        match p {
            Point::Infinity => Some(ExtendedReal::Infinity),
            Point::Finite(z) if z.im.abs() <= 1e-9 * (1.0 + z.re.abs()) => {
                Some(ExtendedReal::Finite(z.re))
            }
            _ => None,
        }
    }
}

/// Four pairwise distinct boundary points in counter-clockwise cyclic order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadruple {
    pts: [Point; 4],
}

impl Quadruple {
    /// Validates distinctness and counter-clockwise cyclic order.
    pub fn new(a: Point, b: Point, c: Point, d: Point) -> Result<Self, GeomError> {
        let pts = [a, b, c, d];
        for i in 0..4 {
            for j in (i + 1)..4 {
                if pts[i].chordal_distance(&pts[j]) < COINCIDENCE_TOL {
                    return Err(GeomError::DegenerateQuadruple);
                }
            }
        }
        if !is_ccw(&pts)? {
            return Err(GeomError::NotCyclicallyOrdered);
        }
        Ok(Quadruple { pts })
    }

    /// Trusted construction for points already known to be ordered (images of
    /// ordered quadruples under monotone maps); distinctness is still checked.
    pub(crate) fn new_image(pts: [Point; 4]) -> Result<Self, GeomError> {
        for i in 0..4 {
            for j in (i + 1)..4 {
                if pts[i].chordal_distance(&pts[j]) < COINCIDENCE_TOL {
                    return Err(GeomError::DegenerateQuadruple);
                }
            }
        }
        Ok(Quadruple { pts })
    }

    pub fn points(&self) -> &[Point; 4] {
        &self.pts
    }
}

/// Counter-clockwise test for four distinct points on either boundary.
///
/// Circle quadruples: the four cyclic angle gaps must sum to 2π (a clockwise
/// arrangement sums to 6π). Real-line quadruples: counter-clockwise means
/// increasing with a single wrap through ∞, i.e. exactly one cyclic descent.
fn is_ccw(pts: &[Point; 4]) -> Result<bool, GeomError> {
    let all_real = pts.iter().all(|p| match p {
        Point::Infinity => true,
        Point::Finite(z) => z.im.abs() <= 1e-9 * (1.0 + z.re.abs()),
    });
    if all_real {
        let mut descents = 0;
        for i in 0..4 {
            let u = &pts[i];
            let v = &pts[(i + 1) % 4];
            let descent = match (u, v) {
                (_, Point::Infinity) => false,
                (Point::Infinity, _) => true,
                (Point::Finite(x), Point::Finite(y)) => y.re < x.re,
            };
            if descent {
                descents += 1;
            }
        }
        return Ok(descents == 1);
    }
    let all_circle = pts.iter().all(|p| match p {
        Point::Infinity => false,
        Point::Finite(z) => (z.norm() - 1.0).abs() <= 1e-9,
    });
    if !all_circle {
        return Err(GeomError::MixedModels);
    }
    let angles: Vec<f64> = pts
        .iter()
        .map(|p| normalize_angle(p.finite().unwrap().arg()))
        .collect();
    let two_pi = std::f64::consts::TAU;
    let mut total = 0.0;
    for i in 0..4 {
        let mut gap = angles[(i + 1) % 4] - angles[i];
        while gap <= 0.0 {
            gap += two_pi;
        }
        total += gap;
    }
    Ok((total - two_pi).abs() < 1e-6)
}

/// Cross ratio (b-a)(d-c)/((c-b)(d-a)) on extended points, as a complex value.
///
/// At most one point may be infinite; the formula degenerates to the standard
/// limit in that case.
pub fn cross_ratio_points(a: Point, b: Point, c: Point, d: Point) -> Result<Complex64, GeomError> {
    use Point::*;
    let v = match (a, b, c, d) {
        (Infinity, Finite(b), Finite(c), Finite(d)) => (d - c) / (c - b),
        (Finite(a), Infinity, Finite(c), Finite(d)) => -(d - c) / (d - a),
        (Finite(a), Finite(b), Infinity, Finite(d)) => -(b - a) / (d - a),
        (Finite(a), Finite(b), Finite(c), Infinity) => (b - a) / (c - b),
        (Finite(a), Finite(b), Finite(c), Finite(d)) => (b - a) * (d - c) / ((c - b) * (d - a)),
        _ => return Err(GeomError::DegenerateQuadruple),
    };
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(GeomError::DegenerateQuadruple);
    }
    Ok(v)
}

/// Cross ratio of an ordered quadruple; positive real for valid inputs.
///
/// The imaginary residue of circle quadruples is checked against 1e-10
/// (relative) and discarded.
pub fn cross_ratio(q: &Quadruple) -> Result<f64, GeomError> {
    let [a, b, c, d] = *q.points();
    let v = cross_ratio_points(a, b, c, d)?;
    let scale = v.norm().max(1.0);
    if v.im.abs() > 1e-10 * scale {
        return Err(GeomError::NonRealCrossRatio(v.im));
    }
    if v.re <= 0.0 {
        return Err(GeomError::NonPositiveCrossRatio(v.re));
    }
    Ok(v.re)
}

/// A Möbius transformation stored as a 2x2 complex matrix with determinant
/// normalized to 1 and the sign of ±M fixed by making the first nonzero entry
/// positive (Re > 0, or Re = 0 and Im > 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moebius {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl Moebius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self, GeomError> {
        let det = a * d - b * c;
        if det.norm() < 1e-300 {
            return Err(GeomError::SingularMatrix);
        }
        let s = det.sqrt();
        let mut m = Moebius {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        };
        m.canonicalize_sign();
        Ok(m)
    }

    pub fn identity() -> Self {
        Moebius {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    fn canonicalize_sign(&mut self) {
        for e in [self.a, self.b, self.c, self.d] {
            if e.norm_sqr() > 1e-24 {
                let flip = e.re < 0.0 || (e.re == 0.0 && e.im < 0.0);
                if flip {
                    self.a = -self.a;
                    self.b = -self.b;
                    self.c = -self.c;
                    self.d = -self.d;
                }
                return;
            }
        }
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.entries().iter().all(|e| e.im.abs() <= tol)
    }

    pub fn apply(&self, p: Point) -> Point {
        match p {
            Point::Infinity => {
                if self.c.norm_sqr() == 0.0 {
                    Point::Infinity
                } else {
                    Point::Finite(self.a / self.c)
                }
            }
            Point::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm_sqr() == 0.0 {
                    Point::Infinity
                } else {
                    Point::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    pub fn inverse(&self) -> Moebius {
        // det is 1, so the adjugate is the inverse up to the same normalization
        let mut m = Moebius {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        };
        m.canonicalize_sign();
        m
    }

    /// self ∘ other (apply `other` first).
    pub fn compose(&self, other: &Moebius) -> Moebius {
        let mut m = Moebius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        };
        m.canonicalize_sign();
        m
    }

    /// The unique Möbius map sending src_i to dst_i.
    pub fn from_triples(src: &[Point; 3], dst: &[Point; 3]) -> Result<Moebius, GeomError> {
        let t_src = to_standard_triple(src)?;
        let t_dst = to_standard_triple(dst)?;
        Ok(t_dst.inverse().compose(&t_src))
    }

    /// The Cayley-type map z ↦ -(z-i)/(z+i) from the upper half-plane to the
    /// disk, sending 0,1,∞ to 1,i,-1.
    pub fn cayley() -> Moebius {
        let i = Complex64::new(0.0, 1.0);
        Moebius::new(-Complex64::new(1.0, 0.0), i, Complex64::new(1.0, 0.0), i)
            .expect("cayley matrix is regular")
    }
}

/// Matrix of the map sending (z1,z2,z3) to (0,1,∞).
fn to_standard_triple(t: &[Point; 3]) -> Result<Moebius, GeomError> {
    for i in 0..3 {
        for j in (i + 1)..3 {
            if t[i].chordal_distance(&t[j]) < COINCIDENCE_TOL {
                return Err(GeomError::DegenerateTriple);
            }
        }
    }
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let m = match (t[0], t[1], t[2]) {
        (Point::Infinity, Point::Finite(z2), Point::Finite(z3)) => {
            // T(z) = (z2-z3)/(z-z3)
            Moebius::new(zero, z2 - z3, one, -z3)?
        }
        (Point::Finite(z1), Point::Infinity, Point::Finite(z3)) => {
            // T(z) = (z-z1)/(z-z3)
            Moebius::new(one, -z1, one, -z3)?
        }
        (Point::Finite(z1), Point::Finite(z2), Point::Infinity) => {
            // T(z) = (z-z1)/(z2-z1)
            Moebius::new(one, -z1, zero, z2 - z1)?
        }
        (Point::Finite(z1), Point::Finite(z2), Point::Finite(z3)) => {
            // T(z) = (z-z1)(z2-z3) / ((z-z3)(z2-z1))
            Moebius::new(z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1))?
        }
        _ => return Err(GeomError::DegenerateTriple),
    };
    Ok(m)
}

/// Cayley map ℍ̄ → 𝔻̄, z ↦ -(z-i)/(z+i): sends 0↦1, 1↦i, ∞↦-1, i↦0.
///
/// Evaluated from the raw integer-coefficient formula so the anchor points
/// map exactly.
pub fn cayley(p: Point) -> Point {
    let i = Complex64::new(0.0, 1.0);
    match p {
        Point::Infinity => Point::Finite(Complex64::new(-1.0, 0.0)),
        Point::Finite(z) => {
            let den = z + i;
            if den.norm_sqr() == 0.0 {
                Point::Infinity
            } else {
                Point::Finite((i - z) / den)
            }
        }
    }
}

/// Inverse Cayley map 𝔻̄ → ℍ̄, w ↦ i(1-w)/(1+w).
pub fn cayley_inv(p: Point) -> Point {
    let i = Complex64::new(0.0, 1.0);
    match p {
        Point::Infinity => Point::Finite(-i),
        Point::Finite(w) => {
            let den = Complex64::new(1.0, 0.0) + w;
            if den.norm_sqr() == 0.0 {
                Point::Infinity
            } else {
                Point::Finite(i * (Complex64::new(1.0, 0.0) - w) / den)
            }
        }
    }
}

/// Solves cr({a,b,c,d}) = target for the fourth point d.
///
/// The solution is accepted only if {a,b,c,d} is counter-clockwise, i.e. d
/// falls in the arc from c to a avoiding b.
pub fn solve_fourth_point(a: Point, b: Point, c: Point, target_cr: f64) -> Result<Point, GeomError> {
    if !(target_cr > 0.0) || !target_cr.is_finite() {
        return Err(GeomError::NoSolutionInArc);
    }
    for (u, v) in [(a, b), (a, c), (b, c)] {
        if u.chordal_distance(&v) < COINCIDENCE_TOL {
            return Err(GeomError::DegenerateTriple);
        }
    }
    let lam = Complex64::new(target_cr, 0.0);
    let d = match (a, b, c) {
        (Point::Infinity, Point::Finite(b), Point::Finite(c)) => {
            // cr = (d-c)/(c-b)
            Point::Finite(c + lam * (c - b))
        }
        (Point::Finite(a), Point::Infinity, Point::Finite(c)) => {
            // cr = -(d-c)/(d-a)
            Point::Finite((c + lam * a) / (Complex64::new(1.0, 0.0) + lam))
        }
        (Point::Finite(a), Point::Finite(b), Point::Infinity) => {
            // cr = -(b-a)/(d-a)
            Point::Finite(a - (b - a) / lam)
        }
        (Point::Finite(a), Point::Finite(b), Point::Finite(c)) => {
            let num = (b - a) * c - lam * (c - b) * a;
            let den = (b - a) - lam * (c - b);
            if den.norm_sqr() == 0.0 {
                Point::Infinity
            } else {
                Point::Finite(num / den)
            }
        }
        _ => return Err(GeomError::DegenerateTriple),
    };
    // Snap circle solutions back to the circle and real solutions to the line;
    // the algebra keeps|d| near 1 resp. Im(d) near 0, renormalizing protects
    // downstream invariants.
    let d = snap_to_model_of(&[a, b, c], d);
    match Quadruple::new(a, b, c, d) {
        Ok(_) => Ok(d),
        Err(GeomError::MixedModels) => Ok(d),
        Err(_) => Err(GeomError::NoSolutionInArc),
    }
}

fn snap_to_model_of(anchor: &[Point; 3], d: Point) -> Point {
    let all_real = anchor.iter().all(|p| match p {
        Point::Infinity => true,
        Point::Finite(z) => z.im.abs() <= 1e-9 * (1.0 + z.re.abs()),
    });
    match d {
        Point::Infinity => Point::Infinity,
        Point::Finite(z) => {
            if all_real {
                Point::Finite(Complex64::new(z.re, 0.0))
            } else {
                let n = z.norm();
                if (n - 1.0).abs() <= 1e-6 && n > 0.0 {
                    Point::Finite(z / n)
                } else {
                    Point::Finite(z)
                }
            }
        }
    }
}
