//! Shear functions of boundary maps on the Farey tesselation, the fan
//! quantities s(p;m,k), the shear norm, the shear and asymptotic-shear
//! pseudometrics, and reconstruction of the characteristic map.
//!
//! The shear of an edge e under a half-plane map h fixing 0, 1, ∞ is
//! s(e) = log cr(h(a,b,c,d)) with (a,b,c,d) the counter-clockwise quadruple
//! of e's endpoints and adjacent-triangle apexes. Along a fan with shears
//! s_j the quantity
//!
//! ```text
//! s(p;m,k) = e^{s_m} · (1 + e^{s_{m+1}} + ... + e^{s_{m+1}+...+s_{m+k}})
//!                    / (1 + e^{-s_{m-1}} + ... + e^{-(s_{m-1}+...+s_{m-k})})
//! ```
//!
//! telescopes to the cross-ratio distortion of h on the fan quadruple of
//! radius k+1: s(p;m,k) = cr(h_s({p, a_{m-k-1}, a_m, a_{m+k+1}})). Exponent
//! sums are evaluated in log space so large shears cannot overflow silently.

use crate::boundary::{BoundaryError, BoundaryMap, Model, PiecewiseAngle};
use crate::farey::{cross_ratio_exact, EdgeId, FareyError, FareyVertex, Tesselation};
use crate::geom::{
    cayley, cross_ratio_points, normalize_angle, solve_fourth_point, GeomError, Point,
};
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShearError {
    #[error("map must fix 0, 1 and infinity before taking shears (drift {0:e})")]
    NotNormalized(f64),
    #[error("image points of edge ({0}, {1}) collide; the numeric evaluation is not injective")]
    DegenerateImage(FareyVertex, FareyVertex),
    #[error("s(p;m,k) overflows the floating range (log value {0})")]
    Overflow(f64),
    #[error("no fan window satisfies the generation threshold {0} at this depth")]
    EmptyWindow(u32),
    #[error("shear data is inconsistent: no admissible fourth point while developing edge ({0}, {1})")]
    InconsistentShears(FareyVertex, FareyVertex),
    #[error("edge ({0}, {1}) carries no shear value at this depth")]
    MissingValue(FareyVertex, FareyVertex),
    #[error(transparent)]
    Farey(#[from] FareyError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
}

/// A finite-depth table edge → shear value over a shared tesselation.
///
/// Values exist exactly on the interior edges (both adjacent triangles
/// enumerated), i.e. generations 0..depth-1.
#[derive(Debug, Clone)]
pub struct ShearFunction {
    tess: Arc<Tesselation>,
    values: HashMap<EdgeId, f64>,
}

impl ShearFunction {
    /// The zero table: the shear function of the identity.
    pub fn zero(tess: Arc<Tesselation>) -> Self {
        let values = tess.interior_edges().map(|id| (id, 0.0)).collect();
        ShearFunction { tess, values }
    }

    pub fn tesselation(&self) -> &Arc<Tesselation> {
        &self.tess
    }

    pub fn depth(&self) -> u32 {
        self.tess.depth()
    }

    pub fn value(&self, id: EdgeId) -> Option<f64> {
        self.values.get(&id).copied()
    }

    pub fn value_of(&self, v1: &FareyVertex, v2: &FareyVertex) -> Option<f64> {
        self.tess.edge_id(v1, v2).and_then(|id| self.value(id))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_identically_zero(&self) -> bool {
        self.values.values().all(|&v| v == 0.0)
    }

    /// Builds a table from explicit (v1, v2, value) rows; every interior edge
    /// of the tesselation must be covered.
    pub fn from_rows(
        tess: Arc<Tesselation>,
        rows: &[(FareyVertex, FareyVertex, f64)],
    ) -> Result<Self, ShearError> {
        let mut values = HashMap::new();
        for (v1, v2, s) in rows {
            let id = tess
                .edge_id(v1, v2)
                .ok_or(FareyError::UnknownEdge(*v1, *v2))?;
            values.insert(id, *s);
        }
        for id in tess.interior_edges() {
            if !values.contains_key(&id) {
                let e = tess.edge(id);
                return Err(ShearError::MissingValue(e.v1, e.v2));
            }
        }
        Ok(ShearFunction { tess, values })
    }

    /// Rows (v1, v2, generation, value) in stable edge order.
    pub fn rows(&self) -> Vec<(FareyVertex, FareyVertex, u32, f64)> {
        let mut out = Vec::with_capacity(self.values.len());
        for id in self.tess.edge_ids() {
            if let Some(s) = self.value(id) {
                let e = self.tess.edge(id);
                out.push((e.v1, e.v2, e.generation, s));
            }
        }
        out
    }
}

/// Evaluates a half-plane map on a Farey vertex.
fn image_of_vertex(h: &BoundaryMap, v: &FareyVertex) -> Result<Point, ShearError> {
    Ok(h.evaluate(v.to_point())?)
}

/// The shear function of a half-plane map fixing 0, 1, ∞.
///
/// Maps carrying an exact integer matrix take the exact rational route, on
/// which every tesselation cross ratio is exactly 1 and all shears are an
/// exact 0.0 (a real Möbius fixing three boundary points is the identity).
pub fn shear_function(h: &BoundaryMap, tess: Arc<Tesselation>) -> Result<ShearFunction, ShearError> {
    if h.model() != Model::Line {
        return Err(ShearError::Boundary(BoundaryError::ModelMismatch));
    }
    let mut drift: f64 = 0.0;
    for v in [
        FareyVertex::new(0, 1),
        FareyVertex::new(1, 1),
        FareyVertex::infinity(),
    ] {
        let img = image_of_vertex(h, &v)?;
        drift = drift.max(img.chordal_distance(&v.to_point()));
    }
    if drift > 1e-9 {
        return Err(ShearError::NotNormalized(drift));
    }

    if let Some(mat) = h.exact_line_matrix() {
        let apply = |v: &FareyVertex| -> FareyVertex {
            let n = mat[0][0] as i128 * v.numerator() as i128
                + mat[0][1] as i128 * v.denominator() as i128;
            let d = mat[1][0] as i128 * v.numerator() as i128
                + mat[1][1] as i128 * v.denominator() as i128;
            FareyVertex::new(n as i64, d as i64)
        };
        let mut values = HashMap::new();
        for id in tess.interior_edges() {
            let q = tess.edge_quadruple_exact(id)?;
            let imgs = [apply(&q[0]), apply(&q[1]), apply(&q[2]), apply(&q[3])];
            let cr = cross_ratio_exact(&imgs).ok_or_else(|| {
                let e = tess.edge(id);
                ShearError::DegenerateImage(e.v1, e.v2)
            })?;
            debug_assert_eq!(cr, (1, 1), "Möbius maps preserve cross ratios");
            values.insert(id, ((cr.0 as f64) / (cr.1 as f64)).ln());
        }
        return Ok(ShearFunction { tess, values });
    }

    let mut values = HashMap::new();
    let mut vertex_images: HashMap<FareyVertex, Point> = HashMap::new();
    for id in tess.interior_edges() {
        let q = tess.edge_quadruple_exact(id)?;
        let mut imgs = [Point::Infinity; 4];
        for (slot, v) in q.iter().enumerate() {
            let img = match vertex_images.get(v) {
                Some(p) => *p,
                None => {
                    let p = image_of_vertex(h, v)?;
                    vertex_images.insert(*v, p);
                    p
                }
            };
            imgs[slot] = img;
        }
        let e = tess.edge(id);
        let cr = cross_ratio_points(imgs[0], imgs[1], imgs[2], imgs[3])
            .map_err(|_| ShearError::DegenerateImage(e.v1, e.v2))?;
        if !(cr.re > 0.0) || cr.re.is_nan() {
            return Err(ShearError::DegenerateImage(e.v1, e.v2));
        }
        values.insert(id, cr.re.ln());
    }
    Ok(ShearFunction { tess, values })
}

/// log(1 + Σ exp(t_i)) over the given exponents, including the implicit 0.
fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().fold(0.0f64, |a, &b| a.max(b));
    let sum: f64 = (-m).exp() + terms.iter().map(|&t| (t - m).exp()).sum::<f64>();
    m + sum.ln()
}

/// Shear values along a fan window [m-k, m+k] of tip p.
fn window_values(
    s: &ShearFunction,
    p: &FareyVertex,
    m: i64,
    k: u32,
) -> Result<Vec<f64>, ShearError> {
    let tess = s.tesselation();
    let mut out = Vec::with_capacity(2 * k as usize + 1);
    for j in (m - k as i64)..=(m + k as i64) {
        let id = tess
            .fan_edge(p, j)?
            .ok_or(FareyError::WindowExceedsDepth)?;
        let v = s.value(id).ok_or_else(|| {
            let e = tess.edge(id);
            ShearError::MissingValue(e.v1, e.v2)
        })?;
        out.push(v);
    }
    Ok(out)
}

/// log s(p;m,k), evaluated by log-sum-exp over the partial exponent sums.
pub fn log_s_pmk(s: &ShearFunction, p: &FareyVertex, m: i64, k: u32) -> Result<f64, ShearError> {
    let w = window_values(s, p, m, k)?;
    let mid = k as usize;
    let mut up = Vec::with_capacity(k as usize);
    let mut acc = 0.0;
    for j in 1..=k as usize {
        acc += w[mid + j];
        up.push(acc);
    }
    let mut down = Vec::with_capacity(k as usize);
    acc = 0.0;
    for j in 1..=k as usize {
        acc += w[mid - j];
        down.push(-acc);
    }
    Ok(w[mid] + log_sum_exp(&up) - log_sum_exp(&down))
}

/// The fan quantity s(p;m,k) as a positive real.
pub fn s_pmk(s: &ShearFunction, p: &FareyVertex, m: i64, k: u32) -> Result<f64, ShearError> {
    let log_v = log_s_pmk(s, p, m, k)?;
    let v = log_v.exp();
    if !v.is_finite() || v == 0.0 {
        return Err(ShearError::Overflow(log_v));
    }
    Ok(v)
}

/// All (tip, m, k) windows with shear values at this depth and radius ≤ k_max.
///
/// m ranges over every index for which the window fits inside the table; the
/// scan is therefore invariant under re-indexing any fan.
fn for_each_window<F: FnMut(&FareyVertex, i64, u32, &[f64])>(
    s: &ShearFunction,
    k_max: u32,
    mut f: F,
) {
    let tess = s.tesselation();
    let tips: Vec<FareyVertex> = tess.vertices().copied().collect();
    for p in &tips {
        // contiguous index interval of fan edges carrying values
        let mut idx: Vec<(i64, f64)> = Vec::new();
        for &eid in tess.incident_edges(p) {
            if let Some(v) = s.value(eid) {
                let e = tess.edge(eid);
                let other = if e.v1 == *p { e.v2 } else { e.v1 };
                let j = tess.fan_index_of(p, &other).expect("tip enumerated");
                idx.push((j, v));
            }
        }
        if idx.is_empty() {
            continue;
        }
        idx.sort_by_key(|&(j, _)| j);
        let lo = idx[0].0;
        debug_assert!(
            idx.iter().enumerate().all(|(i, &(j, _))| j == lo + i as i64),
            "fan values of {p} are not contiguous"
        );
        let vals: Vec<f64> = idx.iter().map(|&(_, v)| v).collect();
        let hi = lo + vals.len() as i64 - 1;
        let radius_cap = ((vals.len() as i64 - 1) / 2).min(k_max as i64).max(0) as u32;
        for k in 0..=radius_cap {
            for m in (lo + k as i64)..=(hi - k as i64) {
                let a = (m - k as i64 - lo) as usize;
                let b = (m + k as i64 - lo) as usize;
                f(p, m, k, &vals[a..=b]);
            }
        }
    }
}

fn log_spmk_from_slice(w: &[f64]) -> f64 {
    let k = (w.len() - 1) / 2;
    let mid = k;
    let mut up = Vec::with_capacity(k);
    let mut acc = 0.0;
    for j in 1..=k {
        acc += w[mid + j];
        up.push(acc);
    }
    let mut down = Vec::with_capacity(k);
    acc = 0.0;
    for j in 1..=k {
        acc += w[mid - j];
        down.push(-acc);
    }
    w[mid] + log_sum_exp(&up) - log_sum_exp(&down)
}

/// Finite-depth shear norm: sup over fans and windows of |log s(p;m,k)|,
/// with window radius capped by k_max. Nondecreasing in depth and k_max.
pub fn shear_norm(s: &ShearFunction, k_max: u32) -> f64 {
    let mut sup: f64 = 0.0;
    for_each_window(s, k_max, |_, _, _, w| {
        sup = sup.max(log_spmk_from_slice(w).abs());
    });
    sup
}

/// Finite-depth shear distance sup |log(s1(p;m,k)/s2(p;m,k))|.
///
/// Both tables must live on tesselations of the same depth.
pub fn d_s(s1: &ShearFunction, s2: &ShearFunction, k_max: u32) -> f64 {
    assert_eq!(
        s1.depth(),
        s2.depth(),
        "shear tables must share their depth"
    );
    let mut sup: f64 = 0.0;
    for_each_window(s1, k_max, |p, m, k, w| {
        let l1 = log_spmk_from_slice(w);
        let l2 = match window_values(s2, p, m, k) {
            Ok(w2) => log_spmk_from_slice(&w2),
            Err(_) => return,
        };
        sup = sup.max((l1 - l2).abs());
    });
    sup
}

/// Finite-depth estimates of the asymptotic shear distance: for each
/// generation threshold G, the sup of |log(s1/s2)| over windows whose outer
/// fan edges e_{m±k} both have generation ≥ G. The curve is nonincreasing in
/// G and its tail estimates the limsup.
pub fn d_as(
    s1: &ShearFunction,
    s2: &ShearFunction,
    thresholds: &[u32],
) -> Result<Vec<(u32, f64)>, ShearError> {
    assert_eq!(
        s1.depth(),
        s2.depth(),
        "shear tables must share their depth"
    );
    let tess = s1.tesselation();
    let mut sups: Vec<Option<f64>> = vec![None; thresholds.len()];
    for_each_window(s1, u32::MAX, |p, m, k, w| {
        let g_plus = match tess.fan_edge(p, m + k as i64) {
            Ok(Some(id)) => tess.edge(id).generation,
            _ => return,
        };
        let g_minus = match tess.fan_edge(p, m - k as i64) {
            Ok(Some(id)) => tess.edge(id).generation,
            _ => return,
        };
        let min_gen = g_plus.min(g_minus);
        let l1 = log_spmk_from_slice(w);
        let l2 = match window_values(s2, p, m, k) {
            Ok(w2) => log_spmk_from_slice(&w2),
            Err(_) => return,
        };
        let v = (l1 - l2).abs();
        for (i, &g) in thresholds.iter().enumerate() {
            if min_gen >= g {
                sups[i] = Some(sups[i].map_or(v, |s: f64| s.max(v)));
            }
        }
    });
    thresholds
        .iter()
        .zip(sups)
        .map(|(&g, s)| s.map(|v| (g, v)).ok_or(ShearError::EmptyWindow(g)))
        .collect()
}

/// Images of the Farey vertices under the characteristic map of a shear
/// table: the unique boundary map fixing 0, 1, ∞ whose shear function equals
/// the table.
#[derive(Debug, Clone)]
pub struct CharacteristicMap {
    tess: Arc<Tesselation>,
    images: HashMap<FareyVertex, Point>,
}

impl CharacteristicMap {
    pub fn image(&self, v: &FareyVertex) -> Option<Point> {
        self.images.get(v).copied()
    }

    pub fn tesselation(&self) -> &Arc<Tesselation> {
        &self.tess
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Vertex/image rows sorted by vertex.
    pub fn rows(&self) -> Vec<(FareyVertex, Point)> {
        let mut out: Vec<(FareyVertex, Point)> = self.images.iter().map(|(v, p)| (*v, *p)).collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Shear table recomputed from the vertex images (round trip).
    pub fn shear_function(&self) -> Result<ShearFunction, ShearError> {
        let tess = Arc::clone(&self.tess);
        let mut values = HashMap::new();
        for id in tess.interior_edges() {
            let q = tess.edge_quadruple_exact(id)?;
            let e = tess.edge(id);
            let img = |v: &FareyVertex| -> Result<Point, ShearError> {
                self.images
                    .get(v)
                    .copied()
                    .ok_or(ShearError::MissingValue(e.v1, e.v2))
            };
            let cr = cross_ratio_points(img(&q[0])?, img(&q[1])?, img(&q[2])?, img(&q[3])?)
                .map_err(|_| ShearError::DegenerateImage(e.v1, e.v2))?;
            if !(cr.re > 0.0) || cr.re.is_nan() {
                return Err(ShearError::DegenerateImage(e.v1, e.v2));
            }
            values.insert(id, cr.re.ln());
        }
        Ok(ShearFunction { tess, values })
    }

    /// The piecewise-in-angle circle map interpolating the vertex images
    /// after transport through the Cayley map. Evaluating its half-plane
    /// conjugate at a Farey vertex reproduces the table image.
    pub fn to_boundary_map(&self) -> Result<BoundaryMap, ShearError> {
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(self.images.len());
        for (v, img) in &self.images {
            let b = angle_of(cayley(v.to_point()));
            let i = angle_of(cayley(*img));
            pairs.push((b, i));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-15);
        let (breaks, images): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        Ok(BoundaryMap::PiecewiseAngle(PiecewiseAngle::new(
            breaks, images,
        )?))
    }
}

fn angle_of(p: Point) -> f64 {
    normalize_angle(p.finite().expect("circle point").arg())
}

/// Develops the characteristic map breadth-first along the tesselation:
/// h(0)=0, h(1)=1, h(∞)=∞ seed the base triangle, and each new vertex is the
/// fourth point solving the shear relation on its supporting edge.
///
/// The all-zero table short-circuits to the exact identity on the vertices
/// (every Farey quadruple has cross ratio 1, so the zero table is the
/// identity's coordinates).
pub fn characteristic_map(s: &ShearFunction) -> Result<CharacteristicMap, ShearError> {
    let tess = Arc::clone(s.tesselation());
    let mut images: HashMap<FareyVertex, Point> = HashMap::new();

    if s.is_identically_zero() {
        for v in tess.vertices() {
            images.insert(*v, v.to_point());
        }
        return Ok(CharacteristicMap { tess, images });
    }

    images.insert(FareyVertex::new(0, 1), Point::real(0.0));
    images.insert(FareyVertex::new(1, 1), Point::real(1.0));
    images.insert(FareyVertex::infinity(), Point::Infinity);

    // triangles are stored in creation (breadth-first) order
    for tri in tess.triangles().iter() {
        let Some(eid) = tri.entrance_edge else {
            continue; // base triangle
        };
        let new_vertex = tri
            .vertices
            .iter()
            .find(|v| !images.contains_key(v))
            .copied();
        let Some(new_vertex) = new_vertex else {
            continue; // can happen only for the base triangle's vertices
        };
        let quad = tess.edge_quadruple_exact(eid)?;
        let e = tess.edge(eid);
        let lambda = s
            .value(eid)
            .ok_or(ShearError::MissingValue(e.v1, e.v2))?
            .exp();
        // quad = (a, b, c, d) ccw with apexes in slots 1 and 3; the unknown
        // image sits in slot 1 or 3, and (c,d,a,b) has the same cross ratio
        let (known, target) = if quad[3] == new_vertex {
            ([quad[0], quad[1], quad[2]], quad[3])
        } else {
            debug_assert_eq!(quad[1], new_vertex, "entrance edge must see the new apex");
            ([quad[2], quad[3], quad[0]], quad[1])
        };
        let a = images[&known[0]];
        let b = images[&known[1]];
        let c = images[&known[2]];
        let d = solve_fourth_point(a, b, c, lambda)
            .map_err(|_| ShearError::InconsistentShears(e.v1, e.v2))?;
        images.insert(target, d);
    }
    Ok(CharacteristicMap { tess, images })
}
