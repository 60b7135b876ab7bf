//! The Farey tesselation of the upper half-plane: exact enumeration by
//! generation, fans with their horocycle order, and edge-adjacent quadruples.
//!
//! Vertices are reduced integer fractions with ∞ = 1/0; every combinatorial
//! question (neighbor tests, cyclic order, cross ratios of tesselation
//! quadruples) is answered in exact integer arithmetic. The base triangle has
//! vertices 0, 1, ∞; reflecting a triangle across an edge (p/q, r/s) produces
//! the new vertex (p±r)/(q±s), and the generation of an edge is the number of
//! reflections separating it from the base triangle.

use crate::geom::{Point, Quadruple};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Resource guard: 3·2^30 edges exceed desk memory.
pub const MAX_DEPTH: u32 = 30;

pub type EdgeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FareyError {
    #[error("depth {0} exceeds the supported maximum {MAX_DEPTH}")]
    DepthLimit(u32),
    #[error("edge ({0}, {1}) is not part of the enumerated tesselation")]
    UnknownEdge(FareyVertex, FareyVertex),
    #[error("vertex {0} is not part of the enumerated tesselation")]
    UnknownVertex(FareyVertex),
    #[error("fan window reaches edges beyond the enumerated depth")]
    WindowExceedsDepth,
    #[error("edge ({0}, {1}) has only one adjacent triangle at this depth")]
    BoundaryEdgeAtDepth(FareyVertex, FareyVertex),
}

/// A reduced rational p/q with q ≥ 0, where 1/0 stands for ∞.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FareyVertex {
    num: i64,
    den: i64,
}

impl FareyVertex {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(num != 0 || den != 0, "0/0 is not a vertex");
        if den == 0 {
            return FareyVertex { num: 1, den: 0 };
        }
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        FareyVertex { num: n, den: d }
    }

    pub fn infinity() -> Self {
        FareyVertex { num: 1, den: 0 }
    }

    pub fn is_infinity(&self) -> bool {
        self.den == 0
    }

    pub fn numerator(&self) -> i64 {
        self.num
    }

    pub fn denominator(&self) -> i64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        if self.den == 0 {
            f64::INFINITY
        } else {
            self.num as f64 / self.den as f64
        }
    }

    pub fn to_point(&self) -> Point {
        if self.den == 0 {
            Point::Infinity
        } else {
            Point::real(self.num as f64 / self.den as f64)
        }
    }

    /// Integer vertex k/1.
    pub fn integer(k: i64) -> Self {
        FareyVertex { num: k, den: 1 }
    }

    /// |p·s - q·r| = 1, the Farey-neighbor condition.
    pub fn are_neighbors(a: &FareyVertex, b: &FareyVertex) -> bool {
        let det = (a.num as i128) * (b.den as i128) - (a.den as i128) * (b.num as i128);
        det.abs() == 1
    }

    /// (p+r)/(q+s).
    pub fn mediant_sum(a: &FareyVertex, b: &FareyVertex) -> Self {
        FareyVertex::new(a.num + b.num, a.den + b.den)
    }

    /// (p-r)/(q-s).
    pub fn mediant_diff(a: &FareyVertex, b: &FareyVertex) -> Self {
        FareyVertex::new(a.num - b.num, a.den - b.den)
    }
}

impl PartialOrd for FareyVertex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Order on ℚ ∪ {∞} with ∞ greatest.
impl Ord for FareyVertex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self.den == 0, other.den == 0) {
            (true, true) => std::cmp::Ordering::Equal,
            (true, false) => std::cmp::Ordering::Greater,
            (false, true) => std::cmp::Ordering::Less,
            (false, false) => {
                let l = (self.num as i128) * (other.den as i128);
                let r = (other.num as i128) * (self.den as i128);
                l.cmp(&r)
            }
        }
    }
}

impl fmt::Display for FareyVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// Extended gcd: returns (g, x, y) with a·x + b·y = g.
fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, x, y) = egcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// An integer Möbius transformation with determinant +1, acting exactly on
/// Farey vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntMoebius {
    m: [[i64; 2]; 2],
}

impl IntMoebius {
    pub fn identity() -> Self {
        IntMoebius { m: [[1, 0], [0, 1]] }
    }

    pub fn new(m: [[i64; 2]; 2]) -> Self {
        let det = (m[0][0] as i128) * (m[1][1] as i128) - (m[0][1] as i128) * (m[1][0] as i128);
        assert_eq!(det, 1, "IntMoebius requires determinant +1");
        IntMoebius { m }
    }

    pub fn entries(&self) -> [[i64; 2]; 2] {
        self.m
    }

    pub fn apply(&self, v: &FareyVertex) -> FareyVertex {
        let n = (self.m[0][0] as i128) * (v.num as i128) + (self.m[0][1] as i128) * (v.den as i128);
        let d = (self.m[1][0] as i128) * (v.num as i128) + (self.m[1][1] as i128) * (v.den as i128);
        // det ±1 keeps the fraction reduced; magnitudes stay well inside i64
        // for any enumerable depth.
        FareyVertex::new(n as i64, d as i64)
    }

    pub fn inverse(&self) -> Self {
        let [[a, b], [c, d]] = self.m;
        IntMoebius { m: [[d, -b], [-c, a]] }
    }

    /// A determinant-one integer matrix sending p to ∞.
    pub fn sending_to_infinity(p: &FareyVertex) -> Self {
        if p.is_infinity() {
            return IntMoebius::identity();
        }
        let (g, x, y) = egcd(p.num, p.den);
        debug_assert_eq!(g, 1);
        // rows [a b; q -p] with det = -(a p + b q) = 1
        IntMoebius::new([[-x, -y], [p.den, -p.num]])
    }
}

/// PSL(2,ℤ) element mapping the counter-clockwise triple `tri` to (0, 1, ∞).
pub fn psl2z_triangle_to_base(tri: &[FareyVertex; 3]) -> IntMoebius {
    let [t1, t2, t3] = tri;
    // row 2 kills t3 (maps it to ∞), row 1 kills t1 (maps it to 0); all four
    // sign combinations are tried, exactly one has det +1 and sends t2 to 1.
    for s1 in [1i64, -1] {
        for s2 in [1i64, -1] {
            let a = s1 * t1.den;
            let b = -s1 * t1.num;
            let c = s2 * t3.den;
            let d = -s2 * t3.num;
            let det = (a as i128) * (d as i128) - (b as i128) * (c as i128);
            if det != 1 {
                continue;
            }
            let m = IntMoebius::new([[a, b], [c, d]]);
            if m.apply(t2) == FareyVertex::integer(1) {
                return m;
            }
        }
    }
    panic!("no PSL(2,Z) map for triple {tri:?}; is it a ccw tesselation triangle?");
}

/// Exact counter-clockwise test on ℚ̂: increasing with a single wrap
/// through ∞, i.e. exactly one cyclic descent.
pub fn is_ccw_exact(points: &[FareyVertex]) -> bool {
    let n = points.len();
    let mut descents = 0;
    for i in 0..n {
        let u = &points[i];
        let v = &points[(i + 1) % n];
        let descent = if v.is_infinity() {
            false
        } else if u.is_infinity() {
            true
        } else {
            v < u
        };
        if descent {
            descents += 1;
        }
    }
    descents == 1
}

/// Cross ratio (b-a)(d-c)/((c-b)(d-a)) of four vertices as a reduced exact
/// fraction (num, den) with den > 0. Returns `None` on repeated vertices or
/// (unreachable at sane depths) i128 overflow.
pub fn cross_ratio_exact(q: &[FareyVertex; 4]) -> Option<(i128, i128)> {
    type Frac = (i128, i128);
    fn reduce(f: Frac) -> Frac {
        let g = igcd(f.0.unsigned_abs(), f.1.unsigned_abs()) as i128;
        let (mut n, mut d) = (f.0 / g, f.1 / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        (n, d)
    }
    fn igcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a.max(1)
    }
    fn diff(u: &FareyVertex, v: &FareyVertex) -> Frac {
        reduce((
            (u.num as i128) * (v.den as i128) - (v.num as i128) * (u.den as i128),
            (u.den as i128) * (v.den as i128),
        ))
    }
    fn mul(x: Frac, y: Frac) -> Option<Frac> {
        let g1 = igcd(x.0.unsigned_abs(), y.1.unsigned_abs()) as i128;
        let g2 = igcd(y.0.unsigned_abs(), x.1.unsigned_abs()) as i128;
        Some((
            (x.0 / g1).checked_mul(y.0 / g2)?,
            (x.1 / g2).checked_mul(y.1 / g1)?,
        ))
    }
    fn div(x: Frac, y: Frac) -> Option<Frac> {
        if y.0 == 0 {
            return None;
        }
        mul(x, (y.1, y.0))
    }

    let [a, b, c, d] = q;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if q[i] == q[j] {
                return None;
            }
        }
    }
    let inf_count = q.iter().filter(|v| v.is_infinity()).count();
    if inf_count > 1 {
        return None;
    }
    let v = if a.is_infinity() {
        div(diff(d, c), diff(c, b))?
    } else if b.is_infinity() {
        div((-diff(d, c).0, diff(d, c).1), diff(d, a))?
    } else if c.is_infinity() {
        div((-diff(b, a).0, diff(b, a).1), diff(d, a))?
    } else if d.is_infinity() {
        div(diff(b, a), diff(c, b))?
    } else {
        div(mul(diff(b, a), diff(d, c))?, mul(diff(c, b), diff(d, a))?)?
    };
    Some(reduce(v))
}

#[derive(Debug, Clone)]
struct EdgeRecord {
    v1: FareyVertex, // canonical: v1 < v2
    v2: FareyVertex,
    generation: u32,
    /// Third vertices of the (up to two) adjacent triangles enumerated so far.
    apexes: [Option<FareyVertex>; 2],
    triangles: [Option<usize>; 2],
}

/// A triangle of the tesselation with its reflection ancestry.
#[derive(Debug, Clone)]
pub struct Triangle {
    pub vertices: [FareyVertex; 3],
    pub depth: u32,
    pub parent: Option<usize>,
    pub entrance_edge: Option<EdgeId>,
}

/// Public view of an enumerated edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FareyEdge {
    pub v1: FareyVertex,
    pub v2: FareyVertex,
    pub generation: u32,
}

#[derive(Debug, Clone)]
struct FanInfo {
    to_infinity: IntMoebius,
    from_infinity: IntMoebius,
    offset: i64,
}

/// An ordered window of a fan: edges sharing the tip, indexed along the
/// horocycle at the tip. Index 0 is the lowest-generation fan edge (ties
/// broken toward the smaller non-tip endpoint); for tip ∞ this makes the edge
/// (k, ∞) carry index k.
#[derive(Debug, Clone)]
pub struct Fan {
    pub tip: FareyVertex,
    pub first_index: i64,
    pub edges: Vec<EdgeId>,
}

/// The Farey tesselation enumerated to a fixed generation depth.
#[derive(Debug)]
pub struct Tesselation {
    depth: u32,
    edges: Vec<EdgeRecord>,
    index: HashMap<(FareyVertex, FareyVertex), EdgeId>,
    triangles: Vec<Triangle>,
    incident: HashMap<FareyVertex, Vec<EdgeId>>,
    fans: HashMap<FareyVertex, FanInfo>,
}

impl Tesselation {
    /// Enumerates all edges of generation ≤ depth together with their
    /// adjacent triangles (of reflection depth ≤ depth).
    pub fn enumerate(depth: u32) -> Result<Self, FareyError> {
        if depth > MAX_DEPTH {
            return Err(FareyError::DepthLimit(depth));
        }
        let mut t = Tesselation {
            depth,
            edges: Vec::new(),
            index: HashMap::new(),
            triangles: Vec::new(),
            incident: HashMap::new(),
            fans: HashMap::new(),
        };
        let v0 = FareyVertex::new(0, 1);
        let v1 = FareyVertex::new(1, 1);
        let vi = FareyVertex::infinity();
        t.triangles.push(Triangle {
            vertices: [v0, v1, vi],
            depth: 0,
            parent: None,
            entrance_edge: None,
        });
        let mut frontier: Vec<(EdgeId, usize)> = Vec::new();
        for (a, b, apex) in [(v0, v1, vi), (v1, vi, v0), (v0, vi, v1)] {
            let id = t.add_edge(a, b, 0, apex, 0);
            frontier.push((id, 0));
        }
        let mut per_generation = vec![3usize];
        for g in 1..=depth {
            let mut next = Vec::new();
            let mut created = 0usize;
            for (eid, tid) in frontier {
                let (u, v, old_apex) = {
                    let e = &t.edges[eid];
                    (e.v1, e.v2, e.apexes[0].expect("frontier edge has a triangle"))
                };
                let ms = FareyVertex::mediant_sum(&u, &v);
                let md = FareyVertex::mediant_diff(&u, &v);
                let apex = if ms == old_apex {
                    md
                } else {
                    debug_assert_eq!(md, old_apex, "mediant rule violated at ({u}, {v})");
                    ms
                };
                debug_assert!(FareyVertex::are_neighbors(&u, &apex));
                debug_assert!(FareyVertex::are_neighbors(&v, &apex));
                let new_tid = t.triangles.len();
                t.triangles.push(Triangle {
                    vertices: [u, v, apex],
                    depth: g,
                    parent: Some(tid),
                    entrance_edge: Some(eid),
                });
                t.edges[eid].apexes[1] = Some(apex);
                t.edges[eid].triangles[1] = Some(new_tid);
                let e1 = t.add_edge(u, apex, g, v, new_tid);
                let e2 = t.add_edge(v, apex, g, u, new_tid);
                next.push((e1, new_tid));
                next.push((e2, new_tid));
                created += 2;
            }
            assert_eq!(created, 3 << g, "generation {g} must contain 3·2^{g} edges");
            per_generation.push(created);
            frontier = next;
        }
        debug_assert_eq!(per_generation[0], 3);
        t.build_fans();
        Ok(t)
    }

    fn add_edge(
        &mut self,
        a: FareyVertex,
        b: FareyVertex,
        generation: u32,
        apex: FareyVertex,
        triangle: usize,
    ) -> EdgeId {
        let (v1, v2) = if a < b { (a, b) } else { (b, a) };
        debug_assert!(FareyVertex::are_neighbors(&v1, &v2));
        let id = self.edges.len();
        self.edges.push(EdgeRecord {
            v1,
            v2,
            generation,
            apexes: [Some(apex), None],
            triangles: [Some(triangle), None],
        });
        self.index.insert((v1, v2), id);
        self.incident.entry(v1).or_default().push(id);
        self.incident.entry(v2).or_default().push(id);
        id
    }

    fn build_fans(&mut self) {
        for (&p, edges) in &self.incident {
            let to_infinity = IntMoebius::sending_to_infinity(&p);
            // origin: lowest generation, ties toward the smaller non-tip endpoint
            let origin = edges
                .iter()
                .map(|&id| {
                    let e = &self.edges[id];
                    let other = if e.v1 == p { e.v2 } else { e.v1 };
                    (e.generation, other)
                })
                .min()
                .expect("every vertex has incident edges");
            let raw = to_infinity.apply(&origin.1);
            debug_assert_eq!(raw.denominator(), 1);
            self.fans.insert(
                p,
                FanInfo {
                    to_infinity,
                    from_infinity: to_infinity.inverse(),
                    offset: raw.numerator(),
                },
            );
        }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, id: EdgeId) -> FareyEdge {
        let e = &self.edges[id];
        FareyEdge {
            v1: e.v1,
            v2: e.v2,
            generation: e.generation,
        }
    }

    pub fn edge_id(&self, a: &FareyVertex, b: &FareyVertex) -> Option<EdgeId> {
        let key = if a < b { (*a, *b) } else { (*b, *a) };
        self.index.get(&key).copied()
    }

    /// Minimal reflection count from an edge of the base triangle.
    pub fn generation(&self, a: &FareyVertex, b: &FareyVertex) -> Result<u32, FareyError> {
        self.edge_id(a, b)
            .map(|id| self.edges[id].generation)
            .ok_or(FareyError::UnknownEdge(*a, *b))
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn vertices(&self) -> impl Iterator<Item = &FareyVertex> {
        self.incident.keys()
    }

    pub fn vertex_count(&self) -> usize {
        self.incident.len()
    }

    pub fn contains_vertex(&self, v: &FareyVertex) -> bool {
        self.incident.contains_key(v)
    }

    pub fn incident_edges(&self, p: &FareyVertex) -> &[EdgeId] {
        self.incident.get(p).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Whether both adjacent triangles of the edge are enumerated.
    pub fn is_interior(&self, id: EdgeId) -> bool {
        self.edges[id].triangles[1].is_some()
    }

    /// Index of the triangle whose reflection created this edge (the base
    /// triangle for generation-0 edges).
    pub fn creating_triangle(&self, id: EdgeId) -> usize {
        self.edges[id].triangles[0].expect("every edge is created by a triangle")
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).filter(|&id| self.is_interior(id))
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        0..self.edges.len()
    }

    /// The non-tip endpoint of the fan edge of `p` at (origin-calibrated)
    /// index `j`; pure arithmetic, defined whether or not the edge is
    /// enumerated.
    pub fn fan_vertex(&self, p: &FareyVertex, j: i64) -> Result<FareyVertex, FareyError> {
        let info = self.fans.get(p).ok_or(FareyError::UnknownVertex(*p))?;
        Ok(info.from_infinity.apply(&FareyVertex::integer(j + info.offset)))
    }

    /// Fan edge of `p` at index `j`, if enumerated at this depth.
    pub fn fan_edge(&self, p: &FareyVertex, j: i64) -> Result<Option<EdgeId>, FareyError> {
        let other = self.fan_vertex(p, j)?;
        Ok(self.edge_id(p, &other))
    }

    /// Fan index of the enumerated edge (p, other).
    pub fn fan_index_of(&self, p: &FareyVertex, other: &FareyVertex) -> Result<i64, FareyError> {
        let info = self.fans.get(p).ok_or(FareyError::UnknownVertex(*p))?;
        let raw = info.to_infinity.apply(other);
        debug_assert_eq!(raw.denominator(), 1, "not a neighbor of the tip");
        Ok(raw.numerator() - info.offset)
    }

    /// The fan window e_lo..e_hi at tip `p`, ordered along the horocycle.
    pub fn fan(&self, p: &FareyVertex, lo: i64, hi: i64) -> Result<Fan, FareyError> {
        let mut edges = Vec::new();
        for j in lo..=hi {
            match self.fan_edge(p, j)? {
                Some(id) => edges.push(id),
                None => return Err(FareyError::WindowExceedsDepth),
            }
        }
        Ok(Fan {
            tip: *p,
            first_index: lo,
            edges,
        })
    }

    /// The counter-clockwise quadruple (a, b, c, d) with a, c the endpoints of
    /// the edge and b, d the third vertices of its two adjacent triangles,
    /// with a the smaller endpoint.
    pub fn edge_quadruple_exact(&self, id: EdgeId) -> Result<[FareyVertex; 4], FareyError> {
        let e = &self.edges[id];
        let b1 = e.apexes[0].expect("every edge has one triangle");
        let b2 = e
            .apexes[1]
            .ok_or(FareyError::BoundaryEdgeAtDepth(e.v1, e.v2))?;
        let cand = [e.v1, b1, e.v2, b2];
        if is_ccw_exact(&cand) {
            Ok(cand)
        } else {
            let cand = [e.v1, b2, e.v2, b1];
            debug_assert!(is_ccw_exact(&cand));
            Ok(cand)
        }
    }

    pub fn edge_quadruple(&self, id: EdgeId) -> Result<Quadruple, FareyError> {
        let q = self.edge_quadruple_exact(id)?;
        Ok(Quadruple::new(
            q[0].to_point(),
            q[1].to_point(),
            q[2].to_point(),
            q[3].to_point(),
        )
        .expect("exact ccw quadruple converts cleanly"))
    }

    /// The quadruple {p, a_{m-k}, a_m, a_{m+k}} of fan-edge endpoints; its
    /// cross ratio is exactly 1 on the un-mapped tesselation.
    pub fn fan_quadruple_exact(
        &self,
        p: &FareyVertex,
        m: i64,
        k: u32,
    ) -> Result<[FareyVertex; 4], FareyError> {
        assert!(k >= 1, "fan quadruple needs a positive window radius");
        for j in [m - k as i64, m, m + k as i64] {
            if self.fan_edge(p, j)?.is_none() {
                return Err(FareyError::WindowExceedsDepth);
            }
        }
        let q = [
            *p,
            self.fan_vertex(p, m - k as i64)?,
            self.fan_vertex(p, m)?,
            self.fan_vertex(p, m + k as i64)?,
        ];
        debug_assert!(is_ccw_exact(&q), "fan quadruple out of order: {q:?}");
        Ok(q)
    }

    pub fn fan_quadruple(&self, p: &FareyVertex, m: i64, k: u32) -> Result<Quadruple, FareyError> {
        let q = self.fan_quadruple_exact(p, m, k)?;
        Ok(Quadruple::new(
            q[0].to_point(),
            q[1].to_point(),
            q[2].to_point(),
            q[3].to_point(),
        )
        .expect("exact ccw quadruple converts cleanly"))
    }

    /// Line-based text serialization: one edge per line "p/q r/s g".
    pub fn write_edge_listing<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        for e in &self.edges {
            writeln!(w, "{} {} {}", e.v1, e.v2, e.generation)?;
        }
        Ok(())
    }
}
