//! Planar closed-curve geometry: interface curves, phase sets, signed
//! distance, nearest-point projection and tubular neighborhood widths.
//!
//! Conventions, fixed once for the whole crate:
//! - components are positively oriented (counterclockwise), so the enclosed
//!   phase lies on the left of the traversal direction;
//! - the unit normal points INTO the phase;
//! - the signed distance is positive inside the phase, and its gradient
//!   equals the normal;
//! - curvature is positive for a convex phase (a disk of radius `R` has
//!   curvature `+1/R`).

mod curve;
mod phase;
mod spline;

pub use curve::InterfaceCurve;
pub use phase::{PhaseSet, Projection, Rect};
pub use spline::{CurvePoint, CurveSpline, PeriodicSpline1D, CORNER_ANGLE};

pub(crate) use curve::shoelace as polygon_area_of;

use thiserror::Error;

pub type Vec2 = nalgebra::Vector2<f64>;

/// Perimeters below this are treated as degenerate.
pub const DEGENERATE_PERIMETER: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("curve needs at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("nonfinite coordinate at node {0}")]
    NonFiniteNode(usize),
    #[error("degenerate curve: perimeter {0:.3e} below tolerance")]
    DegenerateCurve(f64),
    #[error("curve self-intersects (segments {0} and {1})")]
    SelfIntersection(usize, usize),
    #[error("component {0} is not positively oriented")]
    NotPositivelyOriented(usize),
    #[error("components {0} and {1} intersect or are nested")]
    ComponentsOverlap(usize, usize),
    #[error("component {0} is not strictly inside the domain box")]
    OutsideBox(usize),
    #[error("invalid tubular width {0:.3e}")]
    InvalidTubularWidth(f64),
    #[error("phase set has no components")]
    EmptyPhase,
}

/// Scalar samples aligned with the nodes of an interface curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> ScalarField {
        assert!(values.iter().all(|v| v.is_finite()), "nonfinite field value");
        ScalarField { values }
    }

    pub fn constant(value: f64, len: usize) -> ScalarField {
        ScalarField::new(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField::new(self.values.iter().map(|&v| f(v)).collect())
    }
}

impl std::ops::Index<usize> for ScalarField {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Vector samples aligned with the nodes of an interface curve.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    values: Vec<Vec2>,
}

impl VectorField {
    pub fn new(values: Vec<Vec2>) -> VectorField {
        assert!(
            values.iter().all(|v| v.x.is_finite() && v.y.is_finite()),
            "nonfinite field value"
        );
        VectorField { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Vec2] {
        &self.values
    }
}

impl std::ops::Index<usize> for VectorField {
    type Output = Vec2;
    fn index(&self, i: usize) -> &Vec2 {
        &self.values[i]
    }
}

/// Proper intersection test for segments `a0-a1` and `b0-b1`, excluding
/// shared endpoints.
pub(crate) fn segments_intersect(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> bool {
    // bounding-box reject
    if a0.x.max(a1.x) < b0.x.min(b1.x)
        || b0.x.max(b1.x) < a0.x.min(a1.x)
        || a0.y.max(a1.y) < b0.y.min(b1.y)
        || b0.y.max(b1.y) < a0.y.min(a1.y)
    {
        return false;
    }
    let d = |p: Vec2, q: Vec2, r: Vec2| (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    let d1 = d(b0, b1, a0);
    let d2 = d(b0, b1, a1);
    let d3 = d(a0, a1, b0);
    let d4 = d(a0, a1, b1);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Even-odd point-in-polygon test on the node polygon.
pub(crate) fn point_in_polygon(nodes: &[Vec2], p: Vec2) -> bool {
    let mut inside = false;
    let n = nodes.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (nodes[i], nodes[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let t = (p.y - a.y) / (b.y - a.y);
            if p.x < a.x + t * (b.x - a.x) {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `p` to the segment `a-b`.
pub(crate) fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + t * ab)).norm()
}

fn directed_hausdorff(a: &PhaseSet, b: &PhaseSet) -> f64 {
    let mut worst: f64 = 0.0;
    for ca in a.components() {
        for p in ca.nodes() {
            let mut best = f64::INFINITY;
            for cb in b.components() {
                let nodes = cb.nodes();
                let n = nodes.len();
                for j in 0..n {
                    let d = point_segment_distance(*p, nodes[j], nodes[(j + 1) % n]);
                    if d < best {
                        best = d;
                    }
                }
            }
            worst = worst.max(best);
        }
    }
    worst
}

/// Symmetric Hausdorff distance between the interfaces of two phase sets
/// (node-to-polyline).
pub fn hausdorff_distance(a: &PhaseSet, b: &PhaseSet) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// Fan/ear-clipping triangulation of a simple polygon. Returns triangles
/// with the polygon's orientation.
pub fn triangulate_polygon(nodes: &[Vec2]) -> Vec<[Vec2; 3]> {
    let mut idx: Vec<usize> = (0..nodes.len()).collect();
    let mut tris = Vec::with_capacity(nodes.len().saturating_sub(2));
    let area2 = |a: Vec2, b: Vec2, c: Vec2| (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    let mut guard = 0usize;
    while idx.len() > 3 && guard < nodes.len() * nodes.len() {
        guard += 1;
        let m = idx.len();
        let mut clipped = false;
        for k in 0..m {
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (nodes[ia], nodes[ib], nodes[ic]);
            if area2(a, b, c) <= 0.0 {
                continue; // reflex corner (polygons are CCW)
            }
            // no other vertex inside the candidate ear
            let ear_ok = idx.iter().all(|&j| {
                if j == ia || j == ib || j == ic {
                    return true;
                }
                let p = nodes[j];
                let s0 = area2(a, b, p);
                let s1 = area2(b, c, p);
                let s2 = area2(c, a, p);
                !(s0 >= 0.0 && s1 >= 0.0 && s2 >= 0.0)
            });
            if ear_ok {
                tris.push([a, b, c]);
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        if !clipped {
            break; // numerically degenerate; fall through with what we have
        }
    }
    if idx.len() == 3 {
        tris.push([nodes[idx[0]], nodes[idx[1]], nodes[idx[2]]]);
    }
    tris
}

/// Integral of `f` over the region enclosed by a simple CCW polygon, using
/// the edge-midpoint rule per triangle (exact for quadratic `f`).
pub fn integrate_over_polygon(nodes: &[Vec2], f: &dyn Fn(Vec2) -> f64) -> f64 {
    let mut acc = 0.0;
    for [a, b, c] in triangulate_polygon(nodes) {
        let area = 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
        let m0 = 0.5 * (a + b);
        let m1 = 0.5 * (b + c);
        let m2 = 0.5 * (c + a);
        acc += area * (f(m0) + f(m1) + f(m2)) / 3.0;
    }
    acc
}

/// Integral of `f` over a phase (sum over components).
pub fn integrate_over_phase(phase: &PhaseSet, f: &dyn Fn(Vec2) -> f64) -> f64 {
    phase
        .components()
        .iter()
        .map(|c| integrate_over_polygon(c.nodes(), f))
        .sum()
}
