//! Closed interface curves with differential-geometric node data.

use std::f64::consts::TAU;

use super::spline::{CurvePoint, CurveSpline};
use super::{segments_intersect, GeometryError, ScalarField, Vec2, VectorField, DEGENERATE_PERIMETER};

/// A simple closed planar polyline, positively oriented, backed by a
/// piecewise-cubic interpolant for derivatives and arclength queries.
#[derive(Debug, Clone)]
pub struct InterfaceCurve {
    nodes: Vec<Vec2>,
    orientation: bool,
    spline: CurveSpline,
}

impl InterfaceCurve {
    /// Builds a curve from its node polygon. The polygon must be simple,
    /// non-degenerate and positively oriented (counterclockwise).
    pub fn new(nodes: Vec<Vec2>) -> Result<InterfaceCurve, GeometryError> {
        if nodes.len() < 3 {
            return Err(GeometryError::TooFewNodes { min: 3, got: nodes.len() });
        }
        for (i, p) in nodes.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(GeometryError::NonFiniteNode(i));
            }
        }
        let perimeter: f64 = polygon_perimeter(&nodes);
        if perimeter < DEGENERATE_PERIMETER {
            return Err(GeometryError::DegenerateCurve(perimeter));
        }
        if let Some((i, j)) = first_self_intersection(&nodes) {
            return Err(GeometryError::SelfIntersection(i, j));
        }
        if shoelace(&nodes) <= 0.0 {
            return Err(GeometryError::NotPositivelyOriented(0));
        }
        let spline = CurveSpline::build(&nodes);
        Ok(InterfaceCurve { nodes, orientation: true, spline })
    }

    /// Like [`InterfaceCurve::new`] but reverses the node order first when
    /// the polygon is negatively oriented.
    pub fn from_nodes_any_orientation(mut nodes: Vec<Vec2>) -> Result<InterfaceCurve, GeometryError> {
        if nodes.len() >= 3 && shoelace(&nodes) < 0.0 {
            nodes.reverse();
        }
        InterfaceCurve::new(nodes)
    }

    /// Circle of radius `r`, sampled with `n` equispaced nodes.
    pub fn circle(center: Vec2, r: f64, n: usize) -> InterfaceCurve {
        InterfaceCurve::from_polar(center, |_| r, n)
    }

    /// Polar graph `r(theta) = r + eps*cos(mode*theta)` around `center`.
    pub fn perturbed_circle(center: Vec2, r: f64, eps: f64, mode: u32, n: usize) -> InterfaceCurve {
        InterfaceCurve::from_polar(center, |th| r + eps * (mode as f64 * th).cos(), n)
    }

    /// Axis-aligned ellipse with semi-axes `a`, `b`.
    pub fn ellipse(center: Vec2, a: f64, b: f64, n: usize) -> InterfaceCurve {
        let nodes = (0..n)
            .map(|i| {
                let th = TAU * i as f64 / n as f64;
                center + Vec2::new(a * th.cos(), b * th.sin())
            })
            .collect();
        InterfaceCurve::new(nodes).expect("ellipse sampling is simple")
    }

    /// Star-shaped curve from a positive polar radius function.
    pub fn from_polar(center: Vec2, radius: impl Fn(f64) -> f64, n: usize) -> InterfaceCurve {
        let nodes = (0..n)
            .map(|i| {
                let th = TAU * i as f64 / n as f64;
                let r = radius(th);
                center + Vec2::new(r * th.cos(), r * th.sin())
            })
            .collect();
        InterfaceCurve::new(nodes).expect("polar sampling is simple")
    }

    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// True: positively oriented, phase on the left.
    pub fn orientation(&self) -> bool {
        self.orientation
    }

    pub fn spline(&self) -> &CurveSpline {
        &self.spline
    }

    /// Arclength of the smooth interpolant.
    pub fn perimeter(&self) -> f64 {
        self.spline.total_len()
    }

    /// Enclosed area of the smooth interpolant (positive, curves are CCW).
    /// Green's theorem evaluated exactly per spline piece; on polygons with
    /// corner nodes this reduces to the plain shoelace sum.
    pub fn enclosed_area(&self) -> f64 {
        self.spline.area()
    }

    /// Shoelace area of the node polygon.
    pub fn polygon_area(&self) -> f64 {
        shoelace(&self.nodes)
    }

    pub fn node_arclen(&self, i: usize) -> f64 {
        self.spline.node_arclen(i)
    }

    pub fn eval_at(&self, s: f64) -> CurvePoint {
        self.spline.eval_at(s)
    }

    /// Trapezoid arclength weight of each node (half the span between its
    /// neighbors along the interpolant).
    pub fn node_weights(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let total = self.spline.total_len();
        (0..n)
            .map(|i| {
                let prev = self.spline.node_arclen((i + n - 1) % n);
                let next = self.spline.node_arclen((i + 1) % n);
                let cur = self.spline.node_arclen(i);
                let fwd = (next - cur).rem_euclid(total);
                let bwd = (cur - prev).rem_euclid(total);
                0.5 * (fwd + bwd)
            })
            .collect()
    }

    pub fn mean_spacing(&self) -> f64 {
        self.perimeter() / self.nodes.len() as f64
    }

    pub fn min_spacing(&self) -> f64 {
        let n = self.nodes.len();
        (0..n)
            .map(|i| (self.nodes[(i + 1) % n] - self.nodes[i]).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Unit normals at the nodes (pointing into the phase).
    pub fn node_normals(&self) -> VectorField {
        VectorField::new(
            (0..self.nodes.len())
                .map(|i| self.spline.eval_at(self.spline.node_arclen(i)).normal)
                .collect(),
        )
    }

    pub fn node_tangents(&self) -> VectorField {
        VectorField::new(
            (0..self.nodes.len())
                .map(|i| self.spline.eval_at(self.spline.node_arclen(i)).tangent)
                .collect(),
        )
    }

    /// Per-node curvature by centered second differences of the arclength
    /// parametrization; `+1/R` on a disk of radius `R`. Assumes quasi-uniform
    /// node spacing (resample first).
    pub fn curvature(&self) -> ScalarField {
        let n = self.nodes.len();
        let values = (0..n)
            .map(|i| {
                let pm = self.nodes[(i + n - 1) % n];
                let p0 = self.nodes[i];
                let pp = self.nodes[(i + 1) % n];
                let hm = (p0 - pm).norm();
                let hp = (pp - p0).norm();
                let denom = hm * hp * (hm + hp);
                // nonuniform 3-point first and second derivative
                let d1 = (hm * hm * pp + (hp * hp - hm * hm) * p0 - hp * hp * pm) / denom;
                let d2 = 2.0 * (hm * pp - (hm + hp) * p0 + hp * pm) / denom;
                let speed = d1.norm();
                (d1.x * d2.y - d1.y * d2.x) / (speed * speed * speed)
            })
            .collect();
        ScalarField::new(values)
    }

    /// Redistributes `n` nodes equispaced in arclength of the interpolant.
    /// Corner nodes are preserved; arcs between corners receive node counts
    /// proportional to their length.
    pub fn resample(&self, n: usize) -> Result<InterfaceCurve, GeometryError> {
        if n < 8 {
            return Err(GeometryError::TooFewNodes { min: 8, got: n });
        }
        let total = self.perimeter();
        if total < DEGENERATE_PERIMETER {
            return Err(GeometryError::DegenerateCurve(total));
        }
        let nodes = if self.spline.has_corners() {
            self.resample_with_corners(n)?
        } else {
            self.spline.equispaced_points(n)
        };
        InterfaceCurve::new(nodes)
    }

    fn resample_with_corners(&self, n: usize) -> Result<Vec<Vec2>, GeometryError> {
        // section boundaries from corner arclengths
        let corners: Vec<f64> = {
            let mut v = Vec::new();
            let count = self.nodes.len();
            for i in 0..count {
                let prev = self.nodes[(i + count - 1) % count];
                let next = self.nodes[(i + 1) % count];
                let e0 = self.nodes[i] - prev;
                let e1 = next - self.nodes[i];
                let cross = e0.x * e1.y - e0.y * e1.x;
                if cross.atan2(e0.dot(&e1)).abs() > super::spline::CORNER_ANGLE {
                    v.push(self.spline.node_arclen(i));
                }
            }
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        };
        let total = self.perimeter();
        let k = corners.len();
        if n < 2 * k {
            return Err(GeometryError::TooFewNodes { min: 2 * k, got: n });
        }
        let lengths: Vec<f64> = (0..k)
            .map(|i| {
                let s0 = corners[i];
                let s1 = corners[(i + 1) % k];
                let len = (s1 - s0).rem_euclid(total);
                if len == 0.0 {
                    total
                } else {
                    len
                }
            })
            .collect();
        // one interval per section up front, remainder split proportionally
        // by length (largest-remainder rounding keeps the total exact)
        let spare = n - k;
        let ideal: Vec<f64> = lengths.iter().map(|l| l / total * spare as f64).collect();
        let mut counts: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
        let mut left = spare - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            let fa = ideal[a] - ideal[a].floor();
            let fb = ideal[b] - ideal[b].floor();
            fb.partial_cmp(&fa).unwrap()
        });
        for &i in &order {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }
        // section i emits nodes j = 0..m_i-1; the closing corner is emitted
        // by the next section as its j = 0
        let mut out = Vec::with_capacity(n);
        for i in 0..k {
            let m = counts[i] + 1;
            for j in 0..m {
                let s = corners[i] + lengths[i] * j as f64 / m as f64;
                out.push(self.spline.point_at(s));
            }
        }
        Ok(out)
    }

    pub fn translate(&self, shift: Vec2) -> InterfaceCurve {
        let nodes = self.nodes.iter().map(|p| p + shift).collect();
        InterfaceCurve::new(nodes).expect("translation preserves validity")
    }

    pub fn is_simple(&self) -> bool {
        first_self_intersection(&self.nodes).is_none()
    }
}

pub(crate) fn shoelace(nodes: &[Vec2]) -> f64 {
    let n = nodes.len();
    let mut sum = 0.0;
    for i in 0..n {
        let p = nodes[i];
        let q = nodes[(i + 1) % n];
        sum += p.x * q.y - q.x * p.y;
    }
    0.5 * sum
}

pub(crate) fn polygon_perimeter(nodes: &[Vec2]) -> f64 {
    let n = nodes.len();
    (0..n).map(|i| (nodes[(i + 1) % n] - nodes[i]).norm()).sum()
}

/// Self-intersection scan with an x-sorted sweep: only segment pairs whose
/// x-ranges overlap are tested, which is near-linear for resolved curves.
fn first_self_intersection(nodes: &[Vec2]) -> Option<(usize, usize)> {
    let n = nodes.len();
    let seg = |i: usize| (nodes[i], nodes[(i + 1) % n]);
    let mut order: Vec<usize> = (0..n).collect();
    let xmin = |i: usize| {
        let (a, b) = seg(i);
        a.x.min(b.x)
    };
    let xmax = |i: usize| {
        let (a, b) = seg(i);
        a.x.max(b.x)
    };
    order.sort_by(|&a, &b| xmin(a).partial_cmp(&xmin(b)).unwrap());
    for (rank, &i) in order.iter().enumerate() {
        let hi = xmax(i);
        for &j in &order[rank + 1..] {
            if xmin(j) > hi {
                break;
            }
            // adjacent segments share an endpoint, not an intersection
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            if adjacent {
                continue;
            }
            let (a0, a1) = seg(i);
            let (b0, b1) = seg(j);
            if segments_intersect(a0, a1, b0, b1) {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}
