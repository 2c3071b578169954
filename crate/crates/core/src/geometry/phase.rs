//! Phase sets: finite unions of disjoint interface curves inside a box.

use std::cell::OnceCell;

use serde::{Deserialize, Serialize};

use super::curve::InterfaceCurve;
use super::spline::CurvePoint;
use super::{
    point_in_polygon, point_segment_distance, segments_intersect, GeometryError, Vec2,
};

/// Axis-aligned domain box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Rect {
        Rect { min: Vec2::new(xmin, ymin), max: Vec2::new(xmax, ymax) }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    /// Distance from `p` to the box edges (positive inside).
    pub fn edge_clearance(&self, p: Vec2) -> f64 {
        (p.x - self.min.x)
            .min(self.max.x - p.x)
            .min(p.y - self.min.y)
            .min(self.max.y - p.y)
    }
}

impl Serialize for Rect {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.min.x, self.min.y, self.max.x, self.max.y].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rect {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Rect, D::Error> {
        let v = <[f64; 4]>::deserialize(d)?;
        Ok(Rect::new(v[0], v[1], v[2], v[3]))
    }
}

/// Result of a nearest-point projection onto a phase boundary.
#[derive(Debug, Clone, Copy)]
pub struct Projection {
    pub component: usize,
    /// nearest interface point with its differential data
    pub point: CurvePoint,
    /// unsigned distance from the query to the interface
    pub distance: f64,
    /// false when the query lies outside the tubular neighborhood, where
    /// uniqueness of the nearest point is not guaranteed
    pub unique: bool,
}

/// An open phase bounded by finitely many disjoint positively-oriented
/// interface curves, compactly contained in a domain box.
#[derive(Debug, Clone)]
pub struct PhaseSet {
    components: Vec<InterfaceCurve>,
    bbox: Rect,
    tubular: OnceCell<Option<f64>>,
}

impl PhaseSet {
    pub fn new(components: Vec<InterfaceCurve>, bbox: Rect) -> Result<PhaseSet, GeometryError> {
        if components.is_empty() {
            return Err(GeometryError::EmptyPhase);
        }
        for (ci, c) in components.iter().enumerate() {
            for p in c.nodes() {
                if !bbox.contains(*p) || bbox.edge_clearance(*p) <= 0.0 {
                    return Err(GeometryError::OutsideBox(ci));
                }
            }
        }
        // pairwise disjoint and non-nested
        for a in 0..components.len() {
            for b in a + 1..components.len() {
                if curves_overlap(&components[a], &components[b]) {
                    return Err(GeometryError::ComponentsOverlap(a, b));
                }
            }
        }
        Ok(PhaseSet { components, bbox, tubular: OnceCell::new() })
    }

    /// Constructor for callers that already validated the parts (the time
    /// stepper re-checks intersections itself every step).
    pub(crate) fn from_validated_parts(components: Vec<InterfaceCurve>, bbox: Rect) -> PhaseSet {
        PhaseSet { components, bbox, tubular: OnceCell::new() }
    }

    pub fn single(curve: InterfaceCurve, bbox: Rect) -> Result<PhaseSet, GeometryError> {
        PhaseSet::new(vec![curve], bbox)
    }

    pub fn components(&self) -> &[InterfaceCurve] {
        &self.components
    }

    pub fn bounding_box(&self) -> Rect {
        self.bbox
    }

    pub fn enclosed_area(&self) -> f64 {
        self.components.iter().map(|c| c.enclosed_area()).sum()
    }

    pub fn perimeter(&self) -> f64 {
        self.components.iter().map(|c| c.perimeter()).sum()
    }

    pub fn total_nodes(&self) -> usize {
        self.components.iter().map(|c| c.node_count()).sum()
    }

    /// Even-odd membership against the node polygons.
    pub fn contains(&self, x: Vec2) -> bool {
        self.components.iter().any(|c| point_in_polygon(c.nodes(), x))
    }

    /// Nearest point on any component boundary.
    pub fn project(&self, x: Vec2) -> Projection {
        let mut best: Option<(usize, CurvePoint, f64)> = None;
        for (ci, c) in self.components.iter().enumerate() {
            let cp = c.spline().project(x, None);
            let d = (x - cp.position).norm();
            if best.as_ref().map_or(true, |(_, _, bd)| d < *bd) {
                best = Some((ci, cp, d));
            }
        }
        let (component, point, distance) = best.expect("phase set is nonempty");
        let unique = match self.tubular_width() {
            Ok(ell) => distance < ell,
            Err(_) => false,
        };
        Projection { component, point, distance, unique }
    }

    /// Signed distance to the phase boundary, positive inside the phase, so
    /// that its gradient is the inward normal.
    pub fn signed_distance(&self, x: Vec2) -> f64 {
        let proj = self.project(x);
        if self.contains(x) {
            proj.distance
        } else {
            -proj.distance
        }
    }

    /// Largest curvature magnitude over all components (dense samples of the
    /// interpolant).
    pub fn max_curvature(&self) -> f64 {
        let mut m: f64 = 0.0;
        for c in self.components() {
            let n = c.node_count();
            for i in 0..2 * n {
                let s = c.perimeter() * i as f64 / (2 * n) as f64;
                m = m.max(c.eval_at(s).curvature.abs());
            }
        }
        m
    }

    /// Minimal distance between distinct components (node-to-segment).
    pub fn min_component_gap(&self) -> f64 {
        let k = self.components.len();
        if k < 2 {
            return f64::INFINITY;
        }
        let mut gap = f64::INFINITY;
        for a in 0..k {
            for b in 0..k {
                if a == b {
                    continue;
                }
                let nodes_b = self.components[b].nodes();
                let nb = nodes_b.len();
                for p in self.components[a].nodes() {
                    for j in 0..nb {
                        let d = point_segment_distance(*p, nodes_b[j], nodes_b[(j + 1) % nb]);
                        if d < gap {
                            gap = d;
                        }
                    }
                }
            }
        }
        gap
    }

    /// Minimal node distance to the domain box edges.
    pub fn boundary_clearance(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.nodes().iter())
            .map(|p| self.bbox.edge_clearance(*p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Tubular neighborhood width: `0.9 * min(1/max|H|, gap/2, clearance)`.
    /// Within this distance of the interface the nearest-point projection is
    /// single-valued.
    pub fn tubular_width(&self) -> Result<f64, GeometryError> {
        let cached = self.tubular.get_or_init(|| {
            let kappa = self.max_curvature();
            let reach = if kappa > 0.0 { 1.0 / kappa } else { f64::INFINITY };
            let ell = 0.9 * reach.min(0.5 * self.min_component_gap()).min(self.boundary_clearance());
            (ell.is_finite() && ell > 0.0).then_some(ell)
        });
        cached.ok_or(GeometryError::InvalidTubularWidth(0.0))
    }

    pub fn translate(&self, shift: Vec2) -> Result<PhaseSet, GeometryError> {
        let components = self.components.iter().map(|c| c.translate(shift)).collect();
        PhaseSet::new(components, self.bbox)
    }
}

fn curves_overlap(a: &InterfaceCurve, b: &InterfaceCurve) -> bool {
    let na = a.nodes();
    let nb = b.nodes();
    // x-sorted sweep over b's segments
    let seg_b = |j: usize| (nb[j], nb[(j + 1) % nb.len()]);
    let mut order: Vec<usize> = (0..nb.len()).collect();
    order.sort_by(|&p, &q| {
        let xp = seg_b(p).0.x.min(seg_b(p).1.x);
        let xq = seg_b(q).0.x.min(seg_b(q).1.x);
        xp.partial_cmp(&xq).unwrap()
    });
    let starts: Vec<f64> = order.iter().map(|&j| seg_b(j).0.x.min(seg_b(j).1.x)).collect();
    for i in 0..na.len() {
        let a0 = na[i];
        let a1 = na[(i + 1) % na.len()];
        let lo = a0.x.min(a1.x);
        let hi = a0.x.max(a1.x);
        for k in 0..order.len() {
            if starts[k] > hi {
                break;
            }
            let (b0, b1) = seg_b(order[k]);
            if b0.x.max(b1.x) < lo {
                continue;
            }
            if segments_intersect(a0, a1, b0, b1) {
                return true;
            }
        }
    }
    // nesting: any node of one inside the other
    point_in_polygon(nb, na[0]) || point_in_polygon(na, nb[0])
}

// --- serialization -----------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CurveRepr {
    orientation: bool,
    nodes: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct PhaseRepr {
    #[serde(rename = "box")]
    bbox: Rect,
    components: Vec<CurveRepr>,
}

impl Serialize for PhaseSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = PhaseRepr {
            bbox: self.bbox,
            components: self
                .components
                .iter()
                .map(|c| CurveRepr {
                    orientation: c.orientation(),
                    nodes: c.nodes().iter().map(|p| [p.x, p.y]).collect(),
                })
                .collect(),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PhaseSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<PhaseSet, D::Error> {
        let repr = PhaseRepr::deserialize(d)?;
        let mut components = Vec::with_capacity(repr.components.len());
        for (i, c) in repr.components.into_iter().enumerate() {
            let nodes: Vec<Vec2> = c.nodes.into_iter().map(|p| Vec2::new(p[0], p[1])).collect();
            let curve = if c.orientation {
                InterfaceCurve::new(nodes)
            } else {
                InterfaceCurve::from_nodes_any_orientation(nodes)
            }
            .map_err(|e| serde::de::Error::custom(format!("component {i}: {e}")))?;
            components.push(curve);
        }
        PhaseSet::new(components, repr.bbox).map_err(serde::de::Error::custom)
    }
}
