//! Piecewise-cubic interpolation of closed node polygons.
//!
//! Smooth curves get a single periodic cubic spline in the chordal parameter.
//! Nodes where the discrete turning angle exceeds [`CORNER_ANGLE`] act as
//! breakpoints; the arcs between consecutive corners are interpolated by
//! natural cubic splines so that straight-sided polygons stay straight-sided.
//! The public parametrization is global arclength `s in [0, L)`.

use crate::geometry::Vec2;

/// Turning angle (radians) above which a node is treated as a corner.
/// A 16-node circle turns 2*pi/16 ~ 0.39 per node, so 45 degrees leaves
/// smooth curves comfortably below the threshold.
pub const CORNER_ANGLE: f64 = std::f64::consts::FRAC_PI_4;

const ARC_SUBSAMPLES: usize = 8;

/// Gauss-Legendre nodes/weights on [0,1], 4 points.
const GL4: [(f64, f64); 4] = [
    (0.069431844202973714, 0.173927422568727_f64),
    (0.330009478207571868, 0.326072577431273),
    (0.669990521792428132, 0.326072577431273),
    (0.930568155797026286, 0.173927422568727),
];

/// One cubic piece `p(u) = a + b u + c u^2 + d u^3` with `u = t - t_i`.
#[derive(Debug, Clone, Copy)]
struct Cubic {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Cubic {
    #[inline]
    fn eval(&self, u: f64) -> f64 {
        self.a + u * (self.b + u * (self.c + u * self.d))
    }
    #[inline]
    fn deriv(&self, u: f64) -> f64 {
        self.b + u * (2.0 * self.c + 3.0 * u * self.d)
    }
    #[inline]
    fn deriv2(&self, u: f64) -> f64 {
        2.0 * self.c + 6.0 * u * self.d
    }
}

/// Thomas algorithm; `a` subdiagonal, `b` diagonal, `c` superdiagonal.
/// `a[0]` and `c[n-1]` are ignored.
fn solve_tridiag(a: &[f64], b: &[f64], c: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = rhs[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = if i < n - 1 { c[i] / m } else { 0.0 };
        dp[i] = (rhs[i] - a[i] * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// Cyclic tridiagonal solve (Sherman-Morrison over two Thomas solves).
/// The corner entries are `A[0][n-1] = a[0]` and `A[n-1][0] = c[n-1]`.
fn solve_cyclic_tridiag(a: &[f64], b: &[f64], c: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = b.len();
    assert!(n >= 3);
    let corner_top = a[0];
    let corner_bottom = c[n - 1];
    let gamma = -b[0];
    let mut bb = b.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= corner_top * corner_bottom / gamma;
    let x = solve_tridiag(a, &bb, c, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = corner_bottom;
    let z = solve_tridiag(a, &bb, c, &u);
    let fact =
        (x[0] + corner_top * x[n - 1] / gamma) / (1.0 + z[0] + corner_top * z[n - 1] / gamma);
    x.iter().zip(z.iter()).map(|(xi, zi)| xi - fact * zi).collect()
}

/// Cubic-spline second derivatives for data `(t_i, v_i)`. For the periodic
/// case `v[m] == v[0]` and the returned moments cover indices `0..m`.
fn spline_moments(t: &[f64], v: &[f64], periodic: bool) -> Vec<f64> {
    let m = t.len() - 1;
    if periodic {
        let n = m;
        let h = |i: usize| t[i + 1] - t[i];
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let hm = if i == 0 { h(m - 1) } else { h(i - 1) };
            let hp = h(i);
            let vm = if i == 0 { v[m - 1] } else { v[i - 1] };
            let vp = v[i + 1];
            sub[i] = hm / 6.0;
            diag[i] = (hm + hp) / 3.0;
            sup[i] = hp / 6.0;
            rhs[i] = (vp - v[i]) / hp - (v[i] - vm) / hm;
        }
        solve_cyclic_tridiag(&sub, &diag, &sup, &rhs)
    } else {
        // natural ends: M_0 = M_m = 0
        let mut moments = vec![0.0; m + 1];
        if m >= 2 {
            let n = m - 1;
            let mut sub = vec![0.0; n];
            let mut diag = vec![0.0; n];
            let mut sup = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            for k in 0..n {
                let i = k + 1;
                let hm = t[i] - t[i - 1];
                let hp = t[i + 1] - t[i];
                sub[k] = hm / 6.0;
                diag[k] = (hm + hp) / 3.0;
                sup[k] = hp / 6.0;
                rhs[k] = (v[i + 1] - v[i]) / hp - (v[i] - v[i - 1]) / hm;
            }
            let sol = solve_tridiag(&sub, &diag, &sup, &rhs);
            moments[1..=n].copy_from_slice(&sol);
        }
        moments
    }
}

fn moments_to_cubics(t: &[f64], v: &[f64], moments: &[f64], periodic: bool) -> Vec<Cubic> {
    let m = t.len() - 1;
    let mom = |i: usize| if periodic { moments[i % m] } else { moments[i] };
    (0..m)
        .map(|i| {
            let h = t[i + 1] - t[i];
            let (mi, mj) = (mom(i), mom(i + 1));
            let a = v[i];
            let b = (v[i + 1] - v[i]) / h - h * (2.0 * mi + mj) / 6.0;
            let c = mi / 2.0;
            let d = (mj - mi) / (6.0 * h);
            Cubic { a, b, c, d }
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Section {
    /// chordal knot parameters, length = intervals + 1
    t: Vec<f64>,
    x: Vec<Cubic>,
    y: Vec<Cubic>,
    /// dense arclength table for inversion (ARC_SUBSAMPLES per interval)
    table_t: Vec<f64>,
    table_s: Vec<f64>,
    len: f64,
    periodic: bool,
}

impl Section {
    fn build(points: &[Vec2], periodic: bool) -> Section {
        let m = if periodic { points.len() } else { points.len() - 1 };
        let mut t = Vec::with_capacity(m + 1);
        t.push(0.0);
        for i in 0..m {
            let p = points[i];
            let q = points[(i + 1) % points.len()];
            t.push(t[i] + (q - p).norm());
        }
        let mut vx: Vec<f64> = points.iter().map(|p| p.x).collect();
        let mut vy: Vec<f64> = points.iter().map(|p| p.y).collect();
        if periodic {
            vx.push(points[0].x);
            vy.push(points[0].y);
        }
        let (x, y) = if periodic && points.len() >= 3 {
            let mx = spline_moments(&t, &vx, true);
            let my = spline_moments(&t, &vy, true);
            (
                moments_to_cubics(&t, &vx, &mx, true),
                moments_to_cubics(&t, &vy, &my, true),
            )
        } else {
            let mx = spline_moments(&t, &vx, false);
            let my = spline_moments(&t, &vy, false);
            (
                moments_to_cubics(&t, &vx, &mx, false),
                moments_to_cubics(&t, &vy, &my, false),
            )
        };

        let mut sec = Section {
            t,
            x,
            y,
            table_t: Vec::new(),
            table_s: Vec::new(),
            len: 0.0,
            periodic,
        };
        sec.build_arclength();
        sec
    }

    fn speed(&self, idx: usize, u: f64) -> f64 {
        let dx = self.x[idx].deriv(u);
        let dy = self.y[idx].deriv(u);
        dx.hypot(dy)
    }

    fn build_arclength(&mut self) {
        let m = self.x.len();
        let mut table_t = Vec::with_capacity(m * ARC_SUBSAMPLES + 1);
        let mut table_s = Vec::with_capacity(m * ARC_SUBSAMPLES + 1);
        table_t.push(self.t[0]);
        table_s.push(0.0);
        let mut s = 0.0;
        for i in 0..m {
            let h = self.t[i + 1] - self.t[i];
            let sub = h / ARC_SUBSAMPLES as f64;
            for k in 0..ARC_SUBSAMPLES {
                let u0 = k as f64 * sub;
                let mut ds = 0.0;
                for (q, w) in GL4 {
                    ds += w * self.speed(i, u0 + q * sub);
                }
                s += ds * sub;
                table_t.push(self.t[i] + (k + 1) as f64 * sub);
                table_s.push(s);
            }
        }
        self.len = s;
        self.table_t = table_t;
        self.table_s = table_s;
    }

    fn interval_of(&self, t: f64) -> (usize, f64) {
        let m = self.x.len();
        let idx = match self.t.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(m - 1),
            Err(i) => i.saturating_sub(1).min(m - 1),
        };
        (idx, t - self.t[idx])
    }

    fn point(&self, t: f64) -> Vec2 {
        let (i, u) = self.interval_of(t);
        Vec2::new(self.x[i].eval(u), self.y[i].eval(u))
    }

    fn deriv(&self, t: f64) -> Vec2 {
        let (i, u) = self.interval_of(t);
        Vec2::new(self.x[i].deriv(u), self.y[i].deriv(u))
    }

    fn deriv2(&self, t: f64) -> Vec2 {
        let (i, u) = self.interval_of(t);
        Vec2::new(self.x[i].deriv2(u), self.y[i].deriv2(u))
    }

    /// Arclength from the section start to chordal parameter `t`.
    fn arclen_at(&self, t: f64) -> f64 {
        let (i, u) = self.interval_of(t);
        let h = self.t[i + 1] - self.t[i];
        let sub = h / ARC_SUBSAMPLES as f64;
        let k = ((u / sub) as usize).min(ARC_SUBSAMPLES - 1);
        let base_idx = i * ARC_SUBSAMPLES + k;
        let t0 = self.table_t[base_idx];
        let span = t - t0;
        let mut ds = 0.0;
        for (q, w) in GL4 {
            ds += w * self.speed(i, t0 - self.t[i] + q * span);
        }
        self.table_s[base_idx] + ds * span
    }

    /// Chordal parameter at arclength `s` from the section start.
    fn param_at_arclen(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.len);
        let idx = match self.table_s.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
        .min(self.table_s.len() - 2);
        let (s0, s1) = (self.table_s[idx], self.table_s[idx + 1]);
        let (t0, t1) = (self.table_t[idx], self.table_t[idx + 1]);
        let mut t = if s1 > s0 { t0 + (t1 - t0) * (s - s0) / (s1 - s0) } else { t0 };
        let t_end = *self.t.last().unwrap();
        for _ in 0..3 {
            let f = self.arclen_at(t) - s;
            let (i, u) = self.interval_of(t);
            let sp = self.speed(i, u);
            if sp <= 0.0 {
                break;
            }
            t = (t - f / sp).clamp(0.0, t_end);
        }
        t
    }

    fn wrap_param(&self, t: f64) -> f64 {
        let t_end = *self.t.last().unwrap();
        if self.periodic {
            t.rem_euclid(t_end)
        } else {
            t.clamp(0.0, t_end)
        }
    }
}

/// A point on the curve together with its local differential data.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    /// global arclength coordinate in `[0, L)`
    pub arclen: f64,
    pub position: Vec2,
    /// unit tangent in traversal direction
    pub tangent: Vec2,
    /// unit normal, tangent rotated by +90 degrees (points into the enclosed
    /// phase for positively oriented curves)
    pub normal: Vec2,
    /// signed curvature, positive for a convex positively-oriented curve
    pub curvature: f64,
}

#[derive(Debug, Clone)]
pub struct CurveSpline {
    sections: Vec<Section>,
    /// global arclength of each section start
    offsets: Vec<f64>,
    total_len: f64,
    /// arclength of each original node
    node_arclen: Vec<f64>,
    node_pos: Vec<Vec2>,
    has_corners: bool,
}

impl CurveSpline {
    /// Interpolates the closed polygon `nodes` (positively oriented).
    pub fn build(nodes: &[Vec2]) -> CurveSpline {
        let n = nodes.len();
        let corners: Vec<usize> = (0..n)
            .filter(|&i| {
                let prev = nodes[(i + n - 1) % n];
                let next = nodes[(i + 1) % n];
                let e0 = nodes[i] - prev;
                let e1 = next - nodes[i];
                let cross = e0.x * e1.y - e0.y * e1.x;
                let dot = e0.dot(&e1);
                cross.atan2(dot).abs() > CORNER_ANGLE
            })
            .collect();

        if corners.is_empty() {
            let section = Section::build(nodes, true);
            let total = section.len;
            let node_arclen = (0..n).map(|i| section.arclen_at(section.t[i])).collect();
            return CurveSpline {
                sections: vec![section],
                offsets: vec![0.0],
                total_len: total,
                node_arclen,
                node_pos: nodes.to_vec(),
                has_corners: false,
            };
        }

        // one natural-spline section per corner-to-corner arc
        let mut sections = Vec::with_capacity(corners.len());
        let mut node_section = vec![(0usize, 0usize); n];
        for (ci, &start) in corners.iter().enumerate() {
            let end = corners[(ci + 1) % corners.len()];
            let mut pts = Vec::new();
            let mut i = start;
            loop {
                node_section[i] = (ci, pts.len());
                pts.push(nodes[i]);
                i = (i + 1) % n;
                if i == end {
                    break;
                }
            }
            pts.push(nodes[end]);
            sections.push(Section::build(&pts, false));
        }
        let mut offsets = Vec::with_capacity(sections.len());
        let mut total = 0.0;
        for sec in &sections {
            offsets.push(total);
            total += sec.len;
        }
        let node_arclen = (0..n)
            .map(|i| {
                let (si, li) = node_section[i];
                offsets[si] + sections[si].arclen_at(sections[si].t[li])
            })
            .collect();
        CurveSpline {
            sections,
            offsets,
            total_len: total,
            node_arclen,
            node_pos: nodes.to_vec(),
            has_corners: true,
        }
    }

    pub fn total_len(&self) -> f64 {
        self.total_len
    }

    /// Enclosed area of the closed interpolant by the Green integral
    /// `1/2 \oint (x y' - y x') dt`; the integrand is polynomial of degree
    /// six per knot interval, so the 4-point Gauss rule is exact.
    pub fn area(&self) -> f64 {
        let mut acc = 0.0;
        for sec in &self.sections {
            for i in 0..sec.x.len() {
                let h = sec.t[i + 1] - sec.t[i];
                for (q, w) in GL4 {
                    let u = q * h;
                    let x = sec.x[i].eval(u);
                    let y = sec.y[i].eval(u);
                    let dx = sec.x[i].deriv(u);
                    let dy = sec.y[i].deriv(u);
                    acc += w * (x * dy - y * dx) * h;
                }
            }
        }
        0.5 * acc
    }

    pub fn has_corners(&self) -> bool {
        self.has_corners
    }

    pub fn node_arclen(&self, i: usize) -> f64 {
        self.node_arclen[i]
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let mut s = s.rem_euclid(self.total_len);
        if !s.is_finite() {
            s = 0.0;
        }
        let mut si = match self.offsets.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        si = si.min(self.sections.len() - 1);
        (si, s - self.offsets[si])
    }

    pub fn point_at(&self, s: f64) -> Vec2 {
        let (si, local) = self.locate(s);
        let sec = &self.sections[si];
        sec.point(sec.param_at_arclen(local))
    }

    /// `n` points equispaced in arclength starting at `s = 0`, computed in
    /// one monotone pass over the arclength table (the bulk of resampling).
    pub fn equispaced_points(&self, n: usize) -> Vec<Vec2> {
        let mut out = Vec::with_capacity(n);
        let step = self.total_len / n as f64;
        let mut si = 0usize;
        let mut cursor = 0usize;
        for j in 0..n {
            let target = step * j as f64;
            while si + 1 < self.sections.len() && target >= self.offsets[si + 1] {
                si += 1;
                cursor = 0;
            }
            let sec = &self.sections[si];
            let local = target - self.offsets[si];
            while cursor + 1 < sec.table_s.len() && sec.table_s[cursor + 1] < local {
                cursor += 1;
            }
            let (s0, s1) = (sec.table_s[cursor], sec.table_s[cursor + 1]);
            let (t0, t1) = (sec.table_t[cursor], sec.table_t[cursor + 1]);
            let mut t = if s1 > s0 { t0 + (t1 - t0) * (local - s0) / (s1 - s0) } else { t0 };
            // one Newton polish
            for _ in 0..2 {
                let f = sec.arclen_at(t) - local;
                let (i, u) = sec.interval_of(t);
                let sp = sec.speed(i, u);
                if sp <= 0.0 || f.abs() < 1e-14 * self.total_len {
                    break;
                }
                t -= f / sp;
            }
            out.push(sec.point(t));
        }
        out
    }

    pub fn eval_at(&self, s: f64) -> CurvePoint {
        let (si, local) = self.locate(s);
        let sec = &self.sections[si];
        let t = sec.param_at_arclen(local);
        self.eval_local(si, t)
    }

    fn eval_local(&self, si: usize, t: f64) -> CurvePoint {
        let sec = &self.sections[si];
        let d1 = sec.deriv(t);
        let d2 = sec.deriv2(t);
        let speed = d1.norm();
        let tangent = d1 / speed;
        let normal = Vec2::new(-tangent.y, tangent.x);
        let curvature = (d1.x * d2.y - d1.y * d2.x) / speed.powi(3);
        let arclen = (self.offsets[si] + sec.arclen_at(t)).rem_euclid(self.total_len);
        CurvePoint {
            arclen,
            position: sec.point(t),
            tangent,
            normal,
            curvature,
        }
    }

    /// Nearest point on the curve, refined by safeguarded Newton iteration
    /// from the closest interpolation node. `hint` short-circuits the global
    /// node scan with a known-close node index.
    pub fn project(&self, x: Vec2, hint: Option<usize>) -> CurvePoint {
        let node = match hint {
            Some(i) if i < self.node_pos.len() => i,
            _ => (0..self.node_pos.len())
                .min_by(|&a, &b| {
                    let da = (x - self.node_pos[a]).norm_squared();
                    let db = (x - self.node_pos[b]).norm_squared();
                    da.partial_cmp(&db).unwrap()
                })
                .expect("curve has nodes"),
        };
        self.refine_near_node(x, node)
    }

    fn refine_near_node(&self, x: Vec2, node: usize) -> CurvePoint {
        let n = self.node_arclen.len();
        let s0 = self.node_arclen[node];
        let (si, local) = self.locate(s0);
        let sec = &self.sections[si];
        let mut t = sec.param_at_arclen(local);
        for _ in 0..12 {
            let p = sec.point(t);
            let d1 = sec.deriv(t);
            let d2 = sec.deriv2(t);
            let r = p - x;
            let f = r.dot(&d1);
            let fp = d1.norm_squared() + r.dot(&d2);
            if fp.abs() < 1e-300 {
                break;
            }
            let nt = sec.wrap_param(t - f / fp);
            if (nt - t).abs() < 1e-14 * (1.0 + sec.t.last().unwrap()) {
                t = nt;
                break;
            }
            t = nt;
        }
        let refined = self.eval_local(si, t);
        // neighbor nodes guard against Newton converging to a sub-optimal
        // stationary point, e.g. when the query sits near a corner or the
        // hint was a node off
        let mut best = refined;
        let mut best_d = (x - refined.position).norm_squared();
        for i in [(node + n - 1) % n, (node + 1) % n] {
            let cand = self.eval_at(self.node_arclen[i]);
            let d = (x - cand.position).norm_squared();
            if d < best_d {
                // re-refine from the better neighbor
                let (sj, loc) = self.locate(self.node_arclen[i]);
                let secj = &self.sections[sj];
                let mut tj = secj.param_at_arclen(loc);
                for _ in 0..12 {
                    let p = secj.point(tj);
                    let d1 = secj.deriv(tj);
                    let d2 = secj.deriv2(tj);
                    let r = p - x;
                    let f = r.dot(&d1);
                    let fp = d1.norm_squared() + r.dot(&d2);
                    if fp.abs() < 1e-300 {
                        break;
                    }
                    tj = secj.wrap_param(tj - f / fp);
                }
                let re = self.eval_local(sj, tj);
                let dr = (x - re.position).norm_squared();
                if dr < best_d {
                    best = re;
                    best_d = dr;
                } else if d < best_d {
                    best = cand;
                    best_d = d;
                }
            }
        }
        best
    }
}

/// Periodic cubic interpolation of scalar samples over one curve period.
#[derive(Debug, Clone)]
pub struct PeriodicSpline1D {
    t: Vec<f64>,
    coef: Vec<Cubic>,
    period: f64,
}

impl PeriodicSpline1D {
    /// `knots` strictly increasing within one period, one value per knot.
    pub fn build(knots: &[f64], values: &[f64], period: f64) -> PeriodicSpline1D {
        assert_eq!(knots.len(), values.len());
        assert!(knots.len() >= 3);
        let mut t: Vec<f64> = knots.to_vec();
        t.push(knots[0] + period);
        let mut v: Vec<f64> = values.to_vec();
        v.push(values[0]);
        let moments = spline_moments(&t, &v, true);
        let coef = moments_to_cubics(&t, &v, &moments, true);
        PeriodicSpline1D { t, coef, period }
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let t0 = self.t[0];
        let s = t0 + (s - t0).rem_euclid(self.period);
        let m = self.coef.len();
        let idx = match self.t.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(m - 1),
            Err(i) => i.saturating_sub(1).min(m - 1),
        };
        (idx, s - self.t[idx])
    }

    pub fn eval(&self, s: f64) -> f64 {
        let (i, u) = self.locate(s);
        self.coef[i].eval(u)
    }

    pub fn deriv(&self, s: f64) -> f64 {
        let (i, u) = self.locate(s);
        self.coef[i].deriv(u)
    }
}
