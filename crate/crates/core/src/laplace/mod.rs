//! Two-phase harmonic Dirichlet problems on interface curves.
//!
//! The solver writes the potential as a single-layer representation over all
//! interface components plus an additive constant,
//! `u(x) = sum_j \oint G(x,y) mu_j(y) ds(y) + c` with the free-space kernel
//! `G(x,y) = -ln|x-y|/(2 pi)`, and determines `(mu, c)` from the Dirichlet
//! data under the compatibility constraint `sum_j \oint mu_j ds = 0`. The
//! log singularity is handled by the trigonometric product quadrature for
//! periodic log-kernels, which is spectrally accurate on smooth curves with
//! quasi-uniform node spacing.
//!
//! The jump of the normal derivative across the interface (inside trace
//! minus outside trace, normal pointing into the phase) is `-mu` pointwise;
//! no principal value evaluation is needed for it.

mod grid;

pub use grid::{grid_oracle_solve, GridSolution};

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::geometry::{PhaseSet, Rect, ScalarField, Vec2};

/// Minimal per-component resolution for the boundary solver.
pub const MIN_NODES_PER_COMPONENT: usize = 32;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("component {component} has {got} nodes, solver needs at least {min}")]
    Resolution { component: usize, got: usize, min: usize },
    #[error("duplicate or near-duplicate nodes on component {0}")]
    DuplicateNodes(usize),
    #[error("boundary system ill-conditioned (relative residual {0:.3e})")]
    IllConditioned(f64),
    #[error("data fields do not match the phase discretization")]
    ShapeMismatch,
    #[error("nonfinite Dirichlet data")]
    NonFiniteData,
    #[error("grid solver needs n >= 128, got {0}")]
    GridTooCoarse(usize),
    #[error("grid solver did not converge ({iters} iterations, residual {residual:.3e})")]
    GridNotConverged { iters: usize, residual: f64 },
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

/// Solution of the Dirichlet problem with its Dirichlet-to-Neumann data.
#[derive(Debug, Clone)]
pub struct DtnSolution {
    /// single-layer density per component
    density: Vec<ScalarField>,
    /// additive constant of the representation
    constant: f64,
    /// jump of the normal derivative, inside minus outside trace (= -density)
    jump: Vec<ScalarField>,
    /// free-space Dirichlet energy, via the boundary formula
    dirichlet_energy: f64,
    /// Dirichlet data the solve was run with
    data: Vec<ScalarField>,
    /// node positions and quadrature weights, for later evaluation
    nodes: Vec<Vec<Vec2>>,
    weights: Vec<f64>,
}

impl DtnSolution {
    pub fn density(&self) -> &[ScalarField] {
        &self.density
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn jump(&self) -> &[ScalarField] {
        &self.jump
    }

    pub fn dirichlet_energy(&self) -> f64 {
        self.dirichlet_energy
    }

    pub fn data(&self) -> &[ScalarField] {
        &self.data
    }

    pub fn component_count(&self) -> usize {
        self.density.len()
    }

    fn flat_len(&self) -> usize {
        self.density.iter().map(|f| f.len()).sum()
    }

    fn same_discretization(&self, other: &DtnSolution) -> bool {
        self.density.len() == other.density.len()
            && self
                .density
                .iter()
                .zip(other.density.iter())
                .all(|(a, b)| a.len() == b.len())
    }

    /// Potential evaluated away from the interface (plain quadrature; the
    /// accuracy degrades within a couple of node spacings of the interface).
    pub fn eval(&self, x: Vec2) -> f64 {
        let mut u = self.constant;
        let mut k = 0;
        for (ci, nodes) in self.nodes.iter().enumerate() {
            for (j, y) in nodes.iter().enumerate() {
                let r2 = (x - y).norm_squared().max(1e-300);
                u += -0.25 / PI * r2.ln() * self.density[ci][j] * self.weights[k];
                k += 1;
            }
        }
        u
    }

    /// Gradient of the potential away from the interface.
    pub fn eval_grad(&self, x: Vec2) -> Vec2 {
        let mut g = Vec2::zeros();
        let mut k = 0;
        for (ci, nodes) in self.nodes.iter().enumerate() {
            for (j, y) in nodes.iter().enumerate() {
                let d = x - y;
                let r2 = d.norm_squared().max(1e-300);
                g += d * (-0.5 / PI / r2) * self.density[ci][j] * self.weights[k];
                k += 1;
            }
        }
        g
    }
}

/// `int_Omega grad(u_a) . grad(u_b)` for two solutions on the same node set,
/// by the exact discrete boundary pairing.
pub fn dirichlet_inner(a: &DtnSolution, b: &DtnSolution) -> Result<f64, SolveError> {
    if !a.same_discretization(b) {
        return Err(SolveError::ShapeMismatch);
    }
    let mut acc = 0.0;
    let mut k = 0;
    for ci in 0..a.density.len() {
        for j in 0..a.density[ci].len() {
            acc += a.data[ci][j] * b.density[ci][j] * a.weights[k];
            k += 1;
        }
    }
    Ok(acc)
}

/// Dirichlet energy of the difference of two solutions on the same phase,
/// `int |grad(u_a - u_b)|^2`, nonnegative, zero iff the solutions coincide.
pub fn dirichlet_energy_of_difference(a: &DtnSolution, b: &DtnSolution) -> Result<f64, SolveError> {
    if !a.same_discretization(b) {
        return Err(SolveError::ShapeMismatch);
    }
    let mut acc = 0.0;
    let mut k = 0;
    for ci in 0..a.density.len() {
        for j in 0..a.density[ci].len() {
            let dg = a.data[ci][j] - b.data[ci][j];
            let dmu = a.density[ci][j] - b.density[ci][j];
            acc += dg * dmu * a.weights[k];
            k += 1;
        }
    }
    Ok(acc.max(0.0))
}

/// Boundary-system factorization for a fixed interface geometry, reusable
/// across right-hand sides.
pub struct DtnSystem {
    nodes: Vec<Vec<Vec2>>,
    weights: Vec<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    matrix: DMatrix<f64>,
    size: usize,
}

impl DtnSystem {
    pub fn assemble(phase: &PhaseSet) -> Result<DtnSystem, SolveError> {
        let comps = phase.components();
        let mut nodes: Vec<Vec<Vec2>> = Vec::with_capacity(comps.len());
        let mut spacing: Vec<f64> = Vec::with_capacity(comps.len());
        for (ci, c) in comps.iter().enumerate() {
            let n = c.node_count();
            if n < MIN_NODES_PER_COMPONENT {
                return Err(SolveError::Resolution {
                    component: ci,
                    got: n,
                    min: MIN_NODES_PER_COMPONENT,
                });
            }
            let h = c.perimeter() / n as f64;
            if c.min_spacing() < 1e-12 * h.max(1.0) {
                return Err(SolveError::DuplicateNodes(ci));
            }
            nodes.push(c.nodes().to_vec());
            spacing.push(h);
        }
        let total: usize = nodes.iter().map(|v| v.len()).sum();
        let size = total + 1;
        let mut weights = Vec::with_capacity(total);
        for (ci, v) in nodes.iter().enumerate() {
            weights.extend(std::iter::repeat(spacing[ci]).take(v.len()));
        }

        let mut a = DMatrix::zeros(size, size);
        let mut offset_i = 0;
        for (ci, ni) in nodes.iter().enumerate() {
            let n_i = ni.len();
            let log_sin = log_sin_weights(n_i, comps[ci].perimeter());
            let mut offset_j = 0;
            for (cj, nj) in nodes.iter().enumerate() {
                let n_j = nj.len();
                if ci == cj {
                    let len = comps[ci].perimeter();
                    let h = spacing[ci];
                    for i in 0..n_i {
                        for j in 0..n_i {
                            let val = if i == j {
                                -(log_sin[0] + h * (len / TAU).ln()) / TAU
                            } else {
                                let r = (ni[i] - ni[j]).norm();
                                let d = (i as isize - j as isize).unsigned_abs() % n_i;
                                let sin_term =
                                    2.0 * (PI * (i as f64 - j as f64).abs() * h / len).sin();
                                -(log_sin[d] + h * (r / sin_term).ln()) / TAU
                            };
                            a[(offset_i + i, offset_j + j)] = val;
                        }
                    }
                } else {
                    let h = spacing[cj];
                    for i in 0..n_i {
                        for j in 0..n_j {
                            let r2 = (ni[i] - nj[j]).norm_squared();
                            a[(offset_i + i, offset_j + j)] = -h * 0.25 / PI * r2.ln();
                        }
                    }
                }
                offset_j += n_j;
            }
            offset_i += n_i;
        }
        // additive constant column and zero-total-density constraint row
        for i in 0..total {
            a[(i, total)] = 1.0;
            a[(total, i)] = weights[i];
        }
        let matrix = a.clone();
        let lu = a.lu();
        Ok(DtnSystem { nodes, weights, lu, matrix, size })
    }

    /// Solves for the density and constant with Dirichlet data `g` (one
    /// scalar field per component, aligned with the component nodes).
    pub fn solve(&self, g: &[ScalarField]) -> Result<DtnSolution, SolveError> {
        if g.len() != self.nodes.len()
            || g.iter().zip(self.nodes.iter()).any(|(f, v)| f.len() != v.len())
        {
            return Err(SolveError::ShapeMismatch);
        }
        if g.iter().any(|f| f.values().iter().any(|v| !v.is_finite())) {
            return Err(SolveError::NonFiniteData);
        }
        let total = self.size - 1;
        let mut rhs = DVector::zeros(self.size);
        let mut k = 0;
        for f in g {
            for &v in f.values() {
                rhs[k] = v;
                k += 1;
            }
        }
        let sol = self.lu.solve(&rhs).ok_or(SolveError::IllConditioned(f64::INFINITY))?;
        // cheap conditioning check: relative residual of the linear solve
        let res = (&self.matrix * &sol - &rhs).amax();
        let scale = rhs.amax().max(1.0);
        if !res.is_finite() || res > 1e-8 * scale {
            return Err(SolveError::IllConditioned(res / scale));
        }

        let mut density = Vec::with_capacity(self.nodes.len());
        let mut jump = Vec::with_capacity(self.nodes.len());
        let mut offset = 0;
        for v in &self.nodes {
            let mu: Vec<f64> = (0..v.len()).map(|j| sol[offset + j]).collect();
            jump.push(ScalarField::new(mu.iter().map(|m| -m).collect()));
            density.push(ScalarField::new(mu));
            offset += v.len();
        }
        let constant = sol[total];
        let mut energy = 0.0;
        for (ci, f) in g.iter().enumerate() {
            for (j, &gv) in f.values().iter().enumerate() {
                energy += gv * density[ci][j] * self.component_weight(ci);
            }
        }
        Ok(DtnSolution {
            density,
            constant,
            jump,
            dirichlet_energy: energy.max(0.0),
            data: g.to_vec(),
            nodes: self.nodes.clone(),
            weights: self.weights.clone(),
        })
    }

    fn component_weight(&self, ci: usize) -> f64 {
        let mut k = 0;
        for (i, v) in self.nodes.iter().enumerate() {
            if i == ci {
                return self.weights[k];
            }
            k += v.len();
        }
        unreachable!()
    }

    /// Maximum node displacement between this system's geometry and `phase`,
    /// infinite when the discretizations are incompatible.
    pub fn geometry_drift(&self, phase: &PhaseSet) -> f64 {
        let comps = phase.components();
        if comps.len() != self.nodes.len() {
            return f64::INFINITY;
        }
        let mut drift: f64 = 0.0;
        for (c, v) in comps.iter().zip(self.nodes.iter()) {
            if c.node_count() != v.len() {
                return f64::INFINITY;
            }
            for (p, q) in c.nodes().iter().zip(v.iter()) {
                drift = drift.max((p - q).norm());
            }
        }
        drift
    }
}

/// One-shot assembly and solve of the Dirichlet-to-Neumann problem.
pub fn solve_dirichlet_dtn(phase: &PhaseSet, g: &[ScalarField]) -> Result<DtnSolution, SolveError> {
    DtnSystem::assemble(phase)?.solve(g)
}

/// Quadrature weights `rho_d` for the periodic log-sin kernel:
/// `int_0^L ln(2 sin(pi (s_i - s)/L)) f(s) ds ~ sum_j rho_{|i-j|} f(s_j)`,
/// exact for trigonometric polynomials up to the grid bandwidth.
fn log_sin_weights(n: usize, len: f64) -> Vec<f64> {
    let mut cos_table = vec![0.0; n];
    for (k, c) in cos_table.iter_mut().enumerate() {
        *c = (TAU * k as f64 / n as f64).cos();
    }
    let half = n / 2;
    (0..n)
        .map(|d| {
            let mut sum = 0.0;
            for m in 1..half {
                sum += cos_table[(m * d) % n] / m as f64;
            }
            if n % 2 == 0 && half >= 1 {
                sum += cos_table[(half * d) % n] / n as f64;
            }
            -(len / n as f64) * sum
        })
        .collect()
}

/// `-\oint_{box} (n_box . grad u) zeta dH^1`, the domain-boundary term in
/// the integration by parts of `int grad u . grad zeta` over the box, with
/// the box normal pointing inward. Composite Gauss quadrature per edge.
pub fn box_flux(sol: &DtnSolution, bbox: Rect, zeta: &dyn Fn(Vec2) -> f64) -> f64 {
    const PANELS: usize = 24;
    const GL4: [(f64, f64); 4] = [
        (0.069431844202973714, 0.173927422568727_f64),
        (0.330009478207571868, 0.326072577431273),
        (0.669990521792428132, 0.326072577431273),
        (0.930568155797026286, 0.173927422568727),
    ];
    let corners = [
        (Vec2::new(bbox.min.x, bbox.min.y), Vec2::new(bbox.max.x, bbox.min.y), Vec2::new(0.0, 1.0)),
        (Vec2::new(bbox.max.x, bbox.min.y), Vec2::new(bbox.max.x, bbox.max.y), Vec2::new(-1.0, 0.0)),
        (Vec2::new(bbox.max.x, bbox.max.y), Vec2::new(bbox.min.x, bbox.max.y), Vec2::new(0.0, -1.0)),
        (Vec2::new(bbox.min.x, bbox.max.y), Vec2::new(bbox.min.x, bbox.min.y), Vec2::new(1.0, 0.0)),
    ];
    let mut acc = 0.0;
    for (a, b, normal_in) in corners {
        let edge = b - a;
        let len = edge.norm();
        for p in 0..PANELS {
            let t0 = p as f64 / PANELS as f64;
            let dt = 1.0 / PANELS as f64;
            for (q, w) in GL4 {
                let x = a + (t0 + q * dt) * edge;
                let flux = normal_in.dot(&sol.eval_grad(x));
                acc += w * flux * zeta(x) * len * dt;
            }
        }
    }
    -acc
}
