//! The gradient-flow norm of interface data.
//!
//! The squared norm of a mean-zero function on the interface is the
//! Dirichlet energy of its minimal harmonic extension, evaluated through the
//! boundary pairing with the jump of the normal derivative. The inverse of
//! the Dirichlet-to-Neumann map realizes the Riesz isomorphism of this
//! space, which is the metric in which the interface evolution is a
//! gradient flow of the perimeter.

use crate::geometry::{PhaseSet, ScalarField};
use crate::laplace::{solve_dirichlet_dtn, DtnSolution, SolveError};

/// Result of a squared-norm evaluation.
#[derive(Debug)]
pub struct HalfNormResult {
    /// `int |grad u_f|^2` of the minimal extension of the mean-adjusted data
    pub norm_sq: f64,
    /// the extension itself
    pub extension: DtnSolution,
    /// the interface average that was subtracted from the data
    pub mean_removed: f64,
}

fn interface_mean(phase: &PhaseSet, f: &[ScalarField]) -> f64 {
    let mut sum = 0.0;
    let mut length = 0.0;
    for (c, fc) in phase.components().iter().zip(f) {
        let w = c.node_weights();
        for (i, &wi) in w.iter().enumerate() {
            sum += fc[i] * wi;
            length += wi;
        }
    }
    sum / length
}

fn check_shape(phase: &PhaseSet, f: &[ScalarField]) -> Result<(), SolveError> {
    if f.len() != phase.components().len()
        || f.iter()
            .zip(phase.components())
            .any(|(fc, c)| fc.len() != c.node_count())
    {
        return Err(SolveError::ShapeMismatch);
    }
    Ok(())
}

/// Squared `H^{1/2}`-type norm of interface data `f` (one field per
/// component). The interface average is removed first and reported.
pub fn hms_half_norm(phase: &PhaseSet, f: &[ScalarField]) -> Result<HalfNormResult, SolveError> {
    check_shape(phase, f)?;
    let mean = interface_mean(phase, f);
    let adjusted: Vec<ScalarField> = f.iter().map(|fc| fc.map(|v| v - mean)).collect();
    let extension = solve_dirichlet_dtn(phase, &adjusted)?;
    Ok(HalfNormResult {
        norm_sq: extension.dirichlet_energy(),
        extension,
        mean_removed: mean,
    })
}

/// Inner product `<f, g>` via the boundary pairing of one extension with the
/// other's data (equal to the polarization of the squared norms).
pub fn hms_inner(phase: &PhaseSet, f: &[ScalarField], g: &[ScalarField]) -> Result<f64, SolveError> {
    check_shape(phase, g)?;
    let mean_g = interface_mean(phase, g);
    let gf = hms_half_norm(phase, f)?;
    let mut acc = 0.0;
    for ((c, gc), mu) in phase
        .components()
        .iter()
        .zip(g.iter())
        .zip(gf.extension.density().iter())
    {
        let w = c.node_weights();
        for i in 0..c.node_count() {
            acc += (gc[i] - mean_g) * mu[i] * w[i];
        }
    }
    Ok(acc)
}

/// Ratio `||f||_{H^{1/2}} / (||f||_{L^2}/ell + ||f'||_{L^2})`, the quantity
/// bounded by the interpolation estimate. Returns 0 for (near-)constant data.
pub fn interpolation_ratio(
    phase: &PhaseSet,
    f: &[ScalarField],
    ell: f64,
) -> Result<f64, SolveError> {
    check_shape(phase, f)?;
    let mean = interface_mean(phase, f);
    let mut l2_sq = 0.0;
    let mut deriv_sq = 0.0;
    for (c, fc) in phase.components().iter().zip(f) {
        let w = c.node_weights();
        let n = c.node_count();
        for i in 0..n {
            let v = fc[i] - mean;
            l2_sq += v * v * w[i];
            // centered tangential derivative; the node weight is half the
            // arclength span between the two neighbors
            let prev = fc[(i + n - 1) % n];
            let next = fc[(i + 1) % n];
            let fp = (next - prev) / (2.0 * w[i]);
            deriv_sq += fp * fp * w[i];
        }
    }
    let denom = l2_sq.sqrt() / ell + deriv_sq.sqrt();
    if denom < 1e-14 {
        return Ok(0.0);
    }
    let norm = hms_half_norm(phase, f)?.norm_sq.sqrt();
    Ok(norm / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{InterfaceCurve, Rect, Vec2};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn circle_phase(n: usize) -> PhaseSet {
        PhaseSet::single(
            InterfaceCurve::circle(Vec2::zeros(), 1.0, n),
            Rect::new(-4.0, -4.0, 4.0, 4.0),
        )
        .unwrap()
    }

    fn mode_field(phase: &PhaseSet, k: u32, amp: f64, sin_amp: f64) -> Vec<ScalarField> {
        phase
            .components()
            .iter()
            .map(|c| {
                ScalarField::new(
                    c.nodes()
                        .iter()
                        .map(|p| {
                            let th = p.y.atan2(p.x);
                            amp * (k as f64 * th).cos() + sin_amp * (k as f64 * th).sin()
                        })
                        .collect(),
                )
            })
            .collect()
    }

    #[test]
    fn constants_have_zero_norm() {
        let phase = circle_phase(64);
        let f = vec![ScalarField::constant(3.7, 64)];
        let r = hms_half_norm(&phase, &f).unwrap();
        assert!(r.norm_sq < 1e-12);
        assert_relative_eq!(r.mean_removed, 3.7, epsilon = 1e-12);
    }

    #[test]
    fn circle_modes_match_separation_of_variables() {
        // interior plus exterior energy of r^{+-k} cos(k t) is 2 pi k
        let phase = circle_phase(256);
        for k in 1..=5u32 {
            let f = mode_field(&phase, k, 1.0, 0.0);
            let r = hms_half_norm(&phase, &f).unwrap();
            assert_relative_eq!(r.norm_sq, TAU * k as f64, max_relative = 1e-8);
        }
    }

    #[test]
    fn fourier_modes_add_orthogonally() {
        let phase = circle_phase(256);
        let f1 = mode_field(&phase, 1, 1.0, 0.0);
        let f2 = mode_field(&phase, 2, 1.0, 0.0);
        let combined = vec![ScalarField::new(
            f1[0].values().iter().zip(f2[0].values()).map(|(a, b)| a + b).collect(),
        )];
        let r = hms_half_norm(&phase, &combined).unwrap();
        assert_relative_eq!(r.norm_sq, 6.0 * PI, max_relative = 1e-8);
    }

    #[test]
    fn norm_scales_quadratically() {
        let phase = circle_phase(128);
        let f = mode_field(&phase, 3, 1.0, 0.5);
        let alpha = 2.75;
        let scaled: Vec<ScalarField> = f.iter().map(|fc| fc.map(|v| alpha * v)).collect();
        let base = hms_half_norm(&phase, &f).unwrap().norm_sq;
        let big = hms_half_norm(&phase, &scaled).unwrap().norm_sq;
        assert_relative_eq!(big, alpha * alpha * base, max_relative = 1e-10);
    }

    #[test]
    fn mode_norms_increase_in_k() {
        let phase = circle_phase(256);
        let mut prev = 0.0;
        for k in 1..=8u32 {
            let r = hms_half_norm(&phase, &mode_field(&phase, k, 1.0, 0.0)).unwrap();
            assert!(r.norm_sq > prev, "k={k}");
            prev = r.norm_sq;
        }
    }

    #[test]
    fn cauchy_schwarz_on_random_fourier_pairs() {
        let phase = circle_phase(128);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let mut f = vec![0.0; 128];
            let mut g = vec![0.0; 128];
            for k in 1..=6u32 {
                let (af, bf) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let (ag, bg) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                for (i, p) in phase.components()[0].nodes().iter().enumerate() {
                    let th = p.y.atan2(p.x);
                    f[i] += af * (k as f64 * th).cos() + bf * (k as f64 * th).sin();
                    g[i] += ag * (k as f64 * th).cos() + bg * (k as f64 * th).sin();
                }
            }
            let f = vec![ScalarField::new(f)];
            let g = vec![ScalarField::new(g)];
            let ip = hms_inner(&phase, &f, &g).unwrap();
            let nf = hms_half_norm(&phase, &f).unwrap().norm_sq;
            let ng = hms_half_norm(&phase, &g).unwrap().norm_sq;
            assert!(ip * ip <= nf * ng * (1.0 + 1e-8), "{} vs {}", ip * ip, nf * ng);
        }
    }

    #[test]
    fn inner_product_matches_polarization() {
        let phase = circle_phase(128);
        let f = mode_field(&phase, 2, 0.8, 0.1);
        let g = mode_field(&phase, 5, -0.3, 0.6);
        let ip = hms_inner(&phase, &f, &g).unwrap();
        let sum = vec![ScalarField::new(
            f[0].values().iter().zip(g[0].values()).map(|(a, b)| a + b).collect(),
        )];
        let diff = vec![ScalarField::new(
            f[0].values().iter().zip(g[0].values()).map(|(a, b)| a - b).collect(),
        )];
        let polar = 0.25
            * (hms_half_norm(&phase, &sum).unwrap().norm_sq
                - hms_half_norm(&phase, &diff).unwrap().norm_sq);
        assert_relative_eq!(ip, polar, max_relative = 1e-8, epsilon = 1e-12);
    }

    #[test]
    fn interpolation_ratio_closed_forms() {
        // cos(k t) on the unit circle: norm sqrt(2 pi k), L2 norm sqrt(pi),
        // derivative L2 norm k sqrt(pi)
        let phase = circle_phase(512);
        let ell = 0.9;
        for k in [1u32, 8] {
            let f = mode_field(&phase, k, 1.0, 0.0);
            let expect = (TAU * k as f64).sqrt() / (PI.sqrt() / ell + k as f64 * PI.sqrt());
            let got = interpolation_ratio(&phase, &f, ell).unwrap();
            assert_relative_eq!(got, expect, max_relative = 0.02);
        }
        let zero = vec![ScalarField::constant(0.0, 512)];
        assert_eq!(interpolation_ratio(&phase, &zero, ell).unwrap(), 0.0);
    }
}
