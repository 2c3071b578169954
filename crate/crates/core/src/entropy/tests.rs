use super::*;
use crate::geometry::{InterfaceCurve, Rect};
use approx::assert_relative_eq;
use std::f64::consts::{PI, TAU};

fn the_box() -> Rect {
    Rect::new(-4.0, -4.0, 4.0, 4.0)
}

fn unit_circle_phase(n: usize) -> PhaseSet {
    PhaseSet::single(InterfaceCurve::circle(Vec2::zeros(), 1.0, n), the_box()).unwrap()
}

fn unit_circle_fields(n: usize) -> FieldTriple {
    FieldTriple::build(&unit_circle_phase(n)).unwrap()
}

#[test]
fn field_values_on_radial_geometry() {
    let fields = unit_circle_fields(256);
    let ell = fields.ell();
    assert_relative_eq!(ell, 0.9, epsilon = 1e-3);

    // cutoff region: |xi| strictly between 0 and 1, pointing inward
    let xi = fields.xi(Vec2::new(0.5, 0.0));
    let mag = xi.norm();
    assert!(mag > 0.0 && mag < 1.0, "cutoff magnitude {mag}");
    assert!(xi.x < 0.0 && xi.y.abs() < 1e-6);

    // inner band: xi is exactly the inward normal, theta = -s/ell^2
    let x = Vec2::new(0.99, 0.0);
    let xi = fields.xi(x);
    assert!((xi - Vec2::new(-1.0, 0.0)).norm() < 1e-6);
    assert_relative_eq!(fields.theta(x), -0.01 / (ell * ell), max_relative = 1e-4);

    // far outside: xi and B vanish, theta saturates at +1/ell
    let far = Vec2::new(3.0, 0.0);
    assert_eq!(fields.xi(far).norm(), 0.0);
    assert_eq!(fields.b(far).norm(), 0.0);
    assert_relative_eq!(fields.theta(far), 1.0 / ell, epsilon = 1e-12);
}

#[test]
fn div_xi_matches_radial_closed_form() {
    // on a unit circle the inner-band divergence is -1/(1 - s) = -1/r
    let fields = unit_circle_fields(512);
    for r in [0.6, 0.8, 0.95, 1.05, 1.2, 1.4] {
        let x = Vec2::new(r * 0.6f64.cos(), r * 0.6f64.sin());
        let expect = -1.0 / r;
        assert_relative_eq!(fields.div_xi(x), expect, max_relative = 1e-4);
    }
}

#[test]
fn theta_is_odd_with_matching_gradient() {
    let fields = unit_circle_fields(256);
    let ell = fields.ell();
    for d in [0.05, 0.1, 0.2, 0.4] {
        let inside = Vec2::new(1.0 - d, 0.0);
        let outside = Vec2::new(1.0 + d, 0.0);
        assert_relative_eq!(fields.theta(inside), -fields.theta(outside), epsilon = 1e-8);
        // finite-difference gradient against -theta_bar' n / ell^2
        let h = 1e-6;
        let fd = Vec2::new(
            (fields.theta(inside + Vec2::new(h, 0.0)) - fields.theta(inside - Vec2::new(h, 0.0)))
                / (2.0 * h),
            (fields.theta(inside + Vec2::new(0.0, h)) - fields.theta(inside - Vec2::new(0.0, h)))
                / (2.0 * h),
        );
        let frame = fields.frame(inside);
        let analytic = fields.grad_theta_at(&frame);
        assert!((fd - analytic).norm() < 1e-5, "at d={d}: {fd:?} vs {analytic:?}");
        if d < ell / 2.0 {
            assert!((analytic + frame.point.normal / (ell * ell)).norm() < 1e-8);
        }
    }
}

#[test]
fn stationary_circle_has_vanishing_velocity_extension() {
    let fields = unit_circle_fields(256);
    for (i, seed) in [3u64, 17, 99, 1234, 777].iter().enumerate() {
        let ang = *seed as f64 * 0.7 + i as f64;
        let r = 0.7 + 0.1 * (i as f64);
        let x = Vec2::new(r * ang.cos(), r * ang.sin());
        assert!(fields.b(x).norm() < 1e-7, "B at {x:?}");
        assert!(fields.div_b_at(&fields.frame(x)).abs() < 1e-5);
    }
}

#[test]
fn rel_entropy_of_identical_phases_vanishes() {
    let phase = unit_circle_phase(256);
    let fields = FieldTriple::build(&phase).unwrap();
    let e = rel_entropy(&phase, &fields);
    assert!(e.abs() < 1e-10, "E_rel = {e}");
}

#[test]
fn rel_entropy_graph_matches_density_oracle() {
    // oracle: direct fine quadrature of
    //   sqrt((1 - H h)^2 + (h')^2) - (1 - H h)
    // over the strong circle, h the normal offset of the polar graph
    let eps = 0.01;
    let k = 3.0;
    let strong = unit_circle_phase(512);
    let fields = FieldTriple::build(&strong).unwrap();
    let weak = PhaseSet::single(
        InterfaceCurve::perturbed_circle(Vec2::zeros(), 1.0, eps, 3, 512),
        the_box(),
    )
    .unwrap();
    let computed = rel_entropy(&weak, &fields);

    let m = 200_000;
    let mut oracle = 0.0;
    for i in 0..m {
        let th = TAU * i as f64 / m as f64;
        // radius 1 + eps cos(k th) means normal offset h = -eps cos(k th)
        let h = -eps * (k * th).cos();
        let hp = eps * k * (k * th).sin();
        oracle += ((1.0 - h).powi(2) + hp * hp).sqrt() - (1.0 - h);
    }
    oracle *= TAU / m as f64;
    assert_relative_eq!(computed, oracle, max_relative = 0.05);
    // leading order 1/2 \oint (h')^2
    assert_relative_eq!(computed, 0.5 * PI * eps * eps * k * k, max_relative = 0.05);
}

#[test]
fn rel_entropy_outside_support_equals_perimeter() {
    let fields = unit_circle_fields(256);
    let weak = PhaseSet::single(
        InterfaceCurve::circle(Vec2::new(2.6, 0.0), 0.3, 64),
        the_box(),
    )
    .unwrap();
    let e = rel_entropy(&weak, &fields);
    assert_relative_eq!(e, weak.perimeter(), epsilon = 1e-9);
}

#[test]
fn rel_entropy_translated_circle_matches_brute_force() {
    // partially overlapping supports: compare against a 10x-resolution
    // polygon quadrature with chord weights and polygon normals
    let fields = unit_circle_fields(256);
    let weak_curve = InterfaceCurve::circle(Vec2::new(1.8, 0.0), 1.0, 128);
    let weak = PhaseSet::single(weak_curve.clone(), the_box()).unwrap();
    let computed = rel_entropy(&weak, &fields);

    let fine = weak_curve.resample(1280).unwrap();
    let nodes = fine.nodes();
    let n = nodes.len();
    let mut brute = 0.0;
    for i in 0..n {
        let prev = nodes[(i + n - 1) % n];
        let next = nodes[(i + 1) % n];
        let chord = next - prev;
        let normal = Vec2::new(-chord.y, chord.x).normalize();
        let w = 0.5 * ((next - nodes[i]).norm() + (nodes[i] - prev).norm());
        brute += (1.0 - normal.dot(&fields.xi(nodes[i]))) * w;
    }
    assert_relative_eq!(computed, brute, max_relative = 2e-3);
}

#[test]
fn vol_error_identical_phases_vanishes() {
    let phase = unit_circle_phase(128);
    let fields = FieldTriple::build(&phase).unwrap();
    let q = vol_error(&phase, &fields, QuadParams::default());
    assert!(q.value.abs() < 1e-12, "E_vol = {}", q.value);
}

#[test]
fn vol_error_annulus_matches_tubular_oracle() {
    // weak disk of radius 1+eps vs the unit disk: in tubular coordinates
    //   E_vol = (2 pi / ell^2) (eps^2/2 + eps^3/3)
    let eps = 0.01;
    let strong = unit_circle_phase(512);
    let fields = FieldTriple::build(&strong).unwrap();
    let weak = PhaseSet::single(
        InterfaceCurve::circle(Vec2::zeros(), 1.0 + eps, 512),
        the_box(),
    )
    .unwrap();
    let q = vol_error(&weak, &fields, QuadParams { base: 64, max_depth: 7 });
    let ell = fields.ell();
    let oracle = TAU / (ell * ell) * (eps * eps / 2.0 + eps.powi(3) / 3.0);
    assert_relative_eq!(q.value, oracle, max_relative = 0.05);
    assert!(q.error_bound < 0.2 * oracle, "bound {}", q.error_bound);
}

#[test]
fn vol_error_disjoint_supports_matches_radial_oracle() {
    // weak and strong disks far apart: the symmetric difference is their
    // union, and |theta| is radial around the strong disk
    let strong = PhaseSet::single(
        InterfaceCurve::circle(Vec2::new(2.0, 0.0), 0.6, 256),
        the_box(),
    )
    .unwrap();
    let fields = FieldTriple::build(&strong).unwrap();
    let ell = fields.ell();
    let weak = PhaseSet::single(
        InterfaceCurve::circle(Vec2::new(-2.0, 0.0), 0.4, 128),
        the_box(),
    )
    .unwrap();
    let q = vol_error(&weak, &fields, QuadParams { base: 64, max_depth: 7 });

    // weak disk sits deep outside the tube: |theta| = 1/ell there
    let weak_part = PI * 0.4 * 0.4 / ell;
    // strong disk part, radially: int_0^R theta_bar((R - rho)/ell)/ell 2 pi rho d rho
    let radius = 0.6;
    let m = 20_000;
    let mut strong_part = 0.0;
    for i in 0..m {
        let rho = radius * (i as f64 + 0.5) / m as f64;
        strong_part += cutoff::theta_bar((radius - rho) / ell) / ell * TAU * rho;
    }
    strong_part *= radius / m as f64;
    assert_relative_eq!(q.value, weak_part + strong_part, max_relative = 0.01);
}

#[test]
fn classify_respects_thresholds() {
    let strong = unit_circle_phase(256);
    let fields = FieldTriple::build(&strong).unwrap();
    let quad = QuadParams::default();

    // identical circles: both thresholds pass comfortably
    let state = SimState::initial(strong.clone());
    let c = classify_time(&state, &fields, 10.0, 20.0, quad).unwrap();
    assert_eq!(c.label, TimeClass::Good);
    assert!(c.e_total < 1e-8);

    // dissipation over a microscopic lambda: bad (1)
    let wiggly = SimState::initial(
        PhaseSet::single(
            InterfaceCurve::perturbed_circle(Vec2::zeros(), 1.0, 0.05, 3, 256),
            the_box(),
        )
        .unwrap(),
    );
    let c = classify_time(&wiggly, &fields, 1e-9, 20.0, quad).unwrap();
    assert_eq!(c.label, TimeClass::Bad1);
    assert!(c.dissipation_half > 1e-9);

    // error above ell/M with dissipation below lambda: bad (2)
    let shifted = SimState::initial(
        PhaseSet::single(InterfaceCurve::circle(Vec2::new(0.4, 0.0), 1.0, 256), the_box())
            .unwrap(),
    );
    let c = classify_time(&shifted, &fields, 10.0, 1000.0, quad).unwrap();
    assert_eq!(c.label, TimeClass::Bad2);
    assert!(c.e_total > c.error_threshold);
}

#[test]
fn fit_graph_identity_and_polar_perturbation() {
    let strong = unit_circle_phase(256);
    let fields = FieldTriple::build(&strong).unwrap();

    let h0 = fit_graph(&strong, &fields, 8.0).unwrap();
    assert!(h0.sup_offset < 1e-9);
    assert!(h0.smallness < 1e-7);
    assert!(h0.within_bound);

    // polar graph r = 1 + eps cos(3 theta): normal offset -eps cos(3 theta)
    let eps = 0.05;
    let weak = PhaseSet::single(
        InterfaceCurve::perturbed_circle(Vec2::zeros(), 1.0, eps, 3, 256),
        the_box(),
    )
    .unwrap();
    let hf = fit_graph(&weak, &fields, 8.0).unwrap();
    let mut sup_err = 0.0_f64;
    for (i, p) in strong.components()[0].nodes().iter().enumerate() {
        let th = p.y.atan2(p.x);
        let expect = -eps * (3.0 * th).cos();
        sup_err = sup_err.max((hf.offsets[0][i] - expect).abs());
    }
    assert!(sup_err < 0.02 * eps, "sup error {sup_err}");
    assert_relative_eq!(hf.sup_deriv, 3.0 * eps, max_relative = 0.02);
}

#[test]
fn fit_graph_reports_absence_clauses() {
    let strong = unit_circle_phase(128);
    let fields = FieldTriple::build(&strong).unwrap();

    // extra far component: clause (c)
    let with_extra = PhaseSet::new(
        vec![
            InterfaceCurve::circle(Vec2::zeros(), 1.0, 128),
            InterfaceCurve::circle(Vec2::new(2.8, 0.0), 0.2, 64),
        ],
        the_box(),
    )
    .unwrap();
    assert!(matches!(
        fit_graph(&with_extra, &fields, 8.0),
        Err(GraphAbsence::ComponentCountMismatch { weak: 2, strong: 1 })
    ));

    // far-translated circle: weak nodes outside the tube
    let far = PhaseSet::single(InterfaceCurve::circle(Vec2::new(2.6, 0.0), 1.0, 128), the_box())
        .unwrap();
    assert!(matches!(
        fit_graph(&far, &fields, 8.0),
        Err(GraphAbsence::WeakNodeOutsideTube { .. })
    ));
}

#[test]
fn aux_potential_constant_data_cases() {
    let strong = unit_circle_phase(256);
    let fields = FieldTriple::build(&strong).unwrap();

    // weak = strong: data is -div xi = +1 on the interface, constant, so
    // the potential is constant and the jump vanishes
    let aux = aux_potential(&strong, &fields).unwrap();
    assert!(!aux.cutoff_contaminated);
    assert_relative_eq!(aux.solution.constant(), 1.0, max_relative = 1e-4);
    assert!(aux.solution.jump()[0].max_abs() < 1e-6);

    // weak = circle of radius 1.01 (outside the strong disk, s = -0.01):
    // data = 1/(1 - s) evaluated by the closed form = 1/1.01
    let weak = PhaseSet::single(InterfaceCurve::circle(Vec2::zeros(), 1.01, 256), the_box())
        .unwrap();
    let aux = aux_potential(&weak, &fields).unwrap();
    assert!(!aux.cutoff_contaminated);
    assert_relative_eq!(aux.solution.constant(), 1.0 / 1.01, max_relative = 1e-4);
    assert!(aux.solution.jump()[0].max_abs() < 1e-6);
    assert_relative_eq!(aux.solution.data()[0][0], 1.0 / 1.01, max_relative = 1e-6);
}

#[test]
fn aux_potential_weighted_uses_theta_data() {
    let strong = unit_circle_phase(128);
    let fields = FieldTriple::build(&strong).unwrap();
    let aux = aux_potential_weighted(&strong, &fields).unwrap();
    // theta = 0 on the strong interface itself
    assert!(aux.solution.data()[0].max_abs() < 1e-8);
}

#[test]
fn rhs_terms_vanish_at_equilibrium() {
    let strong = unit_circle_phase(256);
    let fields = FieldTriple::build(&strong).unwrap();
    let state = SimState::initial(strong.clone());
    let terms = rhs_terms(&state, &fields, None, QuadParams::default()).unwrap();
    assert!(terms.r_dissip.abs() < 1e-6, "r_dissip {}", terms.r_dissip);
    assert!(terms.r_dtxi.abs() < 1e-6);
    assert!(terms.r_nabla_b.abs() < 1e-6);
    assert_eq!(terms.r_varifold_bv, 0.0);
    assert!(terms.u_dissip.abs() < 1e-6);
    assert!(terms.u_dtvartheta.abs() < 1e-6);
    assert!(terms.u_nabla_b.abs() < 1e-6);
}

#[test]
fn rhs_advective_terms_vanish_for_stationary_reference() {
    // a stationary strong circle has B ~ 0 and time-independent fields, so
    // the advective entropy term drops out no matter the weak state
    let strong = unit_circle_phase(256);
    let fields = FieldTriple::build(&strong).unwrap();
    let stencil = FieldStencil { minus: &fields, plus: &fields, dt: 1e-3 };
    let weak = SimState::initial(
        PhaseSet::single(
            InterfaceCurve::perturbed_circle(Vec2::zeros(), 1.0, 0.02, 3, 256),
            the_box(),
        )
        .unwrap(),
    );
    let terms = rhs_terms(&weak, &fields, Some(&stencil), QuadParams::default()).unwrap();
    assert!(terms.r_dtxi.abs() < 1e-7, "r_dtxi {}", terms.r_dtxi);
    assert!(terms.r_nabla_b.abs() < 1e-6, "r_nabla_b {}", terms.r_nabla_b);
    assert!(terms.u_dtvartheta.abs() < 1e-6);
    assert!(terms.u_nabla_b.abs() < 1e-6);
    // dissipation strictly negative away from equilibrium
    assert!(terms.r_dissip < -1e-4, "r_dissip {}", terms.r_dissip);
}

#[test]
fn coercivity_ratios_in_graph_regime() {
    let strong = unit_circle_phase(512);
    let fields = FieldTriple::build(&strong).unwrap();
    let quad = QuadParams { base: 64, max_depth: 7 };
    for (eps, k) in [(0.01, 3u32), (0.02, 2)] {
        let weak = PhaseSet::single(
            InterfaceCurve::perturbed_circle(Vec2::zeros(), 1.0, eps, k, 512),
            the_box(),
        )
        .unwrap();
        let hf = fit_graph(&weak, &fields, 8.0).unwrap();
        let rep = coercivity_check(&weak, &fields, &hf, quad);
        assert!(
            (0.9..=1.1).contains(&rep.ratio_rel),
            "eps={eps} k={k}: ratio_rel {}",
            rep.ratio_rel
        );
        assert!(
            (0.9..=1.1).contains(&rep.ratio_vol),
            "eps={eps} k={k}: ratio_vol {}",
            rep.ratio_vol
        );
        assert!((rep.perimeter_ratio - 1.0).abs() < 0.01);
    }

    // constant normal offset: the derivative functional degenerates, the
    // bulk ratio must still hold
    let weak = PhaseSet::single(InterfaceCurve::circle(Vec2::zeros(), 0.99, 512), the_box())
        .unwrap();
    let hf = fit_graph(&weak, &fields, 8.0).unwrap();
    let rep = coercivity_check(&weak, &fields, &hf, quad);
    assert!(rep.e_rel < 1e-8);
    assert!((0.9..=1.1).contains(&rep.ratio_vol), "ratio_vol {}", rep.ratio_vol);
}
