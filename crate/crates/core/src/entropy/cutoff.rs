//! Fixed C^2 cutoff and ramp profiles.
//!
//! Only support intervals and slope bounds are constrained; these quintic
//! realizations are one admissible canonical choice:
//! - `eta_bar`: even plateau, 1 on [-1/2, 1/2], support [-3/4, 3/4],
//!   max slope 7.5;
//! - `zeta_bar`: even plateau, 1 on [-1/4, 1/4], support [-1/2, 1/2],
//!   max slope 7.5;
//! - `theta_bar`: odd ramp, identity on [-1/2, 1/2], saturating at +-1 from
//!   |y| = 1 on, strictly increasing in between.

/// Quintic smoothstep: 0 at 0, 1 at 1, with vanishing first and second
/// derivatives at both ends.
fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

fn smoothstep_deriv(x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    30.0 * x * x * (1.0 - x) * (1.0 - x)
}

fn plateau(y: f64, inner: f64, outer: f64) -> f64 {
    let a = y.abs();
    if a <= inner {
        1.0
    } else if a >= outer {
        0.0
    } else {
        1.0 - smoothstep((a - inner) / (outer - inner))
    }
}

fn plateau_deriv(y: f64, inner: f64, outer: f64) -> f64 {
    let a = y.abs();
    if a <= inner || a >= outer {
        0.0
    } else {
        let w = outer - inner;
        -smoothstep_deriv((a - inner) / w) / w * y.signum()
    }
}

/// Plateau cutoff shaping the normal-field and velocity extensions.
pub fn eta_bar(y: f64) -> f64 {
    plateau(y, 0.5, 0.75)
}

pub fn eta_bar_deriv(y: f64) -> f64 {
    plateau_deriv(y, 0.5, 0.75)
}

/// Narrower plateau cutoff used by the graph-flattening map.
pub fn zeta_bar(y: f64) -> f64 {
    plateau(y, 0.25, 0.5)
}

pub fn zeta_bar_deriv(y: f64) -> f64 {
    plateau_deriv(y, 0.25, 0.5)
}

// quintic on [1/2, 1] with value/slope/curvature (1/2, 1, 0) at 1/2 and
// (1, 0, 0) at 1, strictly increasing
fn ramp_tail(tau: f64) -> f64 {
    0.5 + 0.5 * tau + tau * tau * tau * (2.0 - 3.5 * tau + 1.5 * tau * tau)
}

fn ramp_tail_deriv(tau: f64) -> f64 {
    0.5 + tau * tau * (6.0 - 14.0 * tau + 7.5 * tau * tau)
}

/// Odd saturation ramp: identity in the core, +-1 beyond |y| = 1.
pub fn theta_bar(y: f64) -> f64 {
    let a = y.abs();
    let v = if a <= 0.5 {
        a
    } else if a >= 1.0 {
        1.0
    } else {
        ramp_tail(2.0 * (a - 0.5))
    };
    v * y.signum()
}

pub fn theta_bar_deriv(y: f64) -> f64 {
    let a = y.abs();
    if a <= 0.5 {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        2.0 * ramp_tail_deriv(2.0 * (a - 0.5))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_meet_support_and_slope_bounds() {
        for i in 0..=2000 {
            let y = -1.5 + 3.0 * i as f64 / 2000.0;
            assert!((0.0..=1.0).contains(&eta_bar(y)));
            assert!(eta_bar_deriv(y).abs() <= 8.0);
            assert!(zeta_bar_deriv(y).abs() <= 8.0);
            assert!(theta_bar(y).abs() <= 1.0);
            if y.abs() <= 0.5 {
                assert_eq!(eta_bar(y), 1.0);
                assert_eq!(theta_bar(y), y);
            }
            if y.abs() >= 0.75 {
                assert_eq!(eta_bar(y), 0.0);
            }
            if y.abs() <= 0.25 {
                assert_eq!(zeta_bar(y), 1.0);
            }
            if y.abs() >= 0.5 {
                assert_eq!(zeta_bar(y), 0.0);
            }
            if y.abs() >= 1.0 {
                assert_eq!(theta_bar(y).abs(), 1.0);
            }
            if y.abs() < 1.0 {
                assert!(theta_bar_deriv(y) > 0.0, "monotone ramp at {y}");
            }
            // odd symmetry
            assert_eq!(theta_bar(-y), -theta_bar(y));
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for i in 0..300 {
            let y = -1.45 + 2.9 * i as f64 / 300.0 + 0.0013;
            let fd_eta = (eta_bar(y + h) - eta_bar(y - h)) / (2.0 * h);
            assert!((fd_eta - eta_bar_deriv(y)).abs() < 1e-6);
            let fd_theta = (theta_bar(y + h) - theta_bar(y - h)) / (2.0 * h);
            assert!((fd_theta - theta_bar_deriv(y)).abs() < 1e-6);
            let fd_zeta = (zeta_bar(y + h) - zeta_bar(y - h)) / (2.0 * h);
            assert!((fd_zeta - zeta_bar_deriv(y)).abs() < 1e-6);
        }
    }
}
