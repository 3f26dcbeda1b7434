use rovella_core::interval_maps::{RightBranch, UnimodalSpec};
use rovella_core::torusphere::{critical_exponent, domination_profile, domination_ratio, symmetric_log_grid};

const GAMMA: f64 = 1.2;
const OMEGA: f64 = 0.1;

fn near_pole_values(g: &UnimodalSpec, sign: f64) -> Vec<f64> {
    [1e-3, 1e-5, 1e-7, 1e-9]
        .iter()
        .map(|e| domination_ratio(sign * (1.0 - e), g, GAMMA, OMEGA).unwrap())
        .collect()
}

#[test]
fn symmetric_branch_extends_continuously_to_both_poles() {
    let g = UnimodalSpec::g0_with_branch(1.5, RightBranch::Symmetric).unwrap();
    for sign in [-1.0, 1.0] {
        let v = near_pole_values(&g, sign);
        assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
        assert!(v[3] < 1e-3, "{v:?}");
    }
}

#[test]
fn folded_branch_is_continuous_at_minus_one_only() {
    let g = UnimodalSpec::g0(1.5).unwrap();
    let left = near_pole_values(&g, -1.0);
    assert!(left[3] < 1e-3, "{left:?}");
    // g₀'(1) = 0 there, so d grows like gap^(1 - γ - ω)
    let right = near_pole_values(&g, 1.0);
    assert!(right.windows(2).all(|w| w[1] > w[0]), "{right:?}");
    let slope = (right[3] / right[0]).ln() / (1e-9f64 / 1e-3).ln();
    assert!((slope - (1.0 - GAMMA - OMEGA)).abs() < 0.01, "slope {slope}");
}

#[test]
fn fitted_exponent_near_the_critical_parallel() {
    // the conorm near t = 0 is the parallel factor, of order |t|^α
    for alpha in [1.5, 2.0, 2.5] {
        let g = UnimodalSpec::g0(alpha).unwrap();
        let p = domination_profile(&g, GAMMA, OMEGA, &symmetric_log_grid(1e-10, 0.5, 400)).unwrap();
        let fitted = p.fitted_exponent.unwrap();
        assert!((fitted - critical_exponent(alpha, GAMMA, OMEGA)).abs() < 5e-3, "alpha {alpha}: {fitted}");
    }
}
