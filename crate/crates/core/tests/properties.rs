use std::f64::consts::{LN_2, TAU};

use num_complex::Complex64;
use proptest::prelude::*;

use rovella_core::flow_model::{pi2, pi3, return_map_by_composition, return_map_r0, CrossSectionPoint, Fiber, SaddleSpec};
use rovella_core::interval_maps::{solve_conjugacy, ConjugacyOperator, ConjugacyTable, RightBranch, Stability, UnimodalSpec};
use rovella_core::measures;
use rovella_core::pliss::{abv0_pipeline, hyperbolic_times, pliss_times, Abv0Params, HyperbolicTimeParams, PlissParams};
use rovella_core::solenoid::{step_s, SolenoidSpec, SolidTorusState};
use rovella_core::torusphere::{birkhoff_log_factors, cocycle_factors, step_g, TspherePoint};

fn g0() -> UnimodalSpec {
    UnimodalSpec::g0(1.5).unwrap()
}

fn table() -> &'static ConjugacyTable {
    use std::sync::OnceLock;
    static T: OnceLock<ConjugacyTable> = OnceLock::new();
    T.get_or_init(|| solve_conjugacy(&g0(), 10_000, 1e-9).unwrap())
}

fn branch() -> impl Strategy<Value = RightBranch> {
    prop_oneof![Just(RightBranch::Folded), Just(RightBranch::Symmetric)]
}

fn brute_pliss(a: &[f64], c1: f64) -> Vec<usize> {
    (1..=a.len())
        .filter(|&n| (0..n).all(|k| a[k..n].iter().sum::<f64>() >= c1 * (n - k) as f64))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugacy_sweep_halves_sup_distance(
        alpha in 1.05f64..1.95,
        h in prop::collection::vec(-1.0f64..1.0, 201),
        k in prop::collection::vec(-1.0f64..1.0, 201),
    ) {
        let op = ConjugacyOperator::new(&UnimodalSpec::g0(alpha).unwrap(), 200).unwrap();
        prop_assume!(op.grid().len() == h.len());
        let before = h.iter().zip(&k).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let (gh, gk) = (op.apply(&h), op.apply(&k));
        let after = gh.iter().zip(&gk).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(after <= 0.5 * before + 1e-15);
    }

    #[test]
    fn conjugacy_preserves_itineraries(x in -1.0f64..1.0) {
        let n = 20;
        let g = g0();
        let sg = g.itinerary(x, n).unwrap();
        let hx = table().refined(x, 60);
        let st = UnimodalSpec::tent().itinerary(hx, n).unwrap();
        let orbit = measures::orbit(&g, x, n);
        for j in 0..n {
            if orbit[j].t().abs() >= 1e-3 {
                prop_assert_eq!(sg[j], st[j], "index {}", j);
            }
        }
    }

    #[test]
    fn g0_has_two_fixed_points(alpha in 1.05f64..1.95, b in branch()) {
        let g = UnimodalSpec::g0_with_branch(alpha, b).unwrap();
        let r = g.find_fixed_points(1e-12).unwrap();
        prop_assert_eq!(r.points.len(), 2);
        prop_assert_eq!(r.points[0].location, -1.0);
        prop_assert!((r.points[0].multiplier - 2.0 * alpha).abs() < 1e-9);
        prop_assert!(r.points[1].multiplier < -1.0);
        prop_assert!(r.points.iter().all(|p| p.stability == Stability::Repelling));
    }

    #[test]
    fn step_g_is_the_skew_product(t in -1.0f64..1.0, theta in prop::collection::vec(0.0f64..TAU, 1..4), n in 1usize..8) {
        let g = UnimodalSpec::g0_with_branch(1.5, RightBranch::Symmetric).unwrap();
        let mut p = TspherePoint::new(t, theta.clone()).unwrap();
        let mut x = t;
        let mut angles = theta;
        for _ in 0..n {
            p = step_g(&p, &g).unwrap();
            x = g.eval(x).unwrap();
            angles = angles.iter().map(|a| (2.0 * a).rem_euclid(TAU)).collect();
        }
        prop_assert!((p.t() - x).abs() <= 1e-9);
        for (a, b) in p.theta().iter().zip(&angles) {
            let d = (a - b).rem_euclid(TAU);
            prop_assert!(d.min(TAU - d) < 1e-12);
        }
    }

    #[test]
    fn parallel_sum_telescopes(t in -1.0f64..1.0, n in 1usize..2000, b in branch()) {
        let g = UnimodalSpec::g0_with_branch(1.5, b).unwrap();
        let p = TspherePoint::new(t, vec![0.5]).unwrap();
        if let Ok(s) = birkhoff_log_factors(&p, &g, n) {
            prop_assert!(s.telescoping_residual() < 1e-8 * n as f64);
        }
    }

    #[test]
    fn parallel_average_at_returns_is_at_least_log_two(t in -0.99f64..0.99) {
        prop_assume!(t != 0.0);
        let g = g0();
        let p = TspherePoint::new(t, vec![0.0]).unwrap();
        for n in 1..200 {
            let s = birkhoff_log_factors(&p, &g, n).unwrap();
            if s.t_final.abs() <= t.abs() {
                prop_assert!(s.sum_parallel / n as f64 >= LN_2 - 1e-12, "n = {}", n);
            }
        }
    }

    #[test]
    fn conorm_vanishes_near_the_critical_parallel(t in -1e-4f64..1e-4) {
        prop_assume!(t != 0.0);
        let f = cocycle_factors(&TspherePoint::new(t, vec![0.0]).unwrap(), &g0()).unwrap();
        prop_assert!(f.conorm < 1e-4);
    }

    #[test]
    fn factors_do_not_depend_on_angles(t in -0.999f64..0.999, theta in prop::collection::vec(0.0f64..TAU, 1..5)) {
        let g = g0();
        let one = cocycle_factors(&TspherePoint::new(t, vec![0.0]).unwrap(), &g).unwrap();
        let many = cocycle_factors(&TspherePoint::new(t, theta).unwrap(), &g).unwrap();
        prop_assert_eq!(one, many);
    }

    #[test]
    fn pliss_matches_brute_force(
        raw in prop::collection::vec(-16i32..=32, 1..100),
        c1n in 1i32..16,
        gap in 1i32..16,
    ) {
        let a: Vec<f64> = raw.iter().map(|&v| v as f64 / 16.0).collect();
        let c1 = c1n as f64 / 16.0;
        let c2 = c1 + gap as f64 / 16.0;
        let params = PlissParams::new(c1, c2, c2.max(2.0) + 0.5).unwrap();
        prop_assert_eq!(pliss_times(&a, &params).unwrap().times, brute_pliss(&a, c1));
    }

    #[test]
    fn appending_a_low_term_keeps_earlier_times(raw in prop::collection::vec(-16i32..=32, 1..60), last in -16i32..=8) {
        let a: Vec<f64> = raw.iter().map(|&v| v as f64 / 16.0).collect();
        let params = PlissParams::new(0.5, 0.75, 3.0).unwrap();
        let before = pliss_times(&a, &params).unwrap().times;
        let mut longer = a.clone();
        longer.push(last as f64 / 16.0);
        let after = pliss_times(&longer, &params).unwrap().times;
        let earlier: Vec<usize> = after.into_iter().filter(|&t| t <= a.len()).collect();
        prop_assert_eq!(earlier, before);
    }

    #[test]
    fn hyperbolic_times_satisfy_both_sums(
        psi in prop::collection::vec(-3.0f64..1.5, 1..80),
        dseed in prop::collection::vec(0.0f64..0.3, 80),
        c in 0.1f64..1.0,
    ) {
        let d: Vec<f64> = dseed[..psi.len()].iter().map(|&x| if x < 0.2 { 0.0 } else { x }).collect();
        let params = HyperbolicTimeParams::new(c, 0.1, 0.2, 1.0).unwrap();
        let r = hyperbolic_times(&psi, &d, &params).unwrap();
        for &h in &r.times {
            for k in 1..=h {
                let s: f64 = psi[h - k..h].iter().sum();
                let t: f64 = d[h - k..h].iter().sum();
                prop_assert!(s <= -c * k as f64 + 1e-9);
                prop_assert!(t <= params.b() * c * k as f64 + 1e-9);
            }
        }
    }

    #[test]
    fn abv0_constant_chain(seed in 0u64..1000, xi in 0.05f64..0.95, zeta in 0.05f64..0.95, b in 0.05f64..0.45) {
        let (psi, dist) = measures::meridian_data(&g0(), seed, 20_000);
        let c = -psi.iter().sum::<f64>() / psi.len() as f64;
        let out = abv0_pipeline(&psi, &dist, &Abv0Params { c, xi, zeta, b }).unwrap();
        prop_assume!(out.hypothesis_failure.is_none());
        let k = out.constants;
        prop_assert!(k.gamma0 > xi && k.gamma0 < 1.0);
        prop_assert!(k.theta1 > 0.0 && k.theta1 < 1.0);
        prop_assert!(k.theta2 > 0.0 && k.theta2 < 1.0);
        prop_assert!((k.theta - (k.theta1 + k.theta2 - 1.0)).abs() < 1e-15);
        if k.eps2 < b * c * k.theta1 {
            prop_assert!(k.theta > 0.0);
        }
    }

    #[test]
    fn fiber_disk_collapses_onto_a_stable_leaf(
        x1 in -1.0f64..1.0,
        x2 in -1.0f64..1.0,
        theta in 0.0f64..TAU,
        z1 in (0.0f64..1.0, 0.0f64..TAU),
        z2 in (0.0f64..1.0, 0.0f64..TAU),
    ) {
        prop_assume!(x1 != 0.0);
        let s = SaddleSpec::new(1.0, -4.5, -2.0, 4.0, 1.0).unwrap();
        let f0 = UnimodalSpec::f0(2.0).unwrap();
        let sol = SolenoidSpec::default();
        let za = Complex64::from_polar(z1.0, z1.1);
        let zb = Complex64::from_polar(z2.0, z2.1);
        let a = CrossSectionPoint::new(x1, x2, Fiber::solid_torus(vec![theta], za).unwrap()).unwrap();
        let b = CrossSectionPoint::new(x1, x2, Fiber::solid_torus(vec![theta], zb).unwrap()).unwrap();
        prop_assert_eq!(pi2(&a).unwrap(), pi2(&b).unwrap());
        prop_assert_eq!(pi3(&a).unwrap(), pi3(&b).unwrap());
        let (ra, rb) = (return_map_r0(&a, &f0, &s, &sol).unwrap(), return_map_r0(&b, &f0, &s, &sol).unwrap());
        prop_assert_eq!((ra.x1, ra.x2), (rb.x1, rb.x2));
        let (Fiber::SolidTorus(wa), Fiber::SolidTorus(wb)) = (&ra.fiber, &rb.fiber) else { unreachable!() };
        prop_assert!((wa.z - wb.z).norm() <= sol.lambda() * (za - zb).norm() * (1.0 + 1e-12) + 1e-16);
    }

    #[test]
    fn x2_direction_contracts(x1 in -1.0f64..1.0, x2 in -0.9f64..0.9) {
        prop_assume!(x1 != 0.0);
        let s = SaddleSpec::new(1.0, -4.5, -2.0, 4.0, 1.0).unwrap();
        let f0 = UnimodalSpec::f0(2.0).unwrap();
        let sol = SolenoidSpec::default();
        let h = 1e-6;
        let at = |y: f64| {
            let p = CrossSectionPoint::new(x1, y, Fiber::solid_torus(vec![0.0], Complex64::new(0.0, 0.0)).unwrap()).unwrap();
            return_map_r0(&p, &f0, &s, &sol).unwrap().x2
        };
        let slope = ((at(x2 + h) - at(x2 - h)) / (2.0 * h)).abs();
        prop_assert!(slope <= 1.0 / s.c() + 1e-6);
    }

    #[test]
    fn closed_form_and_composed_return_maps_agree(x1 in -1.0f64..1.0, x2 in -1.0f64..1.0, theta in 0.0f64..TAU) {
        prop_assume!(x1 != 0.0);
        let s = SaddleSpec::new(1.0, -4.5, -2.0, 4.0, 1.0).unwrap();
        let f0 = UnimodalSpec::f0(2.0).unwrap();
        let sol = SolenoidSpec::default();
        let p = CrossSectionPoint::new(x1, x2, Fiber::solid_torus(vec![theta], Complex64::new(0.3, -0.2)).unwrap()).unwrap();
        let a = return_map_r0(&p, &f0, &s, &sol).unwrap();
        let b = return_map_by_composition(&p, &f0, &s, &sol).unwrap();
        prop_assert!((a.x1 - b.x1).abs() < 1e-12);
        prop_assert!((a.x2 - b.x2).abs() < 1e-12);
    }

    #[test]
    fn admissible_saddles_are_dissipative(l2 in -10.0f64..-0.1, l3 in -5.0f64..-0.1, c in 1.01f64..10.0) {
        if let Ok(s) = SaddleSpec::new(1.0, l2, l3, c, 1.0) {
            prop_assert!(s.alpha() > 1.0);
            prop_assert!(s.beta() > s.alpha() + 2.0);
        }
    }

    #[test]
    fn solenoid_fiber_map_contracts_exactly(
        theta in 0.0f64..TAU,
        a in (0.0f64..1.0, 0.0f64..TAU),
        b in (0.0f64..1.0, 0.0f64..TAU),
    ) {
        let s = SolenoidSpec::default();
        let za = Complex64::from_polar(a.0, a.1);
        let zb = Complex64::from_polar(b.0, b.1);
        let pa = step_s(&SolidTorusState::new(vec![theta], za).unwrap(), &s);
        let pb = step_s(&SolidTorusState::new(vec![theta], zb).unwrap(), &s);
        prop_assert!(((pa.z - pb.z).norm() - s.lambda() * (za - zb).norm()).abs() < 1e-15);
        prop_assert!(pa.z.norm() <= s.lambda() + s.c() + 1e-15);
        prop_assert_eq!(pa.theta[0], (2.0 * theta).rem_euclid(TAU));
    }

    #[test]
    fn histograms_conserve_mass(seed in 0u64..10_000, alpha in 1.1f64..1.9) {
        let s = measures::density_histogram(&UnimodalSpec::g0(alpha).unwrap(), seed, 10_000, 20).unwrap();
        prop_assert!((s.histogram.total_mass() - 1.0).abs() < 1e-12);
        prop_assert!(s.birkhoff.values().all(|v| v.is_finite()));
    }
}
