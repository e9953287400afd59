use dirac_core::grid::{inner_product, InnerProductScheme, RadialGrid};
use dirac_core::harness::{parameter_grid, GridScale};
use dirac_core::solver::count_sign_changes;
use dirac_core::{make_homotopy, solve, ChannelSpec, PotentialFamily, SignClass, SolveConfig};
use proptest::prelude::*;

/// Closed-form Dirac–Coulomb energy for radial quantum number `radial`.
fn coulomb_formula(radial: u32, j: f64, alpha: f64) -> f64 {
    let s = ((j + 0.5).powi(2) - alpha * alpha).sqrt();
    let d = radial as f64 + s;
    (1.0 + alpha * alpha / (d * d)).powf(-0.5)
}

fn slow_cases(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #[test]
    fn grids_are_increasing_with_exact_ends(r0 in 1e-9f64..1e-2, span in 1.0f64..1e3, n in 50usize..2000, b in 1e-3f64..2.0) {
        let r_max = r0 + span;
        for g in [RadialGrid::log(r0, r_max, n).unwrap(), RadialGrid::shifted(b, r_max, n).unwrap()] {
            prop_assert_eq!(g.len(), n);
            prop_assert_eq!(g.last(), r_max);
            prop_assert!(g.points().windows(2).all(|w| w[1] > w[0]));
            prop_assert!(g.weights().iter().all(|w| *w > 0.0));
        }
    }

    #[test]
    fn weights_integrate_constants(r0 in 1e-6f64..1e-2, r_max in 5.0f64..100.0, n in 400usize..2000) {
        let g = RadialGrid::log(r0, r_max, n).unwrap();
        let total: f64 = g.weights().iter().sum();
        prop_assert!(((total - (r_max - r0)) / r_max).abs() < 1e-6, "{} vs {}", total, r_max - r0);
    }

    #[test]
    fn inner_product_is_symmetric_and_linear(n in 100usize..600, c in -3.0f64..3.0, k in 0.1f64..3.0) {
        let g = RadialGrid::shifted(0.2, 10.0, n).unwrap();
        let u: Vec<f64> = g.points().iter().map(|x| (k * x).sin()).collect();
        let v: Vec<f64> = g.points().iter().map(|x| (-x).exp()).collect();
        let w: Vec<f64> = g.points().iter().map(|x| x / (1.0 + x)).collect();
        let s = InnerProductScheme::default();
        let ip = |a: &[f64], b: &[f64]| inner_product(&g, a, b, s).unwrap();
        prop_assert!((ip(&u, &v) - ip(&v, &u)).abs() < 1e-14);
        let combo: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + c * b).collect();
        let lhs = ip(&combo, &v);
        let rhs = ip(&u, &v) + c * ip(&w, &v);
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn parameter_grids_hit_both_ends(from in 0.01f64..5.0, width in 0.01f64..10.0, steps in 2usize..50, log in any::<bool>()) {
        let to = from + width;
        let scale = if log { GridScale::Log } else { GridScale::Linear };
        let g = parameter_grid(from, to, steps, scale).unwrap();
        prop_assert_eq!(g.len(), steps);
        prop_assert_eq!(g[0], from);
        prop_assert_eq!(g[steps - 1], to);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn node_count_ignores_overall_scale(values in prop::collection::vec(-1.0f64..1.0, 0..200), scale in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0]) {
        let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
        prop_assert_eq!(count_sign_changes(&values, 0.0), count_sign_changes(&scaled, 0.0));
        prop_assert!(count_sign_changes(&values, 0.5) <= count_sign_changes(&values, 0.0));
    }

    #[test]
    fn cutoff_coulomb_rises_with_cutoff(alpha in 0.1f64..3.0, a in 0.01f64..5.0, da in 0.01f64..2.0, r in 1e-6f64..50.0) {
        let lo = PotentialFamily::cutoff_coulomb(alpha, a).unwrap();
        let hi = PotentialFamily::cutoff_coulomb(alpha, a + da).unwrap();
        prop_assert!(hi.evaluate(r).unwrap() >= lo.evaluate(r).unwrap());
        prop_assert!(lo.param_derivative(r).unwrap() >= 0.0);
        prop_assert!(lo.evaluate(r).unwrap() <= 0.0);
    }

    #[test]
    fn homotopy_interpolates_endpoints(a1 in 0.05f64..2.0, a2 in 0.05f64..2.0, t in 0.0f64..1.0, r in 1e-4f64..20.0) {
        let v1 = PotentialFamily::cutoff_coulomb(1.0, a1).unwrap();
        let v2 = PotentialFamily::cutoff_coulomb(1.0, a2).unwrap();
        let path = make_homotopy(&v1, &v2);
        let at = |t: f64| path.with_active_value(t).unwrap().evaluate(r).unwrap();
        let (e1, e2) = (v1.evaluate(r).unwrap(), v2.evaluate(r).unwrap());
        prop_assert!((at(0.0) - e1).abs() <= 1e-12 * e1.abs());
        prop_assert!((at(1.0) - e2).abs() <= 1e-12 * e2.abs());
        prop_assert!((at(t) - ((1.0 - t) * e1 + t * e2)).abs() <= 1e-12 * (e1.abs() + e2.abs()));
        let expected = if a2 >= a1 { SignClass::NonNegative } else { SignClass::NonPositive };
        prop_assert_eq!(path.classify_sign(100.0, 256).unwrap(), expected);
    }

    #[test]
    fn family_text_round_trips(alpha in 0.01f64..3.0, a in 0.01f64..5.0) {
        let f = PotentialFamily::cutoff_coulomb(alpha, a).unwrap();
        let back: PotentialFamily = f.to_string().parse().unwrap();
        prop_assert_eq!(back, f);
    }
}

proptest! {
    #![proptest_config(slow_cases(12))]

    #[test]
    fn coulomb_states_match_closed_form(alpha in 0.05f64..0.95, j_index in 0usize..2, n_r in 0usize..3, plus in any::<bool>()) {
        let j = [0.5, 1.5][j_index];
        let tau: i8 = if plus { 1 } else { -1 };
        let channel = ChannelSpec::radial(3, tau, j).unwrap();
        let family = PotentialFamily::pure_coulomb(alpha).unwrap();
        let state = solve(&channel, &family, n_r, &SolveConfig::default()).unwrap();
        // the τ = +1 channel has one more radial excitation per ψ1 node count
        let radial = n_r as u32 + u32::from(plus);
        let exact = coulomb_formula(radial, j, alpha);
        prop_assert!((state.energy - exact).abs() < 1e-8, "E = {} vs {}", state.energy, exact);
        prop_assert_eq!(state.nodes, n_r);
        prop_assert!((state.norm() - 1.0).abs() < 1e-10);
        prop_assert!(state.antisymmetry_residual() < 1e-6);
    }

    #[test]
    fn cutoff_levels_are_ordered_and_monotone(a in 0.1f64..2.0, da in 0.05f64..1.0) {
        let channel = ChannelSpec::radial(3, -1, 0.5).unwrap();
        let config = SolveConfig::default();
        let e = |a: f64, n_r: usize| solve(&channel, &PotentialFamily::cutoff_coulomb(1.0, a).unwrap(), n_r, &config).unwrap().energy;
        let (g, x) = (e(a, 0), e(a, 1));
        prop_assert!(-1.0 < g && g < x && x < 1.0);
        prop_assert!(e(a + da, 0) > g);
    }
}
