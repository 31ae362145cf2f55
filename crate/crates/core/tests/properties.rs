//! Invariants checked over sampled inputs.

use proptest::prelude::*;
use starwall::calculus::{
    derivative_at_node, fourier_x, integrate_p, integrate_x, inverse_fourier_x, partial_derivative_x, partial_derivative_x_with,
    Stencil,
};
use starwall::dp::{dp_stargenvalue_residual, naive_stargenvalue_residual, wigner_transform, ConfinedEigenstate};
use starwall::dynamics::{global_balance, moyal_residual_field, source_term, TimeState};
use starwall::kw::{apply_boundary_filter, basis_gram_condition, physical_normalization, select_physical, MomentumProfile};
use starwall::startools::{stencil_for, star_p2_left, star_p2_right, triple_star_p2, weak_sandwich, EpsilonRule, WeakSandwichConfig};
use starwall::wall::{solve_wall_state, wigner_of_wall_state, WallParameters, DEFAULT_NODES};
use starwall::{tolerance, PhaseFunction, PhaseGrid, ResidualReport, WaveFunction, C64};

fn small() -> PhaseGrid {
    PhaseGrid::new(161, 128, -4.0, 1.0, -8.0, 8.0).unwrap()
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn max_diff(a: &PhaseFunction, b: &PhaseFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max)
}

fn coeff() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b))
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn derivative_integrates_to_boundary_difference(a in 0.2f64..2.0, b in -1.0f64..1.0, c in -0.3f64..0.3) {
        let g = small();
        let f = PhaseFunction::from_real_fn(&g, "f", move |x, p| (a * x + b * p).sin() * (c * x).exp());
        let d = partial_derivative_x(&f, 1).unwrap();
        let lhs = integrate_x(&d);
        for (j, v) in lhs.iter().enumerate() {
            let rhs = f.get(g.n_x - 1, j) - f.get(0, j);
            prop_assert!((v - rhs).norm() < 1e-6, "p = {}: {} vs {}", g.p(j), v, rhs);
        }
    }

    #[test]
    fn fourier_transform_inverts(x0 in -3.0f64..0.0, w in 0.3f64..1.0, q in -2.0f64..2.0) {
        let g = small();
        let f = PhaseFunction::from_fn(&g, "f", move |x, p| C64::from_polar((-(x - x0).powi(2) / (w * w)).exp(), q * p));
        let back = inverse_fourier_x(&fourier_x(&f), &g).unwrap();
        prop_assert!(max_diff(&back, &f) < 1e-8);
    }

    #[test]
    fn second_derivative_converges_at_fourth_order(a in 1.0f64..3.0) {
        let err = |n: usize| {
            let g = PhaseGrid::new(n, 16, -4.0, 1.0, -1.0, 1.0).unwrap();
            let f = PhaseFunction::from_real_fn(&g, "f", move |x, _| (a * x).sin());
            let d = partial_derivative_x(&f, 2).unwrap();
            (0..g.n_x).map(|i| (d.get(i, 0).re + a * a * (a * g.x(i)).sin()).abs()).fold(0.0, f64::max)
        };
        let (coarse, fine) = (err(65), err(129));
        prop_assert!(coarse / fine > 12.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn left_bopp_product_is_linear(a in coeff(), b in coeff(), s in 0.2f64..2.0, e in 0.0f64..4.0) {
        let g = small();
        let f = PhaseFunction::from_fn(&g, "f", move |x, p| C64::from_polar(1.0, s * x + 0.3 * p));
        let h = PhaseFunction::from_real_fn(&g, "h", move |x, p| (-(x + 1.0) * (x + 1.0)).exp() * (s * p).cos());
        let lhs = star_p2_left(&f.combine(a, &h, b).unwrap(), e).unwrap();
        let rhs = star_p2_left(&f, e).unwrap().combine(a, &star_p2_left(&h, e).unwrap(), b).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-10 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn right_product_conjugates_left_on_real_fields(s in 0.2f64..2.0, e in 0.0f64..4.0) {
        let g = small();
        let f = PhaseFunction::from_real_fn(&g, "f", move |x, p| (s * x * p).sin() + (-(x * x)).exp());
        let l = star_p2_left(&f, e).unwrap();
        let r = star_p2_right(&f, e).unwrap();
        prop_assert!(max_diff(&r, &l.conj()) < 1e-12 * (1.0 + l.max_abs()));
    }

    #[test]
    fn real_parts_of_both_products_give_the_kinetic_term(s in 0.2f64..2.0) {
        let g = small();
        let f = PhaseFunction::from_real_fn(&g, "f", move |x, p| (s * x + p).cos() * (-0.1 * x * x).exp());
        let l = star_p2_left(&f, 0.0).unwrap();
        let r = star_p2_right(&f, 0.0).unwrap();
        let dxx = partial_derivative_x_with(&f, 2, &stencil_for(&f)).unwrap();
        for i in 0..g.n_x {
            for j in 0..g.n_p {
                let p = g.p(j);
                let want = 2.0 * (p * p * f.get(i, j).re - 0.25 * dxx.get(i, j).re);
                prop_assert!((l.get(i, j).re + r.get(i, j).re - want).abs() < 1e-10 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn wigner_functions_are_real_and_confined(c in prop::collection::vec((coeff(), 0.2f64..6.0), 1..=3)) {
        let g = small();
        let f = wigner_transform(&WaveFunction::superposition(c).unwrap(), &g).unwrap();
        prop_assert!(f.max_imag() < 1e-9);
        for i in g.wall_index()..g.n_x {
            prop_assert!(f.row(i).iter().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn confined_family_obeys_energy_scaling(e in 0.3f64..6.0) {
        let s = e.sqrt();
        let g = PhaseGrid::new(129, 96, -4.0, 1.0, -6.0, 6.0).unwrap();
        let gs = PhaseGrid::new(129, 96, -4.0 * s, 1.0 * s, -6.0 / s, 6.0 / s).unwrap();
        let fe = ConfinedEigenstate::new(e).unwrap().wigner(&g).unwrap();
        let f1 = ConfinedEigenstate::new(1.0).unwrap().wigner(&gs).unwrap();
        for i in 0..g.n_x {
            for j in 0..g.n_p {
                prop_assert!((gs.x(i) - s * g.x(i)).abs() < 1e-12 && (gs.p(j) - g.p(j) / s).abs() < 1e-12);
                prop_assert!((fe.get(i, j) - f1.get(i, j) / s).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn exponentials_are_independent_away_from_degeneracies(e in 0.25f64..9.0, p in -10.0f64..10.0) {
        let k = e.sqrt();
        // roots coincide at p = 0 and p = +-sqrt(E)
        prop_assume!(p.abs() > 0.2 && (p - k).abs() > 0.2 && (p + k).abs() > 0.2);
        let c = basis_gram_condition(e, p, &PhaseGrid::desk());
        prop_assert!(c.is_finite() && c < 1e3, "condition {}", c);
    }

    #[test]
    fn filtered_solutions_meet_the_smooth_wall_conditions(e in 0.5f64..4.0, a in -0.5f64..0.5, w in 0.5f64..3.0) {
        let g = PhaseGrid::desk();
        let profiles = [
            MomentumProfile::Physical,
            MomentumProfile::Exponential { a },
            MomentumProfile::custom(g.ps(), g.ps().iter().map(|p| 1.0 + (-(p * p) / (w * w)).exp()).collect()).unwrap(),
        ];
        for n in &profiles {
            let rho = apply_boundary_filter(e, n, &g).unwrap();
            let scale = rho.max_abs();
            let w0 = g.wall_index();
            let v0 = rho.row(w0).iter().map(|v| v.norm()).fold(0.0, f64::max) / scale;
            prop_assert!(v0 == 0.0, "{n:?}: rho(0, p) = {v0:e}");
            for order in 1..=2 {
                let d = derivative_at_node(&rho, w0, order, &Stencil::default()).unwrap();
                let worst = d.iter().map(|v| v.norm()).fold(0.0, f64::max) / scale;
                prop_assert!(worst < tolerance::boundary(&g), "{n:?} order {order}: {worst:e}");
            }
        }
    }

    #[test]
    fn source_is_real(c in prop::collection::vec((coeff(), 0.2f64..6.0), 1..=3), t in -1.0f64..1.0) {
        let mut c = c;
        c.dedup_by(|u, v| u.1 == v.1);
        let k = source_term(&TimeState::new(c).unwrap(), t, &small());
        prop_assert!(k.max_imag() < 1e-12);
    }
}

proptest! {
    #![proptest_config(config(6))]

    #[test]
    fn marginal_is_nonnegative(e in 0.5f64..4.0) {
        let g = PhaseGrid::new(129, 1201, -4.0, 1.0, -60.0, 60.0).unwrap();
        let f = ConfinedEigenstate::new(e).unwrap().wigner(&g).unwrap();
        let m = integrate_p(&f).unwrap();
        prop_assert!(m.iter().all(|&v| v >= -2e-2), "min {}", m.iter().cloned().fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn time_reversal_flips_the_transport_residual(c1 in -1.0f64..1.0, c2 in -1.0f64..1.0, e2 in 1.5f64..4.0, t in 0.05f64..0.5) {
        let g = small();
        let s = TimeState::new(vec![(C64::new(c1, 0.0), 1.0), (C64::new(c2, 0.0), e2)]).unwrap();
        prop_assert!(s.has_real_coefficients());
        let fwd = moyal_residual_field(&s, t, 1e-3, &g, true).unwrap();
        let back = moyal_residual_field(&s, -t, 1e-3, &g, true).unwrap();
        let tol = 1e-9 * (1.0 + fwd.max_abs());
        for i in 0..g.n_x {
            for j in 0..g.n_p {
                prop_assert!((back.get(i, j) + fwd.get(i, g.n_p - 1 - j)).norm() < tol);
            }
        }
    }

    #[test]
    fn transport_balances_globally(c1 in coeff(), c2 in coeff(), e2 in 1.5f64..4.0, t in 0.0f64..0.5) {
        let s = TimeState::new(vec![(c1, 1.0), (c2, e2)]).unwrap();
        let b = global_balance(&s, t, 1e-3, &PhaseGrid::desk()).unwrap();
        let scale = b.rate.abs() + b.source.abs() + b.flux.abs();
        prop_assert!(b.residual().abs() < 1e-4 * (1.0 + scale), "{b:?}");
    }

    #[test]
    fn weak_sandwich_matches_the_closed_form(e in 0.5f64..4.0, c in -0.5f64..0.5) {
        let phi = WaveFunction::confined(e).unwrap();
        let ps: Vec<f64> = (-4..=4).map(|m| 0.75 * m as f64).collect();
        let ws = weak_sandwich(&phi, &ps, move |x| (-(x - c) * (x - c)).exp(), &WeakSandwichConfig::default()).unwrap();
        prop_assert!(ws.discrepancy < tolerance::DELTA_REL, "discrepancy {}", ws.discrepancy);
    }

    #[test]
    fn barrier_phase_and_amplitude_are_consistent(alpha in 1.0f64..8.0, e in 0.5f64..4.0) {
        let s = solve_wall_state(&WallParameters::for_alpha(alpha, e).unwrap(), DEFAULT_NODES).unwrap();
        let x0 = s.params.x_match;
        let k = e.sqrt();
        for m in 0..=40 {
            let x = x0 + (-0.5 * x0) * m as f64 / 40.0;
            let want = 2.0 * (k * x + s.phase_shift).sin();
            prop_assert!((s.xi.eval(x).re - want).abs() < 1e-6, "x = {x}");
        }
    }
}

proptest! {
    #![proptest_config(config(3))]

    #[test]
    fn naive_residual_dwarfs_the_wall_residual(e in 0.5f64..4.0) {
        let g = PhaseGrid::desk();
        let f = ConfinedEigenstate::new(e).unwrap().wigner(&g).unwrap();
        let naive = naive_stargenvalue_residual(&f, e).unwrap();
        let dp = dp_stargenvalue_residual(&f, e, &EpsilonRule::richardson3(&g)).unwrap();
        prop_assert!(naive.max_abs > 100.0 * dp.max_abs, "{} vs {}", naive.max_abs, dp.max_abs);
    }
}

#[test]
fn physical_solution_solves_the_wall_equation() {
    let g = PhaseGrid::desk();
    for e in [1.0, 2.0, 4.0] {
        let sel = select_physical(e, &g).unwrap();
        let r = dp_stargenvalue_residual(&sel.f, e, &EpsilonRule::richardson3(&g)).unwrap();
        assert!(r.pass, "E = {e}: {}", r.summary());
    }
}

#[test]
fn physical_solution_solves_the_triple_product_equation() {
    let g = PhaseGrid::desk();
    for e in [1.0, 2.0, 4.0] {
        let rho = apply_boundary_filter(e, &MomentumProfile::Physical, &g)
            .unwrap()
            .scale(C64::new(physical_normalization(e), 0.0));
        let t = triple_star_p2(&rho, e).unwrap();
        let mask = starwall::calculus::interior_x_mask(g.n_x, stencil_for(&rho).edge_margin(4));
        let r = ResidualReport::from_field("triple star", &t, Some(&mask), tolerance::kw(&g));
        assert!(r.pass, "E = {e}: {}", r.summary());
    }
}

#[test]
fn barrier_state_localizes_the_wall_influence() {
    let g = PhaseGrid::new(201, 200, -8.0, 2.0, -10.0, 10.0).unwrap();
    let hard = ConfinedEigenstate::new(1.0).unwrap().wigner(&g).unwrap();
    for alpha in [2.0, 4.0, 8.0] {
        let s = solve_wall_state(&WallParameters::for_alpha(alpha, 1.0).unwrap(), DEFAULT_NODES).unwrap();
        let f = wigner_of_wall_state(&s, &g).unwrap();
        let d = max_diff(&f, &hard);
        let far = (0..g.n_x)
            .filter(|&i| g.x(i) <= -3.0 / alpha)
            .flat_map(|i| (0..g.n_p).map(move |j| (i, j)))
            .map(|(i, j)| (f.get(i, j) - hard.get(i, j)).norm())
            .fold(0.0, f64::max);
        assert!(far <= 2.0 * d, "alpha = {alpha}: {far} vs d = {d}");
    }
}
