//! Worked examples checked against oracles that share no code with the library.

use std::f64::consts::{FRAC_PI_2, PI};

use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starwall::calculus::fourier::conjugate_axis;
use starwall::calculus::{fourier_x, integrate_p, integrate_x, DEFAULT_TAIL_TOL};
use starwall::dp::{
    boundary_conditions_check, dp_stargenvalue_residual, equivalence_chain_residual, naive_residual_full_line,
    ConfinedEigenstate, WeakTests,
};
use starwall::kw::{
    apply_boundary_filter, assemble_solution, kw_residual, profile_consistency, select_physical, KWSolutionBasis,
    MomentumProfile,
};
use starwall::startools::{star_deltaprime_left, star_deltaprime_sandwich, EpsilonRule};
use starwall::wall::{solve_wall_state, wigner_of_wall_state, WallParameters, DEFAULT_NODES};
use starwall::{tolerance, PhaseFunction, PhaseGrid, C64};

fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> C64) -> C64 {
    let h = (b - a) / n as f64;
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..=n {
        let w = if m == 0 || m == n { 1.0 } else if m % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + h * m as f64) * w;
    }
    acc * (h / 3.0)
}

/// `arg Gamma(i nu)` from Stirling's series after upward recurrence.
fn arg_gamma_i(nu: f64) -> f64 {
    let mut z = C64::new(0.0, nu);
    let mut acc = C64::new(0.0, 0.0);
    while z.re < 10.0 {
        acc -= z.ln();
        z += 1.0;
    }
    let s = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * z) - 1.0 / (360.0 * z.powi(3))
        + 1.0 / (1260.0 * z.powi(5));
    (s + acc).im
}

/// Exact phase shift of the exponential barrier, mapped into `(-pi/2, pi/2]`.
fn exact_phase_shift(alpha: f64, energy: f64) -> f64 {
    let nu = energy.sqrt() / alpha;
    let mut d = FRAC_PI_2 - arg_gamma_i(nu) - nu * (2.0 * alpha).ln();
    while d > FRAC_PI_2 {
        d -= PI;
    }
    while d <= -FRAC_PI_2 {
        d += PI;
    }
    d
}

#[test]
fn confined_wigner_matches_brute_force_quadrature() {
    let g = PhaseGrid::new(257, 256, -6.0, 1.0, -8.0, 8.0).unwrap();
    let f = ConfinedEigenstate::new(1.0).unwrap().wigner(&g).unwrap();
    let phi = |s: f64| if s < 0.0 { C64::new(0.0, 2.0 * s.sin()) } else { C64::new(0.0, 0.0) };
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let (i, j) = (rng.random_range(0..g.n_x), rng.random_range(0..g.n_p));
        let (x, p) = (g.x(i), g.p(j));
        let oracle = if x >= 0.0 {
            C64::new(0.0, 0.0)
        } else {
            simpson(x, -x, 4000, |y| C64::from_polar(1.0, -2.0 * p * y) * phi(x - y).conj() * phi(x + y)) / PI
        };
        assert!((f.get(i, j) - oracle).norm() < 1e-7, "node ({x}, {p})");
    }
    assert!(f.max_imag() < 1e-9);
}

#[test]
fn marginal_vanishes_at_the_wall() {
    let g = PhaseGrid::desk();
    let f = ConfinedEigenstate::new(1.0).unwrap().wigner(&g).unwrap();
    let m = integrate_p(&f).unwrap();
    assert!(m[g.wall_index()].abs() < tolerance::boundary(&g));
}

#[test]
fn zero_frequency_transform_is_the_x_integral() {
    let g = PhaseGrid::desk();
    let f = ConfinedEigenstate::new(1.0).unwrap().wigner(&g).unwrap();
    let s = fourier_x(&f);
    let m0 = conjugate_axis(&g).iter().position(|&y| y == 0.0).unwrap();
    let direct = integrate_x(&f);
    for (j, d) in direct.iter().enumerate() {
        assert!((s.get(m0, j) - d).norm() < 1e-8);
    }
}

#[test]
fn naive_equation_holds_without_the_wall() {
    let g = PhaseGrid::desk();
    assert!(naive_residual_full_line(1.0, &g, &WeakTests::around(1.0)).unwrap().pass);
}

#[test]
fn wall_kernel_balances_the_kinetic_term() {
    let g = PhaseGrid::desk();
    let f = ConfinedEigenstate::new(1.0).unwrap().wigner(&g).unwrap();
    let rule = EpsilonRule::richardson3(&g);
    let ok = dp_stargenvalue_residual(&f, 1.0, &rule).unwrap();
    assert!(ok.pass, "{}", ok.summary());
    let wrong = dp_stargenvalue_residual(&f, 2.0, &rule).unwrap();
    assert!(wrong.max_abs > 10.0 * wrong.tolerance);
}

/// `(1/2pi) int dk ik e^{ikx} g(p - k/2)` for `g(q) = e^{-q^2}` in closed form.
fn gaussian_kernel(x: f64, p: f64) -> C64 {
    C64::new(0.0, 2.0 / PI.sqrt()) * (-x * x).exp() * C64::from_polar(1.0, 2.0 * p * x) * C64::new(p, x)
}

#[test]
fn wall_kernel_ignores_a_distant_bump() {
    let g = PhaseGrid::new(257, 256, -8.0, 2.0, -10.0, 10.0).unwrap();
    let a = 4.0;
    let bump = PhaseFunction::from_real_fn(&g, "bump", move |x, p| (-a * (x + 3.0).powi(2) - p * p).exp());
    let k = star_deltaprime_left(&bump, &EpsilonRule::richardson3(&g)).unwrap();
    assert!(k.max_abs() < DEFAULT_TAIL_TOL);
    // brute-force k-quadrature of the kernel at a few nodes
    for (i, j) in [(60, 128), (100, 100), (150, 200), (180, 40)] {
        let (x, p) = (g.x(i), g.p(j));
        let fx = (-a * (x + 3.0).powi(2)).exp();
        let brute = simpson(-120.0, 120.0, 24_000, |kk| {
            C64::new(0.0, kk) * C64::from_polar(1.0, kk * x) * (-(p - kk / 2.0).powi(2)).exp()
        }) * (fx / (2.0 * PI));
        assert!((brute - gaussian_kernel(x, p) * fx).norm() < 1e-10);
        assert!((k.get(i, j) - brute).norm() < 1e-4, "node ({x}, {p}): {} vs {brute}", k.get(i, j));
    }
}

#[test]
fn sandwich_coefficients_follow_the_wall_slope() {
    let g = PhaseGrid::new(161, 160, -4.0, 1.0, -8.0, 8.0).unwrap();
    for (e, want) in [(1.0, 2.0 / PI), (4.0, 8.0 / PI)] {
        let st = ConfinedEigenstate::new(e).unwrap();
        let f = st.wigner(&g).unwrap();
        let s = star_deltaprime_sandwich(&f, st.psi_prime_0, &EpsilonRule::richardson3(&g)).unwrap();
        assert_eq!(s.regular.max_abs(), 0.0);
        for c in &s.delta_coeff {
            assert_relative_eq!(c.re, want, max_relative = 1e-14);
        }
    }
}

#[test]
fn doubled_wall_slope_quadruples_the_delta_term() {
    let g = PhaseGrid::desk();
    let st = ConfinedEigenstate::new(1.0).unwrap();
    let f = st.wigner(&g).unwrap();
    let rule = EpsilonRule::richardson3(&g);
    let good = equivalence_chain_residual(&f, 1.0, st.psi_prime_0, &rule).unwrap();
    let bad = equivalence_chain_residual(&f, 1.0, st.psi_prime_0 * 2.0, &rule).unwrap();
    assert!(good.pass());
    assert_relative_eq!(bad.delta.details["closed_form"], 4.0 * good.delta.details["closed_form"], max_relative = 1e-12);
    assert!(!bad.delta.pass);
    assert_eq!(bad.regular.max_abs, good.regular.max_abs);
}

#[test]
fn assembled_basis_reproduces_the_sine_form() {
    let g = PhaseGrid::new(129, 160, -4.0, 1.0, -7.93, 8.07).unwrap();
    let n = MomentumProfile::Exponential { a: 0.3 };
    let rho = assemble_solution(&KWSolutionBasis::from_profile(2.0, &n, &g).unwrap());
    let k = 2f64.sqrt();
    for i in 0..g.n_x {
        for j in 0..g.n_p {
            let (x, p) = (g.x(i), g.p(j));
            let direct = n.eval(p) * ((2.0 * x * (p + k)).sin() / (p + k) - (2.0 * x * (p - k)).sin() / (p - k));
            assert!((rho.get(i, j).re - direct).abs() < 1e-12 * (1.0 + direct.abs()), "({x}, {p}): {} vs {direct}", rho.get(i, j));
        }
    }
}

#[test]
fn fourth_order_equation_examples() {
    let g = PhaseGrid::desk();
    let k = 1.0;
    let basis = PhaseFunction::from_fn(&g, "basis", move |x, p| C64::from_polar(1.0, 2.0 * (p + k) * x));
    assert!(kw_residual(&basis, 1.0).unwrap().pass);
    let rho = apply_boundary_filter(1.0, &MomentumProfile::Physical, &g).unwrap();
    assert!(kw_residual(&rho, 1.0).unwrap().pass);
    let r = kw_residual(&rho, 2.0).unwrap();
    assert!(r.max_abs > 10.0 * r.tolerance);
}

#[test]
fn profile_examples() {
    let g = PhaseGrid::desk();
    let window: Vec<f64> = g.ps().into_iter().filter(|&p| p >= 0.5).collect();
    let phys = profile_consistency(&MomentumProfile::Physical, &window, &g).unwrap();
    assert!(phys.report.pass && phys.fitted_a.abs() < 1e-12);
    let exp = profile_consistency(&MomentumProfile::Exponential { a: 0.5 }, &window, &g).unwrap();
    assert!(exp.report.pass);
    assert_relative_eq!(exp.fitted_a, 0.5, max_relative = 1e-10);
    let unit = MomentumProfile::custom(g.ps(), vec![1.0; g.n_p]).unwrap();
    let flat = profile_consistency(&unit, &window, &g).unwrap();
    assert!(!flat.report.pass);
    // interior nodes carry the closed form -1/p^2
    for (p, d) in flat.p_nodes.iter().zip(&flat.second_derivative).skip(2).take(window.len() - 4) {
        assert_relative_eq!(*d, -1.0 / (p * p), max_relative = 1e-2);
    }
}

#[test]
fn selected_solution_meets_the_wall_conditions() {
    let g = PhaseGrid::desk();
    let sel = select_physical(1.0, &g).unwrap();
    assert!(sel.a.abs() < 1e-3);
    assert!(boundary_conditions_check(&sel.f).unwrap().pass);
}

#[test]
fn barrier_phase_shift_matches_the_exact_value() {
    for alpha in [1.0, 2.0, 4.0, 8.0] {
        let s = solve_wall_state(&WallParameters::for_alpha(alpha, 1.0).unwrap(), DEFAULT_NODES).unwrap();
        assert!((s.phase_shift - exact_phase_shift(alpha, 1.0)).abs() < 1e-6, "alpha = {alpha}");
    }
}

#[test]
fn barrier_solver_examples() {
    let p1 = WallParameters::for_alpha(1.0, 1.0).unwrap();
    let s1 = solve_wall_state(&p1, DEFAULT_NODES).unwrap();
    let s1b = solve_wall_state(&p1, 2 * DEFAULT_NODES - 1).unwrap();
    assert!((s1.phase_shift - s1b.phase_shift).abs() < 1e-6);
    let s8 = solve_wall_state(&WallParameters::for_alpha(8.0, 1.0).unwrap(), DEFAULT_NODES).unwrap();
    assert!(s8.phase_shift.abs() < s1.phase_shift.abs());
    for s in [&s1, &s8] {
        let xf = s.params.x_far;
        assert!((s.xi.eval(xf + 2.0 / s.params.alpha) / s.xi.eval(xf)).norm() < 1.0);
    }
}

#[test]
fn barrier_wigner_marginal_is_the_density() {
    let g = PhaseGrid::new(201, 801, -6.0, 1.0, -40.0, 40.0).unwrap();
    let s = solve_wall_state(&WallParameters::for_alpha(1.0, 1.0).unwrap(), DEFAULT_NODES).unwrap();
    let f = wigner_of_wall_state(&s, &g).unwrap();
    let m = integrate_p(&f).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..10 {
        let i = rng.random_range(20..g.n_x - 20);
        let d = s.xi.eval(g.x(i)).norm_sqr();
        assert!((m[i] - d).abs() < 1e-3 * (1.0 + d), "x = {}: {} vs {d}", g.x(i), m[i]);
    }
}
