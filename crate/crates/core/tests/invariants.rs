//! Property tests for the structural invariants of every layer.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use phonon_squeezing::analytic::{
    steady_phase, xi_analytic, AnalyticParams, Backend, SearchOptions, SqueezingCurve,
};
use phonon_squeezing::bang_bang::{
    bb_integrals, filter_modulation, kappa_bound, phase_matrix_bb, switch_function, BBSchedule,
    BathSpec,
};
use phonon_squeezing::config::{RawConfig, Scenario, ScenarioConfig};
use phonon_squeezing::dicke::{
    collective_operators, css_x, one_axis_twist, DickeMatrix, EnsembleSpec, SpinOperators,
};
use phonon_squeezing::geometry::{apply_phase, phase_matrix, trajectory, unit_amplitude, PhaseMatrix};
use phonon_squeezing::oracle::{
    evolve_fixed, max_step, thermal_phonon, CompositeState, FockTruncation,
};

fn spec_strategy() -> impl Strategy<Value = EnsembleSpec> {
    (1usize..=12, 50.0f64..2000.0, 2.0f64..1e5, 0.0f64..100.0)
        .prop_map(|(n, wa, q, nth)| EnsembleSpec::new(n, wa, q, nth).unwrap())
}

fn steady_matrix(spec: &EnsembleSpec, t: f64) -> PhaseMatrix {
    let n = spec.n() as i64;
    let dim = 2 * spec.n() + 1;
    let data = DMatrix::from_fn(dim, dim, |i, j| steady_phase(spec, i as i64 - n, j as i64 - n, t));
    PhaseMatrix::from_matrix(spec.n(), t, data).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pipeline_states_are_valid_density_matrices(spec in spec_strategy(), gt in 0.0f64..400.0) {
        let rho = apply_phase(&css_x(spec.n()), &phase_matrix(&spec, gt).unwrap()).unwrap();
        prop_assert!(rho.hermiticity_error() <= 1e-10);
        prop_assert!((rho.trace() - C64::new(1.0, 0.0)).norm() <= 1e-10);
        prop_assert!(rho.min_eigenvalue() >= -1e-10);
    }

    #[test]
    fn squeezing_independent_of_perpendicular_frame(
        n in 1usize..=12, theta in 0.0f64..0.4, a in 0.0f64..(2.0 * PI), b in 0.0f64..(2.0 * PI)
    ) {
        let rho = one_axis_twist(&css_x(n), theta);
        let m = SpinOperators::new(n).moments(&rho);
        if let Ok(m) = m {
            if m.mean_norm() > 1e-6 {
                let va = m.min_perpendicular_variance(a).unwrap();
                let vb = m.min_perpendicular_variance(b).unwrap();
                prop_assert!((va - vb).abs() <= 1e-10 * va.abs().max(1.0));
            }
        }
    }

    #[test]
    fn orbit_is_bounded(spec in spec_strategy(), m in -3i64..=3, t in 0.0f64..1.0) {
        let m = m.clamp(-(spec.n() as i64), spec.n() as i64);
        let bound = 2.0 * spec.g() / spec.omega_a() / (1.0 + 1.0 / (4.0 * spec.q() * spec.q())).sqrt();
        let s = trajectory(&spec, m, &[t]).unwrap();
        prop_assert!(s[0].alpha.norm() <= m.unsigned_abs() as f64 * bound * (1.0 + 1e-12));
    }

    #[test]
    fn lossless_revival_restores_coherence_magnitudes(
        n in 1usize..=10, k in 1u32..2000, thermal in prop::bool::ANY
    ) {
        let n_th = if thermal { 10.0 } else { 0.0 };
        let spec = EnsembleSpec::new(n, 1000.0, f64::INFINITY, n_th).unwrap();
        let t = k as f64 * 2.0 * PI / spec.omega_a();
        let rho0 = css_x(n);
        let rho = apply_phase(&rho0, &phase_matrix(&spec, t).unwrap()).unwrap();
        let diff = (0..rho.dim())
            .flat_map(|i| (0..rho.dim()).map(move |j| (i, j)))
            .map(|(i, j)| (rho.matrix()[(i, j)].norm() - rho0.matrix()[(i, j)].norm()).abs())
            .fold(0.0, f64::max);
        prop_assert!(diff <= 1e-10, "diff {diff}");
    }

    #[test]
    fn damping_monotone_in_temperature_and_loss(
        q in 2.0f64..1e4, nth in 0.0f64..50.0, dq in 1.0f64..10.0, dn in 0.1f64..10.0, gt in 0.01f64..300.0
    ) {
        let base = EnsembleSpec::new(4, 1000.0, q, nth).unwrap();
        let hotter = base.with_n_th(nth + dn).unwrap();
        let lossier = base.with_q(q / dq).unwrap();
        let re = |s: &EnsembleSpec| phase_matrix(s, gt).unwrap().get(-2, 3).re;
        let r0 = re(&base);
        prop_assert!(re(&hotter) <= r0 + 1e-12 * r0.abs());
        prop_assert!(re(&lossier) <= r0 + 1e-12 * r0.abs());
    }

    #[test]
    fn squared_amplitude_integral_matches_trapezoid(
        t in 1e-3f64..0.05, q in 2.0f64..1e4, wa in 100.0f64..2000.0
    ) {
        let spec = EnsembleSpec::new(1, wa, q, 0.0).unwrap();
        let closed = phonon_squeezing::geometry::phase_integrals(&spec, t).integral_sq;
        // trapezoid error ~ (omega_a h)^2 / 12 relative; keep it near 1e-10
        let steps = (t * wa / 3e-5).ceil() as usize;
        let h = t / steps as f64;
        let mut trap = 0.0;
        for i in 0..=steps {
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            trap += w * unit_amplitude(&spec, i as f64 * h).norm_sqr();
        }
        trap *= h;
        prop_assert!((closed - trap).abs() <= 1e-8 * closed.abs().max(1e-12), "{closed} vs {trap}");
    }

    #[test]
    fn bang_bang_global_sign_flip_is_invisible(
        pulses in 0u32..50, gt in 1.0f64..200.0, nth in 0.0f64..20.0
    ) {
        let spec = EnsembleSpec::new(3, 1000.0, 1000.0, nth).unwrap();
        let bath = BathSpec::none();
        let sched = BBSchedule::new(pulses, gt).unwrap();
        let a = phase_matrix_bb(&spec, &sched, &bath, gt).unwrap();
        let b = phase_matrix_bb(&spec, &sched.flipped(), &bath, gt).unwrap();
        let diff = (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(diff <= 1e-12 * a.matrix().iter().map(|z| z.norm()).fold(1.0, f64::max));
        let ia = bb_integrals(&spec, &sched, gt).unwrap();
        let ib = bb_integrals(&spec, &sched.flipped(), gt).unwrap();
        prop_assert!((ia.twist - ib.twist).abs() <= 1e-12 * ia.twist.abs().max(1e-12));
    }

    #[test]
    fn switch_boundaries_follow_equal_intervals(pulses in 2u32..40, t_total in 0.1f64..50.0) {
        let sched = BBSchedule::new(pulses, t_total).unwrap();
        for p in 1..pulses as usize {
            let tp = p as f64 * t_total / pulses as f64;
            let before = switch_function(&sched, tp * (1.0 - 1e-9)).unwrap();
            let after = switch_function(&sched, tp * (1.0 + 1e-9)).unwrap();
            prop_assert_eq!(before, -after);
        }
        prop_assert!(switch_function(&sched, t_total).is_err());
    }

    #[test]
    fn filter_is_finite_everywhere(pulses in 0u32..600, omega in 0.0f64..500.0, t in 0.5f64..200.0) {
        let f = filter_modulation(pulses, omega, t);
        prop_assert!(f.is_finite() && f >= -1e-12, "F = {f}");
    }

    #[test]
    fn config_accepts_every_scenario_preset(idx in 0usize..8) {
        let sc = Scenario::ALL[idx];
        let cfg = ScenarioConfig::preset(sc).unwrap();
        prop_assert_eq!(&cfg.metadata()["scenario"], sc.name());
        prop_assert!(cfg.metadata().contains_key("omega_c"));
    }

    #[test]
    fn unknown_keys_always_rejected(key in "[a-z]{3,8}_x", line in 0usize..5) {
        let mut doc = "\n".repeat(line);
        doc.push_str(&format!("{key} = 1\n"));
        let is_line = matches!(
            RawConfig::parse(&doc),
            Err(phonon_squeezing::Error::Config { line: l, .. }) if l == line + 1
        );
        prop_assert!(is_line);
    }
}

#[test]
fn coherent_state_is_unsqueezed_and_algebra_closes() {
    for n in 1..=20 {
        let ops = SpinOperators::new(n);
        assert!((ops.squeezing(&css_x(n)).unwrap() - 1.0).abs() < 1e-12, "N={n}");
        let c = collective_operators(n);
        let i = C64::new(0.0, 1.0);
        let comm = |a: &DMatrix<C64>, b: &DMatrix<C64>| a * b - b * a;
        for (a, b, z) in [(&c.jx, &c.jy, &c.jz), (&c.jy, &c.jz, &c.jx), (&c.jz, &c.jx, &c.jy)] {
            let err = (comm(a, b) - z * i).iter().map(|x| x.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "N={n}: {err}");
        }
    }
}

#[test]
fn analytic_equals_steady_phase_pipeline_without_loss() {
    for n in [2usize, 5, 10] {
        let spec = EnsembleSpec::new(n, 1000.0, f64::INFINITY, 0.0).unwrap();
        let ops = SpinOperators::new(n);
        let rho0 = css_x(n);
        for k in 1..=40 {
            let ct = 0.01 * k as f64;
            let t = ct * spec.omega_a();
            let rho = apply_phase(&rho0, &steady_matrix(&spec, t)).unwrap();
            let numeric = ops.squeezing(&rho).unwrap();
            let closed = xi_analytic(&AnalyticParams::new(n, ct, 0.0).unwrap());
            assert!((numeric - closed).abs() < 1e-10, "N={n} Ct={ct}: {numeric} vs {closed}");
        }
    }
}

/// Closed form with each coherence order damped by its own factor:
/// `e^{-4 Ct mu}` on the `A` term and `e^{-Ct mu}` on `B`.
fn xi_order_damped(n: usize, ct: f64, mu: f64) -> f64 {
    let p = (2 * n - 2) as i32;
    let a = 1.0 - (2.0 * ct).cos().powi(p) * (-4.0 * ct * mu).exp();
    let b = -4.0 * ct.sin() * ct.cos().powi(p) * (-ct * mu).exp();
    1.0 + (2.0 * n as f64 - 1.0) / 4.0 * (a - a.hypot(b))
}

#[test]
fn order_damped_closed_form_equals_steady_phase_pipeline() {
    for n in [2usize, 5, 10] {
        for n_th in [4.5, 49.5, 99.5] {
            let spec = EnsembleSpec::new(n, 1000.0, 1000.0, n_th).unwrap();
            let ops = SpinOperators::new(n);
            for k in 1..=20 {
                let ct = 0.02 * k as f64;
                let t = ct / phonon_squeezing::analytic::twist_rate(&spec);
                let rho = apply_phase(&css_x(n), &steady_matrix(&spec, t)).unwrap();
                let numeric = ops.squeezing(&rho).unwrap();
                let closed = xi_order_damped(n, ct, spec.mu());
                assert!((numeric - closed).abs() < 1e-10, "N={n} mu={} Ct={ct}", spec.mu());
            }
        }
    }
}

#[test]
fn closed_form_within_ten_percent_near_optimum_up_to_mu_one_tenth() {
    let mut report = Vec::new();
    let mut worst: f64 = 0.0;
    for n_th in [0.0, 4.5, 9.5, 19.5, 49.5, 99.5] {
        let spec = EnsembleSpec::new(10, 1000.0, 1000.0, n_th).unwrap();
        let exact = SqueezingCurve::new(spec, Backend::Numeric).unwrap();
        let opt = exact.optimum(&SearchOptions::default()).unwrap();
        let closed = SqueezingCurve::new(spec, Backend::Analytic).unwrap().eval(opt.gt).unwrap();
        let rel = (closed - opt.xi).abs() / opt.xi;
        worst = worst.max(rel);
        report.push(format!("mu={:.4}: exact {:.5} closed {:.5} rel {:.3}", spec.mu(), opt.xi, closed, rel));
    }
    assert!(worst <= 0.1, "closed form off by more than 10%:\n{}", report.join("\n"));
}

#[test]
fn optimum_monotone_on_parameter_grid() {
    let qs = [30.0, 100.0, 300.0, 1000.0, 3000.0];
    let temps = [0.0, 5.0, 20.0, 50.0, 100.0];
    let opts = SearchOptions::default();
    let mut grid = [[0.0; 5]; 5];
    for (i, q) in qs.iter().enumerate() {
        for (j, nth) in temps.iter().enumerate() {
            let spec = EnsembleSpec::new(10, 1000.0, *q, *nth).unwrap();
            grid[i][j] = SqueezingCurve::new(spec, Backend::Numeric)
                .unwrap()
                .optimum(&opts)
                .unwrap()
                .xi;
        }
    }
    for i in 0..5 {
        for j in 0..5 {
            if i + 1 < 5 {
                assert!(grid[i + 1][j] <= grid[i][j], "Q order at ({i},{j})");
            }
            if j + 1 < 5 {
                assert!(grid[i][j + 1] >= grid[i][j], "n_th order at ({i},{j})");
            }
        }
    }
}

#[test]
fn kappa_depends_on_distance_and_grows_with_coupling_and_time() {
    let sched = BBSchedule::new(20, 30.0).unwrap();
    let bath = BathSpec::new(4e-4, 1.0, 4.0).unwrap();
    let k = |m, n| kappa_bound(&bath, &sched, m, n, 30.0).unwrap();
    assert_eq!(k(0, 0), 0.0);
    assert_eq!(k(-2, 1), k(3, 0));
    assert_eq!(k(1, -2), k(-2, 1));
    let stronger = BathSpec::new(8e-4, 1.0, 4.0).unwrap();
    assert!(kappa_bound(&stronger, &sched, 0, 1, 30.0).unwrap() >= k(0, 1));
    let mut last = 0.0;
    for t in [1.0, 5.0, 10.0, 20.0, 30.0] {
        let v = kappa_bound(&bath, &BBSchedule::new(0, 30.0).unwrap(), 0, 1, t).unwrap();
        assert!(v >= last);
        last = v;
    }
}

#[test]
fn master_equation_conserves_jz_and_trace() {
    let spec = EnsembleSpec::with_coupling(2, 1.0, 50.0, 25.0, 0.5).unwrap();
    let trunc = FockTruncation::new(FockTruncation::floor(&spec));
    let phonon = thermal_phonon(0.5, &trunc);
    let rho0 = CompositeState::product(&phonon, &css_x(2)).unwrap();
    let jz = |s: &CompositeState| -> C64 {
        (-2i64..=2).map(|m| s.block(m, m).trace() * m as f64).sum()
    };
    let j0 = jz(&rho0);
    let states = evolve_fixed(&rho0, &spec, &trunc, &[0.5, 1.0], max_step(&spec)).unwrap();
    for s in &states {
        assert!((jz(s) - j0).norm() < 1e-10);
        assert!((s.trace() - C64::new(1.0, 0.0)).norm() < 1e-8);
        assert!(s.hermiticity_error() < 1e-8);
        let spin: DickeMatrix = s.reduce_spin().unwrap();
        assert!(spin.min_eigenvalue() > -1e-7);
    }
}
