use approx::assert_relative_eq;
use casimir_core::dispersion::{material_preset, Material, PermittivityTable, PlasmaParams};
use casimir_core::lifshitz::{
    casimir_pressure, casimir_pressure_with, matsubara_integral, matsubara_term, zero_frequency_term, PlateSystem,
    ReflectionRoute, SolverOptions, ThermalState,
};
use casimir_core::scenarios::{
    preset_pairs, read_sweep_csv, sweep, temperature_difference, write_sweep_csv, GapGrid, MaterialPair, Spacing,
    SweepSpec,
};
use proptest::prelude::*;

fn au() -> Material {
    material_preset("Au").unwrap()
}

fn pressure(m1: &Material, m3: &Material, gap: f64, t: f64, opts: &SolverOptions) -> f64 {
    let sys = PlateSystem::new(m1.clone(), m3.clone(), gap).unwrap();
    casimir_pressure(&sys, &ThermalState::new(t).unwrap(), opts)
        .unwrap()
        .pressure
}

#[test]
fn similar_route_matches_dissimilar() {
    let opts = SolverOptions::default();
    for gap in [50e-9, 500e-9, 3e-6] {
        for t in [1.0, 300.0] {
            let sys = PlateSystem::new(au(), au(), gap).unwrap();
            let th = ThermalState::new(t).unwrap();
            let d = casimir_pressure_with(&sys, &th, &opts, ReflectionRoute::Dissimilar).unwrap();
            let s = casimir_pressure_with(&sys, &th, &opts, ReflectionRoute::Similar).unwrap();
            assert_relative_eq!(d.pressure, s.pressure, max_relative = 1e-12);
        }
    }
}

#[test]
fn similar_route_rejects_dissimilar_media() {
    let sys = PlateSystem::new(au(), material_preset("Al").unwrap(), 1e-6).unwrap();
    let th = ThermalState::new(300.0).unwrap();
    assert!(casimir_pressure_with(&sys, &th, &SolverOptions::default(), ReflectionRoute::Similar).is_err());
}

#[test]
fn swap_symmetry() {
    let opts = SolverOptions::default();
    for pair in preset_pairs() {
        for gap in [100e-9, 1e-6] {
            let a = pressure(&pair.mat1, &pair.mat3, gap, 300.0, &opts);
            let b = pressure(&pair.mat3, &pair.mat1, gap, 300.0, &opts);
            assert_eq!(a, b, "{} at {gap}", pair.label());
        }
    }
}

// Independent transcription of the integrand: textbook coefficients, no
// cancellation-avoiding rearrangement.
fn oracle_integrand(y: f64, lower: f64, e1: f64, e3: f64) -> f64 {
    let p = y / lower;
    let coeffs = |e: f64| {
        let s = (e - 1.0 + p * p).sqrt();
        ((e * p - s) / (e * p + s), (s - p) / (s + p))
    };
    let (tm1, te1) = coeffs(e1);
    let (tm3, te3) = coeffs(e3);
    let x = (-2.0 * y).exp();
    let f = |r: f64| r * x / (1.0 - r * x);
    y * y * (f(tm1 * tm3) + f(te1 * te3))
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn quadrature_matches_simpson(
        pair_idx in 0usize..6,
        log_gap in (50e-9f64).ln()..(3e-6f64).ln(),
        t in 1.0f64..400.0,
        m in 1u64..40,
    ) {
        let pair = &preset_pairs()[pair_idx];
        let gap = log_gap.exp();
        let th = ThermalState::new(t).unwrap();
        let zeta = th.zeta(m);
        let (e1, e3) = (pair.mat1.eps(zeta).unwrap(), pair.mat3.eps(zeta).unwrap());
        let lower = m as f64 * th.gamma(gap);
        let opts = SolverOptions::default();
        let got = matsubara_integral(lower, e1, e3, ReflectionRoute::Dissimilar, &opts).unwrap();
        let want = simpson(|y| oracle_integrand(y, lower, e1, e3), lower, lower + opts.y_span, 1_000_000);
        prop_assert!(((got.total() - want) / want).abs() < 1e-8, "got {} want {}", got.total(), want);
    }
}

#[test]
fn cutoff_adequacy() {
    let opts = SolverOptions::default();
    for (gap, t, m) in [(50e-9, 1.0, 1), (1e-6, 300.0, 1), (3e-6, 300.0, 5)] {
        let th = ThermalState::new(t).unwrap();
        let (e, lower) = (au().eps(th.zeta(m)).unwrap(), m as f64 * th.gamma(gap));
        let at_max = oracle_integrand(lower + opts.y_span, lower, e, e);
        let peak = (0..200)
            .map(|i| oracle_integrand(lower + 0.05 * (i + 1) as f64, lower, e, e))
            .fold(0.0, f64::max);
        assert!(at_max < 1e-30 * peak, "{at_max} vs {peak}");
    }
}

#[test]
fn extended_window_changes_nothing() {
    let base = SolverOptions::default();
    let wide = SolverOptions { y_span: 100.0, ..base };
    let sys = PlateSystem::new(au(), au(), 200e-9).unwrap();
    let th = ThermalState::new(300.0).unwrap();
    for m in [1, 10, 100] {
        let a = matsubara_term(m, &sys, &th, &base).unwrap().total();
        let b = matsubara_term(m, &sys, &th, &wide).unwrap().total();
        assert!(((a - b) / a).abs() < 1e-15, "m = {m}: {a} vs {b}");
    }
}

#[test]
fn tolerance_stability() {
    let base = SolverOptions::default();
    let loose = SolverOptions {
        quad_tol: 2.0 * base.quad_tol,
        stop_rel: 2.0 * base.stop_rel,
        ..base
    };
    for (gap, t) in [(100e-9, 300.0), (1e-6, 300.0), (1e-6, 1.0)] {
        let a = pressure(&au(), &au(), gap, t, &base);
        let b = pressure(&au(), &au(), gap, t, &loose);
        assert!(((a - b) / a).abs() < 1e-6, "{gap} {t}: {a} vs {b}");
    }
}

#[test]
fn zero_frequency_te_vanishes_for_drude() {
    for pair in preset_pairs() {
        let z = zero_frequency_term(&pair.system(1e-6).unwrap()).unwrap();
        assert_eq!(z.te, 0.0);
        assert!((z.i0 + 0.1502571129).abs() < 1e-9);
    }
}

#[test]
fn tabulated_drude_tracks_analytic() {
    let opts = SolverOptions::default();
    let gap = 500e-9;
    let th = ThermalState::new(300.0).unwrap();
    let m_hi = th.m_ceiling(gap, opts.m_ceiling_factor);
    let (lo, hi) = (th.zeta(1), th.zeta(m_hi));
    let decades = (hi / lo).log10();
    let count = (20.0 * decades).ceil() as usize + 1;
    let table = PermittivityTable::sample(&au(), lo, hi, count).unwrap();
    let tab = Material::tabulated("Au-table", table, None).with_metallic(true);
    let a = pressure(&au(), &au(), gap, 300.0, &opts);
    let b = pressure(&tab, &tab, gap, 300.0, &opts);
    assert!(((a - b) / a).abs() < 5e-3, "{a} vs {b}");
}

#[test]
fn plasma_exceeds_drude_and_converges_at_high_frequency() {
    let wp = 9.0 * casimir_core::constants::EV_TO_RAD_PER_S;
    let plasma = Material::plasma("Au-plasma", PlasmaParams::new(wp).unwrap());
    let opts = SolverOptions::default();
    for gap in [100e-9, 1e-6] {
        let d = pressure(&au(), &au(), gap, 300.0, &opts).abs();
        let p = pressure(&plasma, &plasma, gap, 300.0, &opts).abs();
        assert!(p > d, "gap {gap}: plasma {p} drude {d}");
    }
    let nu = 0.035 * casimir_core::constants::EV_TO_RAD_PER_S;
    for zeta in [100.0 * nu, 1e3 * nu] {
        let (d, p) = (au().eps(zeta).unwrap(), plasma.eps(zeta).unwrap());
        assert!(p >= d && (p - d) / p < 0.05);
    }
}

#[test]
fn magnitude_decreases_with_gap() {
    let opts = SolverOptions::default();
    let grid = GapGrid::spaced(50e-9, 3e-6, Spacing::Log, 12).unwrap();
    for t in [1.0, 300.0] {
        let p: Vec<f64> = grid
            .gaps()
            .iter()
            .map(|&a| pressure(&au(), &au(), a, t, &opts).abs())
            .collect();
        assert!(p.windows(2).all(|w| w[0] > w[1]), "{p:?}");
    }
}

#[test]
fn warmer_means_weaker_for_drude_metals() {
    let opts = SolverOptions::default();
    for gap in [100e-9, 500e-9, 1e-6] {
        let cold = pressure(&au(), &au(), gap, 1.0, &opts).abs();
        let warm = pressure(&au(), &au(), gap, 300.0, &opts).abs();
        assert!(cold > warm);
    }
}

#[test]
fn heating_difference_positive_on_grid() {
    let opts = SolverOptions::default();
    let grid = GapGrid::spaced(100e-9, 2.5e-6, Spacing::Log, 20).unwrap();
    for &gap in grid.gaps() {
        let d = temperature_difference(
            &MaterialPair::presets("Au", "Au").unwrap().system(gap).unwrap(),
            300.0,
            350.0,
            &opts,
        )
        .unwrap();
        assert!(d.delta > 0.0, "gap {gap}: {d:?}");
    }
}

#[test]
fn sweep_is_deterministic_and_round_trips() {
    let pairs = vec![
        MaterialPair::presets("Au", "Cu").unwrap(),
        MaterialPair::presets("Al", "Al").unwrap(),
    ];
    let grid = GapGrid::spaced(100e-9, 1e-6, Spacing::Log, 4).unwrap();
    let spec = SweepSpec::new(pairs, vec![300.0, 1.0], grid).unwrap();
    let par = sweep(
        &spec,
        &SolverOptions {
            parallel: true,
            ..Default::default()
        },
    )
    .unwrap();
    let seq = sweep(
        &spec,
        &SolverOptions {
            parallel: false,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(par.rows, seq.rows);
    let mut buf = Vec::new();
    write_sweep_csv(&par, &mut buf).unwrap();
    let back = read_sweep_csv(buf.as_slice()).unwrap();
    assert_eq!(back, par.rows);
}
