use std::cell::RefCell;

use crate::dispersion::{DispersionModel, Material};
use crate::quadrature::{self, Tolerance};
use crate::special::{polylog3, PolylogArg};
use crate::summation::CompensatedSum;

use super::reflection::{integrand_parts, reflection_product, similar_reflection, ReflectionProduct};
use super::{LifshitzError, PlateSystem, Result, SolverOptions, ThermalState};

// Absolute floor under the relative quadrature tolerance; only matters for
// terms that underflow.
const QUAD_ABS_FLOOR: f64 = 1e-300;

/// How the reflection products are formed inside the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReflectionRoute {
    /// `Δ₁Δ₂` from the two interfaces separately (general case).
    #[default]
    Dissimilar,
    /// `(A_m, B_m)` as squared single-interface coefficients; requires both
    /// media to have the same permittivity at every Matsubara frequency.
    Similar,
}

/// One Matsubara integral split by polarization (dimensionless).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatsubaraIntegral {
    pub tm: f64,
    pub te: f64,
    pub y_max: f64,
    pub error: f64,
}

impl MatsubaraIntegral {
    pub fn total(&self) -> f64 {
        self.tm + self.te
    }
}

/// `∫_{lower}^{lower + y_span} y² [TM + TE] dy` with `p = y / lower` and the
/// permittivities held fixed at their values for this Matsubara frequency.
pub fn matsubara_integral(
    lower: f64,
    eps1: f64,
    eps3: f64,
    route: ReflectionRoute,
    opts: &SolverOptions,
) -> Result<MatsubaraIntegral> {
    if !(lower > 0.0 && lower.is_finite()) {
        return Err(LifshitzError::Domain(format!(
            "lower integration limit must be positive, got {lower}"
        )));
    }
    let reflect = |p: f64| -> Result<ReflectionProduct> {
        match route {
            ReflectionRoute::Dissimilar => reflection_product(eps1, eps3, p),
            ReflectionRoute::Similar => similar_reflection(eps1, p),
        }
    };
    // Validate once at the lower limit so the closure below can't fail on input.
    reflect(1.0)?;

    let y_max = lower + opts.y_span;
    let mut breaks = vec![lower];
    if opts.y_split > 0.0 && opts.y_split < opts.y_span {
        breaks.push(lower + opts.y_split);
    }
    breaks.push(y_max);

    let failure = RefCell::new(None);
    let result = quadrature::integrate(
        |y| {
            // p may round a hair below 1 at the lower limit
            let p = (y / lower).max(1.0);
            match reflect(p).and_then(|rp| integrand_parts(y, rp)) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    [0.0, 0.0]
                }
            }
        },
        &breaks,
        Tolerance {
            abs: QUAD_ABS_FLOOR,
            rel: opts.quad_tol,
        },
        opts.max_segments,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let r = result.map_err(|source| LifshitzError::Quadrature { m: 0, source })?;
    Ok(MatsubaraIntegral {
        tm: r.value[0],
        te: r.value[1],
        y_max,
        error: r.error,
    })
}

fn material_eps(material: &Material, m: u64, zeta: f64) -> Result<f64> {
    material.eps(zeta).map_err(|source| LifshitzError::Material {
        material: material.name().to_string(),
        m,
        zeta,
        source,
    })
}

/// The `m`-th Matsubara integral (`m ≥ 1`) for a plate system.
pub fn matsubara_term(
    m: u64,
    system: &PlateSystem,
    thermal: &ThermalState,
    opts: &SolverOptions,
) -> Result<MatsubaraIntegral> {
    term_with_route(m, system, thermal, opts, ReflectionRoute::Dissimilar)
}

fn term_with_route(
    m: u64,
    system: &PlateSystem,
    thermal: &ThermalState,
    opts: &SolverOptions,
    route: ReflectionRoute,
) -> Result<MatsubaraIntegral> {
    if m == 0 {
        return Err(LifshitzError::Domain("m = 0 is handled by zero_frequency_term".into()));
    }
    let zeta = thermal.zeta(m);
    let eps1 = material_eps(system.mat1(), m, zeta)?;
    let eps3 = material_eps(system.mat3(), m, zeta)?;
    if route == ReflectionRoute::Similar && eps1 != eps3 {
        return Err(LifshitzError::NotSimilar { m, eps1, eps3 });
    }
    let lower = m as f64 * thermal.gamma(system.gap());
    matsubara_integral(lower, eps1, eps3, route, opts).map_err(|e| match e {
        LifshitzError::Quadrature { source, .. } => LifshitzError::Quadrature { m, source },
        other => other,
    })
}

/// Half-weighted zero-frequency contribution to the dimensionless sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroFrequencyTerm {
    /// Zero-frequency TM reflection product `Δ = Δ₁Δ₂`.
    pub delta: f64,
    /// `I₀ = −Li₃(Δ)/8` (negative by convention).
    pub i0: f64,
    /// TE contribution (already half-weighted). Zero unless both media are
    /// dissipationless plasma metals.
    pub te: f64,
}

impl ZeroFrequencyTerm {
    pub fn tm(&self) -> f64 {
        -self.i0
    }

    pub fn total(&self) -> f64 {
        -self.i0 + self.te
    }
}

fn static_delta(material: &Material) -> f64 {
    if material.is_metallic() {
        return 1.0;
    }
    match material.static_eps() {
        Some(eps) => (eps - 1.0) / (eps + 1.0),
        None => 1.0,
    }
}

/// The `m = 0` term. Metals take the limit `Δᵢ → 1`, giving `I₀ = −ζ(3)/8`;
/// other media use `(ε − 1)/(ε + 1)` at their lowest available frequency.
pub fn zero_frequency_term(system: &PlateSystem) -> Result<ZeroFrequencyTerm> {
    let delta = static_delta(system.mat1()) * static_delta(system.mat3());
    let arg = PolylogArg::new(delta).map_err(|e| LifshitzError::Domain(e.to_string()))?;
    let i0 = -polylog3(arg) / 8.0;
    let te = match (system.mat1().model(), system.mat3().model()) {
        (DispersionModel::Plasma(p1), DispersionModel::Plasma(p3)) => {
            plasma_te_zero(p1.omega_p(), p3.omega_p(), system.gap())?
        }
        _ => 0.0,
    };
    Ok(ZeroFrequencyTerm { delta, i0, te })
}

// For plasma media the ζ → 0 TE coefficient stays finite:
// Δᵢ = (√(y² + κᵢ²) − y)/(√(y² + κᵢ²) + y), κᵢ = ω_p,i a / c, y = k⊥ a.
fn plasma_te_zero(wp1: f64, wp3: f64, gap: f64) -> Result<f64> {
    let c = crate::constants::SPEED_OF_LIGHT;
    let (k1, k3) = (wp1 * gap / c, wp3 * gap / c);
    let coef = |k: f64, y: f64| {
        let r = (y * y + k * k).sqrt();
        // (r − y)/(r + y) = k²/(r + y)²
        k * k / ((r + y) * (r + y))
    };
    let failure = RefCell::new(None);
    let r = quadrature::integrate(
        |y| {
            if y == 0.0 {
                return [0.0];
            }
            let rp = ReflectionProduct {
                tm: 0.0,
                te: coef(k1, y) * coef(k3, y),
            };
            match integrand_parts(y, rp) {
                Ok(v) => [v[1]],
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    [0.0]
                }
            }
        },
        &[0.0, 1.0, 10.0, 50.0],
        Tolerance::relative(1e-12),
        2000,
    )
    .map_err(|source| LifshitzError::Quadrature { m: 0, source })?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(0.5 * r.value[0])
}

/// Per-`m` contribution to the pressure, in Pa (negative = attractive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermContribution {
    pub m: u64,
    pub zeta: f64,
    pub tm: f64,
    pub te: f64,
    pub y_max: f64,
}

impl TermContribution {
    pub fn total(&self) -> f64 {
        self.tm + self.te
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffInfo {
    pub y_span: f64,
    pub first_y_max: f64,
    pub last_y_max: f64,
    pub m_ceiling: u64,
}

/// Result of one pressure evaluation. All pressures in Pa, negative for
/// attraction.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureResult {
    pub pressure: f64,
    pub tm_pressure: f64,
    pub te_pressure: f64,
    pub gap: f64,
    pub temperature: f64,
    pub gamma: f64,
    pub zero_frequency: ZeroFrequencyTerm,
    /// Pressure carried by the `m = 0` term.
    pub zero_pressure: f64,
    /// Terms `m = 1..=m_used`.
    pub terms: Vec<TermContribution>,
    /// Largest Matsubara index summed.
    pub m_used: u64,
    pub cutoff: CutoffInfo,
}

impl PressureResult {
    pub fn magnitude(&self) -> f64 {
        self.pressure.abs()
    }

    pub fn tm_share(&self) -> f64 {
        self.tm_pressure / self.pressure
    }

    pub fn te_share(&self) -> f64 {
        self.te_pressure / self.pressure
    }
}

/// Lifshitz pressure with the general (dissimilar-media) reflection products.
pub fn casimir_pressure(system: &PlateSystem, thermal: &ThermalState, opts: &SolverOptions) -> Result<PressureResult> {
    casimir_pressure_with(system, thermal, opts, ReflectionRoute::Dissimilar)
}

/// Lifshitz pressure using the given reflection route.
///
/// Terms are summed in ascending `m` with compensated accumulation. The sum
/// stops once `stop_run` consecutive terms each add less than `stop_rel` of
/// the running total; reaching `m_max` first is an error. The result does not
/// depend on whether terms were evaluated in parallel.
pub fn casimir_pressure_with(
    system: &PlateSystem,
    thermal: &ThermalState,
    opts: &SolverOptions,
    route: ReflectionRoute,
) -> Result<PressureResult> {
    opts.validate()?;
    let gap = system.gap();
    let gamma = thermal.gamma(gap);
    let prefactor = thermal.pressure_prefactor(gap);
    let m_max = thermal.m_ceiling(gap, opts.m_ceiling_factor).max(1);

    let zero = zero_frequency_term(system)?;
    let mut total = CompensatedSum::new();
    let mut tm_sum = CompensatedSum::new();
    let mut te_sum = CompensatedSum::new();
    total.add(zero.total());
    tm_sum.add(zero.tm());
    te_sum.add(zero.te);

    let mut terms: Vec<TermContribution> = Vec::new();
    let mut small_run = 0u32;
    let mut last_relative = f64::INFINITY;
    let mut converged = false;

    let eval = |m: u64| term_with_route(m, system, thermal, opts, route);
    let mut scan = |m: u64, term: MatsubaraIntegral| -> bool {
        let t = term.total();
        total.add(t);
        tm_sum.add(term.tm);
        te_sum.add(term.te);
        terms.push(TermContribution {
            m,
            zeta: thermal.zeta(m),
            tm: -prefactor * term.tm,
            te: -prefactor * term.te,
            y_max: term.y_max,
        });
        last_relative = t / total.value();
        if last_relative < opts.stop_rel {
            small_run += 1;
        } else {
            small_run = 0;
        }
        small_run >= opts.stop_run
    };

    if use_parallel(opts) {
        let mut start = 1u64;
        let mut batch = 64u64;
        'outer: while start <= m_max {
            let end = (start + batch - 1).min(m_max);
            let ms: Vec<u64> = (start..=end).collect();
            let results = crate::exec::map_ordered(&ms, true, |&m| eval(m));
            for (m, r) in (start..=end).zip(results) {
                if scan(m, r?) {
                    converged = true;
                    break 'outer;
                }
            }
            start = end + 1;
            batch = (batch * 2).min(8192);
        }
    } else {
        for m in 1..=m_max {
            if scan(m, eval(m)?) {
                converged = true;
                break;
            }
        }
    }

    if !converged {
        return Err(LifshitzError::Convergence { m_max, last_relative });
    }

    let m_used = terms.len() as u64;
    let cutoff = CutoffInfo {
        y_span: opts.y_span,
        first_y_max: terms.first().map_or(opts.y_span, |t| t.y_max),
        last_y_max: terms.last().map_or(opts.y_span, |t| t.y_max),
        m_ceiling: m_max,
    };
    Ok(PressureResult {
        pressure: -prefactor * total.value(),
        tm_pressure: -prefactor * tm_sum.value(),
        te_pressure: -prefactor * te_sum.value(),
        gap,
        temperature: thermal.kelvin(),
        gamma,
        zero_frequency: zero,
        zero_pressure: -prefactor * zero.total(),
        terms,
        m_used,
        cutoff,
    })
}

fn use_parallel(opts: &SolverOptions) -> bool {
    opts.parallel && crate::exec::parallel_available()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{material_preset, PermittivityTable, PlasmaParams};
    use approx::assert_relative_eq;

    fn au_au(gap: f64) -> PlateSystem {
        let au = material_preset("Au").unwrap();
        PlateSystem::new(au.clone(), au, gap).unwrap()
    }

    #[test]
    fn zero_term_metallic() {
        let z = zero_frequency_term(&au_au(1e-6)).unwrap();
        assert!((z.i0 - (-0.1502571129)).abs() < 1e-9);
        assert_eq!(z.te, 0.0);
        assert_eq!(z.delta, 1.0);
    }

    #[test]
    fn zero_term_dielectric() {
        let t = PermittivityTable::new(vec![(1e10, 3.0), (1e20, 3.0 + 1e-12)]).unwrap();
        let m = Material::tabulated("eps3", t, None);
        let sys = PlateSystem::new(m.clone(), m, 1e-6).unwrap();
        let z = zero_frequency_term(&sys).unwrap();
        assert_eq!(z.delta, 0.25);
        let series: f64 = (1..200).map(|n| 0.25f64.powi(n) / (n as f64).powi(3)).sum();
        assert_relative_eq!(z.i0, -series / 8.0, max_relative = 1e-13);
        assert_relative_eq!(z.i0, -0.0323077, max_relative = 1e-5);
    }

    #[test]
    fn plasma_has_zero_frequency_te() {
        let p = PlasmaParams::from_ev(9.0).unwrap();
        let m = Material::plasma("Au-plasma", p);
        let sys = PlateSystem::new(m.clone(), m, 1e-6).unwrap();
        let z = zero_frequency_term(&sys).unwrap();
        // κ = ω_p a / c ≈ 45.6; TE approaches the TM value as κ → ∞.
        assert!(z.te > 0.0 && z.te < -z.i0, "{z:?}");
        assert!(z.te > 0.8 * -z.i0, "{z:?}");
    }

    #[test]
    fn m_zero_rejected() {
        let sys = au_au(1e-6);
        let th = ThermalState::new(300.0).unwrap();
        assert!(matsubara_term(0, &sys, &th, &SolverOptions::default()).is_err());
    }

    #[test]
    fn vacuum_gives_zero_integral() {
        let r = matsubara_integral(0.3, 1.0, 1.0, ReflectionRoute::Dissimilar, &SolverOptions::default()).unwrap();
        assert_eq!(r.total(), 0.0);
    }

    #[test]
    fn material_failure_carries_m_and_zeta() {
        let au = material_preset("Au").unwrap();
        let table = PermittivityTable::sample(&au, 1e13, 1e15, 30).unwrap();
        let short = Material::tabulated("short", table, None).with_metallic(true);
        let sys = PlateSystem::new(short, au, 1e-6).unwrap();
        let th = ThermalState::new(300.0).unwrap();
        match casimir_pressure(&sys, &th, &SolverOptions::default()) {
            Err(LifshitzError::Material { m, zeta, material, .. }) => {
                assert_eq!(material, "short");
                assert!(m >= 1);
                assert_relative_eq!(zeta, th.zeta(m));
            }
            r => panic!("unexpected {r:?}"),
        }
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let sys = au_au(300e-9);
        let th = ThermalState::new(300.0).unwrap();
        let seq = SolverOptions {
            parallel: false,
            ..Default::default()
        };
        let par = SolverOptions {
            parallel: true,
            ..Default::default()
        };
        let a = casimir_pressure(&sys, &th, &seq).unwrap();
        let b = casimir_pressure(&sys, &th, &par).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ceiling_error_reported() {
        let sys = au_au(1e-6);
        let th = ThermalState::new(300.0).unwrap();
        let opts = SolverOptions {
            m_ceiling_factor: 0.5,
            ..Default::default()
        };
        match casimir_pressure(&sys, &th, &opts) {
            Err(LifshitzError::Convergence { m_max, last_relative }) => {
                assert_eq!(m_max, th.m_ceiling(1e-6, 0.5));
                assert!(last_relative > 1e-9);
            }
            r => panic!("unexpected {r:?}"),
        }
    }

    #[test]
    fn shares_sum_to_one() {
        let r = casimir_pressure(
            &au_au(500e-9),
            &ThermalState::new(300.0).unwrap(),
            &SolverOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(r.tm_share() + r.te_share(), 1.0, max_relative = 1e-12);
        assert!(r.tm_share() > r.te_share());
        let sum: f64 = r.terms.iter().map(|t| t.total()).sum::<f64>() + r.zero_pressure;
        assert_relative_eq!(sum, r.pressure, max_relative = 1e-12);
    }
}
