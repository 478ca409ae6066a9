//! Lifshitz pressure between two half-spaces separated by a vacuum gap.
//!
//! The pressure is `−(k_B T / π a³) · Σ'_m ∫_{mγ}^{∞} y² [TM + TE] dy` where the
//! prime halves the `m = 0` term. Frequencies are the Matsubara frequencies
//! `ζ_m = 2π m k_B T / ħ` and `γ = 2π a k_B T / (ħ c)`. All conversions
//! between natural and SI units happen in [`ThermalState`] and
//! [`casimir_pressure`].

mod matsubara;
mod reflection;

use thiserror::Error;

use crate::constants::{gamma_per_meter_kelvin, ideal_metal_prefactor, HBAR, K_BOLTZMANN, SPEED_OF_LIGHT};
use crate::dispersion::{DispersionError, Material};
use crate::quadrature::QuadratureError;

pub use matsubara::{
    casimir_pressure, casimir_pressure_with, matsubara_integral, matsubara_term, zero_frequency_term, CutoffInfo,
    MatsubaraIntegral, PressureResult, ReflectionRoute, TermContribution, ZeroFrequencyTerm,
};
pub use reflection::{integrand, interface_coefficients, reflection_product, similar_reflection, ReflectionProduct};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LifshitzError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integrand singular at y = {y}: reflection product {reflection} makes 1 - r e^(-2y) <= 0")]
    Singular { y: f64, reflection: f64 },

    #[error("material {material} failed at Matsubara index m = {m} (zeta = {zeta:e} rad/s): {source}")]
    Material {
        material: String,
        m: u64,
        zeta: f64,
        #[source]
        source: DispersionError,
    },

    #[error("quadrature failed for m = {m}: {source}")]
    Quadrature {
        m: u64,
        #[source]
        source: QuadratureError,
    },

    #[error(
        "Matsubara sum not converged at the ceiling m_max = {m_max}; last relative contribution {last_relative:e}"
    )]
    Convergence { m_max: u64, last_relative: f64 },

    #[error("similar-media route needs identical permittivities, got {eps1} and {eps3} at m = {m}")]
    NotSimilar { m: u64, eps1: f64, eps3: f64 },
}

pub type Result<T> = std::result::Result<T, LifshitzError>;

/// Two half-spaces `mat1` (z < 0) and `mat3` (z > a) with vacuum in between.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateSystem {
    mat1: Material,
    mat3: Material,
    gap: f64,
}

impl PlateSystem {
    pub fn new(mat1: Material, mat3: Material, gap: f64) -> Result<Self> {
        if !(gap > 0.0 && gap.is_finite()) {
            return Err(LifshitzError::Domain(format!(
                "gap width must be positive and finite, got {gap} m"
            )));
        }
        Ok(Self { mat1, mat3, gap })
    }

    pub fn mat1(&self) -> &Material {
        &self.mat1
    }

    pub fn mat3(&self) -> &Material {
        &self.mat3
    }

    /// Gap width `a` in meters.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// Permittivity of the gap medium (vacuum).
    pub fn gap_eps(&self) -> f64 {
        1.0
    }

    pub fn swapped(&self) -> Self {
        Self {
            mat1: self.mat3.clone(),
            mat3: self.mat1.clone(),
            gap: self.gap,
        }
    }

    pub fn with_gap(&self, gap: f64) -> Result<Self> {
        Self::new(self.mat1.clone(), self.mat3.clone(), gap)
    }
}

/// Temperature and the Matsubara quantities derived from it.
///
/// There is no separate zero-temperature path: "cold" results are computed at
/// a small finite temperature (1 K by convention).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    kelvin: f64,
}

impl ThermalState {
    pub fn new(kelvin: f64) -> Result<Self> {
        if !(kelvin > 0.0 && kelvin.is_finite()) {
            return Err(LifshitzError::Domain(format!(
                "temperature must be positive and finite, got {kelvin} K"
            )));
        }
        Ok(Self { kelvin })
    }

    pub fn kelvin(&self) -> f64 {
        self.kelvin
    }

    /// `1/(k_B T)` in 1/J.
    pub fn beta(&self) -> f64 {
        1.0 / (K_BOLTZMANN * self.kelvin)
    }

    /// Matsubara frequency `ζ_m = 2π m k_B T / ħ` in rad/s.
    pub fn zeta(&self, m: u64) -> f64 {
        2.0 * std::f64::consts::PI * m as f64 * K_BOLTZMANN * self.kelvin / HBAR
    }

    /// `γ = 2π a k_B T / (ħ c)` for a gap `a` in meters.
    pub fn gamma(&self, gap: f64) -> f64 {
        gamma_per_meter_kelvin() * gap * self.kelvin
    }

    /// `k_B T / (π a³)` in Pa: converts the dimensionless Matsubara sum to a
    /// pressure.
    pub fn pressure_prefactor(&self, gap: f64) -> f64 {
        K_BOLTZMANN * self.kelvin / (std::f64::consts::PI * gap.powi(3))
    }

    /// Hard ceiling on the Matsubara index, `ceil(factor · ħc / (2 a k_B T))`.
    pub fn m_ceiling(&self, gap: f64, factor: f64) -> u64 {
        (factor * HBAR * SPEED_OF_LIGHT / (2.0 * gap * K_BOLTZMANN * self.kelvin)).ceil() as u64
    }
}

/// Numerical settings shared by every pressure evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Per-term quadrature tolerance (relative, with a tiny absolute floor).
    pub quad_tol: f64,
    /// A term is "small" when it adds less than this fraction of the running sum.
    pub stop_rel: f64,
    /// Number of consecutive small terms that ends the Matsubara sum.
    pub stop_run: u32,
    /// Integration window length: `y ∈ [mγ, mγ + y_span]`.
    pub y_span: f64,
    /// Initial breakpoint at `mγ + y_split`.
    pub y_split: f64,
    pub max_segments: usize,
    /// `m_max = ceil(m_ceiling_factor · ħc / (2 a k_B T))`.
    pub m_ceiling_factor: f64,
    /// Evaluate Matsubara terms on the rayon pool (ignored without the
    /// `parallel` feature).
    pub parallel: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            quad_tol: 1e-10,
            stop_rel: 1e-9,
            stop_run: 3,
            y_span: 50.0,
            y_split: 10.0,
            max_segments: 2000,
            m_ceiling_factor: 10.0,
            parallel: cfg!(feature = "parallel"),
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(LifshitzError::Domain(format!("{what} must be positive, got {v}")));
        if !(self.quad_tol > 0.0) {
            return bad("quadrature tolerance", self.quad_tol);
        }
        if !(self.stop_rel > 0.0) {
            return bad("truncation threshold", self.stop_rel);
        }
        if !(self.y_span > 0.0) {
            return bad("y_span", self.y_span);
        }
        if !(self.m_ceiling_factor > 0.0) {
            return bad("m_ceiling_factor", self.m_ceiling_factor);
        }
        if self.stop_run == 0 || self.max_segments == 0 {
            return Err(LifshitzError::Domain(
                "stop_run and max_segments must be nonzero".into(),
            ));
        }
        Ok(())
    }
}

/// Ideal-metal pressure at zero temperature, `−π² ħ c / (240 a⁴)`.
pub fn ideal_metal_pressure_t0(gap: f64) -> Result<f64> {
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(LifshitzError::Domain(format!(
            "gap width must be positive and finite, got {gap} m"
        )));
    }
    Ok(-ideal_metal_prefactor() / gap.powi(4))
}
