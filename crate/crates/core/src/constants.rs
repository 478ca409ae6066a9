//! Physical constants (CODATA 2018, SI) and the derived quantities shared by
//! the solver.

use std::f64::consts::PI;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
/// Boltzmann constant, J/K.
pub const K_BOLTZMANN: f64 = 1.380_649e-23;

/// Angular frequency corresponding to 1 eV, rad/s (rounded value used for the
/// metal presets).
pub const EV_TO_RAD_PER_S: f64 = 1.519e15;

/// Riemann zeta(3) (Apéry's constant).
pub const ZETA_3: f64 = 1.202_056_903_159_594_3;

/// `2π k_B / (ħ c)`, in 1/(m·K). Multiplying by `a·T` gives the dimensionless
/// Matsubara step `γ` (≈ 2744 per m·K).
pub fn gamma_per_meter_kelvin() -> f64 {
    2.0 * PI * K_BOLTZMANN / (HBAR * SPEED_OF_LIGHT)
}

/// Zero-temperature pressure between ideal mirrors, `-π² ħ c / (240 a⁴)`.
pub(crate) fn ideal_metal_prefactor() -> f64 {
    PI * PI * HBAR * SPEED_OF_LIGHT / 240.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_anchor_matches_2744() {
        let g = gamma_per_meter_kelvin();
        assert!((g - 2744.0).abs() / 2744.0 < 5e-4, "gamma/aT = {g}");
    }
}
