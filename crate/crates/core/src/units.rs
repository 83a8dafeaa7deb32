//! Physical constants and unit conversions.
//!
//! Internally ħ = c = 1, lengths are in μm, imaginary frequencies are carried
//! as wavenumbers κ = ξ/c in μm⁻¹ and forces are in units of ħc/μm².

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Speed of light in μm/s.
pub const SPEED_OF_LIGHT_UM: f64 = SPEED_OF_LIGHT * 1e6;

/// ħc/μm² expressed in newtons.
pub const HBAR_C_PER_UM2_IN_NEWTON: f64 = HBAR * SPEED_OF_LIGHT / 1e-12;

/// Thermal wavelength ħc/(k_B T) in μm.
pub fn thermal_length_um(temperature: f64) -> f64 {
    HBAR * SPEED_OF_LIGHT / (BOLTZMANN * temperature) * 1e6
}

/// Spacing of the Matsubara wavenumbers, 2π k_B T/(ħc), in μm⁻¹.
pub fn matsubara_spacing(temperature: f64) -> f64 {
    2.0 * std::f64::consts::PI / thermal_length_um(temperature)
}

pub fn force_to_newton(force_hbar_c_per_um2: f64) -> f64 {
    force_hbar_c_per_um2 * HBAR_C_PER_UM2_IN_NEWTON
}
