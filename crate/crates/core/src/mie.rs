//! Single-sphere scattering coefficients on the imaginary frequency axis.
//!
//! For a sphere of radius `R` in vacuum at wavenumber `κ` (`x = κR`,
//! `n = sqrt(εμ)`), matching tangential fields gives the T-matrix entries
//!
//! ```text
//! T_TE = (i_l(x) ρ_l(nx) - μ ψ'_l(x)) / (μ ζ'_l(x) - k_l(x) ρ_l(nx))
//! T_TM = (i_l(x) ρ_l(nx) - ε ψ'_l(x)) / (ε ζ'_l(x) - k_l(x) ρ_l(nx))
//! ```
//!
//! with `ψ_l(x) = x i_l(x)`, `ζ_l(x) = x k_l(x)` and `ρ_l(y) = ψ'_l(y)/i_l(y)`.
//! A perfect conductor gives `T_TE = -i_l/k_l` and `T_TM = -ψ'_l/ζ'_l`.
//!
//! The stored coefficients are `α = T / OUTGOING_NORM`, i.e. the T-matrix for
//! outgoing waves `OUTGOING_NORM · k_l`. With that normalisation the small
//! sphere TM dipole entry is `x³ (ε-1)/(ε+2)` and a perfectly conducting
//! sphere has `α_TM → x³`, `α_TE → -x³/2`.

use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisSpec, Polarization};
use crate::error::{CasimirError, Result};
use crate::specfun::{scaled_i_array, scaled_k_array};
use crate::units::SPEED_OF_LIGHT_UM;

/// Normalisation of the outgoing radial functions relative to `k_l`.
pub const OUTGOING_NORM: f64 = 4.0 / (3.0 * std::f64::consts::PI);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Material {
    /// Frequency-independent permittivity and permeability.
    Static { epsilon: f64, mu: f64 },
    /// Lossless Drude plasma, `ε(iξ) = 1 + ω_p²/ξ²`; `omega_p` in rad/s.
    Plasma { omega_p: f64 },
    PerfectConductor,
}

impl Material {
    pub fn dielectric(epsilon: f64) -> Self {
        Material::Static { epsilon, mu: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Material::Static { epsilon, mu } => {
                if !(epsilon >= 1.0 && mu >= 1.0) || !epsilon.is_finite() || !mu.is_finite() {
                    return Err(CasimirError::InvalidConfiguration(format!(
                        "static material needs finite epsilon >= 1 and mu >= 1, got ({epsilon}, {mu})"
                    )));
                }
            }
            Material::Plasma { omega_p } => {
                if !(omega_p > 0.0) || !omega_p.is_finite() {
                    return Err(CasimirError::InvalidConfiguration(format!(
                        "plasma frequency must be positive, got {omega_p}"
                    )));
                }
            }
            Material::PerfectConductor => {}
        }
        Ok(())
    }

    /// `ε(iξ)` at `ξ = cκ`. Infinite for a perfect conductor.
    pub fn epsilon(&self, kappa: f64) -> f64 {
        match *self {
            Material::Static { epsilon, .. } => epsilon,
            Material::Plasma { omega_p } => {
                let xi = SPEED_OF_LIGHT_UM * kappa;
                1.0 + (omega_p / xi).powi(2)
            }
            Material::PerfectConductor => f64::INFINITY,
        }
    }

    pub fn mu(&self, _kappa: f64) -> f64 {
        match *self {
            Material::Static { mu, .. } => mu,
            _ => 1.0,
        }
    }

    fn cache_key(&self) -> (u8, u64, u64) {
        match *self {
            Material::Static { epsilon, mu } => (0, epsilon.to_bits(), mu.to_bits()),
            Material::Plasma { omega_p } => (1, omega_p.to_bits(), 0),
            Material::PerfectConductor => (2, 0, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    /// Center in μm.
    pub center: [f64; 3],
    /// Radius in μm.
    pub radius: f64,
    pub material: Material,
}

impl Sphere {
    pub fn new(center: [f64; 3], radius: f64, material: Material) -> Self {
        Self { center, radius, material }
    }
}

/// Diagonal scattering block of one sphere at one imaginary frequency.
///
/// Entry `l` of each polarization is `value · exp(scale_exponent)`; the scale
/// is `2κR` so the stored values stay O(1) at large `κR`.
#[derive(Debug, Clone, PartialEq)]
pub struct MieBlock {
    pub kappa: f64,
    pub basis: BasisSpec,
    pub scale_exponent: f64,
    te: Vec<f64>,
    tm: Vec<f64>,
}

impl MieBlock {
    /// Scaled coefficient for `l` in `1..=lmax`.
    pub fn scaled(&self, polarization: Polarization, l: usize) -> f64 {
        match polarization {
            Polarization::TE => self.te[l - 1],
            Polarization::TM => self.tm[l - 1],
        }
    }

    /// Unscaled coefficient.
    pub fn coefficient(&self, polarization: Polarization, l: usize) -> f64 {
        self.scaled(polarization, l) * self.scale_exponent.exp()
    }

    /// Scaled diagonal in basis order.
    pub fn scaled_diagonal(&self) -> Vec<f64> {
        self.basis.iter().map(|idx| self.scaled(idx.polarization, idx.l)).collect()
    }
}

/// Mie block of `sphere` at imaginary wavenumber `kappa` (μm⁻¹).
pub fn mie_coefficients(sphere: &Sphere, kappa: f64, basis: BasisSpec) -> Result<MieBlock> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(CasimirError::Domain(format!("kappa must be positive, got {kappa}")));
    }
    if !(sphere.radius > 0.0) {
        return Err(CasimirError::Domain(format!("radius must be positive, got {}", sphere.radius)));
    }
    sphere.material.validate()?;
    let lmax = basis.lmax();
    let x = kappa * sphere.radius;
    let scale_exponent = 2.0 * x;
    let mut te = vec![0.0; lmax];
    let mut tm = vec![0.0; lmax];

    let vacuum = matches!(sphere.material, Material::Static { epsilon, mu } if epsilon == 1.0 && mu == 1.0);
    if vacuum {
        return Ok(MieBlock { kappa, basis, scale_exponent, te, tm });
    }

    // Scaled outside functions: i carries e^{x}, k carries e^{-x}.
    let i = scaled_i_array(lmax, x)?;
    let k = scaled_k_array(lmax, x)?;
    let dpsi = |l: usize| x * i[l - 1] - l as f64 * i[l];
    let dzeta = |l: usize| -x * k[l - 1] - l as f64 * k[l];

    match sphere.material {
        Material::PerfectConductor => {
            for l in 1..=lmax {
                te[l - 1] = -i[l] / k[l] / OUTGOING_NORM;
                tm[l - 1] = -dpsi(l) / dzeta(l) / OUTGOING_NORM;
            }
        }
        material => {
            let eps = material.epsilon(kappa);
            let mu = material.mu(kappa);
            let y = (eps * mu).sqrt() * x;
            let inner = scaled_i_array(lmax, y)?;
            for l in 1..=lmax {
                let rho = y * inner[l - 1] / inner[l] - l as f64;
                te[l - 1] = (i[l] * rho - mu * dpsi(l)) / (mu * dzeta(l) - k[l] * rho) / OUTGOING_NORM;
                tm[l - 1] = (i[l] * rho - eps * dpsi(l)) / (eps * dzeta(l) - k[l] * rho) / OUTGOING_NORM;
            }
        }
    }
    Ok(MieBlock { kappa, basis, scale_exponent, te, tm })
}

type CacheKey = (u64, (u8, u64, u64), u64, usize);

/// Read-through cache of Mie blocks keyed on radius, material, κ and L_max.
#[derive(Debug, Default)]
pub struct MieCache {
    table: Mutex<HashMap<CacheKey, Arc<MieBlock>>>,
}

impl MieCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, sphere: &Sphere, kappa: f64, basis: BasisSpec) -> Result<Arc<MieBlock>> {
        let key = (sphere.radius.to_bits(), sphere.material.cache_key(), kappa.to_bits(), basis.lmax());
        if let Some(block) = self.table.lock().get(&key) {
            return Ok(Arc::clone(block));
        }
        let block = Arc::new(mie_coefficients(sphere, kappa, basis)?);
        self.table.lock().insert(key, Arc::clone(&block));
        Ok(block)
    }

    pub fn len(&self) -> usize {
        self.table.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.table.lock().clear();
    }
}
