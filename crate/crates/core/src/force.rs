//! Casimir force on a target sphere.
//!
//! At zero temperature `F = (ħc/2π) ∫_0^∞ dκ z(κ)`; the integral is taken on
//! `u ∈ (0, 1)` with `κ = u / ((1-u) d)`, `d` the smallest center distance.
//! At temperature `T` it becomes `F = (ħc/2π) Δκ Σ'_n z(n Δκ)` with
//! `Δκ = 2π k_B T/(ħc)` and the `n = 0` term at half weight.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::basis::BasisSpec;
use crate::error::{CasimirError, Result};
use crate::quadrature::integrate;
use crate::scattering::{z_integrand, Configuration, ScatteringMode};
use crate::specfun::MAX_ORDER;
use crate::units::matsubara_spacing;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalSpec {
    /// Kelvin; zero selects the frequency integral.
    pub temperature: f64,
    /// Largest Matsubara index that may be summed.
    pub matsubara_cutoff: usize,
}

impl ThermalSpec {
    pub const ZERO_MODE_WEIGHT: f64 = 0.5;

    pub fn zero() -> Self {
        Self { temperature: 0.0, matsubara_cutoff: 100_000 }
    }

    pub fn at(temperature: f64) -> Self {
        Self { temperature, matsubara_cutoff: 100_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    /// Relative tolerance on the force vector; also bounds the Matsubara tail.
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-6, max_evals: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceResult {
    /// ħc/μm².
    pub force: [f64; 3],
    pub target: usize,
    pub lmax: usize,
    pub mode: ScatteringMode,
    pub temperature: f64,
    /// Absolute error estimate of the force, ħc/μm².
    pub error_estimate: f64,
    /// Integrand evaluations (frequencies).
    pub evaluations: usize,
    pub wall_time_s: f64,
}

/// `max(4, ceil(10 R_max / gap_min))`, bounded by the supported order.
pub fn default_lmax(config: &Configuration) -> usize {
    let Some(gap) = config.min_gap() else { return 4 };
    let l = (10.0 * config.max_radius() / gap).ceil();
    let cap = MAX_ORDER / 4;
    if l.is_finite() && l < cap as f64 {
        (l as usize).max(4)
    } else {
        cap
    }
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Force on `target`; dispatches on the temperature.
pub fn casimir_force(
    config: &Configuration,
    target: usize,
    basis: BasisSpec,
    mode: ScatteringMode,
    thermal: ThermalSpec,
    quad: QuadratureSpec,
) -> Result<ForceResult> {
    if thermal.temperature > 0.0 {
        return matsubara_force(config, target, basis, mode, thermal, quad);
    }
    if !(thermal.temperature == 0.0) {
        return Err(CasimirError::Domain(format!("temperature must be non-negative, got {}", thermal.temperature)));
    }
    config.check_target(target)?;
    let start = Instant::now();
    let Some(d_char) = config.min_center_distance() else {
        return Ok(result([0.0; 3], target, basis, mode, 0.0, 0.0, 0, start));
    };
    let integrand = |u: f64| -> Result<[f64; 3]> {
        let kappa = u / ((1.0 - u) * d_char);
        let jac = 1.0 / (d_char * (1.0 - u) * (1.0 - u));
        let z = z_integrand(config, target, kappa, basis, mode)?;
        Ok(z.value.map(|v| v * jac / TWO_PI))
    };
    let r = integrate(integrand, 0.0, 1.0, quad.rel_tol, 0.0, quad.max_evals)?;
    Ok(result(r.value, target, basis, mode, 0.0, r.error, r.evals, start))
}

#[allow(clippy::too_many_arguments)]
fn result(
    force: [f64; 3],
    target: usize,
    basis: BasisSpec,
    mode: ScatteringMode,
    temperature: f64,
    error_estimate: f64,
    evaluations: usize,
    start: Instant,
) -> ForceResult {
    ForceResult {
        force,
        target,
        lmax: basis.lmax(),
        mode,
        temperature,
        error_estimate,
        evaluations,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

/// `z` at `κ → 0⁺`, from a small regulator with Richardson refinement.
pub fn zero_mode(config: &Configuration, target: usize, basis: BasisSpec, mode: ScatteringMode) -> Result<[f64; 3]> {
    let Some(d_char) = config.min_center_distance() else { return Ok([0.0; 3]) };
    let k0 = 1e-6 / d_char;
    let a = z_integrand(config, target, k0, basis, mode)?.value;
    let b = z_integrand(config, target, 2.0 * k0, basis, mode)?.value;
    Ok([0, 1, 2].map(|k| 2.0 * a[k] - b[k]))
}

/// Matsubara sum at `thermal.temperature > 0`, extended in batches until the
/// geometric tail bound drops below `quad.rel_tol` of the running sum.
pub fn matsubara_force(
    config: &Configuration,
    target: usize,
    basis: BasisSpec,
    mode: ScatteringMode,
    thermal: ThermalSpec,
    quad: QuadratureSpec,
) -> Result<ForceResult> {
    let t = thermal.temperature;
    if !(t > 0.0) || !t.is_finite() {
        return Err(CasimirError::Domain(format!("Matsubara sum needs T > 0, got {t}")));
    }
    config.check_target(target)?;
    let start = Instant::now();
    if config.len() == 1 {
        return Ok(result([0.0; 3], target, basis, mode, t, 0.0, 0, start));
    }
    let dk = matsubara_spacing(t);
    let z0 = zero_mode(config, target, basis, mode)?;
    let mut sum = z0.map(|v| ThermalSpec::ZERO_MODE_WEIGHT * v);
    let mut evals = 2;
    let batch = rayon::current_num_threads().max(4) * 2;
    let mut next = 1usize;
    let mut tail;
    loop {
        let end = (next + batch).min(thermal.matsubara_cutoff + 1);
        if next >= end {
            tail = f64::INFINITY;
            break;
        }
        let terms: Vec<[f64; 3]> = (next..end)
            .into_par_iter()
            .map(|n| z_integrand(config, target, n as f64 * dk, basis, mode).map(|z| z.value))
            .collect::<Result<_>>()?;
        evals += terms.len();
        for z in &terms {
            for k in 0..3 {
                sum[k] += z[k];
            }
        }
        next = end;
        let last = norm(terms[terms.len() - 1]);
        let prev = if terms.len() >= 2 { norm(terms[terms.len() - 2]) } else { f64::INFINITY };
        let q = if prev > 0.0 { last / prev } else { 0.0 };
        tail = if last == 0.0 { 0.0 } else if q < 1.0 { last * q / (1.0 - q) } else { f64::INFINITY };
        if tail <= quad.rel_tol * norm(sum) {
            break;
        }
    }
    if tail > quad.rel_tol * norm(sum) {
        return Err(CasimirError::MatsubaraCutoff { cutoff: thermal.matsubara_cutoff, tail: tail * dk / TWO_PI });
    }
    let force = sum.map(|v| v * dk / TWO_PI);
    Ok(result(force, target, basis, mode, t, tail * dk / TWO_PI, evals, start))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub lmax: usize,
    pub mode: ScatteringMode,
    pub force: [f64; 3],
    /// `|F - F_prev|` against the previous `L_max` in the same mode.
    pub difference: Option<f64>,
}

/// Force over a grid of truncation orders and scattering modes.
pub fn convergence_scan(
    config: &Configuration,
    target: usize,
    lmax_list: &[usize],
    modes: &[ScatteringMode],
    thermal: ThermalSpec,
    quad: QuadratureSpec,
) -> Result<Vec<ConvergenceRow>> {
    if lmax_list.is_empty() || modes.is_empty() {
        return Err(CasimirError::Domain("convergence scan needs at least one L_max and one mode".into()));
    }
    let mut rows = Vec::new();
    for &mode in modes {
        let mut prev: Option<[f64; 3]> = None;
        for &lmax in lmax_list {
            let basis = BasisSpec::new(lmax)?;
            let f = casimir_force(config, target, basis, mode, thermal, quad)?.force;
            let difference = prev.map(|p| norm([f[0] - p[0], f[1] - p[1], f[2] - p[2]]));
            rows.push(ConvergenceRow { lmax, mode, force: f, difference });
            prev = Some(f);
        }
    }
    Ok(rows)
}
