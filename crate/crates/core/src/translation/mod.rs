//! Translation operators for vector spherical waves on the imaginary axis.
//!
//! Waves about a center are `M_lm = L ψ_lm / sqrt(l(l+1))` and `N_lm = ∇×M_lm/κ`
//! with scalar waves `ψ_lm = f_l(κr) Y_lm(r̂)`. Regular waves use `f_l = i_l`;
//! outgoing waves use `f_l = OUTGOING_NORM · k_l`.
//!
//! An operator for displacement `d = c_target - c_source` maps source
//! coefficients to coefficients of regular waves about the target:
//!
//! ```text
//! [TE]   [ a  -b ] [TE]
//! [TM] = [ b   a ] [TM]
//! ```
//!
//! With `u = κd`, the scalar coefficients `β` of the addition theorem and the
//! operators `Q(u) = (u·r) - r·∇(u·∇)` and `u·L` acting on regular waves,
//!
//! ```text
//! a = (l(l+1) β - Q(u) β) / sqrt(l(l+1) l'(l'+1))
//! b = i (u·L) β / sqrt(l(l+1) l'(l'+1))
//! ```
//!
//! The gradient with respect to `d` follows by differentiating `β` through
//! the recurrences of the radial functions and using that `Q` and `u·L` are
//! linear in `u`.

mod rotation;
mod tables;

pub use rotation::{basis_rotation, wigner_small_d};
pub use tables::{tables_for, TranslationTables};

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use crate::basis::{BasisSpec, MultipoleIndex, Polarization};
use crate::error::{CasimirError, Result};
use crate::mie::OUTGOING_NORM;
use crate::specfun::{lm_index, scaled_i_array, scaled_k_array, spherical_harmonics};

/// Which radial family the source waves carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveKind {
    /// Outgoing source waves re-expanded as regular waves (between spheres).
    Outgoing,
    /// Regular source waves re-expanded as regular waves.
    Regular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientMode {
    #[default]
    Analytic,
    /// Central differences of the assembled operator, for cross-checks.
    FiniteDifference,
}

/// Dense translation matrix, stored as `matrix · exp(scale_exponent)`.
#[derive(Debug, Clone)]
pub struct TranslationOperator {
    pub displacement: [f64; 3],
    pub kappa: f64,
    pub kind: WaveKind,
    pub basis: BasisSpec,
    pub matrix: DMatrix<Complex64>,
    pub scale_exponent: f64,
}

impl TranslationOperator {
    pub fn reconstructed(&self) -> DMatrix<Complex64> {
        &self.matrix * Complex64::from(self.scale_exponent.exp())
    }
}

/// Derivatives with respect to the Cartesian components of the displacement,
/// in μm⁻¹, sharing one scale factor.
#[derive(Debug, Clone)]
pub struct TranslationGradient {
    pub components: [DMatrix<Complex64>; 3],
    pub scale_exponent: f64,
}

impl TranslationGradient {
    /// `n·∇A` (scaled).
    pub fn contract(&self, n: [f64; 3]) -> DMatrix<Complex64> {
        &self.components[0] * Complex64::from(n[0])
            + &self.components[1] * Complex64::from(n[1])
            + &self.components[2] * Complex64::from(n[2])
    }

    pub fn reconstructed(&self, n: [f64; 3]) -> DMatrix<Complex64> {
        self.contract(n) * Complex64::from(self.scale_exponent.exp())
    }
}

#[derive(Clone, Copy)]
enum Component {
    Z,
    Plus,
    Minus,
}

impl Component {
    const ALL: [Component; 3] = [Component::Z, Component::Plus, Component::Minus];

    fn dm(self) -> i64 {
        match self {
            Component::Z => 0,
            Component::Plus => 1,
            Component::Minus => -1,
        }
    }
}

/// Coefficient of `ψ_{l+1, m+Δ}` in `∂_c ψ_lm` for regular waves.
fn up_coef(c: Component, l: i64, m: i64) -> f64 {
    if m.abs() > l {
        return 0.0;
    }
    let (lf, mf) = (l as f64, m as f64);
    match c {
        Component::Z => (((lf + 1.0).powi(2) - mf * mf) / ((2.0 * lf + 3.0) * (2.0 * lf + 1.0))).sqrt(),
        Component::Plus => -((lf + mf + 1.0) * (lf + mf + 2.0) / ((2.0 * lf + 1.0) * (2.0 * lf + 3.0))).sqrt(),
        Component::Minus => ((lf - mf + 1.0) * (lf - mf + 2.0) / ((2.0 * lf + 1.0) * (2.0 * lf + 3.0))).sqrt(),
    }
}

/// Coefficient of `ψ_{l-1, m+Δ}` in `∂_c ψ_lm` for regular waves.
fn dn_coef(c: Component, l: i64, m: i64) -> f64 {
    if l == 0 || m.abs() > l {
        return 0.0;
    }
    let (lf, mf) = (l as f64, m as f64);
    let den = (2.0 * lf - 1.0) * (2.0 * lf + 1.0);
    match c {
        Component::Z => ((lf * lf - mf * mf) / den).sqrt(),
        Component::Plus => (((lf - mf) * (lf - mf - 1.0)).max(0.0) / den).sqrt(),
        Component::Minus => -(((lf + mf) * (lf + mf - 1.0)).max(0.0) / den).sqrt(),
    }
}

/// Spherical weights `(w_z, w_+, w_-)` of a direction so that
/// `w·∇ = w_z ∂_z + w_+ ∂_+ + w_- ∂_-`.
fn spherical_weights(w: [f64; 3]) -> [Complex64; 3] {
    [
        Complex64::from(w[2]),
        Complex64::new(w[0], -w[1]) * 0.5,
        Complex64::new(w[0], w[1]) * 0.5,
    ]
}

fn norm2(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Scaled radial function times harmonic, `Ψ_LM(u)`, for `L ≤ lmax`.
/// Returns the values and the scale exponent they omit.
fn solid_waves(kind: WaveKind, lmax: usize, u: [f64; 3]) -> Result<(Vec<Complex64>, f64)> {
    let r = norm2(u);
    let (radial, scale) = match kind {
        WaveKind::Outgoing => (scaled_k_array(lmax, r)?, -r),
        WaveKind::Regular => (scaled_i_array(lmax, r)?, r),
    };
    let mut y = spherical_harmonics(lmax, u);
    for l in 0..=lmax {
        for m in -(l as i64)..=l as i64 {
            y[lm_index(l, m)] *= radial[l];
        }
    }
    Ok((y, scale))
}

/// Cartesian derivatives of `Ψ` for `L ≤ lmax`, from values up to `lmax + 1`.
fn solid_wave_gradient(kind: WaveKind, psi: &[Complex64], lmax: usize) -> [Vec<Complex64>; 3] {
    let sigma = match kind {
        WaveKind::Outgoing => -1.0,
        WaveKind::Regular => 1.0,
    };
    let n = (lmax + 1) * (lmax + 1);
    let mut d = [vec![Complex64::default(); n], vec![Complex64::default(); n], vec![Complex64::default(); n]];
    for l in 0..=lmax as i64 {
        for m in -l..=l {
            let mut comp = [Complex64::default(); 3];
            for (ci, c) in Component::ALL.into_iter().enumerate() {
                let m2 = m + c.dm();
                let mut v = Complex64::default();
                if m2.abs() <= l + 1 {
                    v += psi[lm_index((l + 1) as usize, m2)] * up_coef(c, l, m);
                }
                if l >= 1 && m2.abs() <= l - 1 {
                    v += psi[lm_index((l - 1) as usize, m2)] * dn_coef(c, l, m);
                }
                comp[ci] = v * sigma;
            }
            let k = lm_index(l as usize, m);
            let (dz, dp, dmn) = (comp[0], comp[1], comp[2]);
            d[0][k] = (dp + dmn) * 0.5;
            d[1][k] = (dp - dmn) * Complex64::new(0.0, -0.5);
            d[2][k] = dz;
        }
    }
    d
}

/// Scalar coefficients `β[target][source]`, row-major.
fn scalar_coefficients(tables: &TranslationTables, kind: WaveKind, psi: &[Complex64]) -> Vec<Complex64> {
    let n_src = tables.n_source();
    let mut beta = vec![Complex64::default(); tables.n_scalar() * n_src];
    for l in 0..=tables.scalar_lmax {
        let sign = match kind {
            WaveKind::Outgoing if l % 2 == 1 => -1.0,
            _ => 1.0,
        };
        for m in -(l as i64)..=l as i64 {
            let t = lm_index(l, m);
            for s in 0..n_src {
                let mut acc = Complex64::default();
                for &(idx, c) in tables.terms(t, s) {
                    acc += psi[idx as usize] * c;
                }
                beta[t * n_src + s] = acc * sign;
            }
        }
    }
    beta
}

/// Adds the vector coefficients generated by `beta` and direction `w` into
/// `a` and `b` (row-major over `(L, M)` targets with `L ≥ 1`, then sources).
fn accumulate_vector(
    lmax: usize,
    beta: &[Complex64],
    w: [f64; 3],
    with_diagonal: bool,
    a: &mut [Complex64],
    b: &mut [Complex64],
) {
    let n_src = lmax * (lmax + 2);
    let weights = spherical_weights(w);
    let src_l: Vec<f64> = (1..=lmax).flat_map(|l| std::iter::repeat_n(l as f64, 2 * l + 1)).collect();
    let bet = |l: i64, m: i64, s: usize| -> Complex64 { beta[lm_index(l as usize, m) * n_src + s] };
    for big_l in 1..=lmax as i64 {
        let lf = big_l as f64;
        let ll1 = lf * (lf + 1.0);
        for big_m in -big_l..=big_l {
            let row = BasisSpec::lm_offset(big_l as usize, big_m);
            for s in 0..n_src {
                let mut qa = Complex64::default();
                for (ci, c) in Component::ALL.into_iter().enumerate() {
                    let wc = weights[ci];
                    if wc == Complex64::default() {
                        continue;
                    }
                    let m = big_m - c.dm();
                    let mut t = Complex64::default();
                    if m.abs() <= big_l - 1 {
                        t += bet(big_l - 1, m, s) * ((lf + 1.0) * up_coef(c, big_l - 1, m));
                    }
                    if m.abs() <= big_l + 1 {
                        t -= bet(big_l + 1, m, s) * (lf * dn_coef(c, big_l + 1, m));
                    }
                    qa += wc * t;
                }
                let mut lb = weights[0] * bet(big_l, big_m, s) * big_m as f64;
                if big_m - 1 >= -big_l {
                    let mm = (big_m - 1) as f64;
                    lb += weights[1] * bet(big_l, big_m - 1, s) * (ll1 - mm * (mm + 1.0)).sqrt();
                }
                if big_m + 1 <= big_l {
                    let mm = (big_m + 1) as f64;
                    lb += weights[2] * bet(big_l, big_m + 1, s) * (ll1 - mm * (mm - 1.0)).sqrt();
                }
                let lp = src_l[s];
                let inv = 1.0 / (ll1 * lp * (lp + 1.0)).sqrt();
                let mut av = -qa;
                if with_diagonal {
                    av += bet(big_l, big_m, s) * ll1;
                }
                a[row * n_src + s] += av * inv;
                b[row * n_src + s] += Complex64::new(0.0, 1.0) * lb * inv;
            }
        }
    }
}

fn block_matrix(n: usize, a: &[Complex64], b: &[Complex64], norm: f64) -> DMatrix<Complex64> {
    let mut mat = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let av = a[r * n + c] * norm;
            let bv = b[r * n + c] * norm;
            mat[(r, c)] = av;
            mat[(r + n, c + n)] = av;
            mat[(r + n, c)] = bv;
            mat[(r, c + n)] = -bv;
        }
    }
    mat
}

fn kind_norm(kind: WaveKind) -> f64 {
    match kind {
        WaveKind::Outgoing => OUTGOING_NORM,
        WaveKind::Regular => 1.0,
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(CasimirError::Domain(format!("kappa must be positive, got {kappa}")));
    }
    Ok(())
}

/// Translation operator for displacement `d` (μm) at wavenumber `kappa` (μm⁻¹).
///
/// `d = 0` returns the identity for either kind.
pub fn assemble_translation(basis: BasisSpec, d: [f64; 3], kappa: f64, kind: WaveKind) -> Result<TranslationOperator> {
    check_kappa(kappa)?;
    let dim = basis.dimension();
    if norm2(d) == 0.0 {
        return Ok(TranslationOperator {
            displacement: d,
            kappa,
            kind,
            basis,
            matrix: DMatrix::identity(dim, dim),
            scale_exponent: 0.0,
        });
    }
    let u = [kappa * d[0], kappa * d[1], kappa * d[2]];
    let tables = tables_for(basis.lmax());
    let (psi, scale) = solid_waves(kind, tables.psi_lmax, u)?;
    let beta = scalar_coefficients(&tables, kind, &psi);
    let n = basis.modes_per_polarization();
    let mut a = vec![Complex64::default(); n * n];
    let mut b = vec![Complex64::default(); n * n];
    accumulate_vector(basis.lmax(), &beta, u, true, &mut a, &mut b);
    Ok(TranslationOperator {
        displacement: d,
        kappa,
        kind,
        basis,
        matrix: block_matrix(n, &a, &b, kind_norm(kind)),
        scale_exponent: scale,
    })
}

/// Operator together with its gradient, sharing the scale factor.
pub fn assemble_with_gradient(
    basis: BasisSpec,
    d: [f64; 3],
    kappa: f64,
    kind: WaveKind,
) -> Result<(TranslationOperator, TranslationGradient)> {
    check_kappa(kappa)?;
    if norm2(d) == 0.0 {
        return Err(CasimirError::SingularDisplacement);
    }
    let u = [kappa * d[0], kappa * d[1], kappa * d[2]];
    let tables = tables_for(basis.lmax());
    let (psi, scale) = solid_waves(kind, tables.psi_lmax + 1, u)?;
    let dpsi = solid_wave_gradient(kind, &psi, tables.psi_lmax);
    let beta = scalar_coefficients(&tables, kind, &psi);
    let n = basis.modes_per_polarization();
    let lmax = basis.lmax();
    let norm = kind_norm(kind);

    let mut a = vec![Complex64::default(); n * n];
    let mut b = vec![Complex64::default(); n * n];
    accumulate_vector(lmax, &beta, u, true, &mut a, &mut b);
    let op = TranslationOperator {
        displacement: d,
        kappa,
        kind,
        basis,
        matrix: block_matrix(n, &a, &b, norm),
        scale_exponent: scale,
    };

    let unit = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let components: Vec<DMatrix<Complex64>> = (0..3)
        .map(|k| {
            let dbeta = scalar_coefficients(&tables, kind, &dpsi[k]);
            let mut a = vec![Complex64::default(); n * n];
            let mut b = vec![Complex64::default(); n * n];
            accumulate_vector(lmax, &dbeta, u, true, &mut a, &mut b);
            accumulate_vector(lmax, &beta, unit[k], false, &mut a, &mut b);
            // d/dd = κ d/du
            block_matrix(n, &a, &b, norm * kappa)
        })
        .collect();
    let [gx, gy, gz]: [DMatrix<Complex64>; 3] = components.try_into().expect("three components");
    Ok((op, TranslationGradient { components: [gx, gy, gz], scale_exponent: scale }))
}

/// Gradient of the translation operator with respect to the displacement.
pub fn translation_gradient(
    basis: BasisSpec,
    d: [f64; 3],
    kappa: f64,
    kind: WaveKind,
    mode: GradientMode,
) -> Result<TranslationGradient> {
    match mode {
        GradientMode::Analytic => assemble_with_gradient(basis, d, kappa, kind).map(|(_, g)| g),
        GradientMode::FiniteDifference => finite_difference_gradient(basis, d, kappa, kind),
    }
}

fn finite_difference_gradient(basis: BasisSpec, d: [f64; 3], kappa: f64, kind: WaveKind) -> Result<TranslationGradient> {
    check_kappa(kappa)?;
    let r = norm2(d);
    if r == 0.0 {
        return Err(CasimirError::SingularDisplacement);
    }
    let h = 1e-5 * r;
    let center = assemble_translation(basis, d, kappa, kind)?;
    let scale = center.scale_exponent;
    let mut components = Vec::with_capacity(3);
    for k in 0..3 {
        let mut dp = d;
        let mut dm = d;
        dp[k] += h;
        dm[k] -= h;
        let p = assemble_translation(basis, dp, kappa, kind)?;
        let m = assemble_translation(basis, dm, kappa, kind)?;
        let fp = Complex64::from((p.scale_exponent - scale).exp());
        let fm = Complex64::from((m.scale_exponent - scale).exp());
        components.push((p.matrix * fp - m.matrix * fm) / Complex64::from(2.0 * h));
    }
    let [gx, gy, gz]: [DMatrix<Complex64>; 3] = components.try_into().expect("three components");
    Ok(TranslationGradient { components: [gx, gy, gz], scale_exponent: scale })
}

#[cfg(test)]
mod tests;
