//! Rotations of multipole coefficient vectors.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis::BasisSpec;

fn ln_factorial(n: i64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Wigner small-d `d^l_{m' m}(β)` from the explicit sum. Adequate for the
/// moderate orders used in rotations of truncated bases.
pub fn wigner_small_d(l: i64, mp: i64, m: i64, beta: f64) -> f64 {
    if mp.abs() > l || m.abs() > l {
        return 0.0;
    }
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let pre = 0.5 * (ln_factorial(l + mp) + ln_factorial(l - mp) + ln_factorial(l + m) + ln_factorial(l - m));
    let k_min = 0.max(m - mp);
    let k_max = (l + m).min(l - mp);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let den = ln_factorial(l + m - k) + ln_factorial(k) + ln_factorial(l - k - mp) + ln_factorial(k - m + mp);
        let pc = 2 * l - 2 * k + m - mp;
        let ps = 2 * k - m + mp;
        let sign = if (k - m + mp).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        sum += sign * (pre - den).exp() * c.powi(pc as i32) * s.powi(ps as i32);
    }
    sum
}

/// Matrix of `D^l_{m' m}(α, β, γ) = e^{-i m' α} d^l_{m' m}(β) e^{-i m γ}` in the
/// basis order, identical for both polarizations.
///
/// If `c` holds the coefficients of a field `F`, `D c` holds those of the
/// rotated field `F(R⁻¹ r)`, where `R` is the active z-y-z rotation.
pub fn basis_rotation(basis: BasisSpec, alpha: f64, beta: f64, gamma: f64) -> DMatrix<Complex64> {
    let n = basis.modes_per_polarization();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for l in 1..=basis.lmax() as i64 {
        for mp in -l..=l {
            for m in -l..=l {
                let d = wigner_small_d(l, mp, m, beta);
                let v = Complex64::from_polar(d, -(mp as f64) * alpha - (m as f64) * gamma);
                let r = BasisSpec::lm_offset(l as usize, mp);
                let c = BasisSpec::lm_offset(l as usize, m);
                out[(r, c)] = v;
                out[(r + n, c + n)] = v;
            }
        }
    }
    out
}
