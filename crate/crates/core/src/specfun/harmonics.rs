//! Complex spherical harmonics with the Condon–Shortley phase.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Flat index of `(l, m)` in arrays covering `l = 0..=lmax`.
#[inline]
pub fn lm_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// `Y_lm(r̂)` for all `l ≤ lmax`, indexed by [`lm_index`]. `dir` need not be
/// normalised but must be nonzero.
pub fn spherical_harmonics(lmax: usize, dir: [f64; 3]) -> Vec<Complex64> {
    let r = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    let cos_t = (dir[2] / r).clamp(-1.0, 1.0);
    let rho = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
    let sin_t = rho / r;
    let phi = if rho > 0.0 { dir[1].atan2(dir[0]) } else { 0.0 };

    let n = (lmax + 1) * (lmax + 1);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    // Normalised associated Legendre functions, m ≥ 0, column by column.
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            pmm *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * sin_t;
        }
        let phase = Complex64::from_polar(1.0, m as f64 * phi);
        let mut p_prev2 = 0.0;
        let mut p_prev = pmm;
        out[lm_index(m, m as i64)] = phase * pmm;
        for l in m + 1..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = if l == m + 1 {
                0.0
            } else {
                (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt()
            };
            let p = a * (cos_t * p_prev - b * p_prev2);
            out[lm_index(l, m as i64)] = phase * p;
            p_prev2 = p_prev;
            p_prev = p;
        }
    }
    for l in 1..=lmax {
        for m in 1..=l as i64 {
            let v = out[lm_index(l, m)].conj();
            out[lm_index(l, -m)] = if m % 2 == 0 { v } else { -v };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders_closed_form() {
        let d = [0.3, -0.4, 0.5];
        let r = (0.5f64).sqrt();
        let (ct, st) = (d[2] / r, (0.25f64).sqrt() / r);
        let phi = f64::atan2(d[1], d[0]);
        let y = spherical_harmonics(2, d);
        let y10 = (3.0 / (4.0 * PI)).sqrt() * ct;
        let y11 = -(3.0 / (8.0 * PI)).sqrt() * st * Complex64::from_polar(1.0, phi);
        let y21 = -(15.0 / (8.0 * PI)).sqrt() * st * ct * Complex64::from_polar(1.0, phi);
        assert!((y[lm_index(1, 0)].re - y10).abs() < 1e-15);
        assert!((y[lm_index(1, 1)] - y11).norm() < 1e-15);
        assert!((y[lm_index(1, -1)] + y11.conj()).norm() < 1e-15);
        assert!((y[lm_index(2, 1)] - y21).norm() < 1e-15);
    }

    #[test]
    fn addition_theorem_sum() {
        // Σ_m |Y_lm|² = (2l+1)/(4π)
        let y = spherical_harmonics(30, [0.1, 0.7, -0.2]);
        for l in 0..=30usize {
            let s: f64 = (-(l as i64)..=l as i64).map(|m| y[lm_index(l, m)].norm_sqr()).sum();
            assert!((s - (2 * l + 1) as f64 / (4.0 * PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn polar_axis() {
        let y = spherical_harmonics(5, [0.0, 0.0, -2.0]);
        for l in 0..=5usize {
            for m in -(l as i64)..=l as i64 {
                let v = y[lm_index(l, m)];
                if m == 0 {
                    let expected = ((2 * l + 1) as f64 / (4.0 * PI)).sqrt() * if l % 2 == 0 { 1.0 } else { -1.0 };
                    assert!((v.re - expected).abs() < 1e-14);
                } else {
                    assert_eq!(v.norm(), 0.0);
                }
            }
        }
    }
}
