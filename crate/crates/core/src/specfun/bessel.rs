//! Spherical Bessel families.
//!
//! Real argument: `j_l`, `y_l` and the outgoing Hankel function
//! `h⁺_l = j_l + i y_l` (so `h⁺_0(x) = -i e^{ix}/x`).
//!
//! Imaginary-axis continuation: the modified spherical Bessel functions
//! `i_l(x) = sqrt(π/2x) I_{l+1/2}(x)` and `k_l(x) = sqrt(π/2x) K_{l+1/2}(x)`,
//! normalised so that `k_0(x) = (π/2) e^{-x}/x` and the Wronskian is
//! `i_l k_l' - i_l' k_l = -π/(2x²)`.
//!
//! The modified functions are returned with their exponential factored out:
//! `i_l` carries `e^{+x}` and `k_l` carries `e^{-x}`, so a product `i_l k_l`
//! recombines exactly.

use num_complex::Complex64;

use crate::error::{CasimirError, Result};

/// Largest order accepted by the recurrences.
pub const MAX_ORDER: usize = 400;

const CF_EPS: f64 = 1e-16;
const CF_MAX_ITER: usize = 1_000_000;
const RESCALE_LIMIT: f64 = 1e250;

/// A value stored as `value × exp(scale_exponent)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledBesselValue {
    pub value: f64,
    pub scale_exponent: f64,
}

impl ScaledBesselValue {
    /// The unscaled value. Overflows to infinity or underflows to zero where
    /// the true value is out of range.
    pub fn reconstruct(&self) -> f64 {
        self.value * self.scale_exponent.exp()
    }

    /// Natural logarithm of the magnitude, valid even when `reconstruct` is not.
    pub fn ln_abs(&self) -> f64 {
        self.value.abs().ln() + self.scale_exponent
    }
}

fn check_order(l: usize) -> Result<()> {
    if l > MAX_ORDER {
        Err(CasimirError::OrderOverflow { order: l, max: MAX_ORDER })
    } else {
        Ok(())
    }
}

fn check_positive(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        Err(CasimirError::Domain(format!("argument must be positive and finite, got {x}")))
    } else {
        Ok(())
    }
}

/// Modified Lentz evaluation of `1 / (b_0 + s/(b_1 + s/(b_2 + ...)))` with
/// partial numerators all equal to `s` (`±1`).
fn ratio_continued_fraction(b: impl Fn(usize) -> f64, s: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = b(0);
    if f == 0.0 {
        f = tiny;
    }
    let mut c = f;
    let mut d = 0.0;
    for j in 1..CF_MAX_ITER {
        let bj = b(j);
        d = bj + s * d;
        if d == 0.0 {
            d = tiny;
        }
        c = bj + s / c;
        if c == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < CF_EPS {
            break;
        }
    }
    1.0 / f
}

/// `e^{-x} i_l(x)` for `l = 0..=lmax`.
///
/// Miller's downward recurrence seeded by the continued fraction for
/// `i_{lmax+1}/i_{lmax}` and normalised on `i_0`.
pub fn scaled_i_array(lmax: usize, x: f64) -> Result<Vec<f64>> {
    check_order(lmax)?;
    check_positive(x)?;
    let i0 = -(-2.0 * x).exp_m1() / (2.0 * x);
    if lmax == 0 {
        return Ok(vec![i0]);
    }
    let ratio = ratio_continued_fraction(|k| (2 * (lmax + k) + 3) as f64 / x, 1.0);
    let mut v = vec![0.0; lmax + 2];
    v[lmax] = 1.0;
    v[lmax + 1] = ratio;
    for l in (1..=lmax).rev() {
        v[l - 1] = v[l + 1] + (2 * l + 1) as f64 / x * v[l];
        if v[l - 1].abs() > RESCALE_LIMIT {
            for w in v[l - 1..].iter_mut() {
                *w /= RESCALE_LIMIT;
            }
        }
    }
    let norm = i0 / v[0];
    v.truncate(lmax + 1);
    v.iter_mut().for_each(|w| *w *= norm);
    Ok(v)
}

/// `e^{x} k_l(x)` for `l = 0..=lmax` by upward recurrence.
pub fn scaled_k_array(lmax: usize, x: f64) -> Result<Vec<f64>> {
    check_order(lmax)?;
    check_positive(x)?;
    let mut v = Vec::with_capacity(lmax + 1);
    let k0 = std::f64::consts::FRAC_PI_2 / x;
    v.push(k0);
    if lmax >= 1 {
        v.push(k0 * (1.0 + 1.0 / x));
    }
    for l in 1..lmax {
        let next = v[l - 1] + (2 * l + 1) as f64 / x * v[l];
        v.push(next);
    }
    Ok(v)
}

/// Scaled modified spherical Bessel function of the first kind.
pub fn modified_sph_bessel_i(l: usize, x: f64) -> Result<ScaledBesselValue> {
    let v = scaled_i_array(l, x)?;
    Ok(ScaledBesselValue { value: v[l], scale_exponent: x })
}

/// Scaled modified spherical Bessel function of the second kind.
pub fn modified_sph_bessel_k(l: usize, x: f64) -> Result<ScaledBesselValue> {
    let v = scaled_k_array(l, x)?;
    if !v[l].is_finite() {
        return Err(CasimirError::Domain(format!("k_{l}({x}) overflows")));
    }
    Ok(ScaledBesselValue { value: v[l], scale_exponent: -x })
}

/// Derivatives `f_l'(x)` of the scaled modified family, returned with the same
/// scale factor as the input array. `first_kind` selects `i_l` (else `k_l`).
pub fn scaled_modified_derivatives(values: &[f64], x: f64, first_kind: bool) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    // i_0' = i_1 and k_0' = -k_1.
    let sign = if first_kind { 1.0 } else { -1.0 };
    let first = if n > 1 {
        values[1]
    } else if first_kind {
        scaled_i_array(1, x).map(|v| v[1]).unwrap_or(f64::NAN)
    } else {
        values[0] * (1.0 + 1.0 / x)
    };
    for l in 0..n {
        out[l] = if l == 0 {
            sign * first
        } else if first_kind {
            values[l - 1] - (l + 1) as f64 / x * values[l]
        } else {
            -values[l - 1] - (l + 1) as f64 / x * values[l]
        };
    }
    out
}

/// `j_l(x)` for `l = 0..=lmax`, `x ≥ 0`.
pub fn sph_bessel_j_array(lmax: usize, x: f64) -> Result<Vec<f64>> {
    check_order(lmax)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(CasimirError::Domain(format!("j_l needs x >= 0, got {x}")));
    }
    let mut v = vec![0.0; lmax + 1];
    if x == 0.0 {
        v[0] = 1.0;
        return Ok(v);
    }
    let (s, c) = x.sin_cos();
    let j0 = if x < 1e-4 { 1.0 - x * x / 6.0 } else { s / x };
    let j1 = if x < 1e-3 {
        x / 3.0 * (1.0 - x * x / 10.0)
    } else {
        s / (x * x) - c / x
    };
    v[0] = j0;
    if lmax == 0 {
        return Ok(v);
    }
    if x > lmax as f64 {
        v[1] = j1;
        for l in 1..lmax {
            v[l + 1] = (2 * l + 1) as f64 / x * v[l] - v[l - 1];
        }
        return Ok(v);
    }
    let ratio = ratio_continued_fraction(|k| (2 * (lmax + k) + 3) as f64 / x, -1.0);
    let mut w = vec![0.0; lmax + 2];
    w[lmax] = 1.0;
    w[lmax + 1] = ratio;
    for l in (1..=lmax).rev() {
        w[l - 1] = (2 * l + 1) as f64 / x * w[l] - w[l + 1];
        if w[l - 1].abs() > RESCALE_LIMIT {
            for u in w[l - 1..].iter_mut() {
                *u /= RESCALE_LIMIT;
            }
        }
    }
    let norm = if j0.abs() >= j1.abs() { j0 / w[0] } else { j1 / w[1] };
    for l in 0..=lmax {
        v[l] = w[l] * norm;
    }
    Ok(v)
}

/// `y_l(x)` for `l = 0..=lmax`, `x > 0`, by upward recurrence.
pub fn sph_bessel_y_array(lmax: usize, x: f64) -> Result<Vec<f64>> {
    check_order(lmax)?;
    check_positive(x)?;
    let (s, c) = x.sin_cos();
    let mut v = Vec::with_capacity(lmax + 1);
    v.push(-c / x);
    if lmax >= 1 {
        v.push(-c / (x * x) - s / x);
    }
    for l in 1..lmax {
        let next = (2 * l + 1) as f64 / x * v[l] - v[l - 1];
        v.push(next);
    }
    Ok(v)
}

pub fn sph_bessel_j(l: usize, x: f64) -> Result<f64> {
    Ok(sph_bessel_j_array(l, x)?[l])
}

pub fn sph_bessel_y(l: usize, x: f64) -> Result<f64> {
    Ok(sph_bessel_y_array(l, x)?[l])
}

/// Outgoing spherical Hankel function, `h⁺_l = j_l + i y_l`.
pub fn sph_hankel_plus(l: usize, x: f64) -> Result<Complex64> {
    check_positive(x)?;
    let j = sph_bessel_j(l, x)?;
    let y = sph_bessel_y(l, x)?;
    Ok(Complex64::new(j, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn derivs(lmax: usize, x: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let i = scaled_i_array(lmax + 1, x).unwrap();
        let k = scaled_k_array(lmax + 1, x).unwrap();
        let di = scaled_modified_derivatives(&i, x, true);
        let dk = scaled_modified_derivatives(&k, x, false);
        (i, di, k, dk)
    }

    #[test]
    fn closed_forms() {
        let i0 = modified_sph_bessel_i(0, 1.0).unwrap().reconstruct();
        assert_relative_eq!(i0, 1.0f64.sinh(), max_relative = 1e-14);
        assert!((i0 - 1.17520).abs() < 1e-5);
        let k0 = modified_sph_bessel_k(0, 1.0).unwrap().reconstruct();
        assert_relative_eq!(k0, PI / 2.0 * (-1.0f64).exp(), max_relative = 1e-14);
        assert!((k0 - 0.57786).abs() < 1e-5);
        // i_1(x) = (x cosh x - sinh x)/x², i_2 = ((x²+3) sinh x - 3x cosh x)/x³
        for &x in &[0.3, 2.0, 7.5] {
            let v = scaled_i_array(2, x).unwrap();
            let e = (-x).exp();
            assert_relative_eq!(v[1], e * (x * x.cosh() - x.sinh()) / (x * x), max_relative = 1e-12);
            assert_relative_eq!(
                v[2],
                e * ((x * x + 3.0) * x.sinh() - 3.0 * x * x.cosh()) / (x * x * x),
                max_relative = 1e-11
            );
        }
    }

    #[test]
    fn small_argument_limits() {
        let x = 1e-9;
        assert_relative_eq!(modified_sph_bessel_i(0, x).unwrap().reconstruct(), 1.0, max_relative = 1e-12);
        for l in 1..5 {
            assert!(modified_sph_bessel_i(l, x).unwrap().reconstruct().abs() < 1e-8);
        }
    }

    #[test]
    fn recurrence_at_three() {
        let v = scaled_i_array(3, 3.0).unwrap();
        assert_relative_eq!(v[1] - v[3], 5.0 / 3.0 * v[2], max_relative = 1e-12);
    }

    #[test]
    fn wronskian_grid() {
        let lmax = 30;
        let mut x = 0.1;
        while x <= 50.0 {
            let (i, di, k, dk) = derivs(lmax, x);
            for l in 0..=lmax {
                // scale factors e^{x} e^{-x} cancel.
                let w = i[l] * dk[l] - di[l] * k[l];
                let expected = -PI / (2.0 * x * x);
                assert_relative_eq!(w, expected, max_relative = 1e-10);
            }
            x *= 1.37;
        }
    }

    #[test]
    fn three_term_recurrences_grid() {
        let lmax = 30;
        let mut x = 0.1;
        while x <= 50.0 {
            let i = scaled_i_array(lmax, x).unwrap();
            let k = scaled_k_array(lmax, x).unwrap();
            let j = sph_bessel_j_array(lmax, x).unwrap();
            let y = sph_bessel_y_array(lmax, x).unwrap();
            for l in 1..lmax {
                let c = (2 * l + 1) as f64 / x;
                let scale = (i[l - 1].abs() + i[l + 1].abs()).max(c * i[l].abs());
                assert!(((i[l - 1] - i[l + 1]) - c * i[l]).abs() <= 1e-10 * scale);
                let scale = k[l + 1].abs();
                assert!(((k[l + 1] - k[l - 1]) - c * k[l]).abs() <= 1e-10 * scale);
                let scale = j[l - 1].abs() + j[l + 1].abs() + c * j[l].abs();
                assert!(((j[l - 1] + j[l + 1]) - c * j[l]).abs() <= 1e-10 * scale);
                let scale = y[l - 1].abs() + y[l + 1].abs() + c * y[l].abs();
                assert!(((y[l - 1] + y[l + 1]) - c * y[l]).abs() <= 1e-10 * scale);
            }
            x *= 1.41;
        }
    }

    #[test]
    fn scaled_values_stay_finite() {
        for &x in &[1e-3, 0.5, 10.0, 300.0, 1e4] {
            let i = scaled_i_array(60, x).unwrap();
            let k = scaled_k_array(60, x).unwrap();
            assert!(i.iter().all(|v| v.is_finite()));
            assert!(k.iter().all(|v| v.is_finite() && *v > 0.0));
            assert!(i[0] > 0.0);
        }
    }

    #[test]
    fn monotonicity() {
        let mut prev_i = 0.0;
        let mut prev_k = f64::INFINITY;
        for n in 1..200 {
            let x = 0.05 * n as f64;
            let i = modified_sph_bessel_i(3, x).unwrap().reconstruct();
            let k = modified_sph_bessel_k(3, x).unwrap().reconstruct();
            assert!(i > prev_i);
            assert!(k < prev_k);
            prev_i = i;
            prev_k = k;
        }
    }

    #[test]
    fn real_argument_values() {
        assert_eq!(sph_bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(sph_bessel_j(3, 0.0).unwrap(), 0.0);
        assert!(sph_bessel_j(0, PI).unwrap().abs() < 1e-15);
        let h = sph_hankel_plus(0, 1.0).unwrap();
        let expected = Complex64::new(0.0, -1.0) * Complex64::new(0.0, 1.0).exp();
        assert!((h - expected).norm() < 1e-15);
        assert!(sph_hankel_plus(0, 0.0).is_err());
        // j_2(x) closed form at x inside the Miller regime
        let x: f64 = 1.7;
        let j2 = (3.0 / (x * x) - 1.0) * x.sin() / x - 3.0 * x.cos() / (x * x);
        assert_relative_eq!(sph_bessel_j(2, x).unwrap(), j2, max_relative = 1e-13);
        // near a zero of j_0
        let x = PI * (1.0 + 1e-9);
        let j = sph_bessel_j_array(5, x).unwrap();
        assert_relative_eq!(j[1], x.sin() / (x * x) - x.cos() / x, max_relative = 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(modified_sph_bessel_i(0, 0.0).is_err());
        assert!(modified_sph_bessel_k(1, -1.0).is_err());
        assert!(matches!(
            modified_sph_bessel_i(MAX_ORDER + 1, 1.0),
            Err(CasimirError::OrderOverflow { .. })
        ));
    }
}
