//! Wigner 3j symbols and Gaunt coefficients.
//!
//! Whole families `(l1 l2 l3; m1 m2 -m1-m2)` over `l3` come from the
//! Schulten–Gordon three-term recurrence, run forward from the lower end and
//! backward from the upper end and spliced inside the classically allowed
//! region. Normalisation uses `Σ (2 l3 + 1) f² = 1` and the sign is fixed at
//! `l3 = l1 + l2`. No factorial ratios are formed, so large orders are safe.

use std::f64::consts::PI;

const RESCALE: f64 = 1e200;

/// A run of 3j symbols over consecutive `l3 = l3_min ..= l3_min + values.len() - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeJFamily {
    pub l3_min: i64,
    pub values: Vec<f64>,
}

impl ThreeJFamily {
    pub fn get(&self, l3: i64) -> f64 {
        if l3 < self.l3_min {
            return 0.0;
        }
        self.values.get((l3 - self.l3_min) as usize).copied().unwrap_or(0.0)
    }

    pub fn l3_max(&self) -> i64 {
        self.l3_min + self.values.len() as i64 - 1
    }
}

/// `(l1 l2 l3; m1 m2 m3)` for all admissible `l3`, with `m3 = -m1 - m2`.
pub fn wigner3j_family(l1: i64, l2: i64, m1: i64, m2: i64) -> ThreeJFamily {
    let m3 = -m1 - m2;
    let empty = ThreeJFamily { l3_min: 0, values: Vec::new() };
    if l1 < 0 || l2 < 0 || m1.abs() > l1 || m2.abs() > l2 {
        return empty;
    }
    let jmin = (l1 - l2).abs().max(m3.abs());
    let jmax = l1 + l2;
    if jmin > jmax {
        return empty;
    }
    let n = (jmax - jmin + 1) as usize;

    let (fl1, fl2, fm1, fm2, fm3) = (l1 as f64, l2 as f64, m1 as f64, m2 as f64, m3 as f64);
    let a = |j: f64| -> f64 {
        let t1 = j * j - (fl1 - fl2) * (fl1 - fl2);
        let t2 = (fl1 + fl2 + 1.0) * (fl1 + fl2 + 1.0) - j * j;
        let t3 = j * j - fm3 * fm3;
        (t1 * t2 * t3).max(0.0).sqrt()
    };
    let b = |j: f64| -> f64 {
        -(2.0 * j + 1.0) * (fl1 * (fl1 + 1.0) * fm3 - fl2 * (fl2 + 1.0) * fm3 - j * (j + 1.0) * (fm2 - fm1))
    };

    let mut values = if n == 1 {
        vec![1.0]
    } else {
        // Backward run from the top.
        let mut g = vec![0.0; n];
        g[n - 1] = 1.0;
        let jtop = jmax as f64;
        g[n - 2] = -b(jtop) * g[n - 1] / ((jtop + 1.0) * a(jtop));
        for k in (1..n - 1).rev() {
            let j = (jmin + k as i64) as f64;
            g[k - 1] = -(j * a(j + 1.0) * g[k + 1] + b(j) * g[k]) / ((j + 1.0) * a(j));
            if g[k - 1].abs() > RESCALE {
                g[k - 1..].iter_mut().for_each(|v| *v /= RESCALE);
            }
        }
        if jmin == 0 {
            g
        } else {
            // Forward run from the bottom.
            let mut f = vec![0.0; n];
            f[0] = 1.0;
            let jb = jmin as f64;
            f[1] = -b(jb) * f[0] / (jb * a(jb + 1.0));
            for k in 1..n - 1 {
                let j = (jmin + k as i64) as f64;
                f[k + 1] = -(b(j) * f[k] + (j + 1.0) * a(j) * f[k - 1]) / (j * a(j + 1.0));
                if f[k + 1].abs() > RESCALE {
                    f[..=k + 1].iter_mut().for_each(|v| *v /= RESCALE);
                }
            }
            // Splice in the middle of the classically allowed region.
            let classical: Vec<usize> = (1..n - 1)
                .filter(|&k| {
                    let j = (jmin + k as i64) as f64;
                    let bj = b(j);
                    bj * bj <= 4.0 * j * (j + 1.0) * a(j) * a(j + 1.0)
                })
                .collect();
            let km = if classical.is_empty() { n / 2 } else { classical[classical.len() / 2] };
            let lo = km.saturating_sub(1);
            let hi = (km + 1).min(n - 1);
            let (mut num, mut den) = (0.0, 0.0);
            for k in lo..=hi {
                num += f[k] * g[k];
                den += g[k] * g[k];
            }
            let scale = if den > 0.0 { num / den } else { 0.0 };
            let mut out = f;
            for k in km + 1..n {
                out[k] = g[k] * scale;
            }
            if scale == 0.0 {
                // Degenerate splice; fall back to the backward run, which is exact
                // whenever the lower end is not classically forbidden.
                out = g;
            }
            out
        }
    };

    let norm: f64 = values
        .iter()
        .enumerate()
        .map(|(k, v)| (2.0 * (jmin + k as i64) as f64 + 1.0) * v * v)
        .sum();
    let sign_top = if (l1 - l2 - m3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let s = sign_top * values[n - 1].signum() / norm.sqrt();
    values.iter_mut().for_each(|v| *v *= s);
    ThreeJFamily { l3_min: jmin, values }
}

/// Single Wigner 3j symbol; zero whenever a selection rule fails.
pub fn wigner3j(l1: i64, l2: i64, l3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    if m1 + m2 + m3 != 0 || m3.abs() > l3 || l3 < (l1 - l2).abs() || l3 > l1 + l2 {
        return 0.0;
    }
    wigner3j_family(l1, l2, m1, m2).get(l3)
}

/// `∫ Y_{l1 m1} Y_{l2 m2} Y_{l3 m3} dΩ`.
pub fn gaunt(l1: i64, m1: i64, l2: i64, m2: i64, l3: i64, m3: i64) -> f64 {
    if m1 + m2 + m3 != 0 || (l1 + l2 + l3) % 2 != 0 {
        return 0.0;
    }
    let pre = (((2 * l1 + 1) * (2 * l2 + 1) * (2 * l3 + 1)) as f64 / (4.0 * PI)).sqrt();
    pre * wigner3j(l1, l2, l3, 0, 0, 0) * wigner3j(l1, l2, l3, m1, m2, m3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    /// Racah's closed form in exact rational arithmetic: returns (sign·sqrt(q))
    /// as the pair (sign, q) to avoid rounding before the final square root.
    fn racah(l1: i64, l2: i64, l3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
        if m1 + m2 + m3 != 0 || l3 < (l1 - l2).abs() || l3 > l1 + l2 {
            return 0.0;
        }
        if m1.abs() > l1 || m2.abs() > l2 || m3.abs() > l3 {
            return 0.0;
        }
        let fact = |n: i64| -> BigInt { (1..=n).fold(BigInt::from(1), |acc, k| acc * k) };
        let delta = BigRational::new(
            fact(l1 + l2 - l3) * fact(l1 - l2 + l3) * fact(-l1 + l2 + l3),
            fact(l1 + l2 + l3 + 1),
        );
        let pref = delta
            * BigRational::from_integer(
                fact(l1 + m1) * fact(l1 - m1) * fact(l2 + m2) * fact(l2 - m2) * fact(l3 + m3) * fact(l3 - m3),
            );
        let kmin = 0.max(l2 - l3 - m1).max(l1 - l3 + m2);
        let kmax = (l1 + l2 - l3).min(l1 - m1).min(l2 + m2);
        let mut sum = BigRational::from_integer(BigInt::from(0));
        for k in kmin..=kmax {
            let den = fact(k) * fact(l1 + l2 - l3 - k) * fact(l1 - m1 - k) * fact(l2 + m2 - k)
                * fact(l3 - l2 + m1 + k)
                * fact(l3 - l1 - m2 + k);
            let term = BigRational::new(BigInt::from(1), den);
            if k % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
        }
        let phase = if (l1 - l2 - m3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let to_f64 = |r: &BigRational| -> f64 {
            let n: f64 = r.numer().to_string().parse().unwrap();
            let d: f64 = r.denom().to_string().parse().unwrap();
            n / d
        };
        // value = phase * sqrt(pref) * sum; square exactly then take root.
        let sq = pref * sum.clone() * sum.clone();
        let sign = if sum < BigRational::from_integer(BigInt::from(0)) { -1.0 } else { 1.0 };
        phase * sign * to_f64(&sq).sqrt()
    }

    #[test]
    fn known_value() {
        let v = wigner3j(1, 1, 2, 0, 0, 0);
        assert!((v - (2.0f64 / 15.0).sqrt()).abs() < 1e-15);
        assert!((v - 0.365148).abs() < 1e-6);
    }

    #[test]
    fn selection_rules() {
        assert_eq!(wigner3j(2, 3, 4, 1, 1, 1), 0.0);
        assert_eq!(wigner3j(1, 1, 3, 0, 0, 0), 0.0);
        assert_eq!(wigner3j(1, 1, 1, 0, 0, 0), 0.0);
    }

    #[test]
    fn matches_racah_exhaustively_small() {
        for l1 in 0..=6 {
            for l2 in 0..=6 {
                for m1 in -l1..=l1 {
                    for m2 in -l2..=l2 {
                        let fam = wigner3j_family(l1, l2, m1, m2);
                        for l3 in (l1 - l2).abs()..=l1 + l2 {
                            let exact = racah(l1, l2, l3, m1, m2, -m1 - m2);
                            let got = fam.get(l3);
                            assert!(
                                (got - exact).abs() < 1e-13,
                                "({l1} {l2} {l3}; {m1} {m2}) {got} vs {exact}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn matches_racah_larger_orders() {
        let cases = [(20, 15, 3, -7), (25, 25, 0, 0), (30, 12, -11, 4), (18, 22, 17, -20), (40, 40, 1, -1)];
        for &(l1, l2, m1, m2) in &cases {
            let fam = wigner3j_family(l1, l2, m1, m2);
            for l3 in fam.l3_min..=fam.l3_max() {
                let exact = racah(l1, l2, l3, m1, m2, -m1 - m2);
                assert!((fam.get(l3) - exact).abs() < 1e-12, "({l1} {l2} {l3}; {m1} {m2})");
            }
        }
    }

    #[test]
    fn orthogonality() {
        for &(l1, l2) in &[(3i64, 4i64), (7, 2), (10, 10), (15, 9)] {
            for l3 in (l1 - l2).abs()..=l1 + l2 {
                for m3 in -l3..=l3 {
                    let mut s = 0.0;
                    for m1 in -l1..=l1 {
                        let m2 = -m1 - m3;
                        if m2.abs() <= l2 {
                            let v = wigner3j(l1, l2, l3, m1, m2, m3);
                            s += v * v;
                        }
                    }
                    assert!(((2 * l3 + 1) as f64 * s - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn column_swap_symmetry() {
        for &(l1, l2, l3, m1, m2) in &[(2, 3, 4, 1, -2), (5, 5, 6, 2, 3), (4, 7, 5, -4, 0)] {
            let m3 = -m1 - m2;
            let v = wigner3j(l1, l2, l3, m1, m2, m3);
            let phase = if (l1 + l2 + l3) % 2 == 0 { 1.0 } else { -1.0 };
            assert!((wigner3j(l2, l1, l3, m2, m1, m3) - phase * v).abs() < 1e-14);
            assert!((wigner3j(l1, l3, l2, m1, m3, m2) - phase * v).abs() < 1e-14);
        }
    }

    #[test]
    fn gaunt_against_y00() {
        // ∫ Y00 Y_lm Y_l,-m = (-1)^m / sqrt(4π)
        for l in 0..6 {
            for m in -l..=l {
                let expected = if m % 2 == 0 { 1.0 } else { -1.0 } / (4.0 * PI).sqrt();
                assert!((gaunt(0, 0, l, m, l, -m) - expected).abs() < 1e-14);
            }
        }
    }
}
