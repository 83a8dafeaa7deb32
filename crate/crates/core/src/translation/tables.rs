//! Geometry-independent coupling tables for the scalar addition theorem.
//!
//! For a source wave `(l', m')` and a target regular wave `(l, m)` the scalar
//! coefficient is `β = Σ_L c_L Ψ_{L, m'-m}(u)` where `Ψ` is the radial function
//! times `Y_{LM}(û)` at the reduced displacement `u = κd`, and
//! `c_L = 4π ∫ Y_{l'm'} Y*_{lm} Y*_{LM} dΩ`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use parking_lot::Mutex;

use crate::specfun::{lm_index, wigner3j_family};

#[derive(Debug)]
pub struct TranslationTables {
    pub lmax: usize,
    /// Scalar target orders run over `0..=lmax+1`.
    pub scalar_lmax: usize,
    /// Highest `L` appearing in the sums.
    pub psi_lmax: usize,
    /// `offsets[t * n_src + s]..offsets[t * n_src + s + 1]` indexes `terms`.
    offsets: Vec<usize>,
    terms: Vec<(u32, f64)>,
}

impl TranslationTables {
    pub fn n_scalar(&self) -> usize {
        (self.scalar_lmax + 1) * (self.scalar_lmax + 1)
    }

    /// Source modes `(l', m')` with `l' ≥ 1`, ordered like one polarization block.
    pub fn n_source(&self) -> usize {
        self.lmax * (self.lmax + 2)
    }

    pub fn terms(&self, target: usize, source: usize) -> &[(u32, f64)] {
        let k = target * self.n_source() + source;
        &self.terms[self.offsets[k]..self.offsets[k + 1]]
    }

    fn build(lmax: usize) -> Self {
        let scalar_lmax = lmax + 1;
        let psi_lmax = scalar_lmax + lmax;
        let n_src = lmax * (lmax + 2);
        let n_scalar = (scalar_lmax + 1) * (scalar_lmax + 1);
        let mut offsets = Vec::with_capacity(n_scalar * n_src + 1);
        let mut terms = Vec::new();
        let four_pi = 4.0 * std::f64::consts::PI;
        offsets.push(0);
        for l in 0..=scalar_lmax as i64 {
            for m in -l..=l {
                for lp in 1..=lmax as i64 {
                    let parity = wigner3j_family(lp, l, 0, 0);
                    for mp in -lp..=lp {
                        let big_m = mp - m;
                        let fam = wigner3j_family(lp, l, mp, -m);
                        for big_l in (lp - l).abs()..=lp + l {
                            if (lp + l + big_l) % 2 != 0 || big_m.abs() > big_l {
                                continue;
                            }
                            let w = parity.get(big_l) * fam.get(big_l);
                            if w == 0.0 {
                                continue;
                            }
                            let pre = (((2 * lp + 1) * (2 * l + 1) * (2 * big_l + 1)) as f64
                                / (4.0 * std::f64::consts::PI))
                                .sqrt();
                            let phase = if (m + big_m).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                            let coef = four_pi * phase * pre * w;
                            terms.push((lm_index(big_l as usize, big_m) as u32, coef));
                        }
                        offsets.push(terms.len());
                    }
                }
            }
        }
        Self { lmax, scalar_lmax, psi_lmax, offsets, terms }
    }
}

/// Shared tables for a truncation order, built once per process.
pub fn tables_for(lmax: usize) -> Arc<TranslationTables> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<TranslationTables>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().get(&lmax) {
        return Arc::clone(t);
    }
    let built = Arc::new(TranslationTables::build(lmax));
    cache.lock().entry(lmax).or_insert(built).clone()
}
