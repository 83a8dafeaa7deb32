//! Closed scattering loops through a target sphere.
//!
//! A loop is a sequence of sphere indices that starts and ends at the target
//! with consecutive entries distinct. Its total length is the sum of the
//! center-to-center distances along the sequence; at imaginary wavenumber κ
//! its contribution is damped roughly like `exp(-κ L)`.

use serde::Serialize;

use crate::scattering::Configuration;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopDescriptor {
    pub sequence: Vec<usize>,
    pub hop_count: usize,
    /// μm.
    pub total_length: f64,
    /// Number of returns to the target.
    pub winding: usize,
}

impl LoopDescriptor {
    pub fn from_sequence(config: &Configuration, sequence: Vec<usize>) -> Self {
        let spheres = config.spheres();
        let total_length = sequence
            .windows(2)
            .map(|w| distance(spheres[w[0]].center, spheres[w[1]].center))
            .sum();
        let target = sequence[0];
        let winding = sequence[1..].iter().filter(|&&s| s == target).count();
        Self { hop_count: sequence.len() - 1, sequence, total_length, winding }
    }
}

pub(crate) fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Caps applied when enumerating candidate loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopLimits {
    pub max_hops: usize,
    /// Loops with `κ · total_length` above this are dropped.
    pub max_kappa_length: f64,
}

impl Default for LoopLimits {
    fn default() -> Self {
        Self { max_hops: 4, max_kappa_length: 40.0 }
    }
}

/// All loops through `target` with at most `max_hops` hops, ordered by hop
/// count and then lexicographically.
pub fn enumerate_loops(config: &Configuration, target: usize, max_hops: usize) -> Vec<LoopDescriptor> {
    let n = config.len();
    let mut out = Vec::new();
    if n < 2 || target >= n {
        return out;
    }
    let mut seq = vec![target];
    for hops in 2..=max_hops {
        extend(config, target, hops, &mut seq, &mut out);
    }
    out
}

fn extend(config: &Configuration, target: usize, hops: usize, seq: &mut Vec<usize>, out: &mut Vec<LoopDescriptor>) {
    let last = *seq.last().expect("nonempty");
    if seq.len() == hops {
        if last != target {
            seq.push(target);
            out.push(LoopDescriptor::from_sequence(config, seq.clone()));
            seq.pop();
        }
        return;
    }
    for next in 0..config.len() {
        if next != last {
            seq.push(next);
            extend(config, target, hops, seq, out);
            seq.pop();
        }
    }
}

/// `ln` of [`loop_weight`], usable where the weight itself underflows.
pub fn loop_log_weight(lp: &LoopDescriptor, kappa: f64) -> f64 {
    let x = kappa * lp.total_length;
    -x - x.ln_1p()
}

/// Damping estimate `exp(-κL) / (1 + κL)`.
///
/// A heuristic normalised so an empty path weighs 1. The algebraic factor
/// depends on the length only, so the ranking by weight is the ranking by
/// length at every κ.
pub fn loop_weight(lp: &LoopDescriptor, kappa: f64) -> f64 {
    loop_log_weight(lp, kappa).exp()
}

/// The `top_k` heaviest loops at `kappa`. Weights equal to relative 1e-12 are
/// ordered by their sequences.
pub fn dominant_loops(
    config: &Configuration,
    target: usize,
    kappa: f64,
    top_k: usize,
    limits: LoopLimits,
) -> Vec<(LoopDescriptor, f64)> {
    let mut scored: Vec<(LoopDescriptor, f64)> = enumerate_loops(config, target, limits.max_hops)
        .into_iter()
        .filter(|lp| kappa * lp.total_length <= limits.max_kappa_length)
        .map(|lp| {
            let w = loop_log_weight(&lp, kappa);
            (lp, w)
        })
        .collect();
    scored.sort_by(|a, b| {
        let scale = a.1.abs().max(b.1.abs()).max(1.0);
        if (a.1 - b.1).abs() <= 1e-12 * scale {
            a.0.sequence.cmp(&b.0.sequence)
        } else {
            b.1.total_cmp(&a.1)
        }
    });
    scored.truncate(top_k);
    scored.into_iter().map(|(lp, lw)| (lp, lw.exp())).collect()
}
