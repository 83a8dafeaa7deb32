//! Adaptive Gauss–Kronrod quadrature for vector-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{CasimirError, Result};

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes, the last one at the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: [f64; 3],
    pub error: f64,
    pub evals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: [f64; 3],
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn gk15<F>(f: &F, a: f64, b: f64) -> Result<Segment>
where
    F: Fn(f64) -> Result<[f64; 3]> + Sync,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let nodes: Vec<f64> = (0..15)
        .map(|i| match i.cmp(&7) {
            Ordering::Less => c - h * XGK[i],
            Ordering::Equal => c,
            Ordering::Greater => c + h * XGK[14 - i],
        })
        .collect();
    let values: Vec<[f64; 3]> = nodes.par_iter().map(|&x| f(x)).collect::<Result<_>>()?;
    let mut kron = [0.0; 3];
    let mut gauss = [0.0; 3];
    for (i, v) in values.iter().enumerate() {
        let j = if i <= 7 { i } else { 14 - i };
        for k in 0..3 {
            kron[k] += WGK[j] * v[k];
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * v[k];
            }
        }
    }
    let value = kron.map(|v| v * h);
    let diff = [0, 1, 2].map(|k| (kron[k] - gauss[k]) * h);
    Ok(Segment { a, b, value, error: norm(diff) })
}

/// Integrates `f` over `[a, b]` until the estimated error is below
/// `rel_tol · |I|` (Euclidean norm over components) or `abs_tol`.
pub fn integrate<F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64, max_evals: usize) -> Result<Integral>
where
    F: Fn(f64) -> Result<[f64; 3]> + Sync,
{
    let mut heap = BinaryHeap::new();
    let first = gk15(&f, a, b)?;
    let mut evals = 15;
    let mut total = first.value;
    let mut error = first.error;
    heap.push(first);
    loop {
        if !error.is_finite() || total.iter().any(|v| !v.is_finite()) {
            return Err(CasimirError::QuadratureNonConvergence { error, evals });
        }
        if error <= (rel_tol * norm(total)).max(abs_tol) {
            break;
        }
        if evals + 30 > max_evals {
            return Err(CasimirError::QuadratureNonConvergence { error, evals });
        }
        let worst = heap.pop().expect("nonempty heap");
        let mid = 0.5 * (worst.a + worst.b);
        let (left, right) = rayon::join(|| gk15(&f, worst.a, mid), || gk15(&f, mid, worst.b));
        let (left, right) = (left?, right?);
        evals += 30;
        heap.push(left);
        heap.push(right);
        // Re-sum in a fixed order so the result does not depend on history.
        let mut segs: Vec<&Segment> = heap.iter().collect();
        segs.sort_by(|x, y| x.a.total_cmp(&y.a));
        total = [0.0; 3];
        error = 0.0;
        for s in segs {
            for k in 0..3 {
                total[k] += s.value[k];
            }
            error += s.error;
        }
    }
    Ok(Integral { value: total, error, evals })
}
