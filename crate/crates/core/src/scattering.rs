//! Multiple scattering between spheres at one imaginary frequency.
//!
//! With Mie blocks `α_a` and outgoing translations `U_ab = U(c_a - c_b)`, the
//! round-trip kernel is `K_ab = α_a U_ab` for `a ≠ b`. The Casimir energy is
//! `(ħc/2π) ∫ dκ ln det(1 - K)` and the force on the target `t` is
//! `(ħc/2π) ∫ dκ z(κ)` with
//!
//! ```text
//! z = Tr[(1 - K)⁻¹ ∂K/∂c_t]
//!   = Σ_loops Tr[α_t ∇U_{t,i1} α_{i1} ⋯ U_{j,t}] + Tr[α_t U_{t,i1} ⋯ α_j ∇U_{j,t}]
//! ```
//!
//! summed over all closed sequences starting and ending at `t`. The closed
//! form solves the block system once; reflection mode truncates the series.
//!
//! Every block is stored after the similarity `K → S⁻¹KS`, `S = diag(e^{κR_a})`,
//! which leaves traces and the target diagonal block unchanged and makes each
//! block carry the factor `exp(-κ(d_ab - R_a - R_b))` explicitly.

use nalgebra::{DMatrix, DMatrixView};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::error::{CasimirError, Result};
use crate::loops::distance;
use crate::mie::{mie_coefficients, Sphere};
use crate::translation::{assemble_translation, translation_gradient, GradientMode, WaveKind};

pub use crate::loops::{enumerate_loops, LoopDescriptor};

type C = Complex64;

/// Validated set of non-overlapping spheres in vacuum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Configuration {
    spheres: Vec<Sphere>,
}

impl Configuration {
    pub fn new(spheres: Vec<Sphere>) -> Result<Self> {
        if spheres.is_empty() {
            return Err(CasimirError::InvalidConfiguration("at least one sphere is required".into()));
        }
        for (i, s) in spheres.iter().enumerate() {
            if !(s.radius > 0.0) || !s.radius.is_finite() {
                return Err(CasimirError::InvalidConfiguration(format!("sphere {i}: radius must be positive")));
            }
            if s.center.iter().any(|c| !c.is_finite()) {
                return Err(CasimirError::InvalidConfiguration(format!("sphere {i}: center must be finite")));
            }
            s.material.validate()?;
        }
        for i in 0..spheres.len() {
            for j in i + 1..spheres.len() {
                if distance(spheres[i].center, spheres[j].center) <= spheres[i].radius + spheres[j].radius {
                    return Err(CasimirError::Overlap(i, j));
                }
            }
        }
        Ok(Self { spheres })
    }

    pub fn spheres(&self) -> &[Sphere] {
        &self.spheres
    }

    pub fn len(&self) -> usize {
        self.spheres.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spheres.is_empty()
    }

    pub fn check_target(&self, target: usize) -> Result<()> {
        if target >= self.len() {
            return Err(CasimirError::TargetOutOfRange { target, count: self.len() });
        }
        Ok(())
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |i| (i + 1..self.len()).map(move |j| (i, j)))
    }

    /// Smallest center-to-center distance, `None` for a single sphere.
    pub fn min_center_distance(&self) -> Option<f64> {
        self.pairs().map(|(i, j)| distance(self.spheres[i].center, self.spheres[j].center)).reduce(f64::min)
    }

    /// Smallest surface-to-surface gap, `None` for a single sphere.
    pub fn min_gap(&self) -> Option<f64> {
        self.pairs()
            .map(|(i, j)| {
                let (a, b) = (&self.spheres[i], &self.spheres[j]);
                distance(a.center, b.center) - a.radius - b.radius
            })
            .reduce(f64::min)
    }

    pub fn max_radius(&self) -> f64 {
        self.spheres.iter().map(|s| s.radius).fold(0.0, f64::max)
    }

    /// Copy with every length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let spheres = self
            .spheres
            .iter()
            .map(|s| Sphere { center: s.center.map(|c| c * factor), radius: s.radius * factor, material: s.material })
            .collect();
        Self::new(spheres)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatteringMode {
    /// Resummed series, `(1 - K)⁻¹`.
    ClosedForm,
    /// Loops with at most `2 · order` hops; order 1 is a single round trip.
    Reflection { order: usize },
}

impl ScatteringMode {
    fn max_hops(self) -> Option<usize> {
        match self {
            ScatteringMode::ClosedForm => None,
            ScatteringMode::Reflection { order } => Some(2 * order),
        }
    }
}

impl std::fmt::Display for ScatteringMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScatteringMode::ClosedForm => write!(f, "closed"),
            ScatteringMode::Reflection { order } => write!(f, "reflection:{order}"),
        }
    }
}

impl std::str::FromStr for ScatteringMode {
    type Err = CasimirError;

    /// Parses `closed` or `reflection:K` with `K >= 1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "closed" {
            return Ok(ScatteringMode::ClosedForm);
        }
        if let Some(order) = s.strip_prefix("reflection:") {
            if let Ok(order) = order.trim().parse::<usize>() {
                if order >= 1 {
                    return Ok(ScatteringMode::Reflection { order });
                }
            }
        }
        Err(CasimirError::Domain(format!("scattering mode must be `closed` or `reflection:K` with K >= 1, got `{s}`")))
    }
}

/// Sum of all round trips from the target back to itself,
/// `[(1 - K)⁻¹ K]_tt` or its truncation.
#[derive(Debug, Clone)]
pub struct RoundTripOperator {
    pub target: usize,
    pub kappa: f64,
    pub basis: BasisSpec,
    pub mode: ScatteringMode,
    pub matrix: DMatrix<C>,
    pub spectral_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZIntegrandValue {
    pub kappa: f64,
    /// `z(κ)`, μm⁻¹; the force is `(ħc/2π) ∫ z dκ`.
    pub value: [f64; 3],
    /// Contributions grouped by hop count `(hops, z)`, reflection mode only.
    pub by_hops: Vec<(usize, [f64; 3])>,
}

impl ZIntegrandValue {
    fn zero(kappa: f64) -> Self {
        Self { kappa, value: [0.0; 3], by_hops: Vec::new() }
    }
}

/// Kernel and target gradients at one κ, in the scaled representation.
pub struct ScatteringSystem {
    target: usize,
    kappa: f64,
    basis: BasisSpec,
    n: usize,
    nb: usize,
    kernel: DMatrix<C>,
    /// `∂K_{t,j}` side by side, `nb × n·nb`.
    grad_row: [DMatrix<C>; 3],
    /// `∂K_{j,t}` stacked, `n·nb × nb`.
    grad_col: [DMatrix<C>; 3],
}

struct PairBlocks {
    a: usize,
    b: usize,
    kernel: DMatrix<C>,
    gradient: Option<[DMatrix<C>; 3]>,
}

impl ScatteringSystem {
    pub fn assemble(
        config: &Configuration,
        target: usize,
        kappa: f64,
        basis: BasisSpec,
        gradient_mode: GradientMode,
    ) -> Result<Self> {
        config.check_target(target)?;
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(CasimirError::Domain(format!("kappa must be positive, got {kappa}")));
        }
        let spheres = config.spheres();
        let n = spheres.len();
        let nb = basis.dimension();
        let mie: Vec<Vec<f64>> = spheres
            .iter()
            .map(|s| mie_coefficients(s, kappa, basis).map(|b| b.scaled_diagonal()))
            .collect::<Result<_>>()?;

        let ordered: Vec<(usize, usize)> =
            (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b))).collect();
        let blocks: Vec<PairBlocks> = ordered
            .par_iter()
            .map(|&(a, b)| pair_blocks(spheres, &mie, a, b, target, kappa, basis, gradient_mode))
            .collect::<Result<_>>()?;

        let mut kernel = DMatrix::zeros(n * nb, n * nb);
        let mut grad_row = [DMatrix::zeros(nb, n * nb), DMatrix::zeros(nb, n * nb), DMatrix::zeros(nb, n * nb)];
        let mut grad_col = [DMatrix::zeros(n * nb, nb), DMatrix::zeros(n * nb, nb), DMatrix::zeros(n * nb, nb)];
        for blk in blocks {
            kernel.view_mut((blk.a * nb, blk.b * nb), (nb, nb)).copy_from(&blk.kernel);
            if let Some(g) = blk.gradient {
                for c in 0..3 {
                    if blk.a == target {
                        grad_row[c].view_mut((0, blk.b * nb), (nb, nb)).copy_from(&g[c]);
                    } else {
                        grad_col[c].view_mut((blk.a * nb, 0), (nb, nb)).copy_from(&g[c]);
                    }
                }
            }
        }
        Ok(Self { target, kappa, basis, n, nb, kernel, grad_row, grad_col })
    }

    fn block(&self, a: usize, b: usize) -> DMatrixView<'_, C> {
        self.kernel.view((a * self.nb, b * self.nb), (self.nb, self.nb))
    }

    fn target_selector(&self) -> DMatrix<C> {
        let mut e = DMatrix::zeros(self.n * self.nb, self.nb);
        e.view_mut((self.target * self.nb, 0), (self.nb, self.nb)).fill_with_identity();
        e
    }

    fn target_rows<'a>(&self, m: &'a DMatrix<C>) -> DMatrixView<'a, C> {
        m.view((self.target * self.nb, 0), (self.nb, self.nb))
    }

    /// Spectral radius of the round-trip kernel by power iteration.
    pub fn spectral_radius(&self) -> f64 {
        let dim = self.kernel.nrows();
        let mut v = nalgebra::DVector::from_fn(dim, |i, _| C::new(1.0 + 0.37 * (i as f64).sin(), 0.21 * (i as f64).cos()));
        v /= C::from(v.norm());
        let mut estimate = 0.0;
        for _ in 0..60 {
            let w1 = &self.kernel * &v;
            let w2 = &self.kernel * &w1;
            let n2 = w2.norm();
            if n2 == 0.0 || !n2.is_finite() {
                return if n2 == 0.0 { 0.0 } else { f64::INFINITY };
            }
            // Two steps at a time so that ± eigenvalue pairs do not oscillate.
            estimate = n2.sqrt();
            v = w2 / C::from(n2);
        }
        estimate
    }

    /// LU solve of `(1 - K) Y = rhs`.
    fn solve(&self, rhs: DMatrix<C>) -> Result<DMatrix<C>> {
        let dim = self.kernel.nrows();
        let system = DMatrix::<C>::identity(dim, dim) - &self.kernel;
        system.lu().solve(&rhs).ok_or(CasimirError::SingularSystem)
    }

    pub fn round_trip(&self, mode: ScatteringMode) -> Result<RoundTripOperator> {
        let rho = self.spectral_radius();
        let nb = self.nb;
        let matrix = match mode.max_hops() {
            None => {
                if rho >= 1.0 {
                    return Err(CasimirError::NonConvergentRoundTrip(rho));
                }
                let g = self.solve(self.target_selector())?;
                self.target_rows(&g).into_owned() - DMatrix::<C>::identity(nb, nb)
            }
            Some(hops) => {
                let mut w = self.target_selector();
                let mut acc = DMatrix::zeros(nb, nb);
                for _ in 1..=hops {
                    w = &self.kernel * w;
                    acc += self.target_rows(&w);
                }
                acc
            }
        };
        Ok(RoundTripOperator { target: self.target, kappa: self.kappa, basis: self.basis, mode, matrix, spectral_radius: rho })
    }

    pub fn z_integrand(&self, mode: ScatteringMode) -> Result<ZIntegrandValue> {
        match mode.max_hops() {
            None => {
                let rho = self.spectral_radius();
                if rho >= 1.0 {
                    return Err(CasimirError::NonConvergentRoundTrip(rho));
                }
                let nb = self.nb;
                let mut rhs = DMatrix::zeros(self.n * nb, 4 * nb);
                rhs.columns_mut(0, nb).copy_from(&self.target_selector());
                for c in 0..3 {
                    rhs.columns_mut((c + 1) * nb, nb).copy_from(&self.grad_col[c]);
                }
                let y = self.solve(rhs)?;
                let g_col = y.columns(0, nb);
                let mut value = [0.0; 3];
                for c in 0..3 {
                    let first = trace_product(&self.grad_row[c].as_view(), &g_col);
                    let yc = y.view((self.target * nb, (c + 1) * nb), (nb, nb));
                    value[c] = (first + yc.trace()).re;
                }
                Ok(ZIntegrandValue { kappa: self.kappa, value, by_hops: Vec::new() })
            }
            Some(hops) => {
                let mut w = self.target_selector();
                let mut y = self.grad_col.clone();
                let mut value = [0.0; 3];
                let mut by_hops = Vec::new();
                for m in 1..=hops {
                    if m >= 2 {
                        let mut z = [0.0; 3];
                        for c in 0..3 {
                            let first = trace_product(&self.grad_row[c].as_view(), &w.as_view());
                            z[c] = (first + self.target_rows(&y[c]).trace()).re;
                            value[c] += z[c];
                        }
                        by_hops.push((m, z));
                    }
                    if m < hops {
                        w = &self.kernel * w;
                        for yc in y.iter_mut() {
                            *yc = &self.kernel * &*yc;
                        }
                    }
                }
                Ok(ZIntegrandValue { kappa: self.kappa, value, by_hops })
            }
        }
    }

    /// Contribution of every loop with at most `max_hops` hops. Their sum
    /// equals the reflection-mode value with the same hop cap.
    pub fn loop_contributions(&self, config: &Configuration, max_hops: usize) -> Vec<(LoopDescriptor, [f64; 3])> {
        let nb = self.nb;
        let t = self.target;
        let mut out = Vec::new();
        for j in (0..self.n).filter(|&j| j != t) {
            let p = self.block(t, j).into_owned();
            let q: [DMatrix<C>; 3] = std::array::from_fn(|c| self.grad_row[c].view((0, j * nb), (nb, nb)).into_owned());
            let mut seq = vec![t, j];
            self.walk(config, max_hops, &mut seq, &p, &q, &mut out);
        }
        out.sort_by(|a, b| a.0.hop_count.cmp(&b.0.hop_count).then_with(|| a.0.sequence.cmp(&b.0.sequence)));
        out
    }

    fn walk(
        &self,
        config: &Configuration,
        max_hops: usize,
        seq: &mut Vec<usize>,
        prefix: &DMatrix<C>,
        prefix_grad: &[DMatrix<C>; 3],
        out: &mut Vec<(LoopDescriptor, [f64; 3])>,
    ) {
        let nb = self.nb;
        let t = self.target;
        let last = *seq.last().expect("nonempty");
        let hops_so_far = seq.len() - 1;
        // Close the loop with the hop last -> t.
        let closing = self.block(last, t);
        let mut z = [0.0; 3];
        for c in 0..3 {
            let first = trace_product(&prefix_grad[c].as_view(), &closing);
            let last_grad = self.grad_col[c].view((last * nb, 0), (nb, nb));
            z[c] = (first + trace_product(&prefix.as_view(), &last_grad)).re;
        }
        let mut closed = seq.clone();
        closed.push(t);
        out.push((LoopDescriptor::from_sequence(config, closed), z));

        if hops_so_far + 1 >= max_hops {
            return;
        }
        for next in (0..self.n).filter(|&k| k != last) {
            let step = self.block(last, next);
            let p = prefix * step;
            let q: [DMatrix<C>; 3] = std::array::from_fn(|c| &prefix_grad[c] * step);
            seq.push(next);
            if next == t {
                // Passing through the target: continue to a partner.
                for after in (0..self.n).filter(|&k| k != t) {
                    let step2 = self.block(t, after);
                    let p2 = &p * step2;
                    let q2: [DMatrix<C>; 3] = std::array::from_fn(|c| &q[c] * step2);
                    if seq.len() < max_hops {
                        seq.push(after);
                        self.walk(config, max_hops, seq, &p2, &q2, out);
                        seq.pop();
                    }
                }
            } else {
                self.walk(config, max_hops, seq, &p, &q, out);
            }
            seq.pop();
        }
    }
}

/// `Tr[A B]` without forming the product.
fn trace_product(a: &DMatrixView<'_, C>, b: &DMatrixView<'_, C>) -> C {
    let mut acc = C::default();
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

#[allow(clippy::too_many_arguments)]
fn pair_blocks(
    spheres: &[Sphere],
    mie: &[Vec<f64>],
    a: usize,
    b: usize,
    target: usize,
    kappa: f64,
    basis: BasisSpec,
    gradient_mode: GradientMode,
) -> Result<PairBlocks> {
    let (sa, sb) = (&spheres[a], &spheres[b]);
    let d = [sa.center[0] - sb.center[0], sa.center[1] - sb.center[1], sa.center[2] - sb.center[2]];
    let op = assemble_translation(basis, d, kappa, WaveKind::Outgoing)?;
    let factor = (kappa * (sa.radius + sb.radius) + op.scale_exponent).exp();
    let alpha = &mie[a];
    let scale_rows = |m: &DMatrix<C>, f: f64| {
        let mut out = m.clone();
        for (r, mut row) in out.row_iter_mut().enumerate() {
            row *= C::from(alpha[r] * f);
        }
        out
    };
    let kernel = scale_rows(&op.matrix, factor);
    let gradient = if a == target || b == target {
        let g = translation_gradient(basis, d, kappa, WaveKind::Outgoing, gradient_mode)?;
        let gf = (kappa * (sa.radius + sb.radius) + g.scale_exponent).exp();
        // d = c_a - c_b, so moving c_b reverses the sign.
        let sign = if a == target { 1.0 } else { -1.0 };
        Some(std::array::from_fn(|c| scale_rows(&g.components[c], sign * gf)))
    } else {
        None
    };
    Ok(PairBlocks { a, b, kernel, gradient })
}

/// Round-trip operator for `target` at `kappa`.
pub fn round_trip(
    config: &Configuration,
    target: usize,
    kappa: f64,
    basis: BasisSpec,
    mode: ScatteringMode,
) -> Result<RoundTripOperator> {
    config.check_target(target)?;
    if config.len() == 1 {
        return Ok(RoundTripOperator {
            target,
            kappa,
            basis,
            mode,
            matrix: DMatrix::zeros(basis.dimension(), basis.dimension()),
            spectral_radius: 0.0,
        });
    }
    ScatteringSystem::assemble(config, target, kappa, basis, GradientMode::Analytic)?.round_trip(mode)
}

/// Force integrand `z(κ)` on `target`.
pub fn z_integrand(
    config: &Configuration,
    target: usize,
    kappa: f64,
    basis: BasisSpec,
    mode: ScatteringMode,
) -> Result<ZIntegrandValue> {
    z_integrand_with(config, target, kappa, basis, mode, GradientMode::Analytic)
}

pub fn z_integrand_with(
    config: &Configuration,
    target: usize,
    kappa: f64,
    basis: BasisSpec,
    mode: ScatteringMode,
    gradient_mode: GradientMode,
) -> Result<ZIntegrandValue> {
    config.check_target(target)?;
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(CasimirError::Domain(format!("kappa must be positive, got {kappa}")));
    }
    if config.len() == 1 {
        return Ok(ZIntegrandValue::zero(kappa));
    }
    ScatteringSystem::assemble(config, target, kappa, basis, gradient_mode)?.z_integrand(mode)
}
