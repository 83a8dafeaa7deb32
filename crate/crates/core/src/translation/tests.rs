use super::*;
use crate::specfun::{modified_sph_bessel_i, modified_sph_bessel_k};
use rand::{rngs::StdRng, Rng, SeedableRng};

type C = Complex64;

fn radial(kind: WaveKind, l: usize, x: f64) -> f64 {
    match kind {
        WaveKind::Regular => modified_sph_bessel_i(l, x).unwrap().reconstruct(),
        WaveKind::Outgoing => OUTGOING_NORM * modified_sph_bessel_k(l, x).unwrap().reconstruct(),
    }
}

fn ylm(l: usize, m: i64, x: [f64; 3]) -> C {
    if m.unsigned_abs() as usize > l {
        return C::default();
    }
    spherical_harmonics(l, x)[lm_index(l, m)]
}

/// `M_lm(x)` with κ = 1, built directly from `L Y_lm`.
fn m_wave(kind: WaveKind, l: usize, m: i64, x: [f64; 3]) -> [C; 3] {
    let lf = l as f64;
    let mf = m as f64;
    let lz = ylm(l, m, x) * mf;
    let lp = ylm(l, m + 1, x) * (lf * (lf + 1.0) - mf * (mf + 1.0)).max(0.0).sqrt();
    let lm = ylm(l, m - 1, x) * (lf * (lf + 1.0) - mf * (mf - 1.0)).max(0.0).sqrt();
    let f = radial(kind, l, norm2(x)) / (lf * (lf + 1.0)).sqrt();
    [(lp + lm) * 0.5 * f, (lp - lm) * C::new(0.0, -0.5) * f, lz * f]
}

/// `N_lm = ∇×M_lm` by central differences.
fn n_wave(kind: WaveKind, l: usize, m: i64, x: [f64; 3]) -> [C; 3] {
    let h = 1e-4;
    let mut jac = [[C::default(); 3]; 3];
    for k in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[k] += h;
        xm[k] -= h;
        let (fp, fm) = (m_wave(kind, l, m, xp), m_wave(kind, l, m, xm));
        for i in 0..3 {
            jac[i][k] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    [jac[2][1] - jac[1][2], jac[0][2] - jac[2][0], jac[1][0] - jac[0][1]]
}

fn wave(kind: WaveKind, idx: MultipoleIndex, x: [f64; 3]) -> [C; 3] {
    match idx.polarization {
        Polarization::TE => m_wave(kind, idx.l, idx.m, x),
        Polarization::TM => n_wave(kind, idx.l, idx.m, x),
    }
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn re_expansion_residual(kind: WaveKind) -> f64 {
    let basis = BasisSpec::new(14).unwrap();
    let d = [0.3, -0.5, 1.4];
    let op = assemble_translation(basis, d, 1.0, kind).unwrap();
    let mat = op.reconstructed();
    let mut worst: f64 = 0.0;
    for r in [[0.1, 0.2, -0.15], [-0.2, 0.05, 0.1]] {
        for src in [(Polarization::TE, 1, 0), (Polarization::TM, 1, 1), (Polarization::TE, 2, -1), (Polarization::TM, 3, 2)] {
            let src = MultipoleIndex { polarization: src.0, l: src.1, m: src.2 };
            let col = basis.index_of(src);
            let lhs = wave(kind, src, add(r, d));
            let mut rhs = [C::default(); 3];
            for (row, tgt) in basis.iter().enumerate() {
                let w = wave(WaveKind::Regular, tgt, r);
                for i in 0..3 {
                    rhs[i] += mat[(row, col)] * w[i];
                }
            }
            let scale = lhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for i in 0..3 {
                worst = worst.max((lhs[i] - rhs[i]).norm() / scale);
            }
        }
    }
    worst
}

#[test]
fn outgoing_waves_re_expand_pointwise() {
    let res = re_expansion_residual(WaveKind::Outgoing);
    assert!(res < 1e-6, "residual {res}");
}

#[test]
fn regular_waves_re_expand_pointwise() {
    let res = re_expansion_residual(WaveKind::Regular);
    assert!(res < 1e-6, "residual {res}");
}

#[test]
fn zero_displacement_is_identity() {
    let basis = BasisSpec::new(5).unwrap();
    for kind in [WaveKind::Outgoing, WaveKind::Regular] {
        let op = assemble_translation(basis, [0.0; 3], 2.0, kind).unwrap();
        let id = DMatrix::<C>::identity(basis.dimension(), basis.dimension());
        assert!((op.reconstructed() - id).norm() < 1e-12);
    }
    assert!(matches!(
        translation_gradient(basis, [0.0; 3], 1.0, WaveKind::Outgoing, GradientMode::Analytic),
        Err(CasimirError::SingularDisplacement)
    ));
}

#[test]
fn small_regular_translation_is_near_identity() {
    let basis = BasisSpec::new(4).unwrap();
    let op = assemble_translation(basis, [1e-9, 2e-9, -1e-9], 1.0, WaveKind::Regular).unwrap();
    let id = DMatrix::<C>::identity(basis.dimension(), basis.dimension());
    assert!((op.reconstructed() - id).norm() < 1e-8);
}

#[test]
fn axial_translation_conserves_m() {
    let basis = BasisSpec::new(6).unwrap();
    let op = assemble_translation(basis, [0.0, 0.0, 1.7], 1.3, WaveKind::Outgoing).unwrap();
    let big = op.matrix.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for (r, ti) in basis.iter().enumerate() {
        for (c, si) in basis.iter().enumerate() {
            if ti.m != si.m {
                assert!(op.matrix[(r, c)].norm() <= 1e-14 * big, "({r},{c})");
            }
        }
    }
    let grad = translation_gradient(basis, [0.0, 0.0, 1.7], 1.3, WaveKind::Outgoing, GradientMode::Analytic).unwrap();
    let gx = &grad.components[0];
    let gbig = gx.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut coupled = 0.0_f64;
    for (r, ti) in basis.iter().enumerate() {
        for (c, si) in basis.iter().enumerate() {
            if (ti.m - si.m).abs() != 1 {
                assert!(gx[(r, c)].norm() <= 1e-12 * gbig);
            } else {
                coupled = coupled.max(gx[(r, c)].norm());
            }
        }
    }
    assert!(coupled > 0.0);
}

fn low_block_defect(lmax: usize) -> f64 {
    let basis = BasisSpec::new(lmax).unwrap();
    let (d1, d2) = ([0.2, 0.1, 0.3], [0.4, -0.3, 1.6]);
    let kappa = 1.2;
    let direct = assemble_translation(basis, add(d1, d2), kappa, WaveKind::Outgoing).unwrap().reconstructed();
    let reg = assemble_translation(basis, d1, kappa, WaveKind::Regular).unwrap().reconstructed();
    let out = assemble_translation(basis, d2, kappa, WaveKind::Outgoing).unwrap().reconstructed();
    let prod = reg * out;
    let mut num = 0.0_f64;
    let mut den = 0.0_f64;
    for (r, ti) in basis.iter().enumerate() {
        for (c, si) in basis.iter().enumerate() {
            if ti.l <= 2 && si.l <= 2 {
                num = num.max((prod[(r, c)] - direct[(r, c)]).norm());
                den = den.max(direct[(r, c)].norm());
            }
        }
    }
    num / den
}

#[test]
fn composition_defect_shrinks_with_order() {
    let defects: Vec<f64> = [4, 8, 12].into_iter().map(low_block_defect).collect();
    assert!(defects[1] < defects[0] && defects[2] < defects[1], "{defects:?}");
    assert!(defects[2] < 1e-3, "{defects:?}");
}

fn rotate(alpha: f64, beta: f64, gamma: f64, v: [f64; 3]) -> [f64; 3] {
    let rz = |t: f64, v: [f64; 3]| [t.cos() * v[0] - t.sin() * v[1], t.sin() * v[0] + t.cos() * v[1], v[2]];
    let ry = |t: f64, v: [f64; 3]| [t.cos() * v[0] + t.sin() * v[2], v[1], -t.sin() * v[0] + t.cos() * v[2]];
    rz(alpha, ry(beta, rz(gamma, v)))
}

#[test]
fn translation_is_rotation_covariant() {
    let basis = BasisSpec::new(6).unwrap();
    let d = [0.3, -0.8, 1.1];
    let (a, b, g) = (0.4, 1.2, -0.7);
    let rot = basis_rotation(basis, a, b, g);
    for kind in [WaveKind::Outgoing, WaveKind::Regular] {
        let base = assemble_translation(basis, d, 0.9, kind).unwrap();
        let turned = assemble_translation(basis, rotate(a, b, g, d), 0.9, kind).unwrap();
        let expected = &rot * base.matrix * rot.adjoint();
        let err = (turned.matrix - &expected).norm() / expected.norm();
        assert!(err < 1e-8, "{kind:?}: {err}");
    }
}

#[test]
fn z_axis_maps_to_x_axis_under_quarter_turn() {
    let basis = BasisSpec::new(4).unwrap();
    let rot = basis_rotation(basis, 0.0, std::f64::consts::FRAC_PI_2, 0.0);
    let along_z = assemble_translation(basis, [0.0, 0.0, 1.5], 1.0, WaveKind::Outgoing).unwrap();
    let along_x = assemble_translation(basis, [1.5, 0.0, 0.0], 1.0, WaveKind::Outgoing).unwrap();
    let expected = &rot * along_z.matrix * rot.adjoint();
    assert!((along_x.matrix - &expected).norm() / expected.norm() < 1e-10);
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    let basis = BasisSpec::new(5).unwrap();
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..20 {
        let dist = rng.random_range(0.5..4.0);
        let dir: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let n = norm2(dir);
        let d = [dist * dir[0] / n, dist * dir[1] / n, dist * dir[2] / n];
        let kappa = rng.random_range(0.2..3.0);
        for kind in [WaveKind::Outgoing, WaveKind::Regular] {
            let an = translation_gradient(basis, d, kappa, kind, GradientMode::Analytic).unwrap();
            let fd = translation_gradient(basis, d, kappa, kind, GradientMode::FiniteDifference).unwrap();
            assert!((an.scale_exponent - fd.scale_exponent).abs() < 1e-14);
            for k in 0..3 {
                let scale = an.components[k].norm().max(1e-300);
                let err = (&an.components[k] - &fd.components[k]).norm() / scale;
                assert!(err < 1e-6, "{kind:?} d={d:?} kappa={kappa} k={k}: {err}");
            }
        }
    }
}

#[test]
fn outgoing_entries_decay_with_unit_slope() {
    let basis = BasisSpec::new(3).unwrap();
    let ln_entry = |x: f64| {
        let op = assemble_translation(basis, [0.0, 0.0, x], 1.0, WaveKind::Outgoing).unwrap();
        let i = basis.index_of(MultipoleIndex { polarization: Polarization::TM, l: 1, m: 0 });
        op.matrix[(i, i)].norm().ln() + op.scale_exponent
    };
    let slope = (ln_entry(400.0) - ln_entry(200.0)) / 200.0;
    assert!((slope + 1.0).abs() < 0.02, "slope {slope}");
}

#[test]
fn rejects_bad_kappa() {
    let basis = BasisSpec::new(2).unwrap();
    assert!(assemble_translation(basis, [0.0, 0.0, 1.0], 0.0, WaveKind::Outgoing).is_err());
    assert!(assemble_translation(basis, [0.0, 0.0, 1.0], f64::NAN, WaveKind::Outgoing).is_err());
}
