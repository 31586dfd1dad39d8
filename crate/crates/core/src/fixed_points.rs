//! Fixed points on the closed ball obtained from eigenvectors of `T`.
//!
//! A non-unitary normal isometry with `k = dim ran C` has exactly `2^k`
//! generic fixed points `F_θ`, one per sign pattern `θ ∈ {±1}^k`, all of norm
//! one. [`enumerate_generic`] builds them from the block structure;
//! [`detect_generic`] counts them from the raw eigendecomposition of `T`
//! without assuming normality.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::classify::{block_decompose, BlockView};
use crate::error::{Error, Result};
use crate::linalg::{
    cluster_complex, min_singular_value, normal_eig, null_space, orthonormal_basis, schur, vec_norm, ComplexMatrix,
    ToleranceConfig,
};
use crate::pseudo_unitary::{act_matrix, factorize, GIsometry};
use crate::spectral::rank_of_c;

/// `‖act(T, F) − F‖`.
pub fn verify_fixed(t: &GIsometry, f: &ComplexMatrix, tol: &ToleranceConfig) -> Result<f64> {
    if f.rows() != t.m() || f.cols() != t.n() {
        return Err(Error::DimensionMismatch(format!(
            "F is {}x{}, isometry acts on {}x{}",
            f.rows(),
            f.cols(),
            t.m(),
            t.n()
        )));
    }
    let norm = f.operator_norm();
    if norm > 1.0 + tol.eq_tol {
        return Err(Error::NotContraction { norm });
    }
    Ok(act_matrix(t, f)?.distance(f))
}

fn fixed_limit(t: &GIsometry, tol: &ToleranceConfig) -> f64 {
    10.0 * tol.eq_tol * t.matrix().operator_norm().max(1.0)
}

/// Checks that every `(F z, z)` is an eigenvector of `T`; when they all are,
/// `F` must be fixed.
pub fn fixed_from_eigenvectors(
    t: &GIsometry,
    z_basis: &ComplexMatrix,
    f: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Result<bool> {
    let n = t.n();
    if z_basis.rows() != n || z_basis.cols() != n || min_singular_value(z_basis) <= tol.eq_tol {
        return Err(Error::NotABasis);
    }
    let limit = fixed_limit(t, tol);
    let fz = f * z_basis;
    let stacked = ComplexMatrix::vstack(n, &[&fz, z_basis]);
    let image = t.matrix() * &stacked;
    let all = (0..n).all(|j| {
        let v = stacked.column(j);
        let w = image.column(j);
        let vv = vec_norm(&v);
        let rho = crate::linalg::inner(&w, &v) / (vv * vv);
        let res: Vec<Complex64> = w.iter().zip(&v).map(|(a, b)| a - rho * b).collect();
        vec_norm(&res) / vv <= limit
    });
    if all {
        let residual = verify_fixed(t, f, tol)?;
        if residual > limit {
            return Err(Error::InternalInconsistency(format!(
                "eigenvector graph is not fixed (residual {residual:.3e})"
            )));
        }
    }
    Ok(all)
}

#[derive(Debug, Clone)]
pub struct GenericFixedPoint {
    pub f: ComplexMatrix,
    /// `ε_{ij}` in block-then-index order.
    pub theta: Vec<i8>,
    /// Paired directions `z_{ij}` followed by the complement columns.
    pub z_basis: ComplexMatrix,
    /// `λ_{ij}(a_i + ε_{ij} δ_i)`.
    pub eigenvalues: Vec<Complex64>,
    pub norm: f64,
    pub residual: f64,
}

impl Serialize for GenericFixedPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("GenericFixedPoint", 5)?;
        st.serialize_field("theta", &self.theta)?;
        st.serialize_field("F", &self.f)?;
        st.serialize_field("norm", &self.norm)?;
        st.serialize_field("residual", &self.residual)?;
        let eig: Vec<[f64; 2]> = self.eigenvalues.iter().map(|z| [z.re, z.im]).collect();
        st.serialize_field("eigenvalues", &eig)?;
        st.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointReport {
    pub k: usize,
    pub count: usize,
    pub points: Vec<GenericFixedPoint>,
}

/// Paired directions of a non-unitary normal isometry.
struct GenericFrame {
    /// `n × k`, orthonormal.
    z: ComplexMatrix,
    /// `m × k`, columns `C z_{ij} / δ_i`.
    y: ComplexMatrix,
    /// `(λ_{ij}, a_i, δ_i)`.
    tags: Vec<(Complex64, f64, f64)>,
    /// `n × (n − k)`, eigenbasis of `V` on `K′⊥`.
    complement: ComplexMatrix,
}

fn generic_frame(view: &BlockView, tol: &ToleranceConfig) -> Result<GenericFrame> {
    let (m, n) = (view.m, view.n);
    let mut zs = Vec::new();
    let mut ys = Vec::new();
    let mut tags = Vec::new();
    for blk in &view.blocks {
        let (lams, w) = normal_eig(&blk.r, tol)?;
        let gauge = w.unitarity_residual();
        if gauge > 100.0 * tol.eq_tol {
            return Err(Error::DegenerateBlockGauge { residual: gauge });
        }
        zs.push(&blk.basis_k * &w);
        ys.push((&blk.basis_m * &w).scale_real(1.0 / blk.delta));
        tags.extend(lams.iter().map(|l| (*l, blk.a, blk.delta)));
    }
    let (_, q) = normal_eig(&view.t_double_prime, tol)?;
    Ok(GenericFrame {
        z: ComplexMatrix::hstack(n, &zs.iter().collect::<Vec<_>>()),
        y: ComplexMatrix::hstack(m, &ys.iter().collect::<Vec<_>>()),
        tags,
        complement: &view.basis_kperp * &q,
    })
}

/// Sign pattern number `index` out of `2^k`: the first entry is the most
/// significant bit and a clear bit means `+1`.
pub fn sign_pattern(index: usize, k: usize) -> Vec<i8> {
    (0..k)
        .map(|j| if (index >> (k - 1 - j)) & 1 == 0 { 1 } else { -1 })
        .collect()
}

fn f_theta(frame: &GenericFrame, theta: &[i8]) -> ComplexMatrix {
    let signs: Vec<f64> = theta.iter().map(|&e| e as f64).collect();
    let ys = frame.y.as_inner().clone()
        * nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            signs.len(),
            signs.iter().map(|&s| Complex64::new(s, 0.0)),
        ));
    &ComplexMatrix::from_inner(ys).expect("finite") * &frame.z.adjoint()
}

/// All `2^k` generic fixed points, in sign-pattern order.
pub fn enumerate_generic(t: &GIsometry, tol: &ToleranceConfig) -> Result<Vec<GenericFixedPoint>> {
    let view = block_decompose(t, tol)?;
    let frame = generic_frame(&view, tol)?;
    let k = frame.tags.len();
    let z_basis = ComplexMatrix::hstack(t.n(), &[&frame.z, &frame.complement]);
    (0..1usize << k)
        .into_par_iter()
        .map(|index| {
            let theta = sign_pattern(index, k);
            let f = f_theta(&frame, &theta);
            let eigenvalues = theta
                .iter()
                .zip(&frame.tags)
                .map(|(&e, &(lam, a, delta))| lam * (a + e as f64 * delta))
                .collect();
            let residual = verify_fixed(t, &f, tol)?;
            Ok(GenericFixedPoint {
                norm: f.operator_norm(),
                f,
                theta,
                z_basis: z_basis.clone(),
                eigenvalues,
                residual,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct CommonEigenFixedPoint {
    pub mu: Complex64,
    pub f: ComplexMatrix,
    pub residual: f64,
}

/// Fixed points that extend the all-plus `F_θ` by matching eigenvectors of
/// `U` on `(ran C)⊥` and `V` on `K′⊥` sharing an eigenvalue.
pub fn common_eigen_fixed_points(t: &GIsometry, tol: &ToleranceConfig) -> Result<Vec<CommonEigenFixedPoint>> {
    let view = block_decompose(t, tol)?;
    let frame = generic_frame(&view, tol)?;
    let base = f_theta(&frame, &vec![1; frame.tags.len()]);
    let (mu_u, qu) = normal_eig(&view.t_prime, tol)?;
    let (mu_v, qv) = normal_eig(&view.t_double_prime, tol)?;
    let hvecs = &view.basis_ranc_perp * &qu;
    let zvecs = &view.basis_kperp * &qv;

    // group V's eigenvalues; each group is matched against U's eigenvalues
    let groups = cluster_complex(&mu_v, 100.0 * tol.eq_tol);
    let mut out = Vec::new();
    for group in groups {
        let mu = mu_v[group[0]];
        let u_idx: Vec<usize> = (0..mu_u.len())
            .filter(|&i| (mu_u[i] - mu).norm() <= 100.0 * tol.eq_tol)
            .collect();
        if u_idx.is_empty() {
            continue;
        }
        let mut f = base.clone();
        for (&zi, &hi) in group.iter().zip(&u_idx) {
            let h = ComplexMatrix::column_vector(&hvecs.column(hi));
            let z = ComplexMatrix::column_vector(&zvecs.column(zi));
            f = f + &(&h * &z.adjoint());
        }
        let residual = verify_fixed(t, &f, tol)?;
        out.push(CommonEigenFixedPoint { mu, f, residual });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Conclusion {
    NonUnitaryNormal,
    NotNormal,
    Unitary,
}

/// Evidence for one pair of eigenvalue clusters `(μ, μ′)`.
#[derive(Debug, Clone, Serialize)]
pub struct PairEvidence {
    pub mu: [f64; 2],
    pub mu_prime: [f64; 2],
    /// Dimension of `{(y, z) ∈ W_μ : (−y, z) ∈ W_μ′}`.
    pub paired: usize,
    /// Whether the `z` components of those vectors are independent.
    pub independent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectionDetails {
    pub pairs: Vec<PairEvidence>,
    /// Number of `z` with `(0, z)` an eigenvector.
    pub complement_dim: usize,
    /// `‖Z*Z − I‖` over paired and complement directions together.
    pub gram_residual: f64,
    pub complete: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectionReport {
    pub count: usize,
    pub k: usize,
    pub q: usize,
    pub conclusion: Conclusion,
    pub details: DetectionDetails,
}

fn c2(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Counts generic fixed points from the eigenvectors of the full matrix.
pub fn detect_generic(t: &GIsometry, tol: &ToleranceConfig) -> Result<DetectionReport> {
    let (m, n) = (t.m(), t.n());
    let mat = t.matrix();
    let scale = mat.operator_norm().max(1.0);
    let k = rank_of_c(&factorize(t, tol)?, tol)?;
    let sub = tol.subspace_tol();

    let values = schur(mat)?.eigenvalues();
    let clusters = cluster_complex(&values, 100.0 * tol.eq_tol);
    let mut mus = Vec::with_capacity(clusters.len());
    let mut spaces = Vec::with_capacity(clusters.len());
    for group in &clusters {
        let mu = group.iter().map(|&i| values[i]).sum::<Complex64>() / group.len() as f64;
        let w = null_space(&mat.shift(mu), sub * scale);
        if w.cols() == 0 {
            let residual = min_singular_value(&mat.shift(mu));
            return Err(Error::IllConditionedEigenbasis { residual });
        }
        mus.push(mu);
        spaces.push(w);
    }

    // J = diag(−I_m, I_n)
    let flip = |w: &ComplexMatrix| {
        let h = w.block(0, 0, m, w.cols()).scale_real(-1.0);
        ComplexMatrix::vstack(w.cols(), &[&h, &w.block(m, 0, n, w.cols())])
    };
    let mut pairs = Vec::new();
    let mut paired_z = Vec::new();
    let mut q = 0;
    for i in 0..spaces.len() {
        for j in (i + 1)..spaces.len() {
            let (mu, nu) = (mus[i], mus[j]);
            if (mu + nu).norm() <= 100.0 * tol.eq_tol * mu.norm().max(1.0) {
                continue;
            }
            let (w1, w2) = (&spaces[i], &spaces[j]);
            let stacked = ComplexMatrix::hstack(m + n, &[w1, &flip(w2).scale_real(-1.0)]);
            let p = null_space(&stacked, sub);
            if p.cols() == 0 {
                continue;
            }
            let alpha = p.block(0, 0, w1.cols(), p.cols());
            let v = w1 * &alpha;
            let z = v.block(m, 0, n, v.cols());
            let zb = orthonormal_basis(&z, sub);
            let independent = zb.cols() == p.cols();
            if independent {
                q += p.cols();
                paired_z.push(zb);
            }
            pairs.push(PairEvidence {
                mu: c2(mu),
                mu_prime: c2(nu),
                paired: p.cols(),
                independent,
            });
        }
    }

    let mut complement = Vec::new();
    for w in &spaces {
        let h = w.block(0, 0, m, w.cols());
        let alpha = null_space(&h, sub);
        if alpha.cols() > 0 {
            let z = &w.block(m, 0, n, w.cols()) * &alpha;
            complement.push(orthonormal_basis(&z, sub));
        }
    }
    let complement_dim: usize = complement.iter().map(|c| c.cols()).sum();

    let all: Vec<&ComplexMatrix> = paired_z.iter().chain(complement.iter()).collect();
    let zs = ComplexMatrix::hstack(n, &all);
    let gram_residual = if zs.cols() == 0 {
        0.0
    } else {
        (&zs.adjoint() * &zs).identity_residual()
    };
    let complete = zs.cols() == n && gram_residual <= sub;
    let count = if complete {
        1usize.checked_shl(q as u32).unwrap_or(usize::MAX)
    } else {
        0
    };
    let conclusion = if k == 0 {
        Conclusion::Unitary
    } else if complete && q == k {
        Conclusion::NonUnitaryNormal
    } else {
        Conclusion::NotNormal
    };
    Ok(DetectionReport {
        count,
        k,
        q,
        conclusion,
        details: DetectionDetails {
            pairs,
            complement_dim,
            gram_residual,
            complete,
        },
    })
}
