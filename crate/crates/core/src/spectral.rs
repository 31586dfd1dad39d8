//! Spectral data of the positive parts of a factored isometry.
//!
//! `E = (I−A*A)^{−1/2}` splits `ℂⁿ` into eigenspaces `K_i` with eigenvalue
//! `a_i > 1` and the complement `K′⊥` where `E = I`. `C` maps each `K_i`
//! onto `M_i ⊂ H`, scaling every unit vector to norm `δ_i = sqrt(a_i² − 1)`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{
    cluster_eigenvalues, hermitian_eig, operator_norm, orthogonal_complement, ComplexMatrix, ToleranceConfig,
};
use crate::pseudo_unitary::FactoredIsometry;

#[derive(Debug, Clone, Serialize)]
pub struct SpectralBlock {
    /// Eigenvalue of `E` on this block, `> 1`.
    pub a: f64,
    /// Common norm of the vectors `C e` for unit `e` in the block.
    pub delta: f64,
    pub k_i: usize,
    /// Orthonormal columns spanning `K_i` (length `n`).
    #[serde(rename = "basis_K")]
    pub basis_k: ComplexMatrix,
    /// `C · basis_K`: orthogonal columns of norm `delta` spanning `M_i` (length `m`).
    #[serde(rename = "basis_M")]
    pub basis_m: ComplexMatrix,
}

impl SpectralBlock {
    /// `basis_M / delta`, an orthonormal basis of `M_i`.
    pub fn normalized_basis_m(&self) -> ComplexMatrix {
        self.basis_m.scale_real(1.0 / self.delta)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralDecomposition {
    /// Sorted by `a` descending.
    pub blocks: Vec<SpectralBlock>,
    /// `Σ k_i = dim ran C`.
    pub k: usize,
    /// Orthonormal columns spanning `K′⊥` (`n − k` of them).
    #[serde(rename = "basis_Kperp")]
    pub basis_kperp: ComplexMatrix,
    #[serde(rename = "basis_ranCperp_dim")]
    pub ranc_perp_dim: usize,
    /// Orthonormal columns spanning `(ran C)⊥` (`m − k` of them).
    #[serde(skip)]
    pub basis_ranc_perp: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn is_unitary_case(&self) -> bool {
        self.k == 0
    }

    /// Orthonormal basis of `ran C`, blocks in order.
    pub fn ranc_basis(&self, m: usize) -> ComplexMatrix {
        let parts: Vec<ComplexMatrix> = self.blocks.iter().map(|b| b.normalized_basis_m()).collect();
        let refs: Vec<&ComplexMatrix> = parts.iter().collect();
        ComplexMatrix::hstack(m, &refs)
    }

    /// Orthonormal basis of `K′`, blocks in order.
    pub fn kprime_basis(&self, n: usize) -> ComplexMatrix {
        let refs: Vec<&ComplexMatrix> = self.blocks.iter().map(|b| &b.basis_k).collect();
        ComplexMatrix::hstack(n, &refs)
    }
}

/// Columns of `m` picked by `idx`.
fn select_columns(m: &ComplexMatrix, idx: &[usize]) -> ComplexMatrix {
    let cols: Vec<_> = idx.iter().map(|&j| m.column(j)).collect();
    ComplexMatrix::from_columns(m.rows(), &cols)
}

pub fn decompose(f: &FactoredIsometry, tol: &ToleranceConfig) -> Result<SpectralDecomposition> {
    let (m, n) = (f.m(), f.n());
    let eig = hermitian_eig(f.epos(), tol)?;
    let groups = cluster_eigenvalues(&eig.values, tol.cluster_rel_tol);

    let mut kperp_idx = Vec::new();
    let mut blocks = Vec::new();
    for group in groups.iter().rev() {
        let a = group.iter().map(|&i| eig.values[i]).sum::<f64>() / group.len() as f64;
        if a <= 1.0 + tol.unit_tol {
            kperp_idx.extend_from_slice(group);
            continue;
        }
        let basis_k = select_columns(&eig.vectors, group);
        let basis_m = f.cpos() * &basis_k;
        blocks.push(SpectralBlock {
            a,
            delta: (a * a - 1.0).sqrt(),
            k_i: group.len(),
            basis_k,
            basis_m,
        });
    }
    kperp_idx.sort_unstable();
    let k = blocks.iter().map(|b| b.k_i).sum();
    let mut out = SpectralDecomposition {
        blocks,
        k,
        basis_kperp: select_columns(&eig.vectors, &kperp_idx),
        ranc_perp_dim: m - k.min(m),
        basis_ranc_perp: ComplexMatrix::zeros(m, 0),
    };
    // ran C is spanned by orthonormal columns, so singular values are 0 or 1
    out.basis_ranc_perp = orthogonal_complement(&out.ranc_basis(m), 0.5);
    out.ranc_perp_dim = out.basis_ranc_perp.cols();
    debug_assert_eq!(out.basis_kperp.cols(), n - k);
    Ok(out)
}

/// Labeled residuals of the identities satisfied by a spectral decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub residuals: BTreeMap<String, f64>,
}

impl DecompositionReport {
    pub fn max(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> f64 {
        self.residuals[name]
    }

    pub fn passes(&self, limit: f64) -> bool {
        self.residuals.values().all(|r| *r <= limit)
    }

    /// Names of the residuals above `limit`.
    pub fn failures(&self, limit: f64) -> Vec<&str> {
        self.residuals
            .iter()
            .filter(|(_, r)| **r > limit)
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

pub fn verify_decomposition(f: &FactoredIsometry, s: &SpectralDecomposition) -> DecompositionReport {
    let (b, c, e) = (f.bpos(), f.cpos(), f.epos());
    let cs = c.adjoint();
    let worst = |map: &mut BTreeMap<String, f64>, key: &str, value: f64| {
        let slot = map.entry(key.to_string()).or_insert(0.0);
        *slot = slot.max(value);
    };
    let mut r = BTreeMap::new();
    for key in [
        "E_on_K",
        "C_on_K",
        "Cstar_on_M",
        "B_on_M",
        "pair_identity",
        "xi_norm",
        "xi_orthogonality",
    ] {
        r.insert(key.to_string(), 0.0);
    }

    for blk in &s.blocks {
        let (kb, mb) = (&blk.basis_k, &blk.basis_m);
        worst(&mut r, "E_on_K", operator_norm(&(&(e * kb) - &kb.scale_real(blk.a))));
        worst(&mut r, "C_on_K", operator_norm(&(&(c * kb) - mb)));
        worst(
            &mut r,
            "Cstar_on_M",
            operator_norm(&(&(&cs * mb) - &kb.scale_real(blk.delta * blk.delta))),
        );
        worst(&mut r, "B_on_M", operator_norm(&(&(b * mb) - &mb.scale_real(blk.a))));
        worst(
            &mut r,
            "pair_identity",
            (blk.a * blk.a - 1.0 - blk.delta * blk.delta).abs(),
        );
        for j in 0..mb.cols() {
            let norm = crate::linalg::vec_norm(&mb.column(j));
            worst(&mut r, "xi_norm", (norm - blk.delta).abs());
        }
    }

    // mutual orthogonality of all ξ's, across and within blocks
    let xis: Vec<(Vec<_>, f64)> = s
        .blocks
        .iter()
        .flat_map(|blk| (0..blk.basis_m.cols()).map(move |j| (blk.basis_m.column(j), blk.delta)))
        .collect();
    for p in 0..xis.len() {
        for q in (p + 1)..xis.len() {
            let ip = crate::linalg::inner(&xis[p].0, &xis[q].0).norm() / (xis[p].1 * xis[q].1);
            worst(&mut r, "xi_orthogonality", ip);
        }
    }

    let kp = &s.basis_kperp;
    r.insert("E_on_Kperp".into(), operator_norm(&(&(e * kp) - kp)));
    r.insert("C_on_Kperp".into(), operator_norm(&(c * kp)));
    let w = &s.basis_ranc_perp;
    r.insert("B_on_ranCperp".into(), operator_norm(&(&(b * w) - w)));
    r.insert("Cstar_on_ranCperp".into(), operator_norm(&(&cs * w)));

    let n = f.n();
    let mut all = s.kprime_basis(n);
    all = ComplexMatrix::hstack(n, &[&all, kp]);
    let completeness = if all.cols() == n {
        (&all.adjoint() * &all).identity_residual()
    } else {
        f64::INFINITY
    };
    r.insert("basis_completeness".into(), completeness);
    let ksum: usize = s.blocks.iter().map(|b| b.k_i).sum();
    r.insert("rank_sum".into(), (ksum as f64 - s.k as f64).abs());
    DecompositionReport { residuals: r }
}

/// `dim ran C`.
pub fn rank_of_c(f: &FactoredIsometry, tol: &ToleranceConfig) -> Result<usize> {
    Ok(decompose(f, tol)?.k)
}
