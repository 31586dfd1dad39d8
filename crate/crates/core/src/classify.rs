//! Unitary, normal, self-adjoint and non-unitary normal isometries.
//!
//! Each property is decided twice: once by a brute-force operator identity on
//! the full `(m+n)`-square matrix and once by the structural criterion on the
//! factored form. The two must agree; a decisive disagreement is reported as
//! [`Error::InternalInconsistency`].

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, multiset_distance, normal_eig, projector, ComplexMatrix, ToleranceConfig};
use crate::pseudo_unitary::{factorize, verify_relations, FactoredIsometry, GIsometry};
use crate::spectral::{decompose, SpectralDecomposition};
use num_complex::Complex64;

/// A failing verdict only contradicts a passing one when its residual exceeds
/// its own threshold by this factor.
const DECISIVE: f64 = 100.0;

pub type Residuals = BTreeMap<String, f64>;

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    #[serde(rename = "member")]
    pub is_member: bool,
    #[serde(rename = "unitary")]
    pub is_unitary: bool,
    #[serde(rename = "normal")]
    pub is_normal: bool,
    #[serde(rename = "self_adjoint")]
    pub is_self_adjoint: bool,
    #[serde(rename = "non_unitary_normal")]
    pub is_non_unitary_normal: bool,
    pub residuals: Residuals,
}

fn comm(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix, d: &ComplexMatrix) -> f64 {
    // ‖ab − cd‖
    (&(a * b) - &(c * d)).operator_norm()
}

fn check_agreement(what: &str, first: (bool, f64, f64), second: (bool, f64, f64)) -> Result<()> {
    // each triple: (verdict, residual, threshold)
    let decisive_no = |(ok, r, t): (bool, f64, f64)| !ok && r > DECISIVE * t;
    if (first.0 && decisive_no(second)) || (second.0 && decisive_no(first)) {
        return Err(Error::InternalInconsistency(format!(
            "{what}: criteria disagree (residuals {:.3e} vs {:.3e})",
            first.1, second.1
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct UnitaryCheck {
    pub is_unitary: bool,
    /// `‖T12‖`
    pub block_residual: f64,
    /// `‖T*T − I‖`
    pub gram_residual: f64,
}

pub fn unitary_check(t: &GIsometry, tol: &ToleranceConfig) -> UnitaryCheck {
    let block_residual = t.t12().operator_norm();
    let mat = t.matrix();
    let gram_residual = (&mat.adjoint() * mat).identity_residual();
    UnitaryCheck {
        is_unitary: block_residual <= tol.eq_tol,
        block_residual,
        gram_residual,
    }
}

pub fn is_unitary_isometry(t: &GIsometry, tol: &ToleranceConfig) -> bool {
    unitary_check(t, tol).is_unitary
}

#[derive(Debug, Clone)]
pub struct NormalityCheck {
    pub is_normal: bool,
    pub brute_force: bool,
    pub structural: bool,
    pub residuals: Residuals,
}

fn normality_with(t: &GIsometry, f: &FactoredIsometry, tol: &ToleranceConfig) -> Result<NormalityCheck> {
    let mat = t.matrix();
    let scale = mat.operator_norm().max(1.0);
    let brute = comm(mat, &mat.adjoint(), &mat.adjoint(), mat);
    let brute_tol = tol.eq_tol * scale * scale;
    let (u, v) = (f.u(), f.v());
    let ub = comm(u, f.bpos(), f.bpos(), u);
    let ucv = comm(u, f.cpos(), f.cpos(), v);
    let ve = comm(v, f.epos(), f.epos(), v);
    let structural_res = ub.max(ucv).max(ve);
    let struct_tol = 10.0 * tol.eq_tol * scale;

    let brute_force = brute <= brute_tol;
    let structural = structural_res <= struct_tol;
    check_agreement(
        "normality",
        (brute_force, brute, brute_tol),
        (structural, structural_res, struct_tol),
    )?;
    let residuals = BTreeMap::from([
        ("normal_brute".to_string(), brute),
        ("UB_minus_BU".to_string(), ub),
        ("UC_minus_CV".to_string(), ucv),
        ("VE_minus_EV".to_string(), ve),
    ]);
    Ok(NormalityCheck {
        is_normal: brute_force && structural,
        brute_force,
        structural,
        residuals,
    })
}

pub fn normality_check(t: &GIsometry, tol: &ToleranceConfig) -> Result<NormalityCheck> {
    let f = factorize(t, tol)?;
    normality_with(t, &f, tol)
}

pub fn is_normal(t: &GIsometry, tol: &ToleranceConfig) -> Result<(bool, Residuals)> {
    let c = normality_check(t, tol)?;
    Ok((c.is_normal, c.residuals))
}

/// Invariance of `M_i`, `K_i` and equality of the coordinate matrices of `U`
/// and `V` on each spectral block.
fn block_structure(f: &FactoredIsometry, s: &SpectralDecomposition) -> (f64, f64, f64) {
    let (u, v) = (f.u(), f.v());
    let (m, n) = (f.m(), f.n());
    let (mut inv_u, mut inv_v, mut coord) = (0.0f64, 0.0f64, 0.0f64);
    for blk in &s.blocks {
        let pm = projector(&blk.normalized_basis_m());
        let pk = projector(&blk.basis_k);
        let qm = ComplexMatrix::identity(m) - &pm;
        let qk = ComplexMatrix::identity(n) - &pk;
        inv_u = inv_u.max((&(&qm * u) * &pm).operator_norm());
        inv_v = inv_v.max((&(&qk * v) * &pk).operator_norm());
        let d2 = blk.delta * blk.delta;
        let ru = (&(&blk.basis_m.adjoint() * u) * &blk.basis_m).scale_real(1.0 / d2);
        let rv = &(&blk.basis_k.adjoint() * v) * &blk.basis_k;
        coord = coord.max(ru.distance(&rv));
    }
    (inv_u, inv_v, coord)
}

#[derive(Debug, Clone)]
pub struct NonUnitaryNormalCheck {
    pub is_non_unitary_normal: bool,
    pub k: usize,
    pub residuals: Residuals,
}

fn nun_with(
    t: &GIsometry,
    f: &FactoredIsometry,
    s: &SpectralDecomposition,
    normal: &NormalityCheck,
    unitary: &UnitaryCheck,
    tol: &ToleranceConfig,
) -> Result<NonUnitaryNormalCheck> {
    let scale = t.matrix().operator_norm().max(1.0);
    let struct_tol = 10.0 * tol.eq_tol * scale;
    let (inv_u, inv_v, coord) = block_structure(f, s);
    let structural_res = inv_u.max(inv_v).max(coord);
    let structural = s.k >= 1 && structural_res <= struct_tol;
    let expected = normal.is_normal && !unitary.is_unitary;

    if s.k == 0 && !unitary.is_unitary {
        return Err(Error::InternalInconsistency(format!(
            "T12 has norm {:.3e} but no eigenvalue of E exceeds 1 + unit_tol",
            unitary.block_residual
        )));
    }
    if s.k >= 1 && unitary.is_unitary {
        return Err(Error::InternalInconsistency(format!(
            "T12 has norm {:.3e} but E has {} eigenvalues above 1",
            unitary.block_residual, s.k
        )));
    }
    let normal_res = normal.residuals.values().copied().fold(0.0, f64::max);
    check_agreement(
        "non-unitary normality",
        (structural, structural_res, struct_tol),
        (expected, normal_res, struct_tol),
    )?;
    let residuals = BTreeMap::from([
        ("M_invariance".to_string(), inv_u),
        ("K_invariance".to_string(), inv_v),
        ("block_coordinates".to_string(), coord),
    ]);
    Ok(NonUnitaryNormalCheck {
        is_non_unitary_normal: structural && expected,
        k: s.k,
        residuals,
    })
}

pub fn non_unitary_normal_check(t: &GIsometry, tol: &ToleranceConfig) -> Result<NonUnitaryNormalCheck> {
    let f = factorize(t, tol)?;
    let s = decompose(&f, tol)?;
    let normal = normality_with(t, &f, tol)?;
    let unitary = unitary_check(t, tol);
    nun_with(t, &f, &s, &normal, &unitary, tol)
}

pub fn is_non_unitary_normal(t: &GIsometry, tol: &ToleranceConfig) -> Result<(bool, Residuals)> {
    let c = non_unitary_normal_check(t, tol)?;
    Ok((c.is_non_unitary_normal, c.residuals))
}

fn self_adjoint_with(
    t: &GIsometry,
    f: &FactoredIsometry,
    normal: bool,
    tol: &ToleranceConfig,
) -> Result<(bool, Residuals)> {
    let mat = t.matrix();
    let scale = mat.operator_norm().max(1.0);
    let brute = mat.distance(&mat.adjoint());
    let brute_tol = tol.eq_tol * scale;
    let ru = f.u().distance(&f.u().adjoint());
    let rv = f.v().distance(&f.v().adjoint());
    let struct_tol = 10.0 * tol.eq_tol;
    let brute_ok = brute <= brute_tol;
    let residuals = BTreeMap::from([
        ("selfadjoint_brute".to_string(), brute),
        ("U_selfadjoint".to_string(), ru),
        ("V_selfadjoint".to_string(), rv),
    ]);
    if !normal {
        if brute_ok {
            return Err(Error::InternalInconsistency(
                "matrix is self-adjoint but was classified as not normal".into(),
            ));
        }
        return Ok((false, residuals));
    }
    let structural = ru.max(rv) <= struct_tol;
    check_agreement(
        "self-adjointness",
        (brute_ok, brute, brute_tol),
        (structural, ru.max(rv), struct_tol),
    )?;
    Ok((brute_ok && structural, residuals))
}

pub fn is_self_adjoint(t: &GIsometry, tol: &ToleranceConfig) -> Result<(bool, Residuals)> {
    let f = factorize(t, tol)?;
    let normal = normality_with(t, &f, tol)?;
    self_adjoint_with(t, &f, normal.is_normal, tol)
}

/// Full report for a verified element.
pub fn classify(t: &GIsometry, tol: &ToleranceConfig) -> Result<Classification> {
    let report = verify_relations(t.matrix(), t.m(), t.n())?;
    let f = factorize(t, tol)?;
    let s = decompose(&f, tol)?;
    let unitary = unitary_check(t, tol);
    let normal = normality_with(t, &f, tol)?;
    let nun = nun_with(t, &f, &s, &normal, &unitary, tol)?;
    let (self_adjoint, sa_res) = self_adjoint_with(t, &f, normal.is_normal, tol)?;

    let mut residuals = BTreeMap::from([
        ("relations".to_string(), report.max_residual()),
        ("T12_norm".to_string(), unitary.block_residual),
        ("unitary_gram".to_string(), unitary.gram_residual),
    ]);
    residuals.extend(normal.residuals);
    residuals.extend(nun.residuals);
    residuals.extend(sa_res);
    Ok(Classification {
        is_member: true,
        is_unitary: unitary.is_unitary,
        is_normal: normal.is_normal,
        is_self_adjoint: self_adjoint,
        is_non_unitary_normal: nun.is_non_unitary_normal,
        residuals,
    })
}

/// Classifies a raw matrix; non-members are rejected with their residuals.
pub fn classify_raw(matrix: ComplexMatrix, m: usize, n: usize, tol: &ToleranceConfig) -> Result<Classification> {
    let t = GIsometry::new(matrix, m, n, tol)?;
    classify(&t, tol)
}

#[derive(Debug, Clone)]
pub struct IsometryBlock {
    pub a: f64,
    pub delta: f64,
    pub k_i: usize,
    /// `T` on `M_i ⊕ K_i` in the basis `β_i′ ∪ β_i`.
    pub ti_matrix: ComplexMatrix,
    /// Coordinate matrix of `V` on `basis_K`.
    pub r: ComplexMatrix,
    pub basis_k: ComplexMatrix,
    pub basis_m: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct BlockView {
    pub m: usize,
    pub n: usize,
    pub blocks: Vec<IsometryBlock>,
    /// `U` compressed to `(ran C)⊥`.
    pub t_prime: ComplexMatrix,
    /// `V` compressed to `K′⊥`.
    pub t_double_prime: ComplexMatrix,
    pub basis_ranc_perp: ComplexMatrix,
    pub basis_kperp: ComplexMatrix,
    /// Largest deviation from the `[[aR, R], [δ²R, aR]]` pattern.
    pub pattern_residual: f64,
}

fn embed_h(h: &ComplexMatrix, n: usize) -> ComplexMatrix {
    ComplexMatrix::vstack(h.cols(), &[h, &ComplexMatrix::zeros(n, h.cols())])
}

fn embed_k(k: &ComplexMatrix, m: usize) -> ComplexMatrix {
    ComplexMatrix::vstack(k.cols(), &[&ComplexMatrix::zeros(m, k.cols()), k])
}

impl BlockView {
    /// Reassembles `T` from the blocks and the two compressions.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (m, n) = (self.m, self.n);
        let mut out = ComplexMatrix::zeros(m + n, m + n);
        for blk in &self.blocks {
            let d2 = blk.delta * blk.delta;
            let basis = ComplexMatrix::hstack(m + n, &[&embed_h(&blk.basis_m, n), &embed_k(&blk.basis_k, m)]);
            let dual = ComplexMatrix::hstack(
                m + n,
                &[
                    &embed_h(&blk.basis_m.scale_real(1.0 / d2), n),
                    &embed_k(&blk.basis_k, m),
                ],
            );
            out = out + &(&(&basis * &blk.ti_matrix) * &dual.adjoint());
        }
        let w = embed_h(&self.basis_ranc_perp, n);
        let kp = embed_k(&self.basis_kperp, m);
        out = out + &(&(&w * &self.t_prime) * &w.adjoint());
        out + &(&(&kp * &self.t_double_prime) * &kp.adjoint())
    }
}

fn block_pattern(a: f64, delta: f64, r: &ComplexMatrix) -> ComplexMatrix {
    let ar = r.scale_real(a);
    ComplexMatrix::from_blocks(&ar, r, &r.scale_real(delta * delta), &ar)
}

fn block_view_with(
    t: &GIsometry,
    f: &FactoredIsometry,
    s: &SpectralDecomposition,
    tol: &ToleranceConfig,
) -> Result<BlockView> {
    let (m, n) = (t.m(), t.n());
    let mat = t.matrix();
    let mut blocks = Vec::with_capacity(s.blocks.len());
    let mut pattern_residual = 0.0f64;
    for blk in &s.blocks {
        let d2 = blk.delta * blk.delta;
        let basis = ComplexMatrix::hstack(m + n, &[&embed_h(&blk.basis_m, n), &embed_k(&blk.basis_k, m)]);
        let dual = ComplexMatrix::hstack(
            m + n,
            &[
                &embed_h(&blk.basis_m.scale_real(1.0 / d2), n),
                &embed_k(&blk.basis_k, m),
            ],
        );
        let ti = &(&dual.adjoint() * mat) * &basis;
        let r = &(&blk.basis_k.adjoint() * f.v()) * &blk.basis_k;
        pattern_residual = pattern_residual.max(ti.distance(&block_pattern(blk.a, blk.delta, &r)));
        blocks.push(IsometryBlock {
            a: blk.a,
            delta: blk.delta,
            k_i: blk.k_i,
            ti_matrix: ti,
            r,
            basis_k: blk.basis_k.clone(),
            basis_m: blk.basis_m.clone(),
        });
    }
    let scale = mat.operator_norm().max(1.0);
    if pattern_residual > 100.0 * tol.eq_tol * scale {
        return Err(Error::StructureResidual {
            residual: pattern_residual,
        });
    }
    let w = &s.basis_ranc_perp;
    let kp = &s.basis_kperp;
    Ok(BlockView {
        m,
        n,
        blocks,
        t_prime: &(&w.adjoint() * f.u()) * w,
        t_double_prime: &(&kp.adjoint() * f.v()) * kp,
        basis_ranc_perp: w.clone(),
        basis_kperp: kp.clone(),
        pattern_residual,
    })
}

pub fn block_decompose(t: &GIsometry, tol: &ToleranceConfig) -> Result<BlockView> {
    let f = factorize(t, tol)?;
    let s = decompose(&f, tol)?;
    let normal = normality_with(t, &f, tol)?;
    let nun = nun_with(t, &f, &s, &normal, &unitary_check(t, tol), tol)?;
    if !nun.is_non_unitary_normal {
        return Err(Error::NotNonUnitaryNormal);
    }
    block_view_with(t, &f, &s, tol)
}

/// Analytic spectral data of `[[aI, I], [δ²I, aI]]`.
#[derive(Debug, Clone)]
pub struct BlockEigen {
    pub plus: f64,
    pub minus: f64,
    pub multiplicity: usize,
    /// `2k × k`: columns `(e_j/δ, e_j)`.
    pub plus_vectors: ComplexMatrix,
    /// `2k × k`: columns `(−e_j/δ, e_j)`.
    pub minus_vectors: ComplexMatrix,
    /// Matched distance to the numerically computed eigenvalues.
    pub numerical_distance: f64,
}

pub fn s_block_eigen(a: f64, delta: f64, k_i: usize, tol: &ToleranceConfig) -> Result<BlockEigen> {
    let pair = (a * a - 1.0 - delta * delta).abs();
    if !(a > 1.0 && delta > 0.0) || pair > tol.eq_tol * a * a {
        return Err(Error::InconsistentPair { residual: pair });
    }
    let id = ComplexMatrix::identity(k_i);
    let s = block_pattern(a, delta, &id);
    let vectors = |sign: f64| ComplexMatrix::vstack(k_i, &[&id.scale_real(sign / delta), &id]);
    let plus_vectors = vectors(1.0);
    let minus_vectors = vectors(-1.0);

    let mut analytic = vec![Complex64::new(a + delta, 0.0); k_i];
    analytic.extend(std::iter::repeat_n(Complex64::new(a - delta, 0.0), k_i));
    let numerical = eigenvalues(&s)?;
    let numerical_distance = multiset_distance(&analytic, &numerical);
    let vec_res = (&s * &plus_vectors)
        .distance(&plus_vectors.scale_real(a + delta))
        .max((&s * &minus_vectors).distance(&minus_vectors.scale_real(a - delta)));
    let limit = 10.0 * tol.eq_tol * (a + delta);
    if numerical_distance > limit || vec_res > limit {
        return Err(Error::SpectrumMismatch {
            distance: numerical_distance.max(vec_res),
        });
    }
    Ok(BlockEigen {
        plus: a + delta,
        minus: a - delta,
        multiplicity: k_i,
        plus_vectors,
        minus_vectors,
        numerical_distance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EigenSource {
    /// `λ_{ij}(a_i ± δ_i)`; `sign` is `+1` or `−1`.
    Block { block: usize, index: usize, sign: i8 },
    /// Eigenvalue of `U` on `(ran C)⊥`.
    RanCPerp { index: usize },
    /// Eigenvalue of `V` on `K′⊥`.
    KPerp { index: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct LabeledEigenvalue {
    pub value: Complex64,
    pub source: EigenSource,
    /// Unit eigenvector in `H ⊕ K`, stacked.
    pub vector: Vec<Complex64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalSpectrum {
    pub eigenvalues: Vec<LabeledEigenvalue>,
    /// Matched distance to the eigenvalues of the full matrix.
    pub numerical_distance: f64,
}

fn normalized(v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = crate::linalg::vec_norm(&v);
    v.into_iter().map(|z| z / norm).collect()
}

pub(crate) fn spectrum_from_view(t: &GIsometry, view: &BlockView, tol: &ToleranceConfig) -> Result<NormalSpectrum> {
    let (m, n) = (view.m, view.n);
    let mut out = Vec::with_capacity(m + n);
    for (bi, blk) in view.blocks.iter().enumerate() {
        let (lams, w) = normal_eig(&blk.r, tol)?;
        let z = &blk.basis_k * &w;
        let cz = &blk.basis_m * &w;
        for (j, lam) in lams.iter().enumerate() {
            for sign in [1i8, -1] {
                let s = sign as f64;
                let mut v: Vec<Complex64> = cz.column(j).iter().map(|x| x * (s / blk.delta)).collect();
                v.extend(z.column(j));
                out.push(LabeledEigenvalue {
                    value: lam * (blk.a + s * blk.delta),
                    source: EigenSource::Block {
                        block: bi,
                        index: j,
                        sign,
                    },
                    vector: normalized(v),
                });
            }
        }
    }
    let (lams, q) = normal_eig(&view.t_prime, tol)?;
    let hvecs = &view.basis_ranc_perp * &q;
    for (j, lam) in lams.iter().enumerate() {
        let mut v = hvecs.column(j);
        v.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), n));
        out.push(LabeledEigenvalue {
            value: *lam,
            source: EigenSource::RanCPerp { index: j },
            vector: v,
        });
    }
    let (lams, q) = normal_eig(&view.t_double_prime, tol)?;
    let kvecs = &view.basis_kperp * &q;
    for (j, lam) in lams.iter().enumerate() {
        let mut v = vec![Complex64::new(0.0, 0.0); m];
        v.extend(kvecs.column(j));
        out.push(LabeledEigenvalue {
            value: *lam,
            source: EigenSource::KPerp { index: j },
            vector: v,
        });
    }

    let analytic: Vec<Complex64> = out.iter().map(|e| e.value).collect();
    let numerical = eigenvalues(t.matrix())?;
    let distance = multiset_distance(&analytic, &numerical);
    let scale = t.matrix().operator_norm().max(1.0);
    if distance > 10.0 * tol.eq_tol * scale {
        return Err(Error::SpectrumMismatch { distance });
    }
    Ok(NormalSpectrum {
        eigenvalues: out,
        numerical_distance: distance,
    })
}

pub fn spectrum_normal(t: &GIsometry, tol: &ToleranceConfig) -> Result<NormalSpectrum> {
    let view = block_decompose(t, tol)?;
    spectrum_from_view(t, &view, tol)
}
