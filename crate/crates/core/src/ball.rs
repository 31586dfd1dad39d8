//! The open unit ball of `m x n` complex matrices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, operator_norm, positive_inv_sqrt, positive_sqrt, vec_norm, ComplexMatrix, ToleranceConfig};

/// A matrix in the open (`strict`) or closed unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Contraction {
    matrix: ComplexMatrix,
    strict: bool,
}

impl Contraction {
    /// Open-ball element: `‖A‖ < 1 − eq_tol`.
    pub fn open(matrix: ComplexMatrix, tol: &ToleranceConfig) -> Result<Self> {
        let norm = operator_norm(&matrix);
        if norm < 1.0 - tol.eq_tol {
            Ok(Self { matrix, strict: true })
        } else {
            Err(Error::NotStrictContraction { norm })
        }
    }

    /// Closed-ball element: `‖A‖ ≤ 1 + eq_tol`.
    pub fn closed(matrix: ComplexMatrix, tol: &ToleranceConfig) -> Result<Self> {
        let norm = operator_norm(&matrix);
        if norm <= 1.0 + tol.eq_tol {
            Ok(Self { matrix, strict: false })
        } else {
            Err(Error::NotContraction { norm })
        }
    }

    /// Open-ball element when possible, otherwise closed-ball.
    pub fn classify(matrix: ComplexMatrix, tol: &ToleranceConfig) -> Result<Self> {
        let norm = operator_norm(&matrix);
        if norm < 1.0 - tol.eq_tol {
            Ok(Self { matrix, strict: true })
        } else if norm <= 1.0 + tol.eq_tol {
            Ok(Self { matrix, strict: false })
        } else {
            Err(Error::NotContraction { norm })
        }
    }

    pub fn zero(m: usize, n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(m, n),
            strict: true,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn norm(&self) -> f64 {
        operator_norm(&self.matrix)
    }
}

/// The Möbius transformation `T_B` centred at a strict contraction `B`.
#[derive(Debug, Clone)]
pub struct MobiusMap {
    center: Contraction,
    /// `(I − BB*)^{−1/2}`
    left_defect_inv_sqrt: ComplexMatrix,
    /// `(I − B*B)^{1/2}`
    right_defect_sqrt: ComplexMatrix,
}

impl MobiusMap {
    pub fn new(center: Contraction, tol: &ToleranceConfig) -> Result<Self> {
        if !center.is_strict() {
            return Err(Error::NotStrictContraction { norm: center.norm() });
        }
        let b = center.matrix();
        let left = ComplexMatrix::identity(b.rows()) - &(b * &b.adjoint());
        let right = ComplexMatrix::identity(b.cols()) - &(&b.adjoint() * b);
        Ok(Self {
            left_defect_inv_sqrt: positive_inv_sqrt(&left, tol)?,
            right_defect_sqrt: positive_sqrt(&right, tol)?,
            center,
        })
    }

    pub fn center(&self) -> &Contraction {
        &self.center
    }

    pub fn left_defect_inv_sqrt(&self) -> &ComplexMatrix {
        &self.left_defect_inv_sqrt
    }

    pub fn right_defect_sqrt(&self) -> &ComplexMatrix {
        &self.right_defect_sqrt
    }
}

/// `T_B(A) = (I−BB*)^{−1/2} (A+B) (I+B*A)^{−1} (I−B*B)^{1/2}`.
pub fn mobius_apply(map: &MobiusMap, a: &Contraction, tol: &ToleranceConfig) -> Result<Contraction> {
    let b = map.center.matrix();
    if (a.rows(), a.cols()) != (b.rows(), b.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "Möbius center is {}x{}, argument is {}x{}",
            b.rows(),
            b.cols(),
            a.rows(),
            a.cols()
        )));
    }
    let denom = ComplexMatrix::identity(b.cols()) + &(&b.adjoint() * a.matrix());
    let denom_inv = denom.inverse().map_err(|_| Error::SingularFactor)?;
    let sum = a.matrix() + b;
    let out = &(&(&map.left_defect_inv_sqrt * &sum) * &denom_inv) * &map.right_defect_sqrt;
    let out = ComplexMatrix::from_inner(out.into_inner()).map_err(|_| Error::SingularFactor)?;
    let image = Contraction::classify(out, tol)?;
    Ok(image)
}

/// `T_B^{−1} = T_{−B}`.
pub fn mobius_inverse(map: &MobiusMap) -> MobiusMap {
    let neg = -map.center.matrix();
    // (I − BB*) is unchanged under B → −B, so the cached factors carry over
    MobiusMap {
        center: Contraction {
            matrix: neg,
            strict: true,
        },
        left_defect_inv_sqrt: map.left_defect_inv_sqrt.clone(),
        right_defect_sqrt: map.right_defect_sqrt.clone(),
    }
}

/// Argument of `atanh` is clamped below this to stay finite.
const ATANH_CLAMP: f64 = 1.0 - 1e-15;

/// `C_D(A1, A2) = atanh ‖T_{−A2}(A1)‖`.
pub fn caratheodory_distance(a1: &Contraction, a2: &Contraction, tol: &ToleranceConfig) -> Result<f64> {
    for a in [a1, a2] {
        if !a.is_strict() {
            return Err(Error::NotStrictContraction { norm: a.norm() });
        }
    }
    let map = mobius_inverse(&MobiusMap::new(a2.clone(), tol)?);
    let moved = mobius_apply(&map, a1, tol)?;
    let r = moved.norm().clamp(0.0, ATANH_CLAMP);
    Ok(r.atanh())
}

/// `‖T (I−T*T)^{1/2} − (I−TT*)^{1/2} T‖` for a contraction `T`.
pub fn intertwine_residual(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<f64> {
    let norm = operator_norm(t);
    if norm > 1.0 + tol.eq_tol {
        return Err(Error::NotContraction { norm });
    }
    // defects of a boundary contraction can dip to −2·eq_tol through rounding
    let relaxed = ToleranceConfig {
        eq_tol: 3.0 * tol.eq_tol,
        ..*tol
    };
    let right = positive_sqrt(&(ComplexMatrix::identity(t.cols()) - &(&t.adjoint() * t)), &relaxed)?;
    let left = positive_sqrt(&(ComplexMatrix::identity(t.rows()) - &(t * &t.adjoint())), &relaxed)?;
    Ok(operator_norm(&(&(t * &right) - &(&left * t))))
}

/// An element `(h, k)` of `H ⊕ K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceVector {
    pub h: Vec<Complex64>,
    pub k: Vec<Complex64>,
}

impl SpaceVector {
    pub fn new(h: Vec<Complex64>, k: Vec<Complex64>) -> Result<Self> {
        if h.iter().chain(&k).all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(Self { h, k })
        } else {
            Err(Error::NonFinite)
        }
    }

    /// Splits a stacked vector of length `m + n`.
    pub fn from_stacked(v: &[Complex64], m: usize) -> Result<Self> {
        Self::new(v[..m].to_vec(), v[m..].to_vec())
    }

    pub fn stacked(&self) -> Vec<Complex64> {
        self.h.iter().chain(&self.k).copied().collect()
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.stacked())
    }
}

/// `𝒮(v, w) = ⟨v.h, w.h⟩ − ⟨v.k, w.k⟩`.
pub fn hermitian_form(v: &SpaceVector, w: &SpaceVector) -> Result<Complex64> {
    if v.h.len() != w.h.len() || v.k.len() != w.k.len() {
        return Err(Error::DimensionMismatch(format!(
            "vectors in H⊕K of shapes ({}, {}) and ({}, {})",
            v.h.len(),
            v.k.len(),
            w.h.len(),
            w.k.len()
        )));
    }
    Ok(inner(&v.h, &w.h) - inner(&v.k, &w.k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CausalType {
    SpaceLike,
    LightLike,
    TimeLike,
}

pub fn classify_vector(v: &SpaceVector, tol: &ToleranceConfig) -> Result<CausalType> {
    if v.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let s = hermitian_form(v, v)?.re;
    Ok(if s > tol.eq_tol {
        CausalType::SpaceLike
    } else if s < -tol.eq_tol {
        CausalType::TimeLike
    } else {
        CausalType::LightLike
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_contraction;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn e(i: usize, len: usize) -> Vec<Complex64> {
        (0..len)
            .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
            .collect()
    }

    fn zero(len: usize) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); len]
    }

    fn column() -> Contraction {
        Contraction::open(ComplexMatrix::from_real(2, 1, &[0.6, 0.0]).unwrap(), &tol()).unwrap()
    }

    #[test]
    fn contraction_validation() {
        let t = tol();
        let unit = ComplexMatrix::from_real(2, 1, &[1.0, 0.0]).unwrap();
        assert!(matches!(
            Contraction::open(unit.clone(), &t),
            Err(Error::NotStrictContraction { .. })
        ));
        assert!(!Contraction::closed(unit.clone(), &t).unwrap().is_strict());
        let big = ComplexMatrix::from_real(2, 1, &[1.1, 0.0]).unwrap();
        assert!(matches!(
            Contraction::closed(big, &t),
            Err(Error::NotContraction { .. })
        ));
    }

    #[test]
    fn mobius_at_origin_returns_center() {
        let t = tol();
        let b = Contraction::open(random_contraction(2, 3, 2, 0.5), &t).unwrap();
        let map = MobiusMap::new(b.clone(), &t).unwrap();
        let image = mobius_apply(&map, &Contraction::zero(3, 2), &t).unwrap();
        assert!(image.matrix().distance(b.matrix()) < 1e-12);
    }

    #[test]
    fn mobius_identity_and_inverse() {
        let t = tol();
        let a = Contraction::open(random_contraction(5, 3, 2, 0.7), &t).unwrap();
        let id = MobiusMap::new(Contraction::zero(3, 2), &t).unwrap();
        assert!(mobius_apply(&id, &a, &t).unwrap().matrix().distance(a.matrix()) < 1e-12);

        let map = MobiusMap::new(a.clone(), &t).unwrap();
        let inv = mobius_inverse(&map);
        assert!(mobius_apply(&inv, &a, &t).unwrap().norm() < 1e-12);
        assert_eq!(mobius_inverse(&inv).center().matrix(), a.matrix());
        assert_eq!(mobius_inverse(&id).center().matrix(), &ComplexMatrix::zeros(3, 2));
    }

    #[test]
    fn mobius_roundtrip() {
        let t = tol();
        for seed in 0..20 {
            let b = Contraction::open(random_contraction(100 + seed, 3, 2, 0.8), &t).unwrap();
            let a = Contraction::open(random_contraction(200 + seed, 3, 2, 0.9), &t).unwrap();
            let map = MobiusMap::new(b, &t).unwrap();
            let there = mobius_apply(&map, &a, &t).unwrap();
            assert!(there.is_strict());
            let back = mobius_apply(&mobius_inverse(&map), &there, &t).unwrap();
            assert!(back.matrix().distance(a.matrix()) < 1e-8);
        }
    }

    #[test]
    fn boundary_argument_needs_strict_center() {
        let t = tol();
        let unit = Contraction::closed(ComplexMatrix::from_real(2, 1, &[1.0, 0.0]).unwrap(), &t).unwrap();
        assert!(MobiusMap::new(unit.clone(), &t).is_err());
        let map = MobiusMap::new(column(), &t).unwrap();
        let image = mobius_apply(&map, &unit, &t).unwrap();
        assert!((image.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn distance_examples() {
        let t = tol();
        let a = column();
        assert!(caratheodory_distance(&a, &a, &t).unwrap().abs() < 1e-12);
        let d = caratheodory_distance(&Contraction::zero(2, 1), &a, &t).unwrap();
        assert!((d - 0.6f64.atanh()).abs() < 1e-12);
        assert!((d - std::f64::consts::LN_2).abs() < 1e-12);
        for seed in 0..10 {
            let a1 = Contraction::open(random_contraction(seed, 3, 2, 0.4), &t).unwrap();
            let a2 = Contraction::open(random_contraction(seed + 50, 3, 2, 0.85), &t).unwrap();
            let d12 = caratheodory_distance(&a1, &a2, &t).unwrap();
            let d21 = caratheodory_distance(&a2, &a1, &t).unwrap();
            assert!((d12 - d21).abs() < 1e-8);
        }
    }

    #[test]
    fn distance_requires_open_ball() {
        let t = tol();
        let unit = Contraction::closed(ComplexMatrix::from_real(2, 1, &[1.0, 0.0]).unwrap(), &t).unwrap();
        assert!(caratheodory_distance(&unit, &column(), &t).is_err());
    }

    #[test]
    fn intertwining() {
        let t = tol();
        assert_eq!(intertwine_residual(&ComplexMatrix::zeros(3, 2), &t).unwrap(), 0.0);
        let u = crate::linalg::random_unitary(4, 3);
        assert!(intertwine_residual(&u, &t).unwrap() < 1e-8);
        let a = random_contraction(9, 4, 3, 0.9);
        assert!(intertwine_residual(&a, &t).unwrap() < 1e-8);
    }

    #[test]
    fn hermitian_form_examples() {
        let v = SpaceVector::new(e(0, 2), zero(2)).unwrap();
        assert_eq!(hermitian_form(&v, &v).unwrap(), Complex64::new(1.0, 0.0));
        let w = SpaceVector::new(zero(2), e(0, 2)).unwrap();
        assert_eq!(hermitian_form(&w, &w).unwrap(), Complex64::new(-1.0, 0.0));
        let light = SpaceVector::new(e(0, 2), e(0, 2)).unwrap();
        assert_eq!(hermitian_form(&light, &light).unwrap(), Complex64::new(0.0, 0.0));
        let short = SpaceVector::new(e(0, 1), e(0, 2)).unwrap();
        assert!(matches!(hermitian_form(&v, &short), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn form_is_conjugate_linear_in_second_slot() {
        let i = Complex64::new(0.0, 1.0);
        let v = SpaceVector::new(e(0, 1), zero(1)).unwrap();
        let w = SpaceVector::new(vec![i], zero(1)).unwrap();
        assert_eq!(hermitian_form(&v, &w).unwrap(), -i);
        assert_eq!(hermitian_form(&w, &v).unwrap(), i);
    }

    #[test]
    fn causal_classification() {
        let t = tol();
        let light = SpaceVector::new(e(0, 2), e(0, 2)).unwrap();
        assert_eq!(classify_vector(&light, &t).unwrap(), CausalType::LightLike);
        let time = SpaceVector::new(zero(2), e(0, 2)).unwrap();
        assert_eq!(classify_vector(&time, &t).unwrap(), CausalType::TimeLike);
        let space = SpaceVector::new(e(0, 2), zero(2)).unwrap();
        assert_eq!(classify_vector(&space, &t).unwrap(), CausalType::SpaceLike);
        let nothing = SpaceVector::new(zero(2), zero(2)).unwrap();
        assert_eq!(classify_vector(&nothing, &t), Err(Error::ZeroVector));

        // orthogonal light-like pair (e1, e1), (e2, e2) and light-like / time-like pair
        let l2 = SpaceVector::new(e(1, 2), e(1, 2)).unwrap();
        assert_eq!(hermitian_form(&light, &l2).unwrap(), Complex64::new(0.0, 0.0));
        let t2 = SpaceVector::new(zero(2), e(1, 2)).unwrap();
        assert_eq!(hermitian_form(&light, &t2).unwrap(), Complex64::new(0.0, 0.0));
    }
}
