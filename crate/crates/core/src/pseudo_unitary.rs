//! The group of invertible operators on `H ⊕ K` that preserve the indefinite
//! form `⟨h₁,h₂⟩ − ⟨k₁,k₂⟩`, and its action on the matrix ball by linear
//! fractional maps `A ↦ (T11 A + T12)(T21 A + T22)^{−1}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ball::Contraction;
use crate::error::{Error, Result};
use crate::linalg::{
    min_singular_value, operator_norm, positive_inv_sqrt, positive_sqrt, ComplexMatrix, ToleranceConfig,
};

/// Operator-norm residuals of the six defining relations, in order:
/// `T11*T11 − T21*T21 = I`, `T22*T22 − T12*T12 = I`, `T12*T11 − T22*T21 = 0`,
/// `T11T11* − T12T12* = I`, `T22T22* − T21T21* = I`, `T21T11* − T22T12* = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub residuals: [f64; 6],
}

impl RelationReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_member(&self, tol: &ToleranceConfig) -> bool {
        self.residuals.iter().all(|r| *r <= tol.eq_tol)
    }
}

pub fn verify_relations(t: &ComplexMatrix, m: usize, n: usize) -> Result<RelationReport> {
    if t.rows() != m + n || t.cols() != m + n {
        return Err(Error::DimensionMismatch(format!(
            "expected a {0}x{0} matrix for m = {m}, n = {n}, got {1}x{2}",
            m + n,
            t.rows(),
            t.cols()
        )));
    }
    let b = t.block(0, 0, m, m);
    let c = t.block(0, m, m, n);
    let d = t.block(m, 0, n, m);
    let e = t.block(m, m, n, n);
    let (bs, cs, ds, es) = (b.adjoint(), c.adjoint(), d.adjoint(), e.adjoint());
    let residuals = [
        (&(&bs * &b) - &(&ds * &d)).identity_residual(),
        (&(&es * &e) - &(&cs * &c)).identity_residual(),
        operator_norm(&(&(&cs * &b) - &(&es * &d))),
        (&(&b * &bs) - &(&c * &cs)).identity_residual(),
        (&(&e * &es) - &(&d * &ds)).identity_residual(),
        operator_norm(&(&(&d * &bs) - &(&e * &cs))),
    ];
    Ok(RelationReport { residuals })
}

/// A verified element of the group, stored as its full `(m+n)x(m+n)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GIsometry {
    m: usize,
    n: usize,
    matrix: ComplexMatrix,
}

impl GIsometry {
    /// Verifies the group relations; non-members are rejected with their residuals.
    pub fn new(matrix: ComplexMatrix, m: usize, n: usize, tol: &ToleranceConfig) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::DimensionMismatch("m and n must be positive".into()));
        }
        let report = verify_relations(&matrix, m, n)?;
        if !report.is_member(tol) {
            return Err(Error::NotAMember(report));
        }
        let t = Self { m, n, matrix };
        // implied by the relations; a cheap numerical confirmation
        if min_singular_value(&t.t11()) < 0.5 || min_singular_value(&t.t22()) < 0.5 {
            return Err(Error::NotAMember(report));
        }
        Ok(t)
    }

    pub fn identity(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            matrix: ComplexMatrix::identity(m + n),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn t11(&self) -> ComplexMatrix {
        self.matrix.block(0, 0, self.m, self.m)
    }

    pub fn t12(&self) -> ComplexMatrix {
        self.matrix.block(0, self.m, self.m, self.n)
    }

    pub fn t21(&self) -> ComplexMatrix {
        self.matrix.block(self.m, 0, self.n, self.m)
    }

    pub fn t22(&self) -> ComplexMatrix {
        self.matrix.block(self.m, self.m, self.n, self.n)
    }

    /// `c · T` for a unit scalar `c`; the result stays in the group.
    pub fn with_phase(&self, phase: Complex64) -> Self {
        Self {
            m: self.m,
            n: self.n,
            matrix: self.matrix.scale(phase / phase.norm()),
        }
    }

    pub fn to_json(&self) -> GIsometryJson {
        GIsometryJson {
            m: self.m,
            n: self.n,
            matrix: self.matrix.clone(),
        }
    }
}

/// JSON form `{"m": m, "n": n, "matrix": <matrix>}`; not verified until
/// converted with [`GIsometryJson::verify`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GIsometryJson {
    pub m: usize,
    pub n: usize,
    pub matrix: ComplexMatrix,
}

impl GIsometryJson {
    pub fn verify(self, tol: &ToleranceConfig) -> Result<GIsometry> {
        GIsometry::new(self.matrix, self.m, self.n, tol)
    }
}

/// The factored form `[[B U, C V], [C* U, E V]]` with
/// `B = (I−AA*)^{−1/2}`, `C = (I−AA*)^{−1/2} A`, `E = (I−A*A)^{−1/2}`.
#[derive(Debug, Clone)]
pub struct FactoredIsometry {
    a: Contraction,
    u: ComplexMatrix,
    v: ComplexMatrix,
    bpos: ComplexMatrix,
    cpos: ComplexMatrix,
    epos: ComplexMatrix,
}

impl FactoredIsometry {
    pub fn new(a: Contraction, u: ComplexMatrix, v: ComplexMatrix, tol: &ToleranceConfig) -> Result<Self> {
        if !a.is_strict() {
            return Err(Error::NotStrictContraction { norm: a.norm() });
        }
        let (m, n) = (a.rows(), a.cols());
        if u.rows() != m || !u.is_square() || v.rows() != n || !v.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "A is {m}x{n} but U is {}x{} and V is {}x{}",
                u.rows(),
                u.cols(),
                v.rows(),
                v.cols()
            )));
        }
        for w in [&u, &v] {
            let residual = w.unitarity_residual();
            if residual > tol.eq_tol {
                return Err(Error::NotUnitary { residual });
            }
        }
        let am = a.matrix();
        let bpos = positive_inv_sqrt(&(ComplexMatrix::identity(m) - &(am * &am.adjoint())), tol)?;
        let epos = positive_inv_sqrt(&(ComplexMatrix::identity(n) - &(&am.adjoint() * am)), tol)?;
        let cpos = &bpos * am;
        Ok(Self {
            a,
            u,
            v,
            bpos,
            cpos,
            epos,
        })
    }

    pub fn a(&self) -> &Contraction {
        &self.a
    }

    pub fn u(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    /// `(I−AA*)^{−1/2}`
    pub fn bpos(&self) -> &ComplexMatrix {
        &self.bpos
    }

    /// `(I−AA*)^{−1/2} A`
    pub fn cpos(&self) -> &ComplexMatrix {
        &self.cpos
    }

    /// `(I−A*A)^{−1/2}`
    pub fn epos(&self) -> &ComplexMatrix {
        &self.epos
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    /// Residuals of `B² − CC* = I`, `E² − C*C = I`, `BC = CE`.
    pub fn positive_relations(&self) -> [f64; 3] {
        let (b, c, e) = (&self.bpos, &self.cpos, &self.epos);
        [
            (&(b * b) - &(c * &c.adjoint())).identity_residual(),
            (&(e * e) - &(&c.adjoint() * c)).identity_residual(),
            operator_norm(&(&(b * c) - &(c * e))),
        ]
    }

    /// The full group element.
    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_blocks(
            &(&self.bpos * &self.u),
            &(&self.cpos * &self.v),
            &(&self.cpos.adjoint() * &self.u),
            &(&self.epos * &self.v),
        )
    }

    pub fn to_json(&self) -> FactoredJson {
        FactoredJson {
            a: self.a.matrix().clone(),
            u: self.u.clone(),
            v: self.v.clone(),
        }
    }
}

/// JSON form `{"A": ..., "U": ..., "V": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactoredJson {
    #[serde(rename = "A")]
    pub a: ComplexMatrix,
    #[serde(rename = "U")]
    pub u: ComplexMatrix,
    #[serde(rename = "V")]
    pub v: ComplexMatrix,
}

/// Builds `[[B U, C V], [C* U, E V]]` from a strict contraction and two unitaries.
pub fn from_factors(a: &Contraction, u: &ComplexMatrix, v: &ComplexMatrix, tol: &ToleranceConfig) -> Result<GIsometry> {
    if a.rows() == a.cols() {
        return Err(Error::SquareDims(a.rows()));
    }
    let f = FactoredIsometry::new(a.clone(), u.clone(), v.clone(), tol)?;
    GIsometry::new(f.matrix(), f.m(), f.n(), tol)
}

/// `T^{−1} = [[T11*, −T21*], [−T12*, T22*]]`.
pub fn inverse(t: &GIsometry) -> GIsometry {
    let matrix = ComplexMatrix::from_blocks(
        &t.t11().adjoint(),
        &-&t.t21().adjoint(),
        &-&t.t12().adjoint(),
        &t.t22().adjoint(),
    );
    GIsometry { m: t.m, n: t.n, matrix }
}

/// Recovers `(A, U, V)` with `A = T12 T22^{−1}`; any global phase of `T`
/// ends up multiplied into both `U` and `V`.
pub fn factorize(t: &GIsometry, tol: &ToleranceConfig) -> Result<FactoredIsometry> {
    let (m, n) = (t.m, t.n);
    let a = &t.t12() * &t.t22().inverse()?;
    let a = Contraction::open(a, tol)?;
    let am = a.matrix();
    let left = ComplexMatrix::identity(m) - &(am * &am.adjoint());
    let right = ComplexMatrix::identity(n) - &(&am.adjoint() * am);
    let u = &positive_sqrt(&left, tol)? * &t.t11();
    let v = &positive_sqrt(&right, tol)? * &t.t22();
    let relaxed = ToleranceConfig {
        eq_tol: 10.0 * tol.eq_tol,
        ..*tol
    };
    let f = FactoredIsometry::new(a, u, v, &relaxed).map_err(|e| match e {
        Error::NotUnitary { residual } => Error::ReconstructionFailure { residual },
        other => other,
    })?;
    let residual = f.matrix().distance(t.matrix());
    if residual > 100.0 * tol.eq_tol {
        return Err(Error::ReconstructionFailure { residual });
    }
    Ok(f)
}

/// `(T11 A + T12)(T21 A + T22)^{−1}` on an arbitrary `m x n` matrix.
pub fn act_matrix(t: &GIsometry, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows() != t.m || a.cols() != t.n {
        return Err(Error::DimensionMismatch(format!(
            "isometry acts on {}x{} matrices, got {}x{}",
            t.m,
            t.n,
            a.rows(),
            a.cols()
        )));
    }
    let num = &t.t11() * a + &t.t12();
    let den = &t.t21() * a + &t.t22();
    let den_inv = den.inverse().map_err(|_| Error::SingularDenominator)?;
    ComplexMatrix::from_inner((&num * &den_inv).into_inner()).map_err(|_| Error::SingularDenominator)
}

/// The action on the ball; closed-ball inputs are admitted.
pub fn act(t: &GIsometry, a: &Contraction, tol: &ToleranceConfig) -> Result<Contraction> {
    let image = act_matrix(t, a.matrix())?;
    let out = Contraction::classify(image, tol)?;
    Ok(out)
}

pub fn compose(t1: &GIsometry, t2: &GIsometry, tol: &ToleranceConfig) -> Result<GIsometry> {
    if (t1.m, t1.n) != (t2.m, t2.n) {
        return Err(Error::DimensionMismatch(format!(
            "cannot compose ({}, {}) with ({}, {})",
            t1.m, t1.n, t2.m, t2.n
        )));
    }
    GIsometry::new(&t1.matrix * &t2.matrix, t1.m, t1.n, tol)
}

/// True iff `T = c I` with `|c| = 1`.
pub fn is_center(t: &GIsometry, tol: &ToleranceConfig) -> bool {
    let c = t.matrix.get(0, 0);
    (c.norm() - 1.0).abs() <= tol.eq_tol && operator_norm(&t.matrix.shift(c)) <= tol.eq_tol
}
