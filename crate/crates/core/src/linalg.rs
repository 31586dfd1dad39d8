//! Dense complex linear algebra kernel.
//!
//! Everything in the crate is built on [`ComplexMatrix`], a thin newtype over
//! `nalgebra::DMatrix<Complex64>` that guarantees finite entries at
//! construction. Hermitian eigendecomposition, square roots of positive
//! matrices, eigenvalue clustering and seeded random generators live here;
//! general (non-Hermitian) eigenvalues are obtained from a complex Schur form.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::linalg::{Schur, SymmetricEigen, SVD};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every operation in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Entrywise / operator-norm equality threshold.
    pub eq_tol: f64,
    /// Relative threshold for grouping eigenvalues.
    pub cluster_rel_tol: f64,
    /// Threshold for deciding an eigenvalue of `E` equals 1.
    pub unit_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eq_tol: 1e-9,
            cluster_rel_tol: 1e-8,
            unit_tol: 1e-8,
        }
    }
}

impl ToleranceConfig {
    /// Builds a config with the given equality tolerance and default grouping thresholds.
    pub fn with_eq_tol(eq_tol: f64) -> Self {
        Self {
            eq_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.eq_tol, self.cluster_rel_tol, self.unit_tol]
            .iter()
            .all(|t| t.is_finite() && *t >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(
                "tolerances must be finite and nonnegative".into(),
            ))
        }
    }

    /// Threshold used when matching eigenvectors and subspaces of a
    /// non-Hermitian matrix, whose accuracy is worse than `eq_tol`.
    pub fn subspace_tol(&self) -> f64 {
        (1e3 * self.eq_tol).max(1e-10)
    }
}

/// Dense complex matrix, row-major in its JSON form.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix {}x{} ", self.rows(), self.cols())?;
        f.debug_list()
            .entries((0..self.rows()).map(|i| {
                (0..self.cols())
                    .map(|j| {
                        let z = self.0[(i, j)];
                        (z.re, z.im)
                    })
                    .collect::<Vec<_>>()
            }))
            .finish()
    }
}

impl ComplexMatrix {
    pub fn from_inner(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(Self(inner))
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn from_row_slice(rows: usize, cols: usize, data: &[Complex64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidShape {
                rows,
                cols,
                expected: rows * cols,
                got: data.len(),
            });
        }
        Self::from_inner(DMatrix::from_row_slice(rows, cols, data))
    }

    /// Real matrix from row-major entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        let data: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_row_slice(rows, cols, &data)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        Self::from_inner(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    /// Column vector.
    pub fn column_vector(entries: &[Complex64]) -> Self {
        Self(DMatrix::from_column_slice(entries.len(), 1, entries))
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Self {
        Self(DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i]))
    }

    /// Assembles `[[t11, t12], [t21, t22]]`.
    pub fn from_blocks(t11: &Self, t12: &Self, t21: &Self, t22: &Self) -> Self {
        let (m, n) = (t11.rows(), t22.rows());
        assert_eq!(t11.cols(), m);
        assert_eq!(t22.cols(), n);
        assert_eq!((t12.rows(), t12.cols()), (m, n));
        assert_eq!((t21.rows(), t21.cols()), (n, m));
        let mut out = DMatrix::zeros(m + n, m + n);
        out.view_mut((0, 0), (m, m)).copy_from(&t11.0);
        out.view_mut((0, m), (m, n)).copy_from(&t12.0);
        out.view_mut((m, 0), (n, m)).copy_from(&t21.0);
        out.view_mut((m, m), (n, n)).copy_from(&t22.0);
        Self(out)
    }

    /// Block-diagonal matrix `diag(a, b)`.
    pub fn block_diagonal(a: &Self, b: &Self) -> Self {
        Self::from_blocks(a, &Self::zeros(a.rows(), b.cols()), &Self::zeros(b.rows(), a.cols()), b)
    }

    /// Horizontal concatenation; every part must have `rows` rows.
    pub fn hstack(rows: usize, parts: &[&Self]) -> Self {
        let cols: usize = parts.iter().map(|p| p.cols()).sum();
        let mut out = DMatrix::zeros(rows, cols);
        let mut c0 = 0;
        for p in parts {
            assert_eq!(p.rows(), rows);
            out.view_mut((0, c0), (rows, p.cols())).copy_from(&p.0);
            c0 += p.cols();
        }
        Self(out)
    }

    /// Vertical concatenation; every part must have `cols` columns.
    pub fn vstack(cols: usize, parts: &[&Self]) -> Self {
        let rows: usize = parts.iter().map(|p| p.rows()).sum();
        let mut out = DMatrix::zeros(rows, cols);
        let mut r0 = 0;
        for p in parts {
            assert_eq!(p.cols(), cols);
            out.view_mut((r0, 0), (p.rows(), cols)).copy_from(&p.0);
            r0 += p.rows();
        }
        Self(out)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn as_inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    /// Copy of the `nr x nc` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self(self.0.view((r0, c0), (nr, nc)).into_owned())
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn columns_range(&self, start: usize, count: usize) -> Self {
        self.block(0, start, self.rows(), count)
    }

    /// Row-major entries.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        (0..self.rows())
            .flat_map(|i| (0..self.cols()).map(move |j| (i, j)))
            .map(|(i, j)| self.0[(i, j)])
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn operator_norm(&self) -> f64 {
        operator_norm(self)
    }

    /// `self - s I`.
    pub fn shift(&self, s: Complex64) -> Self {
        assert!(self.is_square());
        let mut out = self.0.clone();
        for i in 0..self.rows() {
            out[(i, i)] -= s;
        }
        Self(out)
    }

    /// `‖self − other‖` in operator norm.
    pub fn distance(&self, other: &Self) -> f64 {
        operator_norm(&(self - other))
    }

    /// Operator-norm distance of `self` from the identity.
    pub fn identity_residual(&self) -> f64 {
        operator_norm(&self.shift(Complex64::new(1.0, 0.0)))
    }

    /// Operator-norm residual of `self* self − I`.
    pub fn unitarity_residual(&self) -> f64 {
        (&self.adjoint() * self).identity_residual()
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let inv = self.0.clone().lu().try_inverse().ok_or(Error::Singular)?;
        Self::from_inner(inv).map_err(|_| Error::Singular)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols());
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            rows: self.rows(),
            cols: self.cols(),
            data: self.to_row_major().iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        let data: Vec<Complex64> = raw.data.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        ComplexMatrix::from_row_slice(raw.rows, raw.cols, &data).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Add<&ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 + &rhs.0)
    }
}

impl Sub<&ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 - &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

pub fn adjoint(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

/// Largest singular value, as the square root of the largest eigenvalue of
/// the smaller Gram matrix.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    let gram = if m.cols() <= m.rows() {
        m.0.adjoint() * &m.0
    } else {
        &m.0 * m.0.adjoint()
    };
    let eig = SymmetricEigen::new(hermitian_part(&gram));
    eig.eigenvalues.iter().copied().fold(0.0, f64::max).sqrt()
}

fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Eigenvalues in ascending order with a unitary matrix of eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

pub fn hermitian_eig(h: &ComplexMatrix, tol: &ToleranceConfig) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "Hermitian eigendecomposition needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let residual = operator_norm(&(h - &h.adjoint()));
    if residual > tol.eq_tol {
        return Err(Error::NotHermitian { residual });
    }
    let eig = SymmetricEigen::new(hermitian_part(&h.0));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(h.rows(), h.rows(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen {
        values,
        vectors: ComplexMatrix(vectors),
    })
}

/// `W diag(f(λ)) W*` for a Hermitian eigendecomposition.
fn spectral_map(eig: &HermitianEigen, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let d: Vec<f64> = eig.values.iter().map(|&v| f(v)).collect();
    let w = &eig.vectors;
    let scaled = ComplexMatrix(DMatrix::from_fn(w.rows(), w.cols(), |r, c| w.0[(r, c)] * d[c]));
    &scaled * &w.adjoint()
}

/// Positive semidefinite square root.
pub fn positive_sqrt(p: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(p, tol)?;
    if let Some(&min) = eig.values.first() {
        if min < -tol.eq_tol {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
    }
    Ok(spectral_map(&eig, |v| v.max(0.0).sqrt()))
}

/// Positive square root of the inverse of a positive definite matrix.
pub fn positive_inv_sqrt(p: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(p, tol)?;
    if let Some(&min) = eig.values.first() {
        if min < -tol.eq_tol {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        if min <= tol.eq_tol {
            return Err(Error::Singular);
        }
    }
    Ok(spectral_map(&eig, |v| 1.0 / v.sqrt()))
}

/// Greedy grouping of ascending values; a value joins the current group when
/// it lies within `cluster_rel_tol · max(1, |leader|)` of the group's first
/// element.
pub fn cluster_eigenvalues(values: &[f64], cluster_rel_tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut leader = f64::NAN;
    for (i, &v) in values.iter().enumerate() {
        let joins = !groups.is_empty() && (v - leader).abs() <= cluster_rel_tol * leader.abs().max(1.0);
        if joins {
            groups.last_mut().expect("nonempty").push(i);
        } else {
            leader = v;
            groups.push(vec![i]);
        }
    }
    groups
}

/// Single-linkage grouping of complex values: `i` and `j` share a group when
/// `|v_i − v_j| ≤ rel_tol · max(1, |v_i|)` along some chain.
pub fn cluster_complex(values: &[Complex64], rel_tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = values[i].norm().max(values[j].norm()).max(1.0);
            if (values[i] - values[j]).norm() <= rel_tol * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Complex Schur form `M = Q R Q*` with `R` upper triangular.
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub q: ComplexMatrix,
    pub r: ComplexMatrix,
}

impl SchurForm {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.r.rows()).map(|i| self.r.get(i, i)).collect()
    }

    /// Size of the strictly upper part of `R`; zero exactly for normal input.
    pub fn departure_from_normality(&self) -> f64 {
        let n = self.r.rows();
        let mut acc = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                acc += self.r.get(i, j).norm_sqr();
            }
        }
        acc.sqrt()
    }
}

pub fn schur(m: &ComplexMatrix) -> Result<SchurForm> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("Schur form of a non-square matrix".into()));
    }
    // exactly repeated eigenvalues can stall deflation at machine epsilon
    let s = [(1.0, 2_000), (8.0, 2_000), (64.0, 2_000), (512.0, 100_000)]
        .iter()
        .find_map(|&(f, iters)| Schur::try_new(m.0.clone(), f * f64::EPSILON, iters))
        .ok_or(Error::NoConvergence)?;
    let (q, r) = s.unpack();
    // nalgebra leaves rounding noise below the diagonal
    let r = DMatrix::from_fn(r.nrows(), r.ncols(), |i, j| {
        if i > j {
            Complex64::new(0.0, 0.0)
        } else {
            r[(i, j)]
        }
    });
    Ok(SchurForm {
        q: ComplexMatrix::from_inner(q)?,
        r: ComplexMatrix::from_inner(r)?,
    })
}

/// Eigenvalues of a general square matrix.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    Ok(schur(m)?.eigenvalues())
}

/// Eigenpairs of a normal matrix read off its Schur form, sorted by
/// ascending argument. Fails when the Schur factor is not diagonal, i.e. when
/// the input is not normal within `100 · eq_tol · max(1, ‖M‖)`.
pub fn normal_eig(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<(Vec<Complex64>, ComplexMatrix)> {
    let n = m.rows();
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let s = schur(m)?;
    let scale = m.operator_norm().max(1.0);
    let departure = s.departure_from_normality();
    if departure > 100.0 * tol.eq_tol * scale {
        return Err(Error::DegenerateBlockGauge { residual: departure });
    }
    let values = s.eigenvalues();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].arg().total_cmp(&values[j].arg()));
    let vals: Vec<Complex64> = order.iter().map(|&i| values[i]).collect();
    let cols: Vec<Vec<Complex64>> = order.iter().map(|&i| s.q.column(i)).collect();
    Ok((vals, ComplexMatrix::from_columns(n, &cols)))
}

/// Distance between two multisets of complex numbers: the largest gap of a
/// greedy nearest-neighbour matching, taken in both directions. Infinite when
/// the sizes differ.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    fn one_way(a: &[Complex64], b: &[Complex64]) -> f64 {
        let mut used = vec![false; b.len()];
        let mut worst = 0.0f64;
        for x in a {
            let (best, d) = b
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, y)| (j, (x - y).norm()))
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .expect("equal sizes");
            used[best] = true;
            worst = worst.max(d);
        }
        worst
    }
    one_way(a, b).max(one_way(b, a))
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    let svd = SVD::new(m.0.clone(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn min_singular_value(m: &ComplexMatrix) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Orthonormal basis (as columns) of the right null space: right singular
/// vectors whose singular value is at most `threshold`.
pub fn null_space(m: &ComplexMatrix, threshold: f64) -> ComplexMatrix {
    let cols = m.cols();
    if cols == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    if m.rows() == 0 {
        return ComplexMatrix::identity(cols);
    }
    // pad to at least square so the thin SVD yields a full right basis
    let padded = if m.rows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.rows(), cols)).copy_from(&m.0);
        p
    } else {
        m.0.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= threshold)
        .collect();
    ComplexMatrix(DMatrix::from_fn(cols, keep.len(), |r, c| v_t[(keep[c], r)].conj()))
}

/// Orthonormal basis of the orthogonal complement of the column span of `q`.
pub fn orthogonal_complement(q: &ComplexMatrix, threshold: f64) -> ComplexMatrix {
    if q.cols() == 0 {
        return ComplexMatrix::identity(q.rows());
    }
    null_space(&q.adjoint(), threshold)
}

/// Orthonormal basis of the column span (columns with singular value above `threshold`).
pub fn orthonormal_basis(m: &ComplexMatrix, threshold: f64) -> ComplexMatrix {
    if m.cols() == 0 || m.rows() == 0 {
        return ComplexMatrix::zeros(m.rows(), 0);
    }
    let svd = SVD::new(m.0.clone(), true, false);
    let u = svd.u.expect("requested left singular vectors");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > threshold)
        .collect();
    ComplexMatrix(DMatrix::from_fn(m.rows(), keep.len(), |r, c| u[(r, keep[c])]))
}

/// Orthogonal projector `Q Q*` for a matrix with orthonormal columns.
pub fn projector(q: &ComplexMatrix) -> ComplexMatrix {
    q * &q.adjoint()
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    // row-major draw order keeps streams stable if the storage order changes
    let data: Vec<Complex64> = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    ComplexMatrix(DMatrix::from_row_slice(rows, cols, &data))
}

/// Haar-style random unitary drawn from `rng`.
pub fn random_unitary_with<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n);
    let qr = g.0.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix the phase so diag(R) is nonnegative real
    let phases: Vec<Complex64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect();
    ComplexMatrix(DMatrix::from_fn(n, n, |i, j| q[(i, j)] * phases[j]))
}

pub fn random_unitary(seed: u64, n: usize) -> ComplexMatrix {
    random_unitary_with(&mut ChaCha8Rng::seed_from_u64(seed), n)
}

/// Gaussian matrix rescaled to operator norm `target_norm`.
pub fn random_contraction_with<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize, target_norm: f64) -> ComplexMatrix {
    let g = gaussian_matrix(rng, m, n);
    let norm = operator_norm(&g);
    g.scale_real(target_norm / norm)
}

pub fn random_contraction(seed: u64, m: usize, n: usize, target_norm: f64) -> ComplexMatrix {
    random_contraction_with(&mut ChaCha8Rng::seed_from_u64(seed), m, n, target_norm)
}

/// Deterministic RNG used throughout the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `⟨x, y⟩`, linear in `x` and conjugate-linear in `y`.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
