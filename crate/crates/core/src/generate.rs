//! Seeded generators for test and benchmark instances.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ball::Contraction;
use crate::error::{Error, Result};
use crate::linalg::{
    gaussian_matrix, hermitian_eig, random_contraction_with, random_unitary_with, seeded_rng, ComplexMatrix,
    ToleranceConfig,
};
use crate::pseudo_unitary::{from_factors, GIsometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    Random,
    Normal,
    Unitary,
    SelfAdjoint,
}

impl FromStr for GenKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "random" => Ok(Self::Random),
            "normal" => Ok(Self::Normal),
            "unitary" => Ok(Self::Unitary),
            "selfadjoint" | "self-adjoint" | "self_adjoint" => Ok(Self::SelfAdjoint),
            other => Err(format!("unknown kind '{other}'")),
        }
    }
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Random => "random",
            Self::Normal => "normal",
            Self::Unitary => "unitary",
            Self::SelfAdjoint => "selfadjoint",
        })
    }
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::DimensionMismatch("m and n must be positive".into()));
    }
    if m == n {
        return Err(Error::SquareDims(m));
    }
    Ok(())
}

fn check_norm(target_norm: f64) -> Result<()> {
    if !(target_norm > 0.0 && target_norm < 1.0) {
        return Err(Error::NotStrictContraction { norm: target_norm });
    }
    Ok(())
}

/// `W diag(±1) W*` with random `W` and signs.
fn random_involution(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let w = random_unitary_with(rng, n);
    let signs: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
    &(&w * &ComplexMatrix::from_real_diagonal(&signs)) * &w.adjoint()
}

fn random_block(rng: &mut ChaCha8Rng, n: usize, self_adjoint: bool) -> ComplexMatrix {
    if self_adjoint {
        random_involution(rng, n)
    } else {
        random_unitary_with(rng, n)
    }
}

fn block_diag_all(parts: &[ComplexMatrix]) -> ComplexMatrix {
    parts.iter().fold(ComplexMatrix::zeros(0, 0), |acc, p| {
        ComplexMatrix::block_diagonal(&acc, p)
    })
}

/// `k` singular values in `[0.15, target_norm]`, descending, pairwise at least
/// 0.02 apart unless deliberately repeated.
fn draw_singular_values(rng: &mut ChaCha8Rng, k: usize, target_norm: f64) -> Vec<f64> {
    let lo = 0.15f64.min(target_norm / 2.0);
    let mut out: Vec<f64> = Vec::with_capacity(k);
    while out.len() < k {
        if !out.is_empty() && rng.random_bool(0.25) {
            out.push(*out.last().expect("nonempty"));
            continue;
        }
        let s = if out.is_empty() {
            target_norm
        } else {
            rng.random_range(lo..target_norm)
        };
        let gap = (target_norm - lo) / (4.0 * k as f64);
        if out.iter().all(|&x| (x - s).abs() >= gap.min(0.02)) {
            out.push(s);
        }
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// A non-unitary normal element whose `A` has exactly the given nonzero
/// singular values (repeats allowed). `U` and `V` share one random unitary
/// (or involution, when `self_adjoint`) per group of equal singular values.
pub fn normal_with_singular_values(
    m: usize,
    n: usize,
    singular_values: &[f64],
    rng: &mut ChaCha8Rng,
    self_adjoint: bool,
    tol: &ToleranceConfig,
) -> Result<GIsometry> {
    check_dims(m, n)?;
    let k = singular_values.len();
    if k == 0 || k > m.min(n) {
        return Err(Error::DimensionMismatch(format!("rank {k} not in 1..={}", m.min(n))));
    }
    let p = random_unitary_with(rng, m);
    let q = random_unitary_with(rng, n);
    let mut sigma = vec![0.0; m * n];
    for (j, s) in singular_values.iter().enumerate() {
        sigma[j * n + j] = *s;
    }
    let a = &(&p * &ComplexMatrix::from_real(m, n, &sigma)?) * &q.adjoint();

    let mut blocks = Vec::new();
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && singular_values[end] == singular_values[start] {
            end += 1;
        }
        blocks.push(random_block(rng, end - start, self_adjoint));
        start = end;
    }
    let mut u_parts = blocks.clone();
    let mut v_parts = blocks;
    if m > k {
        u_parts.push(random_block(rng, m - k, self_adjoint));
    }
    if n > k {
        v_parts.push(random_block(rng, n - k, self_adjoint));
    }
    let u = &(&p * &block_diag_all(&u_parts)) * &p.adjoint();
    let v = &(&q * &block_diag_all(&v_parts)) * &q.adjoint();
    from_factors(&Contraction::open(a, tol)?, &u, &v, tol)
}

/// Non-unitary normal element with `dim ran C = k`.
pub fn normal_instance(
    m: usize,
    n: usize,
    k: usize,
    seed: u64,
    target_norm: f64,
    self_adjoint: bool,
    tol: &ToleranceConfig,
) -> Result<GIsometry> {
    check_norm(target_norm)?;
    let mut rng = seeded_rng(seed);
    let sv = draw_singular_values(&mut rng, k, target_norm);
    normal_with_singular_values(m, n, &sv, &mut rng, self_adjoint, tol)
}

/// `exp(iH)` for a random Hermitian `H` of operator norm `size`.
fn random_rotation(rng: &mut ChaCha8Rng, n: usize, size: f64, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let g = gaussian_matrix(rng, n, n);
    let h = (&g + &g.adjoint()).scale_real(0.5);
    let h = h.scale_real(size / h.operator_norm().max(f64::MIN_POSITIVE));
    let eig = hermitian_eig(&h, tol)?;
    let phases: Vec<Complex64> = eig.values.iter().map(|l| Complex64::from_polar(1.0, *l)).collect();
    Ok(&(&eig.vectors * &ComplexMatrix::from_diagonal(&phases)) * &eig.vectors.adjoint())
}

/// A normal instance with `U` replaced by `U·exp(iH)`, redrawn until
/// `‖TT* − T*T‖ ≥ 1e-3`.
pub fn perturbed_instance(
    m: usize,
    n: usize,
    k: usize,
    seed: u64,
    target_norm: f64,
    tol: &ToleranceConfig,
) -> Result<GIsometry> {
    check_norm(target_norm)?;
    let mut rng = seeded_rng(seed);
    loop {
        let sv = draw_singular_values(&mut rng, k, target_norm);
        let base = normal_with_singular_values(m, n, &sv, &mut rng, false, tol)?;
        let f = crate::pseudo_unitary::factorize(&base, tol)?;
        let size = rng.random_range(0.3..0.5);
        let u = f.u() * &random_rotation(&mut rng, m, size, tol)?;
        let t = from_factors(f.a(), &u, f.v(), tol)?;
        let mat = t.matrix();
        let comm = (&(mat * &mat.adjoint()) - &(&mat.adjoint() * mat)).operator_norm();
        if comm >= 1e-3 {
            return Ok(t);
        }
    }
}

/// Element of the requested class. `Normal` and `SelfAdjoint` draw the rank
/// of `C` uniformly from `1..=min(m, n)`.
pub fn generate(
    kind: GenKind,
    m: usize,
    n: usize,
    seed: u64,
    target_norm: f64,
    tol: &ToleranceConfig,
) -> Result<GIsometry> {
    check_dims(m, n)?;
    check_norm(target_norm)?;
    let mut rng = seeded_rng(seed);
    match kind {
        GenKind::Unitary => {
            let u = random_unitary_with(&mut rng, m);
            let v = random_unitary_with(&mut rng, n);
            from_factors(&Contraction::zero(m, n), &u, &v, tol)
        }
        GenKind::Random => {
            let a = random_contraction_with(&mut rng, m, n, target_norm);
            let u = random_unitary_with(&mut rng, m);
            let v = random_unitary_with(&mut rng, n);
            from_factors(&Contraction::open(a, tol)?, &u, &v, tol)
        }
        GenKind::Normal | GenKind::SelfAdjoint => {
            let k = rng.random_range(1..=m.min(n));
            let sv = draw_singular_values(&mut rng, k, target_norm);
            normal_with_singular_values(m, n, &sv, &mut rng, kind == GenKind::SelfAdjoint, tol)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;
    use crate::spectral::{decompose, rank_of_c};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn kinds_parse_and_print() {
        for kind in [GenKind::Random, GenKind::Normal, GenKind::Unitary, GenKind::SelfAdjoint] {
            assert_eq!(kind.to_string().parse::<GenKind>().unwrap(), kind);
        }
        assert!("hermitian".parse::<GenKind>().is_err());
    }

    #[test]
    fn square_dims_rejected() {
        assert!(matches!(
            generate(GenKind::Normal, 2, 2, 0, 0.8, &tol()),
            Err(Error::SquareDims(2))
        ));
    }

    #[test]
    fn generated_classes() {
        let t = tol();
        for seed in 0..10 {
            let c = classify(&generate(GenKind::Unitary, 3, 2, seed, 0.8, &t).unwrap(), &t).unwrap();
            assert!(c.is_unitary);
            let c = classify(&generate(GenKind::Normal, 3, 2, seed, 0.8, &t).unwrap(), &t).unwrap();
            assert!(c.is_non_unitary_normal);
            let c = classify(&generate(GenKind::SelfAdjoint, 2, 4, seed, 0.8, &t).unwrap(), &t).unwrap();
            assert!(c.is_self_adjoint && c.is_non_unitary_normal);
            let c = classify(&generate(GenKind::Random, 3, 2, seed, 0.8, &t).unwrap(), &t).unwrap();
            assert!(!c.is_normal);
        }
    }

    #[test]
    fn requested_rank_is_realized() {
        let t = tol();
        for k in 1..=4 {
            let g = normal_instance(6, 4, k, k as u64, 0.9, false, &t).unwrap();
            let f = crate::pseudo_unitary::factorize(&g, &t).unwrap();
            assert_eq!(rank_of_c(&f, &t).unwrap(), k);
            assert_eq!(decompose(&f, &t).unwrap().k, k);
        }
    }

    #[test]
    fn perturbed_is_not_normal() {
        let t = tol();
        for seed in 0..5 {
            let g = perturbed_instance(4, 3, 2, seed, 0.8, &t).unwrap();
            assert!(!classify(&g, &t).unwrap().is_normal);
        }
    }

    #[test]
    fn deterministic() {
        let t = tol();
        let a = generate(GenKind::Normal, 5, 3, 42, 0.7, &t).unwrap();
        let b = generate(GenKind::Normal, 5, 3, 42, 0.7, &t).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }
}
