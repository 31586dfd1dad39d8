//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::Instant;

use cartan_core::classify::{normality_check, s_block_eigen, spectrum_normal};
use cartan_core::fixed_points::{detect_generic, enumerate_generic, Conclusion};
use cartan_core::generate::{generate, normal_instance, perturbed_instance, GenKind};
use cartan_core::linalg::{
    eigenvalues, min_singular_value, multiset_distance, random_contraction, random_contraction_with, random_unitary,
    seeded_rng, ComplexMatrix,
};
use cartan_core::spectral::verify_decomposition;
use cartan_core::{
    act, caratheodory_distance, compose, decompose, factorize, from_factors, verify_relations, Contraction, GIsometry,
    Result, ToleranceConfig,
};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(id: usize, title: &str, body: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let outcome = body().unwrap_or_else(|e| Outcome {
        pass: false,
        detail: format!("error: {e}"),
    });
    println!(
        "{} [{id:>2}] {title}: {} ({:.2} s)",
        if outcome.pass { "PASS" } else { "FAIL" },
        outcome.detail,
        start.elapsed().as_secs_f64()
    );
    outcome.pass
}

const SHAPES: [(usize, usize); 4] = [(2, 1), (3, 2), (5, 3), (8, 5)];

fn random_element(seed: u64, m: usize, n: usize, tol: &ToleranceConfig) -> Result<GIsometry> {
    let norm = 0.1 + 0.85 * seeded_rng(seed ^ 0x5eed).random::<f64>();
    generate(GenKind::Random, m, n, seed, norm, tol)
}

fn random_point(seed: u64, m: usize, n: usize, max_norm: f64, tol: &ToleranceConfig) -> Result<Contraction> {
    let norm = max_norm * seeded_rng(seed ^ 0xba11).random::<f64>();
    Contraction::open(random_contraction(seed, m, n, norm.max(1e-3)), tol)
}

fn membership(tol: &ToleranceConfig) -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..200u64 {
        let (m, n) = SHAPES[(i % 4) as usize];
        let norm = 0.05 + 0.9 * seeded_rng(i).random::<f64>();
        let a = Contraction::open(random_contraction(1000 + i, m, n, norm), tol)?;
        let t = from_factors(&a, &random_unitary(2000 + i, m), &random_unitary(3000 + i, n), tol)?;
        worst = worst.max(verify_relations(t.matrix(), m, n)?.max_residual());
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        pass: worst <= 1e-9 && secs < 10.0,
        detail: format!("200 elements, max residual {worst:.2e}, {secs:.2} s (limit 1e-9, 10 s)"),
    })
}

fn homomorphism(tol: &ToleranceConfig) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let (m, n) = SHAPES[(i % 4) as usize];
        let t1 = random_element(10 * i, m, n, tol)?;
        let t2 = random_element(10 * i + 1, m, n, tol)?;
        let a = random_point(10 * i + 2, m, n, 0.9, tol)?;
        let lhs = act(&compose(&t1, &t2, tol)?, &a, tol)?;
        let rhs = act(&t1, &act(&t2, &a, tol)?, tol)?;
        worst = worst.max(lhs.matrix().distance(rhs.matrix()));
    }
    Ok(Outcome {
        pass: worst <= 1e-7,
        detail: format!("100 triples, max deviation {worst:.2e} (limit 1e-7)"),
    })
}

fn invariance(tol: &ToleranceConfig) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let (m, n) = SHAPES[(i % 4) as usize];
        let h = random_element(5000 + 10 * i, m, n, tol)?;
        let a1 = random_point(5001 + 10 * i, m, n, 0.8, tol)?;
        let a2 = random_point(5002 + 10 * i, m, n, 0.8, tol)?;
        let before = caratheodory_distance(&a1, &a2, tol)?;
        let after = caratheodory_distance(&act(&h, &a1, tol)?, &act(&h, &a2, tol)?, tol)?;
        worst = worst.max((before - after).abs());
    }
    Ok(Outcome {
        pass: worst <= 1e-7,
        detail: format!("100 samples, max change {worst:.2e} (limit 1e-7)"),
    })
}

/// Shapes with `m + n ≤ 16`, `m ≠ n` and `min(m, n) ≥ k`.
fn shape_for(i: u64, k: usize) -> (usize, usize) {
    let mut rng = seeded_rng(0x5a9e ^ i);
    loop {
        let m = rng.random_range(k..=10);
        let n = rng.random_range(k..=10);
        if m != n && m + n <= 16 {
            return (m, n);
        }
    }
}

fn normality_crosscheck(tol: &ToleranceConfig) -> Result<Outcome> {
    let mut disagreements = 0;
    let mut wrong = 0;
    for i in 0..200u64 {
        let k = 1 + (i as usize % 4);
        let (m, n) = shape_for(i, k);
        let normal = i < 100;
        let t = if normal {
            normal_instance(m, n, k, 7000 + i, 0.9, false, tol)?
        } else {
            perturbed_instance(m, n, k, 7000 + i, 0.9, tol)?
        };
        let check = normality_check(&t, tol)?;
        if check.brute_force != check.structural {
            disagreements += 1;
        }
        if check.is_normal != normal {
            wrong += 1;
        }
    }
    Ok(Outcome {
        pass: disagreements == 0 && wrong == 0,
        detail: format!("200 instances, {disagreements} disagreements, {wrong} wrong verdicts"),
    })
}

fn spectral_identities(tol: &ToleranceConfig) -> Result<Outcome> {
    let (mut pair, mut other) = (0.0f64, 0.0f64);
    let mut count = 0;
    for i in 0..200u64 {
        let t = if i < 100 {
            let (m, n) = SHAPES[(i % 4) as usize];
            random_element(9000 + i, m, n, tol)?
        } else {
            let k = 1 + (i as usize % 4);
            let (m, n) = shape_for(i, k);
            normal_instance(m, n, k, 9000 + i, 0.9, false, tol)?
        };
        let f = factorize(&t, tol)?;
        let s = decompose(&f, tol)?;
        let report = verify_decomposition(&f, &s);
        for (name, r) in &report.residuals {
            if name == "pair_identity" {
                pair = pair.max(*r);
            } else {
                other = other.max(*r);
            }
        }
        count += 1;
    }
    Ok(Outcome {
        pass: pair <= 1e-9 && other <= 1e-8,
        detail: format!(
            "{count} decompositions, a²−1−δ² max {pair:.2e} (limit 1e-9), other residuals max {other:.2e} (limit 1e-8)"
        ),
    })
}

fn block_eigen(tol: &ToleranceConfig) -> Result<Outcome> {
    let mut rng = seeded_rng(11);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let a: f64 = rng.random_range(1.01..5.0);
        let delta = (a * a - 1.0).sqrt();
        let k_i = rng.random_range(1..=4);
        worst = worst.max(s_block_eigen(a, delta, k_i, tol)?.numerical_distance);
    }
    Ok(Outcome {
        pass: worst <= 1e-9,
        detail: format!("50 blocks, max eigenvalue deviation {worst:.2e} (limit 1e-9)"),
    })
}

fn generic_fixed_points(tol: &ToleranceConfig) -> Result<Outcome> {
    let mut failures = Vec::new();
    let (mut norm_dev, mut residual) = (0.0f64, 0.0f64);
    let mut instances = 0;
    for k in 1..=4usize {
        for s in 0..10u64 {
            let (m, n) = shape_for(100 * k as u64 + s, k);
            let t = normal_instance(m, n, k, 11_000 + 100 * k as u64 + s, 0.9, false, tol)?;
            let pts = enumerate_generic(&t, tol)?;
            instances += 1;
            if pts.len() != 1 << k {
                failures.push(format!("k={k} gave {} points", pts.len()));
            }
            for p in &pts {
                norm_dev = norm_dev.max((p.norm - 1.0).abs());
                residual = residual.max(p.residual);
            }
            for (i, p) in pts.iter().enumerate() {
                for q in &pts[i + 1..] {
                    if p.f.distance(&q.f) <= tol.eq_tol {
                        failures.push(format!("k={k}: duplicate fixed points"));
                    }
                }
            }
        }
    }
    let a = Contraction::open(ComplexMatrix::from_real(2, 1, &[0.6, 0.0])?, tol)?;
    let ex = from_factors(&a, &ComplexMatrix::identity(2), &ComplexMatrix::identity(1), tol)?;
    let pts = enumerate_generic(&ex, tol)?;
    let plus = ComplexMatrix::from_real(2, 1, &[1.0, 0.0])?;
    let minus = ComplexMatrix::from_real(2, 1, &[-1.0, 0.0])?;
    let example_ok = pts.len() == 2 && pts[0].f.distance(&plus) <= 1e-12 && pts[1].f.distance(&minus) <= 1e-12;
    if !example_ok {
        failures.push("worked example did not give exactly ±[1;0]".into());
    }
    let pass = failures.is_empty() && norm_dev <= 1e-8 && residual <= 1e-8;
    Ok(Outcome {
        pass,
        detail: format!(
            "{instances} instances with k=1..4, max |‖F‖−1| {norm_dev:.2e}, max residual {residual:.2e} (limits 1e-8), worked example ±[1;0] {}{}",
            if example_ok { "ok" } else { "wrong" },
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    })
}

fn detection() -> Result<Outcome> {
    let tol = ToleranceConfig::with_eq_tol(1e-8);
    let start = Instant::now();
    let mut wrong = Vec::new();
    for i in 0..200u64 {
        let k = 1 + (i as usize % 4);
        let (m, n) = shape_for(20_000 + i, k);
        let normal = i % 2 == 0;
        let t = if normal {
            normal_instance(m, n, k, 20_000 + i, 0.9, false, &tol)?
        } else {
            perturbed_instance(m, n, k, 20_000 + i, 0.9, &tol)?
        };
        let report = detect_generic(&t, &tol)?;
        let expected = if normal {
            Conclusion::NonUnitaryNormal
        } else {
            Conclusion::NotNormal
        };
        if report.conclusion != expected {
            wrong.push(format!("#{i} ({m}x{n}, k={k}) {:?}", report.conclusion));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        pass: wrong.is_empty() && secs < 60.0,
        detail: format!(
            "200 instances, {} misclassified, {secs:.2} s (limit 60 s){}",
            wrong.len(),
            if wrong.is_empty() {
                String::new()
            } else {
                format!(": {}", wrong.join(", "))
            }
        ),
    })
}

fn normal_spectrum(tol: &ToleranceConfig) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for i in 0..50u64 {
        let k = 1 + (i as usize % 4);
        let (m, n) = shape_for(30_000 + i, k);
        let t = normal_instance(m, n, k, 30_000 + i, 0.9, false, tol)?;
        let sp = spectrum_normal(&t, tol)?;
        let analytic: Vec<_> = sp.eigenvalues.iter().map(|e| e.value).collect();
        worst = worst.max(multiset_distance(&analytic, &eigenvalues(t.matrix())?));
    }
    Ok(Outcome {
        pass: worst <= 1e-7,
        detail: format!("50 instances, max spectrum distance {worst:.2e} (limit 1e-7)"),
    })
}

fn boundary_lemma(tol: &ToleranceConfig) -> Result<Outcome> {
    let mut worst = f64::INFINITY;
    let mut isometries = 0;
    for i in 0..20u64 {
        let (m, n) = SHAPES[(i % 4) as usize];
        let t = random_element(40_000 + i, m, n, tol)?;
        let f = factorize(&t, tol)?;
        let cs = f.cpos().adjoint();
        let mut rng = seeded_rng(40_000 + i);
        for j in 0..100 {
            // half on the boundary sphere, half inside
            let norm = if j % 2 == 0 { 1.0 } else { rng.random::<f64>() };
            let a = random_contraction_with(&mut rng, m, n, norm);
            let a = Contraction::closed(a, tol)?;
            let d = &(&cs * a.matrix()) + f.epos();
            worst = worst.min(min_singular_value(&d));
            // boundary points must be mapped without a singular denominator
            act(&t, &a, tol)?;
        }
        isometries += 1;
    }
    Ok(Outcome {
        pass: worst > 1e-6,
        detail: format!("{isometries} isometries x 100 points, min singular value {worst:.3e} (limit > 1e-6)"),
    })
}

fn main() {
    let tol = ToleranceConfig::default();
    let results = [
        run(1, "group membership", || membership(&tol)),
        run(2, "action homomorphism", || homomorphism(&tol)),
        run(3, "distance invariance", || invariance(&tol)),
        run(4, "normality criteria agree", || normality_crosscheck(&tol)),
        run(5, "spectral identities", || spectral_identities(&tol)),
        run(6, "block eigenvalues a±δ", || block_eigen(&tol)),
        run(7, "2^k generic fixed points", || generic_fixed_points(&tol)),
        run(8, "fixed-point detection", detection),
        run(9, "normal spectrum", || normal_spectrum(&tol)),
        run(10, "boundary invertibility", || boundary_lemma(&tol)),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
