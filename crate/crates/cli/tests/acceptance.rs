//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Every criterion runs even when an earlier one fails.

use std::f64::consts::FRAC_1_SQRT_2;
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng;
use supent::entanglement::*;
use supent::families;
use supent::rng::{self, SplitRng};
use supent::search::{self, Objective, SearchConfig, SearchResult};
use supent::state::{mix, random_unitary, DensityMatrix, Party, StateVector, Superposition, C64};

/// Best gain of the seed-0, 1000-restart orthogonal d=3 search, frozen from
/// the first recorded run.
const D3_ANCHOR: f64 = 1.082_725_740_775_884;
const D3_ANCHOR_TOL: f64 = 1e-6;
const D3_TIME_LIMIT: Duration = Duration::from_secs(120);

type Outcome = Result<String, String>;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn random_coefficients(r: &mut SplitRng) -> (C64, C64) {
    let a = C64::from_polar(
        r.random_range(0.0..1.0f64).sqrt(),
        r.random_range(0.0..std::f64::consts::TAU),
    );
    let b = C64::from_polar((1.0 - a.norm_sqr()).sqrt(), r.random_range(0.0..std::f64::consts::TAU));
    (a, b)
}

/// One random state per entry of `sizes`, each on its own diagonal block of a
/// `d x d` space, then one shared random `U (x) V` applied to all.
fn block_embedded(r: &mut SplitRng, sizes: &[usize]) -> Vec<StateVector> {
    let d: usize = sizes.iter().sum();
    let u = random_unitary(d, r);
    let v = random_unitary(d, r);
    let mut offset = 0;
    sizes
        .iter()
        .map(|&k| {
            let block = StateVector::random_with(k, k, r).unwrap();
            let mut m = DMatrix::<C64>::zeros(d, d);
            for i in 0..k {
                for j in 0..k {
                    m[(offset + i, offset + j)] = block.amp(i, j);
                }
            }
            offset += k;
            StateVector::from_coefficient_matrix(&m)
                .unwrap()
                .apply_local(&u, &v)
                .unwrap()
                .normalize()
                .unwrap()
        })
        .collect()
}

/// Mutually orthogonal random states by Gram-Schmidt.
fn orthogonal_states(r: &mut SplitRng, d: usize, k: usize) -> Vec<StateVector> {
    let mut out: Vec<StateVector> = Vec::with_capacity(k);
    while out.len() < k {
        let mut v = StateVector::random_with(d, d, r).unwrap();
        for _ in 0..2 {
            for e in &out {
                let ov = e.inner(&v).unwrap();
                v = v.combine(c(1.0), e, -ov).unwrap();
            }
        }
        if v.norm() > 1e-6 {
            out.push(v.normalize().unwrap());
        }
    }
    out
}

fn random_density(r: &mut SplitRng, dim: usize) -> DensityMatrix {
    StateVector::random_with(dim, dim, r)
        .unwrap()
        .reduced_density(Party::A)
        .unwrap()
}

fn criterion_1() -> Outcome {
    let ket = |i, j| StateVector::basis(2, 2, i, j).unwrap();
    let h = FRAC_1_SQRT_2;
    let (bell, _) = Superposition::new(c(h), c(h), ket(0, 0), ket(1, 1))
        .unwrap()
        .superpose();
    let e3 = entanglement_of_normalized(&bell).unwrap();
    let plus = StateVector::from_real(2, 2, &[h, 0.0, 0.0, h]).unwrap();
    let minus = StateVector::from_real(2, 2, &[h, 0.0, 0.0, -h]).unwrap();
    let (prod, _) = Superposition::new(c(h), c(h), plus, minus).unwrap().superpose();
    let e4 = entanglement_of_normalized(&prod).unwrap();
    let d3 = (e3 - 1.0).abs();
    ensure(
        d3 <= 1e-12 && e4.abs() <= 1e-12,
        format!("|E(bell) - 1| = {d3:.1e}, E(product) = {e4:.1e}"),
    )
}

fn criterion_2() -> Outcome {
    let mut r = rng::seeded(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let pair = block_embedded(&mut r, &[3, 3]);
        let (a, b) = random_coefficients(&mut r);
        let s = Superposition::new(a, b, pair[0].clone(), pair[1].clone()).unwrap();
        let rep = check_biorthogonal_equality(&s).unwrap();
        worst = worst.max((rep.e_superposition - rep.upsilon).abs());
    }
    ensure(
        worst <= 1e-8,
        format!("max |E - Upsilon| over 1000 pairs = {worst:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    let mut r = rng::seeded(3);
    let mut min_lower = f64::INFINITY;
    let mut min_upper = f64::INFINITY;
    let mut min_random_upper = f64::INFINITY;
    let mut max_orth_upper = 0.0f64;
    for _ in 0..1000 {
        let w = r.random_range(0.01..0.99);
        let rep =
            check_mixing_inequalities(&[w, 1.0 - w], &[random_density(&mut r, 4), random_density(&mut r, 4)]).unwrap();
        min_lower = min_lower.min(rep.lower_gap);
        min_upper = min_upper.min(rep.upper_gap);
        min_random_upper = min_random_upper.min(rep.upper_gap);

        let u = random_unitary(4, &mut r);
        let p = r.random_range(0.0..1.0);
        let q = r.random_range(0.0..1.0);
        let rho = DensityMatrix::from_diagonal(&[p, 1.0 - p, 0.0, 0.0])
            .unwrap()
            .conjugate_by(&u)
            .unwrap();
        let sigma = DensityMatrix::from_diagonal(&[0.0, 0.0, q, 1.0 - q])
            .unwrap()
            .conjugate_by(&u)
            .unwrap();
        let rep = check_mixing_inequalities(&[w, 1.0 - w], &[rho, sigma]).unwrap();
        min_lower = min_lower.min(rep.lower_gap);
        min_upper = min_upper.min(rep.upper_gap);
        max_orth_upper = max_orth_upper.max(rep.upper_gap.abs());
    }
    let ok = min_lower >= -1e-9 && min_upper >= -1e-9 && max_orth_upper <= 1e-9 && min_random_upper > 1e-9;
    ensure(
        ok,
        format!(
            "min lower gap {min_lower:.2e}, min upper gap {min_upper:.2e}, \
             orthogonal-support upper gap <= {max_orth_upper:.1e}, generic upper gap >= {min_random_upper:.2e}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut cfg = SearchConfig::new(4, 4, ConstraintClass::Biorthogonal, Objective::Gain);
    cfg.restarts = 200;
    let res = search::optimize_parallel(&cfg, threads()).unwrap();
    let h = FRAC_1_SQRT_2;
    let ket = |i, j| StateVector::basis(2, 2, i, j).unwrap();
    let g3 = gain(&Superposition::new(c(h), c(h), ket(0, 0), ket(1, 1)).unwrap()).unwrap();
    ensure(
        !res.empty && res.best_objective <= 1.0 + 1e-8 && (g3 - 1.0).abs() <= 1e-12,
        format!(
            "search best gain {:.15}, bell decomposition gain {g3:.15}",
            res.best_objective
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut r = rng::seeded(5);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let pair = orthogonal_states(&mut r, 3, 2);
        let (a, b) = random_coefficients(&mut r);
        let s = Superposition::new(a, b, pair[0].clone(), pair[1].clone()).unwrap();
        if let Some(q) = check_orthogonal_bound(&s).unwrap().ratio {
            worst = worst.max(q);
        }
    }
    let q = |y| {
        ratio(&families::qubit_ratio(0.5, y).unwrap().superposition)
            .unwrap()
            .unwrap()
    };
    let (q3, q4) = (q(1e-3), q(1e-4));
    let ok = worst <= 2.0 + 1e-8 && (q4 - 2.0).abs() <= 0.05 && (q4 - 2.0).abs() < (q3 - 2.0).abs();
    ensure(
        ok,
        format!("max random ratio {worst:.6}; qubit family ratio {q3:.6} at y=1e-3, {q4:.6} at y=1e-4 (needs |r - 2| <= 0.05)"),
    )
}

fn criterion_6() -> Outcome {
    let mut worst = 0.0f64;
    for d in [17, 18, 257, 1025] {
        let s = families::orthogonal_d(d).unwrap().superposition;
        let l = ((d - 1) as f64).log2();
        let rep = check_orthogonal_bound(&s).unwrap();
        for (got, want) in [
            (rep.e_psi, 0.5 * l + 1.0),
            (rep.e_superposition, l),
            (rep.gain, 0.5 * l - 1.0),
        ] {
            worst = worst.max((got - want).abs());
        }
    }
    let mut threshold_ok = true;
    for d in 2..=64 {
        let g = gain(&families::orthogonal_d(d).unwrap().superposition).unwrap();
        let ok = match d.cmp(&17) {
            std::cmp::Ordering::Less => g < 1.0 - 1e-9,
            std::cmp::Ordering::Equal => (g - 1.0).abs() <= 1e-9,
            std::cmp::Ordering::Greater => g > 1.0 + 1e-9,
        };
        threshold_ok &= ok;
    }
    ensure(
        worst <= 1e-9 && threshold_ok,
        format!("max formula error {worst:.2e}; gain > 1 exactly for d > 17 over d in 2..=64: {threshold_ok}"),
    )
}

fn criterion_7() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d3.json");
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_supent"))
        .args([
            "search",
            "--d",
            "3",
            "--constraint",
            "orthogonal",
            "--objective",
            "gain",
        ])
        .args(["--restarts", "1000", "--seed", "0", "--output"])
        .arg(&out)
        .status()
        .map_err(|e| format!("spawning supent: {e}"))?;
    let elapsed = start.elapsed();
    if !status.success() {
        return Err(format!("supent search exited with {status}"));
    }
    let text = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
    let res: SearchResult = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let best = res.best_objective;
    ensure(
        best > 1.0 && (best - D3_ANCHOR).abs() <= D3_ANCHOR_TOL && elapsed < D3_TIME_LIMIT,
        format!(
            "best gain {best:.15} (anchor {D3_ANCHOR} +- {D3_ANCHOR_TOL:.0e}) at restart {} in {:.1}s",
            res.restart_index,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut r = rng::seeded(8);
    let mut worst_minus = f64::NEG_INFINITY;
    let mut worst_plus = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let phi = StateVector::random_with(4, 4, &mut r).unwrap();
        let psi = StateVector::random_with(4, 4, &mut r).unwrap();
        let (a, b) = random_coefficients(&mut r);
        let s = Superposition::new(a, b, phi, psi).unwrap();
        let rep = check_general_bound(&s).unwrap();
        worst_minus = worst_minus.max(rep.norm_diff.powi(2) * rep.e_superposition - 2.0 * rep.upsilon);
        worst_plus = worst_plus.max(rep.bound_lhs - rep.bound_rhs);
    }
    ensure(
        worst_minus <= 1e-8 && worst_plus <= 1e-8,
        format!(
            "max |a phi - b psi|^2 E - 2 Upsilon = {worst_minus:.4}, max |a phi + b psi|^2 E - 2 Upsilon = {worst_plus:.4}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let target = 4.0;
    let at = |eps| {
        let rep = check_general_bound(&families::nonorthogonal(eps, 16).unwrap().superposition).unwrap();
        (rep.e_superposition, rep.ratio.unwrap(), rep.gain)
    };
    let (e, q, g) = at(1e-6);
    let mut ok =
        (e - target).abs() <= 1e-9 && (q - target).abs() <= 0.02 * target && (g - target).abs() <= 0.02 * target;
    let sweep: Vec<_> = families::EPS_SWEEP.iter().map(|&eps| at(eps)).collect();
    for w in sweep.windows(2) {
        ok &= (w[1].1 - target).abs() < (w[0].1 - target).abs();
        ok &= (w[1].2 - target).abs() < (w[0].2 - target).abs();
    }
    let ratios: Vec<String> = sweep.iter().map(|t| format!("{:.6}", t.1)).collect();
    let gains: Vec<String> = sweep.iter().map(|t| format!("{:.6}", t.2)).collect();
    ensure(
        ok,
        format!(
            "E = {e:.12}, ratio over eps sweep [{}], gain [{}]",
            ratios.join(", "),
            gains.join(", ")
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut r = rng::seeded(10);
    let (mut svd_eig, mut a_b) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let (da, db) = (r.random_range(1..=5), r.random_range(1..=7));
        let psi = StateVector::random_with(da, db, &mut r).unwrap();
        let e = entanglement(&psi).unwrap();
        let ea = entanglement_via_reduction(&psi, Party::A).unwrap();
        let eb = entanglement_via_reduction(&psi, Party::B).unwrap();
        svd_eig = svd_eig.max((e - ea).abs());
        a_b = a_b.max((ea - eb).abs());
    }
    ensure(
        svd_eig <= 1e-10 && a_b <= 1e-9,
        format!("max |svd - eig| = {svd_eig:.2e}, max |A - B| = {a_b:.2e}"),
    )
}

fn random_weights(r: &mut SplitRng, k: usize) -> Vec<C64> {
    let raw: Vec<f64> = (0..k).map(|_| r.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter()
        .map(|w| C64::from_polar((w / total).sqrt(), r.random_range(0.0..std::f64::consts::TAU)))
        .collect()
}

fn criterion_11() -> Outcome {
    let mut r = rng::seeded(11);
    let mut eq_err = 0.0f64;
    for _ in 0..100 {
        let states = block_embedded(&mut r, &[2, 2, 2]);
        let coeffs = random_weights(&mut r, 3);
        let rep = multi_term_bound(&coeffs, &states).unwrap();
        if rep.constraint_class != ConstraintClass::Biorthogonal {
            return Err("constructed triple not detected as bi-orthogonal".into());
        }
        eq_err = eq_err.max((rep.e_superposition - rep.upsilon).abs());
    }
    let mut bound_ok = true;
    let mut mix_err = 0.0f64;
    for _ in 0..1000 {
        let states = orthogonal_states(&mut r, 4, 3);
        let coeffs = random_weights(&mut r, 3);
        bound_ok &= multi_term_bound(&coeffs, &states).unwrap().satisfied;
        let f = fourier_branch_mixture(&coeffs, &states).unwrap();
        let weights: Vec<f64> = coeffs.iter().map(|c| c.norm_sqr()).collect();
        let rhos: Vec<_> = states.iter().map(|s| s.reduced_density(Party::B).unwrap()).collect();
        mix_err = mix_err.max(f.max_abs_diff(&mix(&weights, &rhos).unwrap()));
    }
    ensure(
        eq_err <= 1e-9 && bound_ok && mix_err <= 1e-10,
        format!("max |E - Upsilon| on bi-orthogonal triples {eq_err:.2e}; k-factor bound on 1000 triples: {bound_ok}; max Fourier mixture error {mix_err:.2e}"),
    )
}

fn criterion_12() -> Outcome {
    let mut r = rng::seeded(12);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let psi = StateVector::random_with(4, 4, &mut r).unwrap();
        let u = random_unitary(4, &mut r);
        let v = random_unitary(4, &mut r);
        let moved = psi.apply_local(&u, &v).unwrap();
        worst = worst.max((entanglement(&moved).unwrap() - entanglement(&psi).unwrap()).abs());
    }
    ensure(worst <= 1e-9, format!("max |E(U x V psi) - E(psi)| = {worst:.2e}"))
}

fn main() {
    let criteria: [fn() -> Outcome; 12] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
        criterion_12,
    ];
    let mut failed = 0;
    for (i, f) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
