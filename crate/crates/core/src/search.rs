//! Numerical search for extremal superpositions.
//!
//! Each restart draws a raw point from its own `(seed, restart)` stream and
//! refines it with a Nelder-Mead simplex. Constraints are enforced inside
//! [`parametrize`], so every evaluated sample is exactly orthogonal or
//! bi-orthogonal when the configuration asks for it.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, SVD};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::{
    self, biorthogonal_overlaps, check_for_class, entanglement, entanglement_of_normalized, run_check, BoundReport,
    ConstraintClass, SCHMIDT_RANK_TOL, UPSILON_FLOOR,
};
use crate::error::{Error, Result};
use crate::rng;
use crate::simplex::{self, SimplexOptions};
use crate::state::{StateVector, Superposition, C64, NEAR_ZERO_NORM};

/// Tolerance used by [`verify_result`] when comparing report fields.
pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Gain,
    Ratio,
    ProductFormRatio,
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gain" => Ok(Self::Gain),
            "ratio" => Ok(Self::Ratio),
            "product_form_ratio" => Ok(Self::ProductFormRatio),
            other => Err(format!(
                "unknown objective `{other}` (expected gain, ratio or product_form_ratio)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    /// `alpha = |cos theta|`, `beta = |sin theta|` with `theta` searched.
    Free,
    /// `alpha` held at the value, `beta = sqrt(1 - alpha^2)`.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub dim_a: usize,
    pub dim_b: usize,
    pub constraint: ConstraintClass,
    pub objective: Objective,
    pub restarts: usize,
    pub max_iters_per_restart: usize,
    pub seed: u64,
    pub convergence_tol: f64,
    pub alpha_mode: AlphaMode,
}

impl SearchConfig {
    /// Defaults: 200 restarts, 2000 iterations each, tolerance `1e-10`,
    /// seed 0, free `alpha`.
    pub fn new(dim_a: usize, dim_b: usize, constraint: ConstraintClass, objective: Objective) -> Self {
        Self {
            dim_a,
            dim_b,
            constraint,
            objective,
            restarts: 200,
            max_iters_per_restart: 2000,
            seed: 0,
            convergence_tol: 1e-10,
            alpha_mode: AlphaMode::Free,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, reason: String| {
            Err(Error::InvalidParameter {
                name: name.into(),
                reason,
            })
        };
        if self.dim_a == 0 || self.dim_b == 0 {
            return bad("dims", format!("{}x{} has a zero side", self.dim_a, self.dim_b));
        }
        if self.dim_a.saturating_mul(self.dim_b) > 4096 {
            return bad("dims", "raw search space is too large".into());
        }
        if self.restarts == 0 {
            return bad("restarts", "must be at least 1".into());
        }
        if !(self.convergence_tol > 0.0) || !self.convergence_tol.is_finite() {
            return bad("convergence_tol", format!("{} must be positive", self.convergence_tol));
        }
        if let AlphaMode::Fixed(a) = self.alpha_mode {
            if !(0.0..=1.0).contains(&a) {
                return bad("alpha", format!("fixed alpha {a} is outside [0, 1]"));
            }
        }
        Ok(())
    }

    /// Length of the raw vector [`parametrize`] expects.
    pub fn raw_len(&self) -> usize {
        let n = self.dim_a * self.dim_b;
        4 * n + usize::from(self.alpha_mode == AlphaMode::Free)
    }
}

/// Best superposition found by [`optimize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    /// `-inf` (serialized as `null`) when no restart produced a valid sample.
    #[serde(with = "finite_or_null")]
    pub best_objective: f64,
    pub best_superposition: Option<Superposition>,
    pub constraint_residual: f64,
    pub report: Option<BoundReport>,
    pub restart_index: usize,
    pub iterations_used: usize,
    pub seed: u64,
    pub empty: bool,
    pub config: SearchConfig,
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

/// Unit vector along a raw vector, rejecting (near-)zero raw input.
fn unit(v: StateVector) -> Result<StateVector> {
    let scale = v.norm();
    if !(scale > NEAR_ZERO_NORM) || !scale.is_finite() {
        return Err(Error::NearZeroNorm { norm: scale });
    }
    v.scale(C64::new(1.0 / scale, 0.0)).normalize()
}

/// Maps a raw point to a superposition that satisfies `config.constraint` by
/// construction.
///
/// Layout: real parts of `phi`, imaginary parts of `phi`, real parts of
/// `psi`, imaginary parts of `psi`, then `theta` when `alpha` is free.
///
/// * general: both vectors normalized independently;
/// * orthogonal: `psi` Gram-Schmidt projected against `phi` (twice);
/// * biorthogonal: `phi` is cut to its leading `max(1, min(d_A, d_B) / 2)`
///   Schmidt components and `psi` is projected onto the orthogonal
///   complement of `phi`'s local supports on both sides.
pub fn parametrize(raw: &[f64], config: &SearchConfig) -> Result<Superposition> {
    if raw.len() != config.raw_len() {
        return Err(Error::LengthMismatch {
            expected: config.raw_len(),
            found: raw.len(),
        });
    }
    let (da, db) = (config.dim_a, config.dim_b);
    let n = da * db;
    let complex = |re: &[f64], im: &[f64]| re.iter().zip(im).map(|(&r, &i)| C64::new(r, i)).collect::<Vec<_>>();
    let phi_raw = StateVector::new(da, db, complex(&raw[..n], &raw[n..2 * n]))?;
    let psi_raw = StateVector::new(da, db, complex(&raw[2 * n..3 * n], &raw[3 * n..4 * n]))?;

    let (phi, psi) = match config.constraint {
        ConstraintClass::General => (unit(phi_raw)?, unit(psi_raw)?),
        ConstraintClass::Orthogonal => {
            let phi = unit(phi_raw)?;
            let scale = psi_raw.norm();
            if !(scale > NEAR_ZERO_NORM) {
                return Err(Error::NearZeroNorm { norm: scale });
            }
            let mut psi = psi_raw.scale(C64::new(1.0 / scale, 0.0));
            for _ in 0..2 {
                let overlap = phi.inner(&psi)?;
                psi = psi.combine(C64::new(1.0, 0.0), &phi, -overlap)?;
            }
            (phi, psi.normalize()?)
        }
        ConstraintClass::Biorthogonal => biorthogonal_pair(unit(phi_raw)?, psi_raw)?,
    };

    let (alpha, beta) = match config.alpha_mode {
        AlphaMode::Free => {
            let theta = raw[4 * n];
            if !theta.is_finite() {
                return Err(Error::NonFinite { index: 4 * n });
            }
            (theta.cos().abs(), theta.sin().abs())
        }
        AlphaMode::Fixed(a) => (a, (1.0 - a * a).max(0.0).sqrt()),
    };
    // |cos|^2 + |sin|^2 is 1 to rounding
    let norm = (alpha * alpha + beta * beta).sqrt();
    Superposition::new(C64::new(alpha / norm, 0.0), C64::new(beta / norm, 0.0), phi, psi)
}

fn biorthogonal_pair(phi: StateVector, psi_raw: StateVector) -> Result<(StateVector, StateVector)> {
    let (da, db) = phi.dims();
    let keep_max = (da.min(db) / 2).max(1);
    if da.min(db) < 2 {
        return Err(Error::InvalidParameter {
            name: "dims".into(),
            reason: "bi-orthogonal pairs need both local dimensions >= 2".into(),
        });
    }
    let m = phi.coefficient_matrix();
    let svd = SVD::try_new(m, true, true, f64::EPSILON, 200 * (da + db))
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let support: Vec<usize> = order
        .into_iter()
        .take(keep_max)
        .filter(|&k| svd.singular_values[k] > SCHMIDT_RANK_TOL)
        .collect();
    if support.is_empty() {
        return Err(Error::NearZeroNorm { norm: 0.0 });
    }

    // phi cut to its leading Schmidt terms: sum_k s_k u_k v_k^dagger
    let mut phi_m = DMatrix::<C64>::zeros(da, db);
    let mut proj_a = DMatrix::<C64>::identity(da, da);
    let mut proj_b = DMatrix::<C64>::identity(db, db);
    for &k in &support {
        let uk = u.column(k).into_owned();
        // row k of V^dagger is v_k^dagger; v_k is its adjoint
        let vk = vt.row(k).adjoint();
        phi_m += (&uk * vk.adjoint()).scale(svd.singular_values[k]);
        proj_a -= &uk * uk.adjoint();
        proj_b -= &vk * vk.adjoint();
    }
    let phi = StateVector::from_coefficient_matrix(&phi_m)?.normalize()?;

    let scale = psi_raw.norm();
    if !(scale > NEAR_ZERO_NORM) {
        return Err(Error::NearZeroNorm { norm: scale });
    }
    let psi_m = psi_raw.coefficient_matrix().scale(1.0 / scale);
    let psi = StateVector::from_coefficient_matrix(&(&proj_a * psi_m * &proj_b))?.normalize()?;
    Ok((phi, psi))
}

/// How far a sample is from satisfying `class`: `|<phi|psi>|` for
/// orthogonal, the larger reduced overlap for bi-orthogonal, and the worst
/// normalization defect for general.
pub fn constraint_residual(s: &Superposition, class: ConstraintClass) -> Result<f64> {
    Ok(match class {
        ConstraintClass::Orthogonal => s.phi().inner(s.psi())?.norm(),
        ConstraintClass::Biorthogonal => {
            let (a, b) = biorthogonal_overlaps(s.phi(), s.psi())?;
            a.max(b)
        }
        ConstraintClass::General => {
            let (wa, wb) = s.weights();
            (s.phi().norm() - 1.0)
                .abs()
                .max((s.psi().norm() - 1.0).abs())
                .max((wa + wb - 1.0).abs())
        }
    })
}

/// Objective value to maximize; `-inf` for anything undefined.
pub fn objective(s: &Superposition, config: &SearchConfig) -> f64 {
    objective_value(s, config.objective).unwrap_or(f64::NEG_INFINITY)
}

fn objective_value(s: &Superposition, which: Objective) -> Result<f64> {
    let (sum, norm_sum) = s.superpose();
    let e_sum = entanglement_of_normalized(&sum)?;
    let e_phi = entanglement(s.phi())?;
    let e_psi = entanglement(s.psi())?;
    let (wa, wb) = s.weights();
    let avg = wa * e_phi + wb * e_psi;
    let up = avg + entanglement::binary_entropy(wa)?;
    Ok(match which {
        Objective::Gain => e_sum - avg,
        Objective::Ratio if up >= UPSILON_FLOOR => e_sum / up,
        Objective::ProductFormRatio if up >= UPSILON_FLOOR => norm_sum * norm_sum * e_sum / (2.0 * up),
        _ => f64::NEG_INFINITY,
    })
}

struct RestartOutcome {
    index: usize,
    x: Vec<f64>,
    objective: f64,
    iterations: usize,
}

fn initial_point(config: &SearchConfig, index: usize) -> Vec<f64> {
    let mut r = rng::stream(config.seed, index as u64);
    let n = 4 * config.dim_a * config.dim_b;
    let mut x: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
    if config.alpha_mode == AlphaMode::Free {
        x.push(r.random_range(0.0..FRAC_PI_2));
    }
    x
}

fn run_restart(config: &SearchConfig, index: usize) -> RestartOutcome {
    let x0 = initial_point(config, index);
    let opts = SimplexOptions {
        initial_step: 0.5,
        max_iters: config.max_iters_per_restart,
        tol: config.convergence_tol,
    };
    let r = simplex::minimize(
        |x| match parametrize(x, config) {
            Ok(s) => -objective(&s, config),
            Err(_) => f64::INFINITY,
        },
        &x0,
        &opts,
    );
    RestartOutcome {
        index,
        x: r.x,
        objective: -r.f,
        iterations: r.iterations,
    }
}

/// Runs every restart on the current thread.
pub fn optimize(config: &SearchConfig) -> Result<SearchResult> {
    config.validate()?;
    let outcomes: Vec<RestartOutcome> = (0..config.restarts).map(|i| run_restart(config, i)).collect();
    finish(config, outcomes)
}

/// Same result as [`optimize`], with restarts spread over `threads` workers.
pub fn optimize_parallel(config: &SearchConfig, threads: usize) -> Result<SearchResult> {
    config.validate()?;
    if threads <= 1 {
        return optimize(config);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    let outcomes = pool.install(|| {
        (0..config.restarts)
            .into_par_iter()
            .map(|i| run_restart(config, i))
            .collect::<Vec<_>>()
    });
    finish(config, outcomes)
}

/// Max over restarts, ties to the lowest restart index.
fn finish(config: &SearchConfig, outcomes: Vec<RestartOutcome>) -> Result<SearchResult> {
    let mut best: Option<RestartOutcome> = None;
    for o in outcomes {
        if !o.objective.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|b| o.objective > b.objective) {
            best = Some(o);
        }
    }
    let Some(best) = best else {
        return Ok(SearchResult {
            best_objective: f64::NEG_INFINITY,
            best_superposition: None,
            constraint_residual: 0.0,
            report: None,
            restart_index: 0,
            iterations_used: 0,
            seed: config.seed,
            empty: true,
            config: config.clone(),
        });
    };
    let s = parametrize(&best.x, config)?;
    let report = run_check(check_for_class(config.constraint), &s)?;
    Ok(SearchResult {
        best_objective: objective(&s, config),
        constraint_residual: constraint_residual(&s, config.constraint)?,
        best_superposition: Some(s),
        report: Some(report),
        restart_index: best.index,
        iterations_used: best.iterations,
        seed: config.seed,
        empty: false,
        config: config.clone(),
    })
}

/// Recomputes the report, residual and objective of `r` from its
/// superposition and returns the fresh report, or names the first field that
/// differs by more than [`VERIFY_TOL`].
pub fn verify_result(r: &SearchResult) -> Result<BoundReport> {
    let mismatch = |f: &str| Error::ReportMismatch(f.to_string());
    let (Some(s), Some(stored)) = (&r.best_superposition, &r.report) else {
        if r.empty && r.best_superposition.is_none() && r.report.is_none() {
            return Err(mismatch("empty"));
        }
        return Err(mismatch(if r.report.is_none() {
            "report"
        } else {
            "best_superposition"
        }));
    };
    let fresh = run_check(stored.check, s)?;

    let close = |a: f64, b: f64| (a - b).abs() <= VERIFY_TOL || (a.is_infinite() && a == b);
    let scalar_fields = [
        ("e_superposition", stored.e_superposition, fresh.e_superposition),
        ("e_phi", stored.e_phi, fresh.e_phi),
        ("e_psi", stored.e_psi, fresh.e_psi),
        ("h2_alpha", stored.h2_alpha, fresh.h2_alpha),
        ("upsilon", stored.upsilon, fresh.upsilon),
        ("gain", stored.gain, fresh.gain),
        ("norm_sum", stored.norm_sum, fresh.norm_sum),
        ("norm_diff", stored.norm_diff, fresh.norm_diff),
        ("bound_lhs", stored.bound_lhs, fresh.bound_lhs),
        ("bound_rhs", stored.bound_rhs, fresh.bound_rhs),
    ];
    for (name, a, b) in scalar_fields {
        if !close(a, b) {
            return Err(mismatch(name));
        }
    }
    match (stored.ratio, fresh.ratio) {
        (None, None) => {}
        (Some(a), Some(b)) if close(a, b) => {}
        _ => return Err(mismatch("ratio")),
    }
    let vec_fields = [
        ("weights", &stored.weights, &fresh.weights),
        (
            "component_entropies",
            &stored.component_entropies,
            &fresh.component_entropies,
        ),
        ("branch_entropies", &stored.branch_entropies, &fresh.branch_entropies),
        ("branch_norms", &stored.branch_norms, &fresh.branch_norms),
    ];
    for (name, a, b) in vec_fields {
        if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| !close(*x, *y)) {
            return Err(mismatch(name));
        }
    }
    match (&stored.secondary, &fresh.secondary) {
        (None, None) => {}
        (Some(a), Some(b)) if close(a.lhs, b.lhs) && close(a.rhs, b.rhs) && a.satisfied == b.satisfied => {}
        _ => return Err(mismatch("secondary")),
    }
    if stored.satisfied != fresh.satisfied {
        return Err(mismatch("satisfied"));
    }
    if stored.constraint_class != fresh.constraint_class {
        return Err(mismatch("constraint_class"));
    }
    if stored.check != fresh.check {
        return Err(mismatch("check"));
    }
    if !close(r.best_objective, objective(s, &r.config)) {
        return Err(mismatch("best_objective"));
    }
    if !close(r.constraint_residual, constraint_residual(s, r.config.constraint)?) {
        return Err(mismatch("constraint_residual"));
    }
    Ok(fresh)
}
