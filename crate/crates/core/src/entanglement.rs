//! Schmidt spectra, entropies and the superposition bounds.
//!
//! The entanglement of a pure state is always computed from the singular
//! values of its coefficient matrix. The eigendecomposition route
//! (`von_neumann_entropy(reduced_density(..))`) is kept as an independent
//! cross-check and is never used to produce a reported value.
//!
//! All entropies are in bits.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{DensityMatrix, Party, StateVector, Superposition, C64, NEAR_ZERO_NORM, NORM_TOL, TRACE_TOL};

/// One-sided slack before a bound counts as violated.
pub const BOUND_SLACK: f64 = 1e-8;
/// Probabilities at or below this are dropped from entropy sums (`0 log 0 = 0`).
pub const ENTROPY_CUTOFF: f64 = 1e-15;
/// Below this, Upsilon is treated as zero and the ratio as undefined.
pub const UPSILON_FLOOR: f64 = 1e-12;
/// Slack for the mixing-entropy inequalities.
pub const MIXING_SLACK: f64 = 1e-9;
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
pub const SCHMIDT_RANK_TOL: f64 = 1e-9;

/// Schmidt coefficients, nonincreasing, padded to `min(dim_a, dim_b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    pub coeffs: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Squared coefficients, i.e. the nonzero spectrum of either reduction.
    pub fn probabilities(&self) -> Vec<f64> {
        self.coeffs.iter().map(|s| s * s).collect()
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.probabilities()).max(0.0)
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.coeffs.iter().filter(|&&s| s > tol).count()
    }
}

/// Singular values of the coefficient matrix of a normalized state.
pub fn schmidt_spectrum(psi: &StateVector) -> Result<SchmidtSpectrum> {
    psi.require_normalized()?;
    singular_values(psi)
}

/// Singular values of any (possibly unnormalized) coefficient matrix.
///
/// Rows and columns are first grouped into the connected components of the
/// matrix's nonzero pattern; the matrix is block diagonal up to permutations,
/// so its spectrum is the union of the block spectra. Dense states form one
/// block, while structured ones (e.g. `sum_k c_k |k>|k>`) split into many
/// tiny blocks and avoid an `O(d^3)` decomposition.
pub(crate) fn singular_values(psi: &StateVector) -> Result<SchmidtSpectrum> {
    let (da, db) = psi.dims();
    let rank_cap = da.min(db);
    let blocks = nonzero_blocks(psi);
    let mut values = Vec::with_capacity(rank_cap);
    if blocks.len() == 1 && blocks[0].0.len() == da && blocks[0].1.len() == db {
        values.extend(dense_singular_values(psi.coefficient_matrix())?);
    } else {
        for (rows, cols) in &blocks {
            if rows.len() == 1 || cols.len() == 1 {
                let n: f64 = rows
                    .iter()
                    .flat_map(|&i| cols.iter().map(move |&j| (i, j)))
                    .map(|(i, j)| psi.amp(i, j).norm_sqr())
                    .sum();
                values.push(n.sqrt());
            } else {
                let m = DMatrix::from_fn(rows.len(), cols.len(), |r, c| psi.amp(rows[r], cols[c]));
                values.extend(dense_singular_values(m)?);
            }
        }
    }
    values.sort_by(|a, b| b.total_cmp(a));
    values.resize(rank_cap, 0.0);
    Ok(SchmidtSpectrum { coeffs: values })
}

fn dense_singular_values(m: DMatrix<C64>) -> Result<Vec<f64>> {
    let iters = 200 * (m.nrows() + m.ncols());
    let svd = SVD::try_new(m, false, false, f64::EPSILON, iters)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Connected components of the bipartite row/column graph whose edges are
/// the exactly-nonzero amplitudes. Each entry is `(rows, cols)`.
fn nonzero_blocks(psi: &StateVector) -> Vec<(Vec<usize>, Vec<usize>)> {
    let (da, db) = psi.dims();
    let mut parent: Vec<usize> = (0..da + db).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut touched = vec![false; da + db];
    for i in 0..da {
        for j in 0..db {
            if psi.amp(i, j) != C64::new(0.0, 0.0) {
                touched[i] = true;
                touched[da + j] = true;
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, da + j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut index_of_root = vec![usize::MAX; da + db];
    let mut blocks: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for (x, _) in touched.iter().enumerate().filter(|(_, &t)| t) {
        let r = find(&mut parent, x);
        if index_of_root[r] == usize::MAX {
            index_of_root[r] = blocks.len();
            blocks.push((Vec::new(), Vec::new()));
        }
        let b = &mut blocks[index_of_root[r]];
        if x < da {
            b.0.push(x);
        } else {
            b.1.push(x - da);
        }
    }
    blocks
}

/// Number of Schmidt coefficients above `tol`.
pub fn schmidt_rank(psi: &StateVector, tol: f64) -> Result<usize> {
    Ok(schmidt_spectrum(psi)?.rank(tol))
}

/// `-sum p log2 p` over entries above [`ENTROPY_CUTOFF`].
pub fn shannon_entropy(probabilities: &[f64]) -> f64 {
    probabilities
        .iter()
        .filter(|&&p| p > ENTROPY_CUTOFF)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let trace = rho.trace();
    if !trace.is_finite() || (trace - 1.0).abs() > TRACE_TOL {
        return Err(Error::TraceDeviation { trace });
    }
    Ok(shannon_entropy(&rho.eigenvalues()?).max(0.0))
}

/// Entanglement (e-bits) of a normalized pure state.
pub fn entanglement(psi: &StateVector) -> Result<f64> {
    Ok(schmidt_spectrum(psi)?.entropy())
}

/// `E` of the normalized version of an arbitrary nonzero vector.
pub fn entanglement_of_normalized(v: &StateVector) -> Result<f64> {
    entanglement(&v.normalize()?)
}

/// Entanglement through the eigenvalues of one reduction. Cross-check only.
pub fn entanglement_via_reduction(psi: &StateVector, party: Party) -> Result<f64> {
    von_neumann_entropy(&psi.reduced_density(party)?)
}

/// `h2(x) = -x log2 x - (1-x) log2 (1-x)`.
///
/// Inputs within `1e-12` outside `[0, 1]` are treated as the endpoint.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !x.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&x) {
        return Err(Error::OutOfDomain { name: "x", value: x });
    }
    let x = x.clamp(0.0, 1.0);
    Ok(shannon_entropy(&[x, 1.0 - x]))
}

/// `|alpha|^2 E(phi) + |beta|^2 E(psi) + h2(|alpha|^2)` with
/// `|beta|^2 = 1 - |alpha|^2`.
pub fn upsilon(phi: &StateVector, psi: &StateVector, alpha: C64) -> Result<f64> {
    let w = alpha.norm_sqr();
    if w > 1.0 + NORM_TOL {
        return Err(Error::OutOfDomain {
            name: "|alpha|^2",
            value: w,
        });
    }
    let w = w.min(1.0);
    Ok(w * entanglement(phi)? + (1.0 - w) * entanglement(psi)? + binary_entropy(w)?)
}

/// Entanglement of the normalized superposition minus the weighted average
/// of the components' entanglement.
pub fn gain(s: &Superposition) -> Result<f64> {
    let (w_phi, w_psi) = s.weights();
    let e = entanglement_of_normalized(&s.superpose().0)?;
    Ok(e - (w_phi * entanglement(s.phi())? + w_psi * entanglement(s.psi())?))
}

/// `E(normalized superposition) / Upsilon`; `None` when Upsilon vanishes.
pub fn ratio(s: &Superposition) -> Result<Option<f64>> {
    let e = entanglement_of_normalized(&s.superpose().0)?;
    let u = upsilon(s.phi(), s.psi(), s.alpha())?;
    Ok((u >= UPSILON_FLOOR).then(|| e / u))
}

pub fn is_orthogonal(phi: &StateVector, psi: &StateVector, tol: f64) -> Result<bool> {
    Ok(phi.inner(psi)?.norm() <= tol)
}

/// `(Tr[rho_A(phi) rho_A(psi)], Tr[rho_B(phi) rho_B(psi)])`.
///
/// Evaluated as `||M_phi^dagger M_psi||_F^2` and `||M_phi M_psi^dagger||_F^2`
/// over nonzero amplitudes only, so diagonal states at large `d` stay cheap.
pub fn biorthogonal_overlaps(phi: &StateVector, psi: &StateVector) -> Result<(f64, f64)> {
    phi.check_dims(psi)?;
    phi.require_normalized()?;
    psi.require_normalized()?;
    let (da, db) = phi.dims();
    // rows of M give the A-side contraction, columns the B-side one
    let a = cross_gram(da, db, |k, l| (k, l), phi, psi);
    let b = cross_gram(db, da, |k, l| (l, k), phi, psi);
    Ok((a, b))
}

/// `sum_{x,y} |sum_k conj(phi[k,x]) psi[k,y]|^2` where `idx(k, x)` maps the
/// contracted index `k < n` and free index `x < m` to a matrix position.
fn cross_gram(
    n: usize,
    m: usize,
    idx: impl Fn(usize, usize) -> (usize, usize),
    phi: &StateVector,
    psi: &StateVector,
) -> f64 {
    let nonzero = |v: &StateVector, k: usize| -> Vec<(usize, C64)> {
        (0..m)
            .filter_map(|x| {
                let (i, j) = idx(k, x);
                let z = v.amp(i, j);
                (z != C64::new(0.0, 0.0)).then_some((x, z))
            })
            .collect()
    };
    let mut acc: std::collections::HashMap<(usize, usize), C64> = std::collections::HashMap::new();
    for k in 0..n {
        let p = nonzero(phi, k);
        if p.is_empty() {
            continue;
        }
        let q = nonzero(psi, k);
        for &(x, a) in &p {
            for &(y, b) in &q {
                *acc.entry((x, y)).or_default() += a.conj() * b;
            }
        }
    }
    acc.values().map(|z| z.norm_sqr()).sum()
}

pub fn is_biorthogonal(phi: &StateVector, psi: &StateVector, tol: f64) -> Result<bool> {
    let (a, b) = biorthogonal_overlaps(phi, psi)?;
    Ok(a <= tol && b <= tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintClass {
    Biorthogonal,
    Orthogonal,
    General,
}

impl ConstraintClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Biorthogonal => "biorthogonal",
            Self::Orthogonal => "orthogonal",
            Self::General => "general",
        }
    }
}

impl std::str::FromStr for ConstraintClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "biorthogonal" => Ok(Self::Biorthogonal),
            "orthogonal" => Ok(Self::Orthogonal),
            "general" => Ok(Self::General),
            other => Err(format!(
                "unknown constraint `{other}` (expected general, orthogonal or biorthogonal)"
            )),
        }
    }
}

/// Most specific class the pair satisfies.
pub fn classify(phi: &StateVector, psi: &StateVector, tol: f64) -> Result<ConstraintClass> {
    Ok(if is_biorthogonal(phi, psi, tol)? {
        ConstraintClass::Biorthogonal
    } else if is_orthogonal(phi, psi, tol)? {
        ConstraintClass::Orthogonal
    } else {
        ConstraintClass::General
    })
}

/// Which inequality a [`BoundReport`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `E(sum) = Upsilon` for bi-orthogonal pairs; secondary: `gain <= 1`.
    BiorthogonalEquality,
    /// `E(sum) <= 2 Upsilon` for orthogonal pairs; secondary: the two-branch
    /// average `(E(+) + E(-)) / 2 <= Upsilon`.
    OrthogonalBound,
    /// `||a phi + b psi||^2 E(sum) <= 2 Upsilon`; secondary: the ratio form
    /// `E / Upsilon <= 2 / ||a phi + b psi||^2`.
    GeneralBound,
    /// `E(sum) <= k (sum w_i E_i + H(w))` for `k` orthonormal terms;
    /// secondary: the Fourier-branch average `<= sum w_i E_i + H(w)`.
    MultiTermBound,
}

/// A second inequality recorded alongside the headline one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondaryCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// One evaluation of a superposition against a bound.
///
/// For `k`-term reports `e_phi`/`e_psi` hold the first two components,
/// `h2_alpha` holds the Shannon entropy of all weights, and the full lists
/// live in `weights`/`component_entropies`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub e_superposition: f64,
    pub e_phi: f64,
    pub e_psi: f64,
    pub h2_alpha: f64,
    pub upsilon: f64,
    pub gain: f64,
    pub ratio: Option<f64>,
    pub norm_sum: f64,
    pub norm_diff: f64,
    pub bound_rhs: f64,
    pub satisfied: bool,
    pub constraint_class: ConstraintClass,
    pub check: CheckKind,
    pub bound_lhs: f64,
    pub weights: Vec<f64>,
    pub component_entropies: Vec<f64>,
    /// `E` of the normalized Fourier branches (`+` then `-` for two terms);
    /// a branch with vanishing norm carries zero weight and reports 0.
    pub branch_entropies: Vec<f64>,
    pub branch_norms: Vec<f64>,
    pub secondary: Option<SecondaryCheck>,
}

impl BoundReport {
    /// Largest violation of the report's internal identities:
    /// `upsilon = sum w E + h2` and `gain = E(sum) - sum w E`.
    pub fn consistency_residual(&self) -> f64 {
        let avg: f64 = self
            .weights
            .iter()
            .zip(&self.component_entropies)
            .map(|(w, e)| w * e)
            .sum();
        let r1 = (self.upsilon - (avg + self.h2_alpha)).abs();
        let r2 = (self.gain - (self.e_superposition - avg)).abs();
        r1.max(r2)
    }
}

/// Quantities shared by every two-term check.
struct Evaluation {
    e_sum: f64,
    e_phi: f64,
    e_psi: f64,
    h2: f64,
    upsilon: f64,
    w: (f64, f64),
    norm_sum: f64,
    norm_diff: f64,
    e_diff: f64,
}

fn evaluate(s: &Superposition) -> Result<Evaluation> {
    let (sum, norm_sum) = s.superpose();
    let (diff, norm_diff) = s.branch(C64::new(-1.0, 0.0));
    let e_sum = entanglement_of_normalized(&sum)?;
    let e_diff = if norm_diff > NEAR_ZERO_NORM {
        entanglement_of_normalized(&diff)?
    } else {
        0.0
    };
    let e_phi = entanglement(s.phi())?;
    let e_psi = entanglement(s.psi())?;
    let w = s.weights();
    let h2 = binary_entropy(w.0)?;
    Ok(Evaluation {
        e_sum,
        e_phi,
        e_psi,
        h2,
        upsilon: w.0 * e_phi + w.1 * e_psi + h2,
        w,
        norm_sum,
        norm_diff,
        e_diff,
    })
}

impl Evaluation {
    fn report(
        &self,
        check: CheckKind,
        class: ConstraintClass,
        lhs: f64,
        rhs: f64,
        satisfied: bool,
        secondary: Option<SecondaryCheck>,
    ) -> BoundReport {
        let avg = self.w.0 * self.e_phi + self.w.1 * self.e_psi;
        BoundReport {
            e_superposition: self.e_sum,
            e_phi: self.e_phi,
            e_psi: self.e_psi,
            h2_alpha: self.h2,
            upsilon: self.upsilon,
            gain: self.e_sum - avg,
            ratio: (self.upsilon >= UPSILON_FLOOR).then(|| self.e_sum / self.upsilon),
            norm_sum: self.norm_sum,
            norm_diff: self.norm_diff,
            bound_rhs: rhs,
            satisfied,
            constraint_class: class,
            check,
            bound_lhs: lhs,
            weights: vec![self.w.0, self.w.1],
            component_entropies: vec![self.e_phi, self.e_psi],
            branch_entropies: vec![self.e_sum, self.e_diff],
            branch_norms: vec![self.norm_sum, self.norm_diff],
            secondary,
        }
    }
}

/// Exact identity `E(sum) = Upsilon` for a bi-orthogonal pair, with the
/// one-e-bit gain bound as the secondary check.
pub fn check_biorthogonal_equality(s: &Superposition) -> Result<BoundReport> {
    let (overlap_a, overlap_b) = biorthogonal_overlaps(s.phi(), s.psi())?;
    if overlap_a > ORTHOGONALITY_TOL || overlap_b > ORTHOGONALITY_TOL {
        return Err(Error::NotBiorthogonal { overlap_a, overlap_b });
    }
    let ev = evaluate(s)?;
    let satisfied = (ev.e_sum - ev.upsilon).abs() <= BOUND_SLACK;
    let gain = ev.e_sum - (ev.w.0 * ev.e_phi + ev.w.1 * ev.e_psi);
    let secondary = SecondaryCheck {
        lhs: gain,
        rhs: 1.0,
        satisfied: gain <= 1.0 + BOUND_SLACK,
    };
    Ok(ev.report(
        CheckKind::BiorthogonalEquality,
        ConstraintClass::Biorthogonal,
        ev.e_sum,
        ev.upsilon,
        satisfied,
        Some(secondary),
    ))
}

/// `E(sum) <= 2 Upsilon` for orthogonal components.
pub fn check_orthogonal_bound(s: &Superposition) -> Result<BoundReport> {
    let overlap = s.phi().inner(s.psi())?.norm();
    if overlap > ORTHOGONALITY_TOL {
        return Err(Error::NotOrthogonal { overlap });
    }
    let class = classify(s.phi(), s.psi(), ORTHOGONALITY_TOL)?;
    let ev = evaluate(s)?;
    let rhs = 2.0 * ev.upsilon;
    let two_branch = 0.5 * ev.e_sum + 0.5 * ev.e_diff;
    let secondary = SecondaryCheck {
        lhs: two_branch,
        rhs: ev.upsilon,
        satisfied: two_branch <= ev.upsilon + BOUND_SLACK,
    };
    Ok(ev.report(
        CheckKind::OrthogonalBound,
        class,
        ev.e_sum,
        rhs,
        ev.e_sum <= rhs + BOUND_SLACK,
        Some(secondary),
    ))
}

/// `||alpha phi + beta psi||^2 E(sum) <= 2 Upsilon` for arbitrary normalized
/// components. The difference norm is reported as `norm_diff`.
pub fn check_general_bound(s: &Superposition) -> Result<BoundReport> {
    let class = classify(s.phi(), s.psi(), ORTHOGONALITY_TOL)?;
    let ev = evaluate(s)?;
    let lhs = ev.norm_sum * ev.norm_sum * ev.e_sum;
    let rhs = 2.0 * ev.upsilon;
    let secondary = (ev.upsilon >= UPSILON_FLOOR).then(|| {
        let r = ev.e_sum / ev.upsilon;
        let bound = 2.0 / (ev.norm_sum * ev.norm_sum);
        SecondaryCheck {
            lhs: r,
            rhs: bound,
            satisfied: r <= bound + BOUND_SLACK,
        }
    });
    Ok(ev.report(
        CheckKind::GeneralBound,
        class,
        lhs,
        rhs,
        lhs <= rhs + BOUND_SLACK,
        secondary,
    ))
}

/// Result of checking `sum w S(rho) <= S(sum w rho) <= sum w S(rho) + H(w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub weighted_entropy: f64,
    pub mixture_entropy: f64,
    pub weight_entropy: f64,
    /// `S(mix) - sum w S`; nonnegative when the lower inequality holds.
    pub lower_gap: f64,
    /// `sum w S + H(w) - S(mix)`; zero exactly for orthogonal supports.
    pub upper_gap: f64,
    pub lower_satisfied: bool,
    pub upper_satisfied: bool,
    pub satisfied: bool,
}

pub fn check_mixing_inequalities(weights: &[f64], rhos: &[DensityMatrix]) -> Result<MixingReport> {
    let mixture = crate::state::mix(weights, rhos)?;
    let mut weighted = 0.0;
    for (w, r) in weights.iter().zip(rhos) {
        weighted += w * von_neumann_entropy(r)?;
    }
    let mixture_entropy = von_neumann_entropy(&mixture)?;
    let h = shannon_entropy(weights);
    let lower_gap = mixture_entropy - weighted;
    let upper_gap = weighted + h - mixture_entropy;
    let lower_satisfied = lower_gap >= -MIXING_SLACK;
    let upper_satisfied = upper_gap >= -MIXING_SLACK;
    Ok(MixingReport {
        weighted_entropy: weighted,
        mixture_entropy,
        weight_entropy: h,
        lower_gap,
        upper_gap,
        lower_satisfied,
        upper_satisfied,
        satisfied: lower_satisfied && upper_satisfied,
    })
}

fn validate_terms(coeffs: &[C64], states: &[StateVector]) -> Result<()> {
    if coeffs.len() < 2 || coeffs.len() != states.len() {
        return Err(Error::InvalidParameter {
            name: "coeffs".into(),
            reason: format!(
                "need k >= 2 coefficients matching {} states, got {}",
                states.len(),
                coeffs.len()
            ),
        });
    }
    let sum: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if (sum - 1.0).abs() > NORM_TOL {
        return Err(Error::CoefficientNormalization { sum });
    }
    for s in states {
        states[0].check_dims(s)?;
        s.require_normalized()?;
    }
    Ok(())
}

/// Branches `Gamma_m = sum_a omega^(a m) c_a |state_a>` with
/// `omega = exp(2 pi i / k)`, unnormalized. `Gamma_0` is the superposition
/// itself; for two terms `Gamma_1` is the difference.
pub fn fourier_branches(coeffs: &[C64], states: &[StateVector]) -> Result<Vec<StateVector>> {
    validate_terms(coeffs, states)?;
    let k = coeffs.len();
    (0..k)
        .map(|m| {
            let mut acc = StateVector::zeros(states[0].dim_a(), states[0].dim_b())?;
            for (a, (c, s)) in coeffs.iter().zip(states).enumerate() {
                let phase = C64::from_polar(1.0, 2.0 * PI * ((a * m) % k) as f64 / k as f64);
                acc = acc.combine(C64::new(1.0, 0.0), s, phase * c)?;
            }
            Ok(acc)
        })
        .collect()
}

/// `(1/k) sum_m Tr_A |Gamma_m><Gamma_m|`, which equals Bob's reduction of the
/// ancilla extension `sum_a c_a |a>|state_a>`.
pub fn fourier_branch_mixture(coeffs: &[C64], states: &[StateVector]) -> Result<DensityMatrix> {
    let branches = fourier_branches(coeffs, states)?;
    let k = branches.len() as f64;
    let dim = states[0].dim_b();
    let mut acc = DMatrix::zeros(dim, dim);
    for b in &branches {
        acc += b.partial_trace_matrix(Party::B).scale(1.0 / k);
    }
    DensityMatrix::new(acc)
}

/// `E(sum_i c_i |state_i>) <= k (sum_i |c_i|^2 E_i + H(|c|^2))` for `k`
/// mutually orthogonal normalized states.
///
/// Follows from writing Bob's reduction of the ancilla extension as the
/// uniform mixture of the `k` normalized Fourier branches, then applying
/// concavity below and the mixing bound above.
pub fn multi_term_bound(coeffs: &[C64], states: &[StateVector]) -> Result<BoundReport> {
    validate_terms(coeffs, states)?;
    let k = coeffs.len();
    let mut all_biorthogonal = true;
    for i in 0..k {
        for j in i + 1..k {
            let overlap = states[i].inner(&states[j])?.norm();
            if overlap > ORTHOGONALITY_TOL {
                return Err(Error::NotOrthogonal { overlap });
            }
            if all_biorthogonal && !is_biorthogonal(&states[i], &states[j], ORTHOGONALITY_TOL)? {
                all_biorthogonal = false;
            }
        }
    }
    let weights: Vec<f64> = coeffs.iter().map(|c| c.norm_sqr()).collect();
    let component_entropies = states.iter().map(entanglement).collect::<Result<Vec<_>>>()?;
    let avg: f64 = weights.iter().zip(&component_entropies).map(|(w, e)| w * e).sum();
    let h = shannon_entropy(&weights);
    let upsilon = avg + h;

    let branches = fourier_branches(coeffs, states)?;
    let branch_norms: Vec<f64> = branches.iter().map(|b| b.norm()).collect();
    let branch_entropies = branches
        .iter()
        .zip(&branch_norms)
        .map(|(b, &n)| {
            if n > NEAR_ZERO_NORM {
                entanglement_of_normalized(b)
            } else {
                Ok(0.0)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let e_sum = branch_entropies[0];
    let rhs = k as f64 * upsilon;
    let branch_avg = branch_entropies.iter().sum::<f64>() / k as f64;

    Ok(BoundReport {
        e_superposition: e_sum,
        e_phi: component_entropies[0],
        e_psi: component_entropies[1],
        h2_alpha: h,
        upsilon,
        gain: e_sum - avg,
        ratio: (upsilon >= UPSILON_FLOOR).then(|| e_sum / upsilon),
        norm_sum: branch_norms[0],
        norm_diff: branch_norms[1],
        bound_rhs: rhs,
        satisfied: e_sum <= rhs + BOUND_SLACK,
        constraint_class: if all_biorthogonal {
            ConstraintClass::Biorthogonal
        } else {
            ConstraintClass::Orthogonal
        },
        check: CheckKind::MultiTermBound,
        bound_lhs: e_sum,
        weights,
        component_entropies,
        branch_entropies,
        branch_norms,
        secondary: Some(SecondaryCheck {
            lhs: branch_avg,
            rhs: upsilon,
            satisfied: branch_avg <= upsilon + BOUND_SLACK,
        }),
    })
}

/// Runs the check named by `kind` on `s`.
pub fn run_check(kind: CheckKind, s: &Superposition) -> Result<BoundReport> {
    match kind {
        CheckKind::BiorthogonalEquality => check_biorthogonal_equality(s),
        CheckKind::OrthogonalBound => check_orthogonal_bound(s),
        CheckKind::GeneralBound => check_general_bound(s),
        CheckKind::MultiTermBound => multi_term_bound(&[s.alpha(), s.beta()], &[s.phi().clone(), s.psi().clone()]),
    }
}

/// The headline check for a constraint class.
pub fn check_for_class(class: ConstraintClass) -> CheckKind {
    match class {
        ConstraintClass::Biorthogonal => CheckKind::BiorthogonalEquality,
        ConstraintClass::Orthogonal => CheckKind::OrthogonalBound,
        ConstraintClass::General => CheckKind::GeneralBound,
    }
}
