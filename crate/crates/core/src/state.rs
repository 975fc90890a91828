//! Bipartite pure states, reduced density matrices and the linear algebra
//! every other module builds on.
//!
//! Amplitudes are stored A-major: `amps[i * dim_b + j] = <i, j | psi>`, so the
//! coefficient matrix `M[i][j]` is the amplitude array read row by row and the
//! two reductions are `M M^dagger` (Alice) and `M^T conj(M)` (Bob).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, SplitRng};

pub type C64 = Complex64;

/// Tolerance on `| ||psi|| - 1 |` for a state to count as normalized.
pub const NORM_TOL: f64 = 1e-10;
/// Norms at or below this are treated as a vanishing superposition.
pub const NEAR_ZERO_NORM: f64 = 1e-12;
/// Eigenvalues in `[-EIGEN_CLAMP, 0)` are float noise and clamp to zero.
pub const EIGEN_CLAMP: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Allowed trace deviation for a density matrix fed to an entropy.
pub const TRACE_TOL: f64 = 1e-8;

/// One side of the bipartition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

/// A pure state on `C^dim_a (x) C^dim_b`.
///
/// Construction never normalizes: callers that need a unit vector call
/// [`StateVector::normalize`] explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRecord", into = "StateRecord")]
pub struct StateVector {
    dim_a: usize,
    dim_b: usize,
    amps: Vec<C64>,
}

/// Serialized form: `{"dim_a": .., "dim_b": .., "amps": [[re, im], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    pub dim_a: usize,
    pub dim_b: usize,
    pub amps: Vec<[f64; 2]>,
}

impl TryFrom<StateRecord> for StateVector {
    type Error = Error;

    fn try_from(r: StateRecord) -> Result<Self> {
        let amps = r.amps.iter().map(|&[re, im]| C64::new(re, im)).collect();
        StateVector::new(r.dim_a, r.dim_b, amps)
    }
}

impl From<StateVector> for StateRecord {
    fn from(s: StateVector) -> Self {
        StateRecord {
            dim_a: s.dim_a,
            dim_b: s.dim_b,
            amps: s.amps.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl StateVector {
    pub fn new(dim_a: usize, dim_b: usize, amps: Vec<C64>) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::ZeroDimension { dim_a, dim_b });
        }
        let expected = dim_a.checked_mul(dim_b).ok_or(Error::ZeroDimension { dim_a, dim_b })?;
        if amps.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: amps.len(),
            });
        }
        if let Some(index) = amps.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { dim_a, dim_b, amps })
    }

    /// Real amplitudes, A-major.
    pub fn from_real(dim_a: usize, dim_b: usize, amps: &[f64]) -> Result<Self> {
        Self::new(dim_a, dim_b, amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// The product basis state `|i>|j>`.
    pub fn basis(dim_a: usize, dim_b: usize, i: usize, j: usize) -> Result<Self> {
        let mut s = Self::zeros(dim_a, dim_b)?;
        if i >= dim_a || j >= dim_b {
            return Err(Error::InvalidParameter {
                name: "basis index".into(),
                reason: format!("({i}, {j}) outside {dim_a}x{dim_b}"),
            });
        }
        s.amps[i * dim_b + j] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn zeros(dim_a: usize, dim_b: usize) -> Result<Self> {
        Self::new(dim_a, dim_b, vec![C64::new(0.0, 0.0); dim_a * dim_b])
    }

    /// `sum_k c_k |k>|k>` on a `dim x dim` space.
    pub fn diagonal(dim: usize, coeffs: &[C64]) -> Result<Self> {
        if coeffs.len() > dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                found: coeffs.len(),
            });
        }
        let mut s = Self::zeros(dim, dim)?;
        for (k, &c) in coeffs.iter().enumerate() {
            s.amps[k * dim + k] = c;
        }
        Ok(s)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn amp(&self, i: usize, j: usize) -> C64 {
        self.amps[i * self.dim_b + j]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOL
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(())
    }

    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm();
        if norm.is_infinite() {
            // squared norm overflowed; bring the largest component to 1 first
            let big = self.amps.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max);
            return self.scale(C64::new(1.0 / big, 0.0)).normalize();
        }
        if norm <= NEAR_ZERO_NORM {
            return Err(Error::NearZeroNorm { norm });
        }
        Ok(self.scale(C64::new(1.0 / norm, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            amps: self.amps.iter().map(|z| z * c).collect(),
        }
    }

    /// `a |self> + b |other>`.
    pub fn combine(&self, a: C64, other: &Self, b: C64) -> Result<Self> {
        self.check_dims(other)?;
        let amps = self.amps.iter().zip(&other.amps).map(|(x, y)| a * x + b * y).collect();
        Ok(Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            amps,
        })
    }

    pub(crate) fn check_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(())
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_dims(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(x, y)| x.conj() * y).sum())
    }

    /// Coefficient matrix `M[i][j] = <i, j|psi>` (`dim_a x dim_b`).
    pub fn coefficient_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim_a, self.dim_b, &self.amps)
    }

    pub fn from_coefficient_matrix(m: &DMatrix<C64>) -> Result<Self> {
        let amps = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)])
            .collect();
        Self::new(m.nrows(), m.ncols(), amps)
    }

    /// Reduced state of `party`: `Tr_B |psi><psi|` for [`Party::A`] and
    /// `Tr_A |psi><psi|` for [`Party::B`].
    pub fn reduced_density(&self, party: Party) -> Result<DensityMatrix> {
        self.require_normalized()?;
        Ok(DensityMatrix::from_hermitian_unchecked(
            self.partial_trace_matrix(party),
        ))
    }

    pub(crate) fn partial_trace_matrix(&self, party: Party) -> DMatrix<C64> {
        let m = self.coefficient_matrix();
        match party {
            Party::A => &m * m.adjoint(),
            Party::B => m.transpose() * m.map(|z| z.conj()),
        }
    }

    /// Copy with the global phase fixed so the first nonzero amplitude is
    /// real and positive. Only meant for comparing states.
    pub fn canonical_phase(&self) -> Self {
        match self.amps.iter().find(|z| z.norm() > 0.0) {
            Some(z) => self.scale(z.conj() / z.norm()),
            None => self.clone(),
        }
    }

    /// `(U (x) V) |psi>`.
    pub fn apply_local(&self, u: &DMatrix<C64>, v: &DMatrix<C64>) -> Result<Self> {
        if u.shape() != (self.dim_a, self.dim_a) || v.shape() != (self.dim_b, self.dim_b) {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: (u.nrows(), v.nrows()),
            });
        }
        Self::from_coefficient_matrix(&(u * self.coefficient_matrix() * v.transpose()))
    }

    /// Haar-random normalized state for `seed`.
    pub fn random(dim_a: usize, dim_b: usize, seed: u64) -> Result<Self> {
        Self::random_with(dim_a, dim_b, &mut rng::seeded(seed))
    }

    /// Haar-random normalized state: independent standard complex Gaussian
    /// amplitudes, then normalized.
    pub fn random_with(dim_a: usize, dim_b: usize, rng: &mut SplitRng) -> Result<Self> {
        let n = dim_a.saturating_mul(dim_b);
        let amps = (0..n).map(|_| gaussian(rng)).collect();
        Self::new(dim_a, dim_b, amps)?.normalize()
    }
}

pub(crate) fn gaussian(rng: &mut SplitRng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `|<psi|phi>|^2` for normalized inputs.
pub fn fidelity(psi: &StateVector, phi: &StateVector) -> Result<f64> {
    psi.require_normalized()?;
    phi.require_normalized()?;
    Ok(psi.inner(phi)?.norm_sqr())
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn random_unitary(dim: usize, rng: &mut SplitRng) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Hermitian, trace-one, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates squareness and Hermiticity. Trace and positivity are checked
    /// where they matter (entropy, mixing).
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::InvalidParameter {
                name: "density matrix".into(),
                reason: format!("shape {:?} is not square", entries.shape()),
            });
        }
        let deviation = (&entries - entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if !deviation.is_finite() || deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { entries })
    }

    fn from_hermitian_unchecked(entries: DMatrix<C64>) -> Self {
        Self { entries }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// `|psi><psi|` of a normalized vector given as raw amplitudes.
    pub fn pure(amps: &[C64]) -> Result<Self> {
        let n = amps.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| amps[i] * amps[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    /// `U rho U^dagger`.
    pub fn conjugate_by(&self, u: &DMatrix<C64>) -> Result<Self> {
        if u.shape() != self.entries.shape() {
            return Err(Error::DimensionMismatch {
                left: self.entries.shape(),
                right: u.shape(),
            });
        }
        let m = u * &self.entries * u.adjoint();
        // Restore exact Hermiticity lost to rounding.
        let m = (&m + m.adjoint()).scale(0.5);
        Ok(Self { entries: m })
    }

    /// Eigenvalues in nonincreasing order, with values in the clamp window
    /// set to zero.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let eig = SymmetricEigen::try_new(self.entries.clone(), f64::EPSILON, 1000 * n.max(1))
            .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
        let mut values = Vec::with_capacity(n);
        for &v in eig.eigenvalues.iter() {
            if v < -EIGEN_CLAMP {
                return Err(Error::NegativeEigenvalue { value: v });
            }
            values.push(v.max(0.0));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(values)
    }

    /// `Tr(self * other)`, real for Hermitian arguments.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: (self.dim(), self.dim()),
                right: (other.dim(), other.dim()),
            });
        }
        Ok(self.entries.component_mul(&other.entries.transpose()).sum().re)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        (&self.entries - &other.entries)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Convex combination `sum_i w_i rho_i`.
pub fn mix(weights: &[f64], rhos: &[DensityMatrix]) -> Result<DensityMatrix> {
    if weights.is_empty() || weights.len() != rhos.len() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} matrices",
            weights.len(),
            rhos.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidWeights(format!("weight {w} is negative")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {total}")));
    }
    let dim = rhos[0].dim();
    if let Some(r) = rhos.iter().find(|r| r.dim() != dim) {
        return Err(Error::DimensionMismatch {
            left: (dim, dim),
            right: (r.dim(), r.dim()),
        });
    }
    let mut acc = DMatrix::zeros(dim, dim);
    for (w, r) in weights.iter().zip(rhos) {
        acc += r.entries.scale(*w);
    }
    Ok(DensityMatrix::from_hermitian_unchecked(acc))
}

/// `alpha |phi> + beta |psi>` with normalized components and
/// `|alpha|^2 + |beta|^2 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SuperpositionRecord", into = "SuperpositionRecord")]
pub struct Superposition {
    alpha: C64,
    beta: C64,
    phi: StateVector,
    psi: StateVector,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperpositionRecord {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub phi: StateVector,
    pub psi: StateVector,
}

impl TryFrom<SuperpositionRecord> for Superposition {
    type Error = Error;

    fn try_from(r: SuperpositionRecord) -> Result<Self> {
        Superposition::new(
            C64::new(r.alpha[0], r.alpha[1]),
            C64::new(r.beta[0], r.beta[1]),
            r.phi,
            r.psi,
        )
    }
}

impl From<Superposition> for SuperpositionRecord {
    fn from(s: Superposition) -> Self {
        SuperpositionRecord {
            alpha: [s.alpha.re, s.alpha.im],
            beta: [s.beta.re, s.beta.im],
            phi: s.phi,
            psi: s.psi,
        }
    }
}

impl Superposition {
    pub fn new(alpha: C64, beta: C64, phi: StateVector, psi: StateVector) -> Result<Self> {
        phi.check_dims(&psi)?;
        phi.require_normalized()?;
        psi.require_normalized()?;
        let sum = alpha.norm_sqr() + beta.norm_sqr();
        if !sum.is_finite() || (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::CoefficientNormalization { sum });
        }
        Ok(Self { alpha, beta, phi, psi })
    }

    /// Real coefficients `alpha` and `beta = sqrt(1 - alpha^2) >= 0`.
    pub fn with_real_alpha(alpha: f64, phi: StateVector, psi: StateVector) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha.abs()) {
            return Err(Error::OutOfDomain {
                name: "|alpha|",
                value: alpha,
            });
        }
        let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
        Self::new(C64::new(alpha, 0.0), C64::new(beta, 0.0), phi, psi)
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn phi(&self) -> &StateVector {
        &self.phi
    }

    pub fn psi(&self) -> &StateVector {
        &self.psi
    }

    /// `(|alpha|^2, |beta|^2)`.
    pub fn weights(&self) -> (f64, f64) {
        (self.alpha.norm_sqr(), self.beta.norm_sqr())
    }

    /// The unnormalized sum `alpha|phi> + beta|psi>` and its norm.
    pub fn superpose(&self) -> (StateVector, f64) {
        self.branch(C64::new(1.0, 0.0))
    }

    /// `alpha|phi> + w beta|psi>` and its norm; `w = -1` gives the difference
    /// branch.
    pub fn branch(&self, w: C64) -> (StateVector, f64) {
        let v = self
            .phi
            .combine(self.alpha, &self.psi, w * self.beta)
            .expect("dimensions checked on construction");
        let n = v.norm();
        (v, n)
    }

    /// The same superposition with both coefficients multiplied by `phase`.
    pub fn with_global_phase(&self, phase: C64) -> Result<Self> {
        Self::new(
            self.alpha * phase,
            self.beta * phase,
            self.phi.clone(),
            self.psi.clone(),
        )
    }
}

/// Absorbs a `k`-level ancilla into Alice's side:
/// `sum_a c_a |a>_anc |state_a>`, living on `(k * dim_a) x dim_b` with the
/// ancilla as the most significant part of Alice's index.
pub fn ancilla_extension(coeffs: &[C64], states: &[StateVector]) -> Result<StateVector> {
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
    let (dim_a, dim_b) = states[0].dims();
    for s in &states[1..] {
        states[0].check_dims(s)?;
    }
    let amps = coeffs
        .iter()
        .zip(states)
        .flat_map(|(c, s)| s.amps.iter().map(move |z| c * z))
        .collect();
    StateVector::new(coeffs.len() * dim_a, dim_b, amps)
}
