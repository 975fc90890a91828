//! Parametric example families with their analytic expectations.
//!
//! Families are written with basis levels `1..=d`; constructors map level `k`
//! to index `k - 1` (the high-fidelity family additionally reserves index 0
//! for `|00>`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::entanglement::{self, binary_entropy, ConstraintClass, ORTHOGONALITY_TOL};
use crate::error::{Error, Result};
use crate::state::{StateVector, Superposition, C64};

/// How an expected value should be compared with a computed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    /// Holds at the instance's parameters.
    Exact { value: f64 },
    /// Approached as `param` moves along `grid` (listed in sweep order).
    Limit { value: f64, param: String, grid: Vec<f64> },
    /// An approximation; `error` is the exact value minus `value`.
    Approximate { value: f64, error: f64 },
}

impl Expectation {
    pub fn value(&self) -> f64 {
        match self {
            Self::Exact { value } | Self::Limit { value, .. } | Self::Approximate { value, .. } => *value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyInstance {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub superposition: Superposition,
    pub constraint: ConstraintClass,
    pub expectations: BTreeMap<String, Expectation>,
    /// Construction-time quantities worth keeping (e.g. a pre-normalization
    /// norm) that are neither parameters nor expectations.
    pub recorded: BTreeMap<String, f64>,
}

impl FamilyInstance {
    fn new(name: &str, superposition: Superposition, constraint: ConstraintClass) -> Self {
        Self {
            name: name.to_string(),
            params: BTreeMap::new(),
            superposition,
            constraint,
            expectations: BTreeMap::new(),
            recorded: BTreeMap::new(),
        }
    }

    fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    fn exact(mut self, key: &str, value: f64) -> Self {
        self.expectations.insert(key.into(), Expectation::Exact { value });
        self
    }

    fn limit(mut self, key: &str, value: f64, param: &str, grid: &[f64]) -> Self {
        self.expectations.insert(
            key.into(),
            Expectation::Limit {
                value,
                param: param.into(),
                grid: grid.to_vec(),
            },
        );
        self
    }

    fn record(mut self, key: &str, value: f64) -> Self {
        self.recorded.insert(key.into(), value);
        self
    }

    pub fn expectation(&self, key: &str) -> Option<&Expectation> {
        self.expectations.get(key)
    }

    /// Whether the pair satisfies the family's declared constraint class.
    pub fn satisfies_constraint(&self) -> Result<bool> {
        let (phi, psi) = (self.superposition.phi(), self.superposition.psi());
        match self.constraint {
            ConstraintClass::Biorthogonal => entanglement::is_biorthogonal(phi, psi, ORTHOGONALITY_TOL),
            ConstraintClass::Orthogonal => entanglement::is_orthogonal(phi, psi, ORTHOGONALITY_TOL),
            ConstraintClass::General => Ok(true),
        }
    }
}

/// Sweep grids used to test approach to limit expectations.
pub const Y_SWEEP: [f64; 3] = [1e-2, 1e-3, 1e-4];
pub const EPS_SWEEP: [f64; 3] = [1e-2, 1e-4, 1e-6];
pub const D_SWEEP: [f64; 3] = [17.0, 257.0, 1025.0];

fn domain(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.into(),
        reason: reason.into(),
    }
}

fn open_unit(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(domain(name, format!("{x} is outside (0, 1)")));
    }
    Ok(())
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `phi = |00>` and
/// `psi = sqrt(1-eps)|00> + sqrt(eps/d) (|11> + ... + |dd>)` on
/// `(d+1) x (d+1)`, superposed with `alpha = beta = 1/sqrt 2`.
///
/// Expectations: `E(phi) = 0`, `E(psi)` in closed form, fidelity `1 - eps`,
/// and the small-eps approximation `E(psi) ~ eps log2 d` with its error.
pub fn high_fidelity(eps: f64, d: usize) -> Result<FamilyInstance> {
    open_unit("eps", eps)?;
    if d < 1 {
        return Err(domain("d", "must be at least 1"));
    }
    let n = d + 1;
    let phi = StateVector::basis(n, n, 0, 0)?;
    let mut diag = vec![c((1.0 - eps).sqrt())];
    diag.extend(std::iter::repeat_n(c((eps / d as f64).sqrt()), d));
    let psi = StateVector::diagonal(n, &diag)?.normalize()?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s = Superposition::new(c(h), c(h), phi, psi)?;

    let df = d as f64;
    let e_psi = -(1.0 - eps) * (1.0 - eps).log2() - eps * (eps / df).log2();
    let approx = eps * df.log2();
    let mut inst = FamilyInstance::new("high_fidelity", s, ConstraintClass::General)
        .param("eps", eps)
        .param("d", df)
        .exact("e_phi", 0.0)
        .exact("e_psi", e_psi)
        .exact("fidelity", 1.0 - eps);
    inst.expectations.insert(
        "e_psi_small_eps".into(),
        Expectation::Approximate {
            value: approx,
            error: e_psi - approx,
        },
    );
    Ok(inst)
}

/// `phi = sum_{i<d1} a_i |ii>`, `psi = sum_{i>=d1} b_i |ii>` on `d x d`
/// with `d = len(a) + len(b)`, superposed with the given `alpha` and real
/// `beta = sqrt(1 - |alpha|^2)`.
pub fn biorthogonal(a: &[f64], b: &[f64], alpha: C64) -> Result<FamilyInstance> {
    for (name, v) in [("a", a), ("b", b)] {
        if v.is_empty() || v.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(domain(name, "coefficients must be positive"));
        }
        let sq: f64 = v.iter().map(|x| x * x).sum();
        if (sq - 1.0).abs() > 1e-10 {
            return Err(domain(name, format!("squared coefficients sum to {sq}")));
        }
    }
    let w = alpha.norm_sqr();
    if w > 1.0 + 1e-12 {
        return Err(domain("alpha", format!("|alpha|^2 = {w} exceeds 1")));
    }
    let d = a.len() + b.len();
    let mut phi_diag: Vec<C64> = a.iter().map(|&x| c(x)).collect();
    phi_diag.resize(d, c(0.0));
    let mut psi_diag = vec![c(0.0); a.len()];
    psi_diag.extend(b.iter().map(|&x| c(x)));
    let phi = StateVector::diagonal(d, &phi_diag)?;
    let psi = StateVector::diagonal(d, &psi_diag)?;
    let beta = c((1.0 - w).max(0.0).sqrt());
    let s = Superposition::new(alpha, beta, phi, psi)?;

    let pa: Vec<f64> = a.iter().map(|x| x * x).collect();
    let pb: Vec<f64> = b.iter().map(|x| x * x).collect();
    let e_phi = entanglement::shannon_entropy(&pa);
    let e_psi = entanglement::shannon_entropy(&pb);
    let w = w.min(1.0);
    let up = w * e_phi + (1.0 - w) * e_psi + binary_entropy(w)?;
    let mut inst = FamilyInstance::new("biorthogonal", s, ConstraintClass::Biorthogonal)
        .param("d1", a.len() as f64)
        .param("d2", b.len() as f64)
        .param("alpha", alpha.norm())
        .exact("e_phi", e_phi)
        .exact("e_psi", e_psi)
        .exact("upsilon", up)
        .exact("e_superposition", up)
        .exact("gain", binary_entropy(w)?);
    if up >= entanglement::UPSILON_FLOOR {
        inst = inst.exact("ratio", 1.0);
    }
    Ok(inst)
}

/// Uniform Schmidt coefficients on `d1` and `d2` levels.
pub fn biorthogonal_uniform(d1: usize, d2: usize, alpha: f64) -> Result<FamilyInstance> {
    if d1 == 0 || d2 == 0 {
        return Err(domain("d1/d2", "must be at least 1"));
    }
    let a = vec![(1.0 / d1 as f64).sqrt(); d1];
    let b = vec![(1.0 / d2 as f64).sqrt(); d2];
    if !(0.0..=1.0).contains(&alpha) {
        return Err(domain("alpha", format!("{alpha} is outside [0, 1]")));
    }
    biorthogonal(&a, &b, c(alpha))
}

/// Qubit pair `phi = |00>`,
/// `psi = sqrt(y/2)|01> + sqrt(y/2)|10> - sqrt(1-y)|11>`,
/// `alpha = x y`, `beta = sqrt(1 - alpha^2)`.
///
/// The ratio tends to `(1+2x)^2 / (1+4x^2)` as `y -> 0`. That limit is only
/// reached logarithmically (about 1.87 at `x = 1/2, y = 1e-4`).
pub fn qubit_ratio(x: f64, y: f64) -> Result<FamilyInstance> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("x", format!("{x} must be positive")));
    }
    if !(y > 0.0 && y <= 1.0) {
        return Err(domain("y", format!("{y} is outside (0, 1]")));
    }
    let alpha = x * y;
    if alpha > 1.0 {
        return Err(domain("x", format!("alpha = x*y = {alpha} exceeds 1")));
    }
    let phi = StateVector::basis(2, 2, 0, 0)?;
    let r = (y / 2.0).sqrt();
    let psi = StateVector::from_real(2, 2, &[0.0, r, r, -(1.0 - y).sqrt()])?;
    let s = Superposition::with_real_alpha(alpha, phi, psi)?;
    let limit = (1.0 + 2.0 * x).powi(2) / (1.0 + 4.0 * x * x);
    Ok(FamilyInstance::new("qubit_ratio", s, ConstraintClass::Orthogonal)
        .param("x", x)
        .param("y", y)
        .exact("e_phi", 0.0)
        .limit("ratio", limit, "y", &Y_SWEEP))
}

/// `phi' = (|11> + (d-1)^(-1/2) sum_{k=2..d} |kk>) / sqrt 2`,
/// `psi'` the same with a minus sign, `alpha = -beta = 1/sqrt 2`.
pub fn orthogonal_d(d: usize) -> Result<FamilyInstance> {
    if d < 2 {
        return Err(domain("d", format!("{d} is below 2")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let tail = h / ((d - 1) as f64).sqrt();
    let mut p = vec![c(h)];
    p.extend(std::iter::repeat_n(c(tail), d - 1));
    let mut q = vec![c(h)];
    q.extend(std::iter::repeat_n(c(-tail), d - 1));
    let phi = StateVector::diagonal(d, &p)?;
    let psi = StateVector::diagonal(d, &q)?;
    let s = Superposition::new(c(h), c(-h), phi, psi)?;

    let l = ((d - 1) as f64).log2();
    let up = 0.5 * l + 2.0;
    Ok(FamilyInstance::new("orthogonal_d", s, ConstraintClass::Orthogonal)
        .param("d", d as f64)
        .exact("e_phi", 0.5 * l + 1.0)
        .exact("e_psi", 0.5 * l + 1.0)
        .exact("e_superposition", l)
        .exact("gain", 0.5 * l - 1.0)
        .exact("upsilon", up)
        .exact("ratio", l / up)
        .limit("ratio_limit", 2.0, "d", &D_SWEEP))
}

/// Non-orthogonal pair on `d x d` (levels `1..=d`): `phi = |11>` and
/// `psi ∝ sqrt(1-eps)|11> - (eps/sqrt d)(|11> + ... + |dd>)`.
///
/// The displayed `psi` has squared norm
/// `1 - eps - 2 eps sqrt((1-eps)/d) + eps^2`, so it is renormalized here and
/// the raw norm is recorded as `psi_raw_norm`. The coefficients are then
/// chosen so the superposition stays exactly proportional to the maximally
/// entangled state: with `c = sqrt(1-eps)` and `n` the raw norm,
/// `alpha = c / sqrt(n^2 + c^2)` and `beta = -n / sqrt(n^2 + c^2)`. At
/// `n = 1` these are `sqrt(1-eps)/sqrt(2-eps)` and `-1/sqrt(2-eps)`, which are
/// recorded as `alpha_unit_norm`/`beta_unit_norm`.
pub fn nonorthogonal(eps: f64, d: usize) -> Result<FamilyInstance> {
    open_unit("eps", eps)?;
    if d < 1 {
        return Err(domain("d", "must be at least 1"));
    }
    let df = d as f64;
    let cc = (1.0 - eps).sqrt();
    let t = eps / df.sqrt();
    let phi = StateVector::basis(d, d, 0, 0)?;
    let mut diag = vec![c(cc - t)];
    diag.extend(std::iter::repeat_n(c(-t), d - 1));
    let raw = StateVector::diagonal(d, &diag)?;
    let n = raw.norm();
    let psi = raw.normalize()?;
    let denom = (n * n + cc * cc).sqrt();
    let s = Superposition::new(c(cc / denom), c(-n / denom), phi, psi)?;

    let l = df.log2();
    Ok(FamilyInstance::new("nonorthogonal", s, ConstraintClass::General)
        .param("eps", eps)
        .param("d", df)
        .exact("e_phi", 0.0)
        .exact("e_superposition", l)
        .exact("norm_sum", eps / denom)
        .limit("ratio", l, "eps", &EPS_SWEEP)
        .limit("gain", l, "eps", &EPS_SWEEP)
        .record("psi_raw_norm", n)
        .record("alpha_unit_norm", cc / (2.0 - eps).sqrt())
        .record("beta_unit_norm", -1.0 / (2.0 - eps).sqrt()))
}

/// The five family names accepted by [`build`].
pub const FAMILY_NAMES: [&str; 5] = [
    "high_fidelity",
    "biorthogonal",
    "qubit_ratio",
    "orthogonal_d",
    "nonorthogonal",
];

/// Parameter names and defaults for each family, in column order.
pub fn family_params(name: &str) -> Option<&'static [(&'static str, f64)]> {
    Some(match name {
        "high_fidelity" => &[("eps", 0.1), ("d", 4.0)],
        "biorthogonal" => &[("d1", 2.0), ("d2", 1.0), ("alpha", 0.6)],
        "qubit_ratio" => &[("x", 0.5), ("y", 1e-3)],
        "orthogonal_d" => &[("d", 17.0)],
        "nonorthogonal" => &[("eps", 1e-6), ("d", 16.0)],
        _ => return None,
    })
}

/// Integer-valued parameters are rounded to the nearest integer.
pub fn is_integer_param(name: &str) -> bool {
    matches!(name, "d" | "d1" | "d2")
}

fn as_count(name: &str, v: f64) -> Result<usize> {
    if !(0.5..=1e6).contains(&v) {
        return Err(domain(name, format!("{v} is not a supported dimension")));
    }
    Ok(v.round() as usize)
}

/// Builds a family by name from named parameters; missing parameters take
/// the defaults of [`family_params`].
pub fn build(name: &str, params: &BTreeMap<String, f64>) -> Result<FamilyInstance> {
    let defaults = family_params(name).ok_or_else(|| domain("name", format!("unknown family `{name}`")))?;
    if let Some(k) = params.keys().find(|k| !defaults.iter().any(|(n, _)| n == k)) {
        return Err(domain(k, format!("not a parameter of `{name}`")));
    }
    let get = |key: &str| {
        params
            .get(key)
            .copied()
            .or_else(|| defaults.iter().find(|(n, _)| *n == key).map(|(_, v)| *v))
            .expect("key comes from the defaults table")
    };
    match name {
        "high_fidelity" => high_fidelity(get("eps"), as_count("d", get("d"))?),
        "biorthogonal" => biorthogonal_uniform(as_count("d1", get("d1"))?, as_count("d2", get("d2"))?, get("alpha")),
        "qubit_ratio" => qubit_ratio(get("x"), get("y")),
        "orthogonal_d" => orthogonal_d(as_count("d", get("d"))?),
        "nonorthogonal" => nonorthogonal(get("eps"), as_count("d", get("d"))?),
        _ => unreachable!("validated above"),
    }
}
