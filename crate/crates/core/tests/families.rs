use std::collections::BTreeMap;

use supent::entanglement::{check_for_class, entanglement, entanglement_of_normalized, run_check};
use supent::families::{self, Expectation, FamilyInstance};
use supent::state::{fidelity, StateVector, Superposition, C64};

fn exact(inst: &FamilyInstance, key: &str) -> f64 {
    match inst.expectation(key) {
        Some(Expectation::Exact { value }) => *value,
        other => panic!("{key}: {other:?}"),
    }
}

fn e_sum(s: &Superposition) -> f64 {
    entanglement_of_normalized(&s.superpose().0).unwrap()
}

#[test]
fn every_family_builds_with_defaults_and_meets_its_constraint() {
    for name in families::FAMILY_NAMES {
        let inst = families::build(name, &BTreeMap::new()).unwrap();
        assert_eq!(inst.name, name);
        assert!(inst.satisfies_constraint().unwrap(), "{name}");
        let r = run_check(check_for_class(inst.constraint), &inst.superposition).unwrap();
        assert!(r.satisfied, "{name}: {r:?}");
        let defaults = families::family_params(name).unwrap();
        assert_eq!(inst.params.len(), defaults.len(), "{name}");
    }
}

#[test]
fn high_fidelity_entropy_matches_closed_form() {
    let inst = families::high_fidelity(0.2, 4).unwrap();
    let e = entanglement(inst.superposition.psi()).unwrap();
    // -0.8 log2 0.8 - 0.2 log2 0.05 to 30 digits
    assert!((e - 1.121_928_094_887_362_3).abs() < 1e-13);
    assert!((exact(&inst, "e_psi") - e).abs() < 1e-13);
    assert_eq!(exact(&inst, "e_phi"), 0.0);
}

#[test]
fn high_fidelity_fidelity() {
    let inst = families::high_fidelity(0.25, 8).unwrap();
    let f = fidelity(inst.superposition.phi(), inst.superposition.psi()).unwrap();
    assert!((f - 0.75).abs() < 1e-14);
}

#[test]
fn high_fidelity_small_eps_limit() {
    let mut last = f64::INFINITY;
    for eps in [1e-2, 1e-4, 1e-6, 1e-8] {
        let inst = families::high_fidelity(eps, 4).unwrap();
        let e = entanglement(inst.superposition.psi()).unwrap();
        assert!(e < last);
        last = e;
    }
    assert!(last < 1e-6);
}

#[test]
fn high_fidelity_approximation_records_its_error() {
    let inst = families::high_fidelity(0.1, 1024).unwrap();
    let e = entanglement(inst.superposition.psi()).unwrap();
    match inst.expectation("e_psi_small_eps").unwrap() {
        Expectation::Approximate { value, error } => {
            assert!((value - 1.0).abs() < 1e-12);
            // exact value at (0.1, 1024) to 30 digits: 1.46899559358928...
            assert!((e - 1.468_995_593_589_281_2).abs() < 1e-12);
            assert!((value + error - e).abs() < 1e-12);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn biorthogonal_examples() {
    let bell_like = families::biorthogonal(&[1.0], &[1.0], C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)).unwrap();
    assert!((e_sum(&bell_like.superposition) - 1.0).abs() < 1e-12);

    let product = families::biorthogonal(&[1.0], &[1.0], C64::new(1.0, 0.0)).unwrap();
    assert!(e_sum(&product.superposition).abs() < 1e-12);
    assert!(product.expectation("ratio").is_none());

    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let s3 = 1.0 / 3f64.sqrt();
    let inst = families::biorthogonal(&[s2, s2], &[s3, s3, s3], C64::new(0.8, 0.0)).unwrap();
    let e = e_sum(&inst.superposition);
    // 0.64 + 0.36 log2 3 + h2(0.64) to 30 digits
    assert!((e - 2.153_269_689_515_108_5).abs() < 1e-10);
    assert!((exact(&inst, "upsilon") - e).abs() < 1e-10);
    assert_eq!(exact(&inst, "ratio"), 1.0);
}

#[test]
fn biorthogonal_rejects_bad_coefficients() {
    assert!(families::biorthogonal(&[0.5], &[1.0], C64::new(0.6, 0.0)).is_err());
    assert!(families::biorthogonal(&[], &[1.0], C64::new(0.6, 0.0)).is_err());
    assert!(families::biorthogonal(&[1.0], &[1.0], C64::new(1.2, 0.0)).is_err());
    assert!(families::biorthogonal_uniform(2, 1, 1.5).is_err());
}

#[test]
fn qubit_ratio_limit_expectations() {
    let half = families::qubit_ratio(0.5, 1e-3).unwrap();
    match half.expectation("ratio").unwrap() {
        Expectation::Limit { value, param, grid } => {
            assert_eq!(*value, 2.0);
            assert_eq!(param, "y");
            assert_eq!(grid, &families::Y_SWEEP.to_vec());
        }
        other => panic!("{other:?}"),
    }
    let tiny = families::qubit_ratio(1e-9, 1e-3).unwrap();
    assert!((tiny.expectation("ratio").unwrap().value() - 1.0).abs() < 1e-8);
}

/// Ratios at x = 1/2 evaluated with 30-digit arithmetic.
const QUBIT_RATIO_ORACLE: [(f64, f64); 3] = [
    (1e-2, 1.753_053_228_202_538_7),
    (1e-3, 1.828_019_808_911_389),
    (1e-4, 1.866_658_628_804_278_2),
];

#[test]
fn qubit_ratio_matches_high_precision_values() {
    for (y, want) in QUBIT_RATIO_ORACLE {
        let inst = families::qubit_ratio(0.5, y).unwrap();
        let r = supent::entanglement::ratio(&inst.superposition).unwrap().unwrap();
        // entropies of order y^2 lose digits to cancellation
        assert!((r - want).abs() < 1e-7 * want, "y={y}: {r} vs {want}");
    }
}

#[test]
fn qubit_ratio_approaches_two_monotonically() {
    let rs: Vec<f64> = families::Y_SWEEP
        .iter()
        .map(|&y| {
            let inst = families::qubit_ratio(0.5, y).unwrap();
            supent::entanglement::ratio(&inst.superposition).unwrap().unwrap()
        })
        .collect();
    assert!(rs.windows(2).all(|w| (2.0 - w[1]).abs() < (2.0 - w[0]).abs()), "{rs:?}");
    assert!(rs.iter().all(|&r| r < 2.0));
}

#[test]
fn orthogonal_d_examples() {
    let at17 = families::orthogonal_d(17).unwrap();
    let r = run_check(check_for_class(at17.constraint), &at17.superposition).unwrap();
    assert!((r.gain - 1.0).abs() < 1e-12);

    let at2 = families::orthogonal_d(2).unwrap();
    let (sum, _) = at2.superposition.superpose();
    let sum = sum.normalize().unwrap();
    // the |11> terms cancel, leaving the single product term |22>
    assert!((sum.amp(1, 1).norm() - 1.0).abs() < 1e-12);
    let r = run_check(check_for_class(at2.constraint), &at2.superposition).unwrap();
    assert!(r.e_superposition.abs() < 1e-12 && (r.gain + 1.0).abs() < 1e-12);

    let at1025 = families::orthogonal_d(1025).unwrap();
    let r = run_check(check_for_class(at1025.constraint), &at1025.superposition).unwrap();
    assert!((r.gain - 4.0).abs() < 1e-9);
    assert!((exact(&at1025, "gain") - 4.0).abs() < 1e-15);
    assert!(families::orthogonal_d(1).is_err());
}

#[test]
fn orthogonal_d_expectations_match_computation() {
    for d in [3, 17, 18, 100] {
        let inst = families::orthogonal_d(d).unwrap();
        let r = run_check(check_for_class(inst.constraint), &inst.superposition).unwrap();
        for (key, got) in [
            ("e_phi", r.e_phi),
            ("e_psi", r.e_psi),
            ("e_superposition", r.e_superposition),
            ("gain", r.gain),
            ("upsilon", r.upsilon),
            ("ratio", r.ratio.unwrap()),
        ] {
            assert!((exact(&inst, key) - got).abs() < 1e-10, "d={d} {key}");
        }
    }
}

#[test]
fn nonorthogonal_examples() {
    let inst = families::nonorthogonal(1e-6, 16).unwrap();
    let r = run_check(check_for_class(inst.constraint), &inst.superposition).unwrap();
    assert!((r.e_superposition - 4.0).abs() < 1e-9);
    assert!((r.gain - 4.0).abs() < 0.02 * 4.0);
    assert!((r.ratio.unwrap() - 4.0).abs() < 0.02 * 4.0);
    assert!((r.norm_sum - exact(&inst, "norm_sum")).abs() < 1e-15);

    let one = families::nonorthogonal(0.3, 1).unwrap();
    assert!(
        run_check(check_for_class(one.constraint), &one.superposition).is_err_and(|e| {
            // d = 1 makes psi parallel to phi and the superposition vanishes
            matches!(e, supent::Error::NearZeroNorm { .. })
        }) || e_sum(&one.superposition).abs() < 1e-12
    );
}

#[test]
fn nonorthogonal_raw_norm_and_displayed_coefficients() {
    let (eps, d) = (0.5f64, 2usize);
    let inst = families::nonorthogonal(eps, d).unwrap();
    let n = inst.recorded["psi_raw_norm"];
    let closed = 1.0 - eps - 2.0 * eps * ((1.0 - eps) / d as f64).sqrt() + eps * eps;
    assert!((n * n - closed).abs() < 1e-15);

    // The displayed coefficients applied to the raw (unnormalized) pair.
    let a = inst.recorded["alpha_unit_norm"];
    let b = inst.recorded["beta_unit_norm"];
    let raw = inst.superposition.psi().scale(C64::new(n, 0.0));
    let sum = inst
        .superposition
        .phi()
        .combine(C64::new(a, 0.0), &raw, C64::new(b, 0.0))
        .unwrap();
    // sqrt(a^2 + b^2 |psi|^2 + 2ab <phi|psi>) to 30 digits
    assert!((sum.norm() - 0.408_248_290_463_863).abs() < 1e-15);
}

#[test]
fn nonorthogonal_sweep_approaches_log_d() {
    let mut gains = vec![];
    let mut ratios = vec![];
    for eps in families::EPS_SWEEP {
        let inst = families::nonorthogonal(eps, 16).unwrap();
        let r = run_check(check_for_class(inst.constraint), &inst.superposition).unwrap();
        gains.push((4.0 - r.gain).abs());
        ratios.push((4.0 - r.ratio.unwrap()).abs());
    }
    assert!(gains.windows(2).all(|w| w[1] < w[0]), "{gains:?}");
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
}

#[test]
fn build_fills_defaults_and_rounds_dimensions() {
    let params = BTreeMap::from([("d".to_string(), 17.4)]);
    let inst = families::build("orthogonal_d", &params).unwrap();
    assert_eq!(inst.params["d"], 17.0);
    let inst = families::build("nonorthogonal", &BTreeMap::new()).unwrap();
    assert_eq!(inst.params["eps"], 1e-6);
    assert_eq!(inst.params["d"], 16.0);

    assert!(families::build("nope", &BTreeMap::new()).is_err());
    let bad = BTreeMap::from([("q".to_string(), 1.0)]);
    assert!(families::build("orthogonal_d", &bad).is_err());
    let bad = BTreeMap::from([("d".to_string(), f64::NAN)]);
    assert!(families::build("orthogonal_d", &bad).is_err());
}

#[test]
fn instances_round_trip_through_json() {
    let inst = families::qubit_ratio(0.5, 1e-3).unwrap();
    let text = serde_json::to_string(&inst).unwrap();
    let back: FamilyInstance = serde_json::from_str(&text).unwrap();
    assert_eq!(back, inst);
}

#[test]
fn family_states_are_normalized() {
    for name in families::FAMILY_NAMES {
        let inst = families::build(name, &BTreeMap::new()).unwrap();
        let s = &inst.superposition;
        for v in [s.phi(), s.psi()] {
            assert!((v.norm() - 1.0).abs() < 1e-12, "{name}");
        }
        let (wa, wb) = s.weights();
        assert!((wa + wb - 1.0).abs() < 1e-12, "{name}");
        assert_eq!(s.phi().dims(), s.psi().dims());
        let _: &StateVector = s.phi();
    }
}
