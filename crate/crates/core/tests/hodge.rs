use flatdet::graded::random::{random_acyclic_complex, random_matrix, rng_from_seed};
use flatdet::graded::{sdet_restricted, split_complement, GradedMap};
use flatdet::hodge::*;
use flatdet::linalg::{self, real};
use proptest::prelude::*;

mod common;
use common::det_gauss;

fn tau_grid() -> Vec<f64> {
    (-5..=5).map(|i| 0.1 * i as f64).collect()
}

#[test]
fn anomaly_ledger_over_random_families() {
    for seed in 0..20 {
        let d = random_acyclic_complex(seed);
        let fam = random_metric_family(seed + 500, d.dims(), 0.6);
        let rep = torsion_anomaly_experiment(&d, &fam, &tau_grid()).unwrap();
        assert!(rep.passed(), "seed {seed}: {:?}", rep.verdicts);
        assert!(rep.metrics["max_ledger_defect"] <= LEDGER_TOL);
        // raw families do move the supervolume
        assert!(rep.metrics["max_supervolume_drift"] > 1e-3);

        let norm = supervolume_normalize(&fam);
        let rep = torsion_anomaly_experiment(&d, &norm, &tau_grid()).unwrap();
        assert!(rep.metrics["max_supervolume_drift"] <= 1e-12, "seed {seed}");
        assert!(rep.metrics["max_relative_drift"] <= NORMALIZED_TOL, "seed {seed}");
        assert!(rep.verdicts.iter().any(|v| v.name == "exact_constancy" && v.pass));
    }
}

#[test]
fn metric_change_is_an_inner_variation() {
    for seed in 0..5 {
        let d = random_acyclic_complex(seed);
        let fam = random_metric_family(seed, d.dims(), 0.6);
        for tau in [-0.4, 0.3, 0.5] {
            assert!(conjugation_defect(&d, &fam, tau).unwrap() <= 1e-9, "seed {seed}, τ = {tau}");
            let grams = fam.grams(tau);
            let delta = adjoint_codifferential(&d, &grams).unwrap();
            assert!(adjointness_defect(&d, &delta, &grams) <= 1e-10);
            assert!(delta.compose(&delta).unwrap().norm() <= 1e-10);
        }
    }
}

#[test]
fn two_term_complex_with_identity_metric() {
    // d = A : C^n -> C^n, L = degree 0, Δ|_L = A†A
    let mut rng = rng_from_seed(9);
    for n in 1..=5 {
        let a = random_matrix(&mut rng, n, n);
        let d = GradedMap::new(vec![n, n], 1, vec![a.clone(), linalg::zeros(0, n)]).unwrap();
        let (delta, lap) = hodge_laplacian(&d, &[linalg::identity(n), linalg::identity(n)]).unwrap();
        let v = sdet_restricted(&lap, &split_complement(&delta).unwrap()).unwrap();
        let want = 2.0 * det_gauss(&a).norm().ln();
        assert!((v.log - real(want)).norm() <= 1e-10, "n = {n}: {} vs {want}", v.log);
    }
}

#[test]
fn metric_family_json_round_trip() {
    let d = random_acyclic_complex(3);
    let fam = supervolume_normalize(&random_metric_family(3, d.dims(), 0.4));
    let json = MetricFamilyJson::from_family(&fam).unwrap();
    let text = serde_json::to_string(&json).unwrap();
    let back: MetricFamilyJson = serde_json::from_str(&text).unwrap();
    let fam2 = back.to_family().unwrap();
    for tau in [0.0, 0.7] {
        for (g1, g2) in fam.grams(tau).iter().zip(fam2.grams(tau)) {
            assert!(linalg::norm(&(g1 - g2)) <= 1e-14);
        }
    }
    assert!(serde_json::from_str::<MetricFamilyJson>(r#"{"degrees": [], "extra": 1}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ledger_holds_for_random_seeds(seed in 0u64..10_000, scale in 0.1f64..1.0) {
        let d = random_acyclic_complex(seed);
        let fam = random_metric_family(seed ^ 0xabc, d.dims(), scale);
        let rep = torsion_anomaly_experiment(&d, &fam, &[0.0, 0.25, -0.5, 0.75]).unwrap();
        prop_assert!(rep.metrics["max_ledger_defect"] <= LEDGER_TOL);
    }
}
