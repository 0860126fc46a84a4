//! Cross-module pipeline tests: period matrices feeding the theta engine,
//! the identity evaluators, and the Gunning check.

use num_complex::Complex64;

use thetalocus::chars::predicted_vanishing_set;
use thetalocus::identities;
use thetalocus::jacobian::{
    gunning_check, hyperelliptic_periods, vanishing_pattern, BranchPointSet, Verdict,
};
use thetalocus::sampling;
use thetalocus::theta::{q_eval, QMethod, TruncationPolicy};
use thetalocus::Error;

fn pol() -> TruncationPolicy {
    TruncationPolicy::default()
}

#[test]
fn genus3_vanishing_quadric_is_small_along_z() {
    // Q[eps, eps'](tau, z) = theta[eps|eps'](tau,0) theta[eps|eps'](tau,2z)
    // stays below threshold in z when (eps, eps') is the vanishing pair.
    let bp = BranchPointSet::parse("0,1,2,3,4,5,6,7").unwrap();
    let tau = hyperelliptic_periods(&bp, 192).unwrap().tau;
    let v = predicted_vanishing_set(3).unwrap()[0];
    let mut rng = sampling::rng_from_seed(31);
    // Scale of a typical nonvanishing quadric for comparison.
    for _ in 0..6 {
        let z = sampling::random_z(3, &mut rng);
        let qv = q_eval(v.eps(), v.delta(), &tau, &z, QMethod::Product, &pol()).unwrap();
        let q0 = q_eval(0, 0, &tau, &z, QMethod::Product, &pol()).unwrap();
        assert!(
            qv.value().norm() < 1e-8 * q0.value().norm(),
            "|Q_v| = {:.3e} vs |Q_0| = {:.3e}",
            qv.value().norm(),
            q0.value().norm()
        );
    }
}

#[test]
fn genus3_gunning_holds_on_pipeline_tau_only() {
    let bp = BranchPointSet::parse("0,1,2,3,4,5,6,7").unwrap();
    let tau = hyperelliptic_periods(&bp, 192).unwrap().tau;
    let rep = gunning_check(&tau, 4, 17, &pol()).unwrap();
    assert!(
        rep.max_dependence_ratio < 1e-6,
        "ratio {}",
        rep.max_dependence_ratio
    );
    assert_eq!(rep.gram_rank, 4);
    assert!(
        rep.sign_rule_error < 1e-9,
        "sign rule {}",
        rep.sign_rule_error
    );
    assert!(rep.off_block_max < 1e-8, "off block {}", rep.off_block_max);
    // A random genus-3 tau has no vanishing constant and is rejected by the
    // normal-form precondition.
    let mut rng = sampling::rng_from_seed(5);
    let random = sampling::random_tau(3, &mut rng);
    assert!(matches!(
        gunning_check(&random, 2, 1, &pol()),
        Err(Error::NonStandardPattern)
    ));
}

#[test]
fn genus3_pipeline_satisfies_identity_chain() {
    // Vanishing holds and rf is small at the constructed tau, hence the
    // Grushevsky residuals are small too (the implication chain).
    let bp = BranchPointSet::parse("0,1,2,3,4,5,6,7").unwrap();
    let tau = hyperelliptic_periods(&bp, 192).unwrap().tau;
    let report = vanishing_pattern(&tau, 1e-6, &pol()).unwrap();
    assert_eq!(report.verdict, Verdict::ConsistentHyperelliptic);
    let rf = identities::rf_at_tau(&tau, 4, 11, &pol()).unwrap();
    assert!(rf.passes(1e-6), "rf relative {}", rf.relative);
    let gru = identities::grushevsky_at_tau(&tau, 4, 11, &pol()).unwrap();
    assert!(gru.passes(1e-6), "grushevsky relative {}", gru.relative);
    let fro = identities::frobenius_at_tau(&tau, 6, 11, &pol()).unwrap();
    assert!(fro.passes(1e-6), "frobenius relative {}", fro.relative);
}

#[test]
fn identity_reports_are_deterministic() {
    let a = identities::rf_report(2, 3, 3, 99, &pol()).unwrap();
    let b = identities::rf_report(2, 3, 3, 99, &pol()).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    let c = identities::grushevsky_report(2, 2, 2, 42, &pol()).unwrap();
    let d = identities::grushevsky_report(2, 2, 2, 42, &pol()).unwrap();
    assert_eq!(
        serde_json::to_string(&c).unwrap(),
        serde_json::to_string(&d).unwrap()
    );
}

#[test]
fn grushevsky_residual_scales_with_vanishing_distance() {
    // Control: perturb the genus-3 pipeline tau away from the locus and the
    // residual becomes macroscopic.
    let bp = BranchPointSet::parse("0,1,2,3,4,5,6,7").unwrap();
    let tau = hyperelliptic_periods(&bp, 192).unwrap().tau;
    let mut entries: Vec<Complex64> = tau.entries().to_vec();
    entries[1] += Complex64::new(0.05, 0.02);
    entries[3] += Complex64::new(0.05, 0.02);
    let perturbed = thetalocus::theta::PeriodMatrix::new(3, entries).unwrap();
    let gru = identities::grushevsky_at_tau(&perturbed, 3, 11, &pol()).unwrap();
    assert!(
        gru.relative > 1e-4,
        "perturbed residual unexpectedly small: {}",
        gru.relative
    );
}
