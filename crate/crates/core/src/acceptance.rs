//! The end-to-end check suite: thirteen numbered criteria covering the exact
//! rank computations, the identity residuals, the period-matrix pipelines,
//! and the Gunning multisecant check. Used by the `acceptance` integration
//! test target and the CLI `acceptance` subcommand.

use num_complex::Complex64;
use serde::Serialize;

use crate::chars::{
    predicted_vanishing_set, varley_debarre_sets, Characteristic, VarleyDebarreVariant,
};
use crate::error::Result;
use crate::heisenberg::{
    admissible_pairs, cubics_from_quadrics, f_sigma, frobenius_vector_in_kernel,
    k_invariant_cubic_basis, m_chi, relation_space, s4_eigenspace_dim, span_rank, HCharacter,
    IntPolynomial,
};
use crate::identities;
use crate::jacobian::{
    genus1_tau_oracle, gunning_check, hyperelliptic_periods, transport_to_standard,
    vanishing_pattern, BranchPointSet, Verdict,
};
use crate::sampling::{random_tau, rng_from_seed};
use crate::symplectic::{char_act, cocycle_abs_det, sp_act, word_to_matrix, Generator};
use crate::theta::{theta_const, TruncationPolicy};

/// Outcome of one criterion.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub title: String,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
    /// Stated wall-clock budget, when the criterion has one.
    pub budget_seconds: Option<f64>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!(
            "[{status}] C{:02} {} ({:.2}s) {}",
            self.id, self.title, self.seconds, self.details
        )
    }

    pub fn within_budget(&self) -> bool {
        self.budget_seconds.map_or(true, |b| self.seconds <= b)
    }
}

fn run<F: FnOnce() -> Result<(bool, String)>>(
    id: usize,
    title: &str,
    budget: Option<f64>,
    f: F,
) -> CriterionResult {
    let t0 = std::time::Instant::now();
    let (passed, details) = match f() {
        Ok(x) => x,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        title: title.to_string(),
        passed,
        details,
        seconds: t0.elapsed().as_secs_f64(),
        budget_seconds: budget,
    }
}

fn pairs_of(set: &[Characteristic]) -> Vec<(u32, u32)> {
    set.iter().map(|m| (m.eps(), m.delta())).collect()
}

/// C1: the 160 cubics over the genus-4 hyperelliptic vanishing set span a
/// 144-dimensional space, exactly.
pub fn criterion_01(_seed: u64) -> CriterionResult {
    run(
        1,
        "genus-4 hyperelliptic cubic span rank",
        Some(60.0),
        || {
            let vanishing = pairs_of(&predicted_vanishing_set(4)?);
            let cubics = cubics_from_quadrics(4, &vanishing)?;
            let rank = span_rank(&cubics)?;
            Ok((
                cubics.len() == 160 && rank == 144,
                format!("generators={} rank={rank} (want 160/144)", cubics.len()),
            ))
        },
    )
}

/// C2: the Varley-Debarre weight-2/3 set gives rank 160, exactly.
pub fn criterion_02(_seed: u64) -> CriterionResult {
    run(2, "Varley-Debarre cubic span rank", Some(60.0), || {
        let set = pairs_of(&varley_debarre_sets(VarleyDebarreVariant::WeightTwoThree)?);
        let cubics = cubics_from_quadrics(4, &set)?;
        let rank = span_rank(&cubics)?;
        Ok((
            cubics.len() == 160 && rank == 160,
            format!("generators={} rank={rank} (want 160/160)", cubics.len()),
        ))
    })
}

/// C3: biquadratic relation-space dimensions (2^{2g}-1)/3 at the zero twist
/// for g = 1, 2, with every kernel vector expanding to the zero quartic.
pub fn criterion_03(_seed: u64) -> CriterionResult {
    run(
        3,
        "biquadratic relation-space dimensions",
        Some(60.0),
        || {
            let (d1, basis1) = relation_space(1, 0, 0)?;
            let (d2, basis2) = relation_space(2, 0, 0)?;
            for v in basis1.iter().chain(basis2.iter()) {
                v.verify_in_kernel()?;
            }
            Ok((
                d1 == 1 && d2 == 5,
                format!("dim(g=1)={d1} (want 1), dim(g=2)={d2} (want 5); all vectors expand to 0"),
            ))
        },
    )
}

/// C4: eigenbasis counts: 2^{g-1}(2^g+1) quadrics, S^4 eigenspace dimensions
/// (2^g+1)(2^{g-1}+1)/3 for the trivial character and
/// (2^{g-1}+1)(2^{g-2}+1)/3 for the rest, g = 2, 3.
pub fn criterion_04(_seed: u64) -> CriterionResult {
    run(
        4,
        "eigenbasis and S^4 eigenspace dimensions",
        Some(120.0),
        || {
            let mut ok = true;
            let mut details = Vec::new();
            for g in 2..=3usize {
                let count = admissible_pairs(g).len();
                let want_count = (1 << (g - 1)) * ((1 << g) + 1);
                ok &= count == want_count;
                let trivial = s4_eigenspace_dim(g, &HCharacter::trivial());
                let want_trivial = ((1 << g) + 1) * ((1 << (g - 1)) + 1) / 3;
                ok &= trivial == want_trivial;
                let want_other = ((1 << (g - 1)) + 1) * ((1 << (g - 2)) + 1) / 3;
                let mut others_ok = true;
                for ystar in 0..(1u16 << g) {
                    for y in 0..(1u16 << g) {
                        if (ystar, y) != (0, 0) {
                            others_ok &=
                                s4_eigenspace_dim(g, &HCharacter { ystar, y }) == want_other;
                        }
                    }
                }
                ok &= others_ok;
                details.push(format!(
                "g={g}: Q-count {count}/{want_count}, S4 trivial {trivial}/{want_trivial}, others {}",
                if others_ok { format!("{want_other} all") } else { "mismatch".into() }
            ));
            }
            Ok((ok, details.join("; ")))
        },
    )
}

/// C5: d/dX_sigma (M(0) F) = 4 F_sigma exactly for 20 random K-invariant
/// cubics, g = 2, 3.
pub fn criterion_05(seed: u64) -> CriterionResult {
    run(5, "M(0) inversion by quarter-derivative", None, || {
        use rand::Rng;
        let mut rng = rng_from_seed(seed);
        let mut checked = 0usize;
        for g in 2..=3usize {
            let basis = k_invariant_cubic_basis(g);
            for _ in 0..20 {
                let mut f = IntPolynomial::zero(g);
                for m in &basis {
                    f.add_term(*m, rng.gen_range(-9i64..=9));
                }
                let m0f = m_chi(&HCharacter::trivial(), &f)?;
                for sigma in 0..(1u16 << g) {
                    if m0f.partial(sigma) != f_sigma(&f, sigma)?.scale(4) {
                        return Ok((false, format!("mismatch at g={g}, sigma={sigma}")));
                    }
                }
                checked += 1;
            }
        }
        Ok((
            true,
            format!("{checked} random cubics, all 2^g derivatives exact"),
        ))
    })
}

/// C6: addition formula on 100 random samples, g <= 3, relative residual
/// below 1e-9.
pub fn criterion_06(seed: u64) -> CriterionResult {
    run(6, "addition formula residuals", Some(120.0), || {
        let pol = TruncationPolicy::default();
        let rep = identities::addition_formula_report(3, 100, seed, &pol)?;
        Ok((
            rep.passes(1e-9),
            format!(
                "relative={:.3e} over {} samples (tol 1e-9)",
                rep.relative, rep.samples
            ),
        ))
    })
}

/// C7: Frobenius-family identities on random genus-2 period matrices:
/// rf, rf2a (all admissible pairs), the Grushevsky cubics (all sigma), and
/// the four-point Frobenius formula, all below 1e-8 relative.
pub fn criterion_07(seed: u64) -> CriterionResult {
    run(
        7,
        "Frobenius/Grushevsky identity batch on H_2",
        Some(300.0),
        || {
            let pol = TruncationPolicy::default();
            let rf = identities::rf_report(2, 20, 10, seed, &pol)?;
            let rf2a = identities::rf2a_report(2, 20, 10, seed + 1, &pol)?;
            let gru = identities::grushevsky_report(2, 20, 10, seed + 2, &pol)?;
            let fro = identities::frobenius_report(2, 20, 10, seed + 3, &pol)?;
            let all = [&rf, &rf2a, &gru, &fro];
            let worst = all.iter().map(|r| r.relative).fold(0.0, f64::max);
            Ok((
                all.iter().all(|r| r.passes(1e-8)),
                format!(
                "rf={:.2e} rf2a={:.2e} grushevsky={:.2e} frobenius={:.2e} (tol 1e-8, worst {:.2e})",
                rf.relative, rf2a.relative, gru.relative, fro.relative, worst
            ),
            ))
        },
    )
}

/// C8: genus-1 pipeline: periods of y^2 = x(x-1)(x-lambda) match the AGM
/// oracle to 1e-10 and the Jacobi quartic identity holds below 1e-12.
pub fn criterion_08(seed: u64) -> CriterionResult {
    run(8, "genus-1 pipeline vs AGM oracle", None, || {
        let pol = TruncationPolicy::default();
        let mut worst_tau = 0.0f64;
        for lambda in [2.0, 3.0, 4.0] {
            let bp = BranchPointSet::new(vec![0.0, 1.0, lambda])?;
            let pc = hyperelliptic_periods(&bp, 128)?;
            let diff = (pc.tau[(0, 0)] - genus1_tau_oracle(lambda)).norm();
            worst_tau = worst_tau.max(diff);
        }
        // Jacobi identity: the z_i = 0 specialization of the Frobenius
        // formula at random tau.
        let mut rng = rng_from_seed(seed);
        let fs = crate::chars::FundamentalSystem::standard(1)?;
        let mut worst_jacobi = 0.0f64;
        for _ in 0..10 {
            let tau = random_tau(1, &mut rng);
            let z0 = vec![Complex64::new(0.0, 0.0); 1];
            let s = identities::frobenius_sample(&tau, &fs, &[z0.clone(), z0.clone(), z0], &pol)?;
            worst_jacobi = worst_jacobi.max(s.residual / s.scale);
        }
        Ok((
            worst_tau < 1e-10 && worst_jacobi < 1e-12,
            format!("max |tau - oracle| = {worst_tau:.3e} (tol 1e-10), Jacobi residual {worst_jacobi:.3e} (tol 1e-12)"),
        ))
    })
}

/// C9: genus-3 pipeline: exactly one vanishing even constant, transported
/// normal form [(101);(111)], Grushevsky residuals below 1e-6 for all 8
/// sigma, and the quarter-period identity at ((101),(111)), z = 0.
pub fn criterion_09(seed: u64) -> CriterionResult {
    run(9, "genus-3 hyperelliptic pipeline", Some(600.0), || {
        let pol = TruncationPolicy::default();
        let bp = BranchPointSet::parse("0,1,2,3,4,5,6,7")?;
        let pc = hyperelliptic_periods(&bp, 256)?;
        let report = vanishing_pattern(&pc.tau, 1e-6, &pol)?;
        if report.verdict != Verdict::ConsistentHyperelliptic || report.vanishing.len() != 1 {
            return Ok((
                false,
                format!("classification: {} vanishing", report.vanishing.len()),
            ));
        }
        let cert = transport_to_standard(&pc.tau, &report, &pol)?;
        let revalidated = vanishing_pattern(&cert.tau_prime, 1e-6, &pol)?;
        let want = Characteristic::parse("101|111")?;
        if revalidated.vanishing != vec![want] {
            return Ok((
                false,
                format!("transported pattern {:?}", revalidated.vanishing),
            ));
        }
        let gru = identities::grushevsky_at_tau(&cert.tau_prime, 5, seed, &pol)?;
        let z0 = vec![Complex64::new(0.0, 0.0); 3];
        let rf2 = identities::rf2_sample(&cert.tau_prime, &z0, &[1, 0, 1], &[1, 1, 1], &pol)?;
        let rf2_rel = rf2.residual / rf2.scale;
        Ok((
            gru.passes(1e-6) && rf2_rel < 1e-6,
            format!(
                "vanishing=101|111, grushevsky={:.3e} (tol 1e-6), rf2@((101),(111))={:.3e} (tol 1e-6), word len {}",
                gru.relative, rf2_rel, cert.word.len()
            ),
        ))
    })
}

/// C10: genus-4 pipeline: exactly ten vanishing constants at the 1e-5
/// threshold and the six-equation system has numerical rank 5 with the
/// arrowhead determinant identity; transport is attempted but non-blocking.
pub fn criterion_10(_seed: u64) -> CriterionResult {
    run(10, "genus-4 hyperelliptic pipeline", Some(900.0), || {
        let pol = TruncationPolicy::default();
        let bp = BranchPointSet::parse("0,1,2,3,4,5,6,7,8")?;
        let pc = hyperelliptic_periods(&bp, 256)?;
        let report = vanishing_pattern(&pc.tau, 1e-5, &pol)?;
        if report.verdict != Verdict::ConsistentHyperelliptic || report.vanishing.len() != 10 {
            return Ok((
                false,
                format!("classification: {} vanishing", report.vanishing.len()),
            ));
        }
        let sys = identities::genus4_system(&pc.tau, 1e-6, &pol)?;
        let det_small = sys.det_abs < 1e-6 * sys.scale.powi(6);
        // Best-effort transport (identity when the constructed frame is
        // already standard); failure here does not block the criterion.
        let transport_note = match transport_to_standard(&pc.tau, &report, &pol) {
            Ok(cert) => format!("transport word len {}", cert.word.len()),
            Err(e) => format!("transport best-effort: {e}"),
        };
        Ok((
            sys.rank == 5 && sys.det_residual < 1e-9 && det_small,
            format!(
                "10 vanishing; rank={} (want 5), |det|={:.2e} vs scale^6 {:.2e}, arrowhead residual {:.2e}; {}",
                sys.rank, sys.det_abs, sys.scale.powi(6), sys.det_residual, transport_note
            ),
        ))
    })
}

/// C11: Gunning multisecant check on random genus-2 period matrices:
/// dependence ratio below 1e-6 on every sample, Gram rank 3, displayed block
/// pattern with off-block entries below 1e-8.
pub fn criterion_11(seed: u64) -> CriterionResult {
    run(
        11,
        "Gunning multisecant check, genus 2",
        Some(300.0),
        || {
            let pol = TruncationPolicy::default();
            let mut rng = rng_from_seed(seed);
            let mut worst_ratio = 0.0f64;
            let mut worst_off = 0.0f64;
            let mut worst_block = 0.0f64;
            for i in 0..10 {
                let tau = random_tau(2, &mut rng);
                let rep = gunning_check(&tau, 10, seed + i, &pol)?;
                worst_ratio = worst_ratio.max(rep.max_dependence_ratio);
                worst_off = worst_off.max(rep.off_block_max);
                worst_block = worst_block.max(rep.block_equality_error);
                if rep.gram_rank != 3 {
                    return Ok((false, format!("gram rank {} at sample {i}", rep.gram_rank)));
                }
            }
            Ok((
            worst_ratio < 1e-6 && worst_off < 1e-8 && worst_block < 1e-8,
            format!(
                "max dependence ratio {:.3e} (tol 1e-6), off-block {:.3e} (tol 1e-8), block eq {:.3e}, rank 3",
                worst_ratio, worst_off, worst_block
            ),
        ))
        },
    )
}

/// C12: the absolute-value transformation law
/// |theta[gamma m](gamma tau, 0)|^2 = |det(c tau + d)| |theta[m](tau, 0)|^2
/// for every standard generator and 50 random words, g <= 3.
pub fn criterion_12(seed: u64) -> CriterionResult {
    run(12, "theta constant transformation law", None, || {
        use rand::Rng;
        let pol = TruncationPolicy::default();
        let mut rng = rng_from_seed(seed);
        let mut worst = 0.0f64;
        let mut checked = 0usize;
        for g in 1..=3usize {
            let gens = Generator::all(g);
            let mut words: Vec<Vec<Generator>> = gens.iter().map(|gn| vec![*gn]).collect();
            let n_random = (50 + 2) / 3;
            let mut added = 0;
            while added < n_random {
                let len = rng.gen_range(2..=4);
                let w: Vec<Generator> = (0..len)
                    .map(|_| gens[rng.gen_range(0..gens.len())])
                    .collect();
                words.push(w);
                added += 1;
            }
            for w in &words {
                let gamma = word_to_matrix(g, w);
                // Resample tau until the image is numerically comfortable.
                let mut attempt = 0;
                let (tau, gtau) = loop {
                    let tau = random_tau(g, &mut rng);
                    if let Ok(gt) = sp_act(&gamma, &tau) {
                        if gt.im_min_eigenvalue() > 5e-3 {
                            break (tau, gt);
                        }
                    }
                    attempt += 1;
                    if attempt > 200 {
                        return Ok((false, format!("no usable tau for word {w:?}")));
                    }
                };
                let absdet = cocycle_abs_det(&gamma, &tau);
                let evens: Vec<Characteristic> =
                    Characteristic::all(g).filter(|m| m.is_even()).collect();
                for m in evens.iter().take(6) {
                    let lhs = theta_const(&char_act(&gamma, m), &gtau, &pol)?
                        .value()
                        .norm_sqr();
                    let rhs = absdet * theta_const(m, &tau, &pol)?.value().norm_sqr();
                    let rel = (lhs - rhs).abs() / lhs.max(rhs).max(1e-300);
                    worst = worst.max(rel);
                    checked += 1;
                }
            }
        }
        Ok((
            worst < 1e-8,
            format!(
                "worst relative deviation {:.3e} over {checked} checks (tol 1e-8)",
                worst
            ),
        ))
    })
}

/// C13: the signed Frobenius quartic witness exists and expands to the zero
/// polynomial for g = 1, 2, 3.
pub fn criterion_13(_seed: u64) -> CriterionResult {
    run(13, "Frobenius kernel witness", None, || {
        let mut sizes = Vec::new();
        for g in 1..=3usize {
            let v = frobenius_vector_in_kernel(g)?;
            v.verify_in_kernel()?;
            sizes.push(format!("g={g}: support {}", v.coefficients.len()));
        }
        Ok((true, sizes.join(", ")))
    })
}

/// Run one criterion by id.
pub fn run_criterion(id: usize, seed: u64) -> Option<CriterionResult> {
    let f: fn(u64) -> CriterionResult = match id {
        1 => criterion_01,
        2 => criterion_02,
        3 => criterion_03,
        4 => criterion_04,
        5 => criterion_05,
        6 => criterion_06,
        7 => criterion_07,
        8 => criterion_08,
        9 => criterion_09,
        10 => criterion_10,
        11 => criterion_11,
        12 => criterion_12,
        13 => criterion_13,
        _ => return None,
    };
    Some(f(seed))
}

pub const CRITERIA_COUNT: usize = 13;

/// Run every criterion (optionally filtered by id), collecting failures
/// rather than stopping.
pub fn run_all(seed: u64, only: Option<&[usize]>) -> Vec<CriterionResult> {
    (1..=CRITERIA_COUNT)
        .filter(|id| only.map_or(true, |o| o.contains(id)))
        .filter_map(|id| run_criterion(id, seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_criterion_rejects_unknown_id() {
        assert!(run_criterion(0, 1).is_none());
        assert!(run_criterion(14, 1).is_none());
    }

    #[test]
    fn filter_selects_subset() {
        let out = run_all(7, Some(&[13]));
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].id, 13);
        assert!(out[0].passed);
    }
}
