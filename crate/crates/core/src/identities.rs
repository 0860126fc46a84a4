//! Numerical residual evaluators for the theta identities: the addition
//! formula, biquadratic Riemann relations (plain and shifted), the
//! generalized Frobenius theta formula, the Grushevsky cubics R_sigma, their
//! quartic consequences, and the genus-4 six-equation system.
//!
//! Every evaluator reports the maximum absolute residual together with the
//! maximum summand magnitude ("scale"); the relative residual is their
//! ratio. Reports are deterministic given (seed, policy): sampling uses
//! ChaCha8 and batches are merged in sample order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chars::{dot2, Characteristic, FundamentalSystem};
use crate::error::{Error, Result};
use crate::heisenberg::RelationVector;
use crate::linalg::complex::CMat;
use crate::sampling::{random_tau, random_z};
use crate::theta::{
    q_eval, q_eval_or_zero, th2_map, theta1, theta1_nonreduced, PeriodMatrix, QMethod, ThetaValue,
    TruncationPolicy,
};

/// Outcome of a batch of residual evaluations of one identity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualReport {
    pub label: String,
    pub max_abs_residual: f64,
    /// Maximum magnitude among the identity's summands over all samples.
    pub scale: f64,
    /// max_abs_residual / scale (well-defined when scale > 0).
    pub relative: f64,
    pub samples: usize,
    pub seed: u64,
    /// Combined truncation-tail bound of the worst sample.
    pub max_tail: f64,
}

impl ResidualReport {
    fn from_samples(label: &str, seed: u64, samples: &[SampleResidual]) -> Self {
        let max_abs = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
        let scale = samples.iter().map(|s| s.scale).fold(0.0, f64::max);
        let max_tail = samples.iter().map(|s| s.tail).fold(0.0, f64::max);
        ResidualReport {
            label: label.to_string(),
            max_abs_residual: max_abs,
            scale,
            relative: if scale > 0.0 {
                max_abs / scale
            } else {
                f64::NAN
            },
            samples: samples.len(),
            seed,
            max_tail,
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.relative.is_finite() && self.relative < tol
    }
}

/// One evaluation: |lhs - rhs|, the summand scale, and the combined tail.
#[derive(Clone, Copy, Debug)]
pub struct SampleResidual {
    pub residual: f64,
    pub scale: f64,
    pub tail: f64,
}

fn c0() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Addition formula:
/// theta[e|d](2tau,2z) theta[e+e'|d](2tau,2w)
///   = 2^{-g} sum_sigma (-1)^{<e,sigma>} theta[e'|d+sigma](tau,z+w)
///                                       theta[e'|sigma](tau,z-w).
/// Both sides are evaluated through independent truncations.
pub fn addition_formula_sample(
    tau: &PeriodMatrix,
    z: &[Complex64],
    w: &[Complex64],
    eps: u32,
    eps_prime: u32,
    delta: u32,
    policy: &TruncationPolicy,
) -> Result<SampleResidual> {
    let g = tau.genus();
    let tau2 = tau.doubled();
    let z2: Vec<Complex64> = z.iter().map(|&v| 2.0 * v).collect();
    let w2: Vec<Complex64> = w.iter().map(|&v| 2.0 * v).collect();
    let m_left1 = Characteristic::new(g, eps, delta)?;
    let a1 = theta1(&m_left1, &tau2, &z2, policy)?;
    // eps + eps' may be non-reduced; with the bottom entry untouched the
    // reduction sign is +1, but route through `reduce` anyway.
    let eps_sum: Vec<i64> = (0..g)
        .map(|k| (((eps >> k) & 1) + ((eps_prime >> k) & 1)) as i64)
        .collect();
    let delta_vec: Vec<i64> = (0..g).map(|k| ((delta >> k) & 1) as i64).collect();
    let a2 = theta1_nonreduced(&eps_sum, &delta_vec, &tau2, &w2, policy)?;
    let lhs = a1.value() * a2.value();
    let lhs_tail = a1.mul_tail(&a2);

    let zw: Vec<Complex64> = z.iter().zip(w).map(|(&a, &b)| a + b).collect();
    let zmw: Vec<Complex64> = z.iter().zip(w).map(|(&a, &b)| a - b).collect();
    let mut rhs = c0();
    let mut rhs_tail = 0.0;
    let mut scale = lhs.norm();
    let inv = 1.0 / (1u64 << g) as f64;
    for sigma in 0..(1u32 << g) {
        let sgn = if dot2(eps, sigma) == 0 { 1.0 } else { -1.0 };
        let dsum: Vec<i64> = (0..g)
            .map(|k| (((delta >> k) & 1) + ((sigma >> k) & 1)) as i64)
            .collect();
        let ep_vec: Vec<i64> = (0..g).map(|k| ((eps_prime >> k) & 1) as i64).collect();
        let b1 = theta1_nonreduced(&ep_vec, &dsum, tau, &zw, policy)?;
        let b2 = theta1(
            &Characteristic::new(g, eps_prime, sigma)?,
            tau,
            &zmw,
            policy,
        )?;
        let term = sgn * inv * b1.value() * b2.value();
        rhs += term;
        rhs_tail += inv * b1.mul_tail(&b2);
        scale = scale.max(term.norm());
    }
    Ok(SampleResidual {
        residual: (lhs - rhs).norm(),
        scale,
        tail: lhs_tail + rhs_tail,
    })
}

/// Batch over random (tau, z, w, characteristics) with genus cycling 1..=max_g.
pub fn addition_formula_report(
    max_g: usize,
    n_samples: usize,
    seed: u64,
    policy: &TruncationPolicy,
) -> Result<ResidualReport> {
    let mut rng = crate::sampling::rng_from_seed(seed);
    let mut inputs = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let g = 1 + (i % max_g);
        let tau = random_tau(g, &mut rng);
        let z = random_z(g, &mut rng);
        let w = random_z(g, &mut rng);
        use rand::Rng;
        let eps = rng.gen_range(0..(1u32 << g));
        let ep = rng.gen_range(0..(1u32 << g));
        let delta = rng.gen_range(0..(1u32 << g));
        inputs.push((tau, z, w, eps, ep, delta));
    }
    let samples: Vec<Result<SampleResidual>> = crate::map_indexed(inputs.len(), |i| {
        let (tau, z, w, eps, ep, delta) = &inputs[i];
        addition_formula_sample(tau, z, w, *eps, *ep, *delta, policy)
    });
    let samples: Vec<SampleResidual> = samples.into_iter().collect::<Result<_>>()?;
    Ok(ResidualReport::from_samples("addition", seed, &samples))
}

/// Shifted biquadratic Riemann relation for a kernel vector v:
/// sum (-1)^{<sigma+x, delta>} v_{eps,delta} theta[eps|delta](0)
///     theta[eps+sigma|delta+rho](0) theta[eps+x|delta+y](2z)
///     theta[eps+sigma+x|delta+rho+y](2z) = 0.
pub fn riemann_sample(
    tau: &PeriodMatrix,
    z: &[Complex64],
    v: &RelationVector,
    x: &[i64],
    y: &[i64],
    policy: &TruncationPolicy,
) -> Result<SampleResidual> {
    v.verify_in_kernel()?;
    let g = tau.genus();
    if v.genus != g {
        return Err(Error::GenusMismatch(v.genus, g));
    }
    let z0 = vec![c0(); g];
    let z2: Vec<Complex64> = z.iter().map(|&t| 2.0 * t).collect();
    let bits = |m: u32| -> Vec<i64> { (0..g).map(|k| ((m >> k) & 1) as i64).collect() };
    let mut acc = c0();
    let mut tail = 0.0;
    let mut scale = 0.0f64;
    for (eps, delta, coef) in &v.coefficients {
        let ci = i64::try_from(coef.clone())
            .map_err(|_| Error::InvalidInput("coefficient exceeds i64".into()))?
            as f64;
        let sg_bit = (dot2(v.sigma, *delta)
            + x.iter()
                .zip(bits(*delta))
                .map(|(&xi, di)| (xi.rem_euclid(2)) * di)
                .sum::<i64>() as u32)
            & 1;
        let sgn = if sg_bit == 0 { 1.0 } else { -1.0 };
        let ev = bits(*eps);
        let dv = bits(*delta);
        let sv = bits(v.sigma);
        let rv = bits(v.rho);
        let add =
            |a: &[i64], b: &[i64]| -> Vec<i64> { a.iter().zip(b).map(|(p, q)| p + q).collect() };
        let t1 = theta1_nonreduced(&ev, &dv, tau, &z0, policy)?;
        let t2 = theta1_nonreduced(&add(&ev, &sv), &add(&dv, &rv), tau, &z0, policy)?;
        let t3 = theta1_nonreduced(&add(&ev, x), &add(&dv, y), tau, &z2, policy)?;
        let t4 = theta1_nonreduced(
            &add(&add(&ev, &sv), x),
            &add(&add(&dv, &rv), y),
            tau,
            &z2,
            policy,
        )?;
        let term = sgn * ci * t1.value() * t2.value() * t3.value() * t4.value();
        acc += term;
        scale = scale.max(term.norm());
        let n1 = t1.value().norm();
        let n2 = t2.value().norm();
        let n3 = t3.value().norm();
        let n4 = t4.value().norm();
        tail += ci.abs()
            * (t1.tail * n2 * n3 * n4
                + n1 * t2.tail * n3 * n4
                + n1 * n2 * t3.tail * n4
                + n1 * n2 * n3 * t4.tail
                + t1.tail * t2.tail * (n3 + t3.tail) * (n4 + t4.tail));
    }
    Ok(SampleResidual {
        residual: acc.norm(),
        scale,
        tail,
    })
}

/// Generalized Frobenius theta formula over a fundamental system:
/// sum_{j in B} eps_U(j) prod_{i=1}^4 theta[m_j](tau, z_i) = 0 with
/// z_4 recomputed as -(z_1 + z_2 + z_3).
pub fn frobenius_sample(
    tau: &PeriodMatrix,
    fs: &FundamentalSystem,
    zs: &[Vec<Complex64>; 3],
    policy: &TruncationPolicy,
) -> Result<SampleResidual> {
    let g = tau.genus();
    if fs.genus() != g {
        return Err(Error::GenusMismatch(fs.genus(), g));
    }
    let z4: Vec<Complex64> = (0..g).map(|k| -(zs[0][k] + zs[1][k] + zs[2][k])).collect();
    let zsum: f64 = (0..g)
        .map(|k| (zs[0][k] + zs[1][k] + zs[2][k] + z4[k]).norm())
        .sum();
    if zsum > 1e-14 {
        return Err(Error::ZSumViolation(zsum));
    }
    let all_z = [&zs[0], &zs[1], &zs[2], &z4];
    let mut acc = c0();
    let mut scale = 0.0f64;
    let mut tail = 0.0f64;
    for l in fs.b_labels() {
        let m = fs.char_at(l);
        let sgn = fs.epsilon_u(l) as f64;
        let mut prod = Complex64::new(sgn, 0.0);
        let mut vals = Vec::with_capacity(4);
        for z in all_z {
            let t = theta1(m, tau, z, policy)?;
            prod *= t.value();
            vals.push(t);
        }
        acc += prod;
        scale = scale.max(prod.norm());
        // First-order tail propagation through the four-fold product.
        let norms: Vec<f64> = vals.iter().map(|t| t.value().norm()).collect();
        for i in 0..4 {
            let mut rest = 1.0;
            for (j, n) in norms.iter().enumerate() {
                if j != i {
                    rest *= n + vals[j].tail;
                }
            }
            tail += vals[i].tail * rest;
        }
    }
    Ok(SampleResidual {
        residual: acc.norm(),
        scale,
        tail,
    })
}

/// Grushevsky cubic R_sigma at (tau, z):
/// Q[0,0] Theta[sigma] - sum_{k=0}^g (-1)^{<sigma, e_{k+1}>}
///     Q[s_k, e_{k+1}] Theta[sigma + s_k].
/// Returns the residual sample plus the nondegeneracy witness
/// max_k(|Q[0,0]|, |Q[s_k, e_{k+1}]|).
pub fn grushevsky_sample(
    tau: &PeriodMatrix,
    sigma: u32,
    z: &[Complex64],
    policy: &TruncationPolicy,
) -> Result<(SampleResidual, f64)> {
    let g = tau.genus();
    let th = th2_map(tau, z, policy)?;
    let q00 = q_eval(0, 0, tau, z, QMethod::Product, policy)?;
    let mut acc = q00.value() * th[sigma as usize].value();
    let mut scale = acc.norm();
    let mut witness = q00.value().norm();
    let mut tail = q00.mul_tail(&th[sigma as usize]);
    for k in 0..=g {
        let sk = Characteristic::s_mask(g, k);
        let ek1 = Characteristic::e_mask(g, k + 1);
        let q = q_eval(sk, ek1, tau, z, QMethod::Product, policy)?;
        witness = witness.max(q.value().norm());
        let sgn = if dot2(sigma, ek1) == 0 { 1.0 } else { -1.0 };
        let t = &th[(sigma ^ sk) as usize];
        let term = sgn * q.value() * t.value();
        acc -= term;
        scale = scale.max(term.norm());
        tail += q.mul_tail(t);
    }
    Ok((
        SampleResidual {
            residual: acc.norm(),
            scale,
            tail,
        },
        witness,
    ))
}

/// Q[0,0] Q[eps1,delta1]
///   = sum_k (-1)^{<s_k, delta1>} Q[s_k,e_{k+1}] Q[s_k+eps1, e_{k+1}+delta1].
///
/// The k-th sign comes from re-indexing sigma -> sigma + s_k in the sum form
/// of the shifted quadric (it is exactly the combination M(chi) R_0 with
/// chi = (delta1, eps1)); terms whose shifted index pair is odd contribute
/// an exact zero and are counted in the returned skip list.
pub fn rf2a_sample(
    tau: &PeriodMatrix,
    z: &[Complex64],
    eps1: u32,
    delta1: u32,
    policy: &TruncationPolicy,
) -> Result<(SampleResidual, Vec<(u32, u32)>)> {
    let g = tau.genus();
    if dot2(eps1, delta1) != 0 {
        return Err(Error::OddIndexPair(
            format!("{:0w$b}", eps1, w = g),
            format!("{:0w$b}", delta1, w = g),
        ));
    }
    let q00 = q_eval(0, 0, tau, z, QMethod::Product, policy)?;
    let q1 = q_eval(eps1, delta1, tau, z, QMethod::Product, policy)?;
    let lhs = q00.value() * q1.value();
    let mut tail = q00.mul_tail(&q1);
    let mut scale = lhs.norm();
    let mut acc = lhs;
    let mut skipped = Vec::new();
    for k in 0..=g {
        let sk = Characteristic::s_mask(g, k);
        let ek1 = Characteristic::e_mask(g, k + 1);
        let qa = q_eval(sk, ek1, tau, z, QMethod::Product, policy)?;
        let shifted = Characteristic::new(g, sk ^ eps1, ek1 ^ delta1)?;
        if !shifted.is_even() {
            skipped.push((sk ^ eps1, ek1 ^ delta1));
            continue;
        }
        let qb = q_eval_or_zero(sk ^ eps1, ek1 ^ delta1, tau, z, policy)?;
        let sgn = if dot2(sk, delta1) == 0 { 1.0 } else { -1.0 };
        let term = sgn * qa.value() * qb.value();
        acc -= term;
        scale = scale.max(term.norm());
        tail += qa.mul_tail(&qb);
    }
    Ok((
        SampleResidual {
            residual: acc.norm(),
            scale,
            tail,
        },
        skipped,
    ))
}

/// The fundamental special case Q[0,0]^2 = sum_k Q[s_k, e_{k+1}]^2.
pub fn rf_sample(
    tau: &PeriodMatrix,
    z: &[Complex64],
    policy: &TruncationPolicy,
) -> Result<SampleResidual> {
    Ok(rf2a_sample(tau, z, 0, 0, policy)?.0)
}

/// Frobenius' formula at quarter-period shifts:
/// theta[0|0](0)^2 theta[x|y](2z)^2
///   = sum_k (-1)^{<x, e_{k+1}>} theta[s_k|e_{k+1}](0)^2
///                               theta[s_k+x|e_{k+1}+y](2z)^2,
/// for integer vectors x, y (non-reduced characteristics via `reduce`; the
/// squares make the reduction signs drop out). The k-th sign is the
/// exp(-pi i x^T (b + y)) factor left over from completing the square at
/// the shifted point z + (tau x + y)/4, which depends on the bottom row b.
///
/// When every summand degenerates (the hyperelliptic vanishing case) the
/// scale falls back to |theta[0|0](0)^2 theta[0|0](2z)^2| so the relative
/// residual stays meaningful.
pub fn rf2_sample(
    tau: &PeriodMatrix,
    z: &[Complex64],
    x: &[i64],
    y: &[i64],
    policy: &TruncationPolicy,
) -> Result<SampleResidual> {
    let g = tau.genus();
    if x.len() != g || y.len() != g {
        return Err(Error::LengthMismatch {
            expected: g,
            got: x.len().max(y.len()),
        });
    }
    let z0 = vec![c0(); g];
    let z2: Vec<Complex64> = z.iter().map(|&t| 2.0 * t).collect();
    let sq = |t: &ThetaValue| -> (Complex64, f64) {
        (
            t.value() * t.value(),
            2.0 * t.value().norm() * t.tail + t.tail * t.tail,
        )
    };
    let t00 = theta1(&Characteristic::zero(g), tau, &z0, policy)?;
    let txy = theta1_nonreduced(x, y, tau, &z2, policy)?;
    let (a2, a2t) = sq(&t00);
    let (b2, b2t) = sq(&txy);
    let lhs = a2 * b2;
    let mut tail = a2.norm() * b2t + b2.norm() * a2t;
    let mut scale = lhs.norm();
    let mut acc = lhs;
    for k in 0..=g {
        let sk = Characteristic::s_mask(g, k);
        let ek1 = Characteristic::e_mask(g, k + 1);
        let skv: Vec<i64> = (0..g).map(|i| ((sk >> i) & 1) as i64).collect();
        let ekv: Vec<i64> = (0..g).map(|i| ((ek1 >> i) & 1) as i64).collect();
        let xs: Vec<i64> = skv.iter().zip(x).map(|(a, b)| a + b).collect();
        let ys: Vec<i64> = ekv.iter().zip(y).map(|(a, b)| a + b).collect();
        let tc = theta1(&Characteristic::new(g, sk, ek1)?, tau, &z0, policy)?;
        let ts = theta1_nonreduced(&xs, &ys, tau, &z2, policy)?;
        let (c2, c2t) = sq(&tc);
        let (d2, d2t) = sq(&ts);
        let xk: i64 = (0..g).map(|i| ((ek1 >> i) & 1) as i64 * x[i]).sum();
        let sgn = if xk.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let term = sgn * c2 * d2;
        acc -= term;
        scale = scale.max(term.norm());
        tail += c2.norm() * d2t + d2.norm() * c2t;
    }
    // Degenerate-scale fallback: the (x, y) = (0, 0) shaped term.
    let t0z = theta1(&Characteristic::zero(g), tau, &z2, policy)?;
    let fallback = (t00.value() * t00.value() * t0z.value() * t0z.value()).norm();
    scale = scale.max(fallback);
    Ok(SampleResidual {
        residual: acc.norm(),
        scale,
        tail,
    })
}

/// The genus-4 six-equation system: arrowhead matrix in the squared theta
/// constants, its numerical rank, and the closed-form determinant residual.
#[derive(Clone, Debug, Serialize)]
pub struct Genus4System {
    /// Row-major 6x6 complex entries as (re, im) pairs.
    pub matrix: Vec<Vec<(f64, f64)>>,
    pub rank: usize,
    pub det_abs: f64,
    /// |det(A) - a^4 (a^2 - sum b_k^2)| in units of scale^6.
    pub det_residual: f64,
    pub scale: f64,
}

/// Build the arrowhead system from the six squared constants
/// a = theta[0|0]^2, b_k = theta[s_k|e_{k+1}]^2 (k = 0..4) at z = 0.
pub fn genus4_system(
    tau: &PeriodMatrix,
    rank_tol: f64,
    policy: &TruncationPolicy,
) -> Result<Genus4System> {
    let g = tau.genus();
    if g != 4 {
        return Err(Error::InvalidGenus(
            g,
            "the six-equation system is genus-4 only",
        ));
    }
    let z0 = vec![c0(); 4];
    let a = theta1(&Characteristic::zero(4), tau, &z0, policy)?.value();
    let a2 = a * a;
    let mut b2 = Vec::with_capacity(5);
    for k in 0..=4usize {
        let sk = Characteristic::s_mask(4, k);
        let ek1 = Characteristic::e_mask(4, k + 1);
        let t = theta1(&Characteristic::new(4, sk, ek1)?, tau, &z0, policy)?.value();
        b2.push(t * t);
    }
    let mut m = CMat::zeros(6, 6);
    for i in 0..6 {
        m[(i, i)] = a2;
    }
    for (k, &b) in b2.iter().enumerate() {
        m[(0, k + 1)] = -b;
        m[(k + 1, 0)] = -b;
    }
    let rank = m.numerical_rank(rank_tol);
    let det = m.det();
    let closed = a2.powu(4) * (a2 * a2 - b2.iter().map(|&b| b * b).sum::<Complex64>());
    let scale = m.max_abs();
    let det_residual = (det - closed).norm() / scale.powi(6).max(1e-300);
    let matrix = (0..6)
        .map(|i| (0..6).map(|j| (m[(i, j)].re, m[(i, j)].im)).collect())
        .collect();
    Ok(Genus4System {
        matrix,
        rank,
        det_abs: det.norm(),
        det_residual,
        scale,
    })
}

/// Batch drivers keyed by identity name; used by the CLI and the acceptance
/// suite.
pub fn rf_report(
    g: usize,
    n_tau: usize,
    n_z: usize,
    seed: u64,
    policy: &TruncationPolicy,
) -> Result<ResidualReport> {
    let mut rng = crate::sampling::rng_from_seed(seed);
    let mut samples = Vec::new();
    for _ in 0..n_tau {
        let tau = random_tau(g, &mut rng);
        for _ in 0..n_z {
            let z = random_z(g, &mut rng);
            samples.push(rf_sample(&tau, &z, policy)?);
        }
    }
    Ok(ResidualReport::from_samples("rf", seed, &samples))
}

pub fn rf2a_report(
    g: usize,
    n_tau: usize,
    n_z: usize,
    seed: u64,
    policy: &TruncationPolicy,
) -> Result<ResidualReport> {
    let mut rng = crate::sampling::rng_from_seed(seed);
    let mut samples = Vec::new();
    for _ in 0..n_tau {
        let tau = random_tau(g, &mut rng);
        for _ in 0..n_z {
            let z = random_z(g, &mut rng);
            for (e1, d1) in crate::heisenberg::admissible_pairs(g) {
                samples.push(rf2a_sample(&tau, &z, e1, d1, policy)?.0);
            }
        }
    }
    Ok(ResidualReport::from_samples("rf2a", seed, &samples))
}

pub fn rf2_report(
    g: usize,
    n_tau: usize,
    n_z: usize,
    seed: u64,
    policy: &TruncationPolicy,
) -> Result<ResidualReport> {
    let mut rng = crate::sampling::rng_from_seed(seed);
    let mut samples = Vec::new();
    for _ in 0..n_tau {
        let tau = random_tau(g, &mut rng);
        for _ in 0..n_z {
            let z = random_z(g, &mut rng);
            use rand::Rng;
            let x: Vec<i64> = (0..g).map(|_| rng.gen_range(0..=1i64)).collect();
            let y: Vec<i64> = (0..g).map(|_| rng.gen_range(0..=1i64)).collect();
            samples.push(rf2_sample(&tau, &z, &x, &y, policy)?);
        }
    }
    Ok(ResidualReport::from_samples("rf2", seed, &samples))
}

pub fn grushevsky_report(
    g: usize,
    n_tau: usize,
    n_z: usize,
    seed: u64,
    policy: &TruncationPolicy,
) -> Result<ResidualReport> {
    let mut rng = crate::sampling::rng_from_seed(seed);
    let mut samples = Vec::new();
    for _ in 0..n_tau {
        let tau = random_tau(g, &mut rng);
        for _ in 0..n_z {
            let z = random_z(g, &mut rng);
            for sigma in 0..(1u32 << g) {
                samples.push(grushevsky_sample(&tau, sigma, &z, policy)?.0);
            }
        }
    }
    Ok(ResidualReport::from_samples("grushevsky", seed, &samples))
}

pub fn frobenius_report(
    g: usize,
    n_tau: usize,
    n_quads: usize,
    seed: u64,
    policy: &TruncationPolicy,
) -> Result<ResidualReport> {
    let fs = FundamentalSystem::standard(g)?;
    let mut rng = crate::sampling::rng_from_seed(seed);
    let mut samples = Vec::new();
    for _ in 0..n_tau {
        let tau = random_tau(g, &mut rng);
        for _ in 0..n_quads {
            let zs = [
                random_z(g, &mut rng),
                random_z(g, &mut rng),
                random_z(g, &mut rng),
            ];
            samples.push(frobenius_sample(&tau, &fs, &zs, policy)?);
        }
    }
    Ok(ResidualReport::from_samples("frobenius", seed, &samples))
}

pub fn riemann_report(
    g: usize,
    n_tau: usize,
    seed: u64,
    policy: &TruncationPolicy,
) -> Result<ResidualReport> {
    let (_, basis) = crate::heisenberg::relation_space(g, 0, 0)?;
    let mut rng = crate::sampling::rng_from_seed(seed);
    let mut samples = Vec::new();
    for _ in 0..n_tau {
        let tau = random_tau(g, &mut rng);
        let z = random_z(g, &mut rng);
        use rand::Rng;
        for v in &basis {
            let x: Vec<i64> = (0..g).map(|_| rng.gen_range(0..=1i64)).collect();
            let y: Vec<i64> = (0..g).map(|_| rng.gen_range(0..=1i64)).collect();
            samples.push(riemann_sample(&tau, &z, v, &x, &y, policy)?);
        }
    }
    Ok(ResidualReport::from_samples("riemann", seed, &samples))
}

/// Evaluate R_sigma residuals for every sigma at a fixed (typically
/// pipeline-produced) tau.
pub fn grushevsky_at_tau(
    tau: &PeriodMatrix,
    n_z: usize,
    seed: u64,
    policy: &TruncationPolicy,
) -> Result<ResidualReport> {
    let g = tau.genus();
    let mut rng = crate::sampling::rng_from_seed(seed);
    let mut samples = Vec::new();
    for _ in 0..n_z {
        let z = random_z(g, &mut rng);
        for sigma in 0..(1u32 << g) {
            samples.push(grushevsky_sample(tau, sigma, &z, policy)?.0);
        }
    }
    Ok(ResidualReport::from_samples("grushevsky", seed, &samples))
}

pub fn rf_at_tau(
    tau: &PeriodMatrix,
    n_z: usize,
    seed: u64,
    policy: &TruncationPolicy,
) -> Result<ResidualReport> {
    let g = tau.genus();
    let mut rng = crate::sampling::rng_from_seed(seed);
    let mut samples = Vec::new();
    for _ in 0..n_z {
        let z = random_z(g, &mut rng);
        samples.push(rf_sample(tau, &z, policy)?);
    }
    Ok(ResidualReport::from_samples("rf", seed, &samples))
}

pub fn frobenius_at_tau(
    tau: &PeriodMatrix,
    n_quads: usize,
    seed: u64,
    policy: &TruncationPolicy,
) -> Result<ResidualReport> {
    let g = tau.genus();
    let fs = FundamentalSystem::standard(g)?;
    let mut rng = crate::sampling::rng_from_seed(seed);
    let mut samples = Vec::new();
    for _ in 0..n_quads {
        let zs = [
            random_z(g, &mut rng),
            random_z(g, &mut rng),
            random_z(g, &mut rng),
        ];
        samples.push(frobenius_sample(tau, &fs, &zs, policy)?);
    }
    Ok(ResidualReport::from_samples("frobenius", seed, &samples))
}

/// Heisenberg covariance check for the Grushevsky cubics: R_sigma evaluated
/// after z -> z + (tau x + y)/2 agrees (up to sign) with R_{sigma+x} at z,
/// rescaled by the row factor exp(-pi i x^T tau x / 2 - 2 pi i x^T z)^3-free
/// comparison: we compare |R| profiles which the translation permutes.
pub fn grushevsky_translation_covariance(
    tau: &PeriodMatrix,
    z: &[Complex64],
    x: u32,
    y: u32,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let g = tau.genus();
    let xv: Vec<f64> = (0..g).map(|k| ((x >> k) & 1) as f64).collect();
    let tx = tau.mul_real_vec(&xv);
    let zt: Vec<Complex64> = (0..g)
        .map(|k| z[k] + 0.5 * tx[k] + Complex64::new(0.5 * ((y >> k) & 1) as f64, 0.0))
        .collect();
    // |R_sigma(z + (tau x + y)/2)| should match |R_{sigma + x}(z)| up to a
    // sigma-independent factor; compare normalized profiles.
    let mut before = Vec::new();
    let mut after = Vec::new();
    for sigma in 0..(1u32 << g) {
        before.push(grushevsky_sample(tau, sigma ^ x, z, policy)?.0.residual);
        after.push(grushevsky_sample(tau, sigma, &zt, policy)?.0.residual);
    }
    let nb: f64 = before.iter().map(|v| v * v).sum::<f64>().sqrt();
    let na: f64 = after.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nb < 1e-300 || na < 1e-300 {
        return Ok(0.0);
    }
    let mut dev = 0.0f64;
    for s in 0..before.len() {
        dev = dev.max((before[s] / nb - after[s] / na).abs());
    }
    Ok(dev)
}
