//! Rigorous numerical evaluation of first- and second-order theta functions
//! by truncated lattice sums with certified tail bounds.
//!
//! The series is
//!
//! ```text
//! theta[eps|delta](tau, z) =
//!     sum_{n in Z^g} exp(pi i [ (n + eps/2)^T tau (n + eps/2)
//!                             + 2 (n + eps/2)^T (z + delta/2) ])
//! ```
//!
//! Write Y = Im tau, v = Im z, c = eps/2. Completing the square in the term
//! magnitudes gives
//!
//! ```text
//! |term(n)| = exp(pi v^T Y^{-1} v) * exp(-pi || R (n + c + Y^{-1} v) ||^2),
//! ```
//!
//! with Y = R^T R the Cholesky factorization, so the summand decays as an
//! exact Gaussian around the shifted center t = c + Y^{-1} v. We sum every
//! lattice point in the box ||n + t||_inf <= J and bound the complement by
//! infinity-norm shells: every omitted point has ||n + t||_inf > j >= J for
//! some shell j, at most (2j+3)^g - (2j-1)^g points per shell, and each term
//! is at most M exp(-pi mu j^2) where mu is the smallest eigenvalue of Y and
//! M = exp(pi v^T Y^{-1} v). The reported `tail` is that shell sum.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chars::{dot2, Characteristic};
use crate::error::{Error, Result};
use crate::linalg::complex::{cholesky_solve, cholesky_upper, symmetric_eigenvalues};

const PI: f64 = std::f64::consts::PI;

/// A point of the Siegel upper half-space: complex symmetric g x g with
/// positive definite imaginary part.
#[derive(Clone, Debug)]
pub struct PeriodMatrix {
    genus: usize,
    entries: Vec<Complex64>, // row-major
}

/// Serialized form: {"g": .., "re": [[..]], "im": [[..]]}.
#[derive(Serialize, Deserialize)]
struct PeriodMatrixJson {
    g: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for PeriodMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let g = self.genus;
        let re = (0..g)
            .map(|i| (0..g).map(|j| self[(i, j)].re).collect())
            .collect();
        let im = (0..g)
            .map(|i| (0..g).map(|j| self[(i, j)].im).collect())
            .collect();
        PeriodMatrixJson { g, re, im }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PeriodMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PeriodMatrixJson::deserialize(d)?;
        let mut entries = Vec::with_capacity(j.g * j.g);
        if j.re.len() != j.g || j.im.len() != j.g {
            return Err(serde::de::Error::custom("row count does not match g"));
        }
        for i in 0..j.g {
            if j.re[i].len() != j.g || j.im[i].len() != j.g {
                return Err(serde::de::Error::custom("column count does not match g"));
            }
            for k in 0..j.g {
                entries.push(Complex64::new(j.re[i][k], j.im[i][k]));
            }
        }
        PeriodMatrix::new(j.g, entries).map_err(serde::de::Error::custom)
    }
}

impl std::ops::Index<(usize, usize)> for PeriodMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.genus + j]
    }
}

impl PeriodMatrix {
    /// Validate symmetry (relative deviation <= tol) and Im > 0, then
    /// symmetrize exactly.
    pub fn new_with_tol(genus: usize, entries: Vec<Complex64>, sym_tol: f64) -> Result<Self> {
        if entries.len() != genus * genus || genus == 0 {
            return Err(Error::LengthMismatch {
                expected: genus * genus,
                got: entries.len(),
            });
        }
        let at = |i: usize, j: usize| entries[i * genus + j];
        let scale = entries
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            .max(1e-300);
        let mut dev = 0.0f64;
        for i in 0..genus {
            for j in (i + 1)..genus {
                dev = dev.max((at(i, j) - at(j, i)).norm());
            }
        }
        if dev > sym_tol * scale {
            return Err(Error::NotSymmetric(dev / scale));
        }
        let mut sym = vec![Complex64::new(0.0, 0.0); genus * genus];
        for i in 0..genus {
            for j in 0..genus {
                sym[i * genus + j] = 0.5 * (at(i, j) + at(j, i));
            }
        }
        let pm = Self {
            genus,
            entries: sym,
        };
        let min_eig = pm.im_min_eigenvalue();
        if min_eig <= 1e-8 {
            return Err(Error::NotPositiveDefinite(min_eig));
        }
        Ok(pm)
    }

    pub fn new(genus: usize, entries: Vec<Complex64>) -> Result<Self> {
        Self::new_with_tol(genus, entries, 1e-12)
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let g = rows.len();
        let mut v = Vec::with_capacity(g * g);
        for r in rows {
            if r.len() != g {
                return Err(Error::LengthMismatch {
                    expected: g,
                    got: r.len(),
                });
            }
            v.extend_from_slice(r);
        }
        Self::new(g, v)
    }

    /// Diagonal purely imaginary matrix i * diag(t).
    pub fn diag_imaginary(ts: &[f64]) -> Result<Self> {
        let g = ts.len();
        let mut v = vec![Complex64::new(0.0, 0.0); g * g];
        for (i, &t) in ts.iter().enumerate() {
            v[i * g + i] = Complex64::new(0.0, t);
        }
        Self::new(g, v)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn im_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.genus)
            .map(|i| (0..self.genus).map(|j| self[(i, j)].im).collect())
            .collect()
    }

    pub fn im_min_eigenvalue(&self) -> f64 {
        symmetric_eigenvalues(&self.im_matrix())[0]
    }

    /// 2 * tau, used by second-order theta functions.
    pub fn doubled(&self) -> PeriodMatrix {
        let entries = self.entries.iter().map(|&z| 2.0 * z).collect();
        PeriodMatrix {
            genus: self.genus,
            entries,
        }
    }

    /// tau * x for a real vector x.
    pub fn mul_real_vec(&self, x: &[f64]) -> Vec<Complex64> {
        (0..self.genus)
            .map(|i| (0..self.genus).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }
}

/// A complex value together with a rigorous bound on the omitted series tail.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ThetaValue {
    pub re: f64,
    pub im: f64,
    pub tail: f64,
}

impl ThetaValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn exact_zero() -> Self {
        Self {
            re: 0.0,
            im: 0.0,
            tail: 0.0,
        }
    }

    fn from_parts(v: Complex64, tail: f64) -> Self {
        Self {
            re: v.re,
            im: v.im,
            tail,
        }
    }

    /// Tail bound of a product of two certified values.
    pub fn mul_tail(&self, other: &ThetaValue) -> f64 {
        self.value().norm() * other.tail + other.value().norm() * self.tail + self.tail * other.tail
    }
}

/// Truncation control: absolute/relative tail target plus a cap on the box
/// radius J.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub target_tail: f64,
    pub hard_radius_cap: u32,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            target_tail: 1e-12,
            hard_radius_cap: 60,
        }
    }
}

/// Shell tail bound: M * sum_{j>=J} [(2j+3)^g - (2j-1)^g] exp(-pi mu j^2).
fn shell_tail_bound(g: usize, mu: f64, m_factor: f64, j0: u32) -> f64 {
    let mut total = 0.0f64;
    let mut j = j0.max(1) as f64;
    loop {
        let count = (2.0 * j + 3.0).powi(g as i32) - (2.0 * j - 1.0).powi(g as i32);
        let term = count * (-PI * mu * j * j).exp();
        total += term;
        // Ratio bound for the remainder once terms decay geometrically.
        let ratio =
            ((2.0 * j + 5.0) / (2.0 * j + 1.0)).powi(g as i32) * (-PI * mu * (2.0 * j + 1.0)).exp();
        if ratio < 0.5 {
            let next = term * ratio;
            total += next / (1.0 - ratio);
            break;
        }
        if j > j0 as f64 + 10_000.0 {
            return f64::INFINITY;
        }
        j += 1.0;
    }
    m_factor * total * (1.0 + 1e-12)
}

struct LatticeSum {
    value: Complex64,
    tail: f64,
}

/// Sum the series over the box ||n + t||_inf <= J, with t = c + Y^{-1} v.
fn lattice_sum(
    tau: &PeriodMatrix,
    c: &[f64],
    w: &[Complex64],
    center: &[f64],
    j_radius: u32,
    mu: f64,
    m_factor: f64,
    g: usize,
) -> LatticeSum {
    // Enumerate n coordinate-by-coordinate; per point cost is O(g^2) complex.
    let mut los = vec![0i64; g];
    let mut his = vec![0i64; g];
    for k in 0..g {
        los[k] = (-center[k] - j_radius as f64).ceil() as i64;
        his[k] = (-center[k] + j_radius as f64).floor() as i64;
    }
    let mut n = los.clone();
    let mut sum = Complex64::new(0.0, 0.0);
    'outer: loop {
        // exponent = pi i [ (n+c)^T tau (n+c) + 2 (n+c)^T w ]
        let mut quad = Complex64::new(0.0, 0.0);
        let mut lin = Complex64::new(0.0, 0.0);
        for i in 0..g {
            let ni = n[i] as f64 + c[i];
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..g {
                row += tau[(i, j)] * (n[j] as f64 + c[j]);
            }
            quad += ni * row;
            lin += ni * w[i];
        }
        let expo = Complex64::new(0.0, PI) * (quad + 2.0 * lin);
        sum += expo.exp();
        // increment odometer
        for k in 0..g {
            n[k] += 1;
            if n[k] <= his[k] {
                continue 'outer;
            }
            n[k] = los[k];
        }
        break;
    }
    let tail = shell_tail_bound(g, mu, m_factor, j_radius);
    LatticeSum { value: sum, tail }
}

/// First order theta function with (reduced) characteristic m at (tau, z).
pub fn theta1(
    m: &Characteristic,
    tau: &PeriodMatrix,
    z: &[Complex64],
    policy: &TruncationPolicy,
) -> Result<ThetaValue> {
    let g = tau.genus();
    if m.genus() != g {
        return Err(Error::GenusMismatch(m.genus(), g));
    }
    if z.len() != g {
        return Err(Error::LengthMismatch {
            expected: g,
            got: z.len(),
        });
    }
    let y = tau.im_matrix();
    let mu = symmetric_eigenvalues(&y)[0];
    if mu <= 1e-8 {
        return Err(Error::NotPositiveDefinite(mu));
    }
    let r = cholesky_upper(&y).ok_or(Error::NotPositiveDefinite(mu))?;
    let c: Vec<f64> = m.eps_bits().iter().map(|&b| b as f64 / 2.0).collect();
    let w: Vec<Complex64> = z
        .iter()
        .zip(m.delta_bits())
        .map(|(&zi, d)| zi + Complex64::new(d as f64 / 2.0, 0.0))
        .collect();
    let v: Vec<f64> = z.iter().map(|zi| zi.im).collect();
    let yinv_v = cholesky_solve(&r, &v);
    let m_factor = (PI * v.iter().zip(&yinv_v).map(|(a, b)| a * b).sum::<f64>()).exp();
    let center: Vec<f64> = (0..g).map(|i| c[i] + yinv_v[i]).collect();

    // Smallest J whose shell bound meets the absolute target; the relative
    // alternative is rechecked after summation.
    let abs_target = policy.target_tail * m_factor.max(1.0);
    let mut j_radius = 1u32;
    while shell_tail_bound(g, mu, m_factor, j_radius) > abs_target {
        j_radius += 1;
        if j_radius > policy.hard_radius_cap {
            return Err(Error::TailTargetUnreachable {
                target: abs_target,
                achieved: shell_tail_bound(g, mu, m_factor, policy.hard_radius_cap),
                cap: policy.hard_radius_cap,
            });
        }
    }
    let mut ls = lattice_sum(tau, &c, &w, &center, j_radius, mu, m_factor, g);
    // Honor the contract tail <= max(target, target * |value|).
    while ls.tail > policy.target_tail.max(policy.target_tail * ls.value.norm()) {
        j_radius += 1;
        if j_radius > policy.hard_radius_cap {
            return Err(Error::TailTargetUnreachable {
                target: policy.target_tail,
                achieved: ls.tail,
                cap: policy.hard_radius_cap,
            });
        }
        ls = lattice_sum(tau, &c, &w, &center, j_radius, mu, m_factor, g);
    }
    Ok(ThetaValue::from_parts(ls.value, ls.tail))
}

/// Theta constant theta[m](tau, 0); odd characteristics short-circuit to an
/// exact zero.
pub fn theta_const(
    m: &Characteristic,
    tau: &PeriodMatrix,
    policy: &TruncationPolicy,
) -> Result<ThetaValue> {
    if !m.is_even() {
        return Ok(ThetaValue::exact_zero());
    }
    let z = vec![Complex64::new(0.0, 0.0); tau.genus()];
    theta1(m, tau, &z, policy)
}

/// Second order theta function Theta[sigma](tau, z) = theta[sigma|0](2 tau, 2z).
pub fn theta2(
    sigma: u32,
    tau: &PeriodMatrix,
    z: &[Complex64],
    policy: &TruncationPolicy,
) -> Result<ThetaValue> {
    let g = tau.genus();
    let m = Characteristic::new(g, sigma, 0)?;
    let tau2 = tau.doubled();
    let z2: Vec<Complex64> = z.iter().map(|&zi| 2.0 * zi).collect();
    theta1(&m, &tau2, &z2, policy)
}

/// The full second-order theta map (Theta[sigma])_{sigma in Z_2^g} in binary
/// counting order (bit 0 = coordinate 1).
pub fn th2_map(
    tau: &PeriodMatrix,
    z: &[Complex64],
    policy: &TruncationPolicy,
) -> Result<Vec<ThetaValue>> {
    let g = tau.genus();
    let n = 1usize << g;
    let vals = crate::map_indexed(n, |s| theta2(s as u32, tau, z, policy));
    vals.into_iter().collect()
}

/// Which route `q_eval` takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QMethod {
    /// sum_sigma (-1)^{<sigma, eps'>} Theta[sigma](tau,z) Theta[sigma+eps](tau,z)
    Sum,
    /// theta[eps|eps'](tau, 0) * theta[eps|eps'](tau, 2z)
    Product,
}

/// Q[eps, eps'](tau, z), defined for even index pairs only.
pub fn q_eval(
    eps: u32,
    eps_prime: u32,
    tau: &PeriodMatrix,
    z: &[Complex64],
    method: QMethod,
    policy: &TruncationPolicy,
) -> Result<ThetaValue> {
    let g = tau.genus();
    let m = Characteristic::new(g, eps, eps_prime)?;
    if !m.is_even() {
        return Err(Error::OddIndexPair(
            format!("{:0w$b}", eps, w = g),
            format!("{:0w$b}", eps_prime, w = g),
        ));
    }
    match method {
        QMethod::Product => {
            let t0 = theta_const(&m, tau, policy)?;
            let z2: Vec<Complex64> = z.iter().map(|&zi| 2.0 * zi).collect();
            let t2 = theta1(&m, tau, &z2, policy)?;
            let v = t0.value() * t2.value();
            Ok(ThetaValue::from_parts(v, t0.mul_tail(&t2)))
        }
        QMethod::Sum => {
            let th = th2_map(tau, z, policy)?;
            let mut acc = Complex64::new(0.0, 0.0);
            let mut tail = 0.0;
            for sigma in 0..(1u32 << g) {
                let sgn = if dot2(sigma, eps_prime) == 0 {
                    1.0
                } else {
                    -1.0
                };
                let a = &th[sigma as usize];
                let b = &th[(sigma ^ eps) as usize];
                acc += sgn * a.value() * b.value();
                tail += a.mul_tail(b);
            }
            Ok(ThetaValue::from_parts(acc, tail))
        }
    }
}

/// Q[eps, eps'] that returns an exact zero for odd index pairs (both the sum
/// and the product route vanish identically there); used by the identity
/// evaluators where odd pairs legitimately appear and drop out.
pub fn q_eval_or_zero(
    eps: u32,
    eps_prime: u32,
    tau: &PeriodMatrix,
    z: &[Complex64],
    policy: &TruncationPolicy,
) -> Result<ThetaValue> {
    let g = tau.genus();
    let m = Characteristic::new(g, eps, eps_prime)?;
    if !m.is_even() {
        return Ok(ThetaValue::exact_zero());
    }
    q_eval(eps, eps_prime, tau, z, QMethod::Product, policy)
}

/// Evaluate theta with an integer (non-reduced) characteristic: reduce mod 2
/// and carry the sign.
pub fn theta1_nonreduced(
    eps: &[i64],
    delta: &[i64],
    tau: &PeriodMatrix,
    z: &[Complex64],
    policy: &TruncationPolicy,
) -> Result<ThetaValue> {
    let (m, sign) = crate::chars::reduce(eps, delta)?;
    let t = theta1(&m, tau, z, policy)?;
    Ok(ThetaValue::from_parts(sign as f64 * t.value(), t.tail))
}

/// All even theta constants of tau, indexed by (eps, delta) masks, in
/// (eps-major) binary counting order. The workhorse of classification.
pub fn even_theta_constants(
    tau: &PeriodMatrix,
    policy: &TruncationPolicy,
) -> Result<Vec<(Characteristic, ThetaValue)>> {
    let g = tau.genus();
    let evens: Vec<Characteristic> = Characteristic::all(g).filter(|m| m.is_even()).collect();
    let vals = crate::map_indexed(evens.len(), |i| theta_const(&evens[i], tau, policy));
    let mut out = Vec::with_capacity(evens.len());
    for (m, v) in evens.into_iter().zip(vals) {
        out.push((m, v?));
    }
    Ok(out)
}

/// Sequential variant of `even_theta_constants` for benchmark comparisons.
pub fn even_theta_constants_seq(
    tau: &PeriodMatrix,
    policy: &TruncationPolicy,
) -> Result<Vec<(Characteristic, ThetaValue)>> {
    let g = tau.genus();
    let evens: Vec<Characteristic> = Characteristic::all(g).filter(|m| m.is_even()).collect();
    let vals = crate::map_indexed_seq(evens.len(), |i| theta_const(&evens[i], tau, policy));
    let mut out = Vec::with_capacity(evens.len());
    for (m, v) in evens.into_iter().zip(vals) {
        out.push((m, v?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn pol() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    /// Brute-force oracle: direct summation over a large fixed box, no tail
    /// logic. Independent of the engine's truncation machinery.
    fn oracle_theta(m: &Characteristic, tau: &PeriodMatrix, z: &[C], radius: i64) -> C {
        let g = tau.genus();
        let c_half: Vec<f64> = m.eps_bits().iter().map(|&b| b as f64 / 2.0).collect();
        let w: Vec<C> = z
            .iter()
            .zip(m.delta_bits())
            .map(|(&zi, d)| zi + c(d as f64 / 2.0, 0.0))
            .collect();
        let mut idx = vec![-radius; g];
        let mut sum = c(0.0, 0.0);
        'outer: loop {
            let mut quad = c(0.0, 0.0);
            let mut lin = c(0.0, 0.0);
            for i in 0..g {
                let ni = idx[i] as f64 + c_half[i];
                let mut row = c(0.0, 0.0);
                for j in 0..g {
                    row += tau[(i, j)] * (idx[j] as f64 + c_half[j]);
                }
                quad += ni * row;
                lin += ni * w[i];
            }
            sum += (C::new(0.0, PI) * (quad + 2.0 * lin)).exp();
            for k in 0..g {
                idx[k] += 1;
                if idx[k] <= radius {
                    continue 'outer;
                }
                idx[k] = -radius;
            }
            break;
        }
        sum
    }

    fn random_tau(g: usize, rng: &mut ChaCha8Rng) -> PeriodMatrix {
        crate::sampling::random_tau(g, rng)
    }

    #[test]
    fn genus1_theta_constant_at_i() {
        // Oracle value of theta[0|0](i, 0), frozen from direct summation
        // (|n| <= 50): pi^{1/4} / Gamma(3/4).
        let tau = PeriodMatrix::diag_imaginary(&[1.0]).unwrap();
        let m = Characteristic::zero(1);
        let want = 1.0864348112133080;
        let oracle = oracle_theta(&m, &tau, &[c(0.0, 0.0)], 50);
        assert!((oracle.re - want).abs() < 1e-13 && oracle.im.abs() < 1e-15);
        let got = theta_const(&m, &tau, &pol()).unwrap();
        assert!((got.value() - oracle).norm() < 1e-12);
        assert!(got.tail < 1e-12);
    }

    #[test]
    fn odd_characteristic_vanishes_at_zero() {
        let tau = PeriodMatrix::diag_imaginary(&[1.3]).unwrap();
        let m = Characteristic::parse("1|1").unwrap();
        let v = theta_const(&m, &tau, &pol()).unwrap();
        assert_eq!(v.value(), c(0.0, 0.0));
        assert_eq!(v.tail, 0.0);
        // The full series also cancels to ~0 at z = 0.
        let direct = theta1(&m, &tau, &[c(0.0, 0.0)], &pol()).unwrap();
        assert!(direct.value().norm() <= 1e-13 + direct.tail);
    }

    #[test]
    fn diagonal_tau_factorizes() {
        let tau2 = PeriodMatrix::diag_imaginary(&[1.0, 1.0]).unwrap();
        let tau1 = PeriodMatrix::diag_imaginary(&[1.0]).unwrap();
        let m2 = Characteristic::zero(2);
        let m1 = Characteristic::zero(1);
        let v2 = theta_const(&m2, &tau2, &pol()).unwrap().value();
        let v1 = theta_const(&m1, &tau1, &pol()).unwrap().value();
        assert!((v2 - v1 * v1).norm() < 1e-11);
        // Even constants factor too: [01|01] over diag(i, i).
        let me = Characteristic::parse("01|01").unwrap();
        let ve = theta_const(&me, &tau2, &pol()).unwrap().value();
        let v0 = theta_const(&Characteristic::zero(1), &tau1, &pol())
            .unwrap()
            .value();
        let v11 = theta_const(&Characteristic::parse("1|1").unwrap(), &tau1, &pol())
            .unwrap()
            .value();
        assert!((ve - v0 * v11).norm() < 1e-11);
    }

    #[test]
    fn matches_oracle_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g in 1..=3usize {
            for _ in 0..6 {
                let tau = random_tau(g, &mut rng);
                let z: Vec<C> = (0..g)
                    .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.3)))
                    .collect();
                let eps = rng.gen_range(0..(1u32 << g));
                let delta = rng.gen_range(0..(1u32 << g));
                let m = Characteristic::new(g, eps, delta).unwrap();
                let got = theta1(&m, &tau, &z, &pol()).unwrap();
                let want = oracle_theta(&m, &tau, &z, 14);
                assert!(
                    (got.value() - want).norm() < 1e-10 * (1.0 + want.norm()),
                    "g={g} diff={}",
                    (got.value() - want).norm()
                );
            }
        }
    }

    #[test]
    fn reduce_sign_matches_series() {
        // Non-reduced characteristics against direct non-reduced summation:
        // the engine path goes through chars::reduce.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cases: Vec<(Vec<i64>, Vec<i64>)> = vec![
            (vec![2], vec![0]),
            (vec![1], vec![2]),
            (vec![3, 0], vec![0, 2]),
            (vec![-1, 2], vec![3, -2]),
            (vec![1, 1], vec![2, 1]),
        ];
        for (eps, delta) in cases {
            let g = eps.len();
            let tau = random_tau(g, &mut rng);
            let z: Vec<C> = (0..g)
                .map(|_| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.2..0.2)))
                .collect();
            let via_reduce = theta1_nonreduced(&eps, &delta, &tau, &z, &pol()).unwrap();
            // Direct non-reduced oracle: same series with eps/2, delta/2 kept as-is.
            let c_half: Vec<f64> = eps.iter().map(|&b| b as f64 / 2.0).collect();
            let w: Vec<C> = z
                .iter()
                .zip(&delta)
                .map(|(&zi, &d)| zi + c(d as f64 / 2.0, 0.0))
                .collect();
            let radius = 14i64;
            let mut idx = vec![-radius; g];
            let mut want = c(0.0, 0.0);
            'outer: loop {
                let mut quad = c(0.0, 0.0);
                let mut lin = c(0.0, 0.0);
                for i in 0..g {
                    let ni = idx[i] as f64 + c_half[i];
                    let mut row = c(0.0, 0.0);
                    for j in 0..g {
                        row += tau[(i, j)] * (idx[j] as f64 + c_half[j]);
                    }
                    quad += ni * row;
                    lin += ni * w[i];
                }
                want += (C::new(0.0, PI) * (quad + 2.0 * lin)).exp();
                for k in 0..g {
                    idx[k] += 1;
                    if idx[k] <= radius {
                        continue 'outer;
                    }
                    idx[k] = -radius;
                }
                break;
            }
            assert!(
                (via_reduce.value() - want).norm() < 1e-9 * (1.0 + want.norm()),
                "eps={eps:?} delta={delta:?} diff={}",
                (via_reduce.value() - want).norm()
            );
        }
    }

    #[test]
    fn parity_in_z() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for g in 1..=2usize {
            for _ in 0..5 {
                let tau = random_tau(g, &mut rng);
                let z: Vec<C> = (0..g)
                    .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.2..0.2)))
                    .collect();
                let zneg: Vec<C> = z.iter().map(|&v| -v).collect();
                let m =
                    Characteristic::new(g, rng.gen_range(0..(1 << g)), rng.gen_range(0..(1 << g)))
                        .unwrap();
                let a = theta1(&m, &tau, &z, &pol()).unwrap().value();
                let b = theta1(&m, &tau, &zneg, &pol()).unwrap().value();
                let sgn = if m.is_even() { 1.0 } else { -1.0 };
                assert!((a - sgn * b).norm() < 1e-10 * (1.0 + a.norm()));
            }
        }
    }

    #[test]
    fn quasi_periodicity_integer_and_lattice() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for g in 1..=2usize {
            let tau = random_tau(g, &mut rng);
            let z: Vec<C> = (0..g)
                .map(|_| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.2..0.2)))
                .collect();
            let m = Characteristic::new(g, rng.gen_range(0..(1 << g)), rng.gen_range(0..(1 << g)))
                .unwrap();
            let base = theta1(&m, &tau, &z, &pol()).unwrap().value();
            // Integer shift b: theta(z + b) = (-1)^{<eps, b>} theta(z).
            let b: Vec<i64> = (0..g).map(|_| rng.gen_range(-2i64..=2)).collect();
            let zb: Vec<C> = z
                .iter()
                .zip(&b)
                .map(|(&zi, &bi)| zi + c(bi as f64, 0.0))
                .collect();
            let shifted = theta1(&m, &tau, &zb, &pol()).unwrap().value();
            let par: i64 = m
                .eps_bits()
                .iter()
                .zip(&b)
                .map(|(&e, &bi)| e as i64 * bi)
                .sum();
            let sgn = if par.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            assert!((shifted - sgn * base).norm() < 1e-9 * (1.0 + base.norm()));
            // Lattice shift tau*b:
            // theta(z + tau b) = exp(-pi i b^T tau b - 2 pi i b^T z) (-1)^{<delta, b>} theta(z).
            let tb = tau.mul_real_vec(&b.iter().map(|&x| x as f64).collect::<Vec<_>>());
            let ztb: Vec<C> = z.iter().zip(&tb).map(|(&zi, &ti)| zi + ti).collect();
            let shifted2 = theta1(&m, &tau, &ztb, &pol()).unwrap().value();
            let mut quad = c(0.0, 0.0);
            let mut lin = c(0.0, 0.0);
            for i in 0..g {
                for j in 0..g {
                    quad += tau[(i, j)] * b[i] as f64 * b[j] as f64;
                }
                lin += z[i] * b[i] as f64;
            }
            let pard: i64 = m
                .delta_bits()
                .iter()
                .zip(&b)
                .map(|(&d, &bi)| d as i64 * bi)
                .sum();
            let sgnd = if pard.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let factor = (C::new(0.0, -PI) * quad + C::new(0.0, -2.0 * PI) * lin).exp() * sgnd;
            assert!(
                (shifted2 - factor * base).norm() < 1e-8 * (1.0 + (factor * base).norm()),
                "lattice shift failed: {}",
                (shifted2 - factor * base).norm()
            );
        }
    }

    #[test]
    fn shift_identity_from_series() {
        // theta[eps|delta](tau, z) =
        //   exp(pi i [ (eps/2)^T tau (eps/2) + eps^T (z + delta/2) ])
        //   * theta[0|0](tau, z + tau eps/2 + delta/2).
        // The eps^T pairing in the linear term is what the series expansion
        // gives; the halved variant does not balance.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for g in 1..=2usize {
            let tau = random_tau(g, &mut rng);
            let z: Vec<C> = (0..g)
                .map(|_| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.2..0.2)))
                .collect();
            let m = Characteristic::new(g, rng.gen_range(0..(1 << g)), rng.gen_range(0..(1 << g)))
                .unwrap();
            let lhs = theta1(&m, &tau, &z, &pol()).unwrap().value();
            let eh: Vec<f64> = m.eps_bits().iter().map(|&e| e as f64 / 2.0).collect();
            let dh: Vec<f64> = m.delta_bits().iter().map(|&d| d as f64 / 2.0).collect();
            let teh = tau.mul_real_vec(&eh);
            let zs: Vec<C> = (0..g).map(|i| z[i] + teh[i] + c(dh[i], 0.0)).collect();
            let rhs0 = theta1(&Characteristic::zero(g), &tau, &zs, &pol())
                .unwrap()
                .value();
            let mut quad = c(0.0, 0.0);
            let mut lin = c(0.0, 0.0);
            for i in 0..g {
                quad += teh[i] * eh[i];
                lin += (z[i] + c(dh[i], 0.0)) * (2.0 * eh[i]);
            }
            let factor = (C::new(0.0, PI) * (quad + lin)).exp();
            assert!((lhs - factor * rhs0).norm() < 1e-9 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn certification_doubling_radius() {
        // Doubling the box radius moves the value by less than the reported
        // tail bound.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..30 {
            let g = rng.gen_range(1..=2usize);
            let tau = random_tau(g, &mut rng);
            let z: Vec<C> = (0..g)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.3)))
                .collect();
            let m = Characteristic::new(g, rng.gen_range(0..(1 << g)), rng.gen_range(0..(1 << g)))
                .unwrap();
            let v1 = theta1(&m, &tau, &z, &pol()).unwrap();
            let refined = oracle_theta(&m, &tau, &z, 25);
            assert!(
                (v1.value() - refined).norm() <= v1.tail + 1e-12,
                "refinement moved more than the tail bound"
            );
        }
    }

    #[test]
    fn theta2_is_theta_at_doubled_arguments() {
        let tau = PeriodMatrix::diag_imaginary(&[1.0]).unwrap();
        let v = theta2(0, &tau, &[c(0.0, 0.0)], &pol()).unwrap().value();
        let tau2 = PeriodMatrix::diag_imaginary(&[2.0]).unwrap();
        let w = theta_const(&Characteristic::zero(1), &tau2, &pol())
            .unwrap()
            .value();
        assert!((v - w).norm() < 1e-12);
    }

    #[test]
    fn th2_map_even_in_z() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tau = random_tau(2, &mut rng);
        let z = vec![c(0.3, 0.1), c(-0.2, 0.05)];
        let zn: Vec<C> = z.iter().map(|&v| -v).collect();
        let a = th2_map(&tau, &z, &pol()).unwrap();
        let b = th2_map(&tau, &zn, &pol()).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x.value() - y.value()).norm() < 1e-10);
        }
        // Nonzero at z = 0.
        let z0 = vec![c(0.0, 0.0); 2];
        let at0 = th2_map(&tau, &z0, &pol()).unwrap();
        assert!(at0.iter().any(|v| v.value().norm() > 1e-3));
    }

    #[test]
    fn q_eval_sum_and_product_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut n_checked = 0;
        for g in 1..=3usize {
            for _ in 0..(8 / g) {
                let tau = random_tau(g, &mut rng);
                let z: Vec<C> = (0..g)
                    .map(|_| c(rng.gen_range(-0.6..0.6), rng.gen_range(-0.2..0.2)))
                    .collect();
                for eps in 0..(1u32 << g) {
                    for ep in 0..(1u32 << g) {
                        if dot2(eps, ep) != 0 {
                            assert!(q_eval(eps, ep, &tau, &z, QMethod::Sum, &pol()).is_err());
                            continue;
                        }
                        let a = q_eval(eps, ep, &tau, &z, QMethod::Sum, &pol()).unwrap();
                        let b = q_eval(eps, ep, &tau, &z, QMethod::Product, &pol()).unwrap();
                        let scale = a.value().norm().max(b.value().norm()).max(1e-30);
                        assert!(
                            (a.value() - b.value()).norm() / scale < 1e-9,
                            "g={g} eps={eps:b} ep={ep:b} rel={}",
                            (a.value() - b.value()).norm() / scale
                        );
                        n_checked += 1;
                    }
                }
            }
        }
        assert!(n_checked >= 100, "checked only {n_checked}");
    }

    #[test]
    fn q_eval_at_zero_is_constant_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let tau = random_tau(2, &mut rng);
        let z0 = vec![c(0.0, 0.0); 2];
        for (eps, ep) in [(0u32, 0u32), (0, 3), (1, 2), (3, 0)] {
            let q = q_eval(eps, ep, &tau, &z0, QMethod::Product, &pol()).unwrap();
            let t = theta_const(&Characteristic::new(2, eps, ep).unwrap(), &tau, &pol()).unwrap();
            assert!((q.value() - t.value() * t.value()).norm() < 1e-10);
        }
    }

    #[test]
    fn period_matrix_validation() {
        // Non-symmetric rejected.
        let bad = PeriodMatrix::new(2, vec![c(0.0, 1.0), c(0.5, 0.0), c(0.1, 0.0), c(0.0, 1.0)]);
        assert!(matches!(bad, Err(Error::NotSymmetric(_))));
        // Non-positive-definite imaginary part rejected.
        let bad2 = PeriodMatrix::new(2, vec![c(0.0, 1.0), c(0.0, 2.0), c(0.0, 2.0), c(0.0, 1.0)]);
        assert!(matches!(bad2, Err(Error::NotPositiveDefinite(_))));
        // JSON round trip.
        let tau = PeriodMatrix::from_rows(&[
            vec![c(0.1, 1.0), c(0.2, 0.3)],
            vec![c(0.2, 0.3), c(-0.4, 2.0)],
        ])
        .unwrap();
        let s = serde_json::to_string(&tau).unwrap();
        let back: PeriodMatrix = serde_json::from_str(&s).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((tau[(i, j)] - back[(i, j)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn tail_unreachable_is_reported() {
        // A barely-positive-definite imaginary part forces a huge radius.
        let tau = PeriodMatrix::new_with_tol(1, vec![c(0.0, 2e-8)], 1e-12);
        // The constructor itself rejects min eigenvalue <= 1e-8; build one just above.
        let tau = match tau {
            Ok(t) => t,
            Err(_) => PeriodMatrix::new(1, vec![c(0.0, 3e-8)]).unwrap(),
        };
        let m = Characteristic::zero(1);
        let err = theta_const(
            &m,
            &tau,
            &TruncationPolicy {
                target_tail: 1e-12,
                hard_radius_cap: 8,
            },
        );
        assert!(matches!(err, Err(Error::TailTargetUnreachable { .. })));
    }
}
