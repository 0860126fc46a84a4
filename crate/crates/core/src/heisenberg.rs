//! Exact integer model of the Heisenberg action on polynomials in the 2^g
//! formal variables X_sigma (sigma in Z_2^g, binary counting order).
//!
//! Scalars are restricted to signs: the generator rule
//! (t, x, x*) X_sigma = t (-1)^{<x*, x+sigma>} X_{x+sigma} only ever produces
//! signs, so all arithmetic stays over Z. The module carries the Q[eps, eps']
//! eigenbasis of S^2 B_1, the maps F -> F_sigma and M(chi), exact span ranks
//! via Bareiss elimination with a modular cross-check, the biquadratic
//! relation kernels, and the sign-vector witness behind the Frobenius
//! quartic identity.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::chars::{dot2, Characteristic};
use crate::error::{Error, Result};
use crate::linalg::exact;

/// A monomial: sorted multiset of sigma-indices, degree <= 4.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Monomial {
    deg: u8,
    idx: [u16; 4],
}

impl Monomial {
    pub fn new(mut indices: Vec<u16>) -> Self {
        assert!(indices.len() <= 4, "degree cap is 4");
        indices.sort_unstable();
        let mut idx = [0u16; 4];
        idx[..indices.len()].copy_from_slice(&indices);
        Self {
            deg: indices.len() as u8,
            idx,
        }
    }

    pub fn one() -> Self {
        Self {
            deg: 0,
            idx: [0; 4],
        }
    }

    pub fn degree(&self) -> usize {
        self.deg as usize
    }

    pub fn indices(&self) -> &[u16] {
        &self.idx[..self.deg as usize]
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut v: Vec<u16> = self.indices().to_vec();
        v.extend_from_slice(other.indices());
        Monomial::new(v)
    }

    /// XOR of the member indices (the Z_2^g weight of the monomial).
    pub fn xor_sum(&self) -> u16 {
        self.indices().iter().fold(0, |a, &b| a ^ b)
    }

    /// Exponent vector over the 2^g variables.
    fn exponents(&self, n_vars: usize) -> Vec<u8> {
        let mut e = vec![0u8; n_vars];
        for &i in self.indices() {
            e[i as usize] += 1;
        }
        e
    }
}

/// Degree-reverse-lexicographic order on monomials, variables in binary
/// counting order. Used for deterministic matrix layouts.
pub fn degrevlex(a: &Monomial, b: &Monomial, n_vars: usize) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    match a.degree().cmp(&b.degree()) {
        Ordering::Equal => {}
        o => return o,
    }
    let ea = a.exponents(n_vars);
    let eb = b.exponents(n_vars);
    for k in (0..n_vars).rev() {
        match ea[k].cmp(&eb[k]) {
            Ordering::Equal => {}
            // Larger exponent in the last variable is smaller in degrevlex.
            Ordering::Less => return Ordering::Greater,
            Ordering::Greater => return Ordering::Less,
        }
    }
    Ordering::Equal
}

/// Exact integer-coefficient polynomial in the X_sigma.
#[derive(Clone, PartialEq, Eq)]
pub struct IntPolynomial {
    genus: usize,
    terms: BTreeMap<Monomial, i64>,
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let vars: Vec<String> = m.indices().iter().map(|i| format!("X{i}")).collect();
                if vars.is_empty() {
                    format!("{c}")
                } else {
                    format!("{c}*{}", vars.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl IntPolynomial {
    pub fn zero(genus: usize) -> Self {
        Self {
            genus,
            terms: BTreeMap::new(),
        }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn n_vars(&self) -> usize {
        1 << self.genus
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &i64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, m: Monomial, c: i64) {
        if c == 0 {
            return;
        }
        let e = self.terms.entry(m).or_insert(0);
        *e += c;
        if *e == 0 {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in other.terms.iter() {
            out.add_term(*m, *c);
        }
        out
    }

    pub fn scale(&self, s: i64) -> Self {
        let mut out = Self::zero(self.genus);
        for (m, c) in self.terms.iter() {
            out.add_term(*m, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.genus);
        for (ma, ca) in self.terms.iter() {
            for (mb, cb) in other.terms.iter() {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    /// Common degree if the polynomial is homogeneous.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut it = self.terms.keys();
        let d = it.next()?.degree();
        if it.all(|m| m.degree() == d) {
            Some(d)
        } else {
            None
        }
    }

    /// d/dX_sigma.
    pub fn partial(&self, sigma: u16) -> Self {
        let mut out = Self::zero(self.genus);
        for (m, c) in self.terms.iter() {
            let mult = m.indices().iter().filter(|&&i| i == sigma).count() as i64;
            if mult > 0 {
                let mut rest: Vec<u16> = m.indices().to_vec();
                let pos = rest.iter().position(|&i| i == sigma).unwrap();
                rest.remove(pos);
                out.add_term(Monomial::new(rest), c * mult);
            }
        }
        out
    }

    /// Every monomial has XOR-sum zero, i.e. the polynomial is K-invariant.
    pub fn is_k_invariant(&self) -> bool {
        self.terms.keys().all(|m| m.xor_sum() == 0)
    }
}

/// A sign-scalar Heisenberg element (t, x, x*) with t in {+1, -1} and the
/// character x* encoded as a bit vector via (-1)^{<x*, .>}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeisenbergElement {
    pub t: i8,
    pub x: u16,
    pub xstar: u16,
}

impl HeisenbergElement {
    pub fn identity() -> Self {
        Self {
            t: 1,
            x: 0,
            xstar: 0,
        }
    }

    /// Group law (t, x, x*) (s, y, y*) = (t s y*(x), x+y, x*+y*).
    pub fn compose(&self, other: &Self) -> Self {
        let ystar_of_x = if dot2(other.xstar as u32, self.x as u32) == 0 {
            1
        } else {
            -1
        };
        Self {
            t: self.t * other.t * ystar_of_x,
            x: self.x ^ other.x,
            xstar: self.xstar ^ other.xstar,
        }
    }
}

/// A character chi = (y*, y) of Z_2^g x hat(Z_2^g): chi(x, x*) = y*(x) x*(y).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct HCharacter {
    pub ystar: u16,
    pub y: u16,
}

impl HCharacter {
    pub fn trivial() -> Self {
        Self { ystar: 0, y: 0 }
    }

    pub fn eval(&self, x: u16, xstar: u16) -> i64 {
        let s = dot2(self.ystar as u32, x as u32) ^ dot2(xstar as u32, self.y as u32);
        if s == 0 {
            1
        } else {
            -1
        }
    }
}

/// Apply (t, x, x*) to a polynomial: on a degree-d monomial the scalar is
/// t^d (-1)^{<x*, dx + sum sigma_i>} and indices translate by x.
pub fn act(h: &HeisenbergElement, p: &IntPolynomial) -> IntPolynomial {
    let mut out = IntPolynomial::zero(p.genus());
    for (m, c) in p.terms() {
        let d = m.degree();
        let new_idx: Vec<u16> = m.indices().iter().map(|&i| i ^ h.x).collect();
        let mut xor_shifted = 0u16;
        for &i in &new_idx {
            xor_shifted ^= i;
        }
        // sum_i <x*, x + sigma_i> = <x*, xor of the (x + sigma_i)> mod 2
        let sign_bit = dot2(h.xstar as u32, xor_shifted as u32);
        let mut s: i64 = if sign_bit == 0 { 1 } else { -1 };
        if h.t < 0 && d % 2 == 1 {
            s = -s;
        }
        out.add_term(Monomial::new(new_idx), c * s);
    }
    out
}

/// Q[eps, eps'] = sum_sigma (-1)^{<sigma, eps'>} X_sigma X_{sigma + eps},
/// defined for even index pairs.
pub fn q_poly(genus: usize, eps: u32, eps_prime: u32) -> Result<IntPolynomial> {
    let m = Characteristic::new(genus, eps, eps_prime)?;
    if !m.is_even() {
        return Err(Error::OddIndexPair(
            format!("{:0w$b}", eps, w = genus),
            format!("{:0w$b}", eps_prime, w = genus),
        ));
    }
    let mut p = IntPolynomial::zero(genus);
    for sigma in 0..(1u32 << genus) {
        let sgn = if dot2(sigma, eps_prime) == 0 { 1 } else { -1 };
        p.add_term(Monomial::new(vec![sigma as u16, (sigma ^ eps) as u16]), sgn);
    }
    Ok(p)
}

/// All admissible (eps, eps') index pairs, in binary counting order:
/// 2^{g-1}(2^g + 1) of them.
pub fn admissible_pairs(genus: usize) -> Vec<(u32, u32)> {
    let n = 1u32 << genus;
    let mut out = Vec::new();
    for eps in 0..n {
        for ep in 0..n {
            if dot2(eps, ep) == 0 {
                out.push((eps, ep));
            }
        }
    }
    out
}

/// F_sigma = (1, sigma, 0) F for K-invariant cubics.
pub fn f_sigma(f: &IntPolynomial, sigma: u16) -> Result<IntPolynomial> {
    if !f.is_k_invariant() {
        return Err(Error::NotKInvariant);
    }
    Ok(act(
        &HeisenbergElement {
            t: 1,
            x: sigma,
            xstar: 0,
        },
        f,
    ))
}

/// M(chi)(F) = sum_sigma y*(sigma) X_{sigma + y} F_sigma, for F in the
/// K-invariant cubic space.
pub fn m_chi(chi: &HCharacter, f: &IntPolynomial) -> Result<IntPolynomial> {
    if !f.is_k_invariant() {
        return Err(Error::NotKInvariant);
    }
    let g = f.genus();
    let mut out = IntPolynomial::zero(g);
    for sigma in 0..(1u16 << g) {
        let sgn = if dot2(chi.ystar as u32, sigma as u32) == 0 {
            1
        } else {
            -1
        };
        let fs = act(
            &HeisenbergElement {
                t: 1,
                x: sigma,
                xstar: 0,
            },
            f,
        );
        let mut xm = IntPolynomial::zero(g);
        xm.add_term(Monomial::new(vec![sigma ^ chi.y]), sgn);
        out = out.add(&xm.mul(&fs));
    }
    Ok(out)
}

/// Monomial basis of the K-invariant cubic space S^3_0: degree-3 monomials
/// with XOR-sum zero, in degrevlex order.
pub fn k_invariant_cubic_basis(genus: usize) -> Vec<Monomial> {
    let n = 1u16 << genus;
    let mut out = Vec::new();
    for a in 0..n {
        for b in a..n {
            let c = a ^ b;
            if c >= b {
                out.push(Monomial::new(vec![a, b, c]));
            }
        }
    }
    out.sort_by(|x, y| degrevlex(x, y, 1 << genus));
    out.dedup();
    out
}

/// Deterministic dense coefficient matrix over a shared monomial list.
fn coefficient_matrix(polys: &[IntPolynomial]) -> Result<(Vec<Vec<i64>>, Vec<Monomial>)> {
    if polys.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    let g = polys[0].genus();
    let deg = polys[0].homogeneous_degree().ok_or(Error::MixedDegrees)?;
    let mut cols: Vec<Monomial> = Vec::new();
    for p in polys {
        if p.genus() != g {
            return Err(Error::GenusMismatch(g, p.genus()));
        }
        if !p.is_zero() && p.homogeneous_degree() != Some(deg) {
            return Err(Error::MixedDegrees);
        }
        cols.extend(p.terms().map(|(m, _)| *m));
    }
    cols.sort_by(|x, y| degrevlex(x, y, 1 << g));
    cols.dedup();
    let col_of: BTreeMap<Monomial, usize> = cols.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let mut rows = Vec::with_capacity(polys.len());
    for p in polys {
        let mut row = vec![0i64; cols.len()];
        for (m, &c) in p.terms() {
            row[col_of[m]] = c;
        }
        rows.push(row);
    }
    Ok((rows, cols))
}

/// Exact rank of the span of a family of homogeneous polynomials (Bareiss
/// elimination plus the modular cross-check).
pub fn span_rank(polys: &[IntPolynomial]) -> Result<usize> {
    let (rows, _) = coefficient_matrix(polys)?;
    if rows.is_empty() {
        return Ok(0);
    }
    exact::checked_rank(&rows)
}

/// The cubic generators {X_rho Q[eps, delta]} over a vanishing set, in
/// (pair-order, rho) deterministic order: 2^g cubics per pair.
pub fn cubics_from_quadrics(genus: usize, vanishing: &[(u32, u32)]) -> Result<Vec<IntPolynomial>> {
    let mut out = Vec::with_capacity(vanishing.len() << genus);
    for &(eps, delta) in vanishing {
        let q = q_poly(genus, eps, delta)?;
        for rho in 0..(1u16 << genus) {
            let mut x = IntPolynomial::zero(genus);
            x.add_term(Monomial::new(vec![rho]), 1);
            out.push(x.mul(&q));
        }
    }
    Ok(out)
}

/// A relation vector: integer coefficients on admissible (eps, delta) pairs
/// for the twist (sigma, rho).
#[derive(Clone, Debug, PartialEq)]
pub struct RelationVector {
    pub genus: usize,
    pub sigma: u32,
    pub rho: u32,
    /// (eps, delta, coefficient), nonzero coefficients only.
    pub coefficients: Vec<(u32, u32, BigInt)>,
}

impl RelationVector {
    /// Expand sum (-1)^{<sigma, delta>} v_{eps,delta} Q[eps,delta]
    /// Q[eps+sigma, delta+rho] as an exact quartic.
    pub fn expand(&self) -> Result<IntPolynomial> {
        let mut acc = IntPolynomial::zero(self.genus);
        for (eps, delta, c) in &self.coefficients {
            let ci = i64::try_from(c.clone())
                .map_err(|_| Error::InvalidInput("relation coefficient exceeds i64".into()))?;
            let sgn = if dot2(self.sigma, *delta) == 0 { 1 } else { -1 };
            let q1 = q_poly(self.genus, *eps, *delta)?;
            let q2 = q_poly(self.genus, eps ^ self.sigma, delta ^ self.rho)?;
            acc = acc.add(&q1.mul(&q2).scale(sgn * ci));
        }
        Ok(acc)
    }

    pub fn verify_in_kernel(&self) -> Result<()> {
        let e = self.expand()?;
        if e.is_zero() {
            Ok(())
        } else {
            Err(Error::NotInKernel(e.num_terms()))
        }
    }
}

/// Support of the biquadratic relation family for a twist (sigma, rho):
/// pairs admissible on both sides.
pub fn relation_support(genus: usize, sigma: u32, rho: u32) -> Vec<(u32, u32)> {
    admissible_pairs(genus)
        .into_iter()
        .filter(|&(e, d)| dot2(e ^ sigma, d ^ rho) == 0)
        .collect()
}

/// Kernel of v -> sum (-1)^{<sigma,delta>} v_{eps,delta} Q[eps,delta]
/// Q[eps+sigma,delta+rho]: dimension and an exact integer basis. Every basis
/// vector is re-verified by expansion.
pub fn relation_space(genus: usize, sigma: u32, rho: u32) -> Result<(usize, Vec<RelationVector>)> {
    if genus > 3 {
        return Err(Error::InvalidGenus(
            genus,
            "quartic kernels are capped at genus 3",
        ));
    }
    let support = relation_support(genus, sigma, rho);
    let quartics: Vec<IntPolynomial> = support
        .iter()
        .map(|&(e, d)| {
            let sgn = if dot2(sigma, d) == 0 { 1 } else { -1 };
            Ok(q_poly(genus, e, d)?
                .mul(&q_poly(genus, e ^ sigma, d ^ rho)?)
                .scale(sgn))
        })
        .collect::<Result<_>>()?;
    let (rows, _) = coefficient_matrix(&quartics)?;
    // Kernel of v^T M = nullspace of M^T.
    let nc = rows.first().map_or(0, |r| r.len());
    let mut mt = vec![vec![0i64; rows.len()]; nc];
    for (i, r) in rows.iter().enumerate() {
        for (j, &x) in r.iter().enumerate() {
            mt[j][i] = x;
        }
    }
    let basis = exact::integer_nullspace(&mt);
    let vectors: Vec<RelationVector> = basis
        .into_iter()
        .map(|v| RelationVector {
            genus,
            sigma,
            rho,
            coefficients: support
                .iter()
                .zip(v.into_iter())
                .filter(|(_, c)| !c.is_zero())
                .map(|(&(e, d), c)| (e, d, c))
                .collect(),
        })
        .collect();
    for v in &vectors {
        v.verify_in_kernel()?;
    }
    Ok((vectors.len(), vectors))
}

pub fn relation_space_dim(genus: usize, sigma: u32, rho: u32) -> Result<usize> {
    Ok(relation_space(genus, sigma, rho)?.0)
}

/// The Grushevsky cubic R_sigma as an exact polynomial:
/// Q[0,0] X_sigma - sum_{k=0}^g (-1)^{<sigma, e_{k+1}>} Q[s_k, e_{k+1}] X_{sigma+s_k}.
pub fn grushevsky_poly(genus: usize, sigma: u16) -> Result<IntPolynomial> {
    let mut x = IntPolynomial::zero(genus);
    x.add_term(Monomial::new(vec![sigma]), 1);
    let mut acc = q_poly(genus, 0, 0)?.mul(&x);
    for k in 0..=genus {
        let sk = Characteristic::s_mask(genus, k);
        let ek1 = Characteristic::e_mask(genus, k + 1);
        let sgn = if dot2(sigma as u32, ek1) == 0 { 1 } else { -1 };
        let mut xs = IntPolynomial::zero(genus);
        xs.add_term(Monomial::new(vec![sigma ^ sk as u16]), 1);
        acc = acc.add(&q_poly(genus, sk, ek1)?.mul(&xs).scale(-sgn));
    }
    Ok(acc)
}

/// The nonvanishing support of the Frobenius quartic: (0,0) followed by the
/// pairs (s_k, e_{k+1}) for k = 0..g.
pub fn frobenius_nonvanishing_pairs(genus: usize) -> Vec<(u32, u32)> {
    let mut v = vec![(0u32, 0u32)];
    for k in 0..=genus {
        v.push((
            Characteristic::s_mask(genus, k),
            Characteristic::e_mask(genus, k + 1),
        ));
    }
    v
}

/// Search for the +-1 relation vector supported on {(0,0)} u {(s_k, e_{k+1})}
/// u (predicted vanishing pairs) whose twist-(0,0) combination is the zero
/// quartic and whose nonvanishing part is Q[0,0]^2 - sum_k Q[s_k,e_{k+1}]^2.
pub fn frobenius_vector_in_kernel(genus: usize) -> Result<RelationVector> {
    if genus > 3 {
        return Err(Error::InvalidGenus(
            genus,
            "quartic expansion capped at genus 3",
        ));
    }
    let nonvan = frobenius_nonvanishing_pairs(genus);
    let vanishing: Vec<(u32, u32)> = crate::chars::predicted_vanishing_set(genus)?
        .iter()
        .map(|m| (m.eps(), m.delta()))
        .collect();
    // Fixed part: Q[0,0]^2 - sum Q[s_k, e_{k+1}]^2.
    let mut fixed = q_poly(genus, 0, 0)?.mul(&q_poly(genus, 0, 0)?);
    for &(e, d) in &nonvan[1..] {
        fixed = fixed.add(&q_poly(genus, e, d)?.mul(&q_poly(genus, e, d)?).scale(-1));
    }
    let nv = vanishing.len();
    for mask in 0..(1u32 << nv) {
        let mut acc = fixed.clone();
        for (i, &(e, d)) in vanishing.iter().enumerate() {
            let s = if mask & (1 << i) == 0 { 1 } else { -1 };
            acc = acc.add(&q_poly(genus, e, d)?.mul(&q_poly(genus, e, d)?).scale(s));
        }
        if acc.is_zero() {
            let mut coefficients: Vec<(u32, u32, BigInt)> = vec![(0, 0, BigInt::from(1))];
            for &(e, d) in &nonvan[1..] {
                coefficients.push((e, d, BigInt::from(-1)));
            }
            for (i, &(e, d)) in vanishing.iter().enumerate() {
                let s = if mask & (1 << i) == 0 { 1 } else { -1 };
                coefficients.push((e, d, BigInt::from(s)));
            }
            let v = RelationVector {
                genus,
                sigma: 0,
                rho: 0,
                coefficients,
            };
            v.verify_in_kernel()?;
            return Ok(v);
        }
    }
    Err(Error::NoKernelWitness)
}

/// Trace-formula dimension of an S^4 eigenspace: for chi = (y*, y),
/// dim = 2^{-g} sum_x (-1)^{<y*, x>} #{degree-4 monomials fixed by +x with
/// XOR-sum y}.
pub fn s4_eigenspace_dim(genus: usize, chi: &HCharacter) -> usize {
    let n = 1u16 << genus;
    let monomials = degree4_monomials(genus);
    let mut total: i64 = 0;
    for x in 0..n {
        let mut count: i64 = 0;
        for m in &monomials {
            if m.xor_sum() != chi.y {
                continue;
            }
            let shifted = Monomial::new(m.indices().iter().map(|&i| i ^ x).collect());
            if shifted == *m {
                count += 1;
            }
        }
        let sgn = if dot2(chi.ystar as u32, x as u32) == 0 {
            1
        } else {
            -1
        };
        total += sgn * count;
    }
    assert!(
        total >= 0 && total % (n as i64) == 0,
        "trace formula must divide"
    );
    (total / n as i64) as usize
}

fn degree4_monomials(genus: usize) -> Vec<Monomial> {
    let n = 1u16 << genus;
    let mut out = Vec::new();
    for a in 0..n {
        for b in a..n {
            for c in b..n {
                for d in c..n {
                    out.push(Monomial::new(vec![a, b, c, d]));
                }
            }
        }
    }
    out
}

/// Eigenspace dimension of S^2(S^2 B_1): each unordered pair {Q_a, Q_b} is an
/// eigenvector with character (eps'_a + eps'_b, eps_a + eps_b); count pairs.
pub fn s2s2_eigenspace_dim(genus: usize, chi: &HCharacter) -> usize {
    let pairs = admissible_pairs(genus);
    let mut count = 0usize;
    for (i, &(ea, pa)) in pairs.iter().enumerate() {
        for &(eb, pb) in pairs.iter().skip(i) {
            if (pa ^ pb) as u16 == chi.ystar && (ea ^ eb) as u16 == chi.y {
                count += 1;
            }
        }
    }
    count
}

/// Serialized polynomial form {"g": .., "terms": [{"mono": [..], "c": ..}]}.
#[derive(serde::Serialize, serde::Deserialize)]
pub struct PolyJson {
    pub g: usize,
    pub terms: Vec<PolyTermJson>,
}

#[derive(serde::Serialize, serde::Deserialize)]
pub struct PolyTermJson {
    pub mono: Vec<u16>,
    pub c: i64,
}

impl From<&IntPolynomial> for PolyJson {
    fn from(p: &IntPolynomial) -> Self {
        PolyJson {
            g: p.genus(),
            terms: p
                .terms()
                .map(|(m, &c)| PolyTermJson {
                    mono: m.indices().to_vec(),
                    c,
                })
                .collect(),
        }
    }
}
