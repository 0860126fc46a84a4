//! Exact rank and kernel computations over Z and Q.
//!
//! The primary rank backend is fraction-free (Bareiss) elimination over
//! BigInt; an independent check reduces the matrix modulo two 30-bit primes
//! drawn deterministically from a fixed seed. A modular rank can fall below
//! the true rank only when a prime divides a pivot minor, so the two primes
//! are compared against the Bareiss result and any discrepancy beyond that
//! pattern is a hard error.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Fraction-free Bareiss elimination rank of an integer matrix.
pub fn bareiss_rank(rows: &[Vec<i64>]) -> usize {
    let m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    bareiss_rank_big(m)
}

fn bareiss_rank_big(mut m: Vec<Vec<BigInt>>) -> usize {
    let nr = m.len();
    if nr == 0 {
        return 0;
    }
    let nc = m[0].len();
    let mut prev = BigInt::one();
    let mut rank = 0usize;
    let mut col = 0usize;
    while rank < nr && col < nc {
        // Pivot search: smallest nonzero magnitude keeps growth down.
        let mut pivot_row = None;
        for (i, row) in m.iter().enumerate().skip(rank) {
            if !row[col].is_zero() {
                match pivot_row {
                    None => pivot_row = Some(i),
                    Some(p) => {
                        if row[col].abs() < m[p][col].abs() {
                            pivot_row = Some(i);
                        }
                    }
                }
            }
        }
        let Some(p) = pivot_row else {
            col += 1;
            continue;
        };
        m.swap(rank, p);
        let (top, rest) = m.split_at_mut(rank + 1);
        let pivot_row_ref = &top[rank];
        let pivot = pivot_row_ref[col].clone();
        let update = |row: &mut Vec<BigInt>| {
            let factor = row[col].clone();
            for j in (col + 1)..nc {
                let num = &pivot * &row[j] - &factor * &pivot_row_ref[j];
                row[j] = num / &prev;
            }
            row[col] = BigInt::zero();
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            rest.par_iter_mut().for_each(update);
        }
        #[cfg(not(feature = "parallel"))]
        {
            rest.iter_mut().for_each(update);
        }
        prev = pivot;
        rank += 1;
        col += 1;
    }
    rank
}

/// Rank of an integer matrix modulo a prime p.
pub fn modular_rank(rows: &[Vec<i64>], p: u64) -> usize {
    let nr = rows.len();
    if nr == 0 {
        return 0;
    }
    let nc = rows[0].len();
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect())
        .collect();
    let mut rank = 0usize;
    for col in 0..nc {
        let Some(pr) = (rank..nr).find(|&i| m[i][col] % p != 0) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = mod_inverse(m[rank][col], p);
        for j in col..nc {
            m[rank][j] = m[rank][j] % p * inv % p;
        }
        for i in 0..nr {
            if i != rank && m[i][col] % p != 0 {
                let f = m[i][col] % p;
                for j in col..nc {
                    let sub = f * m[rank][j] % p;
                    m[i][j] = (m[i][j] + p - sub) % p;
                }
            }
        }
        rank += 1;
        if rank == nr {
            break;
        }
    }
    rank
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // Fermat: p prime.
    mod_pow(a % p, p - 2, p)
}

fn mod_pow(b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u128;
    let mut bb = b as u128 % p as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % p as u128;
        }
        bb = bb * bb % p as u128;
        e >>= 1;
    }
    acc as u64
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        if n % q == 0 {
            return n == q;
        }
    }
    // Deterministic Miller-Rabin for n < 3.3e24 with these bases.
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if a % n == 0 {
            continue;
        }
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = (x as u128 * x as u128 % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Two deterministic "random" 30-bit primes for the modular cross-check.
pub fn check_primes(seed: u64) -> [u64; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = [0u64; 2];
    let mut found = 0;
    while found < 2 {
        let candidate = rng.gen_range((1u64 << 29)..(1u64 << 30)) | 1;
        if is_prime_u64(candidate) && !out.contains(&candidate) {
            out[found] = candidate;
            found += 1;
        }
    }
    out
}

/// Exact rank with the dual-backend consistency check.
///
/// A prime can undercount the rank (it may divide a minor), never overcount,
/// so the acceptance rule is: max(modular) == bareiss, else hard error.
pub fn checked_rank(rows: &[Vec<i64>]) -> Result<usize> {
    let rank = bareiss_rank(rows);
    let primes = check_primes(0x5eed_7e7a);
    let modular = primes
        .iter()
        .map(|&p| modular_rank(rows, p))
        .max()
        .unwrap_or(0);
    if modular != rank {
        return Err(Error::RankBackendMismatch {
            bareiss: rank,
            modular,
        });
    }
    Ok(rank)
}

/// Exact right-nullspace basis of an integer matrix, over Q, returned as
/// primitive integer vectors (content divided out, first nonzero entry > 0).
pub fn integer_nullspace(rows: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    let nr = rows.len();
    let nc = if nr == 0 { 0 } else { rows[0].len() };
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|&x| BigRational::from(BigInt::from(x)))
                .collect()
        })
        .collect();
    // Reduced row echelon form.
    let mut pivot_cols = Vec::new();
    let mut rank = 0usize;
    for col in 0..nc {
        let Some(pr) = (rank..nr).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = m[rank][col].recip();
        for j in col..nc {
            let v = &m[rank][j] * &inv;
            m[rank][j] = v;
        }
        for i in 0..nr {
            if i != rank && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in col..nc {
                    let v = &m[i][j] - &f * &m[rank][j];
                    m[i][j] = v;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == nr {
            break;
        }
    }
    let pivot_set: std::collections::HashSet<usize> = pivot_cols.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..nc {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![BigRational::zero(); nc];
        v[free] = BigRational::one();
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -m[r][free].clone();
        }
        basis.push(rational_to_primitive(&v));
    }
    basis
}

/// Clear denominators and divide by content; normalize leading sign.
fn rational_to_primitive(v: &[BigRational]) -> Vec<BigInt> {
    use num_integer::Integer;
    let mut lcm = BigInt::one();
    for x in v {
        if !x.is_zero() {
            lcm = lcm.lcm(x.denom());
        }
    }
    let mut ints: Vec<BigInt> = v
        .iter()
        .map(|x| (x * BigRational::from(lcm.clone())).to_integer())
        .collect();
    let mut gcd = BigInt::zero();
    for x in &ints {
        gcd = gcd.gcd(x);
    }
    if !gcd.is_zero() && gcd != BigInt::one() {
        for x in ints.iter_mut() {
            *x = &*x / &gcd;
        }
    }
    if let Some(first) = ints.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in ints.iter_mut() {
                *x = -x.clone();
            }
        }
    }
    ints
}

/// det of the (k+1)x(k+1) arrowhead matrix with diagonal a and first-row /
/// first-column border entries -b_1..-b_k: a^{k-1} (a^2 - sum b_i^2).
/// Exact integer form, used to pin the determinant identity.
pub fn arrowhead_det_int(a: i64, borders: &[i64]) -> BigInt {
    let n = borders.len() + 1;
    let mut m = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        m[i][i] = BigInt::from(a);
    }
    for (k, &b) in borders.iter().enumerate() {
        m[0][k + 1] = BigInt::from(-b);
        m[k + 1][0] = BigInt::from(-b);
    }
    det_big(m)
}

fn det_big(mut m: Vec<Vec<BigInt>>) -> BigInt {
    // Bareiss determinant (square, exact).
    let n = m.len();
    let mut prev = BigInt::one();
    let mut sign = 1i32;
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(p) = ((k + 1)..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let num = &m[k][k] * &m[i][j] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bareiss_and_modular_agree_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let nr = rng.gen_range(1..8);
            let nc = rng.gen_range(1..8);
            let m: Vec<Vec<i64>> = (0..nr)
                .map(|_| (0..nc).map(|_| rng.gen_range(-4i64..=4)).collect())
                .collect();
            let r = checked_rank(&m).unwrap();
            assert!(r <= nr.min(nc));
        }
    }

    #[test]
    fn known_rank_cases() {
        assert_eq!(bareiss_rank(&[vec![1, 2], vec![2, 4]]), 1);
        assert_eq!(bareiss_rank(&[vec![1, 0], vec![0, 1]]), 2);
        assert_eq!(bareiss_rank(&[vec![0, 0], vec![0, 0]]), 0);
        // 3x4 with rank 2.
        assert_eq!(
            checked_rank(&[vec![1, 2, 3, 4], vec![2, 4, 6, 8], vec![0, 1, 0, 1]]).unwrap(),
            2
        );
    }

    #[test]
    fn nullspace_vectors_annihilate() {
        let rows = vec![vec![1i64, 2, 3], vec![4, 5, 6]];
        let ns = integer_nullspace(&rows);
        assert_eq!(ns.len(), 1);
        for r in &rows {
            let s: BigInt = r
                .iter()
                .zip(ns[0].iter())
                .map(|(&a, b)| BigInt::from(a) * b)
                .sum();
            assert!(s.is_zero());
        }
        // Known kernel of [[1,2,3],[4,5,6]] is span (1, -2, 1).
        assert_eq!(
            ns[0],
            vec![BigInt::from(1), BigInt::from(-2), BigInt::from(1)]
        );
    }

    #[test]
    fn arrowhead_det_closed_form() {
        // Cofactor identity det = a^{k-1}(a^2 - sum b^2) for the bordered
        // diagonal pattern, checked exactly.
        for (a, bs) in [
            (3i64, vec![1i64, 2]),
            (2, vec![1, 1, 1, 1, 1]),
            (5, vec![0, 0, 3]),
        ] {
            let k = bs.len() as u32;
            let want = BigInt::from(a).pow(k - 1)
                * (BigInt::from(a) * a - bs.iter().map(|&b| BigInt::from(b) * b).sum::<BigInt>());
            assert_eq!(arrowhead_det_int(a, &bs), want);
        }
    }

    #[test]
    fn check_primes_are_30_bit_primes() {
        let ps = check_primes(7);
        for p in ps {
            assert!(p >= (1 << 29) && p < (1 << 30));
            assert!(is_prime_u64(p));
        }
    }
}
