//! Dense complex matrix helpers. Sizes here are tiny (period matrices and
//! Gram matrices, at most ~16 columns), so simple O(n^3) routines with
//! partial pivoting and cyclic Jacobi sweeps are plenty.

use num_complex::Complex64;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            a: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut a = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            a.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            a,
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn conj_transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].conj();
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.a.iter_mut().zip(other.a.iter()) {
            *x += *y;
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for x in out.a.iter_mut() {
            *x *= s;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// LU decomposition with partial pivoting, in place on a copy.
    /// Returns (lu, permutation, sign_swaps) or None if singular to machine zero.
    fn lu(&self) -> Option<(CMat, Vec<usize>, usize)> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let (mut pk, mut pv) = (k, lu[(k, k)].norm());
            for i in (k + 1)..n {
                let v = lu[(i, k)].norm();
                if v > pv {
                    pk = i;
                    pv = v;
                }
            }
            if pv == 0.0 {
                return None;
            }
            if pk != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(pk, j)];
                    lu[(pk, j)] = t;
                }
                perm.swap(k, pk);
                swaps += 1;
            }
            let piv = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                for j in (k + 1)..n {
                    let s = lu[(k, j)];
                    lu[(i, j)] -= f * s;
                }
            }
        }
        Some((lu, perm, swaps))
    }

    pub fn det(&self) -> Complex64 {
        match self.lu() {
            None => Complex64::new(0.0, 0.0),
            Some((lu, _, swaps)) => {
                let mut d = if swaps % 2 == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(-1.0, 0.0)
                };
                for i in 0..self.rows {
                    d *= lu[(i, i)];
                }
                d
            }
        }
    }

    /// Solve A X = B for X (B has arbitrary column count).
    pub fn solve(&self, b: &CMat) -> Option<CMat> {
        assert_eq!(self.rows, b.rows);
        let n = self.rows;
        let (lu, perm, _) = self.lu()?;
        let mut x = CMat::zeros(n, b.cols);
        for c in 0..b.cols {
            // forward substitution on permuted rhs
            let mut y = vec![Complex64::new(0.0, 0.0); n];
            for i in 0..n {
                let mut s = b[(perm[i], c)];
                for j in 0..i {
                    s -= lu[(i, j)] * y[j];
                }
                y[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = y[i];
                for j in (i + 1)..n {
                    s -= lu[(i, j)] * x[(j, c)];
                }
                x[(i, c)] = s / lu[(i, i)];
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<CMat> {
        self.solve(&CMat::identity(self.rows))
    }

    /// Singular values (descending) via eigenvalues of the smaller Gram matrix.
    pub fn singular_values(&self) -> Vec<f64> {
        let (gram, n) = if self.rows <= self.cols {
            (self.mul(&self.conj_transpose()), self.rows)
        } else {
            (self.conj_transpose().mul(self), self.cols)
        };
        let mut eigs = hermitian_eigenvalues(&gram);
        eigs.truncate(n);
        eigs.iter().map(|&e| e.max(0.0).sqrt()).collect()
    }

    /// Numerical rank: singular values above `tol_ratio` times the largest.
    pub fn numerical_rank(&self, tol_ratio: f64) -> usize {
        let sv = self.singular_values();
        match sv.first() {
            None => 0,
            Some(&s0) if s0 == 0.0 => 0,
            Some(&s0) => sv.iter().filter(|&&s| s > tol_ratio * s0).count(),
        }
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.a[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.a[i * self.cols + j]
    }
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi sweeps,
/// returned in descending order.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut a = m.clone();
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)].norm_sqr();
            }
        }
        if off.sqrt() < 1e-300_f64.max(1e-15 * a.max_abs() * n as f64) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Phase out apq (write apq = r * phase with r > 0), then apply
                // the real Jacobi rotation for [[app, r], [r, aqq]]. The full
                // unitary is V = diag(phase, 1) * [[c, s], [-s, c]].
                let r = apq.norm();
                let phase = apq / r;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * phase * aip - s * aiq;
                    a[(i, q)] = s * phase * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = c * phase.conj() * apj - s * aqj;
                    a[(q, j)] = s * phase.conj() * apj + c * aqj;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    eigs.sort_by(|x, y| y.partial_cmp(x).unwrap());
    eigs
}

/// Eigenvalues of a real symmetric matrix (ascending min first convenience).
pub fn symmetric_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut cm = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            cm[(i, j)] = Complex64::new(m[i][j], 0.0);
        }
    }
    let mut e = hermitian_eigenvalues(&cm);
    e.reverse();
    e
}

/// Cholesky factor R (upper triangular, Y = R^T R) of a symmetric positive
/// definite real matrix. Returns None if a pivot is non-positive.
pub fn cholesky_upper(y: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = y.len();
    let mut r = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i..n {
            let mut s = y[i][j];
            for k in 0..i {
                s -= r[k][i] * r[k][j];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                r[i][i] = s.sqrt();
            } else {
                r[i][j] = s / r[i][i];
            }
        }
    }
    Some(r)
}

/// Solve Y x = b for symmetric positive definite Y given its Cholesky factor.
pub fn cholesky_solve(r: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    // R^T w = b
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= r[k][i] * w[k];
        }
        w[i] = s / r[i][i];
    }
    // R x = w
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = w[i];
        for k in (i + 1)..n {
            s -= r[i][k] * x[k];
        }
        x[i] = s / r[i][i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solve_and_inverse() {
        let a = CMat::from_rows(&[
            vec![c(2.0, 1.0), c(0.0, -1.0)],
            vec![c(1.0, 0.0), c(3.0, 0.5)],
        ]);
        let inv = a.inverse().unwrap();
        let prod = a.mul(&inv);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn determinant_of_triangular() {
        let a = CMat::from_rows(&[
            vec![c(2.0, 0.0), c(5.0, 1.0), c(0.5, 0.0)],
            vec![c(0.0, 0.0), c(3.0, 0.0), c(1.0, 2.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 4.0)],
        ]);
        assert!((a.det() - c(0.0, 24.0)).norm() < 1e-12);
    }

    #[test]
    fn hermitian_eigenvalues_known() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let a = CMat::from_rows(&[
            vec![c(2.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), c(2.0, 0.0)],
        ]);
        let e = hermitian_eigenvalues(&a);
        assert!((e[0] - 3.0).abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_values_and_rank() {
        // Rank-1 matrix.
        let a = CMat::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)],
            vec![c(2.0, 0.0), c(4.0, 0.0), c(6.0, 0.0)],
        ]);
        assert_eq!(a.numerical_rank(1e-10), 1);
        let sv = a.singular_values();
        assert!((sv[0] - (70.0f64).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn cholesky_roundtrip() {
        let y = vec![
            vec![4.0, 1.0, 0.2],
            vec![1.0, 3.0, 0.5],
            vec![0.2, 0.5, 2.0],
        ];
        let r = cholesky_upper(&y).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += r[k][i] * r[k][j];
                }
                assert!((s - y[i][j]).abs() < 1e-12);
            }
        }
        let x = cholesky_solve(&r, &[1.0, 2.0, 3.0]);
        for i in 0..3 {
            let s: f64 = (0..3).map(|j| y[i][j] * x[j]).sum();
            assert!((s - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_min_eigenvalue() {
        let y = vec![vec![2.0, 0.99], vec![0.99, 1.0]];
        let e = symmetric_eigenvalues(&y);
        // Eigenvalues of [[2, .99], [.99, 1]]: (3 +- sqrt(1 + 4*.99^2))/2.
        let disc = (1.0f64 + 4.0 * 0.99 * 0.99).sqrt();
        assert!((e[0] - (3.0 - disc) / 2.0).abs() < 1e-12);
        assert!((e[1] - (3.0 + disc) / 2.0).abs() < 1e-12);
    }
}
