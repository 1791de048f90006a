//! Small dense linear algebra sized for snapshot Gramians and
//! normal-equation solves.
//!
//! Everything here is written directly rather than pulled from a larger
//! linear-algebra crate because the error paths need structure (failing
//! pivot index and value) and the eigenvalue routine is required to be a
//! bisection on the tridiagonalized matrix.

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, a: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut a = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            a.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, a }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.a[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let out_row = out.row_mut(i);
                for j in 0..other.cols {
                    out_row[j] += aik * orow[j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scaled(&self, c: f64) -> Mat {
        let mut m = self.clone();
        for v in &mut m.a {
            *v *= c;
        }
        m
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (v, w) in m.a.iter_mut().zip(&other.a) {
            *v += w;
        }
        m
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (v, w) in m.a.iter_mut().zip(&other.a) {
            *v -= w;
        }
        m
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.a.iter().map(|v| v * v).sum()
    }

    pub fn trace(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn max_asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut m = 0.0_f64;
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }

    /// Symmetrize in place: A <- (A + A^T)/2.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.a[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.a[i * self.cols + j]
    }
}

/// Upper-triangular Cholesky factor: G = R^T R, positive diagonal.
///
/// Fails with the offending pivot index and value when the matrix is not
/// positive definite, so callers can react by raising the diagonal boost.
pub fn cholesky_upper(g: &Mat) -> Result<Mat> {
    assert_eq!(g.rows, g.cols);
    let n = g.rows;
    let mut r = Mat::zeros(n, n);
    for i in 0..n {
        let mut pivot = g[(i, i)];
        for k in 0..i {
            pivot -= r[(k, i)] * r[(k, i)];
        }
        if !(pivot > 0.0) {
            return Err(Error::NonPositivePivot { index: i, value: pivot });
        }
        let rii = pivot.sqrt();
        r[(i, i)] = rii;
        for j in i + 1..n {
            let mut v = g[(i, j)];
            for k in 0..i {
                v -= r[(k, i)] * r[(k, j)];
            }
            r[(i, j)] = v / rii;
        }
    }
    Ok(r)
}

fn check_diag(r: &Mat) -> Result<()> {
    for i in 0..r.rows {
        if r[(i, i)] == 0.0 {
            return Err(Error::SingularFactor { index: i });
        }
    }
    Ok(())
}

/// Solve R x = b with R upper triangular (back substitution).
pub fn solve_upper(r: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    check_diag(r)?;
    let n = r.rows;
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut v = x[i];
        for j in i + 1..n {
            v -= r[(i, j)] * x[j];
        }
        x[i] = v / r[(i, i)];
    }
    Ok(x)
}

/// Solve R^T x = b with R upper triangular (forward substitution).
pub fn solve_upper_transposed(r: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    check_diag(r)?;
    let n = r.rows;
    let mut x = b.to_vec();
    for i in 0..n {
        let mut v = x[i];
        for j in 0..i {
            v -= r[(j, i)] * x[j];
        }
        x[i] = v / r[(i, i)];
    }
    Ok(x)
}

/// X = B R^{-1}: solve X R = B row by row.
pub fn right_solve_upper(b: &Mat, r: &Mat) -> Result<Mat> {
    assert_eq!(b.cols, r.rows);
    check_diag(r)?;
    let n = r.rows;
    let mut x = b.clone();
    for row in 0..b.rows {
        for j in 0..n {
            let mut v = x[(row, j)];
            for k in 0..j {
                v -= x[(row, k)] * r[(k, j)];
            }
            x[(row, j)] = v / r[(j, j)];
        }
    }
    Ok(x)
}

/// Congruence R^{-T} S R^{-1} for upper-triangular R.
pub fn sandwich_inverse(r: &Mat, s: &Mat) -> Result<Mat> {
    let n = r.rows;
    assert_eq!((s.rows, s.cols), (n, n));
    // First Y = R^{-T} S (column-wise forward solves), then Y R^{-1}.
    let mut y = Mat::zeros(n, n);
    for col in 0..n {
        let b: Vec<f64> = (0..n).map(|i| s[(i, col)]).collect();
        let x = solve_upper_transposed(r, &b)?;
        for i in 0..n {
            y[(i, col)] = x[i];
        }
    }
    right_solve_upper(&y, r)
}

/// Keep the strict upper triangle and halve the diagonal.
pub fn upper_half_diag(s: &Mat) -> Mat {
    let n = s.rows;
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = 0.5 * s[(i, i)];
        for j in i + 1..n {
            out[(i, j)] = s[(i, j)];
        }
    }
    out
}

/// Solve the SPD system A x = b via Cholesky. On pivot failure the error
/// carries a crude condition estimate from the diagonal spread.
pub fn solve_spd(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    let r = cholesky_upper(a).map_err(|_| {
        let mut dmax = 0.0_f64;
        let mut dmin = f64::INFINITY;
        for i in 0..a.rows {
            dmax = dmax.max(a[(i, i)].abs());
            dmin = dmin.min(a[(i, i)].abs());
        }
        Error::NormalEquations { condition_estimate: dmax / dmin.max(f64::MIN_POSITIVE) }
    })?;
    let y = solve_upper_transposed(&r, b)?;
    solve_upper(&r, &y)
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
/// Returns (diagonal, off-diagonal); eigenvectors are not accumulated.
pub fn tridiagonalize(m: &Mat) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut a = m.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k below the diagonal.
        let mut alpha2 = 0.0;
        for i in k + 1..n {
            alpha2 += a[(i, k)] * a[(i, k)];
        }
        let alpha = alpha2.sqrt() * if a[(k + 1, k)] > 0.0 { -1.0 } else { 1.0 };
        let r2 = 0.5 * (alpha2 - a[(k + 1, k)] * alpha);
        if r2 <= 0.0 || !r2.is_finite() {
            continue; // column already tridiagonal
        }
        let r = r2.sqrt();
        let mut v = vec![0.0; n];
        v[k + 1] = (a[(k + 1, k)] - alpha) / (2.0 * r);
        for i in k + 2..n {
            v[i] = a[(i, k)] / (2.0 * r);
        }
        // A <- (I - 2vv^T) A (I - 2vv^T)
        let av: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| a[(i, j)] * v[j]).sum::<f64>())
            .collect();
        let vav: f64 = (0..n).map(|i| v[i] * av[i]).sum();
        for i in 0..n {
            for j in 0..n {
                let upd = -2.0 * (v[i] * av[j] + av[i] * v[j]) + 4.0 * vav * v[i] * v[j];
                a[(i, j)] += upd;
            }
        }
    }
    for i in 0..n {
        d[i] = a[(i, i)];
        if i + 1 < n {
            e[i] = a[(i + 1, i)];
        }
    }
    (d, e)
}

/// Number of eigenvalues of the tridiagonal matrix strictly below x
/// (Sturm count via the LDL^T recurrence).
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let n = d.len();
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let denom = if q == 0.0 { 1e-300 } else { q };
        q = d[i] - x - e[i - 1] * e[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of a symmetric matrix: Householder tridiagonalization
/// followed by safeguarded bisection on the Sturm count.
pub fn min_eigenvalue(m: &Mat) -> f64 {
    let n = m.rows;
    if n == 1 {
        return m[(0, 0)];
    }
    let (d, e) = tridiagonalize(m);
    // Gershgorin bounds for the tridiagonal matrix.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { e[i - 1].abs() } else { 0.0 };
        let right = if i < n - 1 { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - left - right);
        hi = hi.max(d[i] + left + right);
    }
    if lo == hi {
        return lo;
    }
    let mut a = lo;
    let mut b = hi;
    for _ in 0..120 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if sturm_count(&d, &e, mid) >= 1 {
            b = mid;
        } else {
            a = mid;
        }
    }
    0.5 * (a + b)
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
/// Returns eigenvalues in ascending order with matching eigenvector columns.
pub fn jacobi_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut a = m.clone();
    let mut v = Mat::identity(n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() < 1e-15 * (1.0 + a.frobenius_sq().sqrt()) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vecs = Mat::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            vecs[(k, col)] = v[(k, src)];
        }
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_spd(n: usize, seed: u64) -> Mat {
        // Simple LCG so the test has no RNG dependency.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut b = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] = next();
            }
        }
        let mut g = b.transpose().matmul(&b);
        for i in 0..n {
            g[(i, i)] += 0.5;
        }
        g
    }

    #[test]
    fn cholesky_known_2x2() {
        let g = Mat::from_rows(&[&[4.0, 2.0], &[2.0, 5.0]]);
        let r = cholesky_upper(&g).unwrap();
        assert!((r[(0, 0)] - 2.0).abs() < 1e-14);
        assert!((r[(0, 1)] - 1.0).abs() < 1e-14);
        assert!((r[(1, 0)]).abs() < 1e-14);
        assert!((r[(1, 1)] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cholesky_identity_is_identity() {
        let r = cholesky_upper(&Mat::identity(5)).unwrap();
        assert!(r.sub(&Mat::identity(5)).frobenius_sq() < 1e-28);
    }

    #[test]
    fn cholesky_reports_failing_pivot() {
        let g = Mat::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        match cholesky_upper(&g) {
            Err(Error::NonPositivePivot { index, value }) => {
                assert_eq!(index, 1);
                assert!((value + 3.0).abs() < 1e-14);
            }
            other => panic!("expected pivot failure, got {other:?}"),
        }
    }

    #[test]
    fn cholesky_reconstructs() {
        let g = random_spd(9, 3);
        let r = cholesky_upper(&g).unwrap();
        let diff = r.transpose().matmul(&r).sub(&g);
        assert!(diff.frobenius_sq().sqrt() < 1e-12 * g.frobenius_sq().sqrt());
    }

    #[test]
    fn triangular_solves() {
        let g = random_spd(7, 11);
        let r = cholesky_upper(&g).unwrap();
        let b: Vec<f64> = (0..7).map(|i| (i as f64).sin() + 0.3).collect();
        let x = solve_spd(&g, &b).unwrap();
        let back = g.matvec(&x);
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).abs() < 1e-10);
        }
        // Sandwich identity: R^{-T} G R^{-1} = I.
        let s = sandwich_inverse(&r, &g).unwrap();
        assert!(s.sub(&Mat::identity(7)).frobenius_sq().sqrt() < 1e-11);
    }

    #[test]
    fn min_eigenvalue_diagonal() {
        let mut m = Mat::zeros(3, 3);
        m[(0, 0)] = 3.0;
        m[(1, 1)] = 1.0;
        m[(2, 2)] = 2.0;
        assert!((min_eigenvalue(&m) - 1.0).abs() < 1e-12);
        assert!((min_eigenvalue(&Mat::identity(4)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn min_eigenvalue_matches_dense_oracle() {
        for seed in [1u64, 2, 3] {
            let g = random_spd(8, seed);
            let mine = min_eigenvalue(&g);
            let na = nalgebra::DMatrix::from_fn(8, 8, |i, j| g[(i, j)]);
            let oracle = na.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(
                (mine - oracle).abs() < 1e-10 * (1.0 + oracle.abs()),
                "seed {seed}: {mine} vs {oracle}"
            );
        }
    }

    #[test]
    fn jacobi_eigen_matches_oracle() {
        let g = random_spd(6, 17);
        let (vals, vecs) = jacobi_eigen(&g);
        let na = nalgebra::DMatrix::from_fn(6, 6, |i, j| g[(i, j)]);
        let mut oracle: Vec<f64> = na.symmetric_eigen().eigenvalues.iter().cloned().collect();
        oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in vals.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10);
        }
        // Residual check G v = lambda v.
        for col in 0..6 {
            let v: Vec<f64> = (0..6).map(|k| vecs[(k, col)]).collect();
            let gv = g.matvec(&v);
            for k in 0..6 {
                assert!((gv[k] - vals[col] * v[k]).abs() < 1e-9);
            }
        }
    }
}
