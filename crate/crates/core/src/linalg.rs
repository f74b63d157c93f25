//! Small dense linear algebra for the alignment system.
//!
//! Two pieces live here: exact integer Gaussian elimination, which exposes the
//! row combinations that annihilate a 0/1 incidence matrix, and a real
//! Moore-Penrose pseudo-inverse built from a cyclic Jacobi eigensolver on the
//! Gram matrix. Matrices are tiny (at most a few dozen rows), so both run in
//! plain row-major `Vec`s.

use std::fmt;

/// Dense row-major real matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        out
    }

    /// `self * x` for a real vector.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors stored as columns.
pub fn symmetric_eigen(a: &Matrix) -> (Vec<f64>, Matrix) {
    assert_eq!(a.rows, a.cols, "symmetric_eigen needs a square matrix");
    let n = a.rows;
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)] * m[(p, q)])
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
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
    ((0..n).map(|i| m[(i, i)]).collect(), v)
}

/// Moore-Penrose pseudo-inverse of a real matrix.
///
/// `A⁺ = V Λ⁺ Vᵀ Aᵀ` where `AᵀA = V Λ Vᵀ`; eigenvalues below
/// `1e-10 · λ_max` are treated as zero.
pub fn pseudo_inverse(a: &Matrix) -> Matrix {
    let at = a.transpose();
    let gram = at.matmul(a);
    let (lambda, v) = symmetric_eigen(&gram);
    let lmax = lambda.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let cutoff = 1e-10 * lmax;
    let n = a.cols;
    let mut inv_gram = Matrix::zeros(n, n);
    for (k, &l) in lambda.iter().enumerate() {
        if l <= cutoff {
            continue;
        }
        for r in 0..n {
            for c in 0..n {
                inv_gram[(r, c)] += v[(r, k)] * v[(c, k)] / l;
            }
        }
    }
    inv_gram.matmul(&at)
}

/// A row of the echelon form that reduced to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NullCombination {
    /// Original row that was reduced to zero; its weight is exactly `+1` and it
    /// appears in no other combination.
    pub own_row: usize,
    /// Weights over the original rows (`weights · A = 0`).
    pub weights: Vec<i64>,
}

/// Result of exact integer elimination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Echelon {
    pub rank: usize,
    /// Original indices of the pivot rows, in pivot order.
    pub pivot_rows: Vec<usize>,
    pub null_combinations: Vec<NullCombination>,
}

/// Row-echelon reduction of an integer matrix, tracking row operations.
///
/// Pivots are chosen column by column, preferring a `±1` entry in the lowest
/// original row index, so 0/1 incidence matrices reduce without fractions.
/// Non-unit pivots fall back to fraction-free elimination.
pub fn integer_echelon(a: &[Vec<i64>]) -> Echelon {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    // (original index, reduced row, transformation row)
    let mut work: Vec<(usize, Vec<i64>, Vec<i64>)> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            assert_eq!(row.len(), n, "ragged matrix");
            let mut t = vec![0; m];
            t[i] = 1;
            (i, row.clone(), t)
        })
        .collect();

    let mut rank = 0;
    for col in 0..n {
        if rank == m {
            break;
        }
        let candidates = (rank..m).filter(|&r| work[r].1[col] != 0);
        let pick = candidates
            .clone()
            .filter(|&r| work[r].1[col].abs() == 1)
            .min_by_key(|&r| work[r].0)
            .or_else(|| candidates.min_by_key(|&r| work[r].0));
        let Some(p) = pick else { continue };
        work.swap(rank, p);
        if work[rank].1[col] < 0 {
            let (_, row, t) = &mut work[rank];
            row.iter_mut().for_each(|x| *x = -*x);
            t.iter_mut().for_each(|x| *x = -*x);
        }
        let (pivot_row, pivot_t) = (work[rank].1.clone(), work[rank].2.clone());
        let pv = pivot_row[col];
        for (_, row, t) in work.iter_mut().skip(rank + 1) {
            let f = row[col];
            if f == 0 {
                continue;
            }
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = pv * *x - f * y;
            }
            for (x, y) in t.iter_mut().zip(&pivot_t) {
                *x = pv * *x - f * y;
            }
        }
        rank += 1;
    }

    let pivot_rows = work[..rank].iter().map(|w| w.0).collect();
    let null_combinations = work[rank..]
        .iter()
        .map(|(orig, _, t)| NullCombination {
            own_row: *orig,
            weights: t.clone(),
        })
        .collect();
    Echelon {
        rank,
        pivot_rows,
        null_combinations,
    }
}
