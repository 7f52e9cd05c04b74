//! Small dense square matrices and unit-lower-triangular solves.

use std::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn hadamard(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n);
        Self {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n);
        Self {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n);
        Self {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!(self.n, rhs.n);
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Principal submatrix on `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self::from_fn(indices.len(), |a, b| self[(indices[a], indices[b])])
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for SquareMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Solves `(I + L) x = b` where `L` is the strictly lower part of `lower`.
/// Entries on and above the diagonal of `lower` are ignored.
pub fn solve_unit_lower(lower: &SquareMatrix, b: &[f64]) -> Vec<f64> {
    let n = lower.dim();
    assert_eq!(b.len(), n);
    let mut x = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = b[i];
        for j in 0..i {
            acc -= lower[(i, j)] * x[j];
        }
        x.push(acc);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_lower_solve_round_trips() {
        let l = SquareMatrix::from_fn(4, |i, j| if i > j { 0.1 * (i + 2 * j + 1) as f64 } else { 0.0 });
        let b = [0.9, 0.5, -0.25, 2.0];
        let x = solve_unit_lower(&l, &b);
        let a = SquareMatrix::identity(4).add(&l);
        let back = a.matvec(&x);
        for (u, v) in back.iter().zip(b) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn upper_part_is_ignored() {
        let l = SquareMatrix::from_fn(2, |_, _| 7.0);
        assert_eq!(solve_unit_lower(&l, &[1.0, 1.0]), vec![1.0, -6.0]);
    }
}
