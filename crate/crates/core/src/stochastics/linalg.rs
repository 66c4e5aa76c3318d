//! Small dense symmetric matrices and their Cholesky factors.
//!
//! Every matrix in this crate is at most a few dozen rows, so storage is a
//! plain row-major `Vec<f64>` holding the full square. Mutators write both
//! triangles, which keeps `m[i][j] == m[j][i]` bit-exact.

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative pivot tolerance for [`cholesky`].
pub const PD_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * m.dim + i] = d;
        }
        m
    }

    /// Builds a matrix from the lower triangle of `f(i, j)`, `j <= i`.
    pub fn from_lower_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds a matrix from nested rows. The input must be square and
    /// symmetric up to `1e-12` relative; the result is symmetrized exactly.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::EmptyInput);
        }
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
        }
        let scale = rows
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0_f64, |acc, v| acc.max(v.abs()));
        for i in 0..dim {
            for j in 0..i {
                if (rows[i][j] - rows[j][i]).abs() > 1e-12 * (1.0 + scale) {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::from_lower_fn(dim, |i, j| {
            0.5 * (rows[i][j] + rows[j][i])
        }))
    }

    /// `w · v vᵀ`.
    pub fn outer(v: &[f64], w: f64) -> Self {
        let mut m = Self::zeros(v.len());
        m.add_outer(v, w);
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
        self.data[j * self.dim + i] = value;
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.dim.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    /// In-place `self += w · v vᵀ`.
    pub fn add_outer(&mut self, v: &[f64], w: f64) {
        debug_assert_eq!(v.len(), self.dim);
        for i in 0..self.dim {
            let wi = w * v[i];
            for j in 0..=i {
                let val = self.get(i, j) + wi * v[j];
                self.set(i, j, val);
            }
        }
    }

    pub fn add_assign(&mut self, other: &SymMatrix) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        self.add(&other.scaled(-1.0))
    }

    pub fn scaled(&self, c: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `xᵀ M x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `O · self · O` for a symmetric `O`; the `A B A` products of the
    /// sandwich formulas.
    pub fn sandwiched_by(&self, outer: &SymMatrix) -> SymMatrix {
        let p = self.dim;
        debug_assert_eq!(outer.dim, p);
        let mut tmp = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                tmp[i * p + j] = (0..p).map(|k| self.get(i, k) * outer.get(k, j)).sum();
            }
        }
        SymMatrix::from_lower_fn(p, |i, j| {
            let a: f64 = (0..p).map(|k| outer.get(i, k) * tmp[k * p + j]).sum();
            let b: f64 = (0..p).map(|k| outer.get(j, k) * tmp[k * p + i]).sum();
            0.5 * (a + b)
        })
    }

    /// Induced infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        self.data
            .chunks(self.dim.max(1))
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn inverse(&self) -> Result<SymMatrix> {
        Ok(cholesky(self)?.inverse())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Lower-triangular Cholesky factor `L` with `M = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

/// Factors a symmetric matrix. Fails with [`Error::NotPositiveDefinite`]
/// when a pivot is at or below `PD_TOLERANCE · ‖m‖_∞`.
pub fn cholesky(m: &SymMatrix) -> Result<Cholesky> {
    let p = m.dim();
    if p == 0 {
        return Err(Error::EmptyInput);
    }
    let tol = PD_TOLERANCE * m.norm_inf();
    let mut l = vec![0.0; p * p];
    for j in 0..p {
        let mut pivot = m.get(j, j);
        for k in 0..j {
            pivot -= l[j * p + k] * l[j * p + k];
        }
        if !(pivot > tol) {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let d = pivot.sqrt();
        l[j * p + j] = d;
        for i in (j + 1)..p {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * p + k] * l[j * p + k];
            }
            l[i * p + j] = s / d;
        }
    }
    Ok(Cholesky { dim: p, lower: l })
}

impl Cholesky {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.dim + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.lower.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// `L · z`.
    pub fn mul_vec(&self, z: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..=i).map(|k| self.get(i, k) * z[k]).sum())
            .collect()
    }

    /// `L · T · Tᵀ · Lᵀ` for lower-triangular `T` given row-major.
    pub fn congruence_lower(&self, t: &[f64]) -> SymMatrix {
        let p = self.dim;
        // LT is lower triangular
        let mut lt = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..=i {
                lt[i * p + j] = (j..=i).map(|k| self.get(i, k) * t[k * p + j]).sum();
            }
        }
        SymMatrix::from_lower_fn(p, |i, j| {
            (0..=j).map(|k| lt[i * p + k] * lt[j * p + k]).sum()
        })
    }

    /// Solves `L Lᵀ x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let p = self.dim;
        let mut y = b.to_vec();
        for i in 0..p {
            for k in 0..i {
                y[i] -= self.get(i, k) * y[k];
            }
            y[i] /= self.get(i, i);
        }
        for i in (0..p).rev() {
            for k in (i + 1)..p {
                y[i] -= self.get(k, i) * y[k];
            }
            y[i] /= self.get(i, i);
        }
        y
    }

    pub fn inverse(&self) -> SymMatrix {
        let p = self.dim;
        let mut inv = SymMatrix::zeros(p);
        let mut e = vec![0.0; p];
        for j in 0..p {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in j..p {
                inv.set(i, j, col[i]);
            }
        }
        inv
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim).map(|i| self.get(i, i).ln()).sum::<f64>()
    }

    pub fn reconstruct(&self) -> SymMatrix {
        SymMatrix::from_lower_fn(self.dim, |i, j| {
            (0..=j).map(|k| self.get(i, k) * self.get(j, k)).sum()
        })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
