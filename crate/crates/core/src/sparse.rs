//! Compressed sparse row matrices on the node graph of a mesh.

use alloc::vec;
use alloc::vec::Vec;

use crate::mesh::Mesh;
use crate::{Error, Result};

/// Square CSR matrix with sorted column indices in every row.
///
/// Symmetric matrices are stored with both triangles so products need no
/// special casing.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the node-adjacency pattern of `mesh` (every pair of
    /// nodes sharing a triangle, plus the diagonal).
    pub fn from_mesh_pattern(mesh: &Mesh) -> Self {
        let n = mesh.node_count();
        let mut neighbours: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for tri in mesh.elements() {
            for &a in tri {
                for &b in tri {
                    if a != b {
                        neighbours[a].push(b);
                    }
                }
            }
        }
        Self::from_rows(neighbours)
    }

    fn from_rows(mut rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument("triplet index out of range".into()));
            }
            rows[i].push(j);
        }
        let mut m = Self::from_rows(rows);
        for &(i, j, v) in triplets {
            m.add(i, j, v);
        }
        Ok(m)
    }

    /// Matrix with the same pattern and all values zero.
    pub fn zeros_like(&self) -> Self {
        Self {
            values: vec![0.0; self.values.len()],
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column/value pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (start, end) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[start..end].binary_search(&j).ok().map(|k| start + k)
    }

    /// Entry `(i, j)`, zero outside the pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to entry `(i, j)`.
    ///
    /// # Panics
    /// If `(i, j)` is outside the sparsity pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside the sparsity pattern"));
        self.values[k] += v;
    }

    /// Scatters a dense element block into the rows/columns `dofs`.
    pub fn add_block<const N: usize>(&mut self, dofs: &[usize; N], block: &[[f64; N]; N]) {
        for (a, &i) in dofs.iter().enumerate() {
            for (b, &j) in dofs.iter().enumerate() {
                self.add(i, j, block[a][b]);
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `alpha * self + beta * other`; both must share one pattern.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.row_ptr != other.row_ptr || self.col_idx != other.col_idx {
            return Err(Error::InvalidArgument("matrices have different sparsity patterns".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(Self {
            values,
            ..self.clone()
        })
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Principal submatrix on the index set `keep` (sorted), renumbered to
    /// `0..keep.len()`. `map[i]` must give the new index of kept row `i`.
    pub fn submatrix(&self, keep: &[usize], map: &[Option<usize>]) -> Self {
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &i in keep {
            for (j, v) in self.row(i) {
                if let Some(jj) = map[j] {
                    col_idx.push(jj);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n: keep.len(),
            row_ptr,
            col_idx,
            values,
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    num_traits::Float::sqrt(dot(a, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 2.0), (0, 0, 3.0), (1, 1, 5.0)]).unwrap();
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![6.0, 5.0]);
        assert!(CsrMatrix::from_triplets(1, &[(1, 0, 1.0)]).is_err());
    }

    #[test]
    fn submatrix_renumbers() {
        let m = CsrMatrix::from_triplets(
            3,
            &[(0, 0, 1.0), (0, 2, 2.0), (2, 0, 2.0), (2, 2, 4.0), (1, 1, 9.0), (1, 2, 7.0)],
        )
        .unwrap();
        let s = m.submatrix(&[0, 2], &[Some(0), None, Some(1)]);
        assert_eq!(s.dim(), 2);
        assert_eq!(s.get(0, 1), 2.0);
        assert_eq!(s.get(1, 1), 4.0);
        assert_eq!(s.nnz(), 4);
    }

    #[test]
    #[should_panic(expected = "outside the sparsity pattern")]
    fn add_outside_pattern_panics() {
        let mut m = CsrMatrix::from_triplets(2, &[(0, 0, 1.0)]).unwrap();
        m.add(0, 1, 1.0);
    }
}
