use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

// Float math is inherent only on recent toolchains.
#[allow(unused_imports)]
use num_traits::Float;

use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Reverse Cuthill-McKee ordering of the symmetric pattern of `a`.
///
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    let neighbours = |i: usize| a.col_idx()[a.row_ptr()[i]..a.row_ptr()[i + 1]].iter().copied().filter(move |&j| j != i);
    let degree: Vec<usize> = (0..n).map(|i| neighbours(i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    // Breadth-first level structure from `root`; returns the last level.
    let last_level = |root: usize| -> Vec<usize> {
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut level = vec![root];
        loop {
            let mut next = Vec::new();
            for &v in &level {
                for w in neighbours(v) {
                    if !seen[w] {
                        seen[w] = true;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                return level;
            }
            level = next;
        }
    };

    while order.len() < n {
        let seed = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (degree[i], i))
            .expect("unvisited node exists");
        // A few sweeps towards a pseudo-peripheral node.
        let mut root = seed;
        for _ in 0..4 {
            let far = last_level(root);
            let candidate = *far.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
            if candidate == root {
                break;
            }
            root = candidate;
        }
        let mut queue = VecDeque::new();
        visited[root] = true;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = neighbours(v).filter(|&w| !visited[w]).collect();
            next.sort_unstable_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Cholesky factor `L` of `P A P^T` stored by rows within the envelope.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let perm = reverse_cuthill_mckee(a);
        let mut inverse = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for old in 0..n {
            let i = inverse[old];
            for (j_old, _) in a.row(old) {
                first[i] = first[i].min(inverse[j_old]);
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + (i - first[i] + 1));
        }
        let mut values = vec![0.0; offset[n]];
        for old in 0..n {
            let i = inverse[old];
            for (j_old, v) in a.row(old) {
                let j = inverse[j_old];
                if j <= i {
                    values[offset[i] + j - first[i]] = v;
                }
            }
        }

        for i in 0..n {
            let (fi, oi) = (first[i], offset[i]);
            for j in fi..i {
                let (fj, oj) = (first[j], offset[j]);
                let start = fi.max(fj);
                let mut s = values[oi + j - fi];
                for k in start..j {
                    s -= values[oi + k - fi] * values[oj + k - fj];
                }
                values[oi + j - fi] = s / values[oj + j - fj];
            }
            let mut d = values[oi + i - fi];
            for k in fi..i {
                let l = values[oi + k - fi];
                d -= l * l;
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { row: perm[i], pivot: d });
            }
            values[oi + i - fi] = d.sqrt();
        }
        Ok(Self {
            perm,
            first,
            offset,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let (fi, oi) = (self.first[i], self.offset[i]);
            let mut s = y[i];
            for k in fi..i {
                s -= self.values[oi + k - fi] * y[k];
            }
            y[i] = s / self.values[oi + i - fi];
        }
        for i in (0..n).rev() {
            let (fi, oi) = (self.first[i], self.offset[i]);
            y[i] /= self.values[oi + i - fi];
            let xi = y[i];
            for k in fi..i {
                y[k] -= self.values[oi + k - fi] * xi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
    }
}
