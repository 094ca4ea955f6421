//! Fixed-`N` diabatic representation.
//!
//! Within every rotational manifold of a block the quadrupole kernel is
//! diagonalized; its eigenvalues are the `C5` coefficients. Degenerate `C5`
//! groups are resolved by diagonalizing the dispersion kernel inside the
//! group. In this basis `W` has diagonal `B N(N+1) + C5/R⁵ + C6/R⁶` and
//! off-diagonal `C5'/R⁵ + C6'/R⁶`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::blocks::{Parity, Symmetry};
use crate::curves::{check_distance, BlockKernels};
use crate::error::{Error, Result};

/// Relative gap below which two `C5` values form a degenerate group.
pub const C5_DEGENERACY: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct DiabaticState {
    /// Rank within the block, from 1: manifolds by ascending `N`, then `C5`,
    /// then `C6`.
    pub p: usize,
    pub symmetry: Symmetry,
    pub parity: Parity,
    pub n: u32,
    /// hartree·bohr⁵
    pub c5: f64,
    /// hartree·bohr⁶
    pub c6: f64,
    /// Coefficients on the block states of this manifold (others are zero).
    pub coefficients: Vec<f64>,
}

impl DiabaticState {
    pub fn label(&self) -> String {
        format!("({}){} N={}", self.p, self.symmetry, self.n)
    }

    /// `B N(N+1) + C5/R⁵ + C6/R⁶`.
    pub fn energy(&self, b_rot: f64, r: f64) -> f64 {
        b_rot * (self.n * (self.n + 1)) as f64 + self.c5 / r.powi(5) + self.c6 / r.powi(6)
    }

    pub fn asymptote(&self, b_rot: f64) -> f64 {
        b_rot * (self.n * (self.n + 1)) as f64
    }
}

#[derive(Debug, Clone)]
pub struct DiabaticBasis {
    pub symmetry: Symmetry,
    pub parity: Parity,
    pub b_rot: f64,
    pub states: Vec<DiabaticState>,
    /// Column `i` holds state `i` in the block basis.
    pub transform: DMatrix<f64>,
    /// `C5'` matrix (diagonal holds `C5`).
    pub k5: DMatrix<f64>,
    /// `C6'` matrix (diagonal holds `C6`).
    pub k6: DMatrix<f64>,
}

fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn restrict(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

/// Diabatic states of a block, ordered by manifold, then `C5`, then `C6`.
pub fn build_diabatic(kernels: &BlockKernels) -> DiabaticBasis {
    let block = &kernels.block;
    let dim = kernels.len();
    let mut columns: Vec<(u32, Vec<f64>)> = Vec::with_capacity(dim);

    for n in block.manifolds() {
        let idx = block.manifold_indices(n);
        let (c5, v5) = sorted_eigen(restrict(&kernels.k5, &idx));
        let scale = c5.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        let k6_local = restrict(&kernels.k6, &idx);

        let mut start = 0;
        while start < c5.len() {
            let mut end = start + 1;
            while end < c5.len() && (c5[end] - c5[end - 1]).abs() <= C5_DEGENERACY * scale {
                end += 1;
            }
            let group = v5.columns(start, end - start).into_owned();
            let rotated = if end - start > 1 {
                let (_, w) = sorted_eigen(group.transpose() * &k6_local * &group);
                &group * w
            } else {
                group
            };
            for c in 0..rotated.ncols() {
                let mut col = rotated.column(c).into_owned();
                let imax = col.iamax();
                if col[imax] < 0.0 {
                    col.neg_mut();
                }
                let mut full = vec![0.0; dim];
                for (a, &i) in idx.iter().enumerate() {
                    full[i] = col[a];
                }
                columns.push((n, full));
            }
            start = end;
        }
    }

    let transform = DMatrix::from_fn(dim, dim, |r, c| columns[c].1[r]);
    let mut k5 = transform.transpose() * &kernels.k5 * &transform;
    let mut k6 = transform.transpose() * &kernels.k6 * &transform;
    for i in 0..dim {
        for j in 0..i {
            let a5 = 0.5 * (k5[(i, j)] + k5[(j, i)]);
            let a6 = 0.5 * (k6[(i, j)] + k6[(j, i)]);
            // exact zero by construction inside a manifold
            let a5 = if columns[i].0 == columns[j].0 { 0.0 } else { a5 };
            k5[(i, j)] = a5;
            k5[(j, i)] = a5;
            k6[(i, j)] = a6;
            k6[(j, i)] = a6;
        }
    }

    let states: Vec<DiabaticState> = columns
        .into_iter()
        .enumerate()
        .map(|(i, (n, coefficients))| DiabaticState {
            p: i + 1,
            symmetry: block.symmetry,
            parity: block.parity,
            n,
            c5: k5[(i, i)],
            c6: k6[(i, i)],
            coefficients,
        })
        .collect();
    DiabaticBasis { symmetry: block.symmetry, parity: block.parity, b_rot: kernels.b_rot, states, transform, k5, k6 }
}

/// `W^d(R)` in the diabatic basis (hartree).
pub fn diabatic_matrix(basis: &DiabaticBasis, r: f64) -> Result<DMatrix<f64>> {
    check_distance(r)?;
    let r5 = r.powi(5);
    let mut w = &basis.k5 / r5 + &basis.k6 / (r5 * r);
    for (i, s) in basis.states.iter().enumerate() {
        w[(i, i)] += s.asymptote(basis.b_rot);
    }
    Ok(w)
}

impl DiabaticBasis {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Index of the state with label `p`.
    pub fn index(&self, p: usize) -> Result<usize> {
        if p >= 1 && p <= self.states.len() {
            Ok(p - 1)
        } else {
            Err(Error::UnknownState(p))
        }
    }

    /// `W^d_ii(R)`.
    pub fn diagonal(&self, i: usize, r: f64) -> f64 {
        self.states[i].energy(self.b_rot, r)
    }

    /// `W^d_ij(R)` for `i ≠ j`.
    pub fn coupling(&self, i: usize, j: usize, r: f64) -> f64 {
        let r5 = r.powi(5);
        self.k5[(i, j)] / r5 + self.k6[(i, j)] / (r5 * r)
    }

    /// `∂W^d_ii/∂R = −5 C5/R⁶ − 6 C6/R⁷`.
    pub fn slope(&self, i: usize, r: f64) -> f64 {
        let s = &self.states[i];
        -5.0 * s.c5 / r.powi(6) - 6.0 * s.c6 / r.powi(7)
    }

    pub fn c5_prime(&self, i: usize, j: usize) -> f64 {
        self.k5[(i, j)]
    }

    pub fn c6_prime(&self, i: usize, j: usize) -> f64 {
        self.k6[(i, j)]
    }
}
