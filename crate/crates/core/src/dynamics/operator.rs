use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::C64;

/// Square sparse matrix stored as row-sorted triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub fn new(dim: usize, mut entries: Vec<(usize, usize, C64)>) -> Self {
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            assert!(r < dim && c < dim, "sparse entry ({r}, {c}) outside dimension {dim}");
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != C64::new(0.0, 0.0));
        Self { dim, entries: merged }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&alloc::vec![1.0; dim])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::new(values.len(), values.iter().enumerate().map(|(i, v)| (i, i, C64::new(*v, 0.0))).collect())
    }

    /// Truncated annihilation operator on `fock` levels.
    pub fn annihilation(fock: usize) -> Self {
        Self::new(fock, (1..fock).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))).collect())
    }

    pub fn creation(fock: usize) -> Self {
        Self::annihilation(fock).adjoint()
    }

    pub fn number(fock: usize) -> Self {
        Self::diagonal(&(0..fock).map(|n| n as f64).collect::<Vec<_>>())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.dim, self.entries.iter().map(|(r, c, v)| (*c, *r, v.conj())).collect())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.dim, self.entries.iter().map(|(r, c, v)| (*r, *c, v * s)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut e = self.entries.clone();
        e.extend_from_slice(&other.entries);
        Self::new(self.dim, e)
    }

    /// `self ⊗ other`, with `self` as the major index.
    pub fn kron(&self, other: &Self) -> Self {
        let d = other.dim;
        let mut e = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, v1) in &self.entries {
            for (r2, c2, v2) in &other.entries {
                e.push((r1 * d + r2, c1 * d + c2, v1 * v2));
            }
        }
        Self::new(self.dim * d, e)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut row_start = alloc::vec![0usize; other.dim + 1];
        for (r, _, _) in &other.entries {
            row_start[r + 1] += 1;
        }
        for i in 0..other.dim {
            row_start[i + 1] += row_start[i];
        }
        let mut e = Vec::new();
        for (r, k, v) in &self.entries {
            for (_, c, w) in &other.entries[row_start[*k]..row_start[k + 1]] {
                e.push((*r, *c, v * w));
            }
        }
        Self::new(self.dim, e)
    }

    /// Maximum |A − A†| entry.
    pub fn hermiticity_error(&self) -> f64 {
        let a = self.add(&self.adjoint().scale(C64::new(-1.0, 0.0)));
        a.entries.iter().map(|e| e.2.norm()).fold(0.0, f64::max)
    }

    /// `out += c · (self · rho)` for a row-major `dim × dim` matrix `rho`.
    pub fn apply_left(&self, rho: &[C64], out: &mut [C64], c: C64) {
        let d = self.dim;
        debug_assert_eq!(rho.len(), d * d);
        debug_assert_eq!(out.len(), d * d);
        for (r, k, v) in &self.entries {
            let coef = c * v;
            let src = &rho[k * d..(k + 1) * d];
            let dst = &mut out[r * d..(r + 1) * d];
            for (o, s) in dst.iter_mut().zip(src) {
                *o += coef * s;
            }
        }
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<C64> {
        let mut m = alloc::vec![C64::new(0.0, 0.0); self.dim * self.dim];
        for (r, c, v) in &self.entries {
            m[r * self.dim + c] += v;
        }
        m
    }
}
