// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra used across the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Largest entry modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `max |H - H†|` elementwise.
pub fn hermiticity_error(h: &CMatrix) -> f64 {
    if !h.is_square() {
        return f64::INFINITY;
    }
    let n = h.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max |U†U - I|` elementwise.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &identity(u.nrows()))
}

/// `Tr(A† B)` without forming the product.
pub fn trace_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `1 - |Tr(A†B)| / d`: zero iff the two unitaries agree up to a global phase.
pub fn phase_invariant_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a.nrows() as f64;
    (1.0 - trace_inner(a, b).norm() / d).max(0.0)
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues ascending.
pub fn eigh(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(h.nrows(), h.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest singular value.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    a.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

/// Multiply by a global phase so the largest-modulus entry is real positive.
pub fn fix_phase(v: &mut CVector) {
    let mut best = ZERO;
    for x in v.iter() {
        if x.norm() > best.norm() + 1e-12 {
            best = *x;
        }
    }
    if best.norm() > 0.0 {
        let phase = best.conj() / best.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

pub mod pauli {
    use super::*;

    pub fn x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }
    pub fn y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
    }
    pub fn z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }

    /// Embed single-site operators into an `n`-qubit register by explicit
    /// Kronecker products; qubit 0 is the right-most factor.
    pub fn embed(n: usize, ops: &[(usize, CMatrix)]) -> CMatrix {
        let mut out = identity(1);
        for q in (0..n).rev() {
            let factor = ops.iter().find(|(site, _)| *site == q).map(|(_, m)| m.clone()).unwrap_or_else(|| identity(2));
            out = kron(&out, &factor);
        }
        out
    }
}
