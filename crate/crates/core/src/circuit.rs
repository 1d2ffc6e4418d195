// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Native gate sequences and the statevector kernels that execute them.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Result};
use crate::linalg::{self, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Rx,
    Rz,
    Cnot,
    H,
}

/// One native gate. Qubit indices are 0-based (qubit 1 is index 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Gate {
    /// `exp(-i θ X / 2)`
    Rx {
        qubit: usize,
        angle: f64,
    },
    /// `exp(-i θ Z / 2)`
    Rz {
        qubit: usize,
        angle: f64,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    H {
        qubit: usize,
    },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Rx { .. } => GateKind::Rx,
            Gate::Rz { .. } => GateKind::Rz,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::H { .. } => GateKind::H,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Rx { qubit, .. } | Gate::Rz { qubit, .. } | Gate::H { qubit } => vec![qubit],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx { angle, .. } | Gate::Rz { angle, .. } => Some(angle),
            _ => None,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot { .. })
    }

    pub fn max_qubit(&self) -> usize {
        self.qubits().into_iter().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NativeGateSequence {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl NativeGateSequence {
    pub fn new(n_qubits: usize) -> Self {
        NativeGateSequence { n_qubits, gates: Vec::new() }
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn extend_from(&mut self, other: &NativeGateSequence) {
        self.gates.extend_from_slice(&other.gates);
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn single_qubit_count(&self) -> usize {
        self.len() - self.cnot_count()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.gates.iter().enumerate() {
            if g.max_qubit() >= self.n_qubits {
                return Err(validation(format!(
                    "gate {i} acts on qubit {} of a {}-qubit register",
                    g.max_qubit(),
                    self.n_qubits
                )));
            }
            if let Gate::Cnot { control, target } = g {
                if control == target {
                    return Err(validation(format!("gate {i}: CNOT control equals target")));
                }
            }
            if let Some(a) = g.angle() {
                if !a.is_finite() {
                    return Err(validation(format!("gate {i}: non-finite angle")));
                }
            }
        }
        Ok(())
    }

    /// Apply every gate, in order, to a state of length `2^n_qubits`.
    pub fn apply(&self, state: &mut [Complex64]) {
        for g in &self.gates {
            apply_gate(state, g);
        }
    }

    /// Dense unitary of the whole sequence.
    pub fn to_matrix(&self) -> Result<CMatrix> {
        self.validate()?;
        let dim = 1usize << self.n_qubits;
        let mut m = linalg::identity(dim);
        for col in m.as_mut_slice().chunks_mut(dim) {
            self.apply(col);
        }
        Ok(m)
    }
}

#[inline]
fn for_each_pair(len: usize, bit: usize, mut f: impl FnMut(usize, usize)) {
    let stride = bit << 1;
    let mut base = 0;
    while base < len {
        for i in base..base + bit {
            f(i, i | bit);
        }
        base += stride;
    }
}

pub fn apply_rx(state: &mut [Complex64], q: usize, angle: f64) {
    let c = Complex64::new((angle / 2.0).cos(), 0.0);
    let s = Complex64::new(0.0, -(angle / 2.0).sin());
    for_each_pair(state.len(), 1 << q, |i, j| {
        let (a, b) = (state[i], state[j]);
        state[i] = c * a + s * b;
        state[j] = s * a + c * b;
    });
}

pub fn apply_rz(state: &mut [Complex64], q: usize, angle: f64) {
    let lo = Complex64::from_polar(1.0, -angle / 2.0);
    let hi = lo.conj();
    for_each_pair(state.len(), 1 << q, |i, j| {
        state[i] *= lo;
        state[j] *= hi;
    });
}

pub fn apply_h(state: &mut [Complex64], q: usize) {
    for_each_pair(state.len(), 1 << q, |i, j| {
        let (a, b) = (state[i], state[j]);
        state[i] = (a + b) * FRAC_1_SQRT_2;
        state[j] = (a - b) * FRAC_1_SQRT_2;
    });
}

pub fn apply_cnot(state: &mut [Complex64], control: usize, target: usize) {
    let c = 1usize << control;
    for_each_pair(state.len(), 1 << target, |i, j| {
        if i & c != 0 {
            state.swap(i, j);
        }
    });
}

pub fn apply_x(state: &mut [Complex64], q: usize) {
    for_each_pair(state.len(), 1 << q, |i, j| state.swap(i, j));
}

pub fn apply_y(state: &mut [Complex64], q: usize) {
    // Y|0> = i|1>, Y|1> = -i|0>
    for_each_pair(state.len(), 1 << q, |i, j| {
        let (a, b) = (state[i], state[j]);
        state[i] = Complex64::new(b.im, -b.re);
        state[j] = Complex64::new(-a.im, a.re);
    });
}

pub fn apply_z(state: &mut [Complex64], q: usize) {
    for_each_pair(state.len(), 1 << q, |_, j| state[j] = -state[j]);
}

pub fn apply_gate(state: &mut [Complex64], gate: &Gate) {
    match *gate {
        Gate::Rx { qubit, angle } => apply_rx(state, qubit, angle),
        Gate::Rz { qubit, angle } => apply_rz(state, qubit, angle),
        Gate::Cnot { control, target } => apply_cnot(state, control, target),
        Gate::H { qubit } => apply_h(state, qubit),
    }
}

/// Hadamard on every qubit.
pub fn hadamard_layer(n_qubits: usize) -> NativeGateSequence {
    NativeGateSequence { n_qubits, gates: (0..n_qubits).map(|qubit| Gate::H { qubit }).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    fn single(gate: Gate, n: usize) -> CMatrix {
        NativeGateSequence { n_qubits: n, gates: vec![gate] }.to_matrix().unwrap()
    }

    fn expm_pauli(p: CMatrix, angle: f64) -> CMatrix {
        // exp(-i θ P / 2) = cos(θ/2) I - i sin(θ/2) P for P² = I
        linalg::identity(p.nrows()) * Complex64::new((angle / 2.0).cos(), 0.0)
            - p * Complex64::new(0.0, (angle / 2.0).sin())
    }

    #[test]
    fn kernels_match_kronecker_oracle() {
        let n = 3;
        for q in 0..n {
            let rx = expm_pauli(pauli::embed(n, &[(q, pauli::x())]), 0.7);
            assert!(linalg::max_abs_diff(&single(Gate::Rx { qubit: q, angle: 0.7 }, n), &rx) < 1e-14);
            let rz = expm_pauli(pauli::embed(n, &[(q, pauli::z())]), -1.3);
            assert!(linalg::max_abs_diff(&single(Gate::Rz { qubit: q, angle: -1.3 }, n), &rz) < 1e-14);
            let h = (pauli::embed(n, &[(q, pauli::x())]) + pauli::embed(n, &[(q, pauli::z())]))
                * Complex64::new(FRAC_1_SQRT_2, 0.0);
            assert!(linalg::max_abs_diff(&single(Gate::H { qubit: q }, n), &h) < 1e-14);
            for (apply, p) in
                [(apply_x as fn(&mut [Complex64], usize), pauli::x()), (apply_y, pauli::y()), (apply_z, pauli::z())]
            {
                let mut m = linalg::identity(8);
                for col in m.as_mut_slice().chunks_mut(8) {
                    apply(col, q);
                }
                assert!(linalg::max_abs_diff(&m, &pauli::embed(n, &[(q, p)])) < 1e-15);
            }
        }
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        // Qubit 1 set (index 1), control qubit 1 → both set (index 3).
        let m = single(Gate::Cnot { control: 0, target: 1 }, 2);
        assert_eq!(m[(3, 1)], linalg::ONE);
        assert_eq!(m[(0, 0)], linalg::ONE);
        assert_eq!(m[(2, 2)], linalg::ONE);
        assert_eq!(m[(1, 3)], linalg::ONE);
    }

    #[test]
    fn validation_catches_bad_qubits() {
        let seq = NativeGateSequence { n_qubits: 2, gates: vec![Gate::H { qubit: 2 }] };
        assert!(seq.validate().is_err());
        let seq = NativeGateSequence { n_qubits: 2, gates: vec![Gate::Cnot { control: 1, target: 1 }] };
        assert!(seq.validate().is_err());
    }
}
