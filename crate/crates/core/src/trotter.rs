// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

//! First-order Trotter circuits, whose depth grows linearly with step count.

use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, NativeGateSequence};
use crate::error::{validation, Result};
use crate::exact::SpectralDecomposition;
use crate::linalg::{self, CMatrix};
use crate::model::{build_hamiltonian, CouplingProfile};

/// One step `exp(-i H_ZZ dt) exp(-i H_X dt)`: `RX(-2 h dt)` on every site,
/// then `CNOT · RZ_{i+1}(-2 J_i dt) · CNOT` on every bond.
pub fn trotter_step(profile: &CouplingProfile, dt: f64) -> Result<NativeGateSequence> {
    profile.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(validation(format!("dt must be positive, got {dt}")));
    }
    let n = profile.n_sites;
    let mut seq = NativeGateSequence::new(n);
    for qubit in 0..n {
        seq.push(Gate::Rx { qubit, angle: -2.0 * profile.field * dt });
    }
    for (i, j) in profile.couplings.iter().enumerate() {
        seq.push(Gate::Cnot { control: i, target: i + 1 });
        seq.push(Gate::Rz { qubit: i + 1, angle: -2.0 * j * dt });
        seq.push(Gate::Cnot { control: i, target: i + 1 });
    }
    Ok(seq)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrotterCircuit {
    pub n_steps: usize,
    pub dt: f64,
    pub step: NativeGateSequence,
}

impl TrotterCircuit {
    pub fn n_qubits(&self) -> usize {
        self.step.n_qubits
    }

    /// The first `k` steps as one sequence.
    pub fn prefix(&self, k: usize) -> NativeGateSequence {
        let mut seq = NativeGateSequence::new(self.n_qubits());
        for _ in 0..k {
            seq.extend_from(&self.step);
        }
        seq
    }

    pub fn sequence(&self) -> NativeGateSequence {
        self.prefix(self.n_steps)
    }

    pub fn gate_count(&self) -> usize {
        self.n_steps * self.step.len()
    }

    pub fn cnot_count(&self) -> usize {
        self.n_steps * self.step.cnot_count()
    }

    /// `step^n_steps`, by repeated squaring of the step matrix.
    pub fn matrix(&self) -> Result<CMatrix> {
        let step = self.step.to_matrix()?;
        let mut result = linalg::identity(step.nrows());
        let mut base = step;
        let mut k = self.n_steps;
        while k > 0 {
            if k & 1 == 1 {
                result = &base * &result;
            }
            base = &base * &base;
            k >>= 1;
        }
        Ok(result)
    }

    /// Circuits for `t = k dt`, `k = 1..=n_steps`.
    pub fn circuits(&self) -> Vec<NativeGateSequence> {
        (1..=self.n_steps).map(|k| self.prefix(k)).collect()
    }
}

pub fn trotter_evolution(profile: &CouplingProfile, dt: f64, n_steps: usize) -> Result<TrotterCircuit> {
    Ok(TrotterCircuit { n_steps, dt, step: trotter_step(profile, dt)? })
}

/// `‖U_trotter − exp(-i H t_final)‖₂` with `n_steps` steps of `t_final / n_steps`.
pub fn trotter_error(profile: &CouplingProfile, t_final: f64, n_steps: usize) -> Result<f64> {
    if n_steps == 0 {
        return Err(validation("n_steps must be at least 1"));
    }
    let dt = t_final / n_steps as f64;
    let u = trotter_evolution(profile, dt, n_steps)?.matrix()?;
    let exact = SpectralDecomposition::new(&build_hamiltonian(profile, true)?)?.propagator(t_final);
    Ok(linalg::spectral_norm(&(u - exact)))
}

/// `error(dt) / error(dt / 2)` at `t_final`; close to 2 for a first-order formula.
pub fn trotter_error_ratio(profile: &CouplingProfile, t_final: f64, n_steps: usize) -> Result<f64> {
    Ok(trotter_error(profile, t_final, n_steps)? / trotter_error(profile, t_final, 2 * n_steps)?)
}
