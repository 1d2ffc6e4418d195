// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact diagonalization: propagators, quench dynamics and compile targets.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::parse_basis_label;
use crate::error::{validation, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::model::{build_hamiltonian, CouplingProfile};
use crate::trace::{DynamicsTrace, TraceSource};

const HERMITIAN_TOL: f64 = 1e-10;

/// `exp(-i H t)` together with where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub matrix: CMatrix,
    pub time: f64,
    pub hamiltonian_id: String,
}

impl Propagator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Stable identifier for a profile's post-quench Hamiltonian.
pub fn hamiltonian_id(profile: &CouplingProfile) -> String {
    match &profile.name {
        Some(name) => name.clone(),
        None => format!("J={:?},h={}", profile.couplings, profile.field),
    }
}

/// `H = V Λ V†`, reusable for any number of times `t`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn new(h: &CMatrix) -> Result<Self> {
        let err = linalg::hermiticity_error(h);
        if err > HERMITIAN_TOL {
            return Err(validation(format!("matrix is not Hermitian (max deviation {err:.3e})")));
        }
        let (eigenvalues, eigenvectors) = linalg::eigh(h);
        Ok(SpectralDecomposition { eigenvalues, eigenvectors })
    }

    pub fn propagator(&self, t: f64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &e) in self.eigenvalues.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -e * t);
            {
                let mut col = scaled.column_mut(k);
                col *= phase;
            }
        }
        scaled * v.adjoint()
    }

    /// `exp(-iHt) ψ` without forming the propagator.
    pub fn evolve(&self, psi: &CVector, t: f64) -> CVector {
        let v = &self.eigenvectors;
        let mut coeffs = v.adjoint() * psi;
        for (c, &e) in coeffs.iter_mut().zip(&self.eigenvalues) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        v * coeffs
    }
}

pub fn propagator(h: &CMatrix, t: f64) -> Result<Propagator> {
    let spectral = SpectralDecomposition::new(h)?;
    Ok(Propagator { matrix: spectral.propagator(t), time: t, hamiltonian_id: "matrix".into() })
}

/// `<Z_q>` for every qubit, from basis-state probabilities.
pub fn magnetization(psi: &[Complex64], n_qubits: usize) -> Vec<f64> {
    let mut m = vec![0.0; n_qubits];
    for (x, amp) in psi.iter().enumerate() {
        let p = amp.norm_sqr();
        for (q, mq) in m.iter_mut().enumerate() {
            if (x >> q) & 1 == 0 {
                *mq += p;
            } else {
                *mq -= p;
            }
        }
    }
    m
}

pub fn basis_state(n_qubits: usize, label: &str) -> Result<CVector> {
    let index = parse_basis_label(label, n_qubits)?;
    let mut psi = CVector::zeros(1 << n_qubits);
    psi[index] = linalg::ONE;
    Ok(psi)
}

fn check_grid(dt: f64, n_steps: usize) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(validation(format!("dt must be positive, got {dt}")));
    }
    if n_steps == 0 {
        return Err(validation("n_steps must be at least 1"));
    }
    Ok(())
}

/// Evolve a basis state under the post-quench Hamiltonian and record `<Z_i>`
/// at `t = k dt` for `k = 0..=n_steps`.
pub fn evolve_quench(profile: &CouplingProfile, dt: f64, n_steps: usize, initial_state: &str) -> Result<DynamicsTrace> {
    check_grid(dt, n_steps)?;
    let n = profile.n_sites;
    let psi0 = basis_state(n, initial_state)?;
    let spectral = SpectralDecomposition::new(&build_hamiltonian(profile, true)?)?;
    let mut magnetization = vec![Vec::with_capacity(n_steps + 1); n];
    let mut times = Vec::with_capacity(n_steps + 1);
    for k in 0..=n_steps {
        let t = k as f64 * dt;
        let psi = spectral.evolve(&psi0, t);
        for (q, m) in magnetization_of(&psi, n).into_iter().enumerate() {
            magnetization[q].push(m);
        }
        times.push(t);
    }
    Ok(DynamicsTrace { times, magnetization, source: TraceSource::Exact, sampled: false, shots: None, seed: None })
}

fn magnetization_of(psi: &CVector, n: usize) -> Vec<f64> {
    magnetization(psi.as_slice(), n)
}

/// Cumulative targets `U_T(k) = exp(-i H_final k dt)` for `k = 1..=n_steps`.
pub fn target_unitaries(profile: &CouplingProfile, dt: f64, n_steps: usize) -> Result<Vec<Propagator>> {
    check_grid(dt, n_steps)?;
    let spectral = SpectralDecomposition::new(&build_hamiltonian(profile, true)?)?;
    let id = hamiltonian_id(profile);
    Ok((1..=n_steps)
        .map(|k| {
            let t = k as f64 * dt;
            Propagator { matrix: spectral.propagator(t), time: t, hamiltonian_id: id.clone() }
        })
        .collect())
}

/// Serializable summary of a propagator, for reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropagatorSummary {
    pub time: f64,
    pub hamiltonian_id: String,
    pub unitarity_error: f64,
}

impl From<&Propagator> for PropagatorSummary {
    fn from(p: &Propagator) -> Self {
        PropagatorSummary {
            time: p.time,
            hamiltonian_id: p.hamiltonian_id.clone(),
            unitarity_error: linalg::unitarity_error(&p.matrix),
        }
    }
}
