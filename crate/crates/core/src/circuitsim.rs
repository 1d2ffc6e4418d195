// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Statevector execution, Pauli-jump noise trajectories and shot sampling.
//!
//! Every shot draws from its own ChaCha8 stream (`set_stream(shot)`) seeded by
//! the call's seed, so counts do not depend on how shots are scheduled.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{format_basis_label, parse_basis_label};
use crate::circuit::{apply_gate, apply_x, apply_y, apply_z, Gate, NativeGateSequence};
use crate::error::{validation, Error, Result};
use crate::exact::magnetization;
use crate::parallel::{map_indexed, Execution};
use crate::trace::{DynamicsTrace, TraceSource};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub enabled: bool,
    pub two_qubit_depolarizing_p: f64,
    pub single_qubit_depolarizing_p: f64,
    pub readout_flip_p: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            enabled: true,
            two_qubit_depolarizing_p: 0.01,
            single_qubit_depolarizing_p: 0.001,
            readout_flip_p: 0.0261,
        }
    }
}

impl NoiseModel {
    pub fn disabled() -> Self {
        NoiseModel { enabled: false, ..NoiseModel::default() }
    }

    /// Only readout errors.
    pub fn readout_only(p: f64) -> Self {
        NoiseModel { enabled: true, two_qubit_depolarizing_p: 0.0, single_qubit_depolarizing_p: 0.0, readout_flip_p: p }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("two_qubit_depolarizing_p", self.two_qubit_depolarizing_p),
            ("single_qubit_depolarizing_p", self.single_qubit_depolarizing_p),
            ("readout_flip_p", self.readout_flip_p),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(validation(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }

    fn gate_error(&self, gate: &Gate) -> f64 {
        match (self.enabled, gate.is_two_qubit()) {
            (false, _) => 0.0,
            (true, true) => self.two_qubit_depolarizing_p,
            (true, false) => self.single_qubit_depolarizing_p,
        }
    }

    fn readout(&self) -> f64 {
        if self.enabled {
            self.readout_flip_p
        } else {
            0.0
        }
    }

    fn has_gate_noise(&self) -> bool {
        self.enabled && (self.two_qubit_depolarizing_p > 0.0 || self.single_qubit_depolarizing_p > 0.0)
    }
}

/// Outcome histogram keyed by bit strings (right-most character is qubit 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotCounts {
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
    pub seed: u64,
}

impl ShotCounts {
    fn from_histogram(hist: &[u64], n_qubits: usize, seed: u64) -> Self {
        let counts: BTreeMap<String, u64> = hist
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (format_basis_label(i, n_qubits), c))
            .collect();
        ShotCounts { shots: hist.iter().sum(), counts, seed }
    }

    /// Combine two histograms taken on the same circuit.
    pub fn merge(&mut self, other: &ShotCounts) {
        for (k, v) in &other.counts {
            *self.counts.entry(k.clone()).or_default() += v;
        }
        self.shots += other.shots;
    }
}

fn check_sequence(seq: &NativeGateSequence, n_qubits: usize) -> Result<()> {
    if seq.n_qubits != n_qubits {
        return Err(Error::Dimension { expected: n_qubits, found: seq.n_qubits });
    }
    seq.validate()
}

fn initial_vector(n_qubits: usize, initial: &str) -> Result<Vec<Complex64>> {
    let index = parse_basis_label(initial, n_qubits)?;
    let mut psi = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
    psi[index] = Complex64::new(1.0, 0.0);
    Ok(psi)
}

pub fn run_statevector(seq: &NativeGateSequence, n_qubits: usize, initial: &str) -> Result<Vec<Complex64>> {
    check_sequence(seq, n_qubits)?;
    let mut psi = initial_vector(n_qubits, initial)?;
    seq.apply(&mut psi);
    Ok(psi)
}

fn apply_random_pauli(state: &mut [Complex64], qubits: &[usize], rng: &mut ChaCha8Rng) {
    // Uniform over the 4^k - 1 non-identity Pauli strings on the gate's qubits.
    let choices = (1u32 << (2 * qubits.len())) - 1;
    let mut code = rng.random_range(1..=choices);
    for &q in qubits {
        match code & 3 {
            1 => apply_x(state, q),
            2 => apply_y(state, q),
            3 => apply_z(state, q),
            _ => {}
        }
        code >>= 2;
    }
}

fn sample_index(state: &[Complex64], rng: &mut ChaCha8Rng) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (i, a) in state.iter().enumerate() {
        acc += a.norm_sqr();
        if r < acc {
            return i;
        }
    }
    // Rounding left r above the cumulative sum: take the last populated outcome.
    state.iter().rposition(|a| a.norm_sqr() > 0.0).unwrap_or(0)
}

fn flip_bits(mut outcome: usize, n_qubits: usize, p: f64, rng: &mut ChaCha8Rng) -> usize {
    if p > 0.0 {
        for q in 0..n_qubits {
            if rng.random::<f64>() < p {
                outcome ^= 1 << q;
            }
        }
    }
    outcome
}

const SHOT_CHUNK: usize = 256;

/// Monte-Carlo trajectories: after each gate a uniformly random non-identity
/// Pauli hits the gate's qubits with the gate's error probability; the final
/// state is measured in Z and each bit is flipped with the readout probability.
pub fn run_noisy_trajectories(
    seq: &NativeGateSequence,
    n_qubits: usize,
    initial: &str,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
    execution: Execution,
) -> Result<ShotCounts> {
    check_sequence(seq, n_qubits)?;
    noise.validate()?;
    if shots == 0 {
        return Err(validation("shots must be at least 1"));
    }
    let psi0 = initial_vector(n_qubits, initial)?;
    let dim = psi0.len();
    let gate_noise = noise.has_gate_noise();
    let ideal = if gate_noise {
        None
    } else {
        let mut psi = psi0.clone();
        seq.apply(&mut psi);
        Some(psi)
    };
    let readout = noise.readout();
    let n_chunks = (shots as usize).div_ceil(SHOT_CHUNK);
    let partial = map_indexed(execution, n_chunks, |c| {
        let mut hist = vec![0u64; dim];
        let mut psi = vec![Complex64::new(0.0, 0.0); dim];
        let lo = c * SHOT_CHUNK;
        let hi = ((c + 1) * SHOT_CHUNK).min(shots as usize);
        for shot in lo..hi {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shot as u64);
            let state: &[Complex64] = match &ideal {
                Some(s) => s,
                None => {
                    psi.copy_from_slice(&psi0);
                    for gate in &seq.gates {
                        apply_gate(&mut psi, gate);
                        let p = noise.gate_error(gate);
                        if p > 0.0 && rng.random::<f64>() < p {
                            apply_random_pauli(&mut psi, &gate.qubits(), &mut rng);
                        }
                    }
                    &psi
                }
            };
            let outcome = flip_bits(sample_index(state, &mut rng), n_qubits, readout, &mut rng);
            hist[outcome] += 1;
        }
        hist
    });
    let mut hist = vec![0u64; dim];
    for h in partial {
        for (a, b) in hist.iter_mut().zip(h) {
            *a += b;
        }
    }
    Ok(ShotCounts::from_histogram(&hist, n_qubits, seed))
}

/// `<Z_i> = p_i(0) - p_i(1)` from relative frequencies, qubit 1 first.
pub fn magnetization_from_counts(counts: &ShotCounts) -> Result<Vec<f64>> {
    let total: u64 = counts.counts.values().sum();
    if total == 0 || counts.shots == 0 {
        return Err(validation("no shots recorded"));
    }
    let n = counts.counts.keys().next().map(|k| k.len()).ok_or_else(|| validation("no outcomes recorded"))?;
    let mut m = vec![0.0; n];
    for (key, &c) in &counts.counts {
        let index = parse_basis_label(key, n)?;
        for (q, mq) in m.iter_mut().enumerate() {
            let sign = if (index >> q) & 1 == 0 { 1.0 } else { -1.0 };
            *mq += sign * c as f64;
        }
    }
    Ok(m.into_iter().map(|x| x / total as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// Exact expectation values of the circuit output state.
    Ideal,
    /// Noise-free shot sampling.
    Sampled,
    /// Noise trajectories plus sampling.
    Noisy,
}

/// Which kind of circuits a trace was produced from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitOrigin {
    Compiled,
    Trotter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub mode: SimMode,
    pub noise: NoiseModel,
    pub shots: u64,
    pub seed: u64,
    pub execution: Execution,
}

/// Seed for step `k` of a trace.
pub fn step_seed(seed: u64, step: usize) -> u64 {
    seed ^ (step as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Run one circuit per time step (`circuits[k-1]` realizes `t = k dt`) and
/// collect the magnetization trace. The `t = 0` row comes from the initial
/// state without executing a circuit.
pub fn simulate_trace(
    circuits: &[NativeGateSequence],
    dt: f64,
    initial: &str,
    origin: CircuitOrigin,
    opts: &SimOptions,
) -> Result<DynamicsTrace> {
    let n = circuits.first().map(|c| c.n_qubits).ok_or_else(|| validation("no circuits"))?;
    if circuits.iter().any(|c| c.n_qubits != n) {
        return Err(validation("circuits act on different register sizes"));
    }
    let noise = match opts.mode {
        SimMode::Noisy => opts.noise,
        _ => NoiseModel::disabled(),
    };
    let empty = NativeGateSequence::new(n);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(circuits.len() + 1);
    for (k, circuit) in std::iter::once(&empty).chain(circuits).enumerate() {
        let m = match opts.mode {
            SimMode::Ideal => magnetization(&run_statevector(circuit, n, initial)?, n),
            SimMode::Sampled | SimMode::Noisy => {
                let counts = run_noisy_trajectories(
                    circuit,
                    n,
                    initial,
                    &noise,
                    opts.shots,
                    step_seed(opts.seed, k),
                    opts.execution,
                )?;
                magnetization_from_counts(&counts)?
            }
        };
        columns.push(m);
    }
    let magnetization = (0..n).map(|q| columns.iter().map(|c| c[q]).collect()).collect();
    let source = match (origin, opts.mode) {
        (CircuitOrigin::Compiled, SimMode::Noisy) => TraceSource::CompiledNoisy,
        (CircuitOrigin::Compiled, _) => TraceSource::CompiledIdeal,
        (CircuitOrigin::Trotter, SimMode::Noisy) => TraceSource::TrotterNoisy,
        (CircuitOrigin::Trotter, _) => TraceSource::TrotterIdeal,
    };
    let sampled = opts.mode != SimMode::Ideal;
    Ok(DynamicsTrace {
        times: (0..=circuits.len()).map(|k| k as f64 * dt).collect(),
        magnetization,
        source,
        sampled,
        shots: sampled.then_some(opts.shots),
        seed: sampled.then_some(opts.seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::hadamard_layer;

    fn counts(pairs: &[(&str, u64)]) -> ShotCounts {
        ShotCounts {
            counts: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            shots: pairs.iter().map(|(_, v)| v).sum(),
            seed: 0,
        }
    }

    #[test]
    fn magnetization_arithmetic() {
        assert_eq!(magnetization_from_counts(&counts(&[("00000", 10)])).unwrap(), vec![1.0; 5]);
        assert_eq!(magnetization_from_counts(&counts(&[("11111", 10)])).unwrap(), vec![-1.0; 5]);
        let m = magnetization_from_counts(&counts(&[("00001", 50), ("00000", 50)])).unwrap();
        assert_eq!(m, vec![0.0, 1.0, 1.0, 1.0, 1.0]);
        assert!(magnetization_from_counts(&counts(&[])).is_err());
    }

    #[test]
    fn empty_circuit_keeps_state() {
        let seq = NativeGateSequence::new(5);
        let psi = run_statevector(&seq, 5, "00000").unwrap();
        assert_eq!(psi[0], Complex64::new(1.0, 0.0));
        assert!(run_statevector(&seq, 4, "0000").is_err());
    }

    #[test]
    fn cnot_on_control_set() {
        let seq = NativeGateSequence { n_qubits: 2, gates: vec![Gate::Cnot { control: 0, target: 1 }] };
        let psi = run_statevector(&seq, 2, "01").unwrap();
        assert_eq!(psi[3], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn noiseless_identity_counts() {
        let seq = NativeGateSequence::new(5);
        let exact =
            run_noisy_trajectories(&seq, 5, "00000", &NoiseModel::readout_only(0.0), 100, 1, Execution::Sequential)
                .unwrap();
        assert_eq!(exact.counts.len(), 1);
        assert_eq!(exact.counts["00000"], 100);
        let flipped =
            run_noisy_trajectories(&seq, 5, "00000", &NoiseModel::readout_only(0.1), 100, 1, Execution::Sequential)
                .unwrap();
        assert_eq!(flipped.counts.values().sum::<u64>(), 100);
        assert!(flipped.counts["00000"] < 100);
        assert!(run_noisy_trajectories(&seq, 5, "00000", &NoiseModel::disabled(), 0, 1, Execution::Sequential).is_err());
    }

    #[test]
    fn deterministic_and_schedule_independent() {
        let mut seq = hadamard_layer(3);
        seq.push(Gate::Cnot { control: 0, target: 1 });
        seq.push(Gate::Rx { qubit: 2, angle: 0.4 });
        let noise =
            NoiseModel { two_qubit_depolarizing_p: 0.3, single_qubit_depolarizing_p: 0.2, ..NoiseModel::default() };
        let a = run_noisy_trajectories(&seq, 3, "000", &noise, 1000, 42, Execution::Sequential).unwrap();
        let b = run_noisy_trajectories(&seq, 3, "000", &noise, 1000, 42, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let c = run_noisy_trajectories(&seq, 3, "000", &noise, 1000, 43, Execution::Sequential).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn full_depolarization_erases_magnetization() {
        let mut seq = NativeGateSequence::new(3);
        for _ in 0..20 {
            seq.push(Gate::Cnot { control: 0, target: 1 });
            seq.push(Gate::Cnot { control: 1, target: 2 });
            seq.push(Gate::Rz { qubit: 0, angle: 0.3 });
        }
        let noise = NoiseModel {
            enabled: true,
            two_qubit_depolarizing_p: 1.0,
            single_qubit_depolarizing_p: 1.0,
            readout_flip_p: 0.0,
        };
        let c = run_noisy_trajectories(&seq, 3, "000", &noise, 8192, 3, Execution::Sequential).unwrap();
        for m in magnetization_from_counts(&c).unwrap() {
            assert!(m.abs() < 0.05, "{m}");
        }
    }

    #[test]
    fn readout_flip_rate_matches() {
        let seq = NativeGateSequence::new(2);
        let c = run_noisy_trajectories(&seq, 2, "00", &NoiseModel::readout_only(0.25), 20000, 9, Execution::Sequential)
            .unwrap();
        let m = magnetization_from_counts(&c).unwrap();
        for x in m {
            // E[m] = 1 - 2p = 0.5, σ ≈ 0.006
            assert!((x - 0.5).abs() < 0.03, "{x}");
        }
    }
}
