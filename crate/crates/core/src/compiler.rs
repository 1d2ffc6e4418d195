// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Constant-depth matchgate circuits fitted to cumulative-time propagators.
//!
//! The model couples `Z_i Z_{i+1}` under an `X` field, while the gate family
//! is generated by `XX`, `YY` and `Z`. Targets are therefore compiled in the
//! Hadamard frame `U' = W U W` with `W = H^{⊗N}`, and executable circuits
//! carry a Hadamard layer on both ends.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{self, NativeGateSequence};
use crate::error::{validation, Error, Result};
use crate::exact::{target_unitaries, Propagator};
use crate::linalg::{self, CMatrix};
use crate::matchgate::{
    decompose_native_on, gate_and_derivatives, matchgate_from_params, BlockPair, GateFamily, MatchgateParams,
};
use crate::model::CouplingProfile;
use crate::optimize::{bfgs, nelder_mead, Objective, StopRule};
use crate::parallel::{map_indexed, Execution};

/// One matchgate position: bond `(qubit, qubit + 1)` in `column`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub column: usize,
    pub qubit: usize,
}

/// Slots in application order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitLayout {
    pub n_qubits: usize,
    pub columns: usize,
    pub slots: Vec<Slot>,
}

impl CircuitLayout {
    pub fn from_slots(n_qubits: usize, slots: Vec<Slot>) -> Result<Self> {
        if n_qubits < 2 {
            return Err(validation("a layout needs at least 2 qubits"));
        }
        if let Some(bad) = slots.iter().find(|s| s.qubit + 1 >= n_qubits) {
            return Err(validation(format!("slot on bond {} outside the register", bad.qubit)));
        }
        let columns = slots.iter().map(|s| s.column + 1).max().unwrap_or(0);
        Ok(CircuitLayout { n_qubits, columns, slots })
    }

    pub fn n_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }
}

/// Brickwork: column `c` covers bonds `c mod 2, c mod 2 + 2, ...`.
pub fn build_layout(n_qubits: usize, columns: usize) -> Result<CircuitLayout> {
    if n_qubits < 2 {
        return Err(validation("a layout needs at least 2 qubits"));
    }
    if columns < 1 {
        return Err(validation("a layout needs at least one column"));
    }
    let slots = (0..columns)
        .flat_map(|column| (column % 2..n_qubits - 1).step_by(2).map(move |qubit| Slot { column, qubit }))
        .collect();
    Ok(CircuitLayout { n_qubits, columns, slots })
}

/// Default column count, `N + 1`.
pub fn default_columns(n_qubits: usize) -> usize {
    n_qubits + 1
}

fn check_params(layout: &CircuitLayout, params: &[MatchgateParams]) -> Result<()> {
    if params.len() != layout.n_slots() {
        return Err(validation(format!(
            "layout has {} slots but {} parameter sets were given",
            layout.n_slots(),
            params.len()
        )));
    }
    Ok(())
}

/// Product of the embedded matchgates, first slot applied first.
pub fn circuit_matrix(layout: &CircuitLayout, params: &[MatchgateParams]) -> Result<CMatrix> {
    check_params(layout, params)?;
    let dim = layout.dim();
    let mut m = linalg::identity(dim);
    for (slot, p) in layout.slots.iter().zip(params) {
        matchgate_from_params(p).blocks().apply_left(m.as_mut_slice(), dim, slot.qubit);
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    /// `1 - |Tr(U† U_T)| / d`
    #[default]
    PhaseInvariant,
    /// `1 - Re Tr(U† U_T) / d`
    Literal,
}

fn check_dims(u: &CMatrix, target: &CMatrix) -> Result<()> {
    if u.shape() != target.shape() || !u.is_square() {
        return Err(Error::Dimension { expected: target.nrows(), found: u.nrows() });
    }
    Ok(())
}

pub fn distance(u: &CMatrix, target: &CMatrix) -> Result<f64> {
    distance_with(u, target, DistanceKind::PhaseInvariant)
}

pub fn distance_with(u: &CMatrix, target: &CMatrix, kind: DistanceKind) -> Result<f64> {
    check_dims(u, target)?;
    let f = linalg::trace_inner(u, target);
    let d = u.nrows() as f64;
    Ok(match kind {
        DistanceKind::PhaseInvariant => (1.0 - f.norm() / d).max(0.0),
        DistanceKind::Literal => 1.0 - f.re / d,
    })
}

/// Frame in which targets are compiled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Computational,
    #[default]
    Hadamard,
}

/// `W U W` for `W = H^{⊗N}`; identity map in the computational frame.
pub fn to_frame(u: &CMatrix, frame: Frame) -> CMatrix {
    match frame {
        Frame::Computational => u.clone(),
        Frame::Hadamard => {
            let dim = u.nrows();
            let n = dim.trailing_zeros() as usize;
            let hadamards = |m: &mut CMatrix| {
                for col in m.as_mut_slice().chunks_mut(dim) {
                    for q in 0..n {
                        circuit::apply_h(col, q);
                    }
                }
            };
            let mut m = u.clone();
            hadamards(&mut m);
            let mut t = m.transpose();
            hadamards(&mut t);
            t.transpose()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GradientMode {
    /// Exact adjoint-sweep derivatives.
    #[default]
    Analytic,
    CentralDifference {
        step: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Quasi-Newton, with a Nelder–Mead polish when no restart reaches tolerance.
    #[default]
    Bfgs,
    NelderMead,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub tolerance: f64,
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub family: GateFamily,
    /// Retry with the six-parameter family when the four-parameter one misses tolerance.
    pub family_fallback: bool,
    pub distance: DistanceKind,
    pub gradient: GradientMode,
    pub method: Method,
    pub frame: Frame,
    /// `None` means `N + 1`.
    pub columns: Option<usize>,
    pub execution: Execution,
    /// In sequential execution, start step `k` from step `k - 1`'s solution.
    pub warm_start: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            tolerance: 1e-6,
            restarts: 4,
            max_iter: 2000,
            seed: 0,
            family: GateFamily::FourParam,
            family_fallback: true,
            distance: DistanceKind::PhaseInvariant,
            gradient: GradientMode::Analytic,
            method: Method::Bfgs,
            frame: Frame::Hadamard,
            columns: None,
            execution: Execution::default(),
            warm_start: true,
        }
    }
}

/// Distance between a layout's circuit and a fixed target, as a function of
/// the flattened angle vector (slot-major).
pub struct CircuitObjective<'a> {
    layout: &'a CircuitLayout,
    target: &'a CMatrix,
    family: GateFamily,
    kind: DistanceKind,
    gradient: GradientMode,
}

impl<'a> CircuitObjective<'a> {
    pub fn new(
        layout: &'a CircuitLayout,
        target: &'a CMatrix,
        family: GateFamily,
        kind: DistanceKind,
        gradient: GradientMode,
    ) -> Self {
        CircuitObjective { layout, target, family, kind, gradient }
    }

    fn params(&self, x: &[f64]) -> Vec<MatchgateParams> {
        let k = self.family.n_params();
        x.chunks_exact(k)
            .map(|c| {
                let mut theta = [0.0; 6];
                theta[..k].copy_from_slice(c);
                MatchgateParams { family: self.family, theta }
            })
            .collect()
    }

    fn dim_f(&self) -> f64 {
        self.layout.dim() as f64
    }

    fn distance_from_overlap(&self, f: Complex64) -> f64 {
        let d = self.dim_f();
        match self.kind {
            DistanceKind::PhaseInvariant => 1.0 - f.norm() / d,
            DistanceKind::Literal => 1.0 - f.re / d,
        }
    }

    /// `Tr(U† T)`.
    pub fn overlap(&self, x: &[f64]) -> Complex64 {
        let dim = self.layout.dim();
        let mut q = self.target.clone();
        let data = q.as_mut_slice();
        for (slot, p) in self.layout.slots.iter().zip(self.params(x)).rev() {
            matchgate_from_params(&p).blocks().adjoint().apply_left(data, dim, slot.qubit);
        }
        (0..dim).map(|i| data[i * dim + i]).sum()
    }

    fn analytic(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let dim = self.layout.dim();
        let slots = &self.layout.slots;
        let m = slots.len();
        let k = self.family.n_params();
        if m == 0 {
            return self.distance_from_overlap((0..dim).map(|i| self.target[(i, i)]).sum());
        }
        let gates: Vec<(BlockPair, Vec<BlockPair>)> = self.params(x).iter().map(gate_and_derivatives).collect();

        // Q_1 = G_2† ⋯ G_M† T; Q_{j+1} = G_{j+1} Q_j G_j†.
        let mut q = self.target.clone();
        for j in (1..m).rev() {
            gates[j].0.adjoint().apply_left(q.as_mut_slice(), dim, slots[j].qubit);
        }
        let mut overlap = Complex64::new(0.0, 0.0);
        let mut dfs = vec![Complex64::new(0.0, 0.0); m * k];
        for j in 0..m {
            let r = reduced_blocks(q.as_slice(), dim, slots[j].qubit);
            if j == 0 {
                overlap = frobenius(&gates[0].0, &r);
            }
            for (i, der) in gates[j].1.iter().enumerate() {
                dfs[j * k + i] = frobenius(der, &r);
            }
            if j + 1 < m {
                gates[j + 1].0.apply_left(q.as_mut_slice(), dim, slots[j + 1].qubit);
                gates[j].0.adjoint().apply_right(q.as_mut_slice(), dim, slots[j].qubit);
            }
        }
        let d = self.dim_f();
        let norm = overlap.norm();
        for (g, df) in grad.iter_mut().zip(&dfs) {
            *g = match self.kind {
                DistanceKind::PhaseInvariant if norm > 0.0 => -(overlap.conj() * df).re / (norm * d),
                DistanceKind::PhaseInvariant => 0.0,
                DistanceKind::Literal => -df.re / d,
            };
        }
        self.distance_from_overlap(overlap)
    }
}

/// `Σ_rest Q[(a, rest), (b, rest)]` restricted to the even and odd sectors.
fn reduced_blocks(q: &[Complex64], dim: usize, qubit: usize) -> BlockPair {
    let (b0, b1) = (1usize << qubit, 2usize << qubit);
    let even = [0, b0 | b1];
    let odd = [b0, b1];
    let mut out = BlockPair { a: crate::matchgate::Block::zeros(), b: crate::matchgate::Block::zeros() };
    let low = 1usize << qubit;
    let stride = 4usize << qubit;
    let mut hi = 0;
    while hi < dim {
        for lo in 0..low {
            let x = hi | lo;
            for r in 0..2 {
                for c in 0..2 {
                    out.a[(r, c)] += q[(x | even[c]) * dim + (x | even[r])];
                    out.b[(r, c)] += q[(x | odd[c]) * dim + (x | odd[r])];
                }
            }
        }
        hi += stride;
    }
    out
}

/// `Tr(G† R) = Σ conj(G_ij) R_ij` over both blocks.
fn frobenius(g: &BlockPair, r: &BlockPair) -> Complex64 {
    g.a.iter().zip(r.a.iter()).chain(g.b.iter().zip(r.b.iter())).map(|(x, y)| x.conj() * y).sum()
}

impl Objective for CircuitObjective<'_> {
    fn dim(&self) -> usize {
        self.layout.n_slots() * self.family.n_params()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.distance_from_overlap(self.overlap(x))
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        match self.gradient {
            GradientMode::Analytic => self.analytic(x, grad),
            GradientMode::CentralDifference { step } => {
                let mut xp = x.to_vec();
                for i in 0..x.len() {
                    xp[i] = x[i] + step;
                    let fp = self.value(&xp);
                    xp[i] = x[i] - step;
                    let fm = self.value(&xp);
                    xp[i] = x[i];
                    grad[i] = (fp - fm) / (2.0 * step);
                }
                self.value(x)
            }
        }
    }
}

/// Result of fitting a layout to a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFit {
    pub params: Vec<MatchgateParams>,
    pub residual: f64,
    pub iterations: usize,
    pub restarts_used: usize,
}

fn flatten(params: &[MatchgateParams], family: GateFamily) -> Vec<f64> {
    params.iter().flat_map(|p| p.theta[..family.n_params()].to_vec()).collect()
}

/// Multi-start minimization of the circuit distance to `target` (already in
/// the compile frame). Restart 0 starts from `warm_start` or zeros; restart
/// `r ≥ 1` draws angles uniformly from `(-π, π]` on stream `r` of `seed`.
pub fn optimize_matrix(
    layout: &CircuitLayout,
    target: &CMatrix,
    warm_start: Option<&[MatchgateParams]>,
    cfg: &OptimizerConfig,
    seed: u64,
) -> MatrixFit {
    let family = cfg.family;
    let objective = CircuitObjective::new(layout, target, family, cfg.distance, cfg.gradient);
    let n = objective.dim();
    let rule = StopRule { target: cfg.tolerance, max_iter: cfg.max_iter, ..StopRule::default() };
    let start0 = match warm_start {
        Some(w) if w.len() == layout.n_slots() => {
            let widened: Vec<MatchgateParams> = w.iter().map(|p| MatchgateParams { family, theta: p.theta }).collect();
            flatten(&widened, family)
        }
        _ => vec![0.0; n],
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut iterations = 0;
    let mut restarts_used = 0;
    for r in 0..cfg.restarts.max(1) {
        let x0 = if r == 0 {
            start0.clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            (0..n).map(|_| std::f64::consts::PI - rng.random_range(0.0..2.0 * std::f64::consts::PI)).collect()
        };
        let found = match cfg.method {
            Method::Bfgs => bfgs(&objective, &x0, &rule),
            Method::NelderMead => nelder_mead(&objective, &x0, 0.1, &rule),
        };
        iterations += found.iterations;
        restarts_used = r + 1;
        let value = objective.value(&found.x);
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((found.x, value));
        }
        if best.as_ref().is_some_and(|(_, b)| *b <= cfg.tolerance) {
            break;
        }
    }
    let (mut x, mut residual) = best.expect("at least one restart runs");
    if residual > cfg.tolerance && cfg.method == Method::Bfgs {
        let polish = nelder_mead(&objective, &x, 1e-3, &rule);
        iterations += polish.iterations;
        if polish.value < residual {
            x = polish.x;
            residual = polish.value;
        }
    }
    let params = objective.params(&x).into_iter().map(|p| p.canonicalize()).collect();
    MatrixFit { params, residual: residual.max(0.0), iterations, restarts_used }
}

/// One compiled cumulative-time circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledTimestep {
    pub step_index: usize,
    pub elapsed_time: f64,
    pub params: Vec<MatchgateParams>,
    pub residual: f64,
    pub iterations: usize,
    pub family: GateFamily,
    pub frame: Frame,
    pub accepted: bool,
    pub wall_ms: f64,
}

/// Fit one target. Falls back to the six-parameter family when enabled and
/// the configured family misses tolerance; the result records which was used.
pub fn optimize_timestep(
    layout: &CircuitLayout,
    target: &Propagator,
    step_index: usize,
    warm_start: Option<&[MatchgateParams]>,
    cfg: &OptimizerConfig,
) -> Result<CompiledTimestep> {
    if target.dim() != layout.dim() {
        return Err(Error::Dimension { expected: layout.dim(), found: target.dim() });
    }
    let start = Instant::now();
    let framed = to_frame(&target.matrix, cfg.frame);
    let seed = cfg.seed ^ step_index as u64;
    let mut fit = optimize_matrix(layout, &framed, warm_start, cfg, seed);
    let mut family = cfg.family;
    if fit.residual > cfg.tolerance && cfg.family_fallback && cfg.family == GateFamily::FourParam {
        let six = OptimizerConfig { family: GateFamily::SixParam, ..cfg.clone() };
        let widened: Vec<MatchgateParams> = fit.params.iter().map(|p| p.to_six()).collect();
        let retry = optimize_matrix(layout, &framed, Some(&widened), &six, seed);
        if retry.residual < fit.residual {
            fit = MatrixFit { iterations: fit.iterations + retry.iterations, ..retry };
            family = GateFamily::SixParam;
        }
    }
    Ok(CompiledTimestep {
        step_index,
        elapsed_time: target.time,
        accepted: fit.residual <= cfg.tolerance,
        params: fit.params,
        residual: fit.residual,
        iterations: fit.iterations,
        family,
        frame: cfg.frame,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// A trajectory of compiled circuits sharing one layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledTrajectory {
    pub layout: CircuitLayout,
    pub dt: f64,
    pub steps: Vec<CompiledTimestep>,
}

impl CompiledTrajectory {
    pub fn all_accepted(&self) -> bool {
        self.steps.iter().all(|s| s.accepted)
    }

    pub fn max_residual(&self) -> f64 {
        self.steps.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    /// Executable circuits, one per step.
    pub fn circuits(&self) -> Vec<NativeGateSequence> {
        self.steps.iter().map(|s| executable_circuit(s, &self.layout)).collect()
    }
}

/// Compile `U_T(k)` for `k = 1..=n_steps`. Sequential execution warm-starts
/// each step from the previous one (unless disabled); parallel execution
/// compiles every step from scratch. Per-step seeds are `seed ⊕ k`.
pub fn compile_trajectory(
    profile: &CouplingProfile,
    dt: f64,
    n_steps: usize,
    cfg: &OptimizerConfig,
) -> Result<CompiledTrajectory> {
    let columns = cfg.columns.unwrap_or_else(|| default_columns(profile.n_sites));
    let layout = build_layout(profile.n_sites, columns)?;
    let targets = target_unitaries(profile, dt, n_steps)?;
    let steps = if cfg.execution.is_parallel() || !cfg.warm_start {
        map_indexed(cfg.execution, targets.len(), |i| optimize_timestep(&layout, &targets[i], i + 1, None, cfg))
            .into_iter()
            .collect::<Result<Vec<_>>>()?
    } else {
        let mut steps: Vec<CompiledTimestep> = Vec::with_capacity(n_steps);
        for (i, target) in targets.iter().enumerate() {
            let warm = steps.last().map(|s| s.params.as_slice());
            steps.push(optimize_timestep(&layout, target, i + 1, warm, cfg)?);
        }
        steps
    };
    Ok(CompiledTrajectory { layout, dt, steps })
}

/// Concatenated two-CNOT decompositions, in the compile frame.
pub fn emit_circuit(step: &CompiledTimestep, layout: &CircuitLayout) -> NativeGateSequence {
    let mut seq = NativeGateSequence::new(layout.n_qubits);
    for (slot, p) in layout.slots.iter().zip(&step.params) {
        seq.extend_from(&decompose_native_on(p, layout.n_qubits, slot.qubit));
    }
    seq
}

/// [`emit_circuit`] wrapped in the frame change, ready to run on `|0…0⟩`.
pub fn executable_circuit(step: &CompiledTimestep, layout: &CircuitLayout) -> NativeGateSequence {
    let body = emit_circuit(step, layout);
    match step.frame {
        Frame::Computational => body,
        Frame::Hadamard => {
            let mut seq = circuit::hadamard_layer(layout.n_qubits);
            seq.extend_from(&body);
            seq.extend_from(&circuit::hadamard_layer(layout.n_qubits));
            seq
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frame::Computational => "computational",
            Frame::Hadamard => "hadamard",
        })
    }
}

/// `step,elapsed_time,residual,iterations,family,wall_ms`
pub fn write_report_csv<W: Write>(steps: &[CompiledTimestep], mut w: W) -> Result<()> {
    writeln!(w, "step,elapsed_time,residual,iterations,family,wall_ms")?;
    for s in steps {
        writeln!(
            w,
            "{},{},{:e},{},{},{:.3}",
            s.step_index, s.elapsed_time, s.residual, s.iterations, s.family, s.wall_ms
        )?;
    }
    Ok(())
}

/// File name for step `k`'s circuit.
pub fn qasm_file_name(step_index: usize) -> String {
    format!("step_{step_index:03}.qasm")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::propagator;
    use crate::linalg::pauli;
    use crate::model::{build_hamiltonian, ModelPreset};
    use std::f64::consts::PI;

    fn random_params(n: usize, family: GateFamily, seed: u64) -> Vec<MatchgateParams> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let mut theta = [0.0; 6];
                for t in theta.iter_mut().take(family.n_params()) {
                    *t = rng.random_range(-PI..PI);
                }
                MatchgateParams { family, theta }
            })
            .collect()
    }

    #[test]
    fn layout_counts() {
        assert_eq!(build_layout(2, 1).unwrap().n_slots(), 1);
        assert_eq!(build_layout(5, 5).unwrap().n_slots(), 10);
        let six = build_layout(5, 6).unwrap();
        assert_eq!(six.n_slots(), 12);
        let first: Vec<usize> = six.slots.iter().filter(|s| s.column == 0).map(|s| s.qubit).collect();
        let second: Vec<usize> = six.slots.iter().filter(|s| s.column == 1).map(|s| s.qubit).collect();
        assert_eq!(first, vec![0, 2]);
        assert_eq!(second, vec![1, 3]);
        assert!(six.slots.iter().all(|s| s.qubit + 1 < 5));
        assert!(build_layout(5, 0).is_err());
        assert!(build_layout(1, 3).is_err());
    }

    #[test]
    fn circuit_matrix_matches_kronecker_oracle() {
        let layout = build_layout(3, 4).unwrap();
        let params = random_params(layout.n_slots(), GateFamily::SixParam, 4);
        let fast = circuit_matrix(&layout, &params).unwrap();
        let mut slow = linalg::identity(8);
        for (slot, p) in layout.slots.iter().zip(&params) {
            let g = matchgate_from_params(p).embedded();
            let local = CMatrix::from_iterator(4, 4, g.iter().cloned());
            let full = if slot.qubit == 0 {
                linalg::kron(&linalg::identity(2), &local)
            } else {
                linalg::kron(&local, &linalg::identity(2))
            };
            slow = full * slow;
        }
        assert!(linalg::max_abs_diff(&fast, &slow) < 1e-12);
        assert!(linalg::unitarity_error(&fast) < 1e-10);
        let zero = vec![MatchgateParams::default(); layout.n_slots()];
        assert!(linalg::max_abs_diff(&circuit_matrix(&layout, &zero).unwrap(), &linalg::identity(8)) < 1e-15);
        assert!(circuit_matrix(&layout, &zero[1..]).is_err());
    }

    #[test]
    fn distance_examples() {
        let xx = pauli::embed(2, &[(0, pauli::x()), (1, pauli::x())]);
        let id = linalg::identity(4);
        assert!((distance(&id, &xx).unwrap() - 1.0).abs() < 1e-15);
        let h = build_hamiltonian(&ModelPreset::Mirror5.profile(), true).unwrap();
        let u = propagator(&h, 0.3).unwrap().matrix;
        assert!(distance(&u, &u).unwrap() < 1e-14);
        let phased = &u * Complex64::from_polar(1.0, 1.1);
        assert!(distance(&u, &phased).unwrap() < 1e-14);
        assert!(distance_with(&u, &phased, DistanceKind::Literal).unwrap() > 0.1);
        let v = propagator(&h, 0.7).unwrap().matrix;
        let (a, b) = (distance(&u, &v).unwrap(), distance(&v, &u).unwrap());
        assert!((a - b).abs() < 1e-14);
        let w = propagator(&h, 1.9).unwrap().matrix;
        assert!((distance(&(&w * &u), &(&w * &v)).unwrap() - a).abs() < 1e-12);
        assert!(distance(&id, &u).is_err());
    }

    #[test]
    fn frame_matches_explicit_hadamards() {
        let h = build_hamiltonian(&ModelPreset::Staggered5.profile(), true).unwrap();
        let u = propagator(&h, 0.4).unwrap().matrix;
        let w = circuit::hadamard_layer(5).to_matrix().unwrap();
        assert!(linalg::max_abs_diff(&to_frame(&u, Frame::Hadamard), &(&w * &u * &w)) < 1e-12);
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let layout = build_layout(4, 5).unwrap();
        let h = build_hamiltonian(&CouplingProfile::new(vec![1.0, 2.0, 0.5], 1.0).unwrap(), true).unwrap();
        let target = to_frame(&propagator(&h, 0.8).unwrap().matrix, Frame::Hadamard);
        for family in [GateFamily::FourParam, GateFamily::SixParam] {
            for kind in [DistanceKind::PhaseInvariant, DistanceKind::Literal] {
                let x = flatten(&random_params(layout.n_slots(), family, 21), family);
                let exact = CircuitObjective::new(&layout, &target, family, kind, GradientMode::Analytic);
                let numeric = CircuitObjective::new(
                    &layout,
                    &target,
                    family,
                    kind,
                    GradientMode::CentralDifference { step: 1e-6 },
                );
                let mut ga = vec![0.0; x.len()];
                let mut gn = vec![0.0; x.len()];
                let fa = exact.value_and_gradient(&x, &mut ga);
                let fnum = numeric.value_and_gradient(&x, &mut gn);
                assert!((fa - fnum).abs() < 1e-13);
                let u = circuit_matrix(&layout, &exact.params(&x)).unwrap();
                assert!((fa - distance_with(&u, &target, kind).unwrap()).abs() < 1e-12);
                for (a, b) in ga.iter().zip(&gn) {
                    assert!((a - b).abs() < 1e-8, "{family:?} {kind:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn identity_target_is_accepted_at_once() {
        let layout = build_layout(5, 6).unwrap();
        let target = Propagator { matrix: linalg::identity(32), time: 0.0, hamiltonian_id: "id".into() };
        let step = optimize_timestep(&layout, &target, 0, None, &OptimizerConfig::default()).unwrap();
        assert!(step.accepted);
        assert_eq!(step.residual, 0.0);
        assert_eq!(step.iterations, 0);
        assert!(step.params.iter().all(|p| p.theta == [0.0; 6]));
    }

    #[test]
    fn planted_target_is_recovered() {
        let layout = build_layout(4, 5).unwrap();
        let planted = random_params(layout.n_slots(), GateFamily::FourParam, 8);
        let target = circuit_matrix(&layout, &planted).unwrap();
        let cfg = OptimizerConfig { tolerance: 1e-10, restarts: 8, ..OptimizerConfig::default() };
        let fit = optimize_matrix(&layout, &target, None, &cfg, 3);
        assert!(fit.residual <= 1e-8, "residual {}", fit.residual);
    }

    #[test]
    fn mirror_first_step_compiles_and_emits() {
        let profile = ModelPreset::Mirror5.profile();
        let cfg = OptimizerConfig { execution: Execution::Sequential, ..OptimizerConfig::default() };
        let traj = compile_trajectory(&profile, 0.1, 1, &cfg).unwrap();
        assert_eq!(traj.steps.len(), 1);
        let step = &traj.steps[0];
        assert!(step.accepted, "residual {}", step.residual);

        let direct =
            optimize_timestep(&traj.layout, &target_unitaries(&profile, 0.1, 1).unwrap()[0], 1, None, &cfg).unwrap();
        assert_eq!(direct.params, step.params);

        let seq = emit_circuit(step, &traj.layout);
        assert_eq!(seq.cnot_count(), 24);
        let recomposed = seq.to_matrix().unwrap();
        let direct = circuit_matrix(&traj.layout, &step.params).unwrap();
        assert!(linalg::phase_invariant_distance(&recomposed, &direct) < 1e-9);

        let target = &target_unitaries(&profile, 0.1, 1).unwrap()[0].matrix;
        let full = executable_circuit(step, &traj.layout).to_matrix().unwrap();
        assert!(distance(&full, target).unwrap() <= 1e-6);
    }

    #[test]
    fn five_columns_emit_n_times_n_minus_one_cnots() {
        let layout = build_layout(5, 5).unwrap();
        let step = CompiledTimestep {
            step_index: 1,
            elapsed_time: 0.1,
            params: vec![MatchgateParams::default(); layout.n_slots()],
            residual: 0.0,
            iterations: 0,
            family: GateFamily::FourParam,
            frame: Frame::Hadamard,
            accepted: true,
            wall_ms: 0.0,
        };
        let seq = emit_circuit(&step, &layout);
        assert_eq!(seq.cnot_count(), 20);
        assert!(linalg::phase_invariant_distance(&seq.to_matrix().unwrap(), &linalg::identity(32)) < 1e-12);
    }

    #[test]
    fn extra_column_never_regresses_from_padded_start() {
        let profile = ModelPreset::Staggered5.profile();
        let target = &target_unitaries(&profile, 0.1, 3).unwrap()[2];
        let cfg = OptimizerConfig { restarts: 1, family_fallback: false, ..OptimizerConfig::default() };
        let small = build_layout(5, 5).unwrap();
        let big = build_layout(5, 6).unwrap();
        let a = optimize_timestep(&small, target, 3, None, &cfg).unwrap();
        let mut padded = a.params.clone();
        padded.resize(big.n_slots(), MatchgateParams::default());
        let b = optimize_timestep(&big, target, 3, Some(&padded), &cfg).unwrap();
        assert!(b.residual <= a.residual + 1e-12);
    }

    #[test]
    fn parallel_and_sequential_agree_without_warm_start() {
        let profile = ModelPreset::Defect5.profile();
        let base = OptimizerConfig { warm_start: false, ..OptimizerConfig::default() };
        let seq =
            compile_trajectory(&profile, 0.1, 4, &OptimizerConfig { execution: Execution::Sequential, ..base.clone() })
                .unwrap();
        let par =
            compile_trajectory(&profile, 0.1, 4, &OptimizerConfig { execution: Execution::Parallel, ..base }).unwrap();
        for (a, b) in seq.steps.iter().zip(&par.steps) {
            assert_eq!(a.residual.to_bits(), b.residual.to_bits());
            assert_eq!(a.params, b.params);
        }
    }

    #[test]
    fn report_csv_header() {
        let mut buf = Vec::new();
        write_report_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "step,elapsed_time,residual,iterations,family,wall_ms\n");
        assert_eq!(qasm_file_name(7), "step_007.qasm");
    }
}
