// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Two-qubit matchgates `G(A, B)`.
//!
//! On a bond `(q, q+1)` the local basis index is `l = b_q + 2 b_{q+1}`. Block
//! `A` acts on the even sector `(l=0, l=3)` and block `B` on the odd sector
//! `(l=1, l=2)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, NativeGateSequence};
use crate::compiler::{CircuitLayout, OptimizerConfig, Slot};
use crate::error::{validation, Error, Result};
use crate::linalg::{CMatrix, ONE, ZERO};

pub type Block = Matrix2<Complex64>;

const UNITARY_TOL: f64 = 1e-10;
const DET_TOL: f64 = 1e-8;

/// Two 2×2 blocks with no unitarity or determinant requirement; derivatives
/// of matchgates live here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockPair {
    pub a: Block,
    pub b: Block,
}

impl BlockPair {
    pub fn identity() -> Self {
        BlockPair { a: Block::identity(), b: Block::identity() }
    }

    /// `self · rhs` (apply `rhs` first).
    pub fn mul(&self, rhs: &BlockPair) -> BlockPair {
        BlockPair { a: self.a * rhs.a, b: self.b * rhs.b }
    }

    pub fn adjoint(&self) -> BlockPair {
        BlockPair { a: self.a.adjoint(), b: self.b.adjoint() }
    }

    pub fn scale(&self, s: Complex64) -> BlockPair {
        BlockPair { a: self.a * s, b: self.b * s }
    }

    pub fn embedded(&self) -> Matrix4<Complex64> {
        let mut m = Matrix4::zeros();
        let even = [0, 3];
        let odd = [1, 2];
        for r in 0..2 {
            for c in 0..2 {
                m[(even[r], even[c])] = self.a[(r, c)];
                m[(odd[r], odd[c])] = self.b[(r, c)];
            }
        }
        m
    }

    /// `M ← G M` where `G` acts on qubits `(q, q+1)`; `data` is a column-major
    /// `dim × cols` matrix (a single state when `cols == 1`).
    pub fn apply_left(&self, data: &mut [Complex64], dim: usize, q: usize) {
        let (b0, b1) = (1usize << q, 2usize << q);
        let [a00, a10, a01, a11] = [self.a[(0, 0)], self.a[(1, 0)], self.a[(0, 1)], self.a[(1, 1)]];
        let [c00, c10, c01, c11] = [self.b[(0, 0)], self.b[(1, 0)], self.b[(0, 1)], self.b[(1, 1)]];
        for col in data.chunks_exact_mut(dim) {
            for_each_base(dim, q, |x| {
                let (i0, i1, i2, i3) = (x, x | b0, x | b1, x | b0 | b1);
                let (v0, v3) = (col[i0], col[i3]);
                col[i0] = a00 * v0 + a01 * v3;
                col[i3] = a10 * v0 + a11 * v3;
                let (v1, v2) = (col[i1], col[i2]);
                col[i1] = c00 * v1 + c01 * v2;
                col[i2] = c10 * v1 + c11 * v2;
            });
        }
    }

    /// `M ← M G` for a column-major `dim × dim` matrix.
    pub fn apply_right(&self, data: &mut [Complex64], dim: usize, q: usize) {
        let (b0, b1) = (1usize << q, 2usize << q);
        let [a00, a10, a01, a11] = [self.a[(0, 0)], self.a[(1, 0)], self.a[(0, 1)], self.a[(1, 1)]];
        let [c00, c10, c01, c11] = [self.b[(0, 0)], self.b[(1, 0)], self.b[(0, 1)], self.b[(1, 1)]];
        for_each_base(dim, q, |x| {
            let (j0, j1, j2, j3) = (x, x | b0, x | b1, x | b0 | b1);
            combine_columns(data, dim, j0, j3, a00, a10, a01, a11);
            combine_columns(data, dim, j1, j2, c00, c10, c01, c11);
        });
    }
}

/// Columns `(u, v) ← (u, v) · [[g00, g01], [g10, g11]]`.
#[allow(clippy::too_many_arguments)]
#[inline]
fn combine_columns(
    data: &mut [Complex64],
    dim: usize,
    ju: usize,
    jv: usize,
    g00: Complex64,
    g10: Complex64,
    g01: Complex64,
    g11: Complex64,
) {
    let (lo, hi) = if ju < jv { (ju, jv) } else { (jv, ju) };
    let (head, tail) = data.split_at_mut(hi * dim);
    let (first, second) = (&mut head[lo * dim..lo * dim + dim], &mut tail[..dim]);
    let (u, v) = if ju < jv { (first, second) } else { (second, first) };
    for (x, y) in u.iter_mut().zip(v.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = a * g00 + b * g10;
        *y = a * g01 + b * g11;
    }
}

/// Calls `f(x)` for every index with bits `q` and `q+1` clear.
#[inline]
fn for_each_base(dim: usize, q: usize, mut f: impl FnMut(usize)) {
    let low = 1usize << q;
    let stride = 4usize << q;
    let mut hi = 0;
    while hi < dim {
        for lo in 0..low {
            f(hi | lo);
        }
        hi += stride;
    }
}

/// A validated matchgate: unitary blocks with equal determinants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matchgate {
    blocks: BlockPair,
}

impl Matchgate {
    pub fn new(a: Block, b: Block) -> Result<Self> {
        for (name, m) in [("outer", &a), ("inner", &b)] {
            let err = (m.adjoint() * m - Block::identity()).iter().map(|x| x.norm()).fold(0.0, f64::max);
            if err > UNITARY_TOL {
                return Err(validation(format!("{name} block is not unitary (deviation {err:.3e})")));
            }
        }
        let mismatch = (a.determinant() - b.determinant()).norm();
        if mismatch > DET_TOL {
            return Err(Error::MatchgateViolation { mismatch });
        }
        Ok(Matchgate { blocks: BlockPair { a, b } })
    }

    pub fn identity() -> Self {
        Matchgate { blocks: BlockPair::identity() }
    }

    pub fn outer_block(&self) -> &Block {
        &self.blocks.a
    }

    pub fn inner_block(&self) -> &Block {
        &self.blocks.b
    }

    pub fn blocks(&self) -> &BlockPair {
        &self.blocks
    }

    pub fn embedded(&self) -> Matrix4<Complex64> {
        self.blocks.embedded()
    }

    /// Blocks inverted.
    pub fn inverse(&self) -> Matchgate {
        Matchgate { blocks: self.blocks.adjoint() }
    }

    /// Dense matrix on `n` qubits acting on bond `(q, q+1)`.
    pub fn embed(&self, n: usize, q: usize) -> Result<CMatrix> {
        if q + 1 >= n {
            return Err(validation(format!("bond ({q}, {}) outside a {n}-qubit register", q + 1)));
        }
        let dim = 1usize << n;
        let mut m = CMatrix::identity(dim, dim);
        self.blocks.apply_left(m.as_mut_slice(), dim, q);
        Ok(m)
    }
}

/// `G2 · G1`: `g1` is applied first.
pub fn matchgate_product(g1: &Matchgate, g2: &Matchgate) -> Matchgate {
    Matchgate { blocks: g2.blocks.mul(&g1.blocks) }
}

pub fn make_matchgate(a: Block, b: Block) -> Result<Matchgate> {
    Matchgate::new(a, b)
}

/// Parameterized gate families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateFamily {
    /// `RZ_q(θ3) RZ_{q+1}(θ4) exp(-i(θ1 XX + θ2 YY))`
    #[default]
    FourParam,
    /// The four-parameter gate followed by a leading `RZ_q(θ5) RZ_{q+1}(θ6)`;
    /// covers every matchgate up to global phase.
    SixParam,
}

impl GateFamily {
    pub fn n_params(self) -> usize {
        match self {
            GateFamily::FourParam => 4,
            GateFamily::SixParam => 6,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GateFamily::FourParam => "four_param",
            GateFamily::SixParam => "six_param",
        }
    }
}

impl fmt::Display for GateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for GateFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "four_param" => Ok(GateFamily::FourParam),
            "six_param" => Ok(GateFamily::SixParam),
            _ => Err(validation(format!("unknown gate family {s:?}"))),
        }
    }
}

/// Angles `θ1..θ6` in radians; the four-parameter family keeps `θ5 = θ6 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchgateParams {
    pub family: GateFamily,
    pub theta: [f64; 6],
}

impl Default for MatchgateParams {
    fn default() -> Self {
        MatchgateParams::zero(GateFamily::FourParam)
    }
}

impl MatchgateParams {
    pub fn zero(family: GateFamily) -> Self {
        MatchgateParams { family, theta: [0.0; 6] }
    }

    pub fn four(t1: f64, t2: f64, t3: f64, t4: f64) -> Self {
        MatchgateParams { family: GateFamily::FourParam, theta: [t1, t2, t3, t4, 0.0, 0.0] }
    }

    pub fn six(theta: [f64; 6]) -> Self {
        MatchgateParams { family: GateFamily::SixParam, theta }
    }

    /// From a slice of exactly `family.n_params()` angles.
    pub fn from_slice(family: GateFamily, angles: &[f64]) -> Result<Self> {
        if angles.len() != family.n_params() {
            return Err(Error::Dimension { expected: family.n_params(), found: angles.len() });
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(validation("angles must be finite"));
        }
        let mut theta = [0.0; 6];
        theta[..angles.len()].copy_from_slice(angles);
        Ok(MatchgateParams { family, theta })
    }

    pub fn angles(&self) -> &[f64] {
        &self.theta[..self.family.n_params()]
    }

    /// Each angle wrapped into `(-π, π]`; changes the gate by at most a global phase.
    pub fn canonicalize(&self) -> Self {
        let mut out = *self;
        for t in out.theta.iter_mut() {
            *t = wrap_angle(*t);
        }
        out
    }

    /// Widen to the six-parameter family without changing the gate.
    pub fn to_six(&self) -> Self {
        MatchgateParams { family: GateFamily::SixParam, theta: self.theta }
    }
}

/// Wrap into `(-π, π]`.
pub fn wrap_angle(t: f64) -> f64 {
    let r = t.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

fn rotation_x(phi: f64) -> Block {
    let c = Complex64::new(phi.cos(), 0.0);
    let s = Complex64::new(0.0, -phi.sin());
    Block::new(c, s, s, c)
}

fn z_phases(alpha: f64, beta: f64) -> BlockPair {
    let e = |x: f64| Complex64::from_polar(1.0, x);
    BlockPair { a: Block::new(e(-alpha), ZERO, ZERO, e(alpha)), b: Block::new(e(beta), ZERO, ZERO, e(-beta)) }
}

/// `RZ_q(s) RZ_{q+1}(t)` in block form.
fn rz_pair(s: f64, t: f64) -> BlockPair {
    z_phases((s + t) / 2.0, (s - t) / 2.0)
}

/// `exp(-i(θ1 XX + θ2 YY))` in block form.
fn interaction(t1: f64, t2: f64) -> BlockPair {
    BlockPair { a: rotation_x(t1 - t2), b: rotation_x(t1 + t2) }
}

fn sigma_x() -> Block {
    Block::new(ZERO, ONE, ONE, ZERO)
}

fn sigma_z() -> Block {
    Block::new(ONE, ZERO, ZERO, -ONE)
}

/// `(post, interaction, pre)` factors of the gate.
fn factors(p: &MatchgateParams) -> (BlockPair, BlockPair, BlockPair) {
    let t = &p.theta;
    (rz_pair(t[2], t[3]), interaction(t[0], t[1]), rz_pair(t[4], t[5]))
}

pub fn matchgate_from_params(p: &MatchgateParams) -> Matchgate {
    let (post, mid, pre) = factors(p);
    Matchgate { blocks: post.mul(&mid).mul(&pre) }
}

/// Gate blocks and their partial derivatives, one per angle of the family.
pub fn gate_and_derivatives(p: &MatchgateParams) -> (BlockPair, Vec<BlockPair>) {
    let (post, mid, pre) = factors(p);
    let gate = post.mul(&mid).mul(&pre);
    let minus_i = Complex64::new(0.0, -1.0);
    let half = Complex64::new(0.0, -0.5);
    let xx = BlockPair { a: sigma_x(), b: sigma_x() };
    let yy = BlockPair { a: -sigma_x(), b: sigma_x() };
    let z_lo = BlockPair { a: sigma_z(), b: -sigma_z() };
    let z_hi = BlockPair { a: sigma_z(), b: sigma_z() };
    let mut ders = vec![
        post.mul(&xx.scale(minus_i)).mul(&mid).mul(&pre),
        post.mul(&yy.scale(minus_i)).mul(&mid).mul(&pre),
        z_lo.scale(half).mul(&gate),
        z_hi.scale(half).mul(&gate),
    ];
    if p.family == GateFamily::SixParam {
        ders.push(gate.mul(&z_lo.scale(half)));
        ders.push(gate.mul(&z_hi.scale(half)));
    }
    (gate, ders)
}

/// Native decomposition on bond `(q, q+1)` with exactly two CNOTs, control on `q`.
///
/// `exp(-i(a XX + b YY)) = (V†⊗V†) CNOT (RX_q(2a) RZ_{q+1}(2b)) CNOT (V⊗V)`
/// with `V = RX(π/2)`, which maps `Y` to `Z` and fixes `X`.
pub fn decompose_native_on(p: &MatchgateParams, n_qubits: usize, q: usize) -> NativeGateSequence {
    let t = &p.theta;
    let (lo, hi) = (q, q + 1);
    let mut seq = NativeGateSequence::new(n_qubits);
    if p.family == GateFamily::SixParam {
        seq.push(Gate::Rz { qubit: lo, angle: t[4] });
        seq.push(Gate::Rz { qubit: hi, angle: t[5] });
    }
    for qubit in [lo, hi] {
        seq.push(Gate::Rx { qubit, angle: FRAC_PI_2 });
    }
    seq.push(Gate::Cnot { control: lo, target: hi });
    seq.push(Gate::Rx { qubit: lo, angle: 2.0 * t[0] });
    seq.push(Gate::Rz { qubit: hi, angle: 2.0 * t[1] });
    seq.push(Gate::Cnot { control: lo, target: hi });
    for qubit in [lo, hi] {
        seq.push(Gate::Rx { qubit, angle: -FRAC_PI_2 });
    }
    seq.push(Gate::Rz { qubit: lo, angle: t[2] });
    seq.push(Gate::Rz { qubit: hi, angle: t[3] });
    seq
}

/// Two-qubit decomposition on qubits `(0, 1)`.
pub fn decompose_native(p: &MatchgateParams) -> NativeGateSequence {
    decompose_native_on(p, 2, 0)
}

/// Outcome of solving `(G1⊗I)(I⊗G2)(G3⊗I) = (I⊗G4)(G5⊗I)(I⊗G6)` up to phase.
///
/// Here `G⊗I` acts on qubits `(1, 2)` and `I⊗G` on `(0, 1)`, so the left side
/// applies `G3` first.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MirrorReport {
    pub g4: MatchgateParams,
    pub g5: MatchgateParams,
    pub g6: MatchgateParams,
    pub residual: f64,
    pub restarts_used: usize,
    pub satisfied: bool,
}

pub const MIRROR_DEFAULT_TOL: f64 = 1e-8;
pub const MIRROR_RESTARTS: usize = 8;

/// Numerically fuse three matchgates into the mirrored arrangement. A failure
/// to reach `tol` is reported through `satisfied`, not as an error.
pub fn verify_mirror_identity(g1: &Matchgate, g2: &Matchgate, g3: &Matchgate, tol: f64, seed: u64) -> MirrorReport {
    let top = 1usize;
    let bottom = 0usize;
    let mut lhs = CMatrix::identity(8, 8);
    for (g, q) in [(g3, top), (g2, bottom), (g1, top)] {
        g.blocks().apply_left(lhs.as_mut_slice(), 8, q);
    }
    // Time order on the right side: G6, G5, G4.
    let layout = CircuitLayout::from_slots(
        3,
        vec![Slot { column: 0, qubit: bottom }, Slot { column: 1, qubit: top }, Slot { column: 2, qubit: bottom }],
    )
    .expect("fixed three-slot layout is valid");
    let cfg = OptimizerConfig {
        tolerance: tol,
        restarts: MIRROR_RESTARTS,
        seed,
        family: GateFamily::SixParam,
        ..OptimizerConfig::default()
    };
    let result = crate::compiler::optimize_matrix(&layout, &lhs, None, &cfg, seed);
    let params = &result.params;
    MirrorReport {
        g6: params[0],
        g5: params[1],
        g4: params[2],
        residual: result.residual,
        restarts_used: result.restarts_used,
        satisfied: result.residual <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, pauli};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn local(m: &Matrix4<Complex64>) -> CMatrix {
        CMatrix::from_iterator(4, 4, m.iter().cloned())
    }

    fn random_params(rng: &mut impl Rng, family: GateFamily) -> MatchgateParams {
        let mut theta = [0.0; 6];
        for t in theta.iter_mut().take(family.n_params()) {
            *t = rng.random_range(-PI..PI);
        }
        MatchgateParams { family, theta }
    }

    /// `exp(-iθ P)` for an involutory `P` built by Kronecker products.
    fn expi(p: &CMatrix, theta: f64) -> CMatrix {
        linalg::identity(p.nrows()) * Complex64::new(theta.cos(), 0.0) - p * Complex64::new(0.0, theta.sin())
    }

    /// Kronecker-product construction of the six-parameter gate on qubits (0, 1).
    fn oracle(p: &MatchgateParams) -> CMatrix {
        let t = &p.theta;
        let xx = pauli::embed(2, &[(0, pauli::x()), (1, pauli::x())]);
        let yy = pauli::embed(2, &[(0, pauli::y()), (1, pauli::y())]);
        let z0 = pauli::embed(2, &[(0, pauli::z())]);
        let z1 = pauli::embed(2, &[(1, pauli::z())]);
        let inter = expi(&xx, t[0]) * expi(&yy, t[1]);
        expi(&z0, t[2] / 2.0) * expi(&z1, t[3] / 2.0) * inter * expi(&z0, t[4] / 2.0) * expi(&z1, t[5] / 2.0)
    }

    #[test]
    fn identity_and_diagonal() {
        assert_eq!(local(&Matchgate::identity().embedded()), linalg::identity(4));
        let phi: f64 = 0.4;
        let b = Block::new(Complex64::from_polar(1.0, phi), ZERO, ZERO, Complex64::from_polar(1.0, -phi));
        let g = make_matchgate(Block::identity(), b).unwrap();
        let m = g.embedded();
        assert!((m[(1, 1)] - Complex64::from_polar(1.0, phi)).norm() < 1e-15);
        assert!((m[(2, 2)] - Complex64::from_polar(1.0, -phi)).norm() < 1e-15);
    }

    #[test]
    fn determinant_mismatch_is_rejected() {
        let a = Block::new(ONE, ZERO, ZERO, -ONE);
        let err = make_matchgate(a, Block::identity()).unwrap_err();
        assert!(matches!(err, Error::MatchgateViolation { .. }));
        let bad = Block::new(ONE, ONE, ZERO, ONE);
        assert!(matches!(make_matchgate(bad, Block::identity()), Err(Error::Validation(_))));
    }

    #[test]
    fn xx_closed_form() {
        let t = 0.37;
        let g = matchgate_from_params(&MatchgateParams::four(t, 0.0, 0.0, 0.0));
        let expect = Block::new(
            Complex64::new(t.cos(), 0.0),
            Complex64::new(0.0, -t.sin()),
            Complex64::new(0.0, -t.sin()),
            Complex64::new(t.cos(), 0.0),
        );
        assert!((g.outer_block() - expect).norm() < 1e-15);
        assert!((g.inner_block() - expect).norm() < 1e-15);
    }

    #[test]
    fn family_matches_kronecker_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for family in [GateFamily::FourParam, GateFamily::SixParam] {
            for _ in 0..50 {
                let p = random_params(&mut rng, family);
                let g = matchgate_from_params(&p);
                assert!(linalg::max_abs_diff(&local(&g.embedded()), &oracle(&p)) < 1e-12);
                assert!(Matchgate::new(*g.outer_block(), *g.inner_block()).is_ok());
            }
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_params(&mut rng, GateFamily::SixParam);
        let (_, ders) = gate_and_derivatives(&p);
        let h = 1e-6;
        for (k, d) in ders.iter().enumerate() {
            let mut plus = p;
            let mut minus = p;
            plus.theta[k] += h;
            minus.theta[k] -= h;
            let fd = (local(&matchgate_from_params(&plus).embedded())
                - local(&matchgate_from_params(&minus).embedded()))
                * Complex64::new(0.5 / h, 0.0);
            assert!(linalg::max_abs_diff(&fd, &local(&d.embedded())) < 1e-8, "angle {k}");
        }
    }

    #[test]
    fn decomposition_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let quarter = MatchgateParams::four(PI / 4.0, 0.0, 0.0, 0.0);
        let seq = decompose_native(&quarter);
        let xx = pauli::embed(2, &[(0, pauli::x()), (1, pauli::x())]);
        assert!(linalg::phase_invariant_distance(&seq.to_matrix().unwrap(), &expi(&xx, PI / 4.0)) < 1e-10);
        assert_eq!(seq.cnot_count(), 2);
        let zero = decompose_native(&MatchgateParams::default()).to_matrix().unwrap();
        assert!(linalg::phase_invariant_distance(&zero, &linalg::identity(4)) < 1e-12);
        for family in [GateFamily::FourParam, GateFamily::SixParam] {
            for _ in 0..50 {
                let p = random_params(&mut rng, family);
                let seq = decompose_native(&p);
                assert_eq!(seq.cnot_count(), 2);
                let m = seq.to_matrix().unwrap();
                // Exact equality, not only up to phase.
                assert!(linalg::max_abs_diff(&m, &local(&matchgate_from_params(&p).embedded())) < 1e-12);
            }
        }
    }

    #[test]
    fn embedding_on_larger_register() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_params(&mut rng, GateFamily::SixParam);
        let g = matchgate_from_params(&p);
        let big = g.embed(4, 1).unwrap();
        let oracle = linalg::kron(&linalg::kron(&linalg::identity(2), &local(&g.embedded())), &linalg::identity(2));
        assert!(linalg::max_abs_diff(&big, &oracle) < 1e-14);
        let dim = 16;
        let mut right = linalg::identity(dim);
        g.blocks().apply_right(right.as_mut_slice(), dim, 1);
        assert!(linalg::max_abs_diff(&right, &oracle) < 1e-14);
        assert!(g.embed(4, 3).is_err());
    }

    #[test]
    fn mirror_identity_trivial_cases() {
        let id = Matchgate::identity();
        let r = verify_mirror_identity(&id, &id, &id, MIRROR_DEFAULT_TOL, 1);
        assert!(r.satisfied);
        assert_eq!(r.residual, 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g1 = matchgate_from_params(&random_params(&mut rng, GateFamily::FourParam));
        let g3 = matchgate_from_params(&random_params(&mut rng, GateFamily::FourParam));
        let r = verify_mirror_identity(&g1, &id, &g3, MIRROR_DEFAULT_TOL, 2);
        assert!(r.satisfied, "residual {}", r.residual);
    }

    fn random_u2_pair(rng: &mut impl Rng) -> Matchgate {
        let p = random_params(rng, GateFamily::SixParam);
        let g = matchgate_from_params(&p);
        let phase = Complex64::from_polar(1.0, rng.random_range(-PI..PI));
        Matchgate::new(g.outer_block() * phase, g.inner_block() * phase).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn product_matches_matrix_product(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g1 = random_u2_pair(&mut rng);
            let g2 = random_u2_pair(&mut rng);
            let prod = matchgate_product(&g1, &g2);
            let direct = g2.embedded() * g1.embedded();
            prop_assert!((prod.embedded() - direct).iter().all(|x| x.norm() < 1e-12));
            prop_assert!((prod.outer_block().determinant() - prod.inner_block().determinant()).norm() < 1e-10);
            let back = matchgate_product(&prod, &g2.inverse());
            prop_assert!((back.embedded() - g1.embedded()).iter().all(|x| x.norm() < 1e-12));
        }

        #[test]
        fn canonicalize_is_idempotent(t in prop::array::uniform6(-50.0f64..50.0)) {
            let p = MatchgateParams::six(t);
            let c = p.canonicalize();
            prop_assert_eq!(c.canonicalize(), c);
            prop_assert!(c.theta.iter().all(|&x| x > -PI && x <= PI));
            let d = linalg::phase_invariant_distance(
                &local(&matchgate_from_params(&p).embedded()),
                &local(&matchgate_from_params(&c).embedded()),
            );
            prop_assert!(d < 1e-12);
        }
    }
}
