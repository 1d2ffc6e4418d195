// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Free-fermion picture of the chain: Jordan–Wigner mapping, the BdG matrix,
//! its spectrum and a classification of the Nambu modes.
//!
//! The mapping is taken in the Hadamard frame, where the model reads
//! `-Σ J_i X_i X_{i+1} - h Σ Z_i` and `Z_j = 1 - 2 c_j† c_j`. With
//! `Ψ = (c_1..c_N, c_1†..c_N†)` the fermionic Hamiltonian is exactly
//! `Ψ† H_BdG Ψ`, so the many-body levels are `Σ_k ±E_k` over the `N`
//! non-negative BdG eigenvalues. Flipping one quasiparticle therefore costs
//! `2 E_k` ([`EXCITATION_SCALE`]).

use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::model::CouplingProfile;

/// Ratio between a single-quasiparticle excitation energy and the BdG eigenvalue.
pub const EXCITATION_SCALE: f64 = 2.0;

/// `[[A, B], [-B*, -A*]]` with real symmetric `A` and real antisymmetric `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct BdGMatrix {
    a: DMatrix<f64>,
    b_upper: Vec<f64>,
    n: usize,
}

impl BdGMatrix {
    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Full antisymmetric `B`, rebuilt from its strict upper triangle.
    pub fn b(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut b = DMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                b[(i, j)] = self.b_upper[k];
                b[(j, i)] = -self.b_upper[k];
                k += 1;
            }
        }
        b
    }

    pub fn assembled(&self) -> CMatrix {
        let n = self.n;
        let b = self.b();
        let mut h = CMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (Complex64::new(self.a[(i, j)], 0.0), Complex64::new(b[(i, j)], 0.0));
                h[(i, j)] = a;
                h[(i, n + j)] = b;
                h[(n + i, j)] = -b.conj();
                h[(n + i, n + j)] = -a.conj();
            }
        }
        h
    }
}

/// `A_ii = h`, `A_{i,i+1} = A_{i+1,i} = -J_i/2`, `B_{i,i+1} = -J_i/2 = -B_{i+1,i}`.
pub fn build_bdg(profile: &CouplingProfile, h: f64) -> Result<BdGMatrix> {
    profile.validate()?;
    let n = profile.n_sites;
    let mut a = DMatrix::zeros(n, n);
    let mut b_upper = vec![0.0; n * (n - 1) / 2];
    for i in 0..n {
        a[(i, i)] = h;
    }
    for (i, j) in profile.couplings.iter().enumerate() {
        a[(i, i + 1)] = -j / 2.0;
        a[(i + 1, i)] = -j / 2.0;
        // Row i of the strict upper triangle starts after i rows of decreasing length.
        let offset = i * (2 * n - i - 1) / 2;
        b_upper[offset] = -j / 2.0;
    }
    Ok(BdGMatrix { a, b_upper, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeLabel {
    PairedBulk,
    UnpairedZeroMode,
    UnpairedHighEnergyPoint,
    DefectMode,
}

impl ModeLabel {
    pub fn label(self) -> &'static str {
        match self {
            ModeLabel::PairedBulk => "paired_bulk",
            ModeLabel::UnpairedZeroMode => "unpaired_zero_mode",
            ModeLabel::UnpairedHighEnergyPoint => "unpaired_high_energy_point",
            ModeLabel::DefectMode => "defect_mode",
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Tolerances for grouping and classifying modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyOptions {
    pub zero_tol: f64,
    /// IPR at or above which a mode counts as localized.
    pub loc_threshold: f64,
    /// Relative tolerance for treating eigenvalues as degenerate.
    pub degeneracy_tol: f64,
    /// Minimum overlap between a mode's particle-hole image and its partner.
    pub pairing_overlap: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { zero_tol: 1e-8, loc_threshold: 1.0 / 3.0, degeneracy_tol: 1e-6, pairing_overlap: 1.0 - 1e-6 }
    }
}

/// Eigenpairs in ascending order, with each degenerate multiplet expressed in
/// a canonical basis: eigenvectors of the projected `τ_z`, ties broken by
/// eigenvectors of the projected site-position operator, phases fixed so the
/// largest component is real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct BdGSpectrum {
    pub n_sites: usize,
    pub eigenvalues: Vec<f64>,
    /// Columns are Nambu eigenvectors `(u_1..u_N, v_1..v_N)`.
    pub eigenvectors: CMatrix,
    /// `Σ|u|² - Σ|v|²` per mode.
    pub tau_z: Vec<f64>,
    /// `|u_j|² + |v_j|²` per mode and site.
    pub site_weights: Vec<Vec<f64>>,
    pub ipr: Vec<f64>,
    /// Whether the particle-hole image of each mode matches its partner at `-E`.
    pub paired: Vec<bool>,
    pub labels: Vec<ModeLabel>,
    /// Half-open index ranges of degenerate multiplets.
    pub multiplets: Vec<(usize, usize)>,
}

fn multiplets(values: &[f64], rel_tol: f64) -> Vec<(usize, usize)> {
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || (values[i] - values[start]).abs() > rel_tol * scale {
            out.push((start, i));
            start = i;
        }
    }
    out
}

/// Rotate the columns of `v` by the eigenvectors of `v† op v` (ascending),
/// returning the sorted projected eigenvalues.
fn diagonalize_within(v: &CMatrix, op: &[f64]) -> (Vec<f64>, CMatrix) {
    let mut weighted = v.clone();
    for (r, &o) in op.iter().enumerate() {
        {
            let mut row = weighted.row_mut(r);
            row *= Complex64::new(o, 0.0);
        }
    }
    let projected = v.adjoint() * weighted;
    let (vals, w) = linalg::eigh(&projected);
    (vals, v * w)
}

fn canonical_basis(block: &CMatrix, n: usize) -> (CMatrix, Vec<f64>) {
    let tau: Vec<f64> = (0..2 * n).map(|r| if r < n { 1.0 } else { -1.0 }).collect();
    let position: Vec<f64> = (0..2 * n).map(|r| (r % n) as f64).collect();
    let (tz, rotated) = diagonalize_within(block, &tau);
    let mut out = rotated.clone();
    let mut start = 0;
    for i in 1..=tz.len() {
        if i == tz.len() || (tz[i] - tz[start]).abs() > 1e-8 {
            if i - start > 1 {
                let sub = rotated.columns(start, i - start).into_owned();
                let (_, fixed) = diagonalize_within(&sub, &position);
                out.columns_mut(start, i - start).copy_from(&fixed);
            }
            start = i;
        }
    }
    for mut col in out.column_iter_mut() {
        let mut v: CVector = col.clone_owned();
        linalg::fix_phase(&mut v);
        col.copy_from(&v);
    }
    (out, tz)
}

/// `(u, v) → (v*, u*)`.
fn particle_hole(v: &CVector, n: usize) -> CVector {
    CVector::from_iterator(2 * n, (0..2 * n).map(|r| if r < n { v[n + r].conj() } else { v[r - n].conj() }))
}

pub fn bdg_spectrum(m: &BdGMatrix) -> BdGSpectrum {
    bdg_spectrum_with(m, &ClassifyOptions::default())
}

pub fn bdg_spectrum_with(m: &BdGMatrix, opts: &ClassifyOptions) -> BdGSpectrum {
    let n = m.n;
    let (values, vectors) = linalg::eigh(&m.assembled());
    let groups = multiplets(&values, opts.degeneracy_tol);
    let mut canonical = vectors.clone();
    let mut tau_z = vec![0.0; 2 * n];
    for &(s, e) in &groups {
        let (basis, _) = canonical_basis(&vectors.columns(s, e - s).into_owned(), n);
        canonical.columns_mut(s, e - s).copy_from(&basis);
    }
    let mut site_weights = Vec::with_capacity(2 * n);
    let mut ipr = Vec::with_capacity(2 * n);
    for (k, col) in canonical.column_iter().enumerate() {
        let w: Vec<f64> = (0..n).map(|j| col[j].norm_sqr() + col[n + j].norm_sqr()).collect();
        let total: f64 = w.iter().sum();
        ipr.push(w.iter().map(|x| x * x).sum::<f64>() / (total * total));
        tau_z[k] = (0..n).map(|j| col[j].norm_sqr() - col[n + j].norm_sqr()).sum();
        site_weights.push(w);
    }
    // Mode i of a multiplet at E pairs with mode i of the multiplet at -E.
    let scale = values.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let mut paired = vec![false; 2 * n];
    for &(s, e) in &groups {
        let energy = values[s];
        let partner = groups.iter().find(|&&(ps, _)| (values[ps] + energy).abs() <= opts.degeneracy_tol * scale);
        if let Some(&(ps, pe)) = partner {
            if pe - ps != e - s {
                continue;
            }
            for i in 0..e - s {
                let image = particle_hole(&canonical.column(s + i).clone_owned(), n);
                let overlap = image.dotc(&canonical.column(ps + i)).norm();
                paired[s + i] = overlap >= opts.pairing_overlap;
            }
        }
    }
    let mut spectrum = BdGSpectrum {
        n_sites: n,
        eigenvalues: values,
        eigenvectors: canonical,
        tau_z,
        site_weights,
        ipr,
        paired,
        labels: Vec::new(),
        multiplets: groups,
    };
    spectrum.labels = classify_modes(&spectrum, opts.zero_tol, opts.loc_threshold);
    spectrum
}

/// Label each eigenpair: zero modes first, then unpaired localized modes at
/// the largest `|E|` (mirror points) or elsewhere (defects); everything else
/// is paired bulk.
pub fn classify_modes(spec: &BdGSpectrum, zero_tol: f64, loc_threshold: f64) -> Vec<ModeLabel> {
    let e_max = spec.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let extremal_tol = ClassifyOptions::default().degeneracy_tol * e_max.max(1.0);
    spec.eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let localized = spec.ipr[k] >= loc_threshold;
            if e.abs() <= zero_tol {
                ModeLabel::UnpairedZeroMode
            } else if !spec.paired[k] && localized {
                if (e.abs() - e_max).abs() <= extremal_tol {
                    ModeLabel::UnpairedHighEnergyPoint
                } else {
                    ModeLabel::DefectMode
                }
            } else {
                ModeLabel::PairedBulk
            }
        })
        .collect()
}

impl BdGSpectrum {
    /// The `N` non-negative single-particle energies, ascending.
    pub fn quasiparticle_energies(&self) -> Vec<f64> {
        let n = self.n_sites;
        self.eigenvalues[n..].iter().map(|e| e.max(0.0)).collect()
    }

    pub fn count(&self, label: ModeLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Site (0-based) carrying the largest weight of mode `k`.
    pub fn dominant_site(&self, k: usize) -> usize {
        let w = &self.site_weights[k];
        (0..w.len()).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap_or(0)
    }

    /// `index,eigenvalue,label,ipr,w1..wN`
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let weights: Vec<String> = (1..=self.n_sites).map(|j| format!("w{j}")).collect();
        writeln!(w, "index,eigenvalue,label,ipr,{}", weights.join(","))?;
        for k in 0..self.eigenvalues.len() {
            let ws: Vec<String> = self.site_weights[k].iter().map(|x| format!("{x}")).collect();
            writeln!(w, "{},{},{},{},{}", k + 1, self.eigenvalues[k], self.labels[k], self.ipr[k], ws.join(","))?;
        }
        Ok(())
    }

    pub fn summary(&self) -> SpectrumSummary {
        SpectrumSummary {
            n_sites: self.n_sites,
            eigenvalues: self.eigenvalues.clone(),
            modes: (0..self.eigenvalues.len())
                .map(|k| ModeSummary {
                    index: k + 1,
                    eigenvalue: self.eigenvalues[k],
                    label: self.labels[k],
                    ipr: self.ipr[k],
                    tau_z: self.tau_z[k],
                    dominant_site: self.dominant_site(k) + 1,
                    site_weights: self.site_weights[k].clone(),
                })
                .collect(),
            quasiparticle_energies: self.quasiparticle_energies(),
            excitation_scale: EXCITATION_SCALE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub index: usize,
    pub eigenvalue: f64,
    pub label: ModeLabel,
    pub ipr: f64,
    pub tau_z: f64,
    /// 1-based.
    pub dominant_site: usize,
    pub site_weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub n_sites: usize,
    pub eigenvalues: Vec<f64>,
    pub modes: Vec<ModeSummary>,
    pub quasiparticle_energies: Vec<f64>,
    pub excitation_scale: f64,
}

/// Every `Σ_k s_k E_k` with `s_k = ±1`, ascending.
pub fn many_body_levels(energies: &[f64]) -> Vec<f64> {
    let n = energies.len();
    let mut levels: Vec<f64> = (0..1usize << n)
        .map(|mask| energies.iter().enumerate().map(|(k, e)| if (mask >> k) & 1 == 1 { *e } else { -*e }).sum())
        .collect();
    levels.sort_by(f64::total_cmp);
    levels
}

/// Fermionic operators acting on computational basis states. Site `j` is
/// qubit `j` (bit `j`); occupied means bit set.
#[derive(Debug, Clone, Copy)]
enum Mode {
    Annihilate(usize),
    Create(usize),
}

fn apply_mode(op: Mode, x: usize) -> Option<(f64, usize)> {
    let (site, create) = match op {
        Mode::Annihilate(j) => (j, false),
        Mode::Create(j) => (j, true),
    };
    let bit = 1usize << site;
    let occupied = x & bit != 0;
    if occupied == create {
        return None;
    }
    let parity = (x & (bit - 1)).count_ones();
    let sign = if parity & 1 == 0 { 1.0 } else { -1.0 };
    Some((sign, x ^ bit))
}

/// Dense matrix of a product of mode operators (rightmost applied first).
fn product_matrix(ops: &[Mode], n: usize) -> CMatrix {
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    for x in 0..dim {
        let mut state = Some((1.0, x));
        for &op in ops.iter().rev() {
            state = state.and_then(|(s, y)| apply_mode(op, y).map(|(t, z)| (s * t, z)));
        }
        if let Some((s, y)) = state {
            m[(y, x)] += Complex64::new(s, 0.0);
        }
    }
    m
}

/// Outcome of checking the Jordan–Wigner construction on the full space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanWignerReport {
    pub n_sites: usize,
    pub field: f64,
    /// Largest deviation in `{c_i, c_j†} = δ_ij`, `{c_i, c_j} = 0`.
    pub anticommutator_error: f64,
    /// Largest deviation between string-built and direct Pauli matrices.
    pub pauli_error: f64,
    /// `‖Ψ† H_BdG Ψ − W H W‖_max` against the dense spin Hamiltonian.
    pub hamiltonian_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub const JW_MAX_SITES: usize = 10;

pub fn jordan_wigner_check(profile: &CouplingProfile, h: f64) -> Result<JordanWignerReport> {
    profile.validate()?;
    let n = profile.n_sites;
    if n > JW_MAX_SITES {
        return Err(Error::Resource(format!("Jordan–Wigner check is limited to {JW_MAX_SITES} sites")));
    }
    let dim = 1usize << n;
    let c: Vec<CMatrix> = (0..n).map(|j| product_matrix(&[Mode::Annihilate(j)], n)).collect();
    let cd: Vec<CMatrix> = (0..n).map(|j| product_matrix(&[Mode::Create(j)], n)).collect();
    let id = linalg::identity(dim);
    let zero = CMatrix::zeros(dim, dim);

    let mut anticommutator_error: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let acd = &c[i] * &cd[j] + &cd[j] * &c[i];
            let expect = if i == j { &id } else { &zero };
            anticommutator_error = anticommutator_error.max(linalg::max_abs_diff(&acd, expect));
            let acc = &c[i] * &c[j] + &c[j] * &c[i];
            anticommutator_error = anticommutator_error.max(linalg::max_abs(&acc));
        }
    }

    // σ^x_j = S_j (c_j + c_j†), σ^y_j = S_j i (c_j† - c_j), σ^z_j = 1 - 2 c_j† c_j.
    let mut pauli_error: f64 = 0.0;
    let mut string = id.clone();
    for j in 0..n {
        let sx = &string * (&c[j] + &cd[j]);
        let sy = &string * (&cd[j] - &c[j]) * linalg::I;
        let sz = &id - (&cd[j] * &c[j]) * Complex64::new(2.0, 0.0);
        for (built, direct) in [
            (&sx, linalg::pauli::embed(n, &[(j, linalg::pauli::x())])),
            (&sy, linalg::pauli::embed(n, &[(j, linalg::pauli::y())])),
            (&sz, linalg::pauli::embed(n, &[(j, linalg::pauli::z())])),
        ] {
            pauli_error = pauli_error.max(linalg::max_abs_diff(built, &direct));
        }
        pauli_error = pauli_error.max(linalg::max_abs_diff(&(&sx * &sy), &(&sz * linalg::I)));
        string = &string * &sz;
    }

    // Ψ† H Ψ with Ψ = (c, c†).
    let bdg = build_bdg(profile, h)?.assembled();
    let nambu = |k: usize| if k < n { Mode::Annihilate(k) } else { Mode::Create(k - n) };
    let dagger = |m: Mode| match m {
        Mode::Annihilate(j) => Mode::Create(j),
        Mode::Create(j) => Mode::Annihilate(j),
    };
    let mut hf = CMatrix::zeros(dim, dim);
    for a in 0..2 * n {
        for b in 0..2 * n {
            let coef = bdg[(a, b)];
            if coef.norm() == 0.0 {
                continue;
            }
            hf += product_matrix(&[dagger(nambu(a)), nambu(b)], n) * coef;
        }
    }
    let spin = crate::model::build_hamiltonian(&profile.with_field(h), true)?;
    let framed = crate::compiler::to_frame(&spin, crate::compiler::Frame::Hadamard);
    let hamiltonian_error = linalg::max_abs_diff(&hf, &framed);

    let tolerance = 1e-10;
    Ok(JordanWignerReport {
        n_sites: n,
        field: h,
        anticommutator_error,
        pauli_error,
        hamiltonian_error,
        tolerance,
        passed: anticommutator_error <= tolerance && pauli_error <= tolerance && hamiltonian_error <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hamiltonian, ModelPreset};
    use proptest::prelude::*;

    fn sorted_abs(spec: &BdGSpectrum) -> Vec<f64> {
        let mut v: Vec<f64> = spec.eigenvalues.iter().map(|e| e.abs()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn two_site_blocks() {
        let p = CouplingProfile::new(vec![2.0], 0.0).unwrap();
        let m = build_bdg(&p, 0.0).unwrap();
        assert_eq!(m.a(), &DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]));
        assert_eq!(m.b(), DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
    }

    #[test]
    fn mirror_matrix_entries() {
        let m = build_bdg(&ModelPreset::Mirror5.profile(), 0.0).unwrap();
        let h = m.assembled();
        // Hopping and pairing blocks carry -J/2 above the diagonal.
        for (i, j) in [2.0, 4.0, 4.0, 2.0].iter().enumerate() {
            assert_eq!(h[(i, i + 1)].re, -j / 2.0);
            assert_eq!(h[(i, 5 + i + 1)].re, -j / 2.0);
            assert_eq!(h[(i + 1, 5 + i)].re, j / 2.0);
            assert_eq!(h[(5 + i, i + 1)].re, j / 2.0);
            assert_eq!(h[(5 + i, 5 + i + 1)].re, j / 2.0);
        }
        assert!(linalg::hermiticity_error(&h) == 0.0);
    }

    #[test]
    fn mirror_and_defect_spectra() {
        for preset in [ModelPreset::Mirror5, ModelPreset::Defect5] {
            let spec = bdg_spectrum(&build_bdg(&preset.profile(), 0.0).unwrap());
            let expect = [-4.0, -4.0, -2.0, -2.0, 0.0, 0.0, 2.0, 2.0, 4.0, 4.0];
            for (e, x) in spec.eigenvalues.iter().zip(expect) {
                assert!((e - x).abs() < 1e-10, "{preset}: {:?}", spec.eigenvalues);
            }
            assert_eq!(spec.count(ModeLabel::UnpairedZeroMode), 2);
            assert!(linalg::unitarity_error(&spec.eigenvectors) < 1e-9);
        }
    }

    #[test]
    fn mirror_classification() {
        let spec = bdg_spectrum(&build_bdg(&ModelPreset::Mirror5.profile(), 0.0).unwrap());
        let zero: Vec<usize> = (0..10).filter(|&k| spec.labels[k] == ModeLabel::UnpairedZeroMode).collect();
        let sites: Vec<usize> = zero.iter().map(|&k| spec.dominant_site(k)).collect();
        assert_eq!(sites, vec![0, 4]);
        for &k in &zero {
            assert!(spec.site_weights[k][spec.dominant_site(k)] >= 0.9);
        }
        // Zero modes are mirror images of each other.
        let (a, b) = (&spec.site_weights[zero[0]], &spec.site_weights[zero[1]]);
        for j in 0..5 {
            assert!((a[j] - b[4 - j]).abs() < 1e-9);
        }
        assert_eq!(spec.count(ModeLabel::UnpairedHighEnergyPoint), 4);
        for k in 0..10 {
            if spec.labels[k] == ModeLabel::UnpairedHighEnergyPoint {
                assert_eq!(spec.dominant_site(k), 2);
                assert!((spec.eigenvalues[k].abs() - 4.0).abs() < 1e-9);
            }
        }
        assert_eq!(spec.count(ModeLabel::DefectMode), 0);
    }

    #[test]
    fn defect_classification() {
        let spec = bdg_spectrum(&build_bdg(&ModelPreset::Defect5.profile(), 0.0).unwrap());
        assert!(spec.count(ModeLabel::DefectMode) > 0);
        for k in 0..10 {
            if spec.labels[k] == ModeLabel::DefectMode {
                assert_eq!(spec.dominant_site(k), 2);
            }
        }
        let zero_sites: Vec<usize> =
            (0..10).filter(|&k| spec.labels[k] == ModeLabel::UnpairedZeroMode).map(|k| spec.dominant_site(k)).collect();
        assert_eq!(zero_sites, vec![0, 4]);
        assert_eq!(spec.count(ModeLabel::UnpairedHighEnergyPoint), 0);
    }

    #[test]
    fn uniform_has_only_edge_zero_modes() {
        let spec = bdg_spectrum(&build_bdg(&ModelPreset::Uniform5.profile(), 0.0).unwrap());
        assert_eq!(spec.count(ModeLabel::UnpairedZeroMode), 2);
        assert_eq!(spec.count(ModeLabel::DefectMode), 0);
        assert_eq!(spec.count(ModeLabel::UnpairedHighEnergyPoint), 0);
    }

    #[test]
    fn many_body_levels_match_exact_diagonalization() {
        for preset in [ModelPreset::Mirror5, ModelPreset::Defect5, ModelPreset::Staggered5] {
            for h in [0.0, 1.0] {
                let p = preset.profile().with_field(h);
                let spec = bdg_spectrum(&build_bdg(&p, h).unwrap());
                let levels = many_body_levels(&spec.quasiparticle_energies());
                let (ed, _) = linalg::eigh(&build_hamiltonian(&p, true).unwrap());
                for (a, b) in levels.iter().zip(&ed) {
                    assert!((a - b).abs() < 1e-9, "{preset} h={h}: {a} vs {b}");
                }
            }
        }
        // Ground-state gap to the first excitation is 2 E_min over the nonzero levels.
        let spec = bdg_spectrum(&build_bdg(&ModelPreset::Mirror5.profile(), 0.0).unwrap());
        let (ed, _) = linalg::eigh(&build_hamiltonian(&ModelPreset::Mirror5.profile(), false).unwrap());
        let mut gaps: Vec<f64> = ed.iter().map(|e| e - ed[0]).filter(|g| *g > 1e-9).collect();
        gaps.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let e_min = spec.quasiparticle_energies().into_iter().filter(|e| *e > 1e-9).fold(f64::INFINITY, f64::min);
        assert!((e_min - 2.0).abs() < 1e-9);
        assert!((gaps[0] - EXCITATION_SCALE * e_min).abs() < 1e-9);
    }

    #[test]
    fn jordan_wigner_small_chains() {
        let two = jordan_wigner_check(&CouplingProfile::new(vec![1.5], 0.0).unwrap(), 0.7).unwrap();
        assert!(two.passed, "{two:?}");
        let four = jordan_wigner_check(&CouplingProfile::new(vec![1.0, -0.5, 2.0], 0.3).unwrap(), 0.3).unwrap();
        assert!(four.anticommutator_error == 0.0);
        let mirror = jordan_wigner_check(&ModelPreset::Mirror5.profile(), 1.0).unwrap();
        assert!(mirror.passed, "{mirror:?}");
        assert!(jordan_wigner_check(&CouplingProfile::new(vec![1.0; 10], 1.0).unwrap(), 1.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let spec = bdg_spectrum(&build_bdg(&ModelPreset::Mirror5.profile(), 0.0).unwrap());
        let mut buf = Vec::new();
        spec.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,eigenvalue,label,ipr,w1,w2,w3,w4,w5\n1,"));
        assert_eq!(text.lines().count(), 11);
    }

    fn arb_profile() -> impl Strategy<Value = CouplingProfile> {
        (2usize..7)
            .prop_flat_map(|n| (prop::collection::vec(-3.0f64..3.0, n - 1), -2.0f64..2.0))
            .prop_map(|(j, h)| CouplingProfile::new(j, h).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn particle_hole_symmetry(p in arb_profile()) {
            let m = build_bdg(&p, p.field).unwrap();
            let a = m.a();
            let b = m.b();
            prop_assert!((a - a.transpose()).amax() <= 1e-12);
            prop_assert!((&b + b.transpose()).amax() <= 1e-12);
            let spec = bdg_spectrum(&m);
            let v = &spec.eigenvalues;
            for i in 0..v.len() {
                prop_assert!((v[i] + v[v.len() - 1 - i]).abs() < 1e-10);
            }
            prop_assert!(linalg::unitarity_error(&spec.eigenvectors) < 1e-9);
        }

        #[test]
        fn labels_survive_rescaling(lambda in 0.1f64..10.0) {
            for preset in [ModelPreset::Mirror5, ModelPreset::Defect5, ModelPreset::Uniform5] {
                let p = preset.profile();
                let base = bdg_spectrum(&build_bdg(&p, 0.0).unwrap());
                let scaled = bdg_spectrum(&build_bdg(&p.scaled(lambda), 0.0).unwrap());
                prop_assert_eq!(&base.labels, &scaled.labels);
                for (a, b) in sorted_abs(&base).iter().zip(sorted_abs(&scaled)) {
                    prop_assert!((a * lambda - b).abs() < 1e-9 * lambda.max(1.0));
                }
                for (a, b) in base.ipr.iter().zip(&scaled.ipr) {
                    prop_assert!((a - b).abs() < 1e-8);
                }
            }
        }
    }
}
