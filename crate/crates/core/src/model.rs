// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Spin-chain models `H = -Σ J_i Z_i Z_{i+1} - h_x Σ X_i` with open boundaries.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::linalg::CMatrix;
use num_complex::Complex64;

/// Default cap on the number of sites for dense 2^N matrices.
pub const DEFAULT_MAX_SITES: usize = 12;

/// Per-bond Z couplings and a uniform X field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingProfile {
    pub n_sites: usize,
    pub couplings: Vec<f64>,
    pub field: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl CouplingProfile {
    pub fn new(couplings: Vec<f64>, field: f64) -> Result<Self> {
        let profile = CouplingProfile { n_sites: couplings.len() + 1, couplings, field, name: None };
        profile.validate()?;
        Ok(profile)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(validation(format!("need at least 2 sites, got {}", self.n_sites)));
        }
        if self.couplings.len() != self.n_sites - 1 {
            return Err(validation(format!(
                "{} sites need {} couplings, got {}",
                self.n_sites,
                self.n_sites - 1,
                self.couplings.len()
            )));
        }
        if !self.field.is_finite() || self.couplings.iter().any(|j| !j.is_finite()) {
            return Err(validation("couplings and field must be finite"));
        }
        Ok(())
    }

    /// Same couplings, different field.
    pub fn with_field(&self, field: f64) -> Self {
        CouplingProfile { field, ..self.clone() }
    }

    /// Couplings and field multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        CouplingProfile {
            couplings: self.couplings.iter().map(|j| j * factor).collect(),
            field: self.field * factor,
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }
}

/// Named coupling profiles used throughout the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelPreset {
    Staggered5,
    Mirror5,
    Defect5,
    Uniform5,
    Staggered7,
    DefectWeak7,
    DefectStrong7,
    Uniform7,
}

impl ModelPreset {
    pub const ALL: [ModelPreset; 8] = [
        ModelPreset::Staggered5,
        ModelPreset::Mirror5,
        ModelPreset::Defect5,
        ModelPreset::Uniform5,
        ModelPreset::Staggered7,
        ModelPreset::DefectWeak7,
        ModelPreset::DefectStrong7,
        ModelPreset::Uniform7,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ModelPreset::Staggered5 => "staggered5",
            ModelPreset::Mirror5 => "mirror5",
            ModelPreset::Defect5 => "defect5",
            ModelPreset::Uniform5 => "uniform5",
            ModelPreset::Staggered7 => "staggered7",
            ModelPreset::DefectWeak7 => "defect-weak7",
            ModelPreset::DefectStrong7 => "defect-strong7",
            ModelPreset::Uniform7 => "uniform7",
        }
    }

    pub fn couplings(self) -> &'static [f64] {
        match self {
            ModelPreset::Staggered5 => &[2.0, 4.0, 2.0, 4.0],
            ModelPreset::Mirror5 => &[2.0, 4.0, 4.0, 2.0],
            ModelPreset::Defect5 => &[4.0, 2.0, 2.0, 4.0],
            ModelPreset::Uniform5 => &[2.0, 2.0, 2.0, 2.0],
            ModelPreset::Staggered7 => &[2.0, 4.0, 2.0, 4.0, 2.0, 4.0],
            ModelPreset::DefectWeak7 => &[2.0, 4.0, 2.0, 2.0, 4.0, 2.0],
            ModelPreset::DefectStrong7 => &[4.0, 2.0, 4.0, 4.0, 2.0, 4.0],
            ModelPreset::Uniform7 => &[2.0, 2.0, 2.0, 2.0, 2.0, 2.0],
        }
    }

    pub fn profile(self) -> CouplingProfile {
        CouplingProfile {
            n_sites: self.couplings().len() + 1,
            couplings: self.couplings().to_vec(),
            field: 1.0,
            name: Some(self.label().to_string()),
        }
    }

    /// Recover the preset a profile came from, by label first and then by
    /// exact parameter match.
    pub fn from_profile(profile: &CouplingProfile) -> Option<ModelPreset> {
        if let Some(p) = profile.name.as_deref().and_then(|n| n.parse().ok()) {
            return Some(p);
        }
        ModelPreset::ALL.into_iter().find(|p| p.couplings() == profile.couplings.as_slice() && profile.field == 1.0)
    }
}

impl fmt::Display for ModelPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelPreset::ALL.into_iter().find(|p| p.label() == s).ok_or_else(|| validation(format!("unknown preset {s:?}")))
    }
}

/// Dense `-Σ J_i Z_i Z_{i+1} - h_x Σ X_i` (field omitted unless
/// `include_field`), capped at [`DEFAULT_MAX_SITES`].
pub fn build_hamiltonian(profile: &CouplingProfile, include_field: bool) -> Result<CMatrix> {
    build_hamiltonian_capped(profile, include_field, DEFAULT_MAX_SITES)
}

pub fn build_hamiltonian_capped(profile: &CouplingProfile, include_field: bool, max_sites: usize) -> Result<CMatrix> {
    profile.validate()?;
    let n = profile.n_sites;
    if n > max_sites {
        return Err(Error::Resource(format!("{n} sites exceeds the dense-matrix cap of {max_sites}")));
    }
    let dim = 1usize << n;
    let mut h = CMatrix::zeros(dim, dim);
    for x in 0..dim {
        let spin = |q: usize| if (x >> q) & 1 == 0 { 1.0 } else { -1.0 };
        let diag: f64 = profile.couplings.iter().enumerate().map(|(i, j)| -j * spin(i) * spin(i + 1)).sum();
        h[(x, x)] = Complex64::new(diag, 0.0);
        if include_field && profile.field != 0.0 {
            for q in 0..n {
                h[(x ^ (1 << q), x)] -= Complex64::new(profile.field, 0.0);
            }
        }
    }
    Ok(h)
}

/// `(H_initial, H_final)`: field off before the quench, on after it.
pub fn quench_pair(profile: &CouplingProfile) -> Result<(CMatrix, CMatrix)> {
    Ok((build_hamiltonian(profile, false)?, build_hamiltonian(profile, true)?))
}
