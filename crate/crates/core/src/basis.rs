// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Computational-basis labels.
//!
//! Labels are written most-significant qubit first, so the right-most
//! character is qubit 1 (bit 0 of the basis index).

use crate::error::{validation, Result};

/// Basis index of a label such as `"00001"` (qubit 1 set → index 1).
pub fn parse_basis_label(label: &str, n_qubits: usize) -> Result<usize> {
    if label.len() != n_qubits {
        return Err(validation(format!("basis label {label:?} has {} characters, expected {n_qubits}", label.len())));
    }
    let mut index = 0usize;
    for ch in label.chars() {
        index <<= 1;
        match ch {
            '0' => {}
            '1' => index |= 1,
            _ => return Err(validation(format!("basis label {label:?} may only contain 0 and 1"))),
        }
    }
    Ok(index)
}

pub fn format_basis_label(index: usize, n_qubits: usize) -> String {
    (0..n_qubits).rev().map(|q| if (index >> q) & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn zeros_label(n_qubits: usize) -> String {
    "0".repeat(n_qubits)
}
