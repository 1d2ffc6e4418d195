// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Per-qubit magnetization time series and their CSV form.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};

/// Which engine produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSource {
    Exact,
    CompiledIdeal,
    CompiledNoisy,
    TrotterIdeal,
    TrotterNoisy,
}

impl TraceSource {
    pub fn label(self) -> &'static str {
        match self {
            TraceSource::Exact => "exact",
            TraceSource::CompiledIdeal => "compiled_ideal",
            TraceSource::CompiledNoisy => "compiled_noisy",
            TraceSource::TrotterIdeal => "trotter_ideal",
            TraceSource::TrotterNoisy => "trotter_noisy",
        }
    }
}

impl fmt::Display for TraceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// `magnetization[i][t]` is `<Z_{i+1}>` at `times[t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsTrace {
    pub times: Vec<f64>,
    pub magnetization: Vec<Vec<f64>>,
    pub source: TraceSource,
    pub sampled: bool,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
}

impl DynamicsTrace {
    pub fn n_qubits(&self) -> usize {
        self.magnetization.len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn qubit(&self, q: usize) -> &[f64] {
        &self.magnetization[q]
    }

    /// Grid spacing, or an error when the grid is not uniform and increasing.
    pub fn uniform_dt(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(validation("time grid needs at least two points"));
        }
        let dt = self.times[1] - self.times[0];
        if dt <= 0.0 {
            return Err(validation("time grid must be strictly increasing"));
        }
        for (k, w) in self.times.windows(2).enumerate() {
            let step = w[1] - w[0];
            if (step - dt).abs() > 1e-9 * dt.max(1.0) * (k + 1) as f64 {
                return Err(validation(format!("non-uniform time grid at index {}", k + 1)));
            }
        }
        Ok(dt)
    }

    pub fn validate(&self) -> Result<()> {
        for row in &self.magnetization {
            if row.len() != self.times.len() {
                return Err(Error::Dimension { expected: self.times.len(), found: row.len() });
            }
        }
        if self.times.len() >= 2 {
            self.uniform_dt()?;
        }
        Ok(())
    }

    /// Largest pointwise `|a - b|` over all qubits and times.
    pub fn max_deviation(&self, other: &DynamicsTrace) -> Result<f64> {
        if self.n_qubits() != other.n_qubits() || self.len() != other.len() {
            return Err(validation("traces have different shapes"));
        }
        Ok(self
            .magnetization
            .iter()
            .zip(&other.magnetization)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max))
    }

    pub fn mean_deviation(&self, other: &DynamicsTrace) -> Result<f64> {
        self.max_deviation(other)?;
        let total: f64 = self
            .magnetization
            .iter()
            .zip(&other.magnetization)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .sum();
        Ok(total / (self.n_qubits() * self.len()) as f64)
    }

    /// `time,qubit,magnetization`, one row per (t, i), qubits from 1.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "time,qubit,magnetization")?;
        for (t, time) in self.times.iter().enumerate() {
            for (q, row) in self.magnetization.iter().enumerate() {
                writeln!(w, "{},{},{}", time, q + 1, row[t])?;
            }
        }
        Ok(())
    }

    /// Inverse of [`write_csv`](Self::write_csv); provenance fields are supplied by the caller.
    pub fn read_csv<R: BufRead>(r: R, source: TraceSource, sampled: bool) -> Result<Self> {
        let mut times: Vec<f64> = Vec::new();
        let mut columns: Vec<Vec<f64>> = Vec::new();
        for (idx, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            if idx == 0 {
                if line.trim() != "time,qubit,magnetization" {
                    return Err(Error::Parse { line: lineno, message: "bad header".into() });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse { line: lineno, message: "expected 3 fields".into() });
            }
            let parse_err = |m: &str| Error::Parse { line: lineno, message: m.to_string() };
            let time = f64::from_str(fields[0]).map_err(|_| parse_err("bad time"))?;
            let qubit = usize::from_str(fields[1]).map_err(|_| parse_err("bad qubit"))?;
            let value = f64::from_str(fields[2]).map_err(|_| parse_err("bad magnetization"))?;
            if qubit == 0 {
                return Err(parse_err("qubits are numbered from 1"));
            }
            if times.last() != Some(&time) {
                times.push(time);
            }
            if columns.len() < qubit {
                columns.resize_with(qubit, Vec::new);
            }
            let col = &mut columns[qubit - 1];
            if col.len() + 1 != times.len() {
                return Err(parse_err("rows out of order"));
            }
            col.push(value);
        }
        let trace = DynamicsTrace { times, magnetization: columns, source, sampled, shots: None, seed: None };
        trace.validate()?;
        Ok(trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let trace = DynamicsTrace {
            times: vec![0.0, 0.1, 0.2],
            magnetization: vec![vec![1.0, 0.5, -0.25], vec![1.0, 0.75, 0.125]],
            source: TraceSource::Exact,
            sampled: false,
            shots: None,
            seed: None,
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("time,qubit,magnetization\n0,1,1\n0,2,1\n0.1,1,0.5\n"));
        let back = DynamicsTrace::read_csv(&buf[..], TraceSource::Exact, false).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn rejects_irregular_grid() {
        let trace = DynamicsTrace {
            times: vec![0.0, 0.1, 0.3],
            magnetization: vec![vec![0.0; 3]],
            source: TraceSource::Exact,
            sampled: false,
            shots: None,
            seed: None,
        };
        assert!(trace.uniform_dt().is_err());
    }
}
