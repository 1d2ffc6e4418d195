// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

//! OpenQASM 2.0 for the `rx`, `rz`, `cx`, `h` subset.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::circuit::{Gate, NativeGateSequence};
use crate::error::{Error, Result};

/// Program text with a single `q` register and a final measurement.
pub fn to_qasm(seq: &NativeGateSequence) -> String {
    let n = seq.n_qubits;
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{n}];\ncreg c[{n}];");
    for g in &seq.gates {
        let _ = match *g {
            Gate::Rx { qubit, angle } => writeln!(out, "rx({angle:?}) q[{qubit}];"),
            Gate::Rz { qubit, angle } => writeln!(out, "rz({angle:?}) q[{qubit}];"),
            Gate::Cnot { control, target } => writeln!(out, "cx q[{control}],q[{target}];"),
            Gate::H { qubit } => writeln!(out, "h q[{qubit}];"),
        };
    }
    out.push_str("measure q -> c;\n");
    out
}

/// Parse a program written in the supported subset. `creg`, `measure` and
/// `barrier` statements are accepted and ignored.
pub fn from_qasm(text: &str) -> Result<NativeGateSequence> {
    let mut n_qubits: Option<usize> = None;
    let mut gates = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| Error::Parse { line: line_no, message };
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        for stmt in line.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (head, rest) = match stmt.find(|c: char| c.is_whitespace() || c == '(') {
                Some(i) => (&stmt[..i], stmt[i..].trim()),
                None => (stmt, ""),
            };
            match head {
                "OPENQASM" => {
                    if rest != "2.0" {
                        return Err(err(format!("unsupported version {rest}")));
                    }
                }
                "include" | "creg" | "measure" | "barrier" => {}
                "qreg" => {
                    if n_qubits.is_some() {
                        return Err(err("only one qreg is supported".into()));
                    }
                    n_qubits = Some(register_size(rest).ok_or_else(|| err(format!("bad qreg {rest:?}")))?);
                }
                "rx" | "rz" => {
                    let close = rest.find(')').ok_or_else(|| err("missing ')'".into()))?;
                    let angle = eval_angle(rest[1..close].trim())
                        .ok_or_else(|| err(format!("bad angle {:?}", &rest[1..close])))?;
                    let qubit = qubit_ref(rest[close + 1..].trim()).ok_or_else(|| err("bad operand".into()))?;
                    gates.push(if head == "rx" { Gate::Rx { qubit, angle } } else { Gate::Rz { qubit, angle } });
                }
                "h" => {
                    let qubit = qubit_ref(rest).ok_or_else(|| err("bad operand".into()))?;
                    gates.push(Gate::H { qubit });
                }
                "cx" => {
                    let mut ops = rest.split(',').map(str::trim);
                    let (Some(c), Some(t), None) = (ops.next(), ops.next(), ops.next()) else {
                        return Err(err("cx needs two operands".into()));
                    };
                    let control = qubit_ref(c).ok_or_else(|| err("bad control".into()))?;
                    let target = qubit_ref(t).ok_or_else(|| err("bad target".into()))?;
                    gates.push(Gate::Cnot { control, target });
                }
                other => return Err(err(format!("unsupported statement {other:?}"))),
            }
        }
    }
    let n_qubits = n_qubits.ok_or(Error::Parse { line: 0, message: "missing qreg".into() })?;
    let seq = NativeGateSequence { n_qubits, gates };
    seq.validate()?;
    Ok(seq)
}

fn register_size(decl: &str) -> Option<usize> {
    let open = decl.find('[')?;
    let close = decl.find(']')?;
    decl[open + 1..close].trim().parse().ok()
}

fn qubit_ref(op: &str) -> Option<usize> {
    let op = op.trim();
    if !op.starts_with("q[") || !op.ends_with(']') {
        return None;
    }
    op[2..op.len() - 1].trim().parse().ok()
}

/// Products and quotients of numbers and `pi`, with an optional leading sign.
fn eval_angle(expr: &str) -> Option<f64> {
    let (sign, body) = match expr.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, expr.strip_prefix('+').unwrap_or(expr).trim()),
    };
    let mut value = 1.0;
    let mut op = '*';
    let mut token = String::new();
    let apply = |value: f64, op: char, token: &str| -> Option<f64> {
        let t = token.trim();
        let x = if t == "pi" { PI } else { t.parse::<f64>().ok()? };
        Some(if op == '*' { value * x } else { value / x })
    };
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        if (c == '*' || c == '/') && !token.trim().is_empty() {
            value = apply(value, op, &token)?;
            op = c;
            token.clear();
        } else {
            token.push(c);
            // Keep exponent signs such as 1e-3 inside the number.
            if (c == 'e' || c == 'E') && matches!(chars.peek(), Some('-') | Some('+')) {
                token.push(chars.next()?);
            }
        }
    }
    value = apply(value, op, &token)?;
    Some(sign * value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let seq = NativeGateSequence {
            n_qubits: 3,
            gates: vec![
                Gate::H { qubit: 0 },
                Gate::Rx { qubit: 1, angle: 0.1 + 0.2 },
                Gate::Cnot { control: 1, target: 2 },
                Gate::Rz { qubit: 2, angle: -1.234_567_890_123e-7 },
            ],
        };
        let text = to_qasm(&seq);
        assert!(text.contains("cx q[1],q[2];"));
        assert_eq!(from_qasm(&text).unwrap(), seq);
    }

    #[test]
    fn accepts_pi_expressions_and_rejects_unknown_gates() {
        let seq = from_qasm("OPENQASM 2.0;\nqreg q[2];\nrx(-pi/2) q[0];\nrz(pi*0.5) q[1]; // note\n").unwrap();
        assert_eq!(seq.gates[0].angle(), Some(-PI / 2.0));
        assert_eq!(seq.gates[1].angle(), Some(PI * 0.5));
        assert!(from_qasm("OPENQASM 2.0;\nqreg q[2];\nu3(0,0,0) q[0];\n").is_err());
        assert!(from_qasm("OPENQASM 2.0;\nqreg q[2];\nh q[5];\n").is_err());
    }
}
