//! Compiles a Bayesian network into RY / multi-controlled RY gates and
//! simulates the result.

use std::fmt;

use thiserror::Error;

use crate::bayesnet::{BayesNet, Violations};
use crate::statevector::{Control, Gate, SimError, Statevector, MAX_QUBITS};

/// Jitter tolerated outside [0, 1] before a probability is rejected.
const CLAMP_SLACK: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("probability {0} outside [0, 1]")]
    Domain(f64),
    #[error(transparent)]
    Invalid(#[from] Violations),
    #[error("{0} variables exceed the {MAX_QUBITS}-qubit register cap")]
    Capacity(usize),
}

/// Rotation angle whose RY puts probability `p` on |1⟩: `2·asin(√p)`.
pub fn angle_for_probability(p: f64) -> Result<f64, CompileError> {
    let clamped = if (0.0..=1.0).contains(&p) {
        p
    } else if (-CLAMP_SLACK..0.0).contains(&p) {
        0.0
    } else if p > 1.0 && p <= 1.0 + CLAMP_SLACK {
        1.0
    } else {
        return Err(CompileError::Domain(p));
    };
    Ok(2.0 * clamped.sqrt().asin())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self, SimError> {
        for g in &gates {
            g.validate(n_qubits)?;
        }
        Ok(Circuit { n_qubits, gates })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Applies the gates left to right to |0...0⟩.
    pub fn simulate(&self) -> Result<Statevector, SimError> {
        let mut sv = Statevector::new_zero_state(self.n_qubits)?;
        for g in &self.gates {
            sv.apply_gate(g)?;
        }
        Ok(sv)
    }
}

/// One gate per line: `RY q<t> <theta>` or `CRY [+q<i> -q<j> ...] q<t> <theta>`.
impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.gates {
            match g {
                Gate::Ry { target, theta } => {
                    writeln!(f, "RY q{target} {}", format_angle(*theta))?;
                }
                Gate::ControlledRy {
                    controls,
                    target,
                    theta,
                } => {
                    let cs: Vec<String> = controls.iter().map(ToString::to_string).collect();
                    writeln!(
                        f,
                        "CRY [{}] q{target} {}",
                        cs.join(" "),
                        format_angle(*theta)
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Fixed-point rendering with 17 significant digits.
pub fn format_angle(theta: f64) -> String {
    if theta == 0.0 {
        return format!("{:.16}", 0.0);
    }
    let magnitude = theta.abs().log10().floor() as i32;
    let decimals = (16 - magnitude).max(0) as usize;
    format!("{theta:.decimals$}")
}

/// Emits gates variable by variable in topological order: one RY for a root,
/// one controlled RY per CPT row otherwise (rows in ascending order, first
/// parent most significant).
pub fn compile(net: &BayesNet) -> Result<Circuit, CompileError> {
    let violations = net.validate();
    if !violations.is_empty() {
        return Err(Violations(violations).into());
    }
    if net.len() > MAX_QUBITS {
        return Err(CompileError::Capacity(net.len()));
    }
    let order = net
        .topological_order()
        .expect("validated network is acyclic");
    let mut gates = Vec::new();
    for v in order {
        let cpt = net.cpt(v);
        if cpt.is_root() {
            gates.push(Gate::Ry {
                target: v,
                theta: angle_for_probability(cpt.rows()[0])?,
            });
            continue;
        }
        for (row, &p) in cpt.rows().iter().enumerate() {
            let controls = cpt
                .parents()
                .iter()
                .zip(cpt.row_bits(row))
                .map(|(&q, bit)| {
                    if bit {
                        Control::positive(q)
                    } else {
                        Control::negative(q)
                    }
                })
                .collect();
            gates.push(Gate::ControlledRy {
                controls,
                target: v,
                theta: angle_for_probability(p)?,
            });
        }
    }
    Ok(Circuit {
        n_qubits: net.len(),
        gates,
    })
}
