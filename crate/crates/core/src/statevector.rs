//! Dense complex statevector and the RY-family gate kernels.
//!
//! Qubit `k` lives in bit `k` of the basis index (qubit 0 is the least
//! significant bit). Gates are applied in place by walking the amplitude
//! pairs that differ only in the target bit.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::numeric::compensated_sum;

/// Largest register the simulator will allocate (2^24 amplitudes, ~256 MiB).
pub const MAX_QUBITS: usize = 24;

/// Registers at or above this many qubits use the parallel kernel.
const PARALLEL_THRESHOLD: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("qubit count {0} outside supported range 1..={MAX_QUBITS}")]
    Capacity(usize),
    #[error("qubit index {index} out of range for {n_qubits}-qubit register")]
    QubitIndex { index: usize, n_qubits: usize },
    #[error("invalid gate: {0}")]
    InvalidGate(String),
}

/// Which control value activates a controlled gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    /// Matches basis states where the control bit is 1.
    Positive,
    /// Matches basis states where the control bit is 0.
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn positive(qubit: usize) -> Self {
        Control {
            qubit,
            polarity: Polarity::Positive,
        }
    }

    pub fn negative(qubit: usize) -> Self {
        Control {
            qubit,
            polarity: Polarity::Negative,
        }
    }
}

impl fmt::Display for Control {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.polarity {
            Polarity::Positive => '+',
            Polarity::Negative => '-',
        };
        write!(f, "{sign}q{}", self.qubit)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Ry {
        target: usize,
        theta: f64,
    },
    ControlledRy {
        controls: Vec<Control>,
        target: usize,
        theta: f64,
    },
}

impl Gate {
    pub fn target(&self) -> usize {
        match self {
            Gate::Ry { target, .. } | Gate::ControlledRy { target, .. } => *target,
        }
    }

    pub fn theta(&self) -> f64 {
        match self {
            Gate::Ry { theta, .. } | Gate::ControlledRy { theta, .. } => *theta,
        }
    }

    pub fn controls(&self) -> &[Control] {
        match self {
            Gate::Ry { .. } => &[],
            Gate::ControlledRy { controls, .. } => controls,
        }
    }

    /// Checks index bounds and that target and controls are pairwise distinct.
    pub fn validate(&self, n_qubits: usize) -> Result<(), SimError> {
        check_gate(self.controls(), self.target(), n_qubits)?;
        if !self.theta().is_finite() {
            return Err(SimError::InvalidGate(format!(
                "non-finite angle {}",
                self.theta()
            )));
        }
        Ok(())
    }
}

fn check_gate(controls: &[Control], target: usize, n_qubits: usize) -> Result<(), SimError> {
    if target >= n_qubits {
        return Err(SimError::QubitIndex {
            index: target,
            n_qubits,
        });
    }
    let mut seen = 1usize << target;
    for c in controls {
        if c.qubit >= n_qubits {
            return Err(SimError::QubitIndex {
                index: c.qubit,
                n_qubits,
            });
        }
        let bit = 1usize << c.qubit;
        if seen & bit != 0 {
            let what = if c.qubit == target {
                "control coincides with target"
            } else {
                "duplicate control"
            };
            return Err(SimError::InvalidGate(format!("{what} q{}", c.qubit)));
        }
        seen |= bit;
    }
    Ok(())
}

/// Exact pure state of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// The all-zeros basis state |0...0⟩.
    pub fn new_zero_state(n_qubits: usize) -> Result<Self, SimError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(SimError::Capacity(n_qubits));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Statevector {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes. The length must be a power of two within the cap;
    /// normalization is the caller's concern.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, SimError> {
        let len = amplitudes.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(SimError::Capacity(0));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(SimError::Capacity(n_qubits));
        }
        Ok(Statevector {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn apply_ry(&mut self, target: usize, theta: f64) -> Result<(), SimError> {
        self.apply_controlled_ry(&[], target, theta)
    }

    /// Rotates `target` by RY(`theta`) on the subspace where every control
    /// matches its polarity. Amplitudes outside that subspace are not touched.
    pub fn apply_controlled_ry(
        &mut self,
        controls: &[Control],
        target: usize,
        theta: f64,
    ) -> Result<(), SimError> {
        check_gate(controls, target, self.n_qubits)?;
        let (mask, pattern) = control_mask(controls);
        let (s, c) = half_angle_sin_cos(theta);
        let stride = 1usize << target;
        let kernel = |base: usize, lo: &mut [Complex64], hi: &mut [Complex64]| {
            for (offset, (a0, a1)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                if (base + offset) & mask != pattern {
                    continue;
                }
                let (x, y) = (*a0, *a1);
                *a0 = x * c - y * s;
                *a1 = x * s + y * c;
            }
        };
        let block = stride << 1;
        if self.n_qubits >= PARALLEL_THRESHOLD {
            self.amplitudes
                .par_chunks_mut(block)
                .enumerate()
                .for_each(|(k, chunk)| {
                    let (lo, hi) = chunk.split_at_mut(stride);
                    kernel(k * block, lo, hi);
                });
        } else {
            for (k, chunk) in self.amplitudes.chunks_mut(block).enumerate() {
                let (lo, hi) = chunk.split_at_mut(stride);
                kernel(k * block, lo, hi);
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), SimError> {
        gate.validate(self.n_qubits)?;
        self.apply_controlled_ry(gate.controls(), gate.target(), gate.theta())
    }

    /// Born-rule probabilities `|c_i|²`, indexed like the amplitudes.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `Σ|c_i|²` with compensated summation.
    pub fn norm_sqr(&self) -> f64 {
        compensated_sum(self.amplitudes.iter().map(|a| a.norm_sqr()))
    }
}

/// Bit mask over the control qubits and the bit pattern they must show.
fn control_mask(controls: &[Control]) -> (usize, usize) {
    controls.iter().fold((0, 0), |(mask, pattern), c| {
        let bit = 1usize << c.qubit;
        match c.polarity {
            Polarity::Positive => (mask | bit, pattern | bit),
            Polarity::Negative => (mask | bit, pattern),
        }
    })
}

/// `sin(θ/2), cos(θ/2)` with rounding residue below one ulp of 1 flushed to
/// zero, so rotations by 0 or π (probabilities 0 and 1) leave exact zeros
/// instead of ~1e-33 ghost mass.
fn half_angle_sin_cos(theta: f64) -> (f64, f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    let flush = |v: f64| if v.abs() < f64::EPSILON / 2.0 { 0.0 } else { v };
    (flush(s), flush(c))
}
