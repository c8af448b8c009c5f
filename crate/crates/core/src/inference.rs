//! Joint, marginal and conditional distributions read off a simulated
//! statevector.
//!
//! Conditioning is symbolic post-selection: squared amplitudes that disagree
//! with the evidence are dropped and the rest renormalized. Every query runs
//! against the joint [`Distribution`] extracted once per simulation, and none
//! of them mutate it.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::bayesnet::BayesNet;
use crate::circuit::{compile, CompileError};
use crate::numeric::compensated_sum;
use crate::statevector::{SimError, Statevector};

/// Evidence mass at or below this is treated as zero.
pub const IMPOSSIBLE_EVIDENCE_MASS: f64 = 1e-300;

/// Tolerance on `|Σ|c_i|² − 1|` after simulation.
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("statevector has {statevector} qubits but the network has {network} variables")]
    QubitMismatch { statevector: usize, network: usize },
    #[error("variable {0} is not in the distribution's scope")]
    NotInScope(usize),
    #[error("variable {0} appears both as a target and as evidence")]
    Overlap(usize),
    #[error("variable {0} listed more than once")]
    Repeated(usize),
    #[error("no target variables given")]
    NoTargets,
    #[error("impossible evidence: conditioning event has zero probability")]
    ImpossibleEvidence,
    #[error("distributions have different scopes")]
    ScopeMismatch,
    #[error("mutual information needs two distinct variables")]
    SameVariable,
    #[error("malformed distribution: {0}")]
    Malformed(String),
    #[error("statevector norm drifted: |Σ|c|² − 1| = {0:e}")]
    NormViolation(f64),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Simulation(#[from] SimError),
}

/// Fixed values for a set of variables, keyed by variable index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<usize, bool>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fails on a variable bound twice, even to the same value.
    pub fn from_pairs<I: IntoIterator<Item = (usize, bool)>>(
        pairs: I,
    ) -> Result<Self, InferenceError> {
        let mut map = BTreeMap::new();
        for (v, b) in pairs {
            if map.insert(v, b).is_some() {
                return Err(InferenceError::Repeated(v));
            }
        }
        Ok(Assignment(map))
    }

    pub fn with(mut self, var: usize, bit: bool) -> Self {
        self.0.insert(var, bit);
        self
    }

    pub fn get(&self, var: usize) -> Option<bool> {
        self.0.get(&var).copied()
    }

    pub fn contains(&self, var: usize) -> bool {
        self.0.contains_key(&var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.0.iter().map(|(&v, &b)| (v, b))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A bit-tuple over a distribution's scope, first scope variable first.
/// Orders lexicographically, i.e. by integer value with the first bit most
/// significant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome(pub Vec<bool>);

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Outcome {
    type Err = InferenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(InferenceError::Malformed(format!("bad outcome {s:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Outcome)
    }
}

/// Dense probability table over a scope of variables.
///
/// Internally entry `i` has scope variable `k` in bit `k` of `i`, mirroring
/// the statevector layout; [`Outcome`]s expose the scope-ordered view.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    scope: Vec<usize>,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(scope: Vec<usize>, probs: Vec<f64>) -> Result<Self, InferenceError> {
        if scope.len() > 24 || probs.len() != 1usize << scope.len() {
            return Err(InferenceError::Malformed(format!(
                "{} entries for a scope of {} variables",
                probs.len(),
                scope.len()
            )));
        }
        for (k, v) in scope.iter().enumerate() {
            if scope[..k].contains(v) {
                return Err(InferenceError::Repeated(*v));
            }
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(InferenceError::Malformed(format!(
                "invalid probability {p}"
            )));
        }
        Ok(Distribution { scope, probs })
    }

    /// Builds a distribution from scope-ordered outcomes; absent outcomes get 0.
    pub fn from_outcomes<I>(scope: Vec<usize>, entries: I) -> Result<Self, InferenceError>
    where
        I: IntoIterator<Item = (Outcome, f64)>,
    {
        let width = scope.len();
        let mut probs = vec![0.0; 1 << width.min(24)];
        let mut seen = vec![false; probs.len()];
        for (o, p) in entries {
            if o.0.len() != width {
                return Err(InferenceError::Malformed(format!(
                    "outcome {o} does not cover {width} variables"
                )));
            }
            let i = outcome_to_index(&o);
            if std::mem::replace(&mut seen[i], true) {
                return Err(InferenceError::Malformed(format!("outcome {o} repeated")));
            }
            probs[i] = p;
        }
        Self::new(scope, probs)
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    /// Entries in internal (little-endian) index order.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.probs.iter().copied())
    }

    pub fn get(&self, outcome: &Outcome) -> Option<f64> {
        (outcome.0.len() == self.scope.len()).then(|| self.probs[outcome_to_index(outcome)])
    }

    pub fn outcome_of(&self, index: usize) -> Outcome {
        Outcome(
            (0..self.scope.len())
                .map(|k| (index >> k) & 1 == 1)
                .collect(),
        )
    }

    /// All entries in ascending outcome order.
    pub fn outcomes(&self) -> Vec<(Outcome, f64)> {
        let mut v: Vec<_> = self
            .probs
            .iter()
            .enumerate()
            .map(|(i, &p)| (self.outcome_of(i), p))
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    fn position(&self, var: usize) -> Result<usize, InferenceError> {
        self.scope
            .iter()
            .position(|&v| v == var)
            .ok_or(InferenceError::NotInScope(var))
    }
}

fn outcome_to_index(o: &Outcome) -> usize {
    o.0.iter()
        .enumerate()
        .fold(0, |acc, (k, &b)| acc | ((b as usize) << k))
}

/// Simulates `net` and returns its full joint, checking normalization.
pub fn infer_joint(net: &BayesNet) -> Result<Distribution, InferenceError> {
    let sv = compile(net)?.simulate()?;
    let drift = (sv.norm_sqr() - 1.0).abs();
    if drift >= NORM_TOLERANCE {
        return Err(InferenceError::NormViolation(drift));
    }
    joint_distribution(&sv, net)
}

/// `P(i) = |c_i|²` over all variables of `net`.
pub fn joint_distribution(
    sv: &Statevector,
    net: &BayesNet,
) -> Result<Distribution, InferenceError> {
    if sv.n_qubits() != net.len() {
        return Err(InferenceError::QubitMismatch {
            statevector: sv.n_qubits(),
            network: net.len(),
        });
    }
    Distribution::new((0..net.len()).collect(), sv.probabilities())
}

fn distinct(vars: &[usize]) -> Result<(), InferenceError> {
    for (k, v) in vars.iter().enumerate() {
        if vars[..k].contains(v) {
            return Err(InferenceError::Repeated(*v));
        }
    }
    Ok(())
}

/// Sums out every scope variable not in `vars`; the result's scope is `vars`
/// in the given order.
pub fn marginal(dist: &Distribution, vars: &[usize]) -> Result<Distribution, InferenceError> {
    conditional_inner(dist, vars, &Assignment::new(), false)
}

/// `P(targets | evidence)` by filtering on the evidence and renormalizing.
pub fn conditional(
    dist: &Distribution,
    targets: &[usize],
    evidence: &Assignment,
) -> Result<Distribution, InferenceError> {
    conditional_inner(dist, targets, evidence, true)
}

fn conditional_inner(
    dist: &Distribution,
    targets: &[usize],
    evidence: &Assignment,
    normalize: bool,
) -> Result<Distribution, InferenceError> {
    if targets.is_empty() {
        return Err(InferenceError::NoTargets);
    }
    distinct(targets)?;
    let positions = targets
        .iter()
        .map(|&v| dist.position(v))
        .collect::<Result<Vec<_>, _>>()?;
    let (mut mask, mut pattern) = (0usize, 0usize);
    for (v, bit) in evidence.iter() {
        if targets.contains(&v) {
            return Err(InferenceError::Overlap(v));
        }
        let pos = dist.position(v)?;
        mask |= 1 << pos;
        if bit {
            pattern |= 1 << pos;
        }
    }
    let mut table = vec![0.0; 1 << targets.len()];
    for (i, &p) in dist.probs.iter().enumerate() {
        if i & mask != pattern {
            continue;
        }
        let j = positions
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &pos)| acc | (((i >> pos) & 1) << k));
        table[j] += p;
    }
    if normalize {
        let mass = compensated_sum(table.iter().copied());
        // also rejects NaN mass
        if mass.is_nan() || mass <= IMPOSSIBLE_EVIDENCE_MASS {
            return Err(InferenceError::ImpossibleEvidence);
        }
        table.iter_mut().for_each(|p| *p /= mass);
    }
    Distribution::new(targets.to_vec(), table)
}

/// Two-entry posterior of a single query variable.
pub fn posterior(
    dist: &Distribution,
    query: usize,
    evidence: &Assignment,
) -> Result<Distribution, InferenceError> {
    conditional(dist, &[query], evidence)
}
