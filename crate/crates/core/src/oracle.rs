//! Exact classical inference by enumerating every full assignment.
//!
//! This is the reference the quantum path is checked against, so it shares
//! nothing with the compiler, the statevector or the post-selection code.

use crate::bayesnet::{BayesNet, Violations};
use crate::inference::{Assignment, Distribution, InferenceError, IMPOSSIBLE_EVIDENCE_MASS};

/// Enumeration is refused above this many variables.
pub const MAX_ENUMERATION_VARIABLES: usize = 24;

/// `P(a) = Π_v P(v = a_v | a_parents(v))` for every full assignment `a`.
pub fn enumerate_joint(net: &BayesNet) -> Result<Distribution, OracleError> {
    let violations = net.validate();
    if !violations.is_empty() {
        return Err(OracleError::Invalid(Violations(violations)));
    }
    let n = net.len();
    if n > MAX_ENUMERATION_VARIABLES {
        return Err(OracleError::TooLarge(n));
    }
    let probs = (0..1usize << n)
        .map(|a| {
            net.cpts()
                .iter()
                .enumerate()
                .map(|(v, cpt)| {
                    let p1 = cpt.p_one_given(a);
                    if (a >> v) & 1 == 1 {
                        p1
                    } else {
                        1.0 - p1
                    }
                })
                .product()
        })
        .collect();
    Ok(Distribution::new((0..n).collect(), probs)?)
}

/// Classical Bayes rule on the enumerated joint: sum the consistent
/// assignments per target outcome, then divide by the evidence mass.
pub fn oracle_query(
    net: &BayesNet,
    targets: &[usize],
    evidence: &Assignment,
) -> Result<Distribution, OracleError> {
    let joint = enumerate_joint(net)?;
    let n = net.len();
    if targets.is_empty() {
        return Err(InferenceError::NoTargets.into());
    }
    for (k, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(InferenceError::NotInScope(t).into());
        }
        if targets[..k].contains(&t) {
            return Err(InferenceError::Repeated(t).into());
        }
        if evidence.contains(t) {
            return Err(InferenceError::Overlap(t).into());
        }
    }
    if let Some((v, _)) = evidence.iter().find(|(v, _)| *v >= n) {
        return Err(InferenceError::NotInScope(v).into());
    }
    let width = targets.len();
    let mut numer = vec![0.0; 1 << width];
    let mut mass = 0.0;
    for (a, &p) in joint.probabilities().iter().enumerate() {
        let bit = |v: usize| (a >> v) & 1 == 1;
        if evidence.iter().any(|(v, b)| bit(v) != b) {
            continue;
        }
        mass += p;
        let mut slot = 0;
        for (k, &t) in targets.iter().enumerate() {
            if bit(t) {
                slot |= 1 << k;
            }
        }
        numer[slot] += p;
    }
    if mass <= IMPOSSIBLE_EVIDENCE_MASS {
        return Err(InferenceError::ImpossibleEvidence.into());
    }
    let probs = numer.into_iter().map(|p| p / mass).collect();
    Ok(Distribution::new(targets.to_vec(), probs)?)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Invalid(Violations),
    #[error("{0} variables is too many to enumerate")]
    TooLarge(usize),
    #[error(transparent)]
    Query(#[from] InferenceError),
}
