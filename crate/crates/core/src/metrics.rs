//! Information-theoretic and shape metrics over [`Distribution`]s. Entropies
//! and mutual information are in bits.

use crate::inference::{marginal, posterior, Assignment, Distribution, InferenceError, Outcome};
use crate::numeric::compensated_sum;

/// Mutual information below this magnitude is rounding noise.
const MI_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub name: String,
    pub value: f64,
}

impl MetricReport {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        MetricReport {
            name: name.into(),
            value,
        }
    }
}

/// Shannon entropy; zero-probability outcomes contribute nothing.
pub fn entropy(dist: &Distribution) -> f64 {
    let h = -compensated_sum(
        dist.probabilities()
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2()),
    );
    h.max(0.0)
}

pub fn posterior_entropy(
    dist: &Distribution,
    query: usize,
    evidence: &Assignment,
) -> Result<f64, InferenceError> {
    Ok(entropy(&posterior(dist, query, evidence)?))
}

/// `I(a;b) = Σ P(x,y) log₂ [P(x,y) / (P(x)P(y))]`, clamped at zero when
/// rounding pushes it slightly negative.
pub fn mutual_information(dist: &Distribution, a: usize, b: usize) -> Result<f64, InferenceError> {
    if a == b {
        return Err(InferenceError::SameVariable);
    }
    let pair = marginal(dist, &[a, b])?;
    let pa = marginal(dist, &[a])?;
    let pb = marginal(dist, &[b])?;
    let pa = pa.probabilities();
    let pb = pb.probabilities();
    // pair index: bit 0 = a, bit 1 = b
    let mi = compensated_sum(
        pair.probabilities()
            .iter()
            .enumerate()
            .filter_map(|(i, &pxy)| {
                let px = pa[i & 1];
                let py = pb[i >> 1];
                (pxy > 0.0).then(|| pxy * (pxy / (px * py)).log2())
            }),
    );
    if mi < 0.0 && mi > -MI_CLAMP {
        return Ok(0.0);
    }
    Ok(mi.max(0.0))
}

/// Classical fidelity `(Σ √(P_i Q_i))²`.
pub fn fidelity(p: &Distribution, q: &Distribution) -> Result<f64, InferenceError> {
    if p.scope() != q.scope() {
        return Err(InferenceError::ScopeMismatch);
    }
    let overlap = compensated_sum(
        p.probabilities()
            .iter()
            .zip(q.probabilities())
            .map(|(a, b)| (a * b).sqrt()),
    );
    Ok(overlap * overlap)
}

/// Outcomes by descending probability, ties by ascending outcome.
fn sorted_outcomes(dist: &Distribution) -> Vec<(Outcome, f64)> {
    let mut v = dist.outcomes();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

/// Running total over the outcomes in [`top_k`] order. Zero-probability
/// outcomes are omitted.
pub fn cdf_over_sorted_outcomes(dist: &Distribution) -> Vec<(Outcome, f64)> {
    let mut acc = 0.0;
    let mut carry = 0.0;
    sorted_outcomes(dist)
        .into_iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|(o, p)| {
            // Kahan step so the final value lands on the total
            let y = p - carry;
            let t = acc + y;
            carry = (t - acc) - y;
            acc = t;
            (o, acc)
        })
        .collect()
}

/// The `k` most probable outcomes with nonzero probability.
pub fn top_k(dist: &Distribution, k: usize) -> Vec<(Outcome, f64)> {
    sorted_outcomes(dist)
        .into_iter()
        .filter(|(_, p)| *p > 0.0)
        .take(k)
        .collect()
}
