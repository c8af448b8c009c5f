//! Robustness experiment: jitter every CPT probability, recompile, and check
//! whether the three most probable joint outcomes stay the same.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bayesnet::BayesNet;
use crate::inference::{infer_joint, InferenceError, Outcome};
use crate::metrics::top_k;

pub const MAX_NOISE: f64 = 0.2;
const TOP: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerturbError {
    #[error("noise {0} outside [0, {MAX_NOISE}]")]
    Noise(f64),
    #[error("at least one trial is required")]
    NoTrials,
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbConfig {
    pub noise: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopOutcomes {
    /// Most probable first.
    pub outcomes: Vec<(Outcome, f64)>,
    pub mass: f64,
}

impl TopOutcomes {
    fn set(&self) -> BTreeSet<&Outcome> {
        self.outcomes.iter().map(|(o, _)| o).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbReport {
    pub config: PerturbConfig,
    pub baseline: TopOutcomes,
    pub trials: Vec<TopOutcomes>,
    /// Fraction of trials whose top-3 set equals the baseline's.
    pub agreement: f64,
    pub min_mass: f64,
    pub mean_mass: f64,
}

impl PerturbReport {
    pub fn agrees(&self, trial: usize) -> bool {
        self.trials[trial].set() == self.baseline.set()
    }
}

fn top_outcomes(net: &BayesNet) -> Result<TopOutcomes, InferenceError> {
    let joint = infer_joint(net)?;
    let outcomes = top_k(&joint, TOP);
    let mass = outcomes.iter().map(|(_, p)| p).sum();
    Ok(TopOutcomes { outcomes, mass })
}

/// Each trial replaces every CPT entry `p` (variables in declaration order,
/// rows ascending) by `clamp(p + u, 0, 1)` with `u ~ U[-noise, noise]` from a
/// ChaCha8 stream seeded with `seed`.
pub fn run_perturbation(
    net: &BayesNet,
    config: PerturbConfig,
) -> Result<PerturbReport, PerturbError> {
    if !(0.0..=MAX_NOISE).contains(&config.noise) {
        return Err(PerturbError::Noise(config.noise));
    }
    if config.trials == 0 {
        return Err(PerturbError::NoTrials);
    }
    let baseline = top_outcomes(net)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trials = Vec::with_capacity(config.trials);
    for _ in 0..config.trials {
        let jittered = net.map_probabilities(|_, _, p| {
            if config.noise == 0.0 {
                return p;
            }
            let u = rng.gen_range(-config.noise..=config.noise);
            (p + u).clamp(0.0, 1.0)
        });
        trials.push(top_outcomes(&jittered)?);
    }
    let base_set = baseline.set();
    let agreeing = trials.iter().filter(|t| t.set() == base_set).count();
    let masses = trials.iter().map(|t| t.mass);
    let min_mass = masses.clone().fold(f64::INFINITY, f64::min);
    let mean_mass = masses.sum::<f64>() / trials.len() as f64;
    Ok(PerturbReport {
        config,
        baseline,
        agreement: agreeing as f64 / trials.len() as f64,
        trials,
        min_mass,
        mean_mass,
    })
}
