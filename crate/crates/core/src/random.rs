//! Random network generation for benchmarks and randomized checks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bayesnet::{BayesNet, Cpt};

#[derive(Debug, Clone, Copy)]
pub struct RandomNetParams {
    pub variables: usize,
    pub max_parents: usize,
    /// When false every variable is a root.
    pub edges: bool,
}

/// A random DAG over `variables` binary nodes named `V0, V1, ...`.
///
/// A hidden random causal order is drawn first, so declaration order is
/// generally not topological. Each node takes up to `max_parents` parents from
/// its predecessors in that order, and every CPT entry is uniform in [0, 1].
pub fn random_network<R: Rng + ?Sized>(rng: &mut R, params: RandomNetParams) -> BayesNet {
    let n = params.variables;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut cpts = vec![Cpt::prior(0.0); n];
    for (k, &v) in order.iter().enumerate() {
        let mut parents: Vec<usize> = if params.edges {
            let limit = params.max_parents.min(k);
            let count = rng.gen_range(0..=limit);
            order[..k].choose_multiple(rng, count).copied().collect()
        } else {
            Vec::new()
        };
        parents.shuffle(rng);
        let rows = (0..1usize << parents.len())
            .map(|_| rng.gen::<f64>())
            .collect();
        cpts[v] = Cpt::new(parents, rows);
    }
    let names = (0..n).map(|i| format!("V{i}")).collect();
    BayesNet::new(names, cpts).expect("generated network is valid")
}
