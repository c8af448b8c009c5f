//! Quantum Bayesian inference on an exact statevector.
//!
//! A binary Bayesian network is compiled into RY and multi-controlled RY
//! gates (one per CPT row), simulated exactly, and queried by post-selecting
//! on the squared amplitudes. A classical enumeration oracle answers the
//! same queries for cross-checking.
//!
//! ```
//! use qbi::bayesnet::{BayesNet, Cpt};
//! use qbi::inference::{infer_joint, posterior, Assignment};
//!
//! let net = BayesNet::new(
//!     vec!["Rain", "Wet"],
//!     vec![Cpt::prior(0.2), Cpt::new(vec![0], vec![0.1, 0.9])],
//! )
//! .unwrap();
//! let joint = infer_joint(&net).unwrap();
//! let p = posterior(&joint, 0, &Assignment::new().with(1, true)).unwrap();
//! assert!((p.probabilities()[1] - 0.18 / 0.26).abs() < 1e-12);
//! ```

pub mod bayesnet;
pub mod circuit;
pub mod inference;
pub mod metrics;
pub mod model_format;
pub mod numeric;
pub mod oracle;
pub mod perturb;
pub mod random;
pub mod statevector;

pub use bayesnet::{BayesNet, Cpt};
pub use circuit::{compile, Circuit};
pub use inference::{Assignment, Distribution, InferenceError, Outcome};
pub use model_format::{parse_model, render_model};
pub use statevector::{Gate, Statevector};
