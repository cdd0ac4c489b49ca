//! Exact semantics over finite models: rational distributions, stochastic
//! matrices, two evaluators, and the law checker.

mod dist;
mod eval;
pub mod laws;
mod matrix;
mod model;

pub use dist::{DistError, DistJson, FinDist, OutcomeJson};
pub use eval::{denote, enumerate_envs, env_of, eval_exact, eval_in, prob_true, Denotation, ExactError};
pub use laws::{check_law, Law, LawError, LawInstance, LawReport, Verdict};
pub use matrix::{MatrixError, StochMatrix};
pub use model::{EdgeEntry, FiniteModel, ModelError, ModelJson};
