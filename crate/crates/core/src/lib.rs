//! Semi-supervised hierarchical multi-label classification over DAG label
//! hierarchies.
//!
//! The main entry points are [`ssl::run_sshmc_bli`] (pseudo-labeling from
//! nearest labeled neighbors), [`lcn::fit_lcn`] (supervised local classifier
//! per node) and the self-training baselines in [`baselines`]. Models are
//! generic over [`base_learner::BaseLearner`]; the bundled learner is a
//! random forest.

pub mod base_learner;
pub mod baselines;
pub mod bundle;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod hierarchy;
pub mod lcn;
pub mod matrix;
pub mod par;
pub mod protocol;
pub mod seed;
pub mod ssl;

pub use error::{Error, Result};
pub use hierarchy::{Hierarchy, LabelVector, NodeId};
pub use matrix::Matrix;
