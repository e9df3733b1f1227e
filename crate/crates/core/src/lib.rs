//! Local variable importance for tabular models.
//!
//! The crate fits random forests under K-fold cross-validation and scores,
//! for every observation and feature, how much the observation's out-of-fold
//! loss grows when that feature's value is swapped for alternatives: a
//! quantile grid of the column ([`importance::clique`]) or random column
//! permutations ([`importance::clip`]).
//!
//! ```no_run
//! use clique::{cv, data, importance, models};
//!
//! let ds = data::simulate(data::SimSpec { kind: data::SimKind::AndGate, n: 400, seed: 7 })?;
//! let hp = models::Hyperparams { seed: 7, ..Default::default() };
//! let folds = cv::assign_folds(&ds, 10, true, 7)?;
//! let ens = cv::fit_cv(&ds, &hp, &folds)?;
//! let v = importance::clique(&ens, &ds, importance::LossSpec::ZeroOne, 25)?;
//! println!("mean importance of v1: {}", v.column_mean(0));
//! # Ok::<(), clique::Error>(())
//! ```

pub mod cli;
pub mod cv;
pub mod data;
pub mod error;
pub mod experiments;
pub mod importance;
pub mod kv;
pub mod models;
pub mod quantile;
pub mod region;
pub mod rng;
pub mod stats;
pub mod svg;

pub use error::{Error, Result};
