//! The κ-Generalized-Gamma (κGG) wealth distribution.
//!
//! * [`special`]: κ-deformed exp/log, Γ_κ and classical special functions.
//! * [`distribution`]: the κGG density, cdf, quantile, sampling and moments.
//! * [`inequality`]: Lorenz curve, Gini, generalized entropy, Theil, MLD, H_t.
//! * [`simulator`]: kinetic wealth-exchange Monte Carlo with saving propensities.
//! * [`fitting`]: histogram and maximum-likelihood fits of κGG parameters.

// `!(x > 0.0)` guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fitting;
pub mod inequality;
pub mod distribution;
pub mod simulator;
pub mod special;

pub use distribution::{KappaGG, KggParams, Reduction, TailParams};
pub use error::{Error, Result};
