//! Sparsity-based Kalman filters for high-dimensional state estimation.
//!
//! The crate provides a sparse unscented Kalman filter and a progressive
//! extended Kalman filter whose error covariances live on a fixed cyclic band
//! pattern, together with stochastic EnKF and dense UKF baselines and a
//! Lorenz-96 twin-experiment harness.

pub mod sparse;
pub mod filters;
pub mod models;
pub mod harness;
