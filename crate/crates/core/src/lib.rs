//! Transmit/receive scaling policies for over-the-air computation (AirComp).
//!
//! `K` single-antenna sensors transmit scaled signals `b_k x_k` over a fading
//! multiple-access channel and the receiver scales the superposition by `a` to
//! estimate `sum_k x_k`. The crate provides the closed-form MSE-optimal policy,
//! benchmark policies, the sum-of-MSE optimum of the related MAC estimation
//! problem and its achievable MSE region, a multi-antenna reduction, brute-force
//! oracles, and a Monte Carlo harness for ergodic scaling laws under Rayleigh
//! fading.

pub mod cli;
pub mod error;
pub mod mac_region;
pub mod model;
pub mod montecarlo;
pub mod multiantenna;
pub mod oracle;
pub mod policies;
pub mod record;

pub use error::{Error, Result};
pub use model::{
    compute_mse, compute_power, interval_of, simulate_empirical_mse, ChannelState, IntervalIndex,
    PolicyMetrics, SystemParams, TxRxPolicy,
};
pub use policies::{
    channel_inversion, computation_optimal, energy_greedy, first_iota, mac_optimal, IotaFunction,
    MacPolicy, PolicyKind, Solution,
};
