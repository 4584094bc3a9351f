//! Pricing control for finite-buffer Markovian queues with customer
//! abandonment.
//!
//! The system is an M/M/m+M queue with capacity `N`: Poisson arrivals at a
//! maximal rate, `m` exponential servers, exponential abandonment from
//! service and from the queue. A price is quoted to each arriving customer
//! based on the number of customers present; the customer joins with the
//! probability that their willingness to pay exceeds the quote, so quoting
//! prices is equivalent to controlling the state-dependent arrival rate.
//!
//! The crate provides:
//!
//! * [`model`] — system parameters and the willingness-to-pay distribution,
//! * [`chain`] — exact birth-death steady state and long-run average gain
//!   for any arrival-rate policy,
//! * [`mdp`] — average-reward policy iteration for the optimal dynamic
//!   policy, including the accelerated variant that restricts action sets
//!   using the uni-modal structure of the optimum,
//! * [`heuristics`] — best static, cutoff-static, and two-price policies,
//!   with analytic performance bounds,
//! * [`sim`] — an independent discrete-event Monte-Carlo estimator,
//! * [`experiments`] — randomized benchmark campaigns with CSV output.
//!
//! See the `examples/` directory for one runnable example per capability,
//! and the `apq` binary for a batch-friendly CLI.

pub mod chain;
pub mod experiments;
pub mod heuristics;
pub mod mdp;
pub mod model;
pub mod sim;

pub use chain::{Policy, SteadyState};
pub use model::{EvaluationDistribution, Instance};
pub use mdp::SolveResult;
