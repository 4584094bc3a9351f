//! Discrete-event Monte-Carlo estimator for the controlled queue.
//!
//! Serves as an oracle that is independent of the linear-algebra path: it
//! simulates the continuous-time chain under a fixed arrival-rate policy and
//! estimates the long-run average gain and occupancy statistics. Because all
//! clocks are exponential, the per-customer system collapses to state-level
//! aggregate transitions with rates `λ_n`, `min{n,m}μ`, `min{n,m}θ_s`, and
//! `(n−m)⁺θ_q`, which is orders of magnitude faster than entity simulation
//! and has the same distribution.

use rand::distributions::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::chain::Policy;
use crate::model::Instance;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("policy has {got} rates but the instance has {want} states")]
    PolicyMismatch { got: usize, want: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct SimConfig {
    /// Total simulated time per replication.
    pub horizon: f64,
    /// Initial stretch discarded from all statistics.
    pub warmup: f64,
    pub replications: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(horizon: f64, warmup: f64, replications: usize, seed: u64) -> Result<Self, SimError> {
        if !(horizon.is_finite() && warmup.is_finite()) || warmup < 0.0 || horizon <= warmup {
            return Err(SimError::InvalidConfig(format!(
                "need horizon > warmup >= 0, got horizon={horizon}, warmup={warmup}"
            )));
        }
        if replications == 0 {
            return Err(SimError::InvalidConfig("need at least one replication".into()));
        }
        Ok(SimConfig { horizon, warmup, replications, seed })
    }
}

/// Statistics from a single replication.
#[derive(Debug, Clone, Serialize)]
pub struct RepStats {
    pub gain: f64,
    /// Time-average number in system.
    pub mean_number_in_system: f64,
    /// Admissions per unit time.
    pub effective_rate: f64,
    /// Person-time divided by departure count; an estimate of the mean
    /// sojourn that is not forced to satisfy Little's law exactly.
    pub mean_sojourn: f64,
    pub admissions: u64,
    pub departures: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimEstimate {
    pub mean_gain: f64,
    /// Standard error of the replication mean (0 for a single replication).
    pub std_error: f64,
    /// Mean over replications of per-replication occupancy fractions.
    pub occupancy: Vec<f64>,
    pub effective_rate: f64,
    pub mean_number_in_system: f64,
    pub mean_sojourn: f64,
    pub replications: Vec<RepStats>,
}

impl SimEstimate {
    /// `mean(L_i − δ̂_i·T_i)` and its standard error, for empirical checks of
    /// Little's law.
    pub fn littles_residual(&self) -> (f64, f64) {
        let res: Vec<f64> = self
            .replications
            .iter()
            .map(|r| r.mean_number_in_system - r.effective_rate * r.mean_sojourn)
            .collect();
        mean_and_se(&res)
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

struct RepOutcome {
    stats: RepStats,
    occupancy: Vec<f64>,
}

/// Simulate the chain under `pol` and estimate the long-run average gain.
///
/// Revenue is collected at admission epochs (the quoted price for the
/// pre-arrival state), holding cost accrues continuously at `n·c_h`, and the
/// per-event abandonment costs are charged when the corresponding transition
/// fires. Replication `i` uses RNG stream `i` of the seeded generator, and
/// results are reduced in replication order, so a fixed seed gives identical
/// output regardless of thread scheduling.
pub fn simulate(inst: &Instance, pol: &Policy, cfg: &SimConfig) -> Result<SimEstimate, SimError> {
    let want = inst.num_states();
    if pol.rates.len() != want {
        return Err(SimError::PolicyMismatch { got: pol.rates.len(), want });
    }

    let outcomes: Vec<RepOutcome> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| run_replication(inst, pol, cfg, rep as u64))
        .collect();

    let gains: Vec<f64> = outcomes.iter().map(|o| o.stats.gain).collect();
    let (mean_gain, std_error) = mean_and_se(&gains);
    let n_states = inst.num_states();
    let mut occupancy = vec![0.0; n_states];
    for o in &outcomes {
        for (acc, f) in occupancy.iter_mut().zip(&o.occupancy) {
            *acc += f / cfg.replications as f64;
        }
    }
    let avg = |f: fn(&RepStats) -> f64| {
        outcomes.iter().map(|o| f(&o.stats)).sum::<f64>() / cfg.replications as f64
    };
    Ok(SimEstimate {
        mean_gain,
        std_error,
        occupancy,
        effective_rate: avg(|s| s.effective_rate),
        mean_number_in_system: avg(|s| s.mean_number_in_system),
        mean_sojourn: avg(|s| s.mean_sojourn),
        replications: outcomes.into_iter().map(|o| o.stats).collect(),
    })
}

fn exp_sample(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    // Open01 keeps ln() finite
    let u: f64 = Open01.sample(rng);
    -u.ln() / rate
}

fn run_replication(inst: &Instance, pol: &Policy, cfg: &SimConfig, rep: u64) -> RepOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep);

    let m = inst.num_servers;
    let span = cfg.horizon - cfg.warmup;
    let mut n = 0usize;
    let mut t = 0.0f64;

    let mut time_in_state = vec![0.0f64; inst.num_states()];
    let mut revenue = 0.0f64;
    let mut abandon_cost = 0.0f64;
    let mut admissions = 0u64;
    let mut departures = 0u64;

    loop {
        let lam = pol.rates[n];
        let serv = n.min(m) as f64 * inst.service_rate;
        let sab = n.min(m) as f64 * inst.abandon_service;
        let qab = n.saturating_sub(m) as f64 * inst.abandon_queue;
        let total = lam + serv + sab + qab;

        let t_next = if total > 0.0 { t + exp_sample(&mut rng, total) } else { f64::INFINITY };

        // accrue occupancy over the post-warmup part of [t, t_next]
        let lo = t.max(cfg.warmup);
        let hi = t_next.min(cfg.horizon);
        if hi > lo {
            time_in_state[n] += hi - lo;
        }
        if t_next >= cfg.horizon {
            break;
        }
        t = t_next;
        let counted = t > cfg.warmup;

        let draw = rng.gen::<f64>() * total;
        if draw < lam {
            n += 1;
            if counted {
                admissions += 1;
                revenue += inst.price_for_rate(lam).unwrap_or(0.0);
            }
        } else if draw < lam + serv {
            n -= 1;
            if counted {
                departures += 1;
            }
        } else if draw < lam + serv + sab {
            n -= 1;
            if counted {
                departures += 1;
                abandon_cost += inst.abandon_cost_service;
            }
        } else {
            n -= 1;
            if counted {
                departures += 1;
                abandon_cost += inst.abandon_cost_queue;
            }
        }
    }

    let person_time: f64 = time_in_state
        .iter()
        .enumerate()
        .map(|(k, dt)| k as f64 * dt)
        .sum();
    let holding = inst.holding_cost * person_time;
    let occupancy: Vec<f64> = time_in_state.iter().map(|dt| dt / span).collect();
    let stats = RepStats {
        gain: (revenue - holding - abandon_cost) / span,
        mean_number_in_system: person_time / span,
        effective_rate: admissions as f64 / span,
        mean_sojourn: if departures > 0 { person_time / departures as f64 } else { 0.0 },
        admissions,
        departures,
    };
    RepOutcome { stats, occupancy }
}
