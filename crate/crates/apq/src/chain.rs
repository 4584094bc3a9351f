//! Exact analysis of the birth-death chain induced by an arrival-rate policy:
//! steady-state distribution, long-run average gain, and an algebraically
//! equivalent gain expression used as a cross-check and by the heuristics.

use serde::{Deserialize, Serialize};

use crate::model::{revenue_rate_raw, Instance, ModelError};

/// State-dependent arrival rates `lambda_0 .. lambda_N`.
///
/// The last entry is always zero: the system is full, so there is no pricing
/// decision in state `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Policy {
    pub rates: Vec<f64>,
}

impl Policy {
    /// Validates length `N + 1`, entries in `[0, lambda]`, and a zero last
    /// entry.
    pub fn new(rates: Vec<f64>, inst: &Instance) -> Result<Self, ModelError> {
        if rates.len() != inst.num_states() {
            return Err(ModelError::InvalidInstance(format!(
                "policy length {} does not match N + 1 = {}",
                rates.len(),
                inst.num_states()
            )));
        }
        let big = inst.max_arrival_rate;
        for (n, &r) in rates.iter().enumerate() {
            if !(r.is_finite() && (0.0..=big * (1.0 + 1e-12)).contains(&r)) {
                return Err(ModelError::InvalidInstance(format!(
                    "rate {r} in state {n} outside [0, {big}]"
                )));
            }
        }
        if *rates.last().unwrap() != 0.0 {
            return Err(ModelError::InvalidInstance(
                "arrival rate in the full state must be zero".into(),
            ));
        }
        Ok(Policy { rates })
    }

    /// All-zero policy (admit nobody).
    pub fn zero(inst: &Instance) -> Self {
        Policy {
            rates: vec![0.0; inst.num_states()],
        }
    }

    /// Rate `delta` in states `0 .. cutoff`, zero from `cutoff` on.
    pub fn cutoff_static(inst: &Instance, cutoff: usize, delta: f64) -> Self {
        let mut rates = vec![0.0; inst.num_states()];
        for r in rates.iter_mut().take(cutoff.min(inst.capacity)) {
            *r = delta;
        }
        Policy { rates }
    }

    /// Rate `delta_s` while a server is idle (`n < m`), `delta_q` for
    /// `m <= n < cutoff`, zero from `cutoff` on.
    pub fn two_price(inst: &Instance, cutoff: usize, delta_s: f64, delta_q: f64) -> Self {
        let mut rates = vec![0.0; inst.num_states()];
        for (n, r) in rates
            .iter_mut()
            .enumerate()
            .take(cutoff.min(inst.capacity))
        {
            *r = if n < inst.num_servers { delta_s } else { delta_q };
        }
        Policy { rates }
    }

    /// True when the rates never increase after they first decrease.
    /// `monotone` is the special case where the peak is at state 0.
    pub fn is_unimodal(&self, tol: f64) -> bool {
        let peak = self.peak_index(tol);
        !self.rates[peak..]
            .windows(2)
            .any(|w| w[0] < w[1] - tol)
    }

    pub fn is_monotone_nonincreasing(&self, tol: f64) -> bool {
        !self.rates.windows(2).any(|w| w[0] < w[1] - tol)
    }

    /// First index after which the rates start to strictly decrease
    /// (0 when the policy never decreases before it increases).
    pub fn peak_index(&self, tol: f64) -> usize {
        self.rates
            .windows(2)
            .position(|w| w[0] > w[1] + tol)
            .unwrap_or(0)
    }
}

/// Stationary distribution of the birth-death chain under a fixed policy.
#[derive(Debug, Clone, Serialize)]
pub struct SteadyState {
    /// Probabilities `P_0 .. P_N` (sum to one).
    pub probs: Vec<f64>,
    /// Unnormalized weights `a_0 .. a_N` with `a_0 = 1` and
    /// `a_n = (lambda_{n-1} / gamma_n) a_{n-1}`.
    pub weights: Vec<f64>,
}

/// Stationary distribution via the product formula, computed in log space so
/// long chains and extreme rate ratios neither overflow nor underflow.
/// States past the first zero arrival rate get probability exactly zero.
pub fn steady_state(inst: &Instance, pol: &Policy) -> SteadyState {
    let s = inst.num_states();
    // log a_n, with None marking an exact zero weight
    let mut log_w: Vec<Option<f64>> = Vec::with_capacity(s);
    log_w.push(Some(0.0));
    for n in 1..s {
        let lam = pol.rates[n - 1];
        let prev = log_w[n - 1];
        log_w.push(match prev {
            Some(lw) if lam > 0.0 => Some(lw + lam.ln() - inst.death_rate(n).ln()),
            _ => None,
        });
    }
    let max_lw = log_w
        .iter()
        .flatten()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_w
        .iter()
        .map(|lw| lw.map_or(0.0, |v| (v - max_lw).exp()))
        .collect();
    let total: f64 = weights.iter().sum();
    let probs = weights.iter().map(|w| w / total).collect();
    // report weights on the conventional a_0 = 1 scale
    let weights = weights.iter().map(|w| w * max_lw.exp()).collect();
    SteadyState { probs, weights }
}

/// Long-run average gain `sum_n r_n(lambda_n) P_n` in the original time unit.
pub fn gain(inst: &Instance, pol: &Policy) -> f64 {
    let ss = steady_state(inst, pol);
    gain_with_steady_state(inst, pol, &ss)
}

pub fn gain_with_steady_state(inst: &Instance, pol: &Policy, ss: &SteadyState) -> f64 {
    ss.probs
        .iter()
        .enumerate()
        .map(|(n, &p)| if p > 0.0 { inst.reward(n, pol.rates[n]) * p } else { 0.0 })
        .sum()
}

/// The same gain written as expected revenue net of the expected downstream
/// cost attached to each admitted customer:
/// `R_n(lambda) = lambda * quantile(lambda / Lambda) - lambda * c_n` where
/// `c_n` interpolates between the service and queue cost coefficients, and
/// `R_N = 0`. Equals [`gain`] identically; kept as the strongest internal
/// consistency check and as the fast evaluation path for the heuristics.
pub fn reformulated_gain(inst: &Instance, pol: &Policy) -> f64 {
    let ss = steady_state(inst, pol);
    let cc = inst.cost_coefficients();
    let m = inst.num_servers;
    let cap = inst.capacity;
    let gamma_m = cc.gamma[m];
    ss.probs
        .iter()
        .enumerate()
        .take(cap)
        .map(|(n, &p)| {
            if p <= 0.0 {
                return 0.0;
            }
            let lam = pol.rates[n];
            let cost_coeff = if n < m {
                cc.service
            } else {
                let g_next = cc.gamma[n + 1];
                (gamma_m / g_next) * cc.service + ((g_next - gamma_m) / g_next) * cc.queue
            };
            (revenue_rate_raw(&inst.distribution, inst.max_arrival_rate, lam)
                - lam * cost_coeff)
                * p
        })
        .sum()
}

/// Long-run average admission rate `sum_n lambda_n P_n`.
pub fn effective_arrival_rate(inst: &Instance, pol: &Policy) -> f64 {
    let ss = steady_state(inst, pol);
    ss.probs
        .iter()
        .zip(&pol.rates)
        .map(|(&p, &lam)| p * lam)
        .sum()
}
