//! Average-reward policy iteration on the uniformized chain.
//!
//! The continuous-time chain has bounded transition rates, so it is converted
//! to a discrete-time chain by adding self-loops under the common rate
//! `u = lambda + m(mu + theta_s) + (N - m) theta_q`. All internal arithmetic
//! uses per-step rewards `r / u`; reported gains are multiplied back by `u`
//! so they are per unit of original time. The bias vector is invariant under
//! this rescale and is reported as solved.

use std::time::{Duration, Instant};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::chain::Policy;
use crate::model::{maximize_revenue_plus_linear, Instance, ModelError};

/// Iteration cap for both solver variants.
pub const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Error)]
pub enum MdpError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("policy evaluation system is singular: {0}")]
    SingularSystem(String),
    #[error("policy evaluation residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("policy iteration did not converge within {MAX_ITERATIONS} iterations")]
    IterationCapExceeded {
        /// Best iterate found before giving up.
        best: Box<SolveResult>,
    },
}

/// Discrete-time view of the chain: scaled birth/death probabilities plus a
/// self-loop so each row is exactly stochastic.
pub struct UniformizedMdp<'a> {
    pub inst: &'a Instance,
    /// Uniformization constant `u`.
    pub scale: f64,
    /// Death rates `gamma_0 .. gamma_N` (unscaled).
    pub gamma: Vec<f64>,
}

pub fn build(inst: &Instance) -> UniformizedMdp<'_> {
    UniformizedMdp {
        inst,
        scale: inst.uniformization_constant(),
        gamma: (0..inst.num_states()).map(|n| inst.death_rate(n)).collect(),
    }
}

impl UniformizedMdp<'_> {
    /// Transition probabilities `(down, stay, up)` from state `n` under
    /// arrival rate `lambda`.
    pub fn transition_row(&self, n: usize, lambda: f64) -> (f64, f64, f64) {
        let down = self.gamma[n] / self.scale;
        let up = if n < self.inst.capacity {
            lambda / self.scale
        } else {
            0.0
        };
        (down, 1.0 - down - up, up)
    }

    /// Per-step reward `r_n(lambda) / u`.
    pub fn scaled_reward(&self, n: usize, lambda: f64) -> f64 {
        self.inst.reward(n, lambda) / self.scale
    }

    /// Gain (per step) and bias of a fixed policy, from the linear system
    /// `g e + (I - P) h = r` pinned by `h(0) = 0`.
    pub fn evaluate_policy(&self, pol: &Policy) -> Result<(f64, Vec<f64>), MdpError> {
        let s = self.inst.num_states();
        // unknowns x = (g, h(0), ..., h(N))
        let dim = s + 1;
        let mut a = vec![vec![0.0; dim]; dim];
        let mut b = vec![0.0; dim];
        for n in 0..s {
            let (down, stay, up) = self.transition_row(n, pol.rates[n]);
            a[n][0] = 1.0;
            a[n][1 + n] += 1.0 - stay;
            if n > 0 {
                a[n][n] -= down;
            }
            if n + 1 < s {
                a[n][2 + n] -= up;
            }
            b[n] = self.scaled_reward(n, pol.rates[n]);
        }
        a[s][1] = 1.0; // h(0) = 0

        let lu = LuFactor::new(a.clone())?;
        let mut x = lu.solve(&b);
        // one step of iterative refinement
        let mut resid = vec![0.0; dim];
        for i in 0..dim {
            let mut acc = b[i];
            for j in 0..dim {
                acc -= a[i][j] * x[j];
            }
            resid[i] = acc;
        }
        let corr = lu.solve(&resid);
        for (xi, ci) in x.iter_mut().zip(&corr) {
            *xi += ci;
        }

        let r_inf = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0f64;
        for i in 0..dim {
            let mut acc = -b[i];
            for j in 0..dim {
                acc += a[i][j] * x[j];
            }
            worst = worst.max(acc.abs());
        }
        let tolerance = 1e-10 * r_inf.max(1.0);
        if worst > tolerance {
            return Err(MdpError::ResidualTooLarge {
                residual: worst,
                tolerance,
            });
        }
        Ok((x[0], x[1..].to_vec()))
    }

    /// One policy-improvement sweep: in each state pick the smallest
    /// maximizer of the one-step reward plus expected bias, restricted to
    /// `[0, caps[n]]`.
    ///
    /// The bias terms that depend on the action reduce to
    /// `lambda (h(n+1) - h(n)) / u`, so each state is a revenue-plus-linear
    /// maximization with slope `c = h(n+1) - h(n)`.
    pub fn improve_policy(&self, h: &[f64], caps: &[f64]) -> Result<Policy, MdpError> {
        let cap_n = self.inst.capacity;
        let mut rates = Vec::with_capacity(cap_n + 1);
        for n in 0..cap_n {
            let cap = caps[n];
            if cap <= 0.0 {
                rates.push(0.0);
                continue;
            }
            let c = h[n + 1] - h[n];
            let (lam, _) = maximize_revenue_plus_linear(
                &self.inst.distribution,
                self.inst.max_arrival_rate,
                c,
                cap,
            )?;
            rates.push(lam);
        }
        rates.push(0.0);
        Ok(Policy { rates })
    }

    /// Largest optimality-equation violation over the full action space,
    /// in per-step units: `max_n | max_lambda {r + P h} - g - h(n) |`.
    pub fn bellman_residual(&self, g: f64, h: &[f64]) -> Result<f64, MdpError> {
        let s = self.inst.num_states();
        let mut worst = 0.0f64;
        for n in 0..s {
            let best = if n < self.inst.capacity {
                let c = h[n + 1] - h[n];
                let (_, v) = maximize_revenue_plus_linear(
                    &self.inst.distribution,
                    self.inst.max_arrival_rate,
                    c,
                    self.inst.max_arrival_rate,
                )?;
                v / self.scale
            } else {
                0.0
            };
            let down = self.gamma[n] / self.scale;
            let fixed = self.scaled_reward(n, 0.0)
                + if n > 0 { down * (h[n - 1] - h[n]) } else { 0.0 }
                + h[n];
            worst = worst.max((best + fixed - g - h[n]).abs());
        }
        Ok(worst)
    }
}

/// Dense LU with partial pivoting; sized for the small bordered systems here.
struct LuFactor {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl LuFactor {
    fn new(mut a: Vec<Vec<f64>>) -> Result<Self, MdpError> {
        let n = a.len();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (pivot_row, pivot_abs) = (col..n)
                .map(|r| (r, a[r][col].abs()))
                .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
                .unwrap();
            if pivot_abs < 1e-300 {
                return Err(MdpError::SingularSystem(format!(
                    "no pivot in column {col} of a {n}x{n} system"
                )));
            }
            a.swap(col, pivot_row);
            perm.swap(col, pivot_row);
            let pivot = a[col][col];
            for r in col + 1..n {
                let factor = a[r][col] / pivot;
                a[r][col] = factor;
                for c in col + 1..n {
                    a[r][c] -= factor * a[col][c];
                }
            }
        }
        Ok(LuFactor { lu: a, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for r in 1..n {
            for c in 0..r {
                x[r] -= self.lu[r][c] * x[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                x[r] -= self.lu[r][c] * x[c];
            }
            x[r] /= self.lu[r][r];
        }
        x
    }
}

/// Output of either solver.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub policy: Policy,
    /// Optimal long-run average gain per unit of original time.
    pub gain: f64,
    /// Bias vector `h(0) .. h(N)` with `h(0) = 0`.
    pub bias: Vec<f64>,
    /// Quoted price per state; `None` when the blocking "price" is infinite
    /// (exponential willingness to pay).
    pub prices: Vec<Option<f64>>,
    pub iterations: usize,
    pub wall_time: Duration,
    /// Optimality-equation residual in original reward units.
    pub bellman_residual: f64,
}

impl Serialize for SolveResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("SolveResult", 6)?;
        st.serialize_field("gain", &self.gain)?;
        st.serialize_field("policy", &self.policy)?;
        st.serialize_field("prices", &self.prices)?;
        st.serialize_field("iterations", &self.iterations)?;
        st.serialize_field("wall_time_ns", &(self.wall_time.as_nanos() as u64))?;
        st.serialize_field("residual", &self.bellman_residual)?;
        st.end()
    }
}

/// Which action-space restriction the improvement sweep applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Restriction {
    /// Regular policy iteration: full `[0, lambda]` everywhere.
    Full,
    /// Once the previous iterate starts decreasing at some state, cap the
    /// next state's action set by the previous iterate's rate there.
    Unimodal,
    /// Cap every state by the previous iterate's rate one state below
    /// (valid when the optimum is known monotone, i.e. `C_s <= C_q`).
    Monotone,
}

fn action_caps(inst: &Instance, prev: &[f64], restriction: Restriction) -> Vec<f64> {
    let big = inst.max_arrival_rate;
    let n = inst.capacity;
    let mut caps = vec![big; n];
    let tol = 1e-12 * big;
    match restriction {
        Restriction::Full => {}
        Restriction::Unimodal => {
            for i in 1..n.saturating_sub(1) {
                if prev[i - 1] > prev[i] + tol {
                    caps[i + 1] = prev[i];
                }
            }
        }
        Restriction::Monotone => {
            for i in 1..n {
                caps[i] = prev[i - 1];
            }
        }
    }
    caps
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn run(inst: &Instance, eps: f64, restriction: Restriction) -> Result<SolveResult, MdpError> {
    let start = Instant::now();
    let mdp = build(inst);
    let mut pol = Policy::zero(inst);
    let mut iterations = 0usize;
    let mut restriction = restriction;
    let (gain, bias) = loop {
        let (g, h) = mdp.evaluate_policy(&pol)?;
        // the first sweep uses the full action space: the all-zero starting
        // policy carries no structural information to restrict by
        let caps = if iterations == 0 {
            action_caps(inst, &pol.rates, Restriction::Full)
        } else {
            action_caps(inst, &pol.rates, restriction)
        };
        let next = mdp.improve_policy(&h, &caps)?;
        iterations += 1;
        let step = l2_distance(&next.rates, &pol.rates);
        if step <= eps {
            pol = next;
            // restricted variants can in principle stall on a suboptimal
            // fixed point of the capped sweep; verify against the full
            // action space and fall back to unrestricted iteration if the
            // optimality equation is not satisfied
            let (g, h) = mdp.evaluate_policy(&pol)?;
            if restriction != Restriction::Full
                && mdp.bellman_residual(g, &h)? > 1e-8
            {
                restriction = Restriction::Full;
                continue;
            }
            break (g, h);
        }
        pol = next;
        if iterations >= MAX_ITERATIONS {
            let residual = mdp.bellman_residual(g, &h)? * mdp.scale;
            return Err(MdpError::IterationCapExceeded {
                best: Box::new(finish(inst, &mdp, pol, g, h, iterations, residual, start)),
            });
        }
    };
    let residual = mdp.bellman_residual(gain, &bias)? * mdp.scale;
    Ok(finish(
        inst, &mdp, pol, gain, bias, iterations, residual, start,
    ))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    inst: &Instance,
    mdp: &UniformizedMdp,
    policy: Policy,
    gain_scaled: f64,
    bias: Vec<f64>,
    iterations: usize,
    residual: f64,
    start: Instant,
) -> SolveResult {
    let prices = policy
        .rates
        .iter()
        .map(|&lam| inst.price_for_rate(lam).filter(|p| p.is_finite()))
        .collect();
    SolveResult {
        policy,
        gain: gain_scaled * mdp.scale,
        bias,
        prices,
        iterations,
        wall_time: start.elapsed(),
        bellman_residual: residual,
    }
}

/// Default convergence threshold for the l2 stopping rule, `1e-9 * lambda`.
pub fn default_epsilon(inst: &Instance) -> f64 {
    1e-9 * inst.max_arrival_rate
}

/// Regular policy iteration over the full action space.
pub fn solve_baseline(inst: &Instance, eps: f64) -> Result<SolveResult, MdpError> {
    run(inst, eps, Restriction::Full)
}

/// Policy iteration with the structural action-space restriction: monotone
/// caps when `C_s <= C_q`, otherwise the peak-triggered uni-modal caps.
pub fn solve_unimodal(inst: &Instance, eps: f64) -> Result<SolveResult, MdpError> {
    let cc = inst.cost_coefficients();
    let restriction = if cc.service <= cc.queue {
        Restriction::Monotone
    } else {
        Restriction::Unimodal
    };
    run(inst, eps, restriction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain;
    use crate::model::EvaluationDistribution;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn uni() -> EvaluationDistribution {
        EvaluationDistribution::uniform(20.0, 50.0).unwrap()
    }

    fn fig_instance() -> Instance {
        Instance::new(5.0, 2.0, 1, 10, 1.0, 2.0, 10.0, 40.0, 10.0, uni()).unwrap()
    }

    fn random_instance(rng: &mut impl Rng) -> Instance {
        let m = 1 + rng.gen_range(0..3usize);
        let n = m + rng.gen_range(0..10usize);
        let dist = if rng.gen_bool(0.5) {
            uni()
        } else {
            EvaluationDistribution::exponential(35.0).unwrap()
        };
        Instance::new(
            0.5 + 49.5 * rng.gen::<f64>(),
            0.1 + 49.9 * rng.gen::<f64>(),
            m,
            n,
            50.0 * rng.gen::<f64>(),
            0.1 + 49.9 * rng.gen::<f64>(),
            50.0 * rng.gen::<f64>(),
            50.0 * rng.gen::<f64>(),
            50.0 * rng.gen::<f64>(),
            dist,
        )
        .unwrap()
    }

    fn random_policy(inst: &Instance, rng: &mut impl Rng) -> Policy {
        let mut rates: Vec<f64> = (0..inst.num_states())
            .map(|_| inst.max_arrival_rate * rng.gen::<f64>())
            .collect();
        *rates.last_mut().unwrap() = 0.0;
        Policy::new(rates, inst).unwrap()
    }

    #[test]
    fn rows_are_stochastic() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let inst = random_instance(&mut rng);
            let mdp = build(&inst);
            for _ in 0..50 {
                let n = rng.gen_range(0..inst.num_states());
                let lam = inst.max_arrival_rate * rng.gen::<f64>();
                let (down, stay, up) = mdp.transition_row(n, lam);
                assert!(down >= 0.0 && stay >= 0.0 && up >= 0.0);
                assert!((down + stay + up - 1.0).abs() < 1e-15);
                if n == 0 {
                    assert_eq!(down, 0.0);
                }
                if n == inst.capacity {
                    assert_eq!(up, 0.0);
                }
            }
        }
    }

    #[test]
    fn evaluate_zero_policy() {
        let inst = fig_instance();
        let mdp = build(&inst);
        let (g, h) = mdp.evaluate_policy(&Policy::zero(&inst)).unwrap();
        assert!(g.abs() < 1e-12);
        assert_eq!(h[0], 0.0);
        // occupancy only costs, so relative values fall with state
        for w in h.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn evaluate_matches_chain_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let inst = random_instance(&mut rng);
            let mdp = build(&inst);
            let pol = random_policy(&inst, &mut rng);
            let (g, _) = mdp.evaluate_policy(&pol).unwrap();
            let g_chain = chain::gain(&inst, &pol);
            assert!(
                (g * mdp.scale - g_chain).abs() <= 1e-9 * (1.0 + g_chain.abs()),
                "solver gain {} vs chain gain {}",
                g * mdp.scale,
                g_chain
            );
        }
    }

    #[test]
    fn evaluate_two_state_constant_policy() {
        let inst = Instance::new(5.0, 2.0, 1, 1, 1.0, 2.0, 10.0, 40.0, 10.0, uni()).unwrap();
        let mdp = build(&inst);
        let pol = Policy::new(vec![5.0, 0.0], &inst).unwrap();
        let (g, _) = mdp.evaluate_policy(&pol).unwrap();
        // two-state closed form: P_0 = gamma_1 / (lambda + gamma_1)
        let gamma1 = 3.0;
        let p0 = gamma1 / (5.0 + gamma1);
        let expect = inst.reward(0, 5.0) * p0 + inst.reward(1, 0.0) * (1.0 - p0);
        assert!((g * mdp.scale - expect).abs() < 1e-10);
    }

    #[test]
    fn improve_matches_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let inst = random_instance(&mut rng);
            let mdp = build(&inst);
            let s = inst.num_states();
            let h: Vec<f64> = (0..s).map(|_| -60.0 + 120.0 * rng.gen::<f64>()).collect();
            let caps = vec![inst.max_arrival_rate; inst.capacity];
            let pol = mdp.improve_policy(&h, &caps).unwrap();
            let n = rng.gen_range(0..inst.capacity);
            let obj = |lam: f64| {
                let (down, stay, up) = mdp.transition_row(n, lam);
                mdp.scaled_reward(n, lam)
                    + up * h[n + 1]
                    + stay * h[n]
                    + if n > 0 { down * h[n - 1] } else { 0.0 }
            };
            let grid = inst.max_arrival_rate / 10_000.0;
            let best_grid = (0..=10_000)
                .map(|i| obj(i as f64 * grid))
                .fold(f64::NEG_INFINITY, f64::max);
            let got = obj(pol.rates[n]);
            assert!(
                got >= best_grid - 1e-9 * best_grid.abs().max(1.0),
                "state {n}: improve value {got} below grid value {best_grid}"
            );
        }
    }

    #[test]
    fn improve_respects_price_ceiling() {
        let inst = fig_instance();
        let mdp = build(&inst);
        // h drops by more than the largest willingness to pay
        let h: Vec<f64> = (0..inst.num_states()).map(|n| -60.0 * n as f64).collect();
        let caps = vec![inst.max_arrival_rate; inst.capacity];
        let pol = mdp.improve_policy(&h, &caps).unwrap();
        assert!(pol.rates.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn solved_policy_increases_then_decreases() {
        let inst = fig_instance();
        let res = solve_baseline(&inst, default_epsilon(&inst)).unwrap();
        let tol = 1e-8 * inst.max_arrival_rate;
        assert!(res.policy.is_unimodal(tol));
        let peak = res.policy.peak_index(tol);
        assert!(peak >= 1, "expected interior peak, got {peak}");
        // strict rise then strict fall over the decision states
        let r = &res.policy.rates[..inst.capacity];
        for n in 0..peak {
            assert!(r[n] < r[n + 1] + tol);
        }
        for n in peak..r.len() - 1 {
            assert!(r[n] > r[n + 1] - tol);
        }
        assert!(res.bellman_residual <= 1e-8 * inst.uniformization_constant());
    }

    #[test]
    fn monotone_without_sufficient_condition() {
        // service coefficient exceeds queue coefficient here, yet the solved
        // policy still turns out monotone nonincreasing
        let dist = EvaluationDistribution::uniform(0.0, 31.0).unwrap();
        let inst =
            Instance::new(47.08, 42.99, 1, 4, 5.24, 10.7, 9.48, 27.09, 1.49, dist).unwrap();
        let cc = inst.cost_coefficients();
        assert!(cc.service > cc.queue);
        let res = solve_unimodal(&inst, default_epsilon(&inst)).unwrap();
        assert!(res
            .policy
            .is_monotone_nonincreasing(1e-8 * inst.max_arrival_rate));
    }

    #[test]
    fn solvers_agree_and_obey_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..60 {
            let inst = random_instance(&mut rng);
            let eps = default_epsilon(&inst);
            let a = solve_baseline(&inst, eps).unwrap();
            let b = solve_unimodal(&inst, eps).unwrap();
            assert!(
                (a.gain - b.gain).abs() <= 1e-7 * (1.0 + a.gain.abs()),
                "solver gains diverge: {} vs {}",
                a.gain,
                b.gain
            );
            let tol = 1e-8 * inst.max_arrival_rate;
            assert!(b.policy.is_unimodal(tol));
            let cc = inst.cost_coefficients();
            if cc.service <= cc.queue {
                assert!(b.policy.is_monotone_nonincreasing(tol));
            }
            assert!(b.bellman_residual <= 1e-8 * inst.uniformization_constant());
            assert!(
                (b.gain - chain::gain(&inst, &b.policy)).abs() <= 1e-9 * (1.0 + b.gain.abs())
            );
        }
    }

    #[test]
    fn gain_dominates_random_policies() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..10 {
            let inst = random_instance(&mut rng);
            let res = solve_unimodal(&inst, default_epsilon(&inst)).unwrap();
            for _ in 0..100 {
                let pol = random_policy(&inst, &mut rng);
                let g = chain::gain(&inst, &pol);
                assert!(
                    res.gain >= g - 1e-7 * (1.0 + res.gain.abs()),
                    "random policy gain {g} beats solved gain {}",
                    res.gain
                );
            }
        }
    }

    #[test]
    fn small_buffer_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let mut inst = random_instance(&mut rng);
            while inst.num_servers != 1 || inst.capacity != 2 {
                inst = random_instance(&mut rng);
            }
            let res = solve_unimodal(&inst, default_epsilon(&inst)).unwrap();
            let big = inst.max_arrival_rate;
            let mut best = f64::NEG_INFINITY;
            for i in 0..=200 {
                for j in 0..=200 {
                    let pol = Policy {
                        rates: vec![big * i as f64 / 200.0, big * j as f64 / 200.0, 0.0],
                    };
                    best = best.max(chain::gain(&inst, &pol));
                }
            }
            assert!(
                res.gain >= best - 5e-3 * (1.0 + res.gain.abs()),
                "grid search found {best}, solver found {}",
                res.gain
            );
        }
    }

    #[test]
    fn bellman_probe_actions() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..20 {
            let inst = random_instance(&mut rng);
            let mdp = build(&inst);
            let res = solve_unimodal(&inst, default_epsilon(&inst)).unwrap();
            let g = res.gain / mdp.scale;
            let h = &res.bias;
            let tol = 1e-8;
            for n in 0..inst.num_states() {
                for i in 0..=100 {
                    let lam = if n < inst.capacity {
                        inst.max_arrival_rate * i as f64 / 100.0
                    } else {
                        0.0
                    };
                    let (down, stay, up) = mdp.transition_row(n, lam);
                    let val = mdp.scaled_reward(n, lam)
                        + up * if n < inst.capacity { h[n + 1] } else { 0.0 }
                        + stay * h[n]
                        + if n > 0 { down * h[n - 1] } else { 0.0 };
                    assert!(
                        val <= g + h[n] + tol,
                        "action {lam} in state {n} violates optimality by {}",
                        val - g - h[n]
                    );
                }
            }
        }
    }

    #[test]
    fn solve_result_json_shape() {
        let inst = fig_instance();
        let res = solve_unimodal(&inst, default_epsilon(&inst)).unwrap();
        let v = serde_json::to_value(&res).unwrap();
        for key in ["gain", "policy", "prices", "iterations", "wall_time_ns", "residual"] {
            assert!(v.get(key).is_some(), "missing key {key}");
        }
        // blocking state quotes the top of the support
        assert_eq!(v["prices"][10], serde_json::json!(50.0));
        let exp_inst = Instance::new(
            5.0,
            2.0,
            1,
            3,
            1.0,
            2.0,
            1.0,
            1.0,
            1.0,
            EvaluationDistribution::exponential(35.0).unwrap(),
        )
        .unwrap();
        let res = solve_unimodal(&exp_inst, default_epsilon(&exp_inst)).unwrap();
        let v = serde_json::to_value(&res).unwrap();
        assert!(v["prices"][3].is_null());
    }
}
