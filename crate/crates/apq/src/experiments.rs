//! Randomized benchmark campaigns: draw system parameters at random, solve
//! each instance exactly and with every heuristic, and aggregate the results
//! into the standard artifacts (structure scatter, performance-ratio records,
//! structure-agreement counts, solver-timing comparison).
//!
//! Campaigns are deterministic: each sample index gets its own counter-mode
//! RNG stream derived from the campaign seed, so results do not depend on
//! thread scheduling. Wall-clock timings are of course machine-dependent;
//! everything else reproduces byte-for-byte.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::heuristics;
use crate::mdp;
use crate::model::{EvaluationDistribution, Instance, ModelError};

/// Tolerance (relative to the maximal arrival rate) below which the optimal
/// gain is treated as zero and performance ratios are left undefined.
pub const ZERO_GAIN_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Configuration of one randomized campaign.
///
/// Each sample draws the rates and cost parameters independently from
/// Uniform(0, 50) and the capacity uniformly from a small integer range that
/// depends on the server count: `{2..20}` for a single server, `{5..20}` for
/// the four-server preset.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub sample_count: usize,
    pub seed: u64,
    pub distribution: EvaluationDistribution,
    /// Number of servers, identical across samples; 1 or 4.
    pub num_servers: usize,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.sample_count == 0 {
            return Err(ExperimentError::InvalidSpec(
                "sample_count must be at least 1".into(),
            ));
        }
        if !(self.num_servers == 1 || self.num_servers == 4) {
            return Err(ExperimentError::InvalidSpec(format!(
                "num_servers must be 1 or 4, got {}",
                self.num_servers
            )));
        }
        Ok(())
    }

    fn capacity_range(&self) -> (usize, usize) {
        if self.num_servers == 1 {
            (2, 20)
        } else {
            (5, 20)
        }
    }

    /// The instance for sample `index`; pure function of spec and index.
    pub fn draw_instance(&self, index: usize) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        // open interval keeps lambda, mu, theta_q strictly positive
        let draw = |rng: &mut ChaCha8Rng| 50.0 * rng.sample::<f64, _>(rand::distributions::Open01);
        let lambda = draw(&mut rng);
        let mu = draw(&mut rng);
        let theta_s = draw(&mut rng);
        let theta_q = draw(&mut rng);
        let c_s = draw(&mut rng);
        let c_q = draw(&mut rng);
        let c_h = draw(&mut rng);
        let (lo, hi) = self.capacity_range();
        let capacity = rng.gen_range(lo..=hi);
        Instance::new(
            lambda,
            mu,
            self.num_servers,
            capacity,
            theta_s,
            theta_q,
            c_h,
            c_s,
            c_q,
            self.distribution,
        )
        .expect("drawn parameters are always admissible")
    }
}

/// Everything recorded about one solved sample.
#[derive(Debug, Clone, Serialize)]
pub struct InstanceRecord {
    pub index: usize,
    pub instance: Instance,
    /// Attached cost of a customer admitted straight into service.
    pub cost_service: f64,
    /// Attached cost of a customer admitted into the queue.
    pub cost_queue: f64,
    pub gain_optimal: f64,
    /// Optimal rates nonincreasing in the state.
    pub monotone: bool,
    /// Mode of the optimal rate profile (equals 0 when monotone).
    pub peak: usize,
    pub gain_static: f64,
    pub gain_cutoff: f64,
    pub gain_two_price: f64,
    /// Gain ratios heuristic/optimal; `None` when the optimal gain is zero.
    pub ratio_static: Option<f64>,
    pub ratio_cutoff: Option<f64>,
    pub ratio_two_price: Option<f64>,
    /// Best two-price policy quotes the lower price while a server is idle
    /// (service rate at least the queue rate), i.e. is itself monotone.
    pub two_price_monotone: bool,
    /// Solve time of the unrestricted policy iteration, seconds.
    pub time_baseline: f64,
    /// Solve time of the structure-restricted policy iteration, seconds.
    pub time_restricted: f64,
    /// Relative performance improvement `(1 - t_restricted/t_baseline) * 100`.
    pub rpi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignFailure {
    pub index: usize,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Campaign {
    pub spec: ExperimentSpec,
    pub records: Vec<InstanceRecord>,
    pub failures: Vec<CampaignFailure>,
}

fn solve_record(spec: &ExperimentSpec, index: usize) -> Result<InstanceRecord, String> {
    let inst = spec.draw_instance(index);
    let eps = mdp::default_epsilon(&inst);
    let baseline = mdp::solve_baseline(&inst, eps).map_err(|e| e.to_string())?;
    let restricted = mdp::solve_unimodal(&inst, eps).map_err(|e| e.to_string())?;
    let tol = 1e-8 * inst.max_arrival_rate;

    let stat = heuristics::best_static(&inst);
    let cutoff = heuristics::best_cutoff_static(&inst);
    let two = heuristics::best_two_price(&inst);

    let g = restricted.gain;
    let ratio = |h: f64| {
        if g > ZERO_GAIN_TOL * inst.max_arrival_rate {
            Some(h / g)
        } else {
            None
        }
    };

    let cc = inst.cost_coefficients();
    let t0 = baseline.wall_time.as_secs_f64();
    let t1 = restricted.wall_time.as_secs_f64();
    Ok(InstanceRecord {
        index,
        cost_service: cc.service,
        cost_queue: cc.queue,
        gain_optimal: g,
        monotone: restricted.policy.is_monotone_nonincreasing(tol),
        peak: restricted.policy.peak_index(tol),
        gain_static: stat.gain,
        gain_cutoff: cutoff.gain,
        gain_two_price: two.gain,
        ratio_static: ratio(stat.gain),
        ratio_cutoff: ratio(cutoff.gain),
        ratio_two_price: ratio(two.gain),
        two_price_monotone: two.rate_service >= two.rate_queue - tol,
        time_baseline: t0,
        time_restricted: t1,
        rpi: (1.0 - t1 / t0) * 100.0,
        instance: inst,
    })
}

/// Runs the campaign: draws and solves every sample, in parallel, collecting
/// results in sample order. Per-instance solver failures are recorded and do
/// not abort the campaign.
pub fn run_campaign(spec: &ExperimentSpec) -> Result<Campaign, ExperimentError> {
    spec.validate()?;
    let outcomes: Vec<_> = (0..spec.sample_count)
        .into_par_iter()
        .map(|i| (i, solve_record(spec, i)))
        .collect();
    let mut records = Vec::with_capacity(spec.sample_count);
    let mut failures = Vec::new();
    for (index, outcome) in outcomes {
        match outcome {
            Ok(rec) => records.push(rec),
            Err(message) => failures.push(CampaignFailure { index, message }),
        }
    }
    Ok(Campaign {
        spec: spec.clone(),
        records,
        failures,
    })
}

/// Structure scatter: one row per record with the two attached-cost
/// coefficients, the capacity, and whether the optimal policy is monotone.
pub fn scatter_table(records: &[InstanceRecord]) -> String {
    let mut out = String::from("C_s,C_q,N,monotone\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.cost_service,
            r.cost_queue,
            r.instance.capacity,
            r.monotone as u8
        ));
    }
    out
}

/// Records whose optimal policy is monotone even though the service-attached
/// cost exceeds the queue-attached cost (the sufficient condition for
/// monotonicity fails). Empirically these all have small buffers.
pub fn scatter_exceptions(records: &[InstanceRecord]) -> Vec<&InstanceRecord> {
    records
        .iter()
        .filter(|r| r.monotone && r.cost_service > r.cost_queue)
        .collect()
}

/// 2x2 contingency counts: optimal-policy monotone against best two-price
/// policy monotone (service rate at least queue rate).
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct StructureAgreement {
    pub both_monotone: usize,
    pub optimal_only: usize,
    pub two_price_only: usize,
    pub neither: usize,
}

impl StructureAgreement {
    pub fn total(&self) -> usize {
        self.both_monotone + self.optimal_only + self.two_price_only + self.neither
    }

    /// Fraction of records where the two classifications differ.
    pub fn disagreement(&self) -> f64 {
        (self.optimal_only + self.two_price_only) as f64 / self.total() as f64
    }

    pub fn csv(&self) -> String {
        format!(
            "optimal_monotone,two_price_monotone,count\n1,1,{}\n1,0,{}\n0,1,{}\n0,0,{}\n",
            self.both_monotone, self.optimal_only, self.two_price_only, self.neither
        )
    }
}

pub fn structure_agreement(records: &[InstanceRecord]) -> StructureAgreement {
    let mut out = StructureAgreement::default();
    for r in records {
        match (r.monotone, r.two_price_monotone) {
            (true, true) => out.both_monotone += 1,
            (true, false) => out.optimal_only += 1,
            (false, true) => out.two_price_only += 1,
            (false, false) => out.neither += 1,
        }
    }
    out
}

/// Timing comparison of the two policy-iteration variants.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TimingReport {
    pub samples: usize,
    pub mean_time_baseline: f64,
    pub mean_time_restricted: f64,
    /// Mean of the per-instance relative improvements, percent.
    pub mean_rpi: f64,
    pub max_rpi: f64,
}

pub fn timing_report(records: &[InstanceRecord]) -> TimingReport {
    let n = records.len().max(1) as f64;
    let mean = |f: fn(&InstanceRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    TimingReport {
        samples: records.len(),
        mean_time_baseline: mean(|r| r.time_baseline),
        mean_time_restricted: mean(|r| r.time_restricted),
        mean_rpi: mean(|r| r.rpi),
        max_rpi: records.iter().map(|r| r.rpi).fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Ratio histogram with fixed-width bins over [0, 1]; the standard tables
/// use width 0.1 and a 0.01-wide zoom of the top decile.
pub fn ratio_histogram(ratios: impl Iterator<Item = f64>, width: f64) -> Vec<(f64, usize)> {
    let bins = (1.0 / width).round() as usize;
    let mut counts = vec![0usize; bins];
    for r in ratios {
        let i = ((r / width).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (i as f64 * width, c))
        .collect()
}

pub fn histogram_csv(hist: &[(f64, usize)]) -> String {
    let mut out = String::from("bin_low,count\n");
    for (lo, c) in hist {
        out.push_str(&format!("{lo},{c}\n"));
    }
    out
}
