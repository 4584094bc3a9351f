//! Run a small randomized campaign and summarize the standard artifacts:
//! structure scatter, heuristic performance ratios, structure agreement, and
//! the solver-timing comparison. CSV files land in a temp directory.

use apq::experiments::*;
use apq::model::EvaluationDistribution;

fn main() {
    let spec = ExperimentSpec {
        sample_count: 300,
        seed: 1,
        distribution: EvaluationDistribution::uniform(20.0, 50.0).unwrap(),
        num_servers: 1,
    };
    let campaign = run_campaign(&spec).unwrap();
    println!("{} records, {} failures", campaign.records.len(), campaign.failures.len());

    let frac = |pick: fn(&InstanceRecord) -> Option<f64>, t: f64| {
        let xs: Vec<f64> = campaign.records.iter().filter_map(pick).collect();
        xs.iter().filter(|&&x| x >= t).count() as f64 / xs.len() as f64
    };
    println!("fraction with ratio >= 0.9: static {:.3}, cutoff {:.3}, two-price {:.3}",
        frac(|r| r.ratio_static, 0.9), frac(|r| r.ratio_cutoff, 0.9), frac(|r| r.ratio_two_price, 0.9));

    let agree = structure_agreement(&campaign.records);
    println!("structure agreement: {:?} (disagreement {:.4})", agree, agree.disagreement());

    let exceptions = scatter_exceptions(&campaign.records);
    println!("monotone despite C_s > C_q: {} records, all with buffer N - m <= {}",
        exceptions.len(),
        exceptions.iter().map(|r| r.instance.capacity - r.instance.num_servers).max().unwrap_or(0));

    let timing = timing_report(&campaign.records);
    println!("mean RPI {:.1}%, max RPI {:.1}%", timing.mean_rpi, timing.max_rpi);

    let dir = std::env::temp_dir().join("apq_campaign");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("scatter.csv"), scatter_table(&campaign.records)).unwrap();
    std::fs::write(dir.join("structure_agreement.csv"), agree.csv()).unwrap();
    let hist = ratio_histogram(campaign.records.iter().filter_map(|r| r.ratio_two_price), 0.1);
    std::fs::write(dir.join("hist_two_price.csv"), histogram_csv(&hist)).unwrap();
    println!("CSV artifacts in {}", dir.display());
}
