//! Evaluate the analytic performance bounds on one instance, then sweep the
//! service rate upward to show both cutoff bounds tightening toward 1.

use apq::model::EvaluationDistribution;
use apq::{heuristics, mdp, Instance};

fn main() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/cutoff_midrange.json"
    ))
    .unwrap();
    let inst: Instance = serde_json::from_str(&text).unwrap();

    let solved = mdp::solve_unimodal(&inst, mdp::default_epsilon(&inst)).unwrap();
    let report = heuristics::bound_report(&inst, &solved).unwrap();

    println!("optimal revenue {:.4}, cost {:.4}", report.optimal_revenue, report.optimal_cost);
    println!("{:>3} {:>14} {:>14} {:>14} {:>14}", "K", "rev bound", "rev realized", "cost bound", "cost realized");
    for tb in &report.per_threshold {
        let cb = tb.cost_bound.map_or("-".to_string(), |b| format!("{b:.4}"));
        println!(
            "{:>3} {:>14.4} {:>14.4} {:>14} {:>14.4}",
            tb.threshold, tb.revenue_bound, tb.realized_revenue, cb, tb.realized_cost
        );
    }
    if let Some(gap) = report.gap_bound {
        println!("two-price gap bound {:.4}, realized gap {:.4}", gap, report.realized_gap);
    }

    // single-server regime where both bounds at K = 1 become tight as the
    // service rate grows
    println!("\nservice-rate sweep, bounds at K = 1:");
    println!("{:>8} {:>12} {:>12}", "mu", "rev ratio", "cost ratio");
    for exp in 1..=4 {
        let mu = 10f64.powi(exp);
        let inst = Instance::new(
            10.0,
            mu,
            1,
            6,
            10.0,
            10.0,
            11.0,
            3.0,
            27.0,
            EvaluationDistribution::exponential(35.0).unwrap(),
        )
        .unwrap();
        let solved = mdp::solve_unimodal(&inst, mdp::default_epsilon(&inst)).unwrap();
        let report = heuristics::bound_report(&inst, &solved).unwrap();
        let tb = &report.per_threshold[0];
        println!(
            "{mu:>8} {:>12.6} {:>12.6}",
            tb.revenue_bound / tb.realized_revenue.max(1e-300),
            tb.realized_cost / tb.cost_bound.unwrap().max(1e-300),
        );
    }
}
