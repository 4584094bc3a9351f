//! Cross-check the analytic gain of the optimal policy against the
//! discrete-event simulation estimator.

use apq::sim::{simulate, SimConfig};
use apq::{chain, mdp, Instance};

fn main() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/multi_server_overload.json"
    ))
    .unwrap();
    let inst: Instance = serde_json::from_str(&text).unwrap();

    let solved = mdp::solve_unimodal(&inst, mdp::default_epsilon(&inst)).unwrap();
    let analytic = chain::gain(&inst, &solved.policy);

    let cfg = SimConfig::new(20_000.0, 1_000.0, 20, 7).unwrap();
    let est = simulate(&inst, &solved.policy, &cfg).unwrap();

    println!("analytic gain   {analytic:.4}");
    println!("simulated gain  {:.4} +- {:.4}", est.mean_gain, est.std_error);
    println!("z-score         {:.2}", (est.mean_gain - analytic) / est.std_error);

    let (resid, se) = est.littles_residual();
    println!("Little's-law residual {:.4} (SE {:.4})", resid, se);
    println!("effective rate  {:.4} (analytic {:.4})",
        est.effective_rate, chain::effective_arrival_rate(&inst, &solved.policy));
}
