//! Solve one instance and print the optimal state-dependent rates and
//! prices. The chosen instance has a non-monotone optimum: the arrival rate
//! first rises with congestion, then falls.

use apq::{mdp, Instance};

fn main() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/unimodal_peak.json"
    ))
    .unwrap();
    let inst: Instance = serde_json::from_str(&text).unwrap();

    let eps = mdp::default_epsilon(&inst);
    let solved = mdp::solve_unimodal(&inst, eps).unwrap();

    println!("gain g* = {:.6}  ({} iterations, {:?})", solved.gain, solved.iterations, solved.wall_time);
    println!("{:>5} {:>12} {:>12}", "state", "rate", "price");
    for (n, &rate) in solved.policy.rates.iter().enumerate() {
        match solved.prices[n] {
            Some(p) => println!("{n:>5} {rate:>12.6} {p:>12.4}"),
            None => println!("{n:>5} {rate:>12.6} {:>12}", "-"),
        }
    }

    let tol = 1e-8 * inst.max_arrival_rate;
    println!(
        "peak at state {} (monotone: {})",
        solved.policy.peak_index(tol),
        solved.policy.is_monotone_nonincreasing(tol)
    );

    // the unrestricted solver lands on the same gain
    let baseline = mdp::solve_baseline(&inst, eps).unwrap();
    println!("baseline gain = {:.6} (diff {:.2e})", baseline.gain, (baseline.gain - solved.gain).abs());
}
