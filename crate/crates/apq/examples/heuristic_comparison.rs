//! Compare the optimal dynamic policy with the three practical heuristics on
//! an instance where the single-price cutoff family earns nothing but the
//! two-price policy recovers essentially all of the optimal gain.

use apq::{heuristics, mdp, Instance};

fn main() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/two_price_showcase.json"
    ))
    .unwrap();
    let inst: Instance = serde_json::from_str(&text).unwrap();

    let cc = inst.cost_coefficients();
    println!("attached costs: service {:.3}, queue {:.3} (top willingness to pay 50)", cc.service, cc.queue);

    let solved = mdp::solve_unimodal(&inst, mdp::default_epsilon(&inst)).unwrap();
    let s = heuristics::best_static(&inst);
    let c = heuristics::best_cutoff_static(&inst);
    let t = heuristics::best_two_price(&inst);

    println!("optimal    g* = {:.4}", solved.gain);
    println!("static     g  = {:.4}  (rate {:.4})", s.gain, s.rate);
    println!("cutoff     g  = {:.4}  (K = {}, rate {:.4})", c.gain, c.threshold, c.rate);
    println!(
        "two-price  g  = {:.4}  (K = {}, service rate {:.4}, queue rate {:.4})",
        t.gain, t.threshold, t.rate_service, t.rate_queue
    );
    println!("two-price recovers {:.2}% of the optimal gain", 100.0 * t.gain / solved.gain);

    // per-threshold curve of the cutoff search, CSV
    print!("{}", c.curve_csv());
}
