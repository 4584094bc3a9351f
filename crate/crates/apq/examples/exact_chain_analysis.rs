//! Exact birth-death analysis of a fixed policy: steady state, long-run
//! gain, and the algebraically equivalent reformulated gain.

use apq::{chain, Instance, Policy};

fn main() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/multi_server_overload.json"
    ))
    .unwrap();
    let inst: Instance = serde_json::from_str(&text).unwrap();

    // admit at full rate while any server is idle, at half rate otherwise
    let pol = Policy::two_price(
        &inst,
        inst.capacity,
        inst.max_arrival_rate,
        0.5 * inst.max_arrival_rate,
    );

    let ss = chain::steady_state(&inst, &pol);
    println!("{:>5} {:>12}", "state", "probability");
    for (n, &p) in ss.probs.iter().enumerate() {
        println!("{n:>5} {p:>12.6}");
    }

    let g = chain::gain(&inst, &pol);
    let g_ref = chain::reformulated_gain(&inst, &pol);
    println!("gain = {g:.6}");
    println!("reformulated gain = {g_ref:.6} (diff {:.2e})", (g - g_ref).abs());
    println!("effective arrival rate = {:.6}", chain::effective_arrival_rate(&inst, &pol));
}
