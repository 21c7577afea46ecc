use std::time::Instant;

use layertree::dp::{solve, Budget, Decision, OptConfig};
use layertree::generate::{generate_instance, GenParams, Ratio};
use layertree::instance::{Instance, LayerSpec};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let index: u64 = args[1].parse().unwrap();
    let budget_s: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(120);
    let tag = args.get(3).map(|s| s.as_str()).unwrap_or("all");
    let params = GenParams {
        lambda: 6,
        sources: (1000, 1000),
        factor: (Ratio::new(17, 10), Ratio::new(23, 10)),
        seed: 20260808,
        count: 64,
    };
    let raw = generate_instance(&params, index).unwrap();
    let mut layers = raw.layers().to_vec();
    layers.push(LayerSpec::new(1, 0, raw.sources()));
    let inst = Instance::new(raw.sources(), layers).unwrap();
    println!("{inst}");
    let start = Instant::now();
    let (d, diag) = solve(&inst, OptConfig::from_tag(tag).unwrap(), Budget::with_time(budget_s * 1000));
    println!(
        "{} in {:.1} s; {diag:?}",
        match d { Decision::Feasible(_) => "feasible", Decision::Infeasible => "infeasible", Decision::Timeout => "timeout" },
        start.elapsed().as_secs_f64()
    );
}
