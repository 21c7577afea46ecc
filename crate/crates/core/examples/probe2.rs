use std::time::Instant;

use layertree::dp::{solve, Budget, Decision, OptConfig};
use layertree::generate::{generate_instance, GenParams, Ratio};
use layertree::instance::{Instance, LayerSpec};

fn with_sink(inst: &Instance) -> Instance {
    let mut layers = inst.layers().to_vec();
    layers.push(LayerSpec::new(1, 0, inst.sources()));
    Instance::new(inst.sources(), layers).unwrap()
}

fn main() {
    let params = GenParams {
        lambda: 6,
        sources: (1000, 1000),
        factor: (Ratio::new(17, 10), Ratio::new(23, 10)),
        seed: 20260808,
        count: 10,
    };
    for index in [0u64, 1, 2] {
        let raw = generate_instance(&params, index).unwrap();
        let inst = with_sink(&raw);
        println!("index {index}: {inst}");
        let start = Instant::now();
        let (d, diag) = solve(&inst, OptConfig::all(), Budget::with_time(30_000));
        println!(
            "  -> {:?} in {:.0} ms; diag {:?}",
            match d { Decision::Feasible(_) => "feasible", Decision::Infeasible => "infeasible", Decision::Timeout => "timeout" },
            start.elapsed().as_secs_f64() * 1000.0,
            diag
        );
    }
}
