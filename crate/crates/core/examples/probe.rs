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
    let args: Vec<String> = std::env::args().collect();
    let n: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let flo: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(17);
    let fhi: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(23);
    let n0lo: u64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let n0hi: u64 = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let tag = args.get(6).map(|s| s.as_str()).unwrap_or("all");
    let params = GenParams {
        lambda: 6,
        sources: (n0lo, n0hi),
        factor: (Ratio::new(flo, 10), Ratio::new(fhi, 10)),
        seed: 20260808,
        count: n,
    };
    let cfg = OptConfig::from_tag(tag).unwrap();
    let mut times = Vec::new();
    let (mut feas, mut infeas, mut timeo) = (0, 0, 0);
    for index in 0..n {
        let inst = with_sink(&generate_instance(&params, index).unwrap());
        let start = Instant::now();
        let (d, _) = solve(&inst, cfg, Budget::with_time(60_000));
        let ms = start.elapsed().as_secs_f64() * 1000.0;
        times.push(ms);
        match d {
            Decision::Feasible(_) => feas += 1,
            Decision::Infeasible => infeas += 1,
            Decision::Timeout => timeo += 1,
        }
        if ms > 1000.0 {
            eprintln!("slow: index {index} took {ms:.0} ms -> {:?}", times.len());
        }
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let total: f64 = times.iter().sum();
    println!(
        "n={n} feasible={feas} infeasible={infeas} timeout={timeo} median={:.3}ms mean={:.3}ms max={:.1}ms total={:.1}s",
        times[times.len() / 2],
        total / n as f64,
        times.last().unwrap(),
        total / 1000.0
    );
}
