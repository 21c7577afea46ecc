use std::time::Instant;

use layertree::dp::{solve, Budget, Decision, OptConfig};
use layertree::generate::{generate_instance, GenParams, Ratio};
use layertree::instance::{Instance, LayerSpec};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let budget_ms: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(60_000);
    let params = GenParams {
        lambda: 6,
        sources: (100, 300),
        factor: (Ratio::new(17, 10), Ratio::new(23, 10)),
        seed: 77,
        count: n,
    };
    let start_all = Instant::now();
    let mut disagreements = 0;
    for index in 0..n {
        let raw = generate_instance(&params, index).unwrap();
        let mut layers = raw.layers().to_vec();
        layers.push(LayerSpec::new(1, 0, raw.sources()));
        let inst = Instance::new(raw.sources(), layers).unwrap();
        let mut outcomes = Vec::new();
        for tag in OptConfig::TAGS {
            let cfg = OptConfig::from_tag(tag).unwrap();
            let t = Instant::now();
            let (d, _) = solve(
                &inst,
                cfg,
                Budget { time_limit: Some(std::time::Duration::from_millis(budget_ms)), max_stored: Some(6_000_000) },
            );
            let ms = t.elapsed().as_secs_f64() * 1000.0;
            let o = match d {
                Decision::Feasible(_) => "F",
                Decision::Infeasible => "I",
                Decision::Timeout => "T",
            };
            outcomes.push((tag, o, ms));
        }
        let decided: Vec<&str> = outcomes.iter().filter(|(_, o, _)| *o != "T").map(|(_, o, _)| *o).collect();
        let consistent = decided.windows(2).all(|w| w[0] == w[1]);
        if !consistent {
            disagreements += 1;
        }
        let line: Vec<String> =
            outcomes.iter().map(|(t, o, ms)| format!("{t}={o}/{ms:.0}ms")).collect();
        println!("idx {index}: {}{}", line.join(" "), if consistent { "" } else { "  <<< DISAGREE" });
    }
    println!("total {:.1}s disagreements={disagreements}", start_all.elapsed().as_secs_f64());
}
