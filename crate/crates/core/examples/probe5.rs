use std::time::Instant;

use layertree::dp::{solve, solve_basic, Budget, Decision, OptConfig};
use layertree::instance::{Instance, LayerSpec};
use layertree::oracle::{brute_force_decide, OracleLimits};

fn main() {
    // one slice of the exhaustive grid: lambda = 3, n0 = 10
    let limits = OracleLimits::default();
    let unlimited = Budget::unlimited();
    let (all, none) = (OptConfig::all(), OptConfig::none());
    let n0 = 10u64;
    let start = Instant::now();
    let mut count = 0u64;
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    for u in 1..=n0 {
        for l in 0..=u {
            pairs.push((l, u));
        }
    }
    let mut disagreements = 0u64;
    for n1 in 1..=4u64 {
        for n2 in 1..=4u64 {
            for n3 in 1..=4u64 {
                for &(l1, u1) in &pairs {
                    for &(l2, u2) in &pairs {
                        for &(l3, u3) in &pairs {
                            let inst = Instance::new(
                                n0,
                                vec![
                                    LayerSpec::new(n1, l1, u1),
                                    LayerSpec::new(n2, l2, u2),
                                    LayerSpec::new(n3, l3, u3),
                                ],
                            )
                            .unwrap();
                            let expected =
                                brute_force_decide(&inst, &limits).unwrap().feasible;
                            let got_all =
                                matches!(solve(&inst, all, unlimited).0, Decision::Feasible(_));
                            let got_none =
                                matches!(solve(&inst, none, unlimited).0, Decision::Feasible(_));
                            let got_basic =
                                matches!(solve_basic(&inst, unlimited), Decision::Feasible(_));
                            if got_all != expected || got_none != expected || got_basic != expected
                            {
                                disagreements += 1;
                                if disagreements < 5 {
                                    println!("DISAGREE on {inst}: oracle={expected} all={got_all} none={got_none} basic={got_basic}");
                                }
                            }
                            count += 1;
                            if count % 1_000_000 == 0 {
                                let rate = count as f64 / start.elapsed().as_secs_f64();
                                println!("{count} done, {rate:.0}/s");
                            }
                        }
                    }
                }
            }
        }
    }
    println!(
        "checked {count} in {:.1}s ({:.0}/s), disagreements={disagreements}",
        start.elapsed().as_secs_f64(),
        count as f64 / start.elapsed().as_secs_f64()
    );
}
