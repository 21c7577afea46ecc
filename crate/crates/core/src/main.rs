use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use layertree::bench::{run_bench, to_csv};
use layertree::dp::{solve, Budget, Decision, OptConfig};
use layertree::generate::{generate_geometric, generate_instance, GenParams, Ratio};
use layertree::instance::{read_instance, write_instance};
use layertree::oracle::{brute_force_decide, OracleLimits};
use layertree::sofaclap::{
    initial_embedding, layout_cost, optimize, read_layer_graph, write_layout, HeuristicSet,
};
use layertree::tree::{read_tree, verify_tree, write_tree};

#[derive(Parser)]
#[command(
    name = "layertree",
    version,
    about = "Feasibility solver for capacity-constrained layer trees and cable layout optimizer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide feasibility of a .clt instance (exit 0 feasible, 1
    /// infeasible, 2 timeout, 3 error)
    Solve {
        file: PathBuf,
        /// Optimization set: all, none, or no-<optimization>
        #[arg(long, default_value = "all")]
        opts: String,
        /// Wall-clock budget in milliseconds (default one hour)
        #[arg(long)]
        timeout: Option<u64>,
        /// Cap on stored vectors; exceeding it counts as a timeout
        #[arg(long)]
        max_stored: Option<u64>,
        /// Write the certificate tree as JSON
        #[arg(long)]
        tree: Option<PathBuf>,
    },
    /// Exhaustively decide a tiny instance; refuses oversize input
    Oracle { file: PathBuf },
    /// Check a certificate tree against an instance
    Verify { instance: PathBuf, tree: PathBuf },
    /// Generate seeded random instances into a directory
    Generate {
        /// Number of layers above the sources
        #[arg(long)]
        layers: usize,
        /// Source count range LO:HI
        #[arg(long)]
        sources: String,
        /// Layer shrink factor range LO:HI, decimals allowed
        #[arg(long)]
        factor: String,
        #[arg(long)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Emit geometric layer graph JSON instead of plain .clt files
        #[arg(long)]
        sofaclap: bool,
    },
    /// Solve a layer graph's capacity skeleton and optimize the cable
    /// layout of the resulting tree
    Embed {
        file: PathBuf,
        /// Comma list of heuristics: layerwise, equal-weight, general
        #[arg(long)]
        heuristics: Option<String>,
        #[arg(long)]
        timeout: Option<u64>,
        /// Layout JSON destination (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a directory of .clt instances across optimization sets and
    /// print CSV
    Bench {
        dir: PathBuf,
        /// Comma list of optimization sets
        #[arg(long, default_value = "all")]
        opts: String,
        /// Per-solve budget in milliseconds (default one hour)
        #[arg(long)]
        timeout: Option<u64>,
        /// Worker count; LAYERTREE_THREADS overrides the default
        #[arg(long)]
        jobs: Option<usize>,
        /// CSV destination (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn budget_from(timeout: Option<u64>, max_stored: Option<u64>) -> Budget {
    let mut budget = Budget::default();
    if let Some(ms) = timeout {
        budget = Budget::with_time(ms);
    }
    budget.max_stored = max_stored;
    budget
}

fn parse_range(text: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = text.split_once(':').ok_or_else(|| format!("expected LO:HI, got `{text}`"))?;
    let lo = lo.parse().map_err(|_| format!("invalid number `{lo}`"))?;
    let hi = hi.parse().map_err(|_| format!("invalid number `{hi}`"))?;
    Ok((lo, hi))
}

fn parse_factors(text: &str) -> Result<(Ratio, Ratio), String> {
    let (lo, hi) = text.split_once(':').ok_or_else(|| format!("expected LO:HI, got `{text}`"))?;
    let parse = |t: &str| Ratio::parse_decimal(t).ok_or_else(|| format!("invalid factor `{t}`"));
    Ok((parse(lo)?, parse(hi)?))
}

fn default_jobs() -> usize {
    std::env::var("LAYERTREE_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn cmd_solve(
    file: &Path,
    opts: &str,
    timeout: Option<u64>,
    max_stored: Option<u64>,
    tree_out: Option<&Path>,
) -> Result<ExitCode, String> {
    let cfg =
        OptConfig::from_tag(opts).ok_or_else(|| format!("unknown optimization set `{opts}`"))?;
    let text = fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    let inst = read_instance(&text).map_err(|e| format!("{}: {e}", file.display()))?;
    let (decision, _) = solve(&inst, cfg, budget_from(timeout, max_stored));
    println!("{}", decision.outcome());
    match decision {
        Decision::Feasible(tree) => {
            if let Some(path) = tree_out {
                fs::write(path, write_tree(&tree))
                    .map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Decision::Infeasible => Ok(ExitCode::from(1)),
        Decision::Timeout => Ok(ExitCode::from(2)),
    }
}

fn cmd_oracle(file: &Path) -> Result<ExitCode, String> {
    let text = fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    let inst = read_instance(&text).map_err(|e| format!("{}: {e}", file.display()))?;
    let outcome = brute_force_decide(&inst, &OracleLimits::default()).map_err(|e| e.to_string())?;
    if outcome.feasible {
        println!("feasible");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("infeasible");
        Ok(ExitCode::from(1))
    }
}

fn cmd_verify(instance: &Path, tree: &Path) -> Result<ExitCode, String> {
    let inst_text =
        fs::read_to_string(instance).map_err(|e| format!("{}: {e}", instance.display()))?;
    let inst = read_instance(&inst_text).map_err(|e| format!("{}: {e}", instance.display()))?;
    let tree_text = fs::read_to_string(tree).map_err(|e| format!("{}: {e}", tree.display()))?;
    let parsed = read_tree(&tree_text).map_err(|e| format!("{}: {e}", tree.display()))?;
    let report = verify_tree(&inst, &parsed);
    if report.is_valid() {
        println!("valid");
        Ok(ExitCode::SUCCESS)
    } else {
        for v in &report.violations {
            println!("violation: {v}");
        }
        Ok(ExitCode::from(1))
    }
}

fn cmd_generate(
    layers: usize,
    sources: &str,
    factor: &str,
    count: u64,
    seed: u64,
    out: &Path,
    sofaclap: bool,
) -> Result<ExitCode, String> {
    let sources = parse_range(sources)?;
    let (factor_lo, factor_hi) = parse_factors(factor)?;
    let params = GenParams { lambda: layers, sources, factor: (factor_lo, factor_hi), seed, count };
    fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
    let factor_text = factor.split_once(':').unwrap();
    let mut meta = String::from("instance_id,seed,factor_lo,factor_hi\n");
    for index in 0..count {
        let id = format!("{index:04}");
        if sofaclap {
            let graph = generate_geometric(&params, index).map_err(|e| e.to_string())?;
            let path = out.join(format!("{id}.json"));
            fs::write(&path, layertree::sofaclap::write_layer_graph(&graph))
                .map_err(|e| format!("{}: {e}", path.display()))?;
        } else {
            let inst = generate_instance(&params, index).map_err(|e| e.to_string())?;
            let path = out.join(format!("{id}.clt"));
            fs::write(&path, write_instance(&inst))
                .map_err(|e| format!("{}: {e}", path.display()))?;
        }
        meta.push_str(&format!("{id},{seed},{},{}\n", factor_text.0, factor_text.1));
    }
    let meta_path = out.join("meta.csv");
    fs::write(&meta_path, meta).map_err(|e| format!("{}: {e}", meta_path.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_embed(
    file: &Path,
    heuristics: Option<&str>,
    timeout: Option<u64>,
    out: Option<&Path>,
) -> Result<ExitCode, String> {
    let set = match heuristics {
        Some(list) => {
            HeuristicSet::from_list(list).ok_or_else(|| format!("unknown heuristics `{list}`"))?
        }
        None => HeuristicSet::default(),
    };
    let text = fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    let graph = read_layer_graph(&text).map_err(|e| format!("{}: {e}", file.display()))?;
    let skeleton = graph.capacity_instance();
    let (decision, _) = solve(&skeleton, OptConfig::all(), budget_from(timeout, None));
    let tree = match decision {
        Decision::Feasible(tree) => tree,
        Decision::Infeasible => {
            println!("infeasible");
            return Ok(ExitCode::from(1));
        }
        Decision::Timeout => {
            println!("timeout");
            return Ok(ExitCode::from(2));
        }
    };
    let emb = initial_embedding(&graph, &tree).map_err(|e| e.to_string())?;
    let initial = layout_cost(&graph, &tree, &emb).map_err(|e| e.to_string())?;
    let result = optimize(&graph, &tree, &emb, set).map_err(|e| e.to_string())?;
    let final_cost = *result.trace.last().unwrap();
    eprintln!("cost {initial:.3} -> {final_cost:.3} in {} steps", result.trace.len() - 1);
    let layout = write_layout(&result.tree, &result.embedding, final_cost, &result.trace);
    match out {
        Some(path) => fs::write(path, layout).map_err(|e| format!("{}: {e}", path.display()))?,
        None => println!("{layout}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(
    dir: &Path,
    opts: &str,
    timeout: Option<u64>,
    jobs: Option<usize>,
    out: Option<&Path>,
) -> Result<ExitCode, String> {
    let tags: Vec<String> = opts.split(',').map(|s| s.trim().to_string()).collect();
    let jobs = jobs.unwrap_or_else(default_jobs);
    let records =
        run_bench(dir, &tags, jobs, budget_from(timeout, None)).map_err(|e| e.to_string())?;
    let csv = to_csv(&records);
    match out {
        Some(path) => fs::write(path, csv).map_err(|e| format!("{}: {e}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match &cli.command {
        Command::Solve { file, opts, timeout, max_stored, tree } => {
            cmd_solve(file, opts, *timeout, *max_stored, tree.as_deref())
        }
        Command::Oracle { file } => cmd_oracle(file),
        Command::Verify { instance, tree } => cmd_verify(instance, tree),
        Command::Generate { layers, sources, factor, count, seed, out, sofaclap } => {
            cmd_generate(*layers, sources, factor, *count, *seed, out, *sofaclap)
        }
        Command::Embed { file, heuristics, timeout, out } => {
            cmd_embed(file, heuristics.as_deref(), *timeout, out.as_deref())
        }
        Command::Bench { dir, opts, timeout, jobs, out } => {
            cmd_bench(dir, opts, *timeout, *jobs, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(3)
        }
    }
}
