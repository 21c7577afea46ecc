//! Benchmark harness: solve a directory of instances under several
//! optimization sets and report one CSV row per (instance, set) pair.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::dp::{solve, Budget, OptConfig, Outcome};
use crate::instance::read_instance;
use crate::store::Diagnostics;

pub const CSV_HEADER: &str = "instance_id,seed,lambda,n0,factor_lo,factor_hi,opt_set,outcome,\
time_ms,stored,pruned,dominated,greedy_calls,greedy_successes,counterpart_hits";

/// One benchmark row. `outcome` is `feasible`, `infeasible`, `timeout`, or
/// `error` for instances that failed to load; error rows never abort a
/// run.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub instance_id: String,
    pub seed: String,
    pub lambda: usize,
    pub n0: u64,
    pub factor_lo: String,
    pub factor_hi: String,
    pub opt_set: String,
    pub outcome: String,
    pub time_ms: u64,
    pub diag: Diagnostics,
}

impl BenchRecord {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.instance_id,
            self.seed,
            self.lambda,
            self.n0,
            self.factor_lo,
            self.factor_hi,
            self.opt_set,
            self.outcome,
            self.time_ms,
            self.diag.stored,
            self.diag.pruned,
            self.diag.dominated,
            self.diag.greedy_calls,
            self.diag.greedy_successes,
            self.diag.counterpart_hits
        )
    }
}

pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

#[derive(Default, Clone)]
struct Meta {
    seed: String,
    factor_lo: String,
    factor_hi: String,
}

/// Sidecar written by `generate`: `instance_id,seed,factor_lo,factor_hi`.
fn read_meta(dir: &Path) -> HashMap<String, Meta> {
    let mut out = HashMap::new();
    let Ok(text) = fs::read_to_string(dir.join("meta.csv")) else {
        return out;
    };
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() == 4 {
            out.insert(
                fields[0].to_string(),
                Meta {
                    seed: fields[1].to_string(),
                    factor_lo: fields[2].to_string(),
                    factor_hi: fields[3].to_string(),
                },
            );
        }
    }
    out
}

fn run_one(
    id: &str,
    text: Result<&str, &io::Error>,
    meta: &Meta,
    tag: &str,
    budget: Budget,
) -> BenchRecord {
    let mut record = BenchRecord {
        instance_id: id.to_string(),
        seed: if meta.seed.is_empty() { "0".into() } else { meta.seed.clone() },
        lambda: 0,
        n0: 0,
        factor_lo: if meta.factor_lo.is_empty() { "0".into() } else { meta.factor_lo.clone() },
        factor_hi: if meta.factor_hi.is_empty() { "0".into() } else { meta.factor_hi.clone() },
        opt_set: tag.to_string(),
        outcome: "error".into(),
        time_ms: 0,
        diag: Diagnostics::default(),
    };
    let Ok(text) = text else {
        return record;
    };
    let Ok(inst) = read_instance(text) else {
        return record;
    };
    record.lambda = inst.lambda();
    record.n0 = inst.sources();
    let cfg = OptConfig::from_tag(tag).expect("tags validated by the caller");
    let start = Instant::now();
    let (decision, diag) = solve(&inst, cfg, budget);
    record.time_ms = start.elapsed().as_millis() as u64;
    record.outcome = match decision.outcome() {
        Outcome::Feasible => "feasible".into(),
        Outcome::Infeasible => "infeasible".into(),
        Outcome::Timeout => "timeout".into(),
    };
    record.diag = diag;
    record
}

/// Runs every `.clt` file in `dir` under every tag in `opts` on `jobs`
/// workers. Rows come back sorted by (instance id, opt set); outcomes are
/// independent of `jobs`.
pub fn run_bench(
    dir: &Path,
    opts: &[String],
    jobs: usize,
    budget: Budget,
) -> io::Result<Vec<BenchRecord>> {
    for tag in opts {
        if OptConfig::from_tag(tag).is_none() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("unknown optimization set `{tag}`"),
            ));
        }
    }
    let meta = read_meta(dir);
    let mut files: Vec<(String, io::Result<String>)> = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("clt") {
            let id = path.file_stem().unwrap().to_string_lossy().into_owned();
            files.push((id, fs::read_to_string(&path)));
        }
    }
    files.sort_by(|a, b| a.0.cmp(&b.0));

    let tasks: Vec<(usize, &str)> = (0..files.len())
        .flat_map(|f| opts.iter().map(move |t| (f, t.as_str())))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| io::Error::other(e.to_string()))?;
    let default_meta = Meta::default();
    let mut records: Vec<BenchRecord> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(f, tag)| {
                let (id, text) = &files[f];
                let m = meta.get(id).unwrap_or(&default_meta);
                run_one(id, text.as_deref(), m, tag, budget)
            })
            .collect()
    });
    records.sort_by(|a, b| (&a.instance_id, &a.opt_set).cmp(&(&b.instance_id, &b.opt_set)));
    Ok(records)
}
