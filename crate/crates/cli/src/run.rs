use anyhow::{bail, Context, Result};
use mpisp_core::instance::{generate_mpisp, parse_solomon, read_instance, write_instance, Instance};
use mpisp_core::search::TraceRow;
use mpisp_core::solution::write_solution;
use mpisp_core::upper_bound::{self, BoundReport, BoundStatus, MAX_EXACT_VARIABLES};
use mpisp_core::{tabu_search, Problem, SearchConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const REPORT_FORMAT: &str = "mpisp-run/1";
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One seeded run of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub workload: f64,
    pub difficulty: f64,
    pub free_time: f64,
    pub initial_workload: f64,
    pub time: f64,
    pub local_iterations: u64,
    pub outer_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: String,
    pub instance: String,
    /// Name of the source file the instance was generated from.
    pub source: String,
    pub group: String,
    pub periods: usize,
    pub inspectors: usize,
    pub suppliers: usize,
    pub seed: u64,
    pub cfg_hash: String,
    pub code_version: String,
    pub config: SearchConfig,
    pub runs: Vec<RunSummary>,
    pub max_workload: f64,
    pub avg_workload: f64,
    pub avg_time: f64,
    pub ub: Option<f64>,
    pub ub_status: Option<BoundStatus>,
    pub best_routes: Vec<Vec<usize>>,
}

/// Failures mapped to exit codes by the binary.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
    Internal(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Data(e) => write!(f, "{e:#}"),
            Failure::Internal(m) => write!(f, "internal check failed: {m}"),
        }
    }
}

/// SHA-256 of the configuration with the seed cleared, first 16 hex digits.
pub fn cfg_hash(cfg: &SearchConfig) -> String {
    let mut c = cfg.clone();
    c.seed = 0;
    let bytes = serde_json::to_vec(&c).expect("config serializes");
    Sha256::digest(&bytes).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Instance class such as `c1` or `rc2`: the leading letters and the first digit.
pub fn group_of(source: &str) -> String {
    let lower = source.to_ascii_lowercase();
    let letters: String = lower.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    let digit = lower[letters.len()..].chars().next().filter(|c| c.is_ascii_digit());
    match digit {
        Some(d) => format!("{letters}{d}"),
        None => letters,
    }
}

fn source_of(inst: &Instance) -> String {
    inst.provenance.source.clone().unwrap_or_else(|| inst.name.split('-').next().unwrap_or(&inst.name).to_string())
}

/// How a Solomon text file is turned into an instance when given to `solve`.
#[derive(Debug, Clone, Copy)]
pub struct SolomonSettings {
    pub periods: usize,
    pub inspectors: usize,
    pub round_to: Option<f64>,
    pub truncate: Option<usize>,
}

/// Reads a native JSON instance, or a Solomon text file.
pub fn load_instance(path: &Path, solomon: SolomonSettings) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        return read_instance(path).with_context(|| format!("loading {}", path.display()));
    }
    let mut raw = parse_solomon(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(k) = solomon.truncate {
        raw = raw.truncated(k);
    }
    generate_mpisp(&raw, solomon.periods, solomon.inspectors, solomon.round_to)
        .with_context(|| format!("generating from {}", path.display()))
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Outcome of `gen`: written files and per-file failures.
#[derive(Debug, Default)]
pub struct GenSummary {
    pub written: Vec<PathBuf>,
    pub failures: Vec<String>,
}

/// One native instance per Solomon file and `(w, m)` pair.
pub fn cmd_gen(dir: &Path, periods: &[usize], inspectors: &[usize], round_to: Option<f64>, out: &Path) -> Result<GenSummary> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut summary = GenSummary::default();
    for file in files {
        let raw = match fs::read_to_string(&file).map_err(anyhow::Error::from).and_then(|t| Ok(parse_solomon(&t)?)) {
            Ok(raw) => raw,
            Err(e) => {
                summary.failures.push(format!("{}: {e:#}", file.display()));
                continue;
            }
        };
        for &w in periods {
            for &m in inspectors {
                match generate_mpisp(&raw, w, m, round_to) {
                    Ok(inst) => {
                        let path = out.join(format!("{}.json", inst.name));
                        write_instance(&inst, &path)?;
                        summary.written.push(path);
                    }
                    Err(e) => summary.failures.push(format!("{} (w={w}, m={m}): {e}", file.display())),
                }
            }
        }
    }
    Ok(summary)
}

/// Options of `solve` besides the search configuration.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub repeats: usize,
    pub out: PathBuf,
    pub toptw: bool,
    pub bound: bool,
    pub node_limit: u64,
}

/// Runs `repeats` seeded searches per instance and writes one directory per
/// instance holding `report.json`, `trace.csv` and `best.txt`.
pub fn cmd_solve(instances: Vec<Instance>, cfg: &SearchConfig, opts: &SolveOptions) -> Result<Vec<RunReport>, Failure> {
    if opts.repeats == 0 {
        return Err(Failure::Usage("--repeats must be at least 1".into()));
    }
    cfg.validate().map_err(Failure::Usage)?;
    let mut prepared = Vec::with_capacity(instances.len());
    for inst in instances {
        let inst = if opts.toptw {
            if inst.grid.periods() != 1 {
                return Err(Failure::Usage(format!("--toptw expects one period, `{}` has {}", inst.name, inst.grid.periods())));
            }
            inst.into_toptw()
        } else {
            inst
        };
        if let Err(v) = inst.validate() {
            let list: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            return Err(Failure::Data(anyhow::anyhow!("instance `{}` is invalid: {}", inst.name, list.join("; "))));
        }
        prepared.push(inst);
    }
    fs::create_dir_all(&opts.out).map_err(|e| Failure::Data(anyhow::anyhow!("creating {}: {e}", opts.out.display())))?;
    let results: Vec<Result<RunReport, Failure>> = prepared.into_par_iter().map(|inst| solve_one(inst, cfg, opts)).collect();
    results.into_iter().collect()
}

fn solve_one(inst: Instance, cfg: &SearchConfig, opts: &SolveOptions) -> Result<RunReport, Failure> {
    let source = source_of(&inst);
    let p = Problem::new(inst);
    let runs: Vec<_> = (0..opts.repeats as u64)
        .into_par_iter()
        .map(|r| {
            let c = SearchConfig { seed: cfg.seed + r, ..cfg.clone() };
            (c.seed, tabu_search(&p, &c))
        })
        .collect();
    let mut summaries = Vec::with_capacity(runs.len());
    let mut trace = String::from("run,seed,iteration,current_p,current_d,current_f,best_p,best_d,best_f,pool,elapsed\n");
    let mut best_idx = 0;
    for (idx, (seed, run)) in runs.iter().enumerate() {
        if let Err(e) = run.best.check(&p) {
            return Err(Failure::Internal(format!("run {idx} returned an inconsistent solution: {e}")));
        }
        let f = run.best.fitness();
        if cfg.scoring().better(&f, &runs[best_idx].1.best.fitness()) {
            best_idx = idx;
        }
        summaries.push(RunSummary {
            seed: *seed,
            workload: f.p,
            difficulty: f.d,
            free_time: f.f,
            initial_workload: run.initial.p,
            time: run.elapsed,
            local_iterations: run.local_iterations,
            outer_iterations: run.trace.len(),
        });
        for TraceRow { iteration, current, best, pool, elapsed } in &run.trace {
            let _ = writeln!(
                trace,
                "{idx},{seed},{iteration},{},{},{},{},{},{},{pool},{elapsed}",
                current.p, current.d, current.f, best.p, best.d, best.f
            );
        }
    }
    let count = summaries.len() as f64;
    let max_workload = summaries.iter().map(|s| s.workload).fold(0.0, f64::max);
    let avg_workload = summaries.iter().map(|s| s.workload).sum::<f64>() / count;
    let avg_time = summaries.iter().map(|s| s.time).sum::<f64>() / count;
    let (ub, ub_status) = if opts.bound {
        let size = p.inst.n() * p.inst.inspectors * p.inst.grid.periods();
        if size > MAX_EXACT_VARIABLES {
            eprintln!("warning: `{}` is too large for the exact bound solver; use `ub --emit-lp`", p.inst.name);
            (None, None)
        } else {
            let b = upper_bound::bound(&p, opts.node_limit).map_err(|e| Failure::Data(e.into()))?;
            (Some(b.ub), Some(b.status))
        }
    } else {
        (None, None)
    };
    if let Some(ub) = ub {
        if max_workload > ub + 1e-6 {
            return Err(Failure::Internal(format!("`{}`: workload {max_workload} exceeds the bound {ub}", p.inst.name)));
        }
    }
    let best = &runs[best_idx].1.best;
    let report = RunReport {
        format: REPORT_FORMAT.to_string(),
        instance: p.inst.name.clone(),
        group: group_of(&source),
        source,
        periods: p.inst.grid.periods(),
        inspectors: p.inst.inspectors,
        suppliers: p.inst.n(),
        seed: cfg.seed,
        cfg_hash: cfg_hash(cfg),
        code_version: CODE_VERSION.to_string(),
        config: cfg.clone(),
        runs: summaries,
        max_workload,
        avg_workload,
        avg_time,
        ub,
        ub_status,
        best_routes: best.sequences(),
    };
    let dir = opts.out.join(&p.inst.name);
    let io = |e: anyhow::Error| Failure::Data(e);
    fs::create_dir_all(&dir).map_err(|e| io(anyhow::anyhow!("creating {}: {e}", dir.display())))?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_atomic(&dir.join("report.json"), &json).map_err(io)?;
    write_atomic(&dir.join("trace.csv"), &trace).map_err(io)?;
    write_atomic(&dir.join("best.txt"), &write_solution(best)).map_err(io)?;
    Ok(report)
}

/// Bound for one instance: solved exactly, or written as an LP file.
pub fn cmd_ub(inst: Instance, emit_lp: Option<&Path>, solve: bool, node_limit: u64) -> Result<Option<BoundReport>, Failure> {
    let p = Problem::new(inst);
    if let Some(path) = emit_lp {
        let co = upper_bound::derive_coefficients(&p.inst, &p.transit);
        let model = upper_bound::build_model(&p.inst, &co);
        let mut buf = Vec::new();
        upper_bound::emit_lp(&model, &mut buf).expect("writing to memory");
        write_atomic(path, &String::from_utf8(buf).expect("LP text is UTF-8"))?;
    }
    if !solve {
        return Ok(None);
    }
    upper_bound::bound(&p, node_limit).map(Some).map_err(|e| Failure::Data(e.into()))
}

/// Reports found under `paths`: each path is a report file, an instance
/// directory, or a directory of instance directories. Unreadable or
/// mismatched reports are skipped with a warning.
pub fn collect_reports(paths: &[PathBuf]) -> Result<Vec<RunReport>> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_file() {
            files.push(path.clone());
        } else if path.join("report.json").is_file() {
            files.push(path.join("report.json"));
        } else if path.is_dir() {
            let mut subs: Vec<PathBuf> = fs::read_dir(path)?
                .filter_map(|e| e.ok().map(|e| e.path().join("report.json")))
                .filter(|p| p.is_file())
                .collect();
            subs.sort();
            files.extend(subs);
        } else {
            bail!("{} does not exist", path.display());
        }
    }
    let mut out = Vec::new();
    for f in files {
        let parsed = fs::read_to_string(&f)
            .map_err(anyhow::Error::from)
            .and_then(|t| Ok(serde_json::from_str::<RunReport>(&t)?));
        match parsed {
            Ok(r) if r.format == REPORT_FORMAT => out.push(r),
            Ok(r) => eprintln!("warning: skipping {}: format `{}`", f.display(), r.format),
            Err(e) => eprintln!("warning: skipping {}: {e:#}", f.display()),
        }
    }
    Ok(out)
}
