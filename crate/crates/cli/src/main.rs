use clap::{Args, Parser, Subcommand, ValueEnum};
use mpisp_cli::report;
use mpisp_cli::run::{self, Failure, SolomonSettings, SolveOptions};
use mpisp_core::search::{Components, InsertRule};
use mpisp_core::upper_bound::DEFAULT_NODE_LIMIT;
use mpisp_core::SearchConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mpisp", version, about = "Multi-period inspector scheduling solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate native instances from a directory of Solomon files.
    Gen {
        solomon_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [1, 3, 5])]
        periods: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [7, 9, 11, 13])]
        inspectors: Vec<usize>,
        /// Round travel times to a multiple of this value.
        #[arg(long)]
        round_to: Option<f64>,
    },
    /// Run seeded tabu searches and write one report directory per instance.
    Solve {
        #[arg(required = true)]
        instances: Vec<PathBuf>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        /// Base seed; repeat `r` uses `seed + r`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Unlimited workload, single period (team orienteering).
        #[arg(long)]
        toptw: bool,
        /// Also compute the upper bound and check every run against it.
        #[arg(long)]
        ub: bool,
        #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
        node_limit: u64,
        #[command(flatten)]
        search: SearchFlags,
        #[command(flatten)]
        solomon: SolomonFlags,
    },
    /// Upper bound of one instance.
    Ub {
        instance: PathBuf,
        /// Write the bound model in LP format.
        #[arg(long)]
        emit_lp: Option<PathBuf>,
        /// Solve the model with the built-in branch and bound.
        #[arg(long)]
        solve_small: bool,
        #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
        node_limit: u64,
        /// Write the JSON bound report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solomon: SolomonFlags,
    },
    /// Build result tables from run directories.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long, default_value = "tables")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Both)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Md,
    Csv,
    Both,
}

#[derive(Args)]
struct SearchFlags {
    /// JSON search configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epa_insert: Option<InsertRule>,
    /// Comma separated subset of LS, EP, PER.
    #[arg(long)]
    components: Option<Components>,
    #[arg(long)]
    n_init: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    max_perturbation: Option<usize>,
    #[arg(long)]
    max_local_iter: Option<usize>,
    #[arg(long)]
    tenure: Option<u64>,
    /// Prefer less free time instead of more as the last tie breaker.
    #[arg(long)]
    min_free_time: bool,
}

#[derive(Args)]
struct SolomonFlags {
    /// Periods used when an input is a Solomon text file.
    #[arg(long, default_value_t = 1)]
    periods: usize,
    /// Inspectors used when an input is a Solomon text file.
    #[arg(long, default_value_t = 7)]
    inspectors: usize,
    /// Keep only the first this many customers of a Solomon file.
    #[arg(long)]
    truncate: Option<usize>,
    #[arg(long)]
    round_to: Option<f64>,
}

impl SolomonFlags {
    fn settings(&self) -> SolomonSettings {
        SolomonSettings {
            periods: self.periods,
            inspectors: self.inspectors,
            round_to: self.round_to,
            truncate: self.truncate,
        }
    }
}

impl SearchFlags {
    fn config(&self, seed: u64) -> Result<SearchConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Data(anyhow::anyhow!("reading {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| Failure::Data(anyhow::anyhow!("parsing {}: {e}", path.display())))?
            }
            None => SearchConfig::default(),
        };
        cfg.seed = seed;
        if let Some(x) = self.epa_insert {
            cfg.epa_insert = x;
        }
        if let Some(x) = self.components {
            cfg.components = x;
        }
        if let Some(x) = self.n_init {
            cfg.n_init = x;
        }
        if let Some(x) = self.alpha {
            cfg.alpha1 = x;
        }
        if let Some(x) = self.eta {
            cfg.eta = x;
        }
        if let Some(x) = self.max_perturbation {
            cfg.max_perturbation = x;
        }
        if let Some(x) = self.max_local_iter {
            cfg.max_local_iter = x;
        }
        if let Some(x) = self.tenure {
            cfg.tenure = x;
        }
        if self.min_free_time {
            cfg.maximize_free_time = false;
        }
        Ok(cfg)
    }
}

fn write_out(path: &std::path::Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Data(anyhow::anyhow!("writing {}: {e}", path.display())))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen { solomon_dir, out, periods, inspectors, round_to } => {
            let summary = run::cmd_gen(&solomon_dir, &periods, &inspectors, round_to, &out)?;
            if summary.written.is_empty() && summary.failures.is_empty() {
                eprintln!("warning: no Solomon files in {}", solomon_dir.display());
            }
            for f in &summary.failures {
                eprintln!("error: {f}");
            }
            println!("wrote {} instances to {}", summary.written.len(), out.display());
            if !summary.failures.is_empty() {
                return Err(Failure::Data(anyhow::anyhow!("{} inputs failed", summary.failures.len())));
            }
        }
        Command::Solve { instances, out, repeats, seed, toptw, ub, node_limit, search, solomon } => {
            let cfg = search.config(seed)?;
            let loaded = instances
                .iter()
                .map(|p| run::load_instance(p, solomon.settings()))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let opts = SolveOptions { repeats, out, toptw, bound: ub, node_limit };
            for r in run::cmd_solve(loaded, &cfg, &opts)? {
                let ub = r.ub.map(|x| format!(" ub {x}")).unwrap_or_default();
                println!("{} max {} avg {:.1} time {:.2}s{ub}", r.instance, r.max_workload, r.avg_workload, r.avg_time);
            }
        }
        Command::Ub { instance, emit_lp, solve_small, node_limit, out, solomon } => {
            let inst = run::load_instance(&instance, solomon.settings())?;
            let solve = solve_small || emit_lp.is_none();
            if let Some(report) = run::cmd_ub(inst, emit_lp.as_deref(), solve, node_limit)? {
                let json = serde_json::to_string_pretty(&report).expect("report serializes");
                match out {
                    Some(path) => write_out(&path, &json)?,
                    None => println!("{json}"),
                }
            }
        }
        Command::Report { runs, out, format } => {
            let reports = run::collect_reports(&runs)?;
            if reports.is_empty() {
                return Err(Failure::Data(anyhow::anyhow!("no run reports found")));
            }
            std::fs::create_dir_all(&out)
                .map_err(|e| Failure::Data(anyhow::anyhow!("creating {}: {e}", out.display())))?;
            let tables = report::tables(&reports);
            if matches!(format, Format::Md | Format::Both) {
                write_out(&out.join("tables.md"), &report::markdown(&tables))?;
            }
            if matches!(format, Format::Csv | Format::Both) {
                for t in &tables {
                    write_out(&out.join(format!("results_m{}.csv", t.inspectors)), &report::table_csv(t))?;
                    write_out(&out.join(format!("avg_time_m{}.csv", t.inspectors)), &report::average_times_csv(t))?;
                }
            }
            println!("{} reports, {} tables written to {}", reports.len(), tables.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(n) = std::env::var("MPISP_WORKERS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("usage error: MPISP_WORKERS must be a positive integer, got `{n}`");
                return ExitCode::from(1);
            }
        }
    }
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
