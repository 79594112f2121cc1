use std::error::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gatesmith::bench::{emit_report, load_task_dir, load_task_pack, seed_task, seed_tasks, BenchmarkReport, ReportFormat, TaskPack};
use gatesmith::knowledge::{EntryKind, KnowledgeStore};
use gatesmith::orchestrator::{
    run_benchmark, run_task, Ablation, BackendKind, HttpBackend, ModelBackend, RunConfig, RunStatus, ScriptedBackend,
};

type AnyResult<T> = Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "gatesmith", version, about = "Gate-level circuit generation and benchmarking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the agent workflow once on a single task.
    Run(RunArgs),
    /// Sweep n samples over a task set and write a results file.
    Bench(BenchArgs),
    /// Inspect or maintain a knowledge store directory.
    Store(StoreArgs),
    /// Re-render a results file.
    Report(ReportArgs),
}

#[derive(Args)]
struct Common {
    /// Config file mirroring the run settings (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Knowledge store directory; in-memory when omitted.
    #[arg(long)]
    store: Option<PathBuf>,
    /// Start an in-memory store empty instead of with the baseline entries.
    #[arg(long)]
    no_seed: bool,
    /// Retrieval profile.
    #[arg(long)]
    profile: Option<Ablation>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Base sampling seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Http,
    Reference,
}

#[derive(Args)]
struct RunArgs {
    /// Seed task id or task-pack directory.
    task: String,
    #[command(flatten)]
    common: Common,
    /// Write the full run record (transcript included) as JSON.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of task packs; the built-in seed set when omitted.
    #[arg(long)]
    tasks: Option<PathBuf>,
    /// Only these task ids.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// Samples per task.
    #[arg(short)]
    n: Option<u32>,
    /// Pass@k values, comma separated.
    #[arg(short, value_delimiter = ',')]
    k: Vec<u32>,
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "results.json")]
    out: PathBuf,
}

#[derive(Args)]
struct StoreArgs {
    #[command(subcommand)]
    action: StoreAction,
}

#[derive(Subcommand)]
enum StoreAction {
    /// List entries.
    Inspect {
        dir: PathBuf,
        /// Include archived entries.
        #[arg(long)]
        all: bool,
    },
    /// Re-verify every pattern.
    Verify { dir: PathBuf },
    /// Rewrite the index without torn or superseded lines.
    Compact { dir: PathBuf },
    /// Fill an empty store with the baseline entries.
    Seed { dir: PathBuf },
}

#[derive(Args)]
struct ReportArgs {
    #[arg(default_value = "results.json")]
    results: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
}

fn load_config(c: &Common) -> AnyResult<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::from_toml(&std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?)?,
        None => RunConfig::default(),
    };
    if let Some(p) = c.profile {
        cfg = cfg.with_profile(p);
    }
    if let Some(b) = c.backend {
        cfg.backend.kind = match b {
            BackendArg::Http => BackendKind::Http,
            BackendArg::Reference => BackendKind::Reference,
        };
    }
    if let Some(s) = c.seed {
        cfg.sampling.seed = s;
    }
    Ok(cfg)
}

fn open_store(c: &Common) -> AnyResult<KnowledgeStore> {
    let store = match &c.store {
        Some(dir) => KnowledgeStore::open(dir)?,
        None => KnowledgeStore::in_memory(),
    };
    if store.is_empty() && !c.no_seed {
        store.seed_baseline()?;
    }
    Ok(store)
}

fn make_backend(cfg: &RunConfig, tasks: &[TaskPack]) -> AnyResult<Box<dyn ModelBackend>> {
    Ok(match cfg.backend.kind {
        BackendKind::Reference => Box::new(ScriptedBackend::reference(tasks)),
        BackendKind::Http => Box::new(HttpBackend::from_config(&cfg.backend)?),
    })
}

fn resolve_task(spec: &str) -> AnyResult<TaskPack> {
    if Path::new(spec).is_dir() {
        return Ok(load_task_pack(spec)?);
    }
    seed_task(spec).ok_or_else(|| format!("`{spec}` is neither a task directory nor a seed task id").into())
}

fn cmd_run(a: RunArgs) -> AnyResult<ExitCode> {
    let cfg = load_config(&a.common)?;
    let task = resolve_task(&a.task)?;
    let store = open_store(&a.common)?;
    let backend = make_backend(&cfg, std::slice::from_ref(&task))?;
    let run = run_task(&task, &cfg, backend.as_ref(), &store)?;
    println!("task {}: {:?} after {} revision(s)", run.task_id, run.status, run.revisions_used);
    if let Some(e) = &run.eval {
        println!(
            "correctness {:.3}  G={} D={}  SEI {}",
            e.correctness,
            e.gates,
            e.delay,
            e.sei.map_or("-".into(), |s| format!("{s:.4}"))
        );
    }
    if let Some(err) = &run.error {
        println!("error: {err}");
    }
    if let Some(n) = &run.final_netlist {
        println!("\n{}", n.trim_end());
    }
    if let Some(p) = &a.transcript {
        std::fs::write(p, serde_json::to_string_pretty(&run)?)?;
    }
    Ok(if run.status == RunStatus::Verified {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_bench(a: BenchArgs) -> AnyResult<ExitCode> {
    let mut cfg = load_config(&a.common)?;
    if let Some(n) = a.n {
        cfg.samples = n;
    }
    if !a.k.is_empty() {
        cfg.pass_k = a.k.clone();
    }
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    let mut tasks = match &a.tasks {
        Some(dir) => load_task_dir(dir)?,
        None => seed_tasks(),
    };
    if !a.only.is_empty() {
        tasks.retain(|t| a.only.contains(&t.id));
    }
    let store = open_store(&a.common)?;
    let backend = make_backend(&cfg, &tasks)?;
    let run = run_benchmark(&tasks, &cfg, backend.as_ref(), &store)?;
    std::fs::write(&a.out, emit_report(&run.report, ReportFormat::Json))?;
    print!("{}", emit_report(&run.report, ReportFormat::Table));
    println!("results written to {}", a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_store(a: StoreArgs) -> AnyResult<ExitCode> {
    match a.action {
        StoreAction::Inspect { dir, all } => {
            let store = KnowledgeStore::open_unverified(&dir)?;
            let snap = store.snapshot();
            println!("{} entries ({} primary)", store.len(), store.primary_count());
            for e in snap.entries().iter().filter(|e| all || !e.archived) {
                let what = match e.kind {
                    EntryKind::CircuitPattern => e
                        .efficiency
                        .map_or(String::new(), |f| format!("G={} D={} SEI {:.4}", f.gates, f.delay, f.sei)),
                    EntryKind::ErrorFix => e.error_fix.as_ref().map_or(String::new(), |f| f.error_class.clone()),
                };
                let flag = if e.archived { " (archived)" } else { "" };
                println!("{}  {:?}  [{}]  {what}{flag}", e.id, e.kind, e.tags.join(","));
            }
            Ok(ExitCode::SUCCESS)
        }
        StoreAction::Verify { dir } => {
            let store = KnowledgeStore::open_unverified(&dir)?;
            let errors = store.verify_all();
            for e in &errors {
                println!("{e}");
            }
            println!("{} entries, {} failed verification", store.len(), errors.len());
            Ok(if errors.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        StoreAction::Compact { dir } => {
            let removed = KnowledgeStore::open(&dir)?.compact()?;
            println!("removed {removed} index line(s)");
            Ok(ExitCode::SUCCESS)
        }
        StoreAction::Seed { dir } => {
            let n = KnowledgeStore::open(&dir)?.seed_baseline()?;
            println!("stored {n} baseline entries");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_report(a: ReportArgs) -> AnyResult<ExitCode> {
    let text = std::fs::read_to_string(&a.results).map_err(|e| format!("{}: {e}", a.results.display()))?;
    let report = BenchmarkReport::from_json(&text)?;
    report.check_consistency()?;
    let format = match a.format {
        FormatArg::Table => ReportFormat::Table,
        FormatArg::Json => ReportFormat::Json,
    };
    print!("{}", emit_report(&report, format));
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Store(a) => cmd_store(a),
        Command::Report(a) => cmd_report(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
