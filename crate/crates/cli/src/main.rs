use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use mdcolgen::gadgets::{build_ap_gadget, build_md_gadget};
use mdcolgen::oracles::{
    brute_force_clique_number, brute_force_densest, brute_force_max_cut, brute_force_partition_opt,
    brute_force_pricing,
};
use mdcolgen::peeling::{peel_pricing, PeelConfig};
use mdcolgen::report::{ManifestEntry, RunReport};
use mdcolgen::{
    enumerate_pricing, parse_edge_list, peel_densest, run_colgen, ColGenConfig, DualSolution,
    Graph, PrimalStatus, VertexSet,
};
use serde_json::json;

const EXIT_USAGE: u8 = 1;
const EXIT_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "mdcolgen",
    version,
    about = "Exact modularity density maximization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct GraphArgs {
    /// Edge list file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Edgelist)]
    format: Format,
    /// Treat tokens as 1-based integer vertex ids.
    #[arg(long)]
    one_indexed: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Edgelist,
}

#[derive(clap::Args, Clone)]
struct DualArgs {
    /// JSON array with one dual value per vertex.
    #[arg(long, conflicts_with = "lambda")]
    duals: Option<PathBuf>,
    /// The same dual value on every vertex.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve to optimality by column generation.
    Solve {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        #[arg(long, value_delimiter = ',')]
        p_grid: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        q_grid: Option<Vec<f64>>,
        /// Wall-clock budget in seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        /// JSON file with extra starting columns (lists of vertex ids).
        #[arg(long)]
        warm_start: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Greedy peeling: densest subgraph, or pricing sets when duals are given.
    Peel {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        duals: DualArgs,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
    },
    /// Pricing optimum by exhaustive enumeration.
    ApOracle {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        duals: DualArgs,
    },
    /// Brute-force reference answers for small graphs.
    Oracle {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum)]
        mode: OracleMode,
        #[command(flatten)]
        duals: DualArgs,
        /// Smallest cluster count for `partition`.
        #[arg(long, default_value_t = 1)]
        min_clusters: usize,
    },
    /// Build a hardness gadget from a source graph.
    Gadget {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum)]
        kind: GadgetKind,
        #[arg(long)]
        k: usize,
        /// Block size for `md` in place of n^3; the result is stamped
        /// non-certifying.
        #[arg(long)]
        m_override: Option<usize>,
        /// Writes `<out>` (edge list) and `<out>.json` (metadata).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every instance of a manifest and compare against expected values.
    Bench {
        manifest: PathBuf,
        /// Instances solved at once.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Per-instance budget in seconds.
        #[arg(long)]
        time_limit: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleMode {
    Partition,
    MaxCut,
    Densest,
    Pricing,
    Clique,
}

#[derive(Clone, Copy, ValueEnum)]
enum GadgetKind {
    Md,
    Ap,
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn solve(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_FAILURE,
            message: message.into(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Solve {
            graph,
            epsilon,
            p_grid,
            q_grid,
            time_limit,
            warm_start,
            out,
        } => {
            let g = load_graph(&graph)?;
            let mut cfg = ColGenConfig {
                epsilon,
                ..ColGenConfig::default()
            };
            cfg.peel.epsilon = epsilon;
            if let Some(p) = p_grid {
                cfg.peel.p_grid = p;
            }
            if let Some(q) = q_grid {
                cfg.peel.q_grid = q;
            }
            cfg.time_limit = seconds(time_limit)?;
            if let Some(path) = warm_start {
                let text = read(&path)?;
                let sets: Vec<Vec<usize>> = serde_json::from_str(&text)
                    .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
                cfg.warm_start = sets.into_iter().map(VertexSet::new).collect();
            }
            cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
            let report = solve(&name_of(&graph.input), &g, &cfg)?;
            emit(
                &serde_json::to_string_pretty(&report).expect("report serializes"),
                out.as_deref(),
            )?;
            if report.result.clusters.is_empty() {
                return Err(Failure::solve(format!(
                    "stopped with status {:?} and no partition",
                    report.result.status
                )));
            }
            Ok(())
        }
        Command::Peel {
            graph,
            duals,
            epsilon,
        } => {
            let g = load_graph(&graph)?;
            let value = match load_duals(&duals, g.n())? {
                None => {
                    let s = peel_densest(&g).map_err(|e| Failure::usage(e.to_string()))?;
                    let edges = g.induced_edge_count(&s).expect("set in range");
                    json!({
                        "set": labels(&g, &s),
                        "edges": edges,
                        "density": edges as f64 / s.len() as f64,
                    })
                }
                Some(lam) => {
                    let cfg = PeelConfig {
                        epsilon,
                        ..PeelConfig::default()
                    };
                    let sets = peel_pricing(&g, &lam, &cfg, None)
                        .map_err(|e| Failure::usage(e.to_string()))?;
                    json!({ "sets": sets.iter().map(|s| labels(&g, s)).collect::<Vec<_>>() })
                }
            };
            emit(&serde_json::to_string_pretty(&value).expect("json"), None)
        }
        Command::ApOracle { graph, duals } => {
            let g = load_graph(&graph)?;
            let lam = require_duals(&duals, g.n())?;
            let (value, set) =
                enumerate_pricing(&g, &lam).map_err(|e| Failure::usage(e.to_string()))?;
            let value = json!({ "objective": value, "set": labels(&g, &set) });
            emit(&serde_json::to_string_pretty(&value).expect("json"), None)
        }
        Command::Oracle {
            graph,
            mode,
            duals,
            min_clusters,
        } => {
            let g = load_graph(&graph)?;
            let to_usage = |e: mdcolgen::Error| Failure::usage(e.to_string());
            let value = match mode {
                OracleMode::Partition => {
                    let (d, p) = brute_force_partition_opt(&g, min_clusters).map_err(to_usage)?;
                    let clusters: Vec<_> = p.clusters().iter().map(|c| labels(&g, c)).collect();
                    json!({ "modularity_density": d, "clusters": clusters })
                }
                OracleMode::MaxCut => {
                    let (cut, (x, y)) = brute_force_max_cut(&g).map_err(to_usage)?;
                    json!({ "cut": cut, "x": labels(&g, &x), "y": labels(&g, &y) })
                }
                OracleMode::Densest => {
                    let (density, s) = brute_force_densest(&g).map_err(to_usage)?;
                    json!({ "density": density, "set": labels(&g, &s) })
                }
                OracleMode::Pricing => {
                    let lam = require_duals(&duals, g.n())?;
                    let (value, s) = brute_force_pricing(&g, &lam).map_err(to_usage)?;
                    json!({ "objective": value, "set": labels(&g, &s) })
                }
                OracleMode::Clique => {
                    json!({ "clique_number": brute_force_clique_number(&g).map_err(to_usage)? })
                }
            };
            emit(&serde_json::to_string_pretty(&value).expect("json"), None)
        }
        Command::Gadget {
            graph,
            kind,
            k,
            m_override,
            out,
        } => {
            let g = load_graph(&graph)?;
            let to_usage = |e: mdcolgen::Error| Failure::usage(e.to_string());
            let (built, meta) = match kind {
                GadgetKind::Md => {
                    let gadget = build_md_gadget(&g, k, m_override).map_err(to_usage)?;
                    let meta = gadget.metadata();
                    (gadget.complement_g_star, meta)
                }
                GadgetKind::Ap => {
                    if m_override.is_some() {
                        return Err(Failure::usage("--m-override applies to --kind md only"));
                    }
                    let gadget = build_ap_gadget(&g, k).map_err(to_usage)?;
                    let meta = gadget.metadata();
                    (gadget.graph, meta)
                }
            };
            let meta = serde_json::to_string_pretty(&meta).expect("metadata serializes");
            match out {
                Some(path) => {
                    write(&path, &built.to_edge_list())?;
                    let mut meta_path = path.into_os_string();
                    meta_path.push(".json");
                    write(Path::new(&meta_path), &meta)
                }
                None => emit(&meta, None),
            }
        }
        Command::Bench {
            manifest,
            jobs,
            time_limit,
        } => bench(&manifest, jobs, seconds(time_limit)?),
    }
}

fn seconds(limit: Option<f64>) -> CliResult<Option<Duration>> {
    match limit {
        None => Ok(None),
        Some(s) if s.is_finite() && s > 0.0 => Ok(Some(Duration::from_secs_f64(s))),
        Some(s) => Err(Failure::usage(format!("time limit {s} must be positive"))),
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => write(path, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_graph(args: &GraphArgs) -> CliResult<Graph> {
    let Format::Edgelist = args.format;
    let text = read(&args.input)?;
    parse_edge_list(&text, args.one_indexed)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.input.display())))
}

fn load_duals(args: &DualArgs, n: usize) -> CliResult<Option<DualSolution>> {
    let values = match (&args.duals, args.lambda) {
        (Some(path), _) => serde_json::from_str::<Vec<f64>>(&read(path)?)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
        (None, Some(v)) => vec![v; n],
        (None, None) => return Ok(None),
    };
    if values.len() != n {
        return Err(Failure::usage(format!(
            "{} dual values for {n} vertices",
            values.len()
        )));
    }
    DualSolution::new(values)
        .map(Some)
        .map_err(|e| Failure::usage(e.to_string()))
}

fn require_duals(args: &DualArgs, n: usize) -> CliResult<DualSolution> {
    load_duals(args, n)?.ok_or_else(|| Failure::usage("this mode needs --duals or --lambda"))
}

fn labels(g: &Graph, s: &VertexSet) -> Vec<String> {
    s.iter().map(|v| g.label(v)).collect()
}

fn name_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn solve(name: &str, g: &Graph, cfg: &ColGenConfig) -> CliResult<RunReport> {
    info!("solving {name}: n = {}, m = {}", g.n(), g.m());
    let report = run_colgen(g, cfg).map_err(|e| Failure::solve(e.to_string()))?;
    info!(
        "{name}: status {:?}, bound {:.6}, {} columns, {:.2?}",
        report.status,
        report.dual_objective,
        report.total_columns(),
        report.elapsed
    );
    Ok(RunReport::new(name, g, cfg, &report))
}

enum Verdict {
    Pass,
    Fail(String),
    Skip(String),
}

struct Row {
    name: String,
    expected: f64,
    tolerance: f64,
    optional: bool,
    found: Option<f64>,
    wall: Option<f64>,
    verdict: Verdict,
}

fn bench(manifest: &Path, jobs: usize, time_limit: Option<Duration>) -> CliResult<()> {
    if jobs == 0 {
        return Err(Failure::usage("--jobs must be positive"));
    }
    let text = read(manifest)?;
    let entries: Vec<ManifestEntry> = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("{}: {e}", manifest.display())))?;
    let base = manifest.parent().unwrap_or(Path::new("."));

    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<Row>>> = Mutex::new((0..entries.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(entries.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(entry) = entries.get(i) else { break };
                let row = bench_row(base, entry, time_limit);
                rows.lock().expect("no worker panics")[i] = Some(row);
            });
        }
    });
    let rows: Vec<Row> = rows
        .into_inner()
        .expect("no worker panics")
        .into_iter()
        .map(|r| r.expect("every row ran"))
        .collect();

    println!(
        "{:<14} {:>12} {:>10} {:>12} {:>10}  result",
        "instance", "expected", "tol", "found", "wall_s"
    );
    let mut failed = 0;
    for row in &rows {
        let found = row.found.map_or("-".into(), |d| format!("{d:.6}"));
        let wall = row.wall.map_or("-".into(), |w| format!("{w:.2}"));
        let verdict = match &row.verdict {
            Verdict::Pass => "PASS".to_string(),
            Verdict::Skip(why) => format!("SKIP ({why})"),
            Verdict::Fail(why) if row.optional => format!("MISS ({why}; optional)"),
            Verdict::Fail(why) => {
                failed += 1;
                format!("FAIL ({why})")
            }
        };
        println!(
            "{:<14} {:>12} {:>10} {:>12} {:>10}  {verdict}",
            row.name, row.expected, row.tolerance, found, wall
        );
    }
    if failed > 0 {
        return Err(Failure::solve(format!("{failed} instance(s) failed")));
    }
    Ok(())
}

fn bench_row(base: &Path, entry: &ManifestEntry, time_limit: Option<Duration>) -> Row {
    let path = base.join(&entry.path);
    let name = entry.name.clone().unwrap_or_else(|| name_of(&path));
    let mut row = Row {
        name: name.clone(),
        expected: entry.expected_d,
        tolerance: entry.tolerance,
        optional: entry.optional,
        found: None,
        wall: None,
        verdict: Verdict::Pass,
    };
    let Ok(text) = fs::read_to_string(&path) else {
        row.verdict = Verdict::Skip(format!("{} not found", path.display()));
        return row;
    };
    let g = match parse_edge_list(&text, entry.one_indexed) {
        Ok(g) => g,
        Err(e) => {
            row.verdict = Verdict::Fail(e.to_string());
            return row;
        }
    };
    let cfg = ColGenConfig {
        time_limit,
        ..ColGenConfig::default()
    };
    let start = Instant::now();
    let result = solve(&name, &g, &cfg);
    row.wall = Some(start.elapsed().as_secs_f64());
    row.verdict = match result {
        Err(f) => Verdict::Fail(f.message),
        Ok(report) => {
            let r = report.result;
            row.found = r.modularity_density;
            match r.modularity_density {
                _ if !r.certificate => Verdict::Fail("no optimality certificate".into()),
                _ if r.primal_status != PrimalStatus::Integral => {
                    Verdict::Fail(format!("primal {:?}", r.primal_status))
                }
                Some(d) if (d - entry.expected_d).abs() <= entry.tolerance => Verdict::Pass,
                Some(d) => Verdict::Fail(format!("off by {:.3e}", d - entry.expected_d)),
                None => Verdict::Fail("no partition".into()),
            }
        }
    };
    row
}
