//! `lasso-paths`: shortest paths through the lasso, from the command line.
//!
//! Exit codes: 0 on success, 1 when a solver fails, 2 on bad usage or
//! invalid input. Results go to standard output and `--out-dir`,
//! diagnostics to standard error.

use std::fmt::Display;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lasso_paths::admm::AdmmConfig;
use lasso_paths::experiments::{
    bench_iteration_cost, gen_random_graph, run_experiment, Endpoints, ExperimentOutcome, ExperimentSpec, GraphSource,
    GrayImage, SolverChoice,
};
use lasso_paths::graph::{load_graph, write_json, write_text};
use lasso_paths::lars::write_beta_samples_csv;
use lasso_paths::Graph;

#[derive(Parser)]
#[command(name = "lasso-paths", version, about = "Shortest paths as lasso problems: LARS, ADMM, InADMM and Dijkstra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact shortest path (the reference oracle)
    Dijkstra(QueryArgs),
    /// Whole lasso solution path; exact
    Lars(LarsArgs),
    /// ADMM with a cached factorization
    Admm(AdmmArgs),
    /// ADMM with a conjugate-gradient inner solve
    Inadmm(AdmmArgs),
    /// Write a seeded random connected graph
    GenRandom(GenArgs),
    /// Boundary tracing on a PGM image
    Scissors(ScissorsArgs),
    /// Per-iteration cost of InADMM as the edge count grows
    Bench(BenchArgs),
}

#[derive(Args)]
struct QueryArgs {
    /// Graph file, `u v w` per line (1-based) or JSON
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Random graph instead of a file: vertex count (needs --edges and --seed)
    #[arg(long, conflicts_with = "graph", requires_all = ["edges", "seed"])]
    vertices: Option<usize>,
    /// Random graph edge count
    #[arg(long, requires = "vertices")]
    edges: Option<usize>,
    #[arg(long, default_value_t = 10.0)]
    w_min: f64,
    #[arg(long, default_value_t = 20.0)]
    w_max: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Source vertex, 1-based
    #[arg(long)]
    source: usize,
    /// Target vertex, 1-based
    #[arg(long)]
    target: usize,
    /// Directory for summary.json, path.txt and trace.csv
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Write every timing field as 0 so reruns give identical files
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct LarsArgs {
    #[command(flatten)]
    query: QueryArgs,
    /// Breakpoint CSV: step,lambda,event,edge_u,edge_v,sign,beta_l1
    #[arg(long)]
    trace: Option<PathBuf>,
    /// CSV of beta(lambda) on an even grid from the first breakpoint to 0
    #[arg(long)]
    beta_samples: Option<PathBuf>,
    #[arg(long, default_value_t = 101)]
    samples: usize,
}

#[derive(Args)]
struct SolverFlags {
    /// Flat JSON with AdmmConfig field names; flags below take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lambda_rel: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    cg_tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Keep edges with |beta_j| / w_j at least this when reading off the path
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Iteration CSV: iter,beta_l1,primal_res,dual_res,cg_iters,elapsed_ms
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct AdmmArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    vertices: usize,
    #[arg(long)]
    edges: usize,
    #[arg(long, default_value_t = 10.0)]
    w_min: f64,
    #[arg(long, default_value_t = 20.0)]
    w_max: f64,
    #[arg(long)]
    seed: u64,
    /// Output file; standard output when absent
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON instead of `u v w` lines
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ScissorsArgs {
    /// PGM image (P2 or P5)
    #[arg(long)]
    image: PathBuf,
    /// Start pixel `row,col`, 1-based
    #[arg(long, value_parser = parse_pixel)]
    source: (usize, usize),
    /// End pixel `row,col`, 1-based
    #[arg(long, value_parser = parse_pixel)]
    target: (usize, usize),
    #[arg(long, value_enum, default_value = "inadmm")]
    solver: SolverName,
    #[command(flatten)]
    flags: SolverFlags,
    /// Directory for summary.json, path.txt, trace.csv and overlay.pgm
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    no_timing: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SolverName {
    Dijkstra,
    Lars,
    Admm,
    Inadmm,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated edge counts
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
    edges: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    iterations: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Directory for bench.csv
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Solver(String),
}

fn usage(e: impl Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn solver(e: impl Display) -> Failure {
    Failure::Solver(e.to_string())
}

fn parse_pixel(text: &str) -> Result<(usize, usize), String> {
    let (r, c) = text.split_once(',').ok_or_else(|| format!("expected `row,col`, got {text:?}"))?;
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| format!("invalid coordinate {s:?}"));
    Ok((num(r)?, num(c)?))
}

/// `LASSO_PATHS_THREADS` must be a positive integer when set. Every solver
/// here is sequential, so any value is already honoured.
fn thread_cap() -> Result<usize, Failure> {
    match std::env::var("LASSO_PATHS_THREADS") {
        Err(_) => Ok(1),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| usage(format!("LASSO_PATHS_THREADS must be a positive integer, got {v:?}"))),
    }
}

fn load_query_graph(q: &QueryArgs) -> Result<Graph<f64>, Failure> {
    let g = match (&q.graph, q.vertices, q.edges) {
        (Some(path), _, _) => load_graph(path).map_err(usage)?,
        (None, Some(n), Some(m)) => {
            let seed = q.seed.ok_or_else(|| usage("random graphs need --seed"))?;
            gen_random_graph(n, m, q.w_min, q.w_max, seed).map_err(usage)?
        }
        _ => return Err(usage("give --graph, or --vertices with --edges and --seed")),
    };
    for (name, v) in [("source", q.source), ("target", q.target)] {
        if v == 0 || v > g.n() {
            return Err(usage(format!("--{name} {v} is not a vertex (1..={})", g.n())));
        }
    }
    if q.source == q.target {
        return Err(usage("--source and --target must differ"));
    }
    Ok(g)
}

fn query_spec(q: &QueryArgs, choice: SolverChoice) -> Result<ExperimentSpec, Failure> {
    let g = load_query_graph(q)?;
    let mut spec = ExperimentSpec::new(GraphSource::Graph(g), Endpoints::Vertices(q.source, q.target), choice);
    spec.seed = q.seed;
    spec.out_dir = q.out_dir.clone();
    spec.timing = !q.no_timing;
    Ok(spec)
}

/// Preset, then the config file, then explicit flags.
fn solver_config(base: AdmmConfig, flags: &SolverFlags) -> Result<AdmmConfig, Failure> {
    let mut cfg = base;
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let overlay: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let serde_json::Value::Object(fields) = overlay else {
            return Err(usage(format!("{}: config must be a JSON object", path.display())));
        };
        let mut merged = serde_json::to_value(base).map_err(usage)?;
        let target = merged.as_object_mut().expect("config serializes to an object");
        target.extend(fields);
        cfg = serde_json::from_value(merged).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    if let Some(v) = flags.lambda_rel {
        cfg.lambda_rel = v;
    }
    if let Some(v) = flags.rho {
        cfg.rho = v;
    }
    if let Some(v) = flags.cg_tol {
        cfg.cg_tol = v;
    }
    if let Some(v) = flags.max_iter {
        cfg.max_iter = v;
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn run(spec: &ExperimentSpec) -> Result<ExperimentOutcome, Failure> {
    spec.validate().map_err(usage)?;
    run_experiment(spec).map_err(solver)
}

fn vertex_line(out: &ExperimentOutcome) -> String {
    let verts: Vec<String> = out.path.vertices(&out.graph).iter().map(|v| (v + 1).to_string()).collect();
    verts.join(" ")
}

fn print_summary(out: &ExperimentOutcome) {
    let s = &out.summary;
    println!(
        "{} length {} oracle {} rel_gap {:.3e} iterations {} converged {}",
        s.solver, s.length, s.oracle_length, s.rel_gap, s.iterations, s.converged
    );
    println!("{}", vertex_line(out));
}

fn create(path: &Path) -> Result<File, Failure> {
    File::create(path).map_err(|e| solver(format!("{}: {e}", path.display())))
}

fn write_admm_trace(out: &ExperimentOutcome, path: &Option<PathBuf>) -> Result<(), Failure> {
    if let (Some(path), Some(trace)) = (path, &out.admm) {
        trace.write_csv(create(path)?).map_err(solver)?;
    }
    Ok(())
}

fn cmd_dijkstra(q: &QueryArgs) -> Result<(), Failure> {
    let out = run(&query_spec(q, SolverChoice::Dijkstra)?)?;
    println!("length {}", out.path.length);
    println!("{}", vertex_line(&out));
    Ok(())
}

fn cmd_lars(a: &LarsArgs) -> Result<(), Failure> {
    if a.beta_samples.is_some() && a.samples < 2 {
        return Err(usage("--samples must be at least 2"));
    }
    let out = run(&query_spec(&a.query, SolverChoice::Lars)?)?;
    let trace = out.lars.as_ref().expect("lars run keeps its trace");
    if let Some(path) = &a.trace {
        lasso_paths::lars::write_trace_csv(trace, &out.graph, create(path)?).map_err(solver)?;
    }
    if let Some(path) = &a.beta_samples {
        let top = trace.breakpoints.first().map_or(0.0, |b| b.lambda);
        let k = a.samples - 1;
        let grid: Vec<f64> = (0..=k).map(|i| top * (k - i) as f64 / k as f64).collect();
        write_beta_samples_csv(trace, &out.graph, &grid, create(path)?).map_err(solver)?;
    }
    print_summary(&out);
    Ok(())
}

fn cmd_admm(a: &AdmmArgs, choice: SolverChoice) -> Result<(), Failure> {
    let mut spec = query_spec(&a.query, choice)?;
    spec.config = solver_config(AdmmConfig::default(), &a.solver)?;
    spec.threshold = a.solver.threshold;
    let out = run(&spec)?;
    write_admm_trace(&out, &a.solver.trace)?;
    print_summary(&out);
    Ok(())
}

fn cmd_gen_random(a: &GenArgs) -> Result<(), Failure> {
    let g: Graph<f64> = gen_random_graph(a.vertices, a.edges, a.w_min, a.w_max, a.seed).map_err(usage)?;
    let text = if a.json { write_json(&g) } else { write_text(&g) };
    match &a.output {
        Some(path) => std::fs::write(path, text).map_err(|e| solver(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    eprintln!("generated {} vertices, {} edges (seed {})", g.n(), g.m(), a.seed);
    Ok(())
}

fn cmd_scissors(a: &ScissorsArgs) -> Result<(), Failure> {
    let img = GrayImage::load(&a.image).map_err(usage)?;
    for (name, (r, c)) in [("source", a.source), ("target", a.target)] {
        if r == 0 || c == 0 || r > img.height() || c > img.width() {
            return Err(usage(format!(
                "--{name} {r},{c} is outside the {}x{} image (rows 1..={}, cols 1..={})",
                img.height(),
                img.width(),
                img.height(),
                img.width()
            )));
        }
    }
    let choice = match a.solver {
        SolverName::Dijkstra => SolverChoice::Dijkstra,
        SolverName::Lars => SolverChoice::Lars,
        SolverName::Admm => SolverChoice::Admm,
        SolverName::Inadmm => SolverChoice::InAdmm,
    };
    let mut spec = ExperimentSpec::new(GraphSource::Image(img), Endpoints::Pixels(a.source, a.target), choice);
    spec.config = solver_config(AdmmConfig::scissors(), &a.flags)?;
    spec.threshold = a.flags.threshold;
    spec.out_dir = a.out_dir.clone();
    spec.timing = !a.no_timing;
    let out = run(&spec)?;
    write_admm_trace(&out, &a.flags.trace)?;
    print_summary(&out);
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<(), Failure> {
    if a.edges.is_empty() || a.edges.contains(&0) {
        return Err(usage("--edges needs positive counts"));
    }
    if a.iterations == 0 {
        return Err(usage("--iterations must be positive"));
    }
    let rows = bench_iteration_cost(&a.edges, a.iterations, a.seed).map_err(solver)?;
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| solver(format!("{}: {e}", dir.display())))?;
        let mut w = csv::Writer::from_writer(create(&dir.join("bench.csv"))?);
        for row in &rows {
            w.serialize(row).map_err(solver)?;
        }
        w.flush().map_err(solver)?;
    }
    println!("n m iterations ms_per_iter cg_per_iter ms_per_matvec");
    for r in &rows {
        println!(
            "{} {} {} {:.4} {:.1} {:.5}",
            r.n, r.m, r.iterations, r.ms_per_iter, r.cg_iters_per_iter, r.ms_per_matvec
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = thread_cap().and_then(|_| match &cli.command {
        Command::Dijkstra(q) => cmd_dijkstra(q),
        Command::Lars(a) => cmd_lars(a),
        Command::Admm(a) => cmd_admm(a, SolverChoice::Admm),
        Command::Inadmm(a) => cmd_admm(a, SolverChoice::InAdmm),
        Command::GenRandom(a) => cmd_gen_random(a),
        Command::Scissors(a) => cmd_scissors(a),
        Command::Bench(a) => cmd_bench(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
