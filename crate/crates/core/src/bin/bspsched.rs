use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bspsched::cost::evaluate_cost;
use bspsched::generator::{generate, generate_from, load_matrix_market, GenKind, GenSpec};
use bspsched::hyperdag::{load_hyperdag, save_hyperdag};
use bspsched::machine::{load_lambda_matrix, MachineParams};
use bspsched::pipeline::{run_algorithm, Algorithm, BenchConfig, BudgetMode, PipelineConfig};
use bspsched::schedule::write_schedule;
use bspsched::Result;

#[derive(Parser)]
#[command(name = "bspsched", version, about = "BSP scheduling of computational DAGs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Schedule one hyperDAG file.
    Schedule(ScheduleArgs),
    /// Write a generated hyperDAG file.
    Generate(GenerateArgs),
    /// Run every configured algorithm on a directory of hyperDAG files.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long)]
    dag: PathBuf,
    #[arg(long = "P", value_name = "P")]
    p: usize,
    #[arg(long, default_value_t = 1)]
    g: u64,
    #[arg(long, default_value_t = 5)]
    l: u64,
    /// NUMA tree factor: lambda(p, q) = DELTA^floor(log2(p xor q)).
    #[arg(long, value_name = "DELTA", conflicts_with = "numa_matrix")]
    numa_tree: Option<u64>,
    /// File with a P x P matrix of NUMA coefficients.
    #[arg(long, value_name = "F")]
    numa_matrix: Option<PathBuf>,
    #[arg(long, default_value = "pipeline")]
    algo: Algorithm,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_budget_mode)]
    budget_mode: Option<BudgetMode>,
    /// Pipeline settings as TOML.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    kind: GenKind,
    /// Matrix dimension; ignored with --matrix.
    #[arg(long = "N", value_name = "N", required_unless_present = "matrix")]
    n: Option<usize>,
    /// Probability of a nonzero.
    #[arg(long, default_value_t = 0.2)]
    q: f64,
    /// Products (exp, knn) or iterations (cg).
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Read the pattern from a MatrixMarket coordinate file instead.
    #[arg(long, value_name = "F")]
    matrix: Option<PathBuf>,
    /// kNN start vertex.
    #[arg(long)]
    source: Option<usize>,
    /// Reuse one set of matrix entries across products.
    #[arg(long)]
    shared_matrix: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    suite: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn parse_budget_mode(s: &str) -> std::result::Result<BudgetMode, String> {
    match s {
        "wall" => Ok(BudgetMode::Wall),
        "ops" => Ok(BudgetMode::Ops),
        _ => Err(format!("expected 'wall' or 'ops', got '{s}'")),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Schedule(a) => run_schedule(a),
        Command::Generate(a) => run_generate(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run_schedule(a: ScheduleArgs) -> Result<()> {
    let dag = load_hyperdag(&a.dag)?;
    let machine = match (&a.numa_matrix, a.numa_tree) {
        (Some(f), _) => MachineParams::with_lambda(a.p, a.g, a.l, load_lambda_matrix(f)?)?,
        (None, Some(delta)) => MachineParams::numa_tree(a.p, a.g, a.l, delta)?,
        (None, None) => MachineParams::uniform(a.p, a.g, a.l)?,
    };
    let mut config = match &a.config {
        Some(f) => PipelineConfig::load(f)?,
        None => PipelineConfig::default(),
    };
    if let Some(mode) = a.budget_mode {
        config.budget_mode = mode;
    }
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    config.validate()?;

    let run = run_algorithm(a.algo, &dag, &machine, &config)?;
    let breakdown = evaluate_cost(&dag, &machine, &run.schedule)?;
    std::fs::create_dir_all(&a.out)?;
    let stem = file_stem(&a.dag);
    let write = |ext: &str, text: String| std::fs::write(a.out.join(format!("{stem}.{ext}")), text);
    write("sched", write_schedule(&run.schedule, a.p))?;
    write("cost.csv", breakdown.to_csv()?)?;
    write("cost.json", breakdown.to_json()?)?;

    println!(
        "{}: cost {} ({} supersteps, {:.2?})",
        a.algo,
        run.cost,
        breakdown.supersteps.len(),
        run.wall
    );
    for (label, cost) in &run.extra {
        println!("  {label}: {cost}");
    }
    Ok(())
}

fn run_generate(a: GenerateArgs) -> Result<()> {
    let mut spec = GenSpec::new(a.kind, a.n.unwrap_or(0), a.q, a.k, a.seed);
    spec.source = a.source;
    spec.shared_matrix = a.shared_matrix;
    let dag = match &a.matrix {
        Some(f) => generate_from(&spec, &load_matrix_market(f)?)?,
        None => generate(&spec)?,
    };
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    save_hyperdag(&dag, &a.out)?;
    println!(
        "{}: {} nodes, {} edges -> {}",
        a.kind,
        dag.num_nodes(),
        dag.num_edges(),
        a.out.display()
    );
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<()> {
    let config = BenchConfig::load(&a.config)?;
    let instances = config.load_suite(&a.suite)?;
    log::info!(
        "{} instances x {} machines x {} algorithms",
        instances.len(),
        config.machines.len(),
        config.algorithms.len()
    );
    std::fs::create_dir_all(&a.out)?;
    let report = config.run(&instances, Some(&a.out.join("schedules")))?;
    std::fs::write(a.out.join("results.csv"), report.rows_csv()?)?;
    std::fs::write(a.out.join("groups.csv"), report.groups_csv()?)?;
    let table = report.to_table();
    std::fs::write(a.out.join("table.txt"), &table)?;
    print!("{table}");
    Ok(())
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "schedule".to_string(), |s| s.to_string_lossy().into_owned())
}
