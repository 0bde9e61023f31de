use ckbb::engine::{self, Progress, SolveStatus};
use ckbb::io::constraints::format_constraints;
use ckbb::io::{external_metrics, generate_constraints, generate_synthetic, load_csv, parse_constraints, Report};
use ckbb::model::{validate_instance, ConstraintSet, Dataset, SolverConfig};
use ckbb::preprocess::collapse;
use ckbb::{heuristics, oracle};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ckbb", version, about = "Global k-means clustering under must-link / cannot-link constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance to certified optimality (or a gap / time / node limit).
    Solve(SolveArgs),
    /// Generate a seeded synthetic Gaussian-blob dataset.
    Generate(GenerateArgs),
    /// Draw random pairwise constraints from ground-truth labels.
    GenConstraints(GenConstraintsArgs),
    /// Run only the restarted constrained heuristic.
    Heuristic(HeuristicArgs),
    /// Brute-force exact optimum of a tiny instance.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// CSV dataset, one point per row.
    #[arg(long)]
    data: PathBuf,
    /// Constraint file (`ML i j` / `CL i j` lines).
    #[arg(long)]
    constraints: Option<PathBuf>,
    /// Number of clusters.
    #[arg(long)]
    k: usize,
    /// Treat the final CSV column as an integer class label.
    #[arg(long)]
    labels_last: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Relative optimality gap at which to stop.
    #[arg(long, default_value_t = 1e-3)]
    gap: f64,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Maximum number of branch-and-bound nodes.
    #[arg(long)]
    max_nodes: Option<u64>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum samples per Lagrangian decomposition group.
    #[arg(long, default_value_t = 4)]
    group_size: usize,
    /// Subgradient iterations per node.
    #[arg(long, default_value_t = 20)]
    ld_iters: usize,
    /// Initial subgradient step size.
    #[arg(long, default_value_t = 1.0)]
    ld_step0: f64,
    /// Heuristic restarts for the root incumbent.
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    /// Also apply the literal per-sample distance threshold when eliminating.
    #[arg(long)]
    paper_rho_rule: bool,
    /// Disable the cluster-ordering cut at the root.
    #[arg(long)]
    no_symmetry_breaking: bool,
    /// Warm-start each node's multipliers from its parent.
    #[arg(long)]
    inherit_multipliers: bool,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k_true: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    spread: f64,
    #[arg(long)]
    out_data: PathBuf,
    #[arg(long)]
    out_labels: PathBuf,
}

#[derive(Args)]
struct GenConstraintsArgs {
    /// Label file, one integer per line.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 0)]
    ml: usize,
    #[arg(long, default_value_t = 0)]
    cl: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HeuristicArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    restarts: usize,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    instance: InstanceArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Generate(args) => run_generate(args),
        Command::GenConstraints(args) => run_gen_constraints(args),
        Command::Heuristic(args) => run_heuristic(args),
        Command::Oracle(args) => run_oracle(args),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn load_instance(args: &InstanceArgs) -> Result<(Dataset, ConstraintSet), String> {
    let data = load_csv(&args.data, args.labels_last).map_err(|e| e.to_string())?;
    let cons = match &args.constraints {
        Some(path) => parse_constraints(path, data.n()).map_err(|e| e.to_string())?,
        None => ConstraintSet::default(),
    };
    validate_instance(&data, &cons, args.k).map_err(|e| e.to_string())?;
    Ok((data, cons))
}

fn run_solve(args: SolveArgs) -> Result<ExitCode, String> {
    let (data, cons) = load_instance(&args.instance)?;
    let inst = collapse(&data, &cons, args.instance.k).map_err(|e| e.to_string())?;

    let mut config = SolverConfig::new(args.instance.k);
    config.rel_gap_tol = args.gap;
    config.time_limit_s = args.time_limit.unwrap_or(f64::INFINITY);
    config.max_nodes = args.max_nodes.unwrap_or(u64::MAX);
    config.threads = args.threads;
    config.seed = args.seed;
    config.group_size_max = args.group_size;
    config.ld_iterations = args.ld_iters;
    config.ld_step0 = args.ld_step0;
    config.heuristic_restarts = args.restarts;
    config.paper_rho_rule = args.paper_rho_rule;
    config.symmetry_breaking = !args.no_symmetry_breaking;
    config.inherit_multipliers = args.inherit_multipliers;
    config.validate().map_err(|e| e.to_string())?;

    let log = |p: &Progress| {
        eprintln!(
            "[t={:.1}s] lb={:.6} ub={:.6} gap={:.4}% nodes={}",
            p.time_s,
            p.lb,
            p.ub,
            p.rel_gap * 100.0,
            p.nodes
        );
    };
    let result = engine::solve(&inst, &config, Some(&log)).map_err(|e| e.to_string())?;

    let metrics = match (data.labels(), &result.best) {
        (Some(truth), Some(best)) => {
            Some(external_metrics(&best.assignment, truth).map_err(|e| e.to_string())?)
        }
        _ => None,
    };
    let report = Report::from_result(&result, &inst, &config, metrics);
    emit(&report.to_json(), &args.out)?;
    Ok(exit_for(result.status))
}

fn run_generate(args: GenerateArgs) -> Result<ExitCode, String> {
    if args.n < args.k_true {
        return Err("--n must be at least --k-true".into());
    }
    let data = generate_synthetic(args.n, args.d, args.k_true, args.seed, args.spread);
    let mut csv = String::new();
    for point in data.points() {
        let row: Vec<String> = point.iter().map(|v| format!("{v}")).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    std::fs::write(&args.out_data, csv).map_err(|e| e.to_string())?;
    let labels: String = data
        .labels()
        .unwrap()
        .iter()
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(&args.out_labels, labels).map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn read_labels(path: &PathBuf) -> Result<Vec<usize>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.parse()
                .map_err(|_| format!("{}:{}: invalid label {l:?}", path.display(), i + 1))
        })
        .collect()
}

fn run_gen_constraints(args: GenConstraintsArgs) -> Result<ExitCode, String> {
    let labels = read_labels(&args.labels)?;
    let cons =
        generate_constraints(&labels, args.ml, args.cl, args.seed).map_err(|e| e.to_string())?;
    std::fs::write(&args.out, format_constraints(&cons)).map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn run_heuristic(args: HeuristicArgs) -> Result<ExitCode, String> {
    let (data, cons) = load_instance(&args.instance)?;
    let inst = collapse(&data, &cons, args.instance.k).map_err(|e| e.to_string())?;
    match heuristics::multi_restart(&inst, args.instance.k, args.restarts, args.seed) {
        Some(best) => {
            let expanded = inst.expand_assignment(&best.assignment);
            let out = serde_json::json!({
                "objective": best.objective,
                "centroids": best.centroids,
                "assignment": expanded,
                "restarts": args.restarts,
                "seed": args.seed,
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        None => {
            eprintln!("no feasible solution found in {} restarts", args.restarts);
            Ok(ExitCode::from(2))
        }
    }
}

fn run_oracle(args: OracleArgs) -> Result<ExitCode, String> {
    let (data, cons) = load_instance(&args.instance)?;
    match oracle::brute_force_raw(&data, &cons, args.instance.k).map_err(|e| e.to_string())? {
        Some(sol) => {
            let out = serde_json::json!({
                "cost": sol.cost,
                "assignment": sol.assignment,
                "centroids": sol.centroids,
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        None => {
            eprintln!("instance is infeasible");
            Ok(ExitCode::from(2))
        }
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(|e| e.to_string()),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn exit_for(status: SolveStatus) -> ExitCode {
    match status {
        SolveStatus::Infeasible => ExitCode::from(2),
        _ => ExitCode::SUCCESS,
    }
}
