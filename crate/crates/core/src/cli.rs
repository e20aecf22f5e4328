//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on validation errors (bad input files, oracle
//! mismatches), 2 on usage errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dp::Solver;
use crate::error::{Error, Result};
use crate::experiment::{
    find_critical_points, gradient_vs_degree, sample_request, sweep_destinations, sweep_diffusers,
    write_degree_csv, write_points_csv, write_rows_csv, Builder, ExperimentConfig,
};
use crate::graph::{average_degree, generate_waxman, MulticastRequest, NodeId, WaxmanParams};
use crate::io::{read_graph, read_tree, write_atomic, write_json};
use crate::load::{self, brute_force_optimal, materialize_paths, DiffuserSet, BRUTE_FORCE_LIMIT};
use crate::tree::validate_tree;

/// Environment variable consulted when no seed is given.
pub const SEED_ENV: &str = "DNMTP_SEED";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(
    name = "dnmtp",
    version,
    about = "Diffusing-node placement in optical multicast trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a Waxman topology.
    GenGraph(GenGraph),
    /// Build a multicast tree over a graph.
    BuildTree(BuildTree),
    /// Place diffusing nodes optimally in a tree.
    Solve(Solve),
    /// Evaluate the load of a given diffuser set.
    Eval(Eval),
    /// Run one of the statistical studies.
    Experiment(Box<Experiment>),
}

#[derive(Debug, Args)]
struct GenGraph {
    #[arg(long, default_value_t = 200)]
    nodes: usize,
    #[arg(long, default_value_t = 0.15)]
    alpha: f64,
    #[arg(long, default_value_t = 0.2)]
    beta: f64,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Shp,
    Stt,
}

#[derive(Debug, Args)]
struct BuildTree {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "shp")]
    method: Method,
    /// Multicast source; drawn at random when omitted with --ndest.
    #[arg(long)]
    source: Option<NodeId>,
    /// Explicit destinations, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "ndest")]
    dest: Option<Vec<NodeId>>,
    /// Number of random destinations.
    #[arg(long)]
    ndest: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct Solve {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    k: i64,
    /// Cross-check against exhaustive search when the tree is small enough.
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dump the solver tables as CSV.
    #[arg(long)]
    tables: Option<PathBuf>,
    /// Also report min_{1<=i<=k} L_i(root), which charges the root as a diffuser.
    #[arg(long)]
    charged_root: bool,
}

#[derive(Debug, Args)]
struct Eval {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "")]
    diffusers: Vec<String>,
    /// Print the explicit paths as well.
    #[arg(long)]
    paths: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Study {
    SweepDest,
    SweepK,
    Critical,
    Degree,
}

#[derive(Debug, Args)]
struct Experiment {
    #[arg(value_enum)]
    study: Study,
    /// key=value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Where the critical study writes its (k, r_star) points.
    #[arg(long)]
    points_out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    nodes: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    dest_counts: Option<String>,
    #[arg(long)]
    k_values: Option<String>,
    #[arg(long)]
    n_dest: Option<String>,
    #[arg(long)]
    r_min: Option<String>,
    #[arg(long)]
    r_max: Option<String>,
    #[arg(long)]
    m_values: Option<String>,
    #[arg(long)]
    precision: Option<String>,
    #[arg(long)]
    confidence: Option<String>,
    #[arg(long)]
    min_samples: Option<String>,
    #[arg(long)]
    max_samples: Option<String>,
    #[arg(long)]
    topologies: Option<String>,
}

enum Failure {
    Usage(String),
    Invalid(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e)
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::GenGraph(args) => gen_graph(args),
        Command::BuildTree(args) => build_tree(args),
        Command::Solve(args) => solve(args),
        Command::Eval(args) => eval(args),
        Command::Experiment(args) => experiment(*args),
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV}={v:?} is not a seed"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn gen_graph(args: GenGraph) -> Result<(), Failure> {
    let seed = resolve_seed(args.seed)?;
    let params = WaxmanParams {
        nodes: args.nodes,
        alpha: args.alpha,
        beta: args.beta,
        m: args.m,
    };
    let graph = generate_waxman(&params, seed)?;
    write_json(&args.out, &graph.to_file())?;
    println!(
        "graph: {} nodes, {} edges, average degree {:.3} -> {}",
        graph.node_count(),
        graph.edge_count(),
        average_degree(&graph),
        args.out.display()
    );
    Ok(())
}

fn build_tree(args: BuildTree) -> Result<(), Failure> {
    let graph = read_graph(&args.graph)?;
    let req = match (&args.dest, args.ndest) {
        (Some(dest), _) => {
            let source = args
                .source
                .ok_or_else(|| Failure::Usage("--dest requires --source".into()))?;
            MulticastRequest::new(&graph, source, dest.iter().copied())?
        }
        (None, Some(count)) => {
            let seed = resolve_seed(args.seed)?;
            match args.source {
                None => sample_request(&graph, count, seed, 0)?,
                Some(source) => {
                    let n = graph.node_count();
                    if !graph.contains(source) {
                        return Err(Error::UnknownNode(source).into());
                    }
                    if count >= n {
                        return Err(Failure::Usage(format!(
                            "{count} destinations do not fit in {n} nodes"
                        )));
                    }
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let dests = sample(&mut rng, n - 1, count).into_iter().map(|i| {
                        if i >= source {
                            i + 1
                        } else {
                            i
                        }
                    });
                    MulticastRequest::new(&graph, source, dests)?
                }
            }
        }
        (None, None) => return Err(Failure::Usage("give --dest or --ndest".into())),
    };
    let builder = match args.method {
        Method::Shp => Builder::ShortestPath,
        Method::Stt => Builder::Steiner,
    };
    let tree = builder.build(&graph, &req)?;
    validate_tree(&tree, &req, &graph).map_err(|v| Error::InvalidTree(v.to_string()))?;
    write_json(&args.out, &tree.to_file())?;
    println!(
        "{builder} tree: source {}, {} destinations, {} arcs -> {}",
        req.source(),
        req.destinations().len(),
        tree.arc_count(),
        args.out.display()
    );
    Ok(())
}

fn solve(args: Solve) -> Result<(), Failure> {
    if args.k < 0 {
        return Err(Failure::Usage(format!(
            "--k must be non-negative, got {}",
            args.k
        )));
    }
    let k = args.k as usize;
    let tree = read_tree(&args.tree)?;
    let solution = Solver::new(k).solve(&tree)?;
    let diffusers = solution.extract_placement(k)?;
    let load = solution.load(k);
    let check = load::load(&tree, &diffusers)?;
    if check != load {
        return Err(Error::InvalidTree(format!(
            "placement re-evaluates to {check}, solver reported {load}"
        ))
        .into());
    }
    if args.oracle {
        if tree.node_count() <= BRUTE_FORCE_LIMIT {
            let (_, best) = brute_force_optimal(&tree, k)?;
            if best != load {
                return Err(Error::InvalidTree(format!(
                    "oracle mismatch: exhaustive search gives {best}, solver {load}"
                ))
                .into());
            }
            eprintln!("oracle: exhaustive search agrees ({best})");
        } else {
            eprintln!(
                "oracle: skipped, {} nodes exceed the limit of {BRUTE_FORCE_LIMIT}",
                tree.node_count()
            );
        }
    }
    if let Some(path) = &args.tables {
        let mut buf = Vec::new();
        solution.write_tables_csv(&mut buf).map_err(Error::from)?;
        write_atomic(path, &buf)?;
    }
    let placement = crate::dp::Placement {
        budget: k,
        load,
        diffusers,
    };
    let file = placement.to_file();
    if let Some(path) = &args.out {
        write_json(path, &file)?;
    }
    if args.charged_root {
        let value = solution.charged_root_load();
        eprintln!(
            "charged-root value: {}",
            value.map_or_else(|| "infeasible".to_string(), |v| v.to_string())
        );
    }
    println!("{}", serde_json::to_string(&file).expect("serializable"));
    Ok(())
}

fn eval(args: Eval) -> Result<(), Failure> {
    let tree = read_tree(&args.tree)?;
    let ids: Vec<NodeId> = args
        .diffusers
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("bad diffuser id {s:?}")))
        })
        .collect::<Result<_, _>>()?;
    let diffusers: DiffuserSet = ids.into_iter().collect();
    let value = load::load(&tree, &diffusers)?;
    let solution = materialize_paths(&tree, &diffusers)?;
    if args.json {
        let json = serde_json::json!({
            "load": value,
            "diffusers": diffusers.to_vec(),
            "paths": solution.paths,
        });
        println!("{json}");
    } else {
        println!(
            "load {value} with {} diffusers over {} arcs",
            diffusers.len(),
            tree.arc_count()
        );
        if args.paths {
            for p in &solution.paths {
                let hops: Vec<String> = p.iter().map(ToString::to_string).collect();
                println!("  {}", hops.join(" -> "));
            }
        }
    }
    Ok(())
}

fn experiment_config(args: &Experiment) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::default();
    let mut seed_given = false;
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let keys = cfg.apply_text(&text, &path.display().to_string())?;
        seed_given = keys.iter().any(|k| k == "seed");
    }
    let overrides = [
        ("nodes", &args.nodes),
        ("alpha", &args.alpha),
        ("beta", &args.beta),
        ("m", &args.m),
        ("seed", &args.seed),
        ("dest_counts", &args.dest_counts),
        ("k_values", &args.k_values),
        ("n_dest", &args.n_dest),
        ("r_min", &args.r_min),
        ("r_max", &args.r_max),
        ("m_values", &args.m_values),
        ("precision", &args.precision),
        ("confidence", &args.confidence),
        ("min_samples", &args.min_samples),
        ("max_samples", &args.max_samples),
        ("topologies", &args.topologies),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, v)
                .map_err(|e| Failure::Usage(format!("--{}: {e}", key.replace('_', "-"))))?;
        }
    }
    if !seed_given && args.seed.is_none() {
        cfg.seed = resolve_seed(None)?;
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn experiment(args: Experiment) -> Result<(), Failure> {
    let cfg = experiment_config(&args)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_study(args.study, &cfg, &args.out, args.points_out.as_deref()))
}

fn run_study(
    study: Study,
    cfg: &ExperimentConfig,
    out: &Path,
    points_out: Option<&Path>,
) -> Result<(), Failure> {
    let mut buf = Vec::new();
    match study {
        Study::SweepDest | Study::SweepK | Study::Critical => {
            let graphs = cfg.graphs()?;
            let rows = match study {
                Study::SweepDest => sweep_destinations(&graphs, cfg)?,
                Study::SweepK => sweep_diffusers(&graphs, cfg, cfg.n_dest)?,
                _ => {
                    let study = find_critical_points(&graphs, cfg)?;
                    for &(k, r) in &study.points {
                        match r {
                            Some(r) => println!("k = {k:2}: ShP lighter from {r} destinations"),
                            None => {
                                println!("k = {k:2}: no crossing up to {} destinations", cfg.r_max)
                            }
                        }
                    }
                    match study.slope {
                        Some(s) => println!("critical line slope: {s:.3}"),
                        None => println!("critical line slope: undefined"),
                    }
                    if let Some(path) = points_out {
                        let mut pts = Vec::new();
                        write_points_csv(&study.points, &mut pts).map_err(Error::from)?;
                        write_atomic(path, &pts)?;
                    }
                    study.rows
                }
            };
            let flagged = rows.iter().filter(|r| r.estimate.hit_max_samples).count();
            if flagged > 0 {
                eprintln!("warning: {flagged} rows stopped at max_samples before reaching the target precision");
            }
            write_rows_csv(&rows, &mut buf).map_err(Error::from)?;
            println!("{} rows -> {}", rows.len(), out.display());
        }
        Study::Degree => {
            let rows = gradient_vs_degree(cfg, &cfg.m_values)?;
            for row in &rows {
                println!(
                    "m = {}: average degree {:.3}, slope {}",
                    row.m,
                    row.avg_degree,
                    row.slope
                        .map_or_else(|| "undefined".into(), |s| format!("{s:.3}"))
                );
            }
            write_degree_csv(&rows, &mut buf).map_err(Error::from)?;
        }
    }
    write_atomic(out, &buf)?;
    Ok(())
}
