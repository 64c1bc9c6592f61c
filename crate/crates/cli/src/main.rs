use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use giantwalk::config::hex;
use giantwalk::{run_experiment, verify_suite, ExperimentConfig, Scale};
use giantwalk_core::giant::{sample_giant, GiantSample, ModelParams};
use giantwalk_core::gff::estimate_m;
use giantwalk_core::gw::{depth_census, survival_prob_exact, CensusConstants};
use giantwalk_core::resistance::effective_resistance;
use giantwalk_core::skeleton::{build_hierarchy, validate_hierarchy, verify_budgets_for};
use giantwalk_core::walk::simulate_cover;
use giantwalk_core::Graph;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "giantwalk", version, about = "GFF maxima and cover times on the emerging giant")]
struct Cli {
    /// Master seed (required by every sampling command).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Read the graph from a `#giantwalk-graph` file.
    #[arg(long, conflicts_with_all = ["n", "eps"])]
    graph: Option<PathBuf>,
    /// Sample the giant with this many vertices in the ambient graph.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the giant and write `h.graph` and `h.prov`.
    Gen {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        eps: f64,
    },
    /// Survival curve of a Poisson(μ) Galton–Watson tree, as CSV.
    Gw {
        /// `μ` directly, or derived from `--eps`.
        #[arg(long, conflicts_with = "eps")]
        mu: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 200)]
        k_max: usize,
        /// Also run the depth census on a sample of this size.
        #[arg(long)]
        n: Option<u64>,
    },
    /// Effective resistance between two vertices.
    Resist {
        #[command(flatten)]
        source: Source,
        v: usize,
        w: usize,
    },
    /// Monte Carlo expected maximum of the field.
    Gff {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0)]
        pin: usize,
        #[arg(long, default_value_t = 2000)]
        replicas: usize,
    },
    /// Monte Carlo cover time from one start.
    Cover {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long, default_value_t = 10)]
        replicas: usize,
    },
    /// Build and check the chaining hierarchy of a sample.
    Skeleton {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        eps: f64,
    },
    /// Run the claims battery and write the ledger.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Small sizes instead of the acceptance sizes.
        #[arg(long)]
        quick: bool,
        /// Check the commute identity without its factor 2.
        #[arg(long, value_parser = ["literal-commute"])]
        fault: Option<String>,
    },
    /// Run every stage of a config over its grid and write the output tree.
    Report {
        #[arg(long)]
        config: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Claims,
    Runtime(String),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Claims) => ExitCode::from(1),
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn need_seed(seed: Option<u64>) -> Result<u64, Failure> {
    seed.ok_or_else(|| Failure::Usage("--seed is required".into()))
}

fn params(n: u64, eps: f64) -> Result<ModelParams, Failure> {
    ModelParams::new(n, eps).map_err(|e| Failure::Usage(e.to_string()))
}

fn sample(n: u64, eps: f64, seed: Option<u64>) -> Result<GiantSample, Failure> {
    sample_giant(&params(n, eps)?, need_seed(seed)?).map_err(|e| Failure::Runtime(e.to_string()))
}

fn load_graph(src: &Source, seed: Option<u64>) -> Result<Graph, Failure> {
    match (&src.graph, src.n, src.eps) {
        (Some(path), _, _) => {
            let f = fs::File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            Graph::read_text(BufReader::new(f)).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
        }
        (None, Some(n), Some(eps)) => Ok(sample(n, eps, seed)?.graph),
        _ => Err(Failure::Usage("give --graph, or both --n and --eps".into())),
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn check_vertex(g: &Graph, v: usize) -> Result<(), Failure> {
    if v < g.vertex_count() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("vertex {v} out of range (|V| = {})", g.vertex_count())))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    match cli.command {
        Command::Gen { n, eps } => {
            let gs = sample(n, eps, cli.seed)?;
            fs::create_dir_all(&out)?;
            fs::write(out.join("h.graph"), gs.graph.to_text())?;
            fs::write(out.join("h.prov"), gs.provenance_text())?;
            println!(
                "wrote {} (|V|={}, |E|={}, K1={}, K2={})",
                out.join("h.graph").display(),
                gs.graph.vertex_count(),
                gs.graph.edge_count(),
                gs.kernel_count,
                gs.k2_count
            );
            for w in &gs.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Gw { mu, eps, k_max, n } => {
            let mu = match (mu, eps) {
                (Some(mu), _) => mu,
                (None, Some(eps)) => giantwalk_core::giant::solve_mu(eps).map_err(|e| Failure::Usage(e.to_string()))?,
                _ => return Err(Failure::Usage("give --mu or --eps".into())),
            };
            let curve = survival_prob_exact(mu, k_max).map_err(|e| Failure::Usage(e.to_string()))?;
            println!("k,p");
            for (k, p) in curve.p.iter().enumerate() {
                println!("{k},{p}");
            }
            if let (Some(n), Some(eps)) = (n, eps) {
                let gs = sample(n, eps, cli.seed)?;
                let census = depth_census(&gs, 0.5, &CensusConstants::default()).map_err(|e| Failure::Runtime(e.to_string()))?;
                eprintln!("{}", serde_json::to_string(&census).expect("serializable"));
            }
        }
        Command::Resist { source, v, w } => {
            let g = load_graph(&source, cli.seed)?;
            check_vertex(&g, v)?;
            check_vertex(&g, w)?;
            let r = effective_resistance::<f64>(&g, v, w, 1e-10).map_err(|e| Failure::Runtime(e.to_string()))?;
            println!("{} (method {}, residual {:e})", r.value, r.method.as_str(), r.residual);
        }
        Command::Gff { source, pin, replicas } => {
            let g = load_graph(&source, cli.seed)?;
            check_vertex(&g, pin)?;
            let est = estimate_m(&g, pin, replicas, need_seed(cli.seed)?).map_err(|e| Failure::Usage(e.to_string()))?;
            print_json(&est);
        }
        Command::Cover { source, start, replicas } => {
            let g = load_graph(&source, cli.seed)?;
            check_vertex(&g, start)?;
            let est = simulate_cover(&g, start, replicas, need_seed(cli.seed)?, None)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            println!("start={} mean={} se={} replicas={}", est.start, est.mean, est.se, est.steps.len());
        }
        Command::Skeleton { n, eps } => {
            let gs = sample(n, eps, cli.seed)?;
            let h = build_hierarchy(&gs).map_err(|e| Failure::Runtime(e.to_string()))?;
            let props = validate_hierarchy(&gs, &h).map_err(|e| Failure::Runtime(e.to_string()))?;
            let budgets = verify_budgets_for(&h, &gs.params).map_err(|e| Failure::Runtime(e.to_string()))?;
            print_json(&serde_json::json!({ "properties": props, "budgets": budgets }));
            if !props.ok() || budgets.budget_violations + budgets.link_violations > 0 {
                return Err(Failure::Claims);
            }
        }
        Command::Verify { config, quick, fault } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::load(&path).map_err(|e| Failure::Usage(e.to_string()))?,
                None => ExperimentConfig::with_seed(need_seed(cli.seed)?),
            };
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if quick {
                cfg.verify.scale = Scale::Quick;
            }
            if fault.is_some() {
                cfg.verify.literal_commute = true;
            }
            let dir = cli.out.unwrap_or(cfg.out.clone());
            let ledger = verify_suite(&cfg, |r| println!("{}", r.line()));
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("ledger.json"), ledger.to_json())?;
            fs::write(dir.join("ledger.txt"), ledger.table())?;
            print!("{}", ledger.table());
            if ledger.exit_code() != 0 {
                return Err(Failure::Claims);
            }
        }
        Command::Report { config } => {
            let mut cfg = ExperimentConfig::load(&config).map_err(|e| Failure::Usage(e.to_string()))?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(dir) = cli.out {
                cfg.out = dir;
            }
            let cells = run_experiment(&cfg).map_err(|e| match e.exit_code() {
                2 => Failure::Usage(e.to_string()),
                _ => Failure::Runtime(e.to_string()),
            })?;
            for cell in cells {
                for f in &cell.files {
                    println!("{}  {}", file_sha(f)?, f.display());
                }
            }
        }
    }
    Ok(())
}

fn file_sha(path: &Path) -> Result<String, Failure> {
    Ok(hex(&Sha256::digest(fs::read(path)?)))
}
