use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use clap::error::ErrorKind;

use torus_cm::components::{connected_components, summarize};
use torus_cm::degree_model::{parse_distribution, rho, DistributionLiteral};
use torus_cm::experiments::{
    evaluate_bounds, output_dir, run_conjecture_scan, run_counterexample, run_exploration_success,
    run_extinction_convergence, run_giant_component, run_percolation, sample_graph, BoundInputs,
    ScenarioConfig, ScenarioOutput, Table,
};
use torus_cm::torus_graph::{load_edge_list, save_edge_list};
use torus_cm::{rng, Error, Result};

#[derive(Debug, Parser)]
#[command(name = "torus-cm", version, about = "Configuration model on the d-torus with compartment constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the extinction probability rho of a degree distribution
    Rho {
        #[arg(long)]
        dist: String,
    },
    /// Sample a graph and write its edge list with a JSON sidecar
    Generate(Common),
    /// Component summary of a saved edge list
    Analyze {
        file: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        beta: f64,
    },
    /// Largest-component fraction against 1 - rho
    Giant(Common),
    /// Fixed-size compartments on the circle over a schedule of n
    Counterexample(Common),
    /// Largest-component fraction over a grid of lambda and n with m = lambda ln n
    Conjecture(Common),
    /// Largest-component fraction after edge percolation
    Percolation(Common),
    /// Fraction of random roots in small components against rho
    Extinction(Common),
    /// Evaluate the finite-size success bounds
    Bounds(Common),
    /// Exploration success frequency against its lower bound
    Explore(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON scenario file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Output directory (default $TORUS_CM_OUT or ./results)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Degree distribution literal, e.g. '{"pmf":{"1":0.5,"3":0.5}}'
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    n_values: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    p_keep: Option<Vec<f64>>,
    #[arg(long)]
    roots: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
}

impl Common {
    fn config(&self) -> Result<ScenarioConfig> {
        let mut config = match (&self.config, &self.dist) {
            (Some(path), _) => ScenarioConfig::from_json(&std::fs::read_to_string(path)?)?,
            (None, Some(dist)) => ScenarioConfig::new(literal(dist)?),
            (None, None) => return Err(Error::Config("either --config or --dist is required".into())),
        };
        if let (Some(_), Some(dist)) = (&self.config, &self.dist) {
            config.dist = literal(dist)?;
        }
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    config.$field = v;
                }
            )*};
        }
        set!(seed, replicates, d, beta, n_values, lambdas, p_keep, roots, delta);
        if self.k.is_some() {
            config.k = self.k;
        }
        if self.m.is_some() {
            config.m = self.m;
        }
        config.validate()?;
        Ok(config)
    }

    fn out_dir(&self) -> PathBuf {
        output_dir(self.out.as_deref())
    }

    fn install_threads(&self) -> Result<()> {
        if let Some(n) = self.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        }
        Ok(())
    }
}

fn literal(text: &str) -> Result<DistributionLiteral> {
    let lit: DistributionLiteral =
        serde_json::from_str(text).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    lit.build()?;
    Ok(lit)
}

fn save(output: &ScenarioOutput, dir: &Path) -> Result<()> {
    let path = output.save(dir)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Rho { dist } => {
            println!("{:.12}", rho(&parse_distribution(&dist)?)?);
        }
        Command::Generate(args) => {
            let config = args.config()?;
            let dist = config.distribution()?;
            let mut rng = rng::master(config.seed);
            let graph = sample_graph(&dist, config.d, config.require_k()?, config.require_m()?, &mut rng)?;
            let dir = args.out_dir();
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("edges.csv");
            save_edge_list(&graph, &path, Some(config.seed))?;
            println!("wrote {} ({} edges)", path.display(), graph.edges().len());
        }
        Command::Analyze { file, beta } => {
            let graph = load_edge_list(&file)?;
            let summary = summarize(&graph, &connected_components(&graph), beta)?;
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.serialize(summary)?;
            w.flush()?;
        }
        Command::Giant(args) => {
            let config = args.config()?;
            args.install_threads()?;
            let run = run_giant_component(&config)?;
            let s = &run.summary;
            println!(
                "mean L1/n = {:.6} (sd {:.6}), 1 - rho = {:.6}, max L2 = {}, census match rate = {}",
                s.mean_l1_frac, s.sd_l1_frac, s.target, s.max_l2, s.census_match_rate
            );
            save(&run.output(&config), &args.out_dir())?;
        }
        Command::Counterexample(args) => {
            let config = args.config()?;
            args.install_threads()?;
            let run = run_counterexample(&config)?;
            for w in &run.warnings {
                eprintln!("warning: {w}");
            }
            for p in &run.points {
                println!("n = {}: mean L1/n = {:.6}", p.n, p.mean_l1_frac);
            }
            println!(
                "strictly decreasing: {}, unconstrained 1 - rho = {:.6}",
                run.strictly_decreasing, run.unconstrained_fraction
            );
            save(&run.output(&config), &args.out_dir())?;
        }
        Command::Conjecture(args) => {
            let config = args.config()?;
            args.install_threads()?;
            let run = run_conjecture_scan(&config)?;
            for c in &run.cells {
                println!("lambda = {}, n = {}: mean L1/n = {:.6}", c.lambda, c.n, c.mean_l1_frac);
            }
            save(&run.output(&config), &args.out_dir())?;
        }
        Command::Percolation(args) => {
            let config = args.config()?;
            args.install_threads()?;
            let run = run_percolation(&config)?;
            for p in &run.points {
                println!("p_keep = {}: mean L1/n = {:.6}", p.p_keep, p.mean_l1_frac);
            }
            save(&run.output(&config), &args.out_dir())?;
        }
        Command::Extinction(args) => {
            let config = args.config()?;
            args.install_threads()?;
            let run = run_extinction_convergence(&config)?;
            println!(
                "P(|C_v| <= {:.3}) = {:.6} (se {:.6}), rho = {:.6}",
                run.threshold, run.frequency.value, run.frequency.std_error, run.rho
            );
            save(&run.output(&config), &args.out_dir())?;
        }
        Command::Bounds(args) => {
            let config = args.config();
            let mut inputs = match &config {
                Ok(c) => c.bounds.unwrap_or_else(BoundInputs::example),
                Err(_) if args.config.is_none() && args.dist.is_none() => BoundInputs::example(),
                Err(e) => return Err(Error::Config(e.to_string())),
            };
            if let Some(m) = args.m {
                inputs.m = m as f64;
            }
            if let Some(d) = args.d {
                inputs.d = d;
            }
            if let Some(k) = args.k {
                inputs.side = k as f64;
            }
            if let Some(delta) = args.delta {
                inputs.delta = delta;
            }
            if let Some(beta) = args.beta {
                inputs.beta = beta;
            }
            let r = evaluate_bounds(&inputs)?;
            let mut t = Table::new(&["a_n", "b_n", "c_n", "raw_b_n", "combined", "combined_failure_term"]);
            t.push(
                [r.a_n, r.b_n, r.c_n, r.raw_b_n, r.combined, r.combined_failure_term]
                    .iter()
                    .map(|x| x.to_string())
                    .collect(),
            );
            println!("{}", t.columns.join(","));
            println!("{}", t.rows[0].join(","));
            if let Ok(c) = &config {
                let mut c = c.clone();
                c.bounds = Some(inputs);
                save(&ScenarioOutput::new("bounds", &c, t), &args.out_dir())?;
            }
        }
        Command::Explore(args) => {
            let config = args.config()?;
            args.install_threads()?;
            let run = run_exploration_success(&config)?;
            println!(
                "success frequency = {:.6} (se {:.6}), bound a_n = {:.6}, dominated = {}",
                run.frequency.value, run.frequency.std_error, run.bound, run.dominated
            );
            save(&run.output(&config), &args.out_dir())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
