use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use netid::direct::{estimate_direct, DirectModelStructure, DEFAULT_INFORMATIVITY_THRESHOLD};
use netid::experiments::{
    csv_string, default_scenarios, emit_results, load_scenarios, read_csv, run_local_pipeline, run_monte_carlo,
    LocalConfig, MonteCarloOptions, OutputFormat, ResultTable, Scenario,
};
use netid::local::{Band, Theorem, DEFAULT_FIR_ORDER, DEFAULT_GRID_POINTS};
use netid::network::{build_case_study, load_network, simulate, true_t, ExcitationSpec, NetworkModel, NoiseNodes};
use netid::tf::FreqGrid;

#[derive(Parser)]
#[command(name = "netid", version, about = "Identify one module of a dynamic network")]
struct Cli {
    /// Network file; the built-in 20-node benchmark when omitted.
    #[arg(long, global = true)]
    network: Option<PathBuf>,

    /// Output directory; results go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Caps Monte-Carlo worker threads.
    #[arg(long, global = true, env = "NETID_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the network and write node and excitation signals.
    Simulate(SimArgs),
    /// Direct-method estimate of the target's in-edges from one experiment.
    Direct(DirectArgs),
    /// Local two-step estimate of one module.
    Local(LocalArgs),
    /// Monte-Carlo batch over scenarios.
    Montecarlo(McArgs),
    /// Frequency responses of the true T block or of the true edges.
    Truth(TruthArgs),
    /// Summarise or plot a results CSV.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Svg => OutputFormat::Svg,
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// Excited nodes, e.g. 3,4,5.
    #[arg(long, value_delimiter = ',')]
    excite: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    r_variance: f64,
    #[arg(long, default_value_t = 0.0)]
    v_variance: f64,
    /// Nodes receiving v: "all", or a comma-separated list (default: all).
    #[arg(long)]
    noise: Option<String>,
}

impl ExperimentArgs {
    fn spec(&self) -> Result<ExcitationSpec> {
        let nodes = match self.noise.as_deref() {
            None | Some("all") => NoiseNodes::All,
            Some(list) => NoiseNodes::Only(parse_list(list)?.into_iter().collect()),
        };
        let mut spec = ExcitationSpec::new(self.excite.iter().copied(), self.samples, self.seed).with_noise(self.v_variance, nodes);
        spec.r_variance = self.r_variance;
        Ok(spec)
    }
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
}

#[derive(Args)]
struct DirectArgs {
    /// Target node j.
    #[arg(long, default_value_t = 3)]
    node: usize,
    #[command(flatten)]
    exp: ExperimentArgs,
    #[arg(long, default_value_t = DEFAULT_INFORMATIVITY_THRESHOLD)]
    threshold: f64,
}

#[derive(Args)]
struct LocalArgs {
    /// Target module as j,i (edge from i to j).
    #[arg(long, value_parser = parse_pair, default_value = "3,4")]
    target: (usize, usize),
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_FIR_ORDER)]
    fir_order: usize,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid_points: usize,
    #[arg(long, default_value_t = 1e-6)]
    v_variance: f64,
    /// Force 1 (out-neighbours of i) or 2 (in-neighbours of j).
    #[arg(long)]
    theorem: Option<u8>,
    /// Use the exact T of the model instead of simulated data.
    #[arg(long)]
    exact: bool,
    /// Parametric band of the target as delay,max_degree.
    #[arg(long, value_parser = parse_pair)]
    band: Option<(usize, usize)>,
}

#[derive(Args)]
struct McArgs {
    /// Scenario file, or comma-separated ids from the shipped scenarios ("all" by default).
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    /// Overrides each scenario's base seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long, default_value_t = DEFAULT_INFORMATIVITY_THRESHOLD)]
    threshold: f64,
}

#[derive(Args)]
struct TruthArgs {
    /// Rows of T; with --edges, dump the true edges instead.
    #[arg(long, value_delimiter = ',')]
    rows: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    cols: Vec<usize>,
    #[arg(long)]
    edges: bool,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid_points: usize,
}

#[derive(Args)]
struct ReportArgs {
    /// Results CSV written by `montecarlo`.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',').map(|p| p.trim().parse::<usize>().with_context(|| format!("bad node index {p:?}"))).collect()
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let v: Vec<usize> = s.split(',').map(|p| p.trim().parse().map_err(|_| format!("expected a,b, got {s:?}"))).collect::<Result<_, _>>()?;
    match v[..] {
        [a, b] => Ok((a, b)),
        _ => Err(format!("expected a,b, got {s:?}")),
    }
}

fn load_model(path: Option<&Path>) -> Result<NetworkModel<f64>> {
    match path {
        Some(p) => load_network(p).with_context(|| "load network".to_string()),
        None => Ok(build_case_study()),
    }
}

fn resolve_scenarios(arg: Option<&str>) -> Result<Vec<Scenario>> {
    let Some(arg) = arg else { return Ok(default_scenarios()) };
    if Path::new(arg).is_file() {
        return load_scenarios(arg).context("load scenarios");
    }
    let all = default_scenarios();
    if arg == "all" {
        return Ok(all);
    }
    arg.split(',')
        .map(|id| {
            all.iter().find(|s| s.id == id.trim()).cloned().ok_or_else(|| anyhow!("load scenarios: no file or shipped scenario named {id:?}"))
        })
        .collect()
}

/// Writes `text` to `out/name`, or to stdout without `--out`.
fn deliver(out: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("create {}", dir.display()))?;
            let path = dir.join(name);
            std::fs::write(&path, text).with_context(|| format!("write {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn summary(table: &ResultTable) -> String {
    let mut s = String::from("scenario  runs  failed  informative  mean                      std\n");
    for row in &table.rows {
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:>11.4}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(
            s,
            "{:<8}  {:>4}  {:>6}  {:>10.1}%  {}  {}",
            row.scenario_id,
            row.runs.len(),
            row.failed_runs,
            100.0 * row.informative_rate,
            fmt(&row.mean),
            fmt(&row.std)
        );
    }
    s
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Simulate(a) => {
            let model = load_model(cli.network.as_deref())?;
            let rec = simulate(&model, &a.exp.spec()?).context("simulate")?;
            let l = model.node_count();
            let mut s = String::from("t");
            for k in 1..=l {
                let _ = write!(s, ",w{k}");
            }
            for k in 1..=l {
                let _ = write!(s, ",r{k}");
            }
            s.push('\n');
            for t in 0..rec.samples() {
                let _ = write!(s, "{t}");
                for k in 1..=l {
                    let _ = write!(s, ",{}", rec.w(k)[t]);
                }
                for k in 1..=l {
                    let _ = write!(s, ",{}", rec.r(k)[t]);
                }
                s.push('\n');
            }
            deliver(out, "signals.csv", &s)
        }
        Command::Direct(a) => {
            let model = load_model(cli.network.as_deref())?;
            let structure = DirectModelStructure::from_model(&model, a.node).context("structure")?;
            let rec = simulate(&model, &a.exp.spec()?).context("simulate")?;
            let est = estimate_direct(&rec, &structure, a.threshold).context("estimate")?;
            let mut s = format!(
                "target node {}: informative={} gram_condition={:e} rank={}/{}\n",
                a.node,
                est.informative,
                est.gram_condition,
                est.rank,
                est.theta_hat.len()
            );
            for (src, g) in &est.edges {
                let _ = writeln!(s, "G{},{} = {}", a.node, src, g);
            }
            deliver(out, "direct.txt", &s)
        }
        Command::Local(a) => {
            let model = load_model(cli.network.as_deref())?;
            let theorem = match a.theorem {
                None => None,
                Some(1) => Some(Theorem::OutNeighbors),
                Some(2) => Some(Theorem::InNeighbors),
                Some(n) => bail!("plan: --theorem must be 1 or 2, got {n}"),
            };
            let cfg = LocalConfig {
                samples: a.samples,
                seed: a.seed,
                fir_order: a.fir_order,
                grid_points: a.grid_points,
                v_variance: a.v_variance,
                theorem,
                exact_t: a.exact,
                band: a.band.map(|(delay, max_degree)| Band { delay, max_degree }),
                ..LocalConfig::default()
            };
            let rep = run_local_pipeline(&model, a.target, &cfg)?;
            let c = &rep.choice;
            let mut s = format!(
                "{} for G{},{}: excite {:?}, measure {:?}, {} T entries\n",
                c.which.label(),
                a.target.0,
                a.target.1,
                c.excite,
                c.measure,
                c.entry_count
            );
            for ((r, col), fit) in rep.fit_scores() {
                let _ = writeln!(s, "fit T{r},{col} = {:.4}", fit);
            }
            if !rep.solved.dropped.is_empty() {
                let _ = writeln!(s, "dropped grid points: {:?}", rep.solved.dropped);
            }
            let band = rep.estimate.band;
            for (k, th) in rep.estimate.theta_hat.iter().enumerate() {
                let _ = writeln!(s, "theta[q^-{}] = {th}", band.delay + k);
            }
            let _ = writeln!(s, "residual = {:e}", rep.estimate.residual);
            deliver(out, "local.txt", &s)
        }
        Command::Montecarlo(a) => {
            let model = load_model(cli.network.as_deref())?;
            let mut scenarios = resolve_scenarios(a.scenario.as_deref())?;
            for s in &mut scenarios {
                if let Some(r) = a.runs {
                    s.runs = r;
                }
                if let Some(n) = a.samples {
                    s.samples_per_run = n;
                }
                if let Some(seed) = a.seed {
                    s.base_seed = seed;
                }
                s.validate(model.node_count()).with_context(|| format!("scenario {}", s.id))?;
            }
            let opts = MonteCarloOptions { workers: cli.workers, informativity_threshold: a.threshold, ..Default::default() };
            let mut table = ResultTable::default();
            for s in &scenarios {
                table.rows.push(run_monte_carlo(s, &model, &opts).with_context(|| format!("montecarlo: scenario {}", s.id))?);
            }
            eprint!("{}", summary(&table));
            let truth = single_target_truth(&model, &scenarios);
            match (out, a.format) {
                (Some(dir), f) => {
                    for p in emit_results(&table, f.into(), dir, truth).context("emit")? {
                        eprintln!("wrote {}", p.display());
                    }
                }
                (None, Format::Csv) => std::io::stdout().write_all(csv_string(&table).as_bytes())?,
                (None, Format::Svg) => bail!("emit: --format svg needs --out"),
            }
            Ok(())
        }
        Command::Truth(a) => {
            let model = load_model(cli.network.as_deref())?;
            let grid = FreqGrid::uniform(a.grid_points).context("grid")?;
            let mut s = String::from("omega,row,col,re,im\n");
            if a.edges {
                for ((j, i), g) in model.edges() {
                    for &w in grid.omegas() {
                        let z = g.eval(w).with_context(|| format!("truth: edge {j},{i}"))?;
                        let _ = writeln!(s, "{w},{j},{i},{},{}", z.re, z.im);
                    }
                }
            } else {
                if a.rows.is_empty() || a.cols.is_empty() {
                    bail!("truth: give --rows and --cols, or --edges");
                }
                let t = true_t(&model, &a.rows, &a.cols, &grid).context("truth")?;
                for (k, &w) in grid.omegas().iter().enumerate() {
                    for (ri, r) in a.rows.iter().enumerate() {
                        for (ci, c) in a.cols.iter().enumerate() {
                            let z = t.samples[k][(ri, ci)];
                            let _ = writeln!(s, "{w},{r},{c},{},{}", z.re, z.im);
                        }
                    }
                }
            }
            deliver(out, "truth.csv", &s)
        }
        Command::Report(a) => {
            let file = std::fs::File::open(&a.input).with_context(|| format!("report: open {}", a.input.display()))?;
            let table = read_csv(file, &a.input).context("report")?;
            match (out, a.format) {
                (Some(dir), f) => {
                    for p in emit_results(&table, f.into(), dir, None).context("emit")? {
                        eprintln!("wrote {}", p.display());
                    }
                    print!("{}", summary(&table));
                }
                (None, Format::Csv) => print!("{}", summary(&table)),
                (None, Format::Svg) => bail!("emit: --format svg needs --out"),
            }
            Ok(())
        }
    }
}

/// True coefficients for the scatter marker when every scenario targets the
/// same FIR edge with exactly two coefficients in its band.
fn single_target_truth(model: &NetworkModel<f64>, scenarios: &[Scenario]) -> Option<(f64, f64)> {
    let target = scenarios.first()?.target;
    if scenarios.iter().any(|s| s.target != target) {
        return None;
    }
    let g = model.edge(target.0, target.1)?;
    let c = g.num().coeffs();
    let d = g.relative_degree()?;
    (g.is_fir() && c.len() == d + 2).then(|| (c[d], c[d + 1]))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

