use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use poi_share::bench::{
    cmd_gen, cmd_ingest, cmd_solve_mobile, cmd_solve_static, cmd_sweep, cmd_validate, exit_code,
    Algorithm, EvalReport, MobileOptions, RouteChoice, StaticOptions, SweepOptions,
};
use poi_share::mobile::WalkMode;
use poi_share::pipeline::{BoundingBox, GenSpec, IngestParams, ReductionKind};
use poi_share::tiebreak::TieBreak;
use poi_share::{Error, Result};

#[derive(Parser)]
#[command(name = "poi-share", version, about = "Social-enhanced PoI sharing solver and benchmark harness")]
struct Cli {
    /// Seed for generators and seeded tie-breaking.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Evaluation route; `both` cross-checks the set and matrix routes.
    #[arg(long, global = true, value_enum, default_value_t = Route::Set)]
    route: Route,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Route {
    Matrix,
    Set,
    Both,
}

impl From<Route> for RouteChoice {
    fn from(r: Route) -> Self {
        match r {
            Route::Matrix => RouteChoice::Matrix,
            Route::Set => RouteChoice::Set,
            Route::Both => RouteChoice::Both,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ties {
    Lowest,
    Highest,
    Seeded,
}

#[derive(Args)]
struct TieArgs {
    /// How greedy steps break ties between equal gains.
    #[arg(long, value_enum, default_value_t = Ties::Lowest)]
    tie_break: Ties,
}

impl TieArgs {
    fn rule(&self, seed: u64) -> TieBreak {
        match self.tie_break {
            Ties::Lowest => TieBreak::LowestIndex,
            Ties::Highest => TieBreak::HighestIndex,
            Ties::Seeded => TieBreak::Seeded(seed),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Greedy user selection on an instance file.
    SolveStatic {
        instance: PathBuf,
        #[arg(short, long)]
        k: usize,
        /// Ignore the instance's preference sets.
        #[arg(long)]
        no_preferences: bool,
        #[command(flatten)]
        ties: TieArgs,
    },
    /// Greedy walk selection on an instance file.
    SolveMobile {
        instance: PathBuf,
        #[arg(short, long)]
        n: usize,
        #[arg(short, long)]
        k: usize,
        /// Augmentation factor (walks per start node).
        #[arg(short, long, default_value_t = 1)]
        g: usize,
        /// Post-process to distinct start nodes; needs an all-user instance.
        #[arg(long)]
        adjusted: bool,
        /// Restrict candidates to simple paths.
        #[arg(long)]
        simple_paths: bool,
        #[command(flatten)]
        ties: TieArgs,
    },
    /// Sweep budgets and emit ratio rows against the upper bounds.
    Sweep {
        instance: PathBuf,
        /// Budget range, e.g. `1..30` (inclusive) or `1,2,5`.
        #[arg(long, default_value = "1..10")]
        k: String,
        /// Comma-separated algorithms.
        #[arg(long, value_delimiter = ',', default_value = "gus,set-cover-baseline,no-broadcast,bound")]
        algorithms: Vec<String>,
        /// Comma-separated seeds; defaults to --seed.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Use each seed as a seeded tie-break.
        #[arg(long)]
        seeded_ties: bool,
        #[arg(short, long, default_value_t = 2)]
        n: usize,
        #[arg(short, long, default_value_t = 1)]
        g: usize,
        /// Zero the timing column for byte-reproducible output.
        #[arg(long)]
        deterministic: bool,
    },
    /// Generate an instance file.
    Gen {
        #[arg(long, value_enum)]
        mode: GenMode,
        #[arg(short, long)]
        out: PathBuf,
        /// synthetic-random: node count.
        #[arg(long, default_value_t = 20)]
        nodes: usize,
        /// synthetic-random: user count (defaults to all nodes).
        #[arg(long)]
        users: Option<usize>,
        /// synthetic-random: sensing edge probability.
        #[arg(long, default_value_t = 0.2)]
        edge_probability: f64,
        #[arg(long, default_value_t = 24.0)]
        social_mean: f64,
        #[arg(long, default_value_t = 8.0)]
        social_sigma: f64,
        /// gowalla-like: cluster count.
        #[arg(long, default_value_t = 92)]
        clusters: usize,
        #[arg(long, default_value_t = 4)]
        knn: usize,
        /// reduction: `vcp` or `mobile`.
        #[arg(long, value_enum, default_value_t = ReductionChoice::Vcp)]
        kind: ReductionChoice,
        /// reduction: graph as `u-v` pairs, e.g. `0-1,1-2,0-2`.
        #[arg(long, default_value = "0-1,1-2,0-2")]
        graph: String,
        /// reduction (mobile): tail length.
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Build an instance from Gowalla-style check-ins.
    Ingest {
        checkins: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Bounding box `lat_min,lat_max,lon_min,lon_max`; defaults to the San Francisco study area.
        #[arg(long, value_delimiter = ',', num_args = 4)]
        bbox: Option<Vec<f64>>,
        #[arg(long, default_value_t = 92)]
        clusters: usize,
        #[arg(long, default_value_t = 4)]
        knn: usize,
        #[arg(long, default_value_t = 24.0)]
        social_mean: f64,
        #[arg(long, default_value_t = 8.0)]
        social_sigma: f64,
    },
    /// Report invariant violations in an instance file.
    Validate { instance: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenMode {
    SyntheticRandom,
    GowallaLike,
    Reduction,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReductionChoice {
    Vcp,
    Mobile,
}

fn parse_ks(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Input(format!("bad budget range {text:?}"));
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn parse_graph(text: &str) -> Result<(usize, Vec<(usize, usize)>)> {
    let bad = || Error::Input(format!("bad graph {text:?}; expected pairs like 0-1,1-2"));
    let edges: Vec<(usize, usize)> = text
        .split(',')
        .map(|p| {
            let (u, v) = p.split_once('-').ok_or_else(bad)?;
            Ok((u.trim().parse().map_err(|_| bad())?, v.trim().parse().map_err(|_| bad())?))
        })
        .collect::<Result<_>>()?;
    let nodes = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    Ok((nodes, edges))
}

fn print_report(report: &EvalReport, format: Format) -> Result<()> {
    match format {
        Format::Csv => print!("{}", report.to_csv()?),
        Format::Json => print!("{}", report.to_json()?),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let route: RouteChoice = cli.route.into();
    match cli.command {
        Command::SolveStatic {
            instance,
            k,
            no_preferences,
            ties,
        } => {
            let opts = StaticOptions {
                k,
                route,
                tie_break: ties.rule(cli.seed),
                ignore_preferences: no_preferences,
                seed: cli.seed,
            };
            let rep = cmd_solve_static(&instance, &opts)?;
            if cli.format == Format::Json {
                println!("{}", serde_json::to_string_pretty(&rep)?);
            } else {
                eprintln!(
                    "selection: {:?}\nwelfare: {}\nratio: {}\nbound: {}",
                    rep.result.selection.indices(),
                    rep.row.welfare,
                    rep.row.ratio,
                    rep.row.bound
                );
                print_report(&EvalReport { rows: vec![rep.row] }, Format::Csv)?;
            }
        }
        Command::SolveMobile {
            instance,
            n,
            k,
            g,
            adjusted,
            simple_paths,
            ties,
        } => {
            let mut opts = MobileOptions::new(n, k, g);
            opts.adjusted = adjusted;
            opts.walk_mode = if simple_paths { WalkMode::SimplePaths } else { WalkMode::Walks };
            opts.route = route;
            opts.tie_break = ties.rule(cli.seed);
            opts.seed = cli.seed;
            let rep = cmd_solve_mobile(&instance, &opts)?;
            if cli.format == Format::Json {
                println!("{}", serde_json::to_string_pretty(&rep)?);
            } else {
                for w in rep.result.walks.walks() {
                    eprintln!("walk: {w}");
                }
                eprintln!("welfare: {}\nratio: {}\nbound: {}", rep.row.welfare, rep.row.ratio, rep.row.bound);
                print_report(&EvalReport { rows: vec![rep.row] }, Format::Csv)?;
            }
        }
        Command::Sweep {
            instance,
            k,
            algorithms,
            seeds,
            seeded_ties,
            n,
            g,
            deterministic,
        } => {
            let algs = algorithms
                .iter()
                .map(|a| Algorithm::parse(a.trim()))
                .collect::<Result<Vec<_>>>()?;
            let mut opts = SweepOptions::new(parse_ks(&k)?, algs);
            opts.seeds = if seeds.is_empty() { vec![cli.seed] } else { seeds };
            opts.seeded_ties = seeded_ties;
            opts.n = n;
            opts.g = g;
            opts.route = route;
            opts.deterministic = deterministic;
            print_report(&cmd_sweep(&instance, &opts)?, cli.format)?;
        }
        Command::Gen {
            mode,
            out,
            nodes,
            users,
            edge_probability,
            social_mean,
            social_sigma,
            clusters,
            knn,
            kind,
            graph,
            n,
        } => {
            let spec = match mode {
                GenMode::SyntheticRandom => GenSpec::SyntheticRandom {
                    node_count: nodes,
                    user_count: users.unwrap_or(nodes),
                    edge_probability,
                    social_mean,
                    social_sigma,
                    seed: cli.seed,
                },
                GenMode::GowallaLike => {
                    let mut spec = GenSpec::gowalla_like(cli.seed);
                    if let GenSpec::GowallaLike { params, .. } = &mut spec {
                        params.clusters = clusters;
                        params.knn = knn;
                        params.social_mean = social_mean;
                        params.social_sigma = social_sigma;
                    }
                    spec
                }
                GenMode::Reduction => {
                    let (node_count, edges) = parse_graph(&graph)?;
                    let vcp = ReductionKind::Vcp { node_count, edges };
                    match kind {
                        ReductionChoice::Vcp => GenSpec::Reduction(vcp),
                        ReductionChoice::Mobile => GenSpec::Reduction(ReductionKind::Mobile {
                            base: Box::new(GenSpec::Reduction(vcp)),
                            n,
                        }),
                    }
                }
            };
            let inst = cmd_gen(&spec, &out)?;
            eprintln!(
                "wrote {}: {} nodes, {} users, {} sensing edges, {} social edges",
                out.display(),
                inst.node_count(),
                inst.user_count(),
                inst.sensing().edge_count(),
                inst.social().edges().len()
            );
        }
        Command::Ingest {
            checkins,
            out,
            bbox,
            clusters,
            knn,
            social_mean,
            social_sigma,
        } => {
            let bbox = match bbox.as_deref() {
                Some(&[a, b, c, d]) => BoundingBox::new(a, b, c, d)?,
                Some(_) => return Err(Error::Input("--bbox takes 4 numbers".into())),
                None => BoundingBox::study_area(),
            };
            let params = IngestParams {
                clusters,
                knn,
                social_mean,
                social_sigma,
                seed: cli.seed,
            };
            let (summary, rejected) = cmd_ingest(&checkins, &bbox, &params, &out)?;
            for r in &rejected {
                eprintln!("line {}: {}", r.line, r.reason);
            }
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&summary)?),
                Format::Csv => eprintln!(
                    "parsed {} check-ins ({} rejected), {} in box; wrote {} with {} nodes",
                    summary.parsed,
                    rejected.len(),
                    summary.in_box,
                    out.display(),
                    summary.node_count
                ),
            }
        }
        Command::Validate { instance } => {
            let violations = cmd_validate(&instance)?;
            if cli.format == Format::Json {
                println!("{}", serde_json::to_string_pretty(&violations)?);
            } else {
                for v in &violations {
                    println!("{v}");
                }
            }
            if !violations.is_empty() {
                return Err(Error::InvalidInstance(violations));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
