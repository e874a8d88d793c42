//! Command implementations behind the CLI and the experiment harness: solve,
//! sweep budgets against the upper bounds, generate and ingest instances.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coverage::{CoverageMode, UB_SEARCH_CAP};
use crate::error::{Error, Result};
use crate::io::{read_doc, read_instance, write_instance};
use crate::mobile::{adjusted_gps, gps, mobile_bound, ub2, MobileConfig, MobileResult, WalkMode};
use crate::model::{Instance, Selection, Violation};
use crate::pipeline::{filter_bbox, instance_from_checkins, parse_checkins, synth_instance, BoundingBox, GenSpec, IngestParams, RejectedLine};
use crate::static_solver::{gus, max_coverage_baseline, phi_empty, static_bound, ub1_detailed, SolveConfig, StaticResult};
use crate::tiebreak::TieBreak;
use crate::welfare::{breakdowns_agree, crosscheck_selection, crosscheck_walks, evaluate_selection, EvalRoute};

pub const CSV_HEADER: &str = "k,algorithm,welfare,upper_bound,ratio,bound,wall_time_ms,seed";

/// Which evaluation route(s) a command uses. `Both` evaluates by the set route
/// and fails unless the matrix route agrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteChoice {
    #[default]
    Set,
    Matrix,
    Both,
}

impl RouteChoice {
    fn primary(self) -> EvalRoute {
        match self {
            RouteChoice::Matrix => EvalRoute::Matrix,
            _ => EvalRoute::Set,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Gus,
    Gps,
    AdjustedGps,
    SetCoverBaseline,
    NoBroadcast,
    Bound,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Gus,
        Algorithm::Gps,
        Algorithm::AdjustedGps,
        Algorithm::SetCoverBaseline,
        Algorithm::NoBroadcast,
        Algorithm::Bound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gus => "gus",
            Algorithm::Gps => "gps",
            Algorithm::AdjustedGps => "adjusted-gps",
            Algorithm::SetCoverBaseline => "set-cover-baseline",
            Algorithm::NoBroadcast => "no-broadcast",
            Algorithm::Bound => "bound",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::input(format!("unknown algorithm {s:?}")))
    }

    fn is_mobile(self) -> bool {
        matches!(self, Algorithm::Gps | Algorithm::AdjustedGps)
    }
}

/// One `(k, algorithm, seed)` measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub k: usize,
    pub algorithm: String,
    pub welfare: f64,
    pub upper_bound: f64,
    pub ratio: f64,
    pub bound: f64,
    pub wall_time_ms: f64,
    pub seed: u64,
}

impl ReportRow {
    fn new(k: usize, algorithm: Algorithm, welfare: f64, upper_bound: f64, bound: f64, seed: u64) -> Result<Self> {
        let ratio = if welfare == upper_bound { 1.0 } else { welfare / upper_bound };
        if !(ratio > 0.0 && ratio <= 1.0 + 1e-12) {
            return Err(Error::Crosscheck(format!(
                "{} at k = {k}: welfare {welfare} vs upper bound {upper_bound} gives ratio {ratio} outside (0, 1]",
                algorithm.name()
            )));
        }
        Ok(ReportRow {
            k,
            algorithm: algorithm.name().to_string(),
            welfare,
            upper_bound,
            ratio,
            bound,
            wall_time_ms: 0.0,
            seed,
        })
    }

    fn timed(mut self, start: Instant) -> Self {
        self.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    /// Orders rows by `(k, algorithm, seed)`.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            (a.k, &a.algorithm, a.seed).cmp(&(b.k, &b.algorithm, b.seed))
        });
    }

    /// Zeroes the timing column so output is byte-reproducible.
    pub fn strip_timing(&mut self) {
        for r in &mut self.rows {
            r.wall_time_ms = 0.0;
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(CSV_HEADER.split(','))?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::input(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticOptions {
    pub k: usize,
    pub route: RouteChoice,
    pub tie_break: TieBreak,
    /// Evaluate as if the instance carried no preference sets.
    pub ignore_preferences: bool,
    pub seed: u64,
}

impl StaticOptions {
    pub fn new(k: usize) -> Self {
        StaticOptions {
            k,
            route: RouteChoice::default(),
            tie_break: TieBreak::default(),
            ignore_preferences: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticReport {
    pub result: StaticResult,
    pub row: ReportRow,
}

fn run_gus(instance: &Instance, opts: &StaticOptions) -> Result<StaticResult> {
    let config = SolveConfig::new(opts.k)
        .with_route(opts.route.primary())
        .with_tie_break(opts.tie_break);
    let result = gus(instance, &config)?;
    if opts.route == RouteChoice::Both {
        crosscheck_selection(instance, &Selection::empty())?;
        crosscheck_selection(instance, &result.selection)?;
    }
    Ok(result)
}

pub fn solve_static(instance: &Instance, opts: &StaticOptions) -> Result<StaticReport> {
    let owned;
    let instance = if opts.ignore_preferences {
        owned = instance.without_preferences();
        &owned
    } else {
        instance
    };
    let start = Instant::now();
    let result = run_gus(instance, opts)?;
    let (ub, _) = ub1_detailed(instance, opts.k, UB_SEARCH_CAP);
    let row = ReportRow::new(
        opts.k,
        Algorithm::Gus,
        result.welfare.average,
        ub,
        static_bound(opts.k, instance.user_count()),
        opts.seed,
    )?
    .timed(start);
    Ok(StaticReport { result, row })
}

pub fn cmd_solve_static(instance_path: &Path, opts: &StaticOptions) -> Result<StaticReport> {
    solve_static(&read_instance(instance_path)?, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobileOptions {
    pub n: usize,
    pub k: usize,
    pub g: usize,
    /// Post-process to distinct start nodes (runs the greedy with `g = k`).
    pub adjusted: bool,
    pub walk_mode: WalkMode,
    pub route: RouteChoice,
    pub tie_break: TieBreak,
    pub seed: u64,
}

impl MobileOptions {
    pub fn new(n: usize, k: usize, g: usize) -> Self {
        MobileOptions {
            n,
            k,
            g,
            adjusted: false,
            walk_mode: WalkMode::default(),
            route: RouteChoice::default(),
            tie_break: TieBreak::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobileReport {
    pub result: MobileResult,
    pub row: ReportRow,
}

pub fn solve_mobile(instance: &Instance, opts: &MobileOptions) -> Result<MobileReport> {
    let start = Instant::now();
    let config = MobileConfig::new(opts.n, opts.k, opts.g)
        .with_route(opts.route.primary())
        .with_tie_break(opts.tie_break)
        .with_walk_mode(opts.walk_mode);
    let (result, algorithm, bound) = if opts.adjusted {
        let adj = adjusted_gps(instance, &config)?;
        let base = gps(instance, &MobileConfig { g: opts.k, ..config })?;
        if !breakdowns_agree(&adj.welfare, &base.welfare, !instance.sensing().is_weighted()) {
            return Err(Error::Crosscheck(format!(
                "adjusted walks give Φ = {} but the greedy walks give Φ = {}",
                adj.welfare.average, base.welfare.average
            )));
        }
        (adj, Algorithm::AdjustedGps, mobile_bound(opts.k, instance.node_count(), opts.k))
    } else {
        let r = gps(instance, &config)?;
        (r, Algorithm::Gps, mobile_bound(opts.k, instance.node_count(), opts.g))
    };
    if opts.route == RouteChoice::Both {
        crosscheck_walks(instance, &result.walks)?;
    }
    let row = ReportRow::new(
        opts.k,
        algorithm,
        result.welfare.average,
        ub2(instance, opts.n, opts.k),
        bound,
        opts.seed,
    )?
    .timed(start);
    Ok(MobileReport { result, row })
}

pub fn cmd_solve_mobile(instance_path: &Path, opts: &MobileOptions) -> Result<MobileReport> {
    solve_mobile(&read_instance(instance_path)?, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub ks: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    /// One row per seed; the seed drives a seeded tie-break when `seeded_ties` is set.
    pub seeds: Vec<u64>,
    pub seeded_ties: bool,
    /// Hop length and augmentation factor for the mobile algorithms.
    pub n: usize,
    pub g: usize,
    pub route: RouteChoice,
    /// Search-node cap for the exact coverage term of the upper bounds.
    pub ub_cap: u64,
    /// Zero the timing column.
    pub deterministic: bool,
}

impl SweepOptions {
    pub fn new(ks: Vec<usize>, algorithms: Vec<Algorithm>) -> Self {
        SweepOptions {
            ks,
            algorithms,
            seeds: vec![0],
            seeded_ties: false,
            n: 2,
            g: 1,
            route: RouteChoice::Set,
            ub_cap: UB_SEARCH_CAP,
            deterministic: false,
        }
    }
}

pub fn sweep(instance: &Instance, opts: &SweepOptions) -> Result<EvalReport> {
    let m = instance.user_count();
    let base = phi_empty(instance);
    let mut report = EvalReport::default();
    for &k in &opts.ks {
        let needs_static = opts.algorithms.iter().any(|a| !a.is_mobile());
        let ub1 = if needs_static { ub1_detailed(instance, k, opts.ub_cap).0 } else { 0.0 };
        let sbound = static_bound(k, m);
        for &seed in &opts.seeds {
            let tie_break = if opts.seeded_ties { TieBreak::Seeded(seed) } else { TieBreak::LowestIndex };
            for &alg in &opts.algorithms {
                let start = Instant::now();
                let row = match alg {
                    Algorithm::Gus => {
                        let opts = StaticOptions {
                            k,
                            route: opts.route,
                            tie_break,
                            ignore_preferences: false,
                            seed,
                        };
                        let r = run_gus(instance, &opts)?;
                        ReportRow::new(k, alg, r.welfare.average, ub1, sbound, seed)?
                    }
                    Algorithm::Gps | Algorithm::AdjustedGps => {
                        let mut mo = MobileOptions::new(opts.n, k, opts.g.min(k));
                        mo.adjusted = alg == Algorithm::AdjustedGps;
                        mo.route = opts.route;
                        mo.tie_break = tie_break;
                        mo.seed = seed;
                        solve_mobile(instance, &mo)?.row
                    }
                    Algorithm::SetCoverBaseline => {
                        let (sel, _) = max_coverage_baseline(instance, k, CoverageMode::Greedy)?;
                        let phi = evaluate_selection(instance, &sel, opts.route.primary())?.average;
                        ReportRow::new(k, alg, phi, ub1, sbound, seed)?
                    }
                    Algorithm::NoBroadcast => ReportRow::new(k, alg, base, ub1, sbound, seed)?,
                    Algorithm::Bound => ReportRow::new(k, alg, sbound * ub1, ub1, sbound, seed)?,
                };
                report.rows.push(row.timed(start));
            }
        }
    }
    report.sort();
    if opts.deterministic {
        report.strip_timing();
    }
    Ok(report)
}

pub fn cmd_sweep(instance_path: &Path, opts: &SweepOptions) -> Result<EvalReport> {
    sweep(&read_instance(instance_path)?, opts)
}

pub fn cmd_gen(spec: &GenSpec, out: &Path) -> Result<Instance> {
    let inst = synth_instance(spec)?;
    write_instance(out, &inst)?;
    Ok(inst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub parsed: usize,
    pub in_box: usize,
    pub rejected_lines: Vec<u64>,
    pub node_count: usize,
    pub sensing_edges: usize,
    pub social_edges: usize,
}

pub fn cmd_ingest(tsv: &Path, bbox: &BoundingBox, params: &IngestParams, out: &Path) -> Result<(IngestSummary, Vec<RejectedLine>)> {
    let parsed = parse_checkins(BufReader::new(File::open(tsv)?))?;
    let inside = filter_bbox(&parsed.records, bbox);
    let inst = instance_from_checkins(&inside, params)?;
    write_instance(out, &inst)?;
    let summary = IngestSummary {
        parsed: parsed.records.len(),
        in_box: inside.len(),
        rejected_lines: parsed.rejected.iter().map(|r| r.line).collect(),
        node_count: inst.node_count(),
        sensing_edges: inst.sensing().edge_count(),
        social_edges: inst.social().edges().len(),
    };
    Ok((summary, parsed.rejected))
}

/// Every invariant violation in the instance file (empty when valid).
pub fn cmd_validate(instance_path: &Path) -> Result<Vec<Violation>> {
    Ok(read_doc(instance_path)?.violations())
}

/// Process exit code for an error: 1 input, 2 infeasible, 3 crosscheck.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Infeasible(_) => 2,
        Error::Crosscheck(_) => 3,
        _ => 1,
    }
}
