// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! `curvegraph`: curvature, warped products and metrics from the command line.
//!
//! Every subcommand writes one JSON record per line (or CSV with `--csv`),
//! sorted by vertex id. Exit codes: 1 invariant failure, 2 input error,
//! 3 numerical failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use curvegraph::curvature::{self, CurvatureError, UpperBoundVariant};
use curvegraph::graph::{Dim, GraphError, WeightedGraph};
use curvegraph::io::{self as cio, IoError};
use curvegraph::metrics::{self, MetricError, MetricKind};
use curvegraph::verify::{self, CheckClass};
use curvegraph::warped::{Product, WarpedError, BOUND_TOL};

#[derive(Debug, Parser)]
#[command(name = "curvegraph", version, about = "Bakry-Émery curvature of weighted graphs and their doubly warped products")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Worker threads for vertex sweeps; defaults to all cores.
    #[arg(long, global = true, env = "CURVEGRAPH_WORKERS")]
    workers: Option<usize>,
    /// Output file instead of stdout.
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,
    /// Emit CSV instead of JSON lines.
    #[arg(long, global = true)]
    csv: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Curvature function at every vertex, or at one.
    Curv {
        graph: PathBuf,
        #[arg(long)]
        vertex: Option<String>,
        #[arg(long, default_value = "inf")]
        dim: Dim,
    },
    /// Structural lower and upper bounds against exact curvature.
    Bounds {
        graph: PathBuf,
        #[arg(long, default_value = "2")]
        dim: Dim,
    },
    /// Build a doubly warped product and save it as a graph file.
    Product { warp: PathBuf },
    /// Every product bound at every product vertex.
    Report {
        warp: PathBuf,
        #[arg(long, value_parser = parse_dims)]
        dims: (Dim, Dim),
        #[arg(long)]
        vertex: Option<String>,
        /// Slack allowed when judging whether a bound holds.
        #[arg(long, default_value_t = BOUND_TOL)]
        tol: f64,
    },
    /// Good warping pair check and rigidity verdict.
    Rigidity {
        warp: PathBuf,
        #[arg(long, default_value = "inf")]
        dim: Dim,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Distances between vertex pairs.
    Metric {
        graph: PathBuf,
        #[arg(long, default_value = "path")]
        kind: MetricKind,
        /// `all`, or `;`-separated `x,y` pairs.
        #[arg(long, default_value = "all")]
        pairs: String,
    },
    /// The invariant suite on a seeded random corpus.
    Verify {
        #[arg(value_name = "SEED")]
        seed_arg: Option<u64>,
        #[arg(value_name = "TRIALS")]
        trials_arg: Option<usize>,
        #[arg(long, default_value_t = 42, conflicts_with = "seed_arg")]
        seed: u64,
        #[arg(long, default_value_t = 100, conflicts_with = "trials_arg")]
        trials: usize,
    },
}

fn parse_dims(s: &str) -> Result<(Dim, Dim), String> {
    cio::parse_dims(s).map_err(|e| e.to_string())
}

/// A failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure { code: 2, message: message.to_string() }
    }
    fn numeric(message: impl ToString) -> Self {
        Failure { code: 3, message: message.to_string() }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::input(e)
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        Failure::input(e)
    }
}

impl From<CurvatureError> for Failure {
    fn from(e: CurvatureError) -> Self {
        match e {
            CurvatureError::IsolatedVertex(_) | CurvatureError::Graph(_) => Failure::input(e),
            _ => Failure::numeric(e),
        }
    }
}

impl From<WarpedError> for Failure {
    fn from(e: WarpedError) -> Self {
        match e {
            WarpedError::Curvature(c) => c.into(),
            _ => Failure::input(e),
        }
    }
}

impl From<MetricError> for Failure {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Singular => Failure::numeric(e),
            MetricError::Warped(w) => w.into(),
            _ => Failure::input(e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::input(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::input(e)
    }
}

/// JSON-lines or CSV sink.
enum Sink {
    Json(Box<dyn Write>),
    Csv(Box<csv::Writer<Box<dyn Write>>>),
}

impl Sink {
    fn open(common: &Common) -> Result<Self, Failure> {
        let w: Box<dyn Write> = match &common.output {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(if common.csv { Sink::Csv(Box::new(csv::Writer::from_writer(w))) } else { Sink::Json(w) })
    }

    /// `json` goes to JSON lines, `row` to CSV.
    fn emit<J: Serialize, R: Serialize>(&mut self, json: &J, row: impl FnOnce() -> Vec<R>) -> Result<(), Failure> {
        match self {
            Sink::Json(w) => {
                serde_json::to_writer(&mut *w, json).map_err(Failure::numeric)?;
                w.write_all(b"\n")?;
            }
            Sink::Csv(w) => {
                for r in row() {
                    w.serialize(r)?;
                }
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<(), Failure> {
        match self {
            Sink::Json(mut w) => w.flush()?,
            Sink::Csv(mut w) => w.flush()?,
        }
        Ok(())
    }
}

fn vertex_filter(g: &WeightedGraph, vertex: &Option<String>) -> Result<Vec<usize>, Failure> {
    let mut idx: Vec<usize> = match vertex {
        Some(id) => vec![g.index_of(id)?],
        None => (0..g.len()).collect(),
    };
    idx.sort_by(|&a, &b| g.id(a).cmp(g.id(b)));
    Ok(idx)
}

/// Run `f` over `items` on the pool, keeping input order.
fn par_map<T: Sync, R: Send, E: Send>(items: &[T], f: impl Fn(&T) -> Result<R, E> + Sync + Send) -> Result<Vec<R>, E> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.common.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::input(format!("cannot size worker pool: {e}")))?;
    }
    match cli.command {
        Command::Curv { graph, vertex, dim } => curv(&cli.common, &graph, &vertex, dim),
        Command::Bounds { graph, dim } => bounds(&cli.common, &graph, dim),
        Command::Product { warp } => product(&cli.common, &warp),
        Command::Report { warp, dims, vertex, tol } => report(&cli.common, &warp, dims, &vertex, tol),
        Command::Rigidity { warp, dim, tol } => rigidity(&cli.common, &warp, dim, tol),
        Command::Metric { graph, kind, pairs } => metric(&cli.common, &graph, kind, &pairs),
        Command::Verify { seed_arg, trials_arg, seed, trials } => {
            verify(&cli.common, seed_arg.unwrap_or(seed), trials_arg.unwrap_or(trials))
        }
    }
}

#[derive(Serialize)]
struct CurvRow<'a> {
    vertex: &'a str,
    dim: Dim,
    value: f64,
    maximizer_dim: usize,
    saturation: &'a str,
}

fn curv(common: &Common, path: &Path, vertex: &Option<String>, dim: Dim) -> Result<(), Failure> {
    let g = cio::load_graph(path)?;
    let idx = vertex_filter(&g, vertex)?;
    let results = par_map(&idx, |&x| curvature::curvature_function(&g, x, dim))?;
    let mut sink = Sink::open(common)?;
    for r in &results {
        sink.emit(r, || {
            vec![CurvRow {
                vertex: &r.vertex,
                dim: r.dim,
                value: r.value,
                maximizer_dim: r.maximizer_dim,
                saturation: r.saturation.map_or("undecidable", |s| s.label()),
            }]
        })?;
    }
    sink.finish()
}

#[derive(Serialize)]
struct BoundsRecord<'a> {
    vertex: &'a str,
    dim: Dim,
    exact: f64,
    exact_inf: f64,
    lower_degree_form: Option<f64>,
    lower_anchored: Option<f64>,
    lower_holds: bool,
    upper_as_stated: f64,
    upper_corrected: f64,
    upper_as_stated_holds: bool,
    upper_corrected_holds: bool,
}

fn bounds(common: &Common, path: &Path, dim: Dim) -> Result<(), Failure> {
    let g = cio::load_graph(path)?;
    let idx = vertex_filter(&g, &None)?;
    let rows = par_map(&idx, |&x| -> Result<_, Failure> {
        let exact = curvature::curvature(&g, x, dim)?;
        let exact_inf = curvature::curvature(&g, x, Dim::Infinite)?;
        let lb = curvature::structural_lower_bound(&g, x, dim)?;
        let stated = curvature::structural_upper_bound(&g, x, UpperBoundVariant::AsStated)?;
        let corrected = curvature::structural_upper_bound(&g, x, UpperBoundVariant::Corrected)?;
        let tol = BOUND_TOL;
        Ok(BoundsRecord {
            vertex: g.id(x),
            dim,
            exact,
            exact_inf,
            lower_degree_form: lb.degree_form,
            lower_anchored: lb.anchored,
            lower_holds: lb.best() <= exact + tol,
            upper_as_stated: stated,
            upper_corrected: corrected,
            upper_as_stated_holds: exact_inf <= stated + tol,
            upper_corrected_holds: exact_inf <= corrected + tol,
        })
    })?;
    let mut sink = Sink::open(common)?;
    for r in &rows {
        sink.emit(r, || vec![r])?;
    }
    sink.finish()
}

fn product(common: &Common, path: &Path) -> Result<(), Failure> {
    let spec = cio::load_warp(path)?;
    let pr = Product::warped(&spec)?;
    match &common.output {
        Some(out) => cio::save_graph(&pr.graph, out)?,
        None => io::stdout().write_all(cio::graph_to_string(&pr.graph).as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum ReportRecord<'a> {
    Vertex(&'a curvegraph::warped::BoundReport),
    Dilation(curvegraph::warped::DilationNumbers),
}

#[derive(Serialize)]
struct ReportRow<'a> {
    vertex: &'a str,
    n1: Dim,
    n2: Dim,
    bound: &'a str,
    side: curvegraph::warped::Side,
    value: f64,
    exact: f64,
    holds: bool,
}

fn report(common: &Common, path: &Path, (n1, n2): (Dim, Dim), vertex: &Option<String>, tol: f64) -> Result<(), Failure> {
    let spec = cio::load_warp(path)?;
    let pr = Product::warped(&spec)?;
    let idx = vertex_filter(&pr.graph, vertex)?;
    let mut reports = par_map(&idx, |&i| pr.bound_report(pr.point(i), n1, n2))?;
    for r in &mut reports {
        for e in &mut r.entries {
            e.holds = match e.side {
                curvegraph::warped::Side::Lower => e.value <= e.exact + tol,
                curvegraph::warped::Side::Upper => e.exact <= e.value + tol,
            };
        }
    }
    let mut sink = Sink::open(common)?;
    for r in &reports {
        sink.emit(&ReportRecord::Vertex(r), || {
            r.entries
                .iter()
                .map(|e| ReportRow {
                    vertex: &r.vertex,
                    n1,
                    n2,
                    bound: e.name,
                    side: e.side,
                    value: e.value,
                    exact: e.exact,
                    holds: e.holds,
                })
                .collect()
        })?;
    }
    if let Sink::Json(_) = sink {
        sink.emit(&ReportRecord::Dilation(pr.dilation_numbers()?), Vec::<()>::new)?;
    }
    sink.finish()
}

#[derive(Serialize)]
struct RigidityRow {
    dim: Dim,
    good_pair: bool,
    equality_holds: bool,
    equality_gap: f64,
    alpha_constant: bool,
    beta_constant: bool,
    einstein_first: bool,
    einstein_second: bool,
    ratio_defect: Option<f64>,
    ratio_matches: bool,
    contradiction: bool,
}

fn rigidity(common: &Common, path: &Path, dim: Dim, tol: f64) -> Result<(), Failure> {
    let spec = cio::load_warp(path)?;
    let pr = Product::warped(&spec)?;
    let v = pr.rigidity_check(dim, tol)?;
    let mut sink = Sink::open(common)?;
    sink.emit(&v, || {
        vec![RigidityRow {
            dim: v.dim,
            good_pair: v.good_pair,
            equality_holds: v.equality_holds,
            equality_gap: v.equality_gap,
            alpha_constant: v.alpha_constant,
            beta_constant: v.beta_constant,
            einstein_first: v.einstein_first.einstein,
            einstein_second: v.einstein_second.einstein,
            ratio_defect: v.ratio_defect,
            ratio_matches: v.ratio_matches,
            contradiction: v.contradiction,
        }]
    })?;
    sink.finish()
}

#[derive(Serialize)]
struct MetricRow<'a> {
    kind: MetricKind,
    from: &'a str,
    to: &'a str,
    value: f64,
}

fn metric(common: &Common, path: &Path, kind: MetricKind, pairs: &str) -> Result<(), Failure> {
    let g = cio::load_graph(path)?;
    let mut pairs = cio::parse_pairs(pairs, &g)?.pairs(g.len());
    pairs.sort_by(|a, b| (g.id(a.0), g.id(a.1)).cmp(&(g.id(b.0), g.id(b.1))));
    let results = par_map(&pairs, |&(x, y)| metrics::distance(&g, kind, x, y))?;
    let mut sink = Sink::open(common)?;
    for r in &results {
        sink.emit(r, || vec![MetricRow { kind: r.kind, from: &r.from, to: &r.to, value: r.value }])?;
    }
    sink.finish()
}

#[derive(Serialize)]
struct VerifySummary {
    record: &'static str,
    seed: u64,
    trials: usize,
    hard_failures: usize,
    hard_errors: usize,
    passed: bool,
}

#[derive(Serialize)]
struct CheckRow<'a> {
    name: &'a str,
    class: CheckClass,
    trials: usize,
    failures: usize,
    errors: usize,
    worst: f64,
}

fn verify(common: &Common, seed: u64, trials: usize) -> Result<(), Failure> {
    let report = verify::run(seed, trials).map_err(Failure::input)?;
    let mut sink = Sink::open(common)?;
    for c in &report.checks {
        sink.emit(c, || {
            vec![CheckRow {
                name: c.name,
                class: c.class,
                trials: c.trials,
                failures: c.failures,
                errors: c.errors,
                worst: c.worst,
            }]
        })?;
    }
    let summary = VerifySummary {
        record: "summary",
        seed,
        trials,
        hard_failures: report.hard_failures(),
        hard_errors: report.hard_errors(),
        passed: report.hard_ok(),
    };
    if let Sink::Json(_) = sink {
        sink.emit(&summary, Vec::<()>::new)?;
    }
    sink.finish()?;
    if !report.hard_ok() {
        for c in report.checks.iter().filter(|c| c.class == CheckClass::Hard && !c.passed()) {
            eprintln!("curvegraph: invariant `{}` failed: {}", c.name, c.example.as_deref().unwrap_or(""));
        }
        return Err(Failure { code: 1, message: format!("{} hard invariant failures", summary.hard_failures + summary.hard_errors) });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("curvegraph: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
