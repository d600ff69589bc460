//! Batch command-line front end.
//!
//! Results go to stdout as `key=value` lines (or CSV for `sample`). The
//! effective configuration, defaults included, is echoed to stderr as
//! `config.<key>=<value>` lines before any work starts.
//!
//! Exit codes: 0 success, 2 invalid input, 3 inference failure, 64 usage.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exact::{build_junction_tree, choose_ordering, junction_tree_map, tree_bp, tree_map, ve_marginal, Heuristic};
use crate::io;
use crate::learning::{
    bayesian_bn, bn_log_likelihood, chow_liu, em_gmm, hill_climb, mle_bn, pc, score, CiSource, Dataset, GmmOptions,
    HillClimbOptions, PcOptions, ScoreKind,
};
use crate::map::{
    dual_decomposition, graphcut_map, local_search_map, simulated_annealing_map, AnnealingSchedule, DualOptions,
    PairwiseEnergyModel,
};
use crate::models::{enumerate_map, enumerate_marginal, log_joint, Model};
use crate::sampling::{forward_sample, gibbs, jt_forward_sample, metropolis_hastings, RandomSource, SampleBatch, SingleFlipUniform};
use crate::variational::{loopy_bp, mean_field, LoopyOptions, MeanFieldOptions};
use crate::{Evidence, Factor, FactorModel, Semiring};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INFERENCE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser, Serialize)]
#[command(name = "pgm", version, about = "Discrete probabilistic graphical models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Marginal of each target variable, optionally given evidence.
    Query(QueryArgs),
    /// Most probable joint assignment.
    Map(MapArgs),
    /// Draw joint samples as CSV.
    Sample(SampleArgs),
    /// Fit conditional tables of a network structure to data.
    LearnParams(LearnParamsArgs),
    /// Learn a network structure from data.
    LearnStructure(LearnStructureArgs),
    /// Build a junction tree.
    Jtree(JtreeArgs),
    /// Fit a Gaussian mixture with EM.
    EmGmm(EmGmmArgs),
    /// Score a network structure against data.
    Score(ScoreArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum QueryEngine {
    Ve,
    Bp,
    Jtree,
    Gibbs,
    Mh,
    Meanfield,
    Loopy,
    Enum,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MapEngine {
    Maxprod,
    Graphcut,
    Dualdecomp,
    Localsearch,
    Anneal,
    Enum,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SampleMethod {
    Forward,
    Jtree,
    Gibbs,
    Mh,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum StructureMethod {
    Chowliu,
    Pc,
    Hillclimb,
}

#[derive(Debug, Args, Serialize)]
struct ModelArg {
    /// Model document (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Observed value, as VAR=state; repeatable.
    #[arg(long = "evidence", value_name = "VAR=STATE")]
    evidence: Vec<String>,
}

#[derive(Debug, Args, Serialize)]
struct QueryArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArg,
    /// Variable to report; repeatable.
    #[arg(long = "target", required = true)]
    target: Vec<String>,
    #[arg(long, value_enum, default_value = "ve")]
    engine: QueryEngine,
    /// Samples for gibbs and mh.
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long = "burn-in", default_value_t = 1_000)]
    burn_in: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration cap for meanfield (sweeps) and loopy (rounds).
    #[arg(long = "max-iters", default_value_t = 500)]
    max_iters: usize,
    /// Message damping for loopy; 1 means undamped.
    #[arg(long, default_value_t = 0.5)]
    damping: f64,
    /// Digits after the decimal point.
    #[arg(long, default_value_t = 6)]
    precision: usize,
}

#[derive(Debug, Args, Serialize)]
struct MapArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "maxprod")]
    engine: MapEngine,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration cap for dualdecomp; sweep cap for localsearch.
    #[arg(long = "max-iters", default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 6)]
    precision: usize,
}

#[derive(Debug, Args, Serialize)]
struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArg,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, value_enum, default_value = "forward")]
    method: SampleMethod,
    #[arg(long = "burn-in", default_value_t = 1_000)]
    burn_in: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct LearnParamsArgs {
    /// Document whose network structure is fitted (its tables are ignored).
    #[arg(long)]
    model: PathBuf,
    /// CSV of state labels.
    #[arg(long)]
    data: PathBuf,
    /// Additive count per table cell.
    #[arg(long, default_value_t = 0.0, conflicts_with = "dirichlet")]
    pseudocount: f64,
    /// Symmetric Dirichlet concentration; tables become posterior means.
    #[arg(long)]
    dirichlet: Option<f64>,
    /// Write the fitted model document here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct LearnStructureArgs {
    #[arg(long)]
    data: PathBuf,
    /// Document supplying variable declarations; inferred from the CSV otherwise.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "chowliu")]
    method: StructureMethod,
    /// loglik, aic, bic or bd (hillclimb).
    #[arg(long, default_value = "bic")]
    score: String,
    /// Significance level of the independence tests (pc).
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Root of the tree (chowliu); the first variable by default.
    #[arg(long)]
    root: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    #[arg(long = "max-indegree", default_value_t = 3)]
    max_indegree: usize,
    /// Write the learned graph as DOT.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Write the fitted network (chowliu, hillclimb) as a model document.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    precision: usize,
}

#[derive(Debug, Args, Serialize)]
struct JtreeArgs {
    #[arg(long)]
    model: PathBuf,
    /// Write the tree as DOT.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct EmGmmArgs {
    /// CSV of real numbers with a header row.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long = "max-iters", default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 6)]
    precision: usize,
}

#[derive(Debug, Args, Serialize)]
struct ScoreArgs {
    /// Document whose network structure is scored.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// loglik, aic, bic or bd.
    #[arg(long, default_value = "bic")]
    score: String,
    #[arg(long, default_value_t = 6)]
    precision: usize,
}

/// Run the CLI on `args` (program name first) and return the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    for line in config_lines(&cli) {
        let _ = writeln!(stderr, "{line}");
    }
    let mut out = Vec::new();
    match dispatch(&cli.command, &mut out) {
        Ok(()) => {
            let _ = stdout.write_all(&out);
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for a library error. Unreadable or unwritable files count as input errors.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() || matches!(e, Error::Io(_)) {
        EXIT_VALIDATION
    } else {
        EXIT_INFERENCE
    }
}

fn config_lines(cli: &Cli) -> Vec<String> {
    let value = serde_json::to_value(&cli.command).expect("arguments serialize");
    let Value::Object(map) = value else { return Vec::new() };
    let mut lines = Vec::new();
    if let Some(Value::String(c)) = map.get("command") {
        lines.push(format!("config.command={c}"));
    }
    for (k, v) in &map {
        if k == "command" {
            continue;
        }
        let text = match v {
            Value::Null => "none".to_string(),
            Value::String(s) => s.clone(),
            Value::Array(items) => {
                items.iter().map(|i| i.as_str().map_or_else(|| i.to_string(), str::to_string)).collect::<Vec<_>>().join(",")
            }
            other => other.to_string(),
        };
        lines.push(format!("config.{k}={text}"));
    }
    lines
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn parse_evidence(model: &Model, bindings: &[String]) -> Result<Evidence> {
    let mut pairs = Vec::new();
    for b in bindings {
        let (var, state) =
            b.split_once('=').ok_or_else(|| Error::Evidence(format!("`{b}` is not of the form VAR=STATE")))?;
        pairs.push((var.trim(), state.trim()));
    }
    model.evidence(&pairs)
}

fn load(arg: &ModelArg) -> Result<(Model, Evidence)> {
    let model = io::read_model(&arg.model)?;
    let ev = parse_evidence(&model, &arg.evidence)?;
    Ok((model, ev))
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn dispatch(cmd: &Command, out: &mut Vec<u8>) -> Result<()> {
    match cmd {
        Command::Query(a) => query(a, out),
        Command::Map(a) => map(a, out),
        Command::Sample(a) => sample(a, out),
        Command::LearnParams(a) => learn_params(a, out),
        Command::LearnStructure(a) => learn_structure(a, out),
        Command::Jtree(a) => jtree(a, out),
        Command::EmGmm(a) => em(a, out),
        Command::Score(a) => score_cmd(a, out),
    }
}

fn point_mass(model: &Model, name: &str, state: usize) -> Result<Vec<f64>> {
    let mut p = vec![0.0; model.variable(name)?.cardinality()];
    p[state] = 1.0;
    Ok(p)
}

fn normalized(f: &Factor) -> Result<Vec<f64>> {
    Ok(f.normalize()?.0.into_values())
}

fn query(a: &QueryArgs, out: &mut Vec<u8>) -> Result<()> {
    let (model, ev) = load(&a.model)?;
    for t in &a.target {
        model.variable(t)?;
    }
    let targets: Vec<&str> = a.target.iter().map(String::as_str).collect();
    let free: Vec<&str> = targets.iter().copied().filter(|t| !ev.contains_key(*t)).collect();
    let free_dists: Vec<Vec<f64>> = match a.engine {
        QueryEngine::Ve => free.iter().map(|t| normalized(&ve_marginal(&model, &[t], &ev)?)).collect::<Result<_>>()?,
        QueryEngine::Enum => {
            free.iter().map(|t| normalized(&enumerate_marginal(&model, &[t], &ev)?)).collect::<Result<_>>()?
        }
        QueryEngine::Bp => {
            let bp = tree_bp(&model, &ev)?;
            free.iter().map(|t| normalized(bp.marginal(t)?)).collect::<Result<_>>()?
        }
        QueryEngine::Jtree => {
            let mut jt = build_junction_tree(&model)?;
            jt.calibrate(&ev, Semiring::SumProduct)?;
            free.iter().map(|t| normalized(&jt.query(t)?)).collect::<Result<_>>()?
        }
        QueryEngine::Gibbs | QueryEngine::Mh => {
            let mut rng = RandomSource::new(a.seed);
            let batch = if matches!(a.engine, QueryEngine::Gibbs) {
                gibbs(&model, &ev, a.n, a.burn_in, &mut rng)?
            } else {
                let kernel = SingleFlipUniform::new(&model, &ev);
                metropolis_hastings(&model, &kernel, &ev, a.n, a.burn_in, &mut rng)?
            };
            free.iter().map(|t| batch.marginal(t)).collect::<Result<_>>()?
        }
        QueryEngine::Meanfield => {
            let opts = MeanFieldOptions { max_sweeps: a.max_iters, seed: a.seed, ..MeanFieldOptions::default() };
            let (q, _) = mean_field(&model, &ev, &opts)?;
            targets
                .iter()
                .map(|t| Ok(q.get(t)?.to_vec()))
                .collect::<Result<_>>()?
        }
        QueryEngine::Loopy => {
            let opts = LoopyOptions { max_iters: a.max_iters, damping: a.damping, ..LoopyOptions::default() };
            let r = loopy_bp(&model, &ev, &opts)?;
            if !r.converged {
                log::warn!("loopy belief propagation stopped after {} rounds without converging", r.iterations);
            }
            free.iter().map(|t| normalized(r.marginal(t)?)).collect::<Result<_>>()?
        }
    };
    let mut free_iter = free_dists.into_iter();
    let dists: Vec<Vec<f64>> = targets
        .iter()
        .map(|t| match ev.get(*t) {
            Some(&s) => point_mass(&model, t, s),
            None => Ok(free_iter.next().expect("one per free target")),
        })
        .collect::<Result<_>>()?;
    for (t, p) in targets.iter().zip(&dists) {
        let v = model.variable(t)?;
        let line: Vec<String> =
            v.states().iter().zip(p).map(|(s, x)| format!("p[{s}]={x:.prec$}", prec = a.precision)).collect();
        writeln!(out, "{}", line.join(" ")).map_err(io_err)?;
    }
    Ok(())
}

/// Run `solve` on the evidence-reduced model and splice the evidence back in.
fn on_reduced(
    model: &Model,
    ev: &Evidence,
    solve: impl Fn(&crate::MarkovRandomField) -> Result<Vec<usize>>,
) -> Result<Vec<usize>> {
    let reduced = model.to_markov().reduced(ev)?;
    let x = solve(&reduced)?;
    let mut it = x.into_iter();
    Ok(model.variables().iter().map(|v| ev.get(v.name()).copied().unwrap_or_else(|| it.next().expect("one per free variable"))).collect())
}

fn map(a: &MapArgs, out: &mut Vec<u8>) -> Result<()> {
    let (model, ev) = load(&a.model)?;
    let x = match a.engine {
        MapEngine::Enum => enumerate_map(&model, &ev)?.0,
        MapEngine::Maxprod => {
            if crate::models::FactorGraph::from_model(&model).is_forest() {
                tree_map(&model, &ev)?.0
            } else {
                junction_tree_map(&model, &ev)?.0
            }
        }
        MapEngine::Graphcut => on_reduced(&model, &ev, |m| Ok(graphcut_map(&PairwiseEnergyModel::from_mrf(m)?)?.0))?,
        MapEngine::Dualdecomp => on_reduced(&model, &ev, |m| {
            let r = dual_decomposition(m, &DualOptions { max_iters: a.max_iters, ..DualOptions::default() })?;
            if !r.state.agreement {
                log::warn!("dual decomposition did not reach agreement; returning the best decoded assignment");
            }
            Ok(r.assignment)
        })?,
        MapEngine::Localsearch => on_reduced(&model, &ev, |m| Ok(local_search_map(m, a.seed, a.max_iters)?.0))?,
        MapEngine::Anneal => {
            on_reduced(&model, &ev, |m| Ok(simulated_annealing_map(m, &AnnealingSchedule::default(), a.seed)?.0))?
        }
    };
    let labels: Vec<&str> =
        x.iter().zip(model.variables()).map(|(&s, v)| v.state_label(s)).collect::<Result<_>>()?;
    let score = log_joint(&model, &x)?;
    writeln!(out, "assignment=({})", labels.join(",")).map_err(io_err)?;
    if model.is_normalized() {
        writeln!(out, "logp={score:.prec$}", prec = a.precision).map_err(io_err)?;
        writeln!(out, "p={:.prec$}", score.exp(), prec = a.precision).map_err(io_err)?;
    } else {
        writeln!(out, "logscore={score:.prec$}", prec = a.precision).map_err(io_err)?;
    }
    Ok(())
}

fn sample(a: &SampleArgs, out: &mut Vec<u8>) -> Result<()> {
    let (model, ev) = load(&a.model)?;
    let mut rng = RandomSource::new(a.seed);
    let batch: SampleBatch = match a.method {
        SampleMethod::Forward => {
            let bn = model.as_bayesian().ok_or_else(|| Error::Argument("forward sampling needs a Bayesian network".into()))?;
            if !ev.is_empty() {
                return Err(Error::Argument("forward sampling does not take evidence; use jtree, gibbs or mh".into()));
            }
            forward_sample(bn, a.n, &mut rng)?
        }
        SampleMethod::Jtree => {
            let mut jt = build_junction_tree(&model)?;
            jt.calibrate(&ev, Semiring::SumProduct)?;
            jt_forward_sample(&jt, a.n, &mut rng)?
        }
        SampleMethod::Gibbs => gibbs(&model, &ev, a.n, a.burn_in, &mut rng)?,
        SampleMethod::Mh => {
            let kernel = SingleFlipUniform::new(&model, &ev);
            metropolis_hastings(&model, &kernel, &ev, a.n, a.burn_in, &mut rng)?
        }
    };
    match &a.out {
        Some(path) => {
            let mut buf = Vec::new();
            batch.write_csv(&mut buf)?;
            std::fs::write(path, buf).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            writeln!(out, "samples={}", batch.len()).map_err(io_err)?;
            if let Some(r) = batch.acceptance_rate {
                writeln!(out, "acceptance_rate={r:.6}").map_err(io_err)?;
            }
        }
        None => batch.write_csv(&mut *out)?,
    }
    Ok(())
}

fn load_data(model: &Model, path: &Path) -> Result<Dataset> {
    io::load_dataset(&read_text(path)?, model.variables())
}

fn structure_of(model: &Model) -> Result<&crate::DirectedGraph> {
    Ok(model
        .as_bayesian()
        .ok_or_else(|| Error::Argument("the model document must be a Bayesian network".into()))?
        .dag())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn learn_params(a: &LearnParamsArgs, out: &mut Vec<u8>) -> Result<()> {
    let model = io::read_model(&a.model)?;
    let d = load_data(&model, &a.data)?;
    let dag = structure_of(&model)?;
    let bn = match a.dirichlet {
        Some(alpha) => bayesian_bn(dag, &d, alpha)?,
        None => mle_bn(dag, &d, a.pseudocount)?,
    };
    writeln!(out, "rows={}", d.len()).map_err(io_err)?;
    writeln!(out, "loglik={}", io::format_float(bn_log_likelihood(&bn, &d)?)).map_err(io_err)?;
    let text = io::serialize_model(&Model::Bayesian(bn));
    match &a.out {
        Some(p) => write_file(p, &text),
        None => out.write_all(text.as_bytes()).map_err(io_err),
    }
}

fn learn_structure(a: &LearnStructureArgs, out: &mut Vec<u8>) -> Result<()> {
    let text = read_text(&a.data)?;
    let vars = match &a.model {
        Some(p) => io::read_model(p)?.variables().to_vec(),
        None => io::infer_schema(&text)?,
    };
    let d = io::load_dataset(&text, &vars)?;
    let names = d.names();
    let prec = a.precision;
    let (dot, network) = match a.method {
        StructureMethod::Chowliu => {
            let root = a.root.clone().or_else(|| names.first().map(|s| s.to_string())).ok_or_else(|| {
                Error::InsufficientData("no variables".into())
            })?;
            let cl = chow_liu(&d, &root)?;
            for (x, y) in cl.structure.edges() {
                writeln!(out, "edge={x}->{y}").map_err(io_err)?;
            }
            writeln!(out, "total_mi={:.prec$}", cl.total_mi).map_err(io_err)?;
            (cl.structure.to_dot(), Some(cl.network))
        }
        StructureMethod::Pc => {
            let g = pc(CiSource::Data(&d), &names, &PcOptions { alpha: a.alpha, ..PcOptions::default() })?;
            for (x, y) in &g.directed {
                writeln!(out, "edge={x}->{y}").map_err(io_err)?;
            }
            for (x, y) in &g.undirected {
                writeln!(out, "edge={x}--{y}").map_err(io_err)?;
            }
            for (x, y) in &g.conflicts {
                writeln!(out, "conflict={x}--{y}").map_err(io_err)?;
            }
            (g.to_dot(), None)
        }
        StructureMethod::Hillclimb => {
            let opts = HillClimbOptions {
                kind: ScoreKind::parse(&a.score)?,
                restarts: a.restarts,
                max_indegree: a.max_indegree,
                ..HillClimbOptions::default()
            };
            let r = hill_climb(&d, &opts, &mut RandomSource::new(a.seed))?;
            for (x, y) in r.graph.edges() {
                writeln!(out, "edge={x}->{y}").map_err(io_err)?;
            }
            writeln!(out, "score={:.prec$}", r.score).map_err(io_err)?;
            let bn = mle_bn(&r.graph, &d, 0.0)?;
            (r.graph.to_dot(), Some(bn))
        }
    };
    if let Some(p) = &a.dot {
        io::export_dot(&dot, p)?;
    }
    if let Some(p) = &a.out {
        let bn = network.ok_or_else(|| Error::Argument("--out needs a fully directed result (chowliu or hillclimb)".into()))?;
        write_file(p, &io::serialize_model(&Model::Bayesian(bn)))?;
    }
    Ok(())
}

fn jtree(a: &JtreeArgs, out: &mut Vec<u8>) -> Result<()> {
    let model = io::read_model(&a.model)?;
    let jt = build_junction_tree(&model)?;
    let width = choose_ordering(&model, Heuristic::MinFill, &[])?.induced_width;
    writeln!(out, "cliques={}", jt.cliques().len()).map_err(io_err)?;
    for (k, c) in jt.cliques().iter().enumerate() {
        writeln!(out, "clique[{k}]={}", c.join(",")).map_err(io_err)?;
    }
    for &(i, j) in jt.edges() {
        let names: Vec<&str> = jt.sepset(i, j).iter().map(|&v| jt.variables()[v].name()).collect();
        writeln!(out, "sepset[{i},{j}]={}", names.join(",")).map_err(io_err)?;
    }
    writeln!(out, "width={width}").map_err(io_err)?;
    if let Some(p) = &a.dot {
        io::export_dot(&jt.to_dot(), p)?;
    }
    Ok(())
}

fn em(a: &EmGmmArgs, out: &mut Vec<u8>) -> Result<()> {
    let (names, rows) = io::load_real_csv(&read_text(&a.data)?)?;
    let opts = GmmOptions { k: a.k, tol: a.tol, max_iters: a.max_iters, restarts: a.restarts, ..GmmOptions::default() };
    let fit = em_gmm(&rows, &opts, &mut RandomSource::new(a.seed))?;
    let prec = a.precision;
    let join = |xs: &mut dyn Iterator<Item = f64>| xs.map(|x| format!("{x:.prec$}")).collect::<Vec<_>>().join(",");
    writeln!(out, "columns={}", names.join(",")).map_err(io_err)?;
    writeln!(out, "loglik={:.prec$}", fit.loglik()).map_err(io_err)?;
    writeln!(out, "iterations={}", fit.iterations).map_err(io_err)?;
    writeln!(out, "converged={}", fit.converged).map_err(io_err)?;
    writeln!(out, "restart={}", fit.restart).map_err(io_err)?;
    writeln!(out, "collapses={}", fit.collapses).map_err(io_err)?;
    for k in 0..fit.params.k() {
        writeln!(out, "weight[{k}]={:.prec$}", fit.params.weights[k]).map_err(io_err)?;
        writeln!(out, "mean[{k}]=({})", join(&mut fit.params.means[k].iter().copied())).map_err(io_err)?;
        writeln!(out, "cov[{k}]=({})", join(&mut fit.params.covariances[k].transpose().iter().copied())).map_err(io_err)?;
    }
    Ok(())
}

fn score_cmd(a: &ScoreArgs, out: &mut Vec<u8>) -> Result<()> {
    let model = io::read_model(&a.model)?;
    let d = load_data(&model, &a.data)?;
    let s = score(structure_of(&model)?, &d, ScoreKind::parse(&a.score)?)?;
    writeln!(out, "score={:.prec$}", s, prec = a.precision).map_err(io_err)?;
    writeln!(out, "rows={}", d.len()).map_err(io_err)?;
    Ok(())
}
