use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use dispersed::aggregates::{est_distinct_samples, est_max_dominance, max_dominance_variance, AggregateKind, KeyCategory, Selection};
use dispersed::experiments::{self, DistinctDesign, McStats};
use dispersed::io::{read_instance_file, read_sample_jsonl, write_config_header, write_sample_jsonl, QuerySpec};
use dispersed::oblivious::{est_ht, est_max_l, est_max_u_r2, est_or, resolve_known_zeros, OrKind, UVariant};
use dispersed::sampling::{
    effective_probability, instance_salts, sample_bottomk, sample_instance_oblivious, sample_instance_pps, InstanceTable, KeyedSample, SampleDesign,
};
use dispersed::solver::{ProblemFile, TableStatus};
use dispersed::weighted::{est_max_ht_ws, est_max_l_ws_r2, est_or_ws};
use dispersed::{Coordination, Error, FunctionTag, Outcome, RankFamily, Scheme, SeedVector};

#[derive(Parser)]
#[command(name = "dispersed", version, about = "Estimate max, OR and sum aggregates over independently sampled instances")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one instance file; writes JSON lines {key, value, seed, salt[, threshold]}
    Sample {
        instance: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
        /// instance salt, used as given
        #[arg(long, default_value_t = 0)]
        salt: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-key estimates from sample files (one per instance)
    Estimate {
        #[arg(required = true, num_args = 2..)]
        samples: Vec<PathBuf>,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, value_enum, default_value = "max")]
        function: Func,
        #[arg(long, value_enum, default_value = "l")]
        estimator: Est,
        #[arg(long, value_enum, default_value = "symmetric")]
        u_variant: UArg,
        #[arg(long, default_value = "all")]
        selection: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distinct count of the union of two binary instances
    Distinct {
        #[arg(num_args = 0..=2)]
        instances: Vec<PathBuf>,
        /// JSON query {instances, scheme, estimator, selection, salt}; replaces the flags
        #[arg(long)]
        query: Option<PathBuf>,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 0)]
        salt: u64,
        #[arg(long, default_value = "all")]
        selection: String,
        /// Monte Carlo repetitions (0 = single run)
        #[arg(long, default_value_t = 0)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Max dominance Σ max(v1, v2) of two weighted instances under PPS sampling
    Maxdom {
        #[arg(num_args = 0..=2)]
        instances: Vec<PathBuf>,
        #[arg(long)]
        query: Option<PathBuf>,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 0)]
        salt: u64,
        #[arg(long, default_value = "all")]
        selection: String,
        #[arg(long, default_value_t = 0)]
        trials: usize,
        /// also compute the exact variance from the full data (slow for L)
        #[arg(long)]
        exact_variance: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for an order-based estimator table from a JSON problem file
    Solve {
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Data behind the standard plots and synthetic Monte Carlo studies
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Subcommand)]
enum Experiment {
    /// max^(L), max^(U) variance relative to HT vs min/max, p = (1/2, 1/2)
    Fig1 {
        #[arg(long, default_value_t = 21)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// OR variances on (1,1) and (1,0) vs p
    Fig2 {
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// weighted max variance (τ* = 1) vs ρ and min/max
    Fig4 {
        #[arg(long, value_delimiter = ',')]
        rho: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        ratio: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// distinct-count sample size for a target cv vs union size
    Fig6 {
        #[arg(long, value_delimiter = ',')]
        n: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        j: f64,
        #[arg(long, default_value_t = 0.1)]
        cv: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// distinct count on synthetic sets, Monte Carlo vs prediction
    SynthDistinct {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        j: f64,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        salt: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// max dominance on synthetic weighted data vs sampling rate
    SynthMaxdom {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        rates: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        salt: u64,
        #[arg(long, default_value_t = 1)]
        gen_salt: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct SchemeArgs {
    #[arg(long, value_enum, default_value = "oblivious")]
    scheme: SchemeKind,
    /// inclusion probabilities, one per instance or one for all
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    /// PPS thresholds τ*, one per instance or one for all
    #[arg(long, value_delimiter = ',')]
    tau: Vec<f64>,
    /// bottom-k sample size
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "exp")]
    rank: RankArg,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Debug)]
enum SchemeKind {
    Oblivious,
    Pps,
    Bottomk,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RankArg {
    Exp,
    Pps,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Func {
    Max,
    Or,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Est {
    Ht,
    L,
    U,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum UArg {
    Symmetric,
    Asymmetric,
}

enum Failure {
    Lib(Error),
    /// solver finished without a valid table
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Solver(msg)) => {
            eprintln!("solver: {msg}");
            ExitCode::from(4)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Parse { .. } | Error::InvalidData(_) | Error::InvalidParameter(_) | Error::LengthMismatch { .. } | Error::NonBinary(_) => 2,
                Error::Infeasible(_) => 3,
                Error::AmbiguousOrder(_) => 4,
                _ => 1,
            })
        }
    }
}

fn run(cmd: Command) -> CmdResult {
    match cmd {
        Command::Sample { instance, scheme, salt, out } => cmd_sample(&instance, &scheme, salt, out),
        Command::Estimate { samples, scheme, function, estimator, u_variant, selection, out } => {
            cmd_estimate(&samples, &scheme, function, estimator, u_variant, &selection, out)
        }
        Command::Distinct { instances, query, scheme, salt, selection, trials, out } => {
            let q = resolve_query(instances, query, scheme, salt, selection)?;
            cmd_distinct(&q, trials, out)
        }
        Command::Maxdom { instances, query, scheme, salt, selection, trials, exact_variance, out } => {
            let q = resolve_query(instances, query, scheme, salt, selection)?;
            cmd_maxdom(&q, trials, exact_variance, out)
        }
        Command::Solve { problem, out } => cmd_solve(&problem, out),
        Command::Experiment(e) => cmd_experiment(e),
    }
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> CmdResult {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        None => std::io::stdout().write_all(bytes).map_err(Error::from)?,
    }
    Ok(())
}

fn config(command: &str, pairs: impl IntoIterator<Item = (&'static str, Value)>) -> BTreeMap<String, Value> {
    let mut m: BTreeMap<String, Value> = pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    m.insert("command".into(), json!(command));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m
}

fn bad(msg: impl Into<String>) -> Failure {
    Failure::Lib(Error::InvalidParameter(msg.into()))
}

/// The i-th of r per-instance values given as one shared value or r values.
fn per_instance(xs: &[f64], r: usize, name: &str) -> Result<Vec<f64>, Failure> {
    match xs.len() {
        1 => Ok(vec![xs[0]; r]),
        n if n == r => Ok(xs.to_vec()),
        0 => Err(bad(format!("--{name} is required for this scheme"))),
        n => Err(bad(format!("--{name} has {n} values for {r} instances"))),
    }
}

fn rank_family(r: RankArg) -> RankFamily {
    match r {
        RankArg::Exp => RankFamily::Exp,
        RankArg::Pps => RankFamily::Pps,
    }
}

fn scheme_json(s: &SchemeArgs) -> Value {
    json!({
        "scheme": format!("{:?}", s.scheme).to_lowercase(),
        "p": s.p,
        "tau": s.tau,
        "k": s.k,
        "rank": format!("{:?}", s.rank).to_lowercase(),
    })
}

/// Designs for r instances (bottom-k thresholds are filled in by sampling).
fn designs(s: &SchemeArgs, r: usize) -> Result<Vec<SampleDesign>, Failure> {
    match s.scheme {
        SchemeKind::Oblivious => Ok(per_instance(&s.p, r, "p")?.into_iter().map(|p| SampleDesign::Oblivious { p }).collect()),
        SchemeKind::Pps => Ok(per_instance(&s.tau, r, "tau")?.into_iter().map(|tau_star| SampleDesign::Pps { tau_star }).collect()),
        SchemeKind::Bottomk => {
            let k = s.k.ok_or_else(|| bad("--k is required for bottom-k"))?;
            Ok(vec![SampleDesign::BottomK { k, family: rank_family(s.rank), threshold: f64::INFINITY }; r])
        }
    }
}

fn sample_with(table: &InstanceTable, design: &SampleDesign, salt: u64) -> Result<KeyedSample, Error> {
    match *design {
        SampleDesign::Oblivious { p } => sample_instance_oblivious(table, None, p, salt),
        SampleDesign::Pps { tau_star } => sample_instance_pps(table, tau_star, salt),
        SampleDesign::BottomK { k, family, .. } => sample_bottomk(table, k, family, salt),
    }
}

fn cmd_sample(instance: &Path, scheme: &SchemeArgs, salt: u64, out: Option<PathBuf>) -> CmdResult {
    let table = read_instance_file(instance)?;
    let design = designs(scheme, 1)?.remove(0);
    let s = sample_with(&table, &design, salt)?;
    let mut buf = Vec::new();
    write_sample_jsonl(&mut buf, &s)?;
    emit(&out, &buf)
}

type PerKey = Box<dyn Fn(&Outcome) -> Result<f64, Error> + Sync>;

fn or_kind(e: Est) -> OrKind {
    match e {
        Est::Ht => OrKind::Ht,
        Est::L => OrKind::L,
        Est::U => OrKind::U,
    }
}

fn per_key_estimator(samples: &[KeyedSample], function: Func, est: Est, variant: UVariant) -> Result<PerKey, Failure> {
    let r = samples.len();
    let unsupported = |what: &str| Failure::Lib(Error::Unsupported(what.to_string()));
    match &samples[0].design {
        SampleDesign::Oblivious { .. } => {
            let p: Vec<f64> = samples.iter().map(|s| effective_probability(s, 1.0)).collect::<Result<_, _>>()?;
            Ok(match (function, est) {
                (Func::Max, Est::Ht) => Box::new(move |o| est_ht(&resolve_known_zeros(o, &p)?, &p, FunctionTag::Max)),
                (Func::Max, Est::L) => Box::new(move |o| est_max_l(&resolve_known_zeros(o, &p)?, &p)),
                (Func::Max, Est::U) if r == 2 => Box::new(move |o| est_max_u_r2(&resolve_known_zeros(o, &p)?, p[0], p[1], variant)),
                (Func::Max, Est::U) => return Err(unsupported("max^(U) is defined for two instances")),
                (Func::Or, e) => Box::new(move |o| est_or(&resolve_known_zeros(o, &p)?, &p, or_kind(e))),
            })
        }
        SampleDesign::Pps { .. } => {
            let tau: Vec<f64> = samples
                .iter()
                .map(|s| match s.design {
                    SampleDesign::Pps { tau_star } => Ok(tau_star),
                    _ => Err(bad("all samples must share one scheme")),
                })
                .collect::<Result<_, _>>()?;
            let p: Vec<f64> = tau.iter().map(|t| (1.0 / t).min(1.0)).collect();
            Ok(match (function, est) {
                (Func::Max, Est::Ht) => Box::new(move |o| est_max_ht_ws(o, &tau)),
                (Func::Max, Est::L) if r == 2 => Box::new(move |o| est_max_l_ws_r2(o, &tau)),
                (Func::Max, _) => return Err(unsupported("weighted max^(L) is defined for two instances; there is no weighted max^(U)")),
                (Func::Or, e) => Box::new(move |o| est_or_ws(o, &p, or_kind(e))),
            })
        }
        SampleDesign::BottomK { .. } => {
            // binary data: each instance's threshold gives a fixed inclusion probability
            let p: Vec<f64> = samples.iter().map(|s| effective_probability(s, 1.0)).collect::<Result<_, _>>()?;
            match function {
                Func::Or => Ok(Box::new(move |o| est_or_ws(o, &p, or_kind(est)))),
                Func::Max => Err(unsupported("bottom-k samples support the OR estimators only")),
            }
        }
    }
}

fn cmd_estimate(paths: &[PathBuf], scheme: &SchemeArgs, function: Func, est: Est, u: UArg, selection: &str, out: Option<PathBuf>) -> CmdResult {
    let selection = Selection::parse(selection)?;
    let designs = designs(scheme, paths.len())?;
    let samples: Vec<KeyedSample> = paths
        .iter()
        .zip(designs)
        .map(|(path, d)| {
            let f = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            read_sample_jsonl(std::io::BufReader::new(f), d, 0)
        })
        .collect::<Result<_, _>>()?;
    let variant = match u {
        UArg::Symmetric => UVariant::Symmetric,
        UArg::Asymmetric => UVariant::Asymmetric,
    };
    let estimator = per_key_estimator(&samples, function, est, variant)?;
    let keys: std::collections::BTreeSet<&str> =
        samples.iter().flat_map(|s| s.entries.keys()).map(String::as_str).filter(|k| selection.matches(k)).collect();

    let mut buf = Vec::new();
    let cfg = config(
        "estimate",
        [
            ("samples", json!(paths)),
            ("salts", json!(samples.iter().map(|s| s.salt).collect::<Vec<_>>())),
            ("sampling", scheme_json(scheme)),
            ("function", json!(format!("{function:?}").to_lowercase())),
            ("estimator", json!(format!("{est:?}").to_lowercase())),
            ("u_variant", json!(format!("{u:?}").to_lowercase())),
            ("selection", json!(selection.describe())),
        ],
    );
    write_config_header(&mut buf, &cfg)?;
    let mut wr = csv::Writer::from_writer(&mut buf);
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut header = vec!["key".to_string()];
    header.extend((1..=samples.len()).map(|i| format!("value_{i}")));
    header.push("estimate".into());
    wr.write_record(&header).map_err(io)?;
    for key in keys {
        let values: Vec<Option<f64>> = samples.iter().map(|s| s.value_of(key)).collect();
        let seeds = SeedVector::new(samples.iter().map(|s| s.seed_of(key)).collect())?;
        let x = estimator(&Outcome::new(values.clone(), Some(seeds))?)?;
        let mut row = vec![key.to_string()];
        row.extend(values.iter().map(|v| v.map_or(String::new(), |v| v.to_string())));
        row.push(x.to_string());
        wr.write_record(&row).map_err(io)?;
    }
    wr.flush().map_err(Error::from)?;
    drop(wr);
    emit(&out, &buf)
}

/// Two-instance aggregate query, from flags or a JSON query file.
struct Query {
    instances: [PathBuf; 2],
    scheme: SchemeArgs,
    salt: u64,
    selection: String,
    kinds: Vec<AggregateKind>,
}

fn resolve_query(instances: Vec<PathBuf>, query: Option<PathBuf>, scheme: SchemeArgs, salt: u64, selection: String) -> Result<Query, Failure> {
    let both = vec![AggregateKind::Ht, AggregateKind::L];
    let Some(path) = query else {
        let [a, b]: [PathBuf; 2] = instances.try_into().map_err(|_| bad("need two instance files (or --query)"))?;
        return Ok(Query { instances: [a, b], scheme, salt, selection, kinds: both });
    };
    if !instances.is_empty() {
        return Err(bad("give instance files either positionally or in --query, not both"));
    }
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let q = QuerySpec::parse(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };
    let [a, b]: [PathBuf; 2] = q.instances.iter().map(resolve).collect::<Vec<_>>().try_into().map_err(|_| bad("query must list two instances"))?;
    let scheme = match &q.scheme.scheme {
        Scheme::ObliviousPoisson { p } => SchemeArgs { scheme: SchemeKind::Oblivious, p: p.clone(), ..scheme },
        Scheme::WeightedPps { tau_star } => SchemeArgs { scheme: SchemeKind::Pps, tau: tau_star.clone(), ..scheme },
        Scheme::BottomK { k, family } => SchemeArgs {
            scheme: SchemeKind::Bottomk,
            k: Some(*k),
            rank: match family {
                RankFamily::Exp => RankArg::Exp,
                RankFamily::Pps => RankArg::Pps,
            },
            ..scheme
        },
    };
    let kinds = match q.estimator.to_ascii_lowercase().as_str() {
        "both" | "all" => both,
        other => vec![other.parse()?],
    };
    Ok(Query { instances: [a, b], scheme, salt: q.salt.unwrap_or(salt), selection: q.selection.unwrap_or(selection), kinds })
}

fn query_config(command: &str, q: &Query, trials: usize) -> BTreeMap<String, Value> {
    config(
        command,
        [
            ("instances", json!(q.instances)),
            ("sampling", scheme_json(&q.scheme)),
            ("salt", json!(q.salt)),
            ("selection", json!(q.selection)),
            ("trials", json!(trials)),
        ],
    )
}

#[derive(Serialize)]
struct DistinctRow {
    kind: String,
    estimate: f64,
    predicted_variance: Option<f64>,
    selection: String,
    #[serde(rename = "F_1?")]
    f_1u: usize,
    #[serde(rename = "F_?1")]
    f_u1: usize,
    #[serde(rename = "F_11")]
    f_11: usize,
    #[serde(rename = "F_10")]
    f_10: usize,
    #[serde(rename = "F_01")]
    f_01: usize,
    truth: f64,
    mc_trials: Option<usize>,
    mc_mean: Option<f64>,
    mc_variance: Option<f64>,
    mc_stderr: Option<f64>,
}

fn mc_fields(m: Option<&McStats>) -> (Option<usize>, Option<f64>, Option<f64>, Option<f64>) {
    (m.map(|m| m.trials), m.map(|m| m.mean), m.map(|m| m.variance), m.map(|m| m.stderr))
}

fn load_pair(q: &Query) -> Result<(InstanceTable, InstanceTable), Failure> {
    Ok((read_instance_file(&q.instances[0])?, read_instance_file(&q.instances[1])?))
}

fn cmd_distinct(q: &Query, trials: usize, out: Option<PathBuf>) -> CmdResult {
    let selection = Selection::parse(&q.selection)?;
    let (a, b) = load_pair(q)?;
    let designs = designs(&q.scheme, 2)?;
    let salts = instance_salts(q.salt, 2, Coordination::Independent);
    let s1 = sample_with(&a, &designs[0], salts[0])?;
    let s2 = sample_with(&b, &designs[1], salts[1])?;
    let mc = if trials > 0 {
        let design = match (designs[0].clone(), designs[1].clone()) {
            (SampleDesign::Oblivious { p }, SampleDesign::Oblivious { p: p2 }) if p == p2 => DistinctDesign::Poisson { p },
            (SampleDesign::Pps { tau_star }, SampleDesign::Pps { tau_star: t2 }) if tau_star == t2 => DistinctDesign::Pps { tau_star },
            (SampleDesign::BottomK { k, family, .. }, _) => DistinctDesign::BottomK { k, family },
            _ => return Err(bad("Monte Carlo repetitions need the same parameter for both instances")),
        };
        Some(experiments::distinct_mc(&a, &b, design, &selection, trials, q.salt)?)
    } else {
        None
    };
    let truth = a.positive_keys().chain(b.positive_keys()).filter(|k| selection.matches(k)).collect::<std::collections::BTreeSet<_>>().len() as f64;
    let mut rows = Vec::new();
    for &kind in &q.kinds {
        let r = est_distinct_samples(&s1, &s2, &selection, kind)?;
        let count = |c: KeyCategory| r.key_counts[c.label()];
        let stats = mc.as_ref().map(|m| if kind == AggregateKind::Ht { &m.ht } else { &m.l });
        let (mc_trials, mc_mean, mc_variance, mc_stderr) = mc_fields(stats);
        rows.push(DistinctRow {
            kind: kind.to_string(),
            estimate: r.estimate,
            predicted_variance: r.predicted_variance,
            selection: r.selection,
            f_1u: count(KeyCategory::OneUnknown),
            f_u1: count(KeyCategory::UnknownOne),
            f_11: count(KeyCategory::OneOne),
            f_10: count(KeyCategory::OneZero),
            f_01: count(KeyCategory::ZeroOne),
            truth,
            mc_trials,
            mc_mean,
            mc_variance,
            mc_stderr,
        });
    }
    let mut buf = Vec::new();
    experiments::write_rows(&mut buf, &query_config("distinct", q, trials), &rows)?;
    emit(&out, &buf)
}

#[derive(Serialize)]
struct MaxdomRow {
    kind: String,
    estimate: f64,
    predicted_variance: Option<f64>,
    exact_variance: Option<f64>,
    selection: String,
    sampled_1: usize,
    sampled_2: usize,
    truth: f64,
    mc_trials: Option<usize>,
    mc_mean: Option<f64>,
    mc_variance: Option<f64>,
    mc_stderr: Option<f64>,
}

fn cmd_maxdom(q: &Query, trials: usize, exact: bool, out: Option<PathBuf>) -> CmdResult {
    if q.scheme.scheme != SchemeKind::Pps {
        return Err(bad("max dominance needs --scheme pps"));
    }
    let selection = Selection::parse(&q.selection)?;
    let (a, b) = load_pair(q)?;
    let tau = per_instance(&q.scheme.tau, 2, "tau")?;
    let tau = [tau[0], tau[1]];
    let salts = instance_salts(q.salt, 2, Coordination::Independent);
    let s1 = sample_instance_pps(&a, tau[0], salts[0])?;
    let s2 = sample_instance_pps(&b, tau[1], salts[1])?;
    let mc = if trials > 0 { Some(experiments::maxdom_trials(&a, &b, tau, &selection, trials, q.salt)?) } else { None };
    let keys: std::collections::BTreeSet<&str> = a.iter().chain(b.iter()).map(|(k, _)| k).filter(|k| selection.matches(k)).collect();
    let truth: f64 = dispersed::sum::csum(keys.iter().map(|k| a.get(k).max(b.get(k))));
    let mut rows = Vec::new();
    for &kind in &q.kinds {
        let r = est_max_dominance(&s1, &s2, &selection, kind)?;
        let exact_variance = if exact { Some(max_dominance_variance(&a, &b, tau, &selection, kind)?) } else { None };
        let stats = mc.as_ref().map(|(ht, l)| if kind == AggregateKind::Ht { ht } else { l });
        let (mc_trials, mc_mean, mc_variance, mc_stderr) = mc_fields(stats);
        rows.push(MaxdomRow {
            kind: kind.to_string(),
            estimate: r.estimate,
            predicted_variance: r.predicted_variance,
            exact_variance,
            selection: r.selection,
            sampled_1: r.key_counts["sampled_1"],
            sampled_2: r.key_counts["sampled_2"],
            truth,
            mc_trials,
            mc_mean,
            mc_variance,
            mc_stderr,
        });
    }
    let mut buf = Vec::new();
    experiments::write_rows(&mut buf, &query_config("maxdom", q, trials), &rows)?;
    emit(&out, &buf)
}

fn cmd_solve(path: &Path, out: Option<PathBuf>) -> CmdResult {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let problem = ProblemFile::parse(&text)?;
    let table = problem.solve()?;
    let status = match &table.status {
        TableStatus::Ok => "ok".to_string(),
        TableStatus::Failure { vector } => format!("failure at {vector:?}"),
        TableStatus::NegativityViolated { vector, class, value } => format!("negativity violated: {class} = {value} (set by {vector:?})"),
    };
    let cfg = config(
        "solve",
        [
            ("problem", json!(path)),
            ("method", json!(problem.method)),
            ("symmetric", json!(problem.symmetric)),
            ("order", json!(problem.order)),
            ("status", json!(status)),
        ],
    );
    let mut buf = Vec::new();
    write_config_header(&mut buf, &cfg)?;
    table.write_csv(&mut buf)?;
    emit(&out, &buf)?;
    match table.status {
        TableStatus::Ok => Ok(()),
        _ => Err(Failure::Solver(status)),
    }
}

fn or_default(xs: Vec<f64>, default: Vec<f64>) -> Vec<f64> {
    if xs.is_empty() {
        default
    } else {
        xs
    }
}

fn cmd_experiment(e: Experiment) -> CmdResult {
    let mut buf = Vec::new();
    let out = match e {
        Experiment::Fig1 { points, out } => {
            let grid = experiments::linspace(0.0, 1.0, points);
            let cfg = config("experiment fig1", [("p", json!([0.5, 0.5])), ("ratios", json!(grid)), ("salt", Value::Null)]);
            experiments::write_rows(&mut buf, &cfg, &experiments::fig1(&grid)?)?;
            out
        }
        Experiment::Fig2 { p, out } => {
            let ps = or_default(p, (1..=19).map(|i| i as f64 * 0.05).collect());
            let cfg = config("experiment fig2", [("p", json!(ps)), ("salt", Value::Null)]);
            experiments::write_rows(&mut buf, &cfg, &experiments::fig2(&ps)?)?;
            out
        }
        Experiment::Fig4 { rho, ratio, out } => {
            let rho = or_default(rho, (1..=9).map(|i| i as f64 / 10.0).collect());
            let ratio = or_default(ratio, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
            let cfg = config("experiment fig4", [("tau", json!([1.0, 1.0])), ("rho", json!(rho)), ("ratio", json!(ratio)), ("salt", Value::Null)]);
            experiments::write_rows(&mut buf, &cfg, &experiments::fig4(&rho, &ratio)?)?;
            out
        }
        Experiment::Fig6 { n, j, cv, out } => {
            let ns = or_default(n, (2..=8).map(|e| 10f64.powi(e)).collect());
            let cfg = config("experiment fig6", [("n", json!(ns)), ("j", json!(j)), ("cv", json!(cv)), ("salt", Value::Null)]);
            experiments::write_rows(&mut buf, &cfg, &experiments::fig6(&ns, j, cv)?)?;
            out
        }
        Experiment::SynthDistinct { n, j, scheme, trials, salt, out } => {
            if !(0.0..=1.0).contains(&j) {
                return Err(bad("j must lie in [0,1]"));
            }
            // |A ∩ B| / (2n − |A ∩ B|) = J
            let inter = (2.0 * n as f64 * j / (1.0 + j)).round() as usize;
            let (a, b) = experiments::synthetic_sets(n, inter)?;
            let design = match scheme.scheme {
                SchemeKind::Oblivious => DistinctDesign::Poisson { p: *scheme.p.first().unwrap_or(&0.1) },
                SchemeKind::Pps => DistinctDesign::Pps { tau_star: *scheme.tau.first().ok_or_else(|| bad("--tau is required"))? },
                SchemeKind::Bottomk => DistinctDesign::BottomK { k: scheme.k.ok_or_else(|| bad("--k is required"))?, family: rank_family(scheme.rank) },
            };
            let r = experiments::distinct_mc(&a, &b, design, &Selection::All, trials, salt)?;
            #[derive(Serialize)]
            struct Row {
                kind: &'static str,
                truth: f64,
                jaccard: f64,
                mc_mean: f64,
                mc_variance: f64,
                mc_stderr: f64,
                predicted_variance: Option<f64>,
            }
            let rows = [("HT", &r.ht, r.predicted_ht), ("L", &r.l, r.predicted_l)].map(|(kind, m, pred)| Row {
                kind,
                truth: r.truth,
                jaccard: r.jaccard,
                mc_mean: m.mean,
                mc_variance: m.variance,
                mc_stderr: m.stderr,
                predicted_variance: pred,
            });
            let cfg = config(
                "experiment synth-distinct",
                [("n", json!(n)), ("intersection", json!(inter)), ("design", json!(design)), ("trials", json!(trials)), ("salt", json!(salt))],
            );
            experiments::write_rows(&mut buf, &cfg, &rows)?;
            out
        }
        Experiment::SynthMaxdom { n, rates, trials, salt, gen_salt, out } => {
            let rates = or_default(rates, vec![0.01, 0.02, 0.05, 0.1, 0.2]);
            let (a, b) = experiments::synthetic_weighted_pair(n, gen_salt)?;
            let rows = experiments::maxdom_mc(&a, &b, &rates, trials, salt)?;
            let cfg = config(
                "experiment synth-maxdom",
                [("n", json!(n)), ("rates", json!(rates)), ("trials", json!(trials)), ("salt", json!(salt)), ("gen_salt", json!(gen_salt))],
            );
            experiments::write_rows(&mut buf, &cfg, &rows)?;
            out
        }
    };
    emit(&out, &buf)
}
