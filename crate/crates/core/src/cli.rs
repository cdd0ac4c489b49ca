//! The `gppl` command line. Every command prints one JSON document on
//! stdout; diagnostics go to stderr. Exit status is 0 on success, 1 when a
//! check fails, 2 on usage, parse or type errors.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use crate::exact::{check_law, eval_exact, FiniteModel, Law, LawInstance, ModelJson, Verdict};
use crate::graphon::{check_all, check_consistent, check_exchangeable, check_local, disjoint_pairs, p_w_n, Graphon, PropertyCheck, RandomGraphModel};
use crate::lang::{load_program, Term};
use crate::rado::{edge_corpus, er_cross_check, fubini_check, phi_corpus, CorpusItem, DefinableSet2, SupportGraph};
use crate::rational::{format_rational, parse_rational, to_f64, Rational};
use crate::sampler::{empirical_rgm, estimate, GraphImpl};
use crate::symbolic::{induced_rgm, normalize, outcome_distribution};
use crate::termgen::TermGen;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Standard errors allowed between a Monte Carlo estimate and an exact value.
const Z_BOUND: f64 = 4.0;

#[derive(Debug, Parser)]
#[command(name = "gppl", version, about = "Probabilistic programs over random graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Exact,
    Symbolic,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Exchangeable,
    Consistent,
    Local,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Corpus {
    /// The edge relation `E(x, y)`.
    Edge,
    /// Two-vertex extensions over supports of size at most one, plus the
    /// degenerate sets.
    Phi,
    /// The full pair space.
    Full,
}

#[derive(Debug, clap::Args)]
pub struct ProgramArgs {
    /// Path of a program file.
    #[arg(long, conflicts_with = "expr")]
    pub program: Option<PathBuf>,
    /// Program text given inline.
    #[arg(long)]
    pub expr: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Outcome distribution of a closed program.
    Eval {
        #[command(flatten)]
        program: ProgramArgs,
        /// Graphon spec (JSON file) for the symbolic and Monte Carlo backends.
        #[arg(long)]
        graphon: Option<PathBuf>,
        /// Implementation spec (JSON file): a finite model for the exact
        /// backend, or any sampler implementation for Monte Carlo.
        #[arg(long = "impl")]
        implementation: Option<PathBuf>,
        #[arg(long, value_enum)]
        backend: Option<Backend>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include the symbolic normal form in the report.
        #[arg(long)]
        dump_normal_form: bool,
    },
    /// The random graph model induced by a graphon, with optional checks.
    Rgm {
        #[arg(long)]
        graphon: PathBuf,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, value_enum)]
        check: Option<CheckKind>,
        /// `symbolic` runs the matrix programs; `exact` enumerates graphs
        /// directly from the graphon; `mc` samples.
        #[arg(long, value_enum, default_value = "symbolic")]
        backend: Backend,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random instances of the program equations and the graph axioms,
    /// checked exactly on a finite model.
    CheckLaws {
        /// Finite model JSON; defaults to the two-cluster model.
        #[arg(long = "impl")]
        implementation: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instances per program equation.
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Restrict to one law (e.g. `let-comm`, `self-loop`).
        #[arg(long)]
        law: Option<String>,
    },
    /// Both iterated integrals of definable sets of pairs.
    Fubini {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        #[arg(long, value_enum, default_value = "edge")]
        corpus: Corpus,
    },
    /// Monte Carlo frequencies of a program's outcomes.
    Sample {
        #[command(flatten)]
        program: ProgramArgs,
        #[arg(long = "impl")]
        implementation: Option<PathBuf>,
        #[arg(long)]
        graphon: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compares the symbolic value of a program with a Monte Carlo estimate.
    CrossCheck {
        #[command(flatten)]
        program: ProgramArgs,
        #[arg(long)]
        graphon: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Edge-query matrices integrated against the Rado measure, compared
    /// with the Erdős–Rényi graphon.
    RadoEr {
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Prints a random well-typed closed boolean program.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        budget: usize,
    },
}

/// A failure that maps to an exit status.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
    }
}

type Outcome = Result<(i32, Json), Failure>;

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load(program: &ProgramArgs) -> Result<Term, Failure> {
    let src = match (&program.program, &program.expr) {
        (Some(path), _) => read(path)?,
        (None, Some(text)) => text.clone(),
        (None, None) => return Err(usage("give --program <path> or --expr <text>")),
    };
    Ok(load_program(&src).map_err(usage)?.0)
}

fn load_graphon(path: &PathBuf) -> Result<Graphon, Failure> {
    Graphon::parse_json(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_impl(path: &PathBuf) -> Result<GraphImpl, Failure> {
    GraphImpl::parse_json(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_model(path: &PathBuf) -> Result<FiniteModel, Failure> {
    let text = read(path)?;
    let json: ModelJson = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    FiniteModel::from_json(&json).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn rational_arg(name: &str, text: &str) -> Result<Rational, Failure> {
    let r = parse_rational(text).map_err(|e| usage(format!("--{name}: {e}")))?;
    if !crate::rational::is_probability(&r) {
        return Err(usage(format!("--{name} must lie in [0, 1]")));
    }
    Ok(r)
}

fn dist_json<T: Ord + Clone + std::fmt::Display>(d: &crate::exact::FinDist<T>) -> Json {
    serde_json::to_value(d.to_json().outcomes).expect("serializable")
}

fn eval_cmd(cmd: &Command) -> Outcome {
    let Command::Eval {
        program,
        graphon,
        implementation,
        backend,
        trials,
        seed,
        dump_normal_form,
    } = cmd
    else {
        unreachable!()
    };
    let t = load(program)?;
    let backend = match (backend, graphon, implementation) {
        (Some(b), ..) => *b,
        (None, Some(_), _) => Backend::Symbolic,
        (None, None, Some(_)) => Backend::Exact,
        (None, None, None) => return Err(usage("give --graphon or --impl")),
    };
    match backend {
        Backend::Exact => {
            let path = implementation.as_ref().ok_or_else(|| usage("the exact backend needs --impl <finite model>"))?;
            let model = load_model(path)?;
            let d = eval_exact(&model, &t).map_err(usage)?;
            Ok((EXIT_OK, json!({ "dist": dist_json(&d) })))
        }
        Backend::Symbolic => {
            let path = graphon.as_ref().ok_or_else(|| usage("the symbolic backend needs --graphon"))?;
            let w = load_graphon(path)?;
            let nf = normalize(&t).map_err(usage)?;
            let d = outcome_distribution(&nf, &w).map_err(usage)?;
            let mut out = json!({ "dist": dist_json(&d) });
            if *dump_normal_form {
                out["normal_form"] = serde_json::to_value(nf.to_json()).expect("serializable");
            }
            Ok((EXIT_OK, out))
        }
        Backend::Mc => {
            let imp = match (implementation, graphon) {
                (Some(p), _) => load_impl(p)?,
                (None, Some(g)) => GraphImpl::from_graphon(&load_graphon(g)?),
                (None, None) => unreachable!("checked above"),
            };
            let est = estimate(&t, &imp, *trials, *seed).map_err(usage)?;
            let j = est.to_json();
            Ok((EXIT_OK, json!({ "dist": j.outcomes, "trials": j.trials })))
        }
    }
}

fn checks_for(rgm: &RandomGraphModel, kind: CheckKind) -> Result<Vec<PropertyCheck>, Failure> {
    let n = rgm.len();
    let mut out = Vec::new();
    match kind {
        CheckKind::All => out = check_all(rgm).map_err(usage)?,
        CheckKind::Exchangeable => {
            for k in 1..=n {
                out.push(check_exchangeable(rgm.p(k), k).map_err(usage)?);
            }
        }
        CheckKind::Consistent => {
            for k in 2..=n {
                out.push(check_consistent(rgm.p(k), rgm.p(k - 1)).map_err(usage)?);
            }
        }
        CheckKind::Local => {
            for k in 1..=n {
                for (a, b) in disjoint_pairs(k) {
                    out.push(check_local(rgm.p(k), k, &a, &b).map_err(usage)?);
                }
            }
        }
    }
    Ok(out)
}

fn rgm_cmd(cmd: &Command) -> Outcome {
    let Command::Rgm {
        graphon,
        n,
        check,
        backend,
        trials,
        seed,
    } = cmd
    else {
        unreachable!()
    };
    let w = load_graphon(graphon)?;
    if *n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    if *backend == Backend::Mc {
        if check.is_some() {
            return Err(usage("exact checks need the symbolic or exact backend"));
        }
        let est = empirical_rgm(&GraphImpl::from_graphon(&w), *n, *trials, *seed).map_err(usage)?;
        return Ok((EXIT_OK, json!({ "n": n, "empirical": est.to_json() })));
    }
    let rgm = match backend {
        Backend::Symbolic => induced_rgm(&w, *n).map_err(usage)?,
        _ => RandomGraphModel::new((1..=*n).map(|k| p_w_n(&w, k)).collect::<Result<_, _>>().map_err(usage)?)
            .map_err(usage)?,
    };
    let levels: Vec<Json> = (1..=*n).map(|k| json!({ "n": k, "dist": dist_json(rgm.p(k)) })).collect();
    let mut out = json!({ "levels": levels });
    let mut code = EXIT_OK;
    if let Some(kind) = check {
        let checks = checks_for(&rgm, *kind)?;
        let pass = checks.iter().all(|c| c.pass);
        if !pass {
            code = EXIT_FAIL;
        }
        out["checks"] = serde_json::to_value(&checks).expect("serializable");
        out["verdict"] = json!(if pass { "PASS" } else { "FAIL" });
    }
    Ok((code, out))
}

fn check_laws_cmd(cmd: &Command) -> Outcome {
    let Command::CheckLaws {
        implementation,
        seed,
        count,
        law,
    } = cmd
    else {
        unreachable!()
    };
    let model = match implementation {
        Some(p) => load_model(p)?,
        None => FiniteModel::two_cluster(),
    };
    let laws: Vec<Law> = match law {
        Some(name) => vec![Law::from_name(name).ok_or_else(|| usage(format!("unknown law `{name}`")))?],
        None => Law::ALL.to_vec(),
    };
    let mut gen = TermGen::new(*seed);
    let mut reports = Vec::new();
    let mut all_ok = true;
    for law in laws {
        let instances: Vec<LawInstance> = if Law::PROGRAM_EQUATIONS.contains(&law) {
            gen.law_instances(law, *count)
        } else {
            vec![law.axiom_instance().expect("axiom")]
        };
        let report = check_law(&model, law, &instances).map_err(usage)?;
        all_ok &= report.ok();
        let mut entry = json!({
            "law": law.name(),
            "passed": report.passed,
            "failed": report.failed,
            "skipped": report.skipped,
        });
        if let Some(Verdict::Fail { .. }) = report.first_failure() {
            entry["first_failure"] = serde_json::to_value(report.first_failure()).expect("serializable");
        }
        reports.push(entry);
    }
    let verdict = if all_ok { "PASS" } else { "FAIL" };
    Ok((if all_ok { EXIT_OK } else { EXIT_FAIL }, json!({ "laws": reports, "verdict": verdict })))
}

fn fubini_cmd(alpha: &str, beta: &str, corpus: Corpus) -> Outcome {
    let (a, b) = (rational_arg("alpha", alpha)?, rational_arg("beta", beta)?);
    let items: Vec<CorpusItem> = match corpus {
        Corpus::Edge => edge_corpus(),
        Corpus::Phi => phi_corpus(&a),
        Corpus::Full => vec![CorpusItem {
            name: "V^2".into(),
            set: DefinableSet2::full(SupportGraph::empty()),
            expected: Some(Rational::from_integer(1.into())),
        }],
    };
    let results = fubini_check(&a, &b, &items);
    let out = if results.len() == 1 {
        let r = &results[0];
        json!({ "xy": format_rational(&r.xy), "yx": format_rational(&r.yx), "equal": r.equal })
    } else {
        json!({
            "items": serde_json::to_value(&results).expect("serializable"),
            "all_equal": results.iter().all(|r| r.equal),
        })
    };
    Ok((EXIT_OK, out))
}

fn sample_cmd(program: &ProgramArgs, implementation: &Option<PathBuf>, graphon: &Option<PathBuf>, trials: u64, seed: u64) -> Outcome {
    let t = load(program)?;
    let imp = match (implementation, graphon) {
        (Some(p), _) => load_impl(p)?,
        (None, Some(g)) => GraphImpl::from_graphon(&load_graphon(g)?),
        (None, None) => return Err(usage("give --impl or --graphon")),
    };
    let est = estimate(&t, &imp, trials, seed).map_err(usage)?;
    Ok((EXIT_OK, serde_json::to_value(est.to_json()).expect("serializable")))
}

fn cross_check_cmd(program: &ProgramArgs, graphon: &PathBuf, trials: u64, seed: u64) -> Outcome {
    let t = load(program)?;
    let w = load_graphon(graphon)?;
    let imp = GraphImpl::from_graphon(&w);
    let est = estimate(&t, &imp, trials, seed).map_err(usage)?;
    let exact = normalize(&t)
        .map_err(usage)
        .and_then(|nf| outcome_distribution(&nf, &w).map_err(usage));
    let exact = match exact {
        Ok(d) => d,
        Err(_) if matches!(w, Graphon::Predicate(_)) => {
            return Err(usage("no exact value for the sphere graphon; use `sample`"));
        }
        Err(e) => return Err(e),
    };
    let mut pass = true;
    let mut rows = Vec::new();
    let values: std::collections::BTreeSet<_> = exact.support().chain(est.counts.keys()).cloned().collect();
    for v in values {
        let p = exact.prob(&v);
        let z = est.z_score(&v, to_f64(&p));
        pass &= z <= Z_BOUND;
        rows.push(json!({
            "value": v.to_string(),
            "exact": format_rational(&p),
            "estimate": est.frequency(&v),
            "se": est.standard_error(&v),
            "z": if z.is_finite() { json!(z) } else { json!("inf") },
        }));
    }
    let out = json!({ "trials": trials, "outcomes": rows, "verdict": if pass { "PASS" } else { "FAIL" } });
    Ok((if pass { EXIT_OK } else { EXIT_FAIL }, out))
}

fn rado_er_cmd(alpha: &str, n: usize) -> Outcome {
    let a = rational_arg("alpha", alpha)?;
    let c = er_cross_check(&a, n).map_err(usage)?;
    let out = json!({
        "n": n,
        "integrated": dist_json(&c.integrated),
        "graphon": dist_json(&c.graphon),
        "equal": c.equal,
    });
    Ok((if c.equal { EXIT_OK } else { EXIT_FAIL }, out))
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        cmd @ Command::Eval { .. } => eval_cmd(cmd),
        cmd @ Command::Rgm { .. } => rgm_cmd(cmd),
        cmd @ Command::CheckLaws { .. } => check_laws_cmd(cmd),
        Command::Fubini { alpha, beta, corpus } => fubini_cmd(alpha, beta, *corpus),
        Command::Sample {
            program,
            implementation,
            graphon,
            trials,
            seed,
        } => sample_cmd(program, implementation, graphon, *trials, *seed),
        Command::CrossCheck {
            program,
            graphon,
            trials,
            seed,
        } => cross_check_cmd(program, graphon, *trials, *seed),
        Command::RadoEr { alpha, n } => rado_er_cmd(alpha, *n),
        Command::Generate { seed, budget } => {
            if *budget == 0 {
                return Err(usage("--budget must be at least 1"));
            }
            let t = TermGen::new(*seed).with_depth(*budget).gen_program(&crate::lang::Type::bool());
            Ok((EXIT_OK, json!({ "program": t.to_string() })))
        }
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the exit status with the JSON text destined for stdout.
pub fn run<I, S>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return (EXIT_OK, e.to_string());
            }
            eprintln!("{e}");
            let first = e.to_string().lines().next().unwrap_or_default().to_string();
            return (EXIT_USAGE, json!({ "error": first }).to_string());
        }
    };
    match dispatch(&cli) {
        Ok((code, out)) => (code, out.to_string()),
        Err(f) => {
            eprintln!("error: {}", f.message);
            (f.code, json!({ "error": f.message }).to_string())
        }
    }
}
