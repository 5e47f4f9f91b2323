//! The `maxleak` command-line front end.
//!
//! Exit codes: 0 on success, 1 when a verification check fails, 2 on bad
//! input (usage errors, unreadable or invalid files).

use std::cmp::Ordering;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::channel::{leakage_upper_bound, maximal_leakage};
use crate::design::{design, verify_optimality_certificate};
use crate::error::Error;
use crate::majorization::OrderVerdict;
use crate::ordering::{compare_dmax, d_max};
use crate::robust::{d_min_robust, find_least_informative, uniform_budget_upper_bound};
use crate::types::{LeakageBudget, Mechanism, Prior, PriorSet};
use crate::verify::run_suites;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Tolerance for the published values checked by `reproduce`.
const REPRODUCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

/// A leakage budget as typed by the user: nats, or `log:<x>` for `log x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaSpec {
    Nats(f64),
    LogOf(f64),
}

impl GammaSpec {
    pub fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        let spec = if let Some(x) = text.strip_prefix("log:") {
            let x: f64 = x
                .trim()
                .parse()
                .map_err(|_| format!("invalid log argument {x:?}"))?;
            if x.is_nan() || x < 1.0 {
                return Err(format!("log:{x} gives a negative gamma"));
            }
            GammaSpec::LogOf(x)
        } else {
            let g: f64 = text
                .parse()
                .map_err(|_| format!("invalid gamma {text:?}"))?;
            if g.is_nan() || g < 0.0 {
                return Err(format!("gamma must be >= 0, got {g}"));
            }
            GammaSpec::Nats(g)
        };
        Ok(spec)
    }

    pub fn budget(self, n: usize) -> crate::Result<LeakageBudget> {
        match self {
            GammaSpec::Nats(g) => LeakageBudget::new(g, n),
            GammaSpec::LogOf(x) => LeakageBudget::from_exp(x, n),
        }
    }
}

/// Parsed command line.
#[derive(Debug, Parser)]
#[command(
    name = "maxleak",
    version,
    about = "Design and audit privacy mechanisms under a maximal-leakage budget"
)]
pub struct RunConfig {
    /// Output format
    #[arg(long, value_enum, default_value = "table", global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximal leakage of a mechanism file
    Leakage { mechanism: PathBuf },
    /// Optimal mechanism for a known prior
    Design {
        /// Budget in nats, or log:<x> for log x
        #[arg(long, value_parser = GammaSpec::parse)]
        gamma: GammaSpec,
        prior: PathBuf,
        /// Where to write the mechanism JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst-case design over a set of priors
    Robust {
        #[arg(long, value_parser = GammaSpec::parse)]
        gamma: GammaSpec,
        set: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst-case distortion over all priors, optionally comparing two mechanisms
    Dmax {
        mechanism: PathBuf,
        other: Option<PathBuf>,
    },
    /// Run the randomized oracle and property suites
    Verify {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long = "nmax", default_value_t = 6)]
        n_max: usize,
    },
    /// Recompute the published worked examples from fixture files
    Reproduce {
        /// Directory holding the fixture files
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
}

/// Ordered key/value report rendered as a table or a JSON object.
struct Report {
    fields: Vec<(String, Value)>,
}

impl Report {
    fn new() -> Self {
        Report { fields: Vec::new() }
    }

    fn add(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let map: Map<String, Value> = self.fields.iter().cloned().collect();
                Value::Object(map).to_string()
            }
            Format::Table => {
                let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                self.fields
                    .iter()
                    .map(|(k, v)| format!("{k:<width$}  {}", display(v)))
                    .collect::<Vec<_>>()
                    .join("\n")
            }
        }
    }
}

fn display(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format!("{:.6}", n.as_f64().unwrap()),
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let inner: Vec<String> = items.iter().map(display).collect();
            format!("[{}]", inner.join(", "))
        }
        other => other.to_string(),
    }
}

/// Failure of a subcommand, mapped onto an exit code.
enum Failure {
    Input(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: crate::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_mechanism(path: &Path) -> Result<Mechanism, Failure> {
    with_path(path, Mechanism::from_json(&read_file(path)?))
}

fn load_prior(path: &Path) -> Result<Prior, Failure> {
    with_path(path, Prior::from_json(&read_file(path)?))
}

fn load_set(path: &Path) -> Result<PriorSet, Failure> {
    with_path(path, PriorSet::from_json(&read_file(path)?))
}

fn write_mechanism(path: &Path, p: &Mechanism) -> Result<(), Failure> {
    fs::write(path, p.to_json() + "\n")
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn budget_fields(report: &mut Report, b: &LeakageBudget) {
    report
        .add("gamma", b.gamma())
        .add("exp_gamma", b.exp_gamma())
        .add("k", b.k() as u64);
}

fn cmd_leakage(path: &Path) -> Result<Report, Failure> {
    let p = load_mechanism(path)?;
    let gamma = maximal_leakage(&p);
    let mut r = Report::new();
    r.add("gamma", gamma)
        .add("exp_gamma", gamma.exp())
        .add("bound", leakage_upper_bound(&p))
        .add("rows", p.n_rows() as u64)
        .add("cols", p.n_cols() as u64);
    Ok(r)
}

fn cmd_design(gamma: GammaSpec, prior: &Path, out: Option<&Path>) -> Result<Report, Failure> {
    let pi = load_prior(prior)?;
    let b = gamma.budget(pi.len())?;
    let res = design(&b, &pi)?;
    if let Some(out) = out {
        write_mechanism(out, &res.mechanism)?;
    }
    let mut r = Report::new();
    r.add("d_min", res.d_min);
    budget_fields(&mut r, &b);
    r.add("leakage", res.achieved_leakage);
    if let Some(out) = out {
        r.add("mechanism_file", out.display().to_string());
    }
    Ok(r)
}

fn cmd_robust(gamma: GammaSpec, set: &Path, out: Option<&Path>) -> Result<Report, Failure> {
    let s = load_set(set)?;
    let b = gamma.budget(s.n())?;
    let res = d_min_robust(&b, &s)?;
    if let Some(out) = out {
        write_mechanism(out, &res.mechanism)?;
    }
    let mut r = Report::new();
    r.add("d_min", res.d_min)
        .add("worst_prior", res.worst_prior.probs().to_vec())
        .add("path", res.path_used.as_str());
    budget_fields(&mut r, &b);
    r.add("upper_bound", uniform_budget_upper_bound(&b));
    if let Some(out) = out {
        r.add("mechanism_file", out.display().to_string());
    }
    Ok(r)
}

fn certificate_text(v: OrderVerdict) -> &'static str {
    match v {
        OrderVerdict::Precedes => "Q ≼ P",
        OrderVerdict::Succeeds => "P ≼ Q",
        OrderVerdict::Equal => "equal",
        OrderVerdict::Incomparable => "incomparable",
    }
}

fn cmd_dmax(first: &Path, second: Option<&Path>) -> Result<Report, Failure> {
    let p = load_mechanism(first)?;
    let dp = with_path(first, d_max(&p))?;
    let mut r = Report::new();
    let Some(second) = second else {
        r.add("d_max", dp.value).add("attained", dp.attained);
        return Ok(r);
    };
    let q = load_mechanism(second)?;
    with_path(second, d_max(&q))?;
    let c = compare_dmax(&p, &q)?;
    let direct = match c.direct {
        Ordering::Less => "D_max(Q) < D_max(P)",
        Ordering::Equal => "D_max(Q) = D_max(P)",
        Ordering::Greater => "D_max(Q) > D_max(P)",
    };
    r.add("d_max_p", c.d_max_p)
        .add("d_max_q", c.d_max_q)
        .add("attained", false)
        .add("certificate", certificate_text(c.certificate))
        .add("direct", direct)
        .add("consistent", c.is_consistent());
    if !c.is_consistent() {
        return Err(Failure::Verification(r.render(Format::Table)));
    }
    Ok(r)
}

fn cmd_verify(
    seed: u64,
    trials: usize,
    n_max: usize,
    format: Format,
) -> Result<(String, bool), Failure> {
    if trials == 0 {
        return Err(Failure::Input("--trials must be at least 1".into()));
    }
    if n_max < 2 {
        return Err(Failure::Input("--nmax must be at least 2".into()));
    }
    let report =
        run_suites(seed, trials, n_max).map_err(|e| Failure::Verification(e.to_string()))?;
    let text = match format {
        Format::Json => {
            let suites: Vec<Value> = report
                .suites
                .iter()
                .map(|s| {
                    json!({
                        "name": s.name,
                        "cases": s.cases,
                        "exercised": s.exercised,
                        "max_discrepancy": s.max_discrepancy,
                        "tolerance": s.tolerance,
                        "violations": s.violations,
                        "passed": s.passed(),
                    })
                })
                .collect();
            json!({
                "seed": seed,
                "trials": trials,
                "nmax": n_max,
                "suites": suites,
                "max_discrepancy": report.max_discrepancy(),
                "passed": report.passed(),
            })
            .to_string()
        }
        Format::Table => {
            let mut lines = vec![format!("seed {seed}, trials {trials}, nmax {n_max}")];
            for s in &report.suites {
                lines.push(format!(
                    "{:<26} {} cases={} exercised={} max_discrepancy={:.3e} tol={:.0e} violations={}",
                    s.name,
                    if s.passed() { "PASS" } else { "FAIL" },
                    s.cases,
                    s.exercised,
                    s.max_discrepancy,
                    s.tolerance,
                    s.violations
                ));
            }
            lines.push(format!("max discrepancy {:.3e}", report.max_discrepancy()));
            lines.push(
                if report.passed() {
                    "all suites passed"
                } else {
                    "FAILED"
                }
                .to_string(),
            );
            lines.join("\n")
        }
    };
    Ok((text, report.passed()))
}

/// Fixture files read by `reproduce`.
pub const FIXTURE_FILES: [&str; 5] = [
    "example1_set.json",
    "example2_set.json",
    "example2_union.json",
    "example1_mechanism.json",
    "example2_mechanism.json",
];

pub fn default_fixture_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}

struct Check {
    label: &'static str,
    ok: bool,
    detail: String,
}

fn close_to(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= REPRODUCE_TOL)
}

fn value_check(
    label: &'static str,
    got: f64,
    want: f64,
    prior: &Prior,
    want_prior: &[f64],
) -> Check {
    let ok = (got - want).abs() <= REPRODUCE_TOL && close_to(prior.probs(), want_prior);
    let detail = if ok {
        format!("{want}")
    } else {
        format!(
            "computed {got} at {:?}, published {want} at {want_prior:?}",
            prior.probs()
        )
    };
    Check { label, ok, detail }
}

fn cmd_reproduce(dir: &Path) -> Result<(String, bool), Failure> {
    let missing: Vec<&str> = FIXTURE_FILES
        .iter()
        .copied()
        .filter(|f| !dir.join(f).is_file())
        .collect();
    if !missing.is_empty() {
        return Err(Failure::Input(format!(
            "missing fixtures in {}: {}",
            dir.display(),
            missing.join(", ")
        )));
    }
    let set1 = load_set(&dir.join(FIXTURE_FILES[0]))?;
    let set2 = load_set(&dir.join(FIXTURE_FILES[1]))?;
    let union = load_set(&dir.join(FIXTURE_FILES[2]))?;
    let mech1 = load_mechanism(&dir.join(FIXTURE_FILES[3]))?;
    let mech2 = load_mechanism(&dir.join(FIXTURE_FILES[4]))?;
    let b = LeakageBudget::from_exp(2.5, set1.n())?;

    let star1 = [0.2, 0.4, 0.2, 0.2];
    let star2 = [0.29, 0.28, 0.29, 0.14];
    let mut checks = Vec::new();

    let r1 = d_min_robust(&b, &set1)?;
    checks.push(value_check(
        "Example1",
        r1.d_min,
        0.3,
        &r1.worst_prior,
        &star1,
    ));

    let members = set2.candidate_priors();
    let least = find_least_informative(&members, &b.with_n(set2.n())?)?;
    let r2 = d_min_robust(&b.with_n(set2.n())?, &set2)?;
    let mut c = value_check("Example2-Pi2", r2.d_min, 0.28, &r2.worst_prior, &star2);
    if !least.as_ref().is_some_and(|p| close_to(p.probs(), &star2)) {
        c.ok = false;
        c.detail = format!("least-informative member is {least:?}");
    }
    checks.push(c);

    let ru = d_min_robust(&b.with_n(union.n())?, &union)?;
    checks.push(value_check(
        "Example2",
        ru.d_min,
        0.28,
        &ru.worst_prior,
        &star2,
    ));

    let mut cert_notes = Vec::new();
    for (name, mech, prior) in [("P1", &mech1, &star1[..]), ("P2", &mech2, &star2[..])] {
        let prior = Prior::new(prior.to_vec())?;
        let bp = b.with_n(mech.n_rows())?;
        let certified = verify_optimality_certificate(mech, &bp, &prior)?;
        let leak_ok = (maximal_leakage(mech) - 2.5f64.ln()).abs() <= REPRODUCE_TOL;
        if !certified {
            cert_notes.push(format!("{name} not certified"));
        }
        if !leak_ok {
            cert_notes.push(format!("{name} leakage {}", maximal_leakage(mech)));
        }
    }
    checks.push(Check {
        label: "certificates",
        ok: cert_notes.is_empty(),
        detail: cert_notes.join(", "),
    });

    let line = checks
        .iter()
        .map(|c| match (c.label, c.ok) {
            ("certificates", true) => "certificates OK".to_string(),
            ("certificates", false) => format!("certificates FAILED ({})", c.detail),
            (label, true) => format!("{label}: {} OK", c.detail),
            (label, false) => format!("{label}: FAILED ({})", c.detail),
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok((line, checks.iter().all(|c| c.ok)))
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_INPUT
                }
            };
        }
    };
    let format = cfg.format;
    let outcome: Result<(String, bool), Failure> = match &cfg.command {
        Command::Leakage { mechanism } => cmd_leakage(mechanism).map(|r| (r.render(format), true)),
        Command::Design { gamma, prior, out } => {
            cmd_design(*gamma, prior, out.as_deref()).map(|r| (r.render(format), true))
        }
        Command::Robust { gamma, set, out } => {
            cmd_robust(*gamma, set, out.as_deref()).map(|r| (r.render(format), true))
        }
        Command::Dmax { mechanism, other } => {
            cmd_dmax(mechanism, other.as_deref()).map(|r| (r.render(format), true))
        }
        Command::Verify {
            seed,
            trials,
            n_max,
        } => cmd_verify(*seed, *trials, *n_max, format),
        Command::Reproduce { fixtures } => {
            let dir = fixtures.clone().unwrap_or_else(default_fixture_dir);
            cmd_reproduce(&dir)
        }
    };
    match outcome {
        Ok((text, passed)) => {
            let _ = writeln!(out, "{text}");
            if passed {
                EXIT_OK
            } else {
                EXIT_VERIFY_FAILED
            }
        }
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Verification(msg)) => {
            let _ = writeln!(err, "verification failed: {msg}");
            EXIT_VERIFY_FAILED
        }
    }
}
