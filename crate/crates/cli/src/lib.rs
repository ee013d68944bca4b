//! Command-line front end: parses problem files, dispatches to a verb from
//! the command registry and renders one JSON verdict on standard output.
//!
//! Every verdict has the keys `verdict`, `certificate` or `witness`,
//! `residuals` and `timings`. Exit codes: 0 when a verdict was computed,
//! 1 for usage or input errors, 2 for numerical failure.

pub mod io;
pub mod registry;
pub mod verbs;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde_json::{json, Map, Value};

use freespec::inclusion::SearchRegistry;
use freespec::{Error, ModeChoice};

pub use registry::{Command, CommandRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Isometry,
    Contraction,
}

impl From<ModeArg> for ModeChoice {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Auto => ModeChoice::Auto,
            ModeArg::Isometry => ModeChoice::Isometry,
            ModeArg::Contraction => ModeChoice::Contraction,
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "freespec", version, about = "Certificates for free spectrahedra", after_help = verbs_help())]
pub struct Args {
    /// One of the registered verbs (see below).
    pub verb: String,
    /// Pencil JSON file.
    #[arg(long)]
    pub pencil: Option<PathBuf>,
    /// Tuple JSON file, or `zero` for the origin at level 1.
    #[arg(long)]
    pub point: Option<String>,
    /// Left pencil of an inclusion or equality.
    #[arg(long)]
    pub lhs: Option<PathBuf>,
    /// Right pencil of an inclusion or equality.
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    /// Matrix polynomial JSON file.
    #[arg(long)]
    pub poly: Option<PathBuf>,
    /// Tuple tested for polar membership.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Tuple of generators of a polar dual.
    #[arg(long)]
    pub generators: Option<PathBuf>,
    /// Coefficients of the kept variables of a spectrahedrop.
    #[arg(long)]
    pub omega: Option<PathBuf>,
    /// Coefficients of the projected-out variables of a spectrahedrop.
    #[arg(long)]
    pub gamma: Option<PathBuf>,
    /// Certificate or witness file (a full verdict is accepted as well).
    #[arg(long)]
    pub certificate: Option<PathBuf>,
    /// Acceptance tolerance; the default depends on the verb.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Degree parameter of a positivity certificate.
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the SDP behind the verdict in SDPA sparse format.
    #[arg(long)]
    pub dump_sdp: Option<PathBuf>,
    /// Counterexample strategies in the order they are tried.
    #[arg(long, value_delimiter = ',')]
    pub search: Vec<String>,
    /// Include wall-clock timings (makes output nondeterministic).
    #[arg(long)]
    pub timings: bool,
}

fn verbs_help() -> String {
    let reg = CommandRegistry::with_defaults();
    let mut s = String::from("Verbs:\n");
    for c in reg.iter() {
        s.push_str(&format!("  {:<9} {}\n", c.name(), c.about()));
    }
    s
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Input(_) => "input",
            CliError::Numerical(_) => "numerical",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numerical() || matches!(e, Error::Sdp(_)) {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

/// A computed verdict before rendering.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub verdict: String,
    pub certificate: Option<Value>,
    pub witness: Option<Value>,
    pub residuals: Map<String, Value>,
    pub extra: Map<String, Value>,
    /// Exit code override; verdicts such as `unresolved` exit with 2.
    pub code: i32,
}

impl Report {
    pub fn new(verdict: &str) -> Self {
        Self { verdict: verdict.to_string(), ..Default::default() }
    }

    pub fn residual(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.residuals.insert(key.to_string(), v.into());
        self
    }

    pub fn residuals_from(mut self, v: Value) -> Self {
        if let Value::Object(m) = v {
            self.residuals.extend(m);
        }
        self
    }

    pub fn with(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.extra.insert(key.to_string(), v.into());
        self
    }

    pub fn certificate(mut self, v: Value) -> Self {
        self.certificate = Some(v);
        self
    }

    pub fn witness(mut self, v: Value) -> Self {
        self.witness = Some(v);
        self
    }

    fn render(self, timings: Map<String, Value>) -> Value {
        let mut out = self.extra;
        out.insert("verdict".into(), Value::String(self.verdict));
        if let Some(c) = self.certificate {
            out.insert("certificate".into(), c);
        }
        if let Some(w) = self.witness {
            out.insert("witness".into(), w);
        }
        out.insert("residuals".into(), Value::Object(self.residuals));
        out.insert("timings".into(), Value::Object(timings));
        Value::Object(out)
    }
}

/// Exit code and standard output of one invocation.
#[derive(Debug, Clone)]
pub struct Exit {
    pub code: i32,
    pub stdout: String,
}

fn error_json(e: &CliError) -> String {
    let v = json!({
        "verdict": "error",
        "error": { "kind": e.kind(), "message": e.message() },
        "residuals": {},
        "timings": {},
    });
    serde_json::to_string_pretty(&v).expect("json values serialize")
}

fn validate(args: &Args) -> Result<(), CliError> {
    let known = SearchRegistry::with_defaults();
    for s in &args.search {
        known.get(s).map_err(|_| CliError::Usage(format!("unknown search strategy {s:?}; known: {:?}", known.names())))?;
    }
    if let Some(t) = args.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
        }
    }
    Ok(())
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> Exit
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Exit { code: 0, stdout: e.to_string() },
                _ => Exit { code: 1, stdout: error_json(&CliError::Usage(e.to_string())) },
            };
        }
    };
    let registry = CommandRegistry::with_defaults();
    let Some(cmd) = registry.get(&args.verb) else {
        let e = CliError::Usage(format!("unknown verb {:?}; known: {}", args.verb, registry.names().join(", ")));
        return Exit { code: 1, stdout: error_json(&e) };
    };
    if let Err(e) = validate(&args).and_then(|_| cmd.check(&args)) {
        return Exit { code: e.code(), stdout: error_json(&e) };
    }
    let start = Instant::now();
    match cmd.run(&args) {
        Ok(report) => {
            let mut timings = Map::new();
            if args.timings {
                timings.insert("total_ms".into(), json!(start.elapsed().as_secs_f64() * 1e3));
            }
            let code = report.code;
            let v = report.render(timings);
            Exit { code, stdout: serde_json::to_string_pretty(&v).expect("json values serialize") }
        }
        Err(e) => Exit { code: e.code(), stdout: error_json(&e) },
    }
}
