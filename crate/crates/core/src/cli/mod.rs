//! Batch driver: one pipeline per command, a JSON or CSV report, and an exit
//! status of 0 (all checks pass), 1 (a check failed) or 2 (bad config).

pub mod criteria;
mod pipelines;

use crate::error::{Error, Result};
use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Bumped whenever the CSV columns change.
pub const CSV_VERSION: u32 = 1;
pub const CSV_COLUMNS: [&str; 7] = ["csv_version", "command", "entry", "check", "value", "limit", "pass"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Identity,
    Kernel,
    Decay,
    Heat,
    Factorize,
    StrongfactTestfn,
    StrongfactHyper,
    ReportAll,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Command-line flags. Every flag except `--config` can also be given as a
/// `key=value` line in the config file (key = flag name without dashes);
/// flags win.
#[derive(Parser, Debug, Default)]
#[command(name = "anfact", version, allow_negative_numbers = true, about = "Verification pipelines for error-function symbols and analytic-vector factorization")]
pub struct Flags {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub command: Option<Command>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long = "R")]
    pub r: Option<f64>,
    #[arg(long = "grid-L")]
    pub grid_l: Option<f64>,
    #[arg(long = "grid-N")]
    pub grid_n: Option<usize>,
    /// Circle size M (2M samples); selects the circle group.
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// lorentzian, gaussian, abs_gaussian, constant, zero, mode<k>
    #[arg(long)]
    pub vector: Option<String>,
    /// alpha, beta, heat, erf_linear, smoothed_log_exp, lorentzian
    #[arg(long)]
    pub symbol: Option<String>,
    /// bump, bump:<radius>, gaussian, gaussian:<a>, zero
    #[arg(long)]
    pub testfn: Option<String>,
    /// Comma-separated weights n for decay certificates.
    #[arg(long = "n")]
    pub n_list: Option<String>,
    /// Comma-separated criteria for report-all (1..11, control); empty for none.
    #[arg(long)]
    pub matrix: Option<String>,
    /// line or circle
    #[arg(long)]
    pub group: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupChoice {
    Line,
    Circle,
}

/// A validated run. Unset parameters take the command's defaults.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub eps: Option<f64>,
    pub m: Option<u32>,
    pub c: Option<f64>,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    pub grid_l: Option<f64>,
    pub grid_n: Option<usize>,
    pub modes: Option<usize>,
    pub n_list: Option<Vec<f64>>,
    pub tol: Option<f64>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub vector: Option<String>,
    pub symbol: Option<String>,
    pub testfn: Option<String>,
    pub matrix: Option<Vec<String>>,
    pub group: GroupChoice,
}

const FILE_KEYS: [&str; 19] = [
    "command", "eps", "m", "c", "R", "grid-L", "grid-N", "modes", "tol", "out", "format", "seed", "vector", "symbol", "testfn",
    "n", "matrix", "group", "config",
];

/// `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key=value, got {line:?}", i + 1)))?;
        let k = k.trim();
        if !FILE_KEYS.contains(&k) || k == "config" {
            return Err(Error::Config(format!("line {}: unknown key {k:?}", i + 1)));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn parse_list(v: &str) -> Vec<String> {
    v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

impl RunConfig {
    /// Merge flags over the config file and validate.
    pub fn from_flags(flags: &Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        Self::merge(flags, &file)
    }

    pub fn merge(flags: &Flags, file: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| file.get(k).map(|s| s.as_str());
        let num = |k: &str| -> Result<Option<f64>> { get(k).map(|v| parse_num::<f64>(k, v)).transpose() };
        let command = match (flags.command, get("command")) {
            (Some(c), _) => c,
            (None, Some(v)) => Command::from_str(v, false).map_err(|_| Error::Config(format!("unknown command {v:?}")))?,
            (None, None) => return Err(Error::Config("no command given".into())),
        };
        let format = match (flags.format, get("format")) {
            (Some(f), _) => f,
            (None, Some(v)) => Format::from_str(v, true).map_err(|_| Error::Config(format!("unknown format {v:?}")))?,
            (None, None) => Format::Json,
        };
        let n_list = match flags.n_list.as_deref().or(get("n")) {
            Some(v) => Some(parse_list(v).iter().map(|s| parse_num::<f64>("n", s)).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        let modes = match flags.modes {
            Some(m) => Some(m),
            None => get("modes").map(|v| parse_num("modes", v)).transpose()?,
        };
        let group = match flags.group.as_deref().or(get("group")) {
            Some("line") => GroupChoice::Line,
            Some("circle") => GroupChoice::Circle,
            Some(g) => return Err(Error::Config(format!("unknown group {g:?}"))),
            None if modes.is_some() => GroupChoice::Circle,
            None => GroupChoice::Line,
        };
        let cfg = RunConfig {
            command,
            eps: flags.eps.map(Ok).or_else(|| num("eps").transpose()).transpose()?,
            m: match flags.m {
                Some(m) => Some(m),
                None => get("m").map(|v| parse_num("m", v)).transpose()?,
            },
            c: flags.c.map(Ok).or_else(|| num("c").transpose()).transpose()?,
            r: flags.r.map(Ok).or_else(|| num("R").transpose()).transpose()?,
            grid_l: flags.grid_l.map(Ok).or_else(|| num("grid-L").transpose()).transpose()?,
            grid_n: match flags.grid_n {
                Some(n) => Some(n),
                None => get("grid-N").map(|v| parse_num("grid-N", v)).transpose()?,
            },
            modes,
            n_list,
            tol: flags.tol.map(Ok).or_else(|| num("tol").transpose()).transpose()?,
            out: flags.out.clone().or_else(|| get("out").map(PathBuf::from)),
            format,
            seed: match flags.seed {
                Some(s) => s,
                None => get("seed").map(|v| parse_num("seed", v)).transpose()?.unwrap_or(0),
            },
            vector: flags.vector.clone().or_else(|| get("vector").map(String::from)),
            symbol: flags.symbol.clone().or_else(|| get("symbol").map(String::from)),
            testfn: flags.testfn.clone().or_else(|| get("testfn").map(String::from)),
            matrix: flags.matrix.as_deref().or(get("matrix")).map(parse_list),
            group,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(Error::Config(format!("{name} must be positive and finite, got {x}"))),
            _ => Ok(()),
        };
        positive("eps", self.eps)?;
        positive("c", self.c)?;
        positive("R", self.r)?;
        positive("grid-L", self.grid_l)?;
        positive("tol", self.tol)?;
        if let Some(n) = self.grid_n {
            if n < 16 || !n.is_power_of_two() {
                return Err(Error::Config(format!("grid-N must be a power of two >= 16, got {n}")));
            }
        }
        if let Some(m) = self.modes {
            if m < 2 {
                return Err(Error::Config(format!("modes must be >= 2, got {m}")));
            }
        }
        if let Some(ns) = &self.n_list {
            if ns.is_empty() || ns.iter().any(|n| !(n.is_finite() && *n >= 0.0)) {
                return Err(Error::Config(format!("n must be a nonempty list of finite weights >= 0, got {ns:?}")));
            }
        }
        if self.command == Command::StrongfactTestfn {
            if let Some(m) = self.m {
                if m < 4 {
                    return Err(Error::Config(format!("strongfact-testfn needs m >= 4, got {m}")));
                }
            }
            if self.group == GroupChoice::Circle {
                return Err(Error::Config("strongfact-testfn runs on the line".into()));
            }
        }
        if let Some(v) = &self.vector {
            crate::representation::VectorKind::parse(v)?;
        }
        if let Some(s) = &self.symbol {
            pipelines::symbol_by_name(s, self)?;
        }
        if let Some(t) = &self.testfn {
            pipelines::parse_testfn(t)?;
        }
        if let Some(mx) = &self.matrix {
            for e in mx {
                criteria::Criterion::parse(e)?;
            }
        }
        Ok(())
    }
}

/// One gated quantity. `value <= limit` unless the check is a bare flag.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub limit: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value: Some(value), limit: Some(limit), pass: value <= limit }
    }

    pub fn flag(name: impl Into<String>, pass: bool) -> Self {
        Check { name: name.into(), value: None, limit: None, pass }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorPayload {
    pub code: String,
    pub message: String,
}

impl From<&Error> for ErrorPayload {
    fn from(e: &Error) -> Self {
        ErrorPayload { code: e.code().into(), message: e.to_string() }
    }
}

/// Outcome of one pipeline or criterion.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub pass: bool,
    pub checks: Vec<Check>,
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorPayload>,
}

impl Outcome {
    pub fn new(checks: Vec<Check>, details: Value) -> Self {
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        Outcome { pass, checks, details, error: None }
    }

    pub fn failed(e: &Error, details: Value) -> Self {
        Outcome { pass: false, checks: Vec::new(), details, error: Some(e.into()) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    pub id: String,
    pub title: String,
    #[serde(flatten)]
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: Command,
    pub version: String,
    pub config: RunConfig,
    /// Parameters after defaults, enough to rerun the pipeline.
    pub params: Value,
    #[serde(flatten)]
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<Entry>>,
}

/// Run the configured pipeline.
pub fn run(cfg: &RunConfig) -> Report {
    let (params, outcome, entries) = match cfg.command {
        Command::ReportAll => {
            let (params, entries) = criteria::report_all(cfg);
            let pass = entries.iter().all(|e| e.outcome.pass);
            let outcome = Outcome { pass, checks: Vec::new(), details: json!({ "entries": entries.len() }), error: None };
            (params, outcome, Some(entries))
        }
        _ => {
            let (params, outcome) = pipelines::dispatch(cfg);
            (params, outcome, None)
        }
    };
    Report { command: cfg.command, version: VERSION.into(), config: cfg.clone(), params, outcome, entries }
}

impl Report {
    pub fn pass(&self) -> bool {
        self.outcome.pass
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).expect("csv write");
        let cmd = serde_json::to_value(self.command).expect("command serializes");
        let cmd = cmd.as_str().unwrap_or_default().to_string();
        let num = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let mut rows = |entry: &str, o: &Outcome| {
            for c in &o.checks {
                let rec = [CSV_VERSION.to_string(), cmd.clone(), entry.into(), c.name.clone(), num(c.value), num(c.limit), c.pass.to_string()];
                w.write_record(&rec).expect("csv write");
            }
            if let Some(e) = &o.error {
                let rec = [CSV_VERSION.to_string(), cmd.clone(), entry.into(), format!("error:{}", e.code), String::new(), String::new(), "false".into()];
                w.write_record(&rec).expect("csv write");
            }
        };
        rows("", &self.outcome);
        for e in self.entries.iter().flatten() {
            rows(&e.id, &e.outcome);
        }
        String::from_utf8(w.into_inner().expect("csv flush")).expect("utf8")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    /// Fixed-width table for the terminal.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let line = |s: &mut String, id: &str, title: &str, o: &Outcome| {
            let worst = o.checks.iter().find(|c| !c.pass).map(|c| c.name.as_str());
            let note = match (&o.error, worst) {
                (Some(e), _) => e.code.clone(),
                (None, Some(w)) => format!("failed: {w}"),
                (None, None) => String::new(),
            };
            s.push_str(&format!("{:<8} {:<4} {:<44} {}\n", id, if o.pass { "PASS" } else { "FAIL" }, title, note));
        };
        match &self.entries {
            Some(es) => {
                for e in es {
                    line(&mut s, &e.id, &e.title, &e.outcome);
                }
                s.push_str(&format!("{} of {} passed\n", es.iter().filter(|e| e.outcome.pass).count(), es.len()));
            }
            None => {
                let name = serde_json::to_value(self.command).expect("command serializes");
                line(&mut s, "-", name.as_str().unwrap_or_default(), &self.outcome)
            }
        }
        s
    }
}

fn write_out(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

/// Entry point for the binary; returns the process exit status.
pub fn main_with(flags: Flags) -> i32 {
    let cfg = match RunConfig::from_flags(&flags) {
        Ok(c) => c,
        Err(e) => {
            let payload = json!({ "version": VERSION, "pass": false, "error": ErrorPayload::from(&e) });
            let text = serde_json::to_string_pretty(&payload).expect("serializes") + "\n";
            if let Err(io) = write_out(flags.out.as_deref(), &text) {
                eprintln!("cannot write report: {io}");
            }
            eprintln!("{e}");
            return 2;
        }
    };
    let report = run(&cfg);
    if let Err(io) = write_out(cfg.out.as_deref(), &report.render(cfg.format)) {
        eprintln!("cannot write report: {io}");
        return 2;
    }
    eprint!("{}", report.summary());
    report.exit_code()
}
