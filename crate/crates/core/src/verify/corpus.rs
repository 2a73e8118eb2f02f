use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    approximate, check_tangential, EquivalenceReport, FitSummary, KAttempt, VerifyConfig, VerifyError,
};
use crate::expr::AnalyticMap;
use crate::sampler::{RadiusSchedule, SamplerConfig};

/// The bundled corpus: cone, cusp, sine surface, quintic perturbation of the
/// cone, and the plane/cone negative control.
pub const DEFAULT_CORPUS: &str = include_str!("../../corpus/default.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Approximate,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    #[serde(rename = "R")]
    pub first: f64,
    pub rho: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub name: String,
    pub map: String,
    pub arity: usize,
    pub s: f64,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<String>,
    pub schedule: ScheduleEntry,
    pub budget: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub entries: Vec<CorpusEntry>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> CorpusError {
    CorpusError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

impl CorpusEntry {
    fn parsed(&self, at: &str) -> Result<(AnalyticMap, Option<AnalyticMap>), CorpusError> {
        let f = AnalyticMap::parse(&self.map, self.arity)
            .map_err(|e| schema(format!("{at}.map"), e.to_string()))?;
        let g = match (&self.mode, &self.pair) {
            (Mode::Verify, None) => return Err(schema(format!("{at}.pair"), "required in verify mode")),
            (_, Some(src)) => Some(
                AnalyticMap::parse(src, self.arity)
                    .map_err(|e| schema(format!("{at}.pair"), e.to_string()))?,
            ),
            (Mode::Approximate, None) => None,
        };
        Ok((f, g))
    }

    fn schedule(&self, at: &str) -> Result<RadiusSchedule, CorpusError> {
        let s = &self.schedule;
        if s.count < 3 {
            return Err(schema(format!("{at}.schedule.count"), "need at least 3 radii to fit a slope"));
        }
        RadiusSchedule::geometric(s.first, s.rho, s.count)
            .map_err(|e| schema(format!("{at}.schedule"), e.to_string()))
    }

    /// Resolved pipeline configuration for this entry.
    pub fn config(&self, at: &str) -> Result<VerifyConfig, CorpusError> {
        if !(self.s.is_finite() && self.s > 0.0) {
            return Err(schema(format!("{at}.s"), "must be a positive number"));
        }
        if self.budget == 0 {
            return Err(schema(format!("{at}.budget"), "must be at least 1"));
        }
        let mut c = VerifyConfig::new(self.s);
        c.schedule = self.schedule(at)?;
        c.sampler = SamplerConfig {
            budget: self.budget,
            seed: self.seed,
            ..SamplerConfig::default()
        };
        Ok(c)
    }
}

/// Parses and validates a corpus, reporting violations with a JSON path.
pub fn parse_corpus(text: &str) -> Result<CorpusConfig, CorpusError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: CorpusConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(if path == "." { "$".to_string() } else { format!("$.{path}") }, e.inner().to_string())
    })?;
    if cfg.entries.is_empty() {
        return Err(schema("$.entries", "at least one entry is required"));
    }
    for (i, e) in cfg.entries.iter().enumerate() {
        let at = format!("$.entries[{i}]");
        if e.name.is_empty() || !e.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(schema(format!("{at}.name"), "must be non-empty [A-Za-z0-9_-]"));
        }
        if cfg.entries[..i].iter().any(|o| o.name == e.name) {
            return Err(schema(format!("{at}.name"), format!("duplicate name {:?}", e.name)));
        }
        e.parsed(&at)?;
        e.config(&at)?;
    }
    Ok(cfg)
}

pub fn load_corpus(path: &Path) -> Result<CorpusConfig, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_corpus(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryOutcome {
    pub name: String,
    pub mode: Mode,
    pub s: f64,
    pub k_star: Option<u32>,
    pub k0: Option<u32>,
    pub report: Option<EquivalenceReport>,
    /// Per-order evidence from the truncation search.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attempts: Vec<KAttempt>,
    pub error: Option<String>,
    /// Whether the failure (if any) was numeric rather than a verdict.
    pub numeric_failure: bool,
}

impl EntryOutcome {
    pub fn passed(&self) -> bool {
        self.report
            .as_ref()
            .is_some_and(|r| r.s_equivalent && r.tangentially_s_equivalent != Some(false))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusOutcome {
    pub entries: Vec<EntryOutcome>,
}

impl CorpusOutcome {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(EntryOutcome::passed)
    }

    pub fn any_numeric_failure(&self) -> bool {
        self.entries.iter().any(|e| e.numeric_failure)
    }
}

fn run_entry(i: usize, e: &CorpusEntry) -> EntryOutcome {
    let at = format!("$.entries[{i}]");
    let mut out = EntryOutcome {
        name: e.name.clone(),
        mode: e.mode,
        s: e.s,
        k_star: None,
        k0: None,
        report: None,
        attempts: Vec::new(),
        error: None,
        numeric_failure: false,
    };
    let (f, g, config) = match e.parsed(&at).and_then(|(f, g)| Ok((f, g, e.config(&at)?))) {
        Ok(v) => v,
        Err(err) => {
            out.error = Some(err.to_string());
            return out;
        }
    };
    let fail = |out: &mut EntryOutcome, err: VerifyError| {
        out.numeric_failure = err.is_numeric() && !matches!(err, VerifyError::NoPassingK { .. });
        out.error = Some(err.to_string());
    };
    match (e.mode, g) {
        (Mode::Approximate, _) => match approximate(&f, &config) {
            Ok(a) => {
                out.k_star = Some(a.k_star);
                out.k0 = Some(a.k0);
                out.report = Some(a.report);
                out.attempts = a.attempts;
            }
            Err(VerifyError::NoPassingK { cap, attempts }) => {
                out.attempts = attempts.clone();
                fail(&mut out, VerifyError::NoPassingK { cap, attempts });
            }
            Err(err) => fail(&mut out, err),
        },
        (Mode::Verify, Some(g)) => match check_tangential(&f, &g, &config) {
            Ok(r) => out.report = Some(r),
            Err(err) => fail(&mut out, err),
        },
        (Mode::Verify, None) => unreachable!("validated by parse_corpus"),
    }
    out
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

fn slope(f: Option<&FitSummary>) -> String {
    match f.and_then(FitSummary::effective_slope) {
        Some(v) if v.is_infinite() => "inf".into(),
        Some(v) => format!("{v:.6}"),
        None => String::new(),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_outputs(out_dir: &Path, outcome: &CorpusOutcome) -> Result<(), CorpusError> {
    let reports = out_dir.join("reports");
    let decay = out_dir.join("decay");
    for d in [&reports, &decay] {
        fs::create_dir_all(d).map_err(io_err(d))?;
    }
    for e in &outcome.entries {
        let path = reports.join(format!("{}.json", e.name));
        let mut file = fs::File::create(&path).map_err(io_err(&path))?;
        serde_json::to_writer_pretty(&mut file, e).map_err(|err| io_err(&path)(err.into()))?;
        file.write_all(b"\n").map_err(io_err(&path))?;
        if let Some(r) = &e.report {
            let path = decay.join(format!("{}.csv", e.name));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record([
                "r",
                "distance_forward",
                "distance_backward",
                "match_forward",
                "match_backward",
                "delta_forward",
                "delta_backward",
            ])?;
            for row in &r.rows {
                w.write_record([
                    row.r.to_string(),
                    row.distance_forward.to_string(),
                    row.distance_backward.to_string(),
                    opt(row.match_forward),
                    opt(row.match_backward),
                    opt(row.delta_forward),
                    opt(row.delta_backward),
                ])?;
            }
            w.flush().map_err(io_err(&path))?;
        }
    }
    let path = out_dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        "entry",
        "mode",
        "s",
        "k_star",
        "k0",
        "distance_forward",
        "distance_backward",
        "delta_forward",
        "delta_backward",
        "s_equivalent",
        "tangentially_s_equivalent",
        "status",
    ])?;
    for e in &outcome.entries {
        let r = e.report.as_ref();
        let status = match (&e.error, e.passed()) {
            (Some(_), _) if e.numeric_failure => "numeric_failure",
            (Some(_), _) => "error",
            (None, true) => "pass",
            (None, false) => "fail",
        };
        w.write_record([
            e.name.clone(),
            format!("{:?}", e.mode).to_lowercase(),
            e.s.to_string(),
            opt(e.k_star),
            opt(e.k0),
            slope(r.map(|r| &r.fits.distance_forward)),
            slope(r.map(|r| &r.fits.distance_backward)),
            slope(r.and_then(|r| r.fits.delta_forward.as_ref())),
            slope(r.and_then(|r| r.fits.delta_backward.as_ref())),
            opt(r.map(|r| r.s_equivalent)),
            opt(r.and_then(|r| r.tangentially_s_equivalent)),
            status.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(&path))?;
    Ok(())
}

/// Runs every entry (in parallel) and writes `reports/<name>.json`,
/// `decay/<name>.csv` and `summary.csv` under `out_dir`.
pub fn corpus_run(config: &CorpusConfig, out_dir: &Path) -> Result<CorpusOutcome, CorpusError> {
    let entries: Vec<EntryOutcome> = config
        .entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| run_entry(i, e))
        .collect();
    let outcome = CorpusOutcome { entries };
    write_outputs(out_dir, &outcome)?;
    Ok(outcome)
}
