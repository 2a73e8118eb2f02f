use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tanjet::geometry::{grassmann_delta, lambda, principal_angles, NormalFrame};
use tanjet::jets::{taylor, to_map};
use tanjet::metrics::{delta_one_sided, estimate_profile, hausdorff};
use tanjet::sampler::{
    continue_family, read_jsonl, validate_family, write_csv, write_jsonl, RadiusSchedule,
    SamplerConfig,
};
use tanjet::verify::{
    approximate, check_s_equivalence, check_tangential, corpus_run, load_corpus, parse_corpus,
    VerifyConfig, VerifyError, DEFAULT_CORPUS,
};
use tanjet::AnalyticMap;

#[derive(Parser)]
#[command(name = "tanjet", version, about = "Taylor truncation and tangential equivalence of analytic zero sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct Common {
    /// Geometric radius schedule R:rho:m
    #[arg(long, value_parser = parse_radii, default_value = "0.1:0.5:6")]
    radii: RadiusSchedule,
    /// Write output files into this directory instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seeds per slice
    #[arg(long, default_value_t = 500)]
    budget: usize,
}

impl Common {
    fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            budget: self.budget,
            seed: self.seed,
            ..SamplerConfig::default()
        }
    }

    fn verify(&self, s: f64) -> VerifyConfig {
        let mut c = VerifyConfig::new(s);
        c.schedule = self.radii.clone();
        c.sampler = self.sampler();
        c
    }
}

#[derive(Subcommand)]
enum Command {
    /// Taylor polynomial of degree k at the origin
    Truncate {
        expr: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Sample V(f) on spheres (one radius with --r, else the --radii schedule)
    Sample {
        expr: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// One-sided and two-sided Hausdorff distances between two slice files
    Delta { cloud_a: PathBuf, cloud_b: PathBuf },
    /// Λf at a point
    Lambda {
        expr: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Vec<f64>,
    },
    /// Δ between two normal frames given as JSON arrays (inline or file)
    Grassmann { frame_a: String, frame_b: String },
    /// Estimate the exponent profile and k0
    Exponents {
        expr: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Check s-equivalence (and with --tangential, tangential s-equivalence)
    Verify {
        f: String,
        g: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        tangential: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Smallest k with V(f) tangentially s-equivalent to V(T^k f)
    Approximate {
        expr: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Run a corpus config (the bundled one when no path is given)
    Corpus {
        config: Option<PathBuf>,
        #[arg(long, default_value = "corpus_out")]
        out: PathBuf,
    },
}

fn parse_radii(s: &str) -> Result<RadiusSchedule, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [r, rho, m] = parts.as_slice() else {
        return Err("expected R:rho:m".into());
    };
    let r: f64 = r.parse().map_err(|e| format!("R: {e}"))?;
    let rho: f64 = rho.parse().map_err(|e| format!("rho: {e}"))?;
    let m: usize = m.parse().map_err(|e| format!("m: {e}"))?;
    RadiusSchedule::geometric(r, rho, m).map_err(|e| e.to_string())
}

/// Outcome classes mapped onto exit codes 0..=3.
enum Outcome {
    Pass,
    Fail,
}

#[derive(Debug)]
struct Usage(anyhow::Error);

#[derive(Debug)]
struct Numeric(anyhow::Error);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::fmt::Display for Numeric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for Usage {}
impl std::error::Error for Numeric {}

fn usage(e: impl Into<anyhow::Error>) -> anyhow::Error {
    Usage(e.into()).into()
}

fn numeric(e: impl Into<anyhow::Error>) -> anyhow::Error {
    Numeric(e.into()).into()
}

fn map_verify(e: VerifyError) -> anyhow::Error {
    if e.is_numeric() {
        numeric(e)
    } else {
        usage(e)
    }
}

fn parse_map(src: &str, n: usize) -> Result<AnalyticMap> {
    AnalyticMap::parse(src, n).map_err(|e| usage(anyhow!("{src:?}: {e}")))
}

fn emit(out: Option<&Path>, name: &str, body: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            let mut stdout = io::stdout().lock();
            let mut text = body.to_string();
            if !text.ends_with('\n') {
                text.push('\n');
            }
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(())
}

fn pretty(v: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn read_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let recs = read_jsonl(BufReader::new(file))
        .map_err(|e| usage(anyhow!("{}: {e}", path.display())))?;
    Ok(recs.into_iter().map(|r| r.x).collect())
}

fn read_frame(arg: &str) -> Result<NormalFrame<f64>> {
    let text = if Path::new(arg).is_file() {
        fs::read_to_string(arg)?
    } else {
        arg.to_string()
    };
    let vectors: Vec<Vec<f64>> =
        serde_json::from_str(&text).map_err(|e| usage(anyhow!("frame {arg:?}: {e}")))?;
    let n = vectors.first().map_or(0, Vec::len);
    NormalFrame::from_vectors(vec![0.0; n], &vectors).map_err(|e| usage(anyhow!("frame {arg:?}: {e}")))
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Truncate { expr, n, k, format } => {
            let f = parse_map(&expr, n)?;
            let series = taylor::<f64>(&f, k).map_err(numeric)?;
            let g = to_map(&series);
            match format {
                Format::Json => emit(
                    None,
                    "",
                    &pretty(&json!({ "input": f.unparse(), "k": k, "map": g.unparse(), "series": series }))?,
                )?,
                Format::Csv => {
                    let mut body = String::from("component,exponents,coefficient\n");
                    for (i, s) in series.iter().enumerate() {
                        for (m, c) in s.terms() {
                            let exps: Vec<String> = m.exponents().iter().map(u32::to_string).collect();
                            body.push_str(&format!("{},{},{c:?}\n", i + 1, exps.join(" ")));
                        }
                    }
                    emit(None, "", &body)?;
                }
            }
            Ok(Outcome::Pass)
        }
        Command::Sample { expr, n, r, common } => {
            let f = parse_map(&expr, n)?;
            let schedule = match r {
                Some(r) => RadiusSchedule::new(vec![r]).map_err(usage)?,
                None => common.radii.clone(),
            };
            let family = continue_family(&f, &schedule, &common.sampler());
            let mut buf = Vec::new();
            let name = match common.format {
                Format::Json => {
                    write_jsonl(&family, &mut buf)?;
                    "slices.jsonl"
                }
                Format::Csv => {
                    write_csv(&family, &mut buf)?;
                    "slices.csv"
                }
            };
            emit(common.out.as_deref(), name, &String::from_utf8(buf)?)?;
            let report = validate_family(&family);
            eprintln!("{}", report.verdict);
            if family.slices.iter().any(|s| s.is_empty()) {
                return Err(numeric(anyhow!("empty slice: {}", report.verdict)));
            }
            Ok(Outcome::Pass)
        }
        Command::Delta { cloud_a, cloud_b } => {
            let a = read_points(&cloud_a)?;
            let b = read_points(&cloud_b)?;
            let body = json!({
                "delta_ab": delta_one_sided(&a, &b).map_err(numeric)?,
                "delta_ba": delta_one_sided(&b, &a).map_err(numeric)?,
                "hausdorff": hausdorff(&a, &b).map_err(numeric)?,
            });
            emit(None, "", &pretty(&body)?)?;
            Ok(Outcome::Pass)
        }
        Command::Lambda { expr, n, at } => {
            let f = parse_map(&expr, n)?;
            let v = lambda(&f, &at).map_err(usage)?;
            emit(None, "", &format!("{v:?}"))?;
            Ok(Outcome::Pass)
        }
        Command::Grassmann { frame_a, frame_b } => {
            let a = read_frame(&frame_a)?;
            let b = read_frame(&frame_b)?;
            let body = json!({
                "delta": grassmann_delta(&a, &b).map_err(usage)?,
                "principal_angles": principal_angles(&a, &b).map_err(usage)?,
            });
            emit(None, "", &pretty(&body)?)?;
            Ok(Outcome::Pass)
        }
        Command::Exponents { expr, n, s, common } => {
            let f = parse_map(&expr, n)?;
            let cfg = common.verify(s);
            let family = continue_family(&f, &cfg.schedule, &cfg.sampler);
            let profile = estimate_profile(&f, &family, s, &cfg.estimator).map_err(numeric)?;
            emit(common.out.as_deref(), "profile.json", &pretty(&profile)?)?;
            Ok(Outcome::Pass)
        }
        Command::Verify {
            f,
            g,
            n,
            s,
            tangential,
            common,
        } => {
            let (f, g) = (parse_map(&f, n)?, parse_map(&g, n)?);
            let cfg = common.verify(s);
            let report = if tangential {
                check_tangential(&f, &g, &cfg)
            } else {
                check_s_equivalence(&f, &g, &cfg)
            }
            .map_err(map_verify)?;
            emit(common.out.as_deref(), "report.json", &pretty(&report)?)?;
            let pass = report.s_equivalent && report.tangentially_s_equivalent != Some(false);
            Ok(if pass { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Approximate { expr, n, s, common } => {
            let f = parse_map(&expr, n)?;
            match approximate(&f, &common.verify(s)) {
                Ok(a) => {
                    emit(common.out.as_deref(), "approximation.json", &pretty(&a)?)?;
                    Ok(Outcome::Pass)
                }
                Err(VerifyError::NoPassingK { cap, attempts }) => {
                    let body = json!({ "k_star": null, "cap": cap, "attempts": attempts });
                    emit(common.out.as_deref(), "approximation.json", &pretty(&body)?)?;
                    Ok(Outcome::Fail)
                }
                Err(e) => Err(map_verify(e)),
            }
        }
        Command::Corpus { config, out } => {
            let cfg = match &config {
                Some(p) => load_corpus(p).map_err(usage)?,
                None => parse_corpus(DEFAULT_CORPUS).map_err(usage)?,
            };
            let outcome = corpus_run(&cfg, &out)?;
            for e in &outcome.entries {
                let status = match (&e.error, e.passed()) {
                    (Some(err), _) => format!("error: {err}"),
                    (None, true) => "pass".into(),
                    (None, false) => "fail".into(),
                };
                let k = e.k_star.map_or(String::new(), |k| format!(" k_star={k}"));
                println!("{}: {status}{k}", e.name);
            }
            if outcome.any_numeric_failure() {
                bail!(Numeric(anyhow!("numeric failure in at least one entry")));
            }
            Ok(if outcome.all_passed() {
                Outcome::Pass
            } else {
                Outcome::Fail
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Numeric>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
