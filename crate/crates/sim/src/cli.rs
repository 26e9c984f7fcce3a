//! Command line plumbing: scenario files, subcommand dispatch, output
//! writing, and manifest replay.
//!
//! Scenarios live in flat `key = value` files, overridable with repeated
//! `--set key=value` flags. Every run writes a manifest recording the
//! resolved scenario and parameters; `replay` re-executes a manifest and
//! byte-compares the regenerated data files against the originals when
//! they are still present.
//!
//! Exit codes: 0 ok, 1 invariant violation, 2 config error, 3 degenerate
//! configuration, 4 regime violation.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use lilypond_core::builder::BuildError;
use lilypond_core::{analysis, builder, oracle, HardCoreResult, Window};
use serde::{Deserialize, Serialize};

use crate::experiments::{self, Fault};
use crate::formats::{self, RunManifest};
use crate::sampling::{self, BirthLaw, GermLaw, ScenarioSpec, ShapeLaw};
use crate::stats::{self, ExperimentError, FunctionalSpec, HVariant, Weight};

const TABLE_HELP: &str = "\
Output tables:
  grains.csv        id,x1..xd,t,R,status,round
  clusters.csv      cluster,size,has_doublet,touches_boundary,members
  clt_samples.csv   n,replicate,value
  compare_long.csv  scenario,replicate,statistic,value
  tail.csv          t,tail,stderr

Scenario keys (key = value, '#' comments):
  dimension   2 or 3
  window      lo then hi, comma separated: 0,0,10,10
  germs       poisson:INTENSITY or binomial:N
  births      constant, uniform:T_MAX, or exponential:RATE
  shapes      ball, ball-uniform:C, polygon-regular:SIDES,
              square[:HALF_WIDTH], or polygon:X Y;X Y;X Y[;...]
  seed        64-bit integer (default 0)";

#[derive(Parser)]
#[command(name = "lilypond", version, about = "Growth-maximal hard-core simulator", after_help = TABLE_HELP)]
pub struct Cli {
    /// Cap the worker thread count.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Validate and write the manifest, skip the computation.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args)]
pub struct ConfigArgs {
    /// Scenario file of key = value lines.
    #[arg(long)]
    pub config: PathBuf,
    /// Override one scenario key, e.g. --set seed=7. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Subcommand)]
pub enum Command {
    /// Sample one configuration, grow it, and write the result.
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Replicate index to draw from the seed.
        #[arg(long, default_value_t = 0)]
        replicate: u64,
        /// Grow with the event-queue engine instead of the round builder.
        #[arg(long)]
        oracle: bool,
    },
    /// Run the invariant battery over independent replicates.
    Verify {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 100)]
        replicates: usize,
        /// Corrupt one growth value after building; the battery must fail.
        #[arg(long)]
        inject_fault: bool,
    },
    /// Growing-window normality experiment for a grain functional.
    Clt {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Window volumes n, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![100.0, 400.0])]
        windows: Vec<f64>,
        #[arg(long, default_value_t = 500)]
        replicates: usize,
        /// Mark weight: volume, count, or power:ALPHA:BETA.
        #[arg(long, default_value = "volume")]
        h: String,
        /// Position weight: one, coordinate:AXIS, or box:L1,..,LD:H1,..,HD.
        #[arg(long, default_value = "one")]
        f: String,
    },
    /// Paired comparison of simultaneous births against uniform births.
    Compare {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Upper end of the uniform birth window in scenario B.
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 200)]
        replicates: usize,
    },
    /// Tail of the stabilization radius at a grain near the window center.
    Tail {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 200)]
        replicates: usize,
        /// Thresholds, comma separated; defaults to a grid up to half the
        /// window diameter.
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
        /// Chain enumeration budget per stabilization record.
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
    },
    /// Re-run a recorded manifest and compare the regenerated files.
    Replay {
        /// Manifest written by an earlier run.
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
pub enum CmdError {
    Config(String),
    Degenerate(String),
    Regime(String),
    Violation(String),
}

impl CmdError {
    pub fn code(&self) -> u8 {
        match self {
            CmdError::Violation(_) => 1,
            CmdError::Config(_) => 2,
            CmdError::Degenerate(_) => 3,
            CmdError::Regime(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CmdError::Config(m)
            | CmdError::Degenerate(m)
            | CmdError::Regime(m)
            | CmdError::Violation(m) => m,
        }
    }
}

impl From<ExperimentError> for CmdError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Regime(m) => CmdError::Regime(m),
            ExperimentError::Sample(s) => CmdError::Config(s.to_string()),
            ExperimentError::Build(b) => CmdError::Degenerate(b.to_string()),
        }
    }
}

fn io_err(context: &str, e: std::io::Error) -> CmdError {
    CmdError::Config(format!("{context}: {e}"))
}

pub fn run() -> u8 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

struct RunOutput {
    outputs: Vec<String>,
    warnings: Vec<String>,
    summary: String,
    violation: Option<String>,
}

fn finish(o: RunOutput) -> Result<(), CmdError> {
    for w in &o.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", o.summary);
    match o.violation {
        Some(v) => Err(CmdError::Violation(v)),
        None => Ok(()),
    }
}

fn dispatch(cli: Cli) -> Result<(), CmdError> {
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let dry = cli.dry_run;
    match cli.command {
        Command::Simulate { cfg, replicate, oracle } => {
            let spec = load_spec(&cfg)?;
            let params = SimParams {
                replicate,
                engine: if oracle { "oracle".into() } else { "builder".into() },
            };
            finish(run_simulate(&spec, &params, &cfg.out, dry)?)
        }
        Command::Verify { cfg, replicates, inject_fault } => {
            let spec = load_spec(&cfg)?;
            let params = VerifyParams { replicates, inject_fault };
            finish(run_verify(&spec, &params, &cfg.out, dry)?)
        }
        Command::Clt { cfg, windows, replicates, h, f } => {
            let spec = load_spec(&cfg)?;
            let functional = parse_functional(&h, &f).map_err(CmdError::Config)?;
            let params = CltParams { windows, replicates, functional };
            finish(run_clt(&spec, &params, &cfg.out, dry)?)
        }
        Command::Compare { cfg, t_max, replicates } => {
            let spec = load_spec(&cfg)?;
            if !(t_max >= 0.0) || !t_max.is_finite() {
                return Err(CmdError::Config("t_max must be nonnegative".into()));
            }
            let params = CompareParams { t_max, replicates };
            finish(run_compare(&spec, &params, &cfg.out, dry)?)
        }
        Command::Tail { cfg, replicates, thresholds, budget } => {
            let spec = load_spec(&cfg)?;
            let thresholds = match thresholds {
                Some(t) if !t.is_empty() => t,
                _ => {
                    let half = spec.window.diameter() / 2.0;
                    (0..=20).map(|i| half * i as f64 / 20.0).collect()
                }
            };
            let params = TailParams { replicates, thresholds, budget };
            finish(run_tail(&spec, &params, &cfg.out, dry)?)
        }
        Command::Replay { manifest, out } => run_replay(&manifest, &out),
    }
}

// Per-command parameters, recorded in the manifest and replayed from it.

#[derive(Serialize, Deserialize)]
struct SimParams {
    replicate: u64,
    engine: String,
}

#[derive(Serialize, Deserialize)]
struct VerifyParams {
    replicates: usize,
    inject_fault: bool,
}

#[derive(Serialize, Deserialize)]
struct CltParams {
    windows: Vec<f64>,
    replicates: usize,
    functional: FunctionalSpec,
}

#[derive(Serialize, Deserialize)]
struct CompareParams {
    t_max: f64,
    replicates: usize,
}

#[derive(Serialize, Deserialize)]
struct TailParams {
    replicates: usize,
    thresholds: Vec<f64>,
    budget: usize,
}

fn prepare_out(out: &Path) -> Result<(), CmdError> {
    fs::create_dir_all(out).map_err(|e| io_err("output directory", e))
}

fn write_manifest<P: Serialize>(
    command: &str,
    spec: &ScenarioSpec,
    params: &P,
    outputs: &[String],
    out: &Path,
) -> Result<(), CmdError> {
    let params = serde_json::to_value(params)
        .map_err(|e| CmdError::Config(format!("params serialization: {e}")))?;
    let manifest = RunManifest::new(command, spec, params, outputs.to_vec());
    manifest.save(out).map_err(|e| io_err("manifest", e))?;
    Ok(())
}

fn run_simulate(
    spec: &ScenarioSpec,
    params: &SimParams,
    out: &Path,
    dry: bool,
) -> Result<RunOutput, CmdError> {
    prepare_out(out)?;
    let outputs =
        vec!["result.json".to_owned(), "grains.csv".to_owned(), "clusters.csv".to_owned()];
    write_manifest("simulate", spec, params, &outputs, out)?;
    if dry {
        return Ok(RunOutput {
            outputs: Vec::new(),
            warnings: Vec::new(),
            summary: format!("dry run: wrote manifest only into {}", out.display()),
            violation: None,
        });
    }
    let cfg = sampling::sample(spec, params.replicate)
        .map_err(|e| CmdError::Config(e.to_string()))?;
    let result = match params.engine.as_str() {
        "oracle" => oracle::build(&cfg),
        _ => builder::build(&cfg),
    };
    let result: HardCoreResult = match result {
        Ok(r) => r,
        Err(BuildError::TooFewGrains(n)) => {
            return Err(CmdError::Degenerate(format!(
                "configuration has {n} grains; growth needs at least 2"
            )))
        }
        Err(e) => return Err(CmdError::Config(e.to_string())),
    };
    let mut warnings = Vec::new();
    if result.tie_degenerate {
        warnings.push(
            "tie-degenerate configuration; growth depended on the id order".to_owned(),
        );
    }
    let capped = result
        .grains
        .iter()
        .filter(|g| g.status == builder::GrainStatus::UnstoppedCapped)
        .count();
    if !result.in_h {
        warnings.push(format!(
            "{capped} grains were never stopped and got capped; the window is too sparse"
        ));
    }
    formats::write_json(out, "result.json", "hardcore-result", &result)
        .map_err(|e| io_err("result.json", e))?;
    fs::write(out.join("grains.csv"), formats::grains_csv(&result))
        .map_err(|e| io_err("grains.csv", e))?;
    let graph = analysis::neighbour_graph(&result);
    let clusters = analysis::clusters(&result, &graph);
    fs::write(out.join("clusters.csv"), formats::clusters_csv(&clusters))
        .map_err(|e| io_err("clusters.csv", e))?;
    let covered =
        result.grains.iter().filter(|g| g.status == builder::GrainStatus::Covered).count();
    Ok(RunOutput {
        outputs,
        warnings,
        summary: format!(
            "built {} grains ({} covered, {} capped, {} clusters) with the {} engine into {}",
            result.grains.len(),
            covered,
            capped,
            clusters.len(),
            params.engine,
            out.display()
        ),
        violation: None,
    })
}

fn run_verify(
    spec: &ScenarioSpec,
    params: &VerifyParams,
    out: &Path,
    dry: bool,
) -> Result<RunOutput, CmdError> {
    prepare_out(out)?;
    let outputs = vec!["report.json".to_owned()];
    write_manifest("verify", spec, params, &outputs, out)?;
    if dry {
        return Ok(RunOutput {
            outputs: Vec::new(),
            warnings: Vec::new(),
            summary: format!("dry run: wrote manifest only into {}", out.display()),
            violation: None,
        });
    }
    let fault = if params.inject_fault { Fault::InflateGrowth } else { Fault::None };
    let report = experiments::run_battery(spec, params.replicates, fault)?;
    formats::write_json(out, "report.json", "verify-report", &report)
        .map_err(|e| io_err("report.json", e))?;
    let mut warnings = Vec::new();
    if params.replicates == 0 {
        warnings.push("0 replicates requested; the pass is vacuous".to_owned());
    }
    if report.ties_flagged > 0 {
        warnings.push(format!(
            "{} replicates were tie-degenerate; their structure checks were skipped",
            report.ties_flagged
        ));
    }
    for f in report.failures.iter().take(20) {
        eprintln!("violation: {f}");
    }
    let violation = (!report.ok)
        .then(|| format!("{} invariant violations; see report.json", report.failures.len()));
    Ok(RunOutput {
        outputs,
        warnings,
        summary: format!(
            "battery over {} replicates: {} grains, max engine delta {:.2e}, max penetration {:.2e}, {}",
            report.replicates,
            report.grains_total,
            report.engine_max_delta,
            report.max_penetration,
            if report.ok { "ok" } else { "FAILED" }
        ),
        violation,
    })
}

fn run_clt(
    spec: &ScenarioSpec,
    params: &CltParams,
    out: &Path,
    dry: bool,
) -> Result<RunOutput, CmdError> {
    prepare_out(out)?;
    let outputs = vec!["clt.json".to_owned(), "clt_samples.csv".to_owned()];
    write_manifest("clt", spec, params, &outputs, out)?;
    if dry {
        return Ok(RunOutput {
            outputs: Vec::new(),
            warnings: Vec::new(),
            summary: format!("dry run: wrote manifest only into {}", out.display()),
            violation: None,
        });
    }
    let report =
        stats::clt_experiment(spec, &params.functional, &params.windows, params.replicates)?;
    formats::write_json(out, "clt.json", "clt-report", &report)
        .map_err(|e| io_err("clt.json", e))?;
    fs::write(out.join("clt_samples.csv"), formats::clt_samples_csv(&report))
        .map_err(|e| io_err("clt_samples.csv", e))?;
    let mut warnings = Vec::new();
    let last_ks = report.slices.last().and_then(|s| s.ks);
    if last_ks.is_none() {
        warnings.push(
            "sample variance vanished at the largest window; normality is indeterminate"
                .to_owned(),
        );
    }
    let capped: usize = report.slices.iter().map(|s| s.capped_contributions).sum();
    if capped > 0 {
        warnings.push(format!("{capped} capped grains contributed to functional values"));
    }
    Ok(RunOutput {
        outputs,
        warnings,
        summary: format!(
            "clt over windows {:?} with M={}: sigma_hat={:.5}, ks at largest n: {}",
            params.windows,
            params.replicates,
            report.sigma_hat,
            last_ks.map_or("n/a".to_owned(), |k| format!("{k:.4}"))
        ),
        violation: None,
    })
}

fn run_compare(
    spec: &ScenarioSpec,
    params: &CompareParams,
    out: &Path,
    dry: bool,
) -> Result<RunOutput, CmdError> {
    prepare_out(out)?;
    let outputs = vec!["compare.json".to_owned(), "compare_long.csv".to_owned()];
    write_manifest("compare", spec, params, &outputs, out)?;
    if dry {
        return Ok(RunOutput {
            outputs: Vec::new(),
            warnings: Vec::new(),
            summary: format!("dry run: wrote manifest only into {}", out.display()),
            violation: None,
        });
    }
    let report = stats::compare_scenarios(spec, params.t_max, params.replicates)?;
    formats::write_json(out, "compare.json", "compare-report", &report)
        .map_err(|e| io_err("compare.json", e))?;
    fs::write(out.join("compare_long.csv"), formats::compare_long_csv(&report))
        .map_err(|e| io_err("compare_long.csv", e))?;
    let mut warnings = Vec::new();
    if report.skipped_replicates > 0 {
        warnings.push(format!(
            "{} replicates were degenerate and skipped",
            report.skipped_replicates
        ));
    }
    Ok(RunOutput {
        outputs,
        warnings,
        summary: format!(
            "compare with t_max={}: mean R {:.4} vs {:.4}, covered fraction {:.4}, z={:.2}, later births larger at 99%: {}",
            params.t_max,
            report.mean_r_a,
            report.mean_r_b,
            report.covered_fraction_b,
            report.z,
            report.b_larger_at_99
        ),
        violation: None,
    })
}

fn run_tail(
    spec: &ScenarioSpec,
    params: &TailParams,
    out: &Path,
    dry: bool,
) -> Result<RunOutput, CmdError> {
    prepare_out(out)?;
    let outputs = vec!["tail.json".to_owned(), "tail.csv".to_owned()];
    write_manifest("tail", spec, params, &outputs, out)?;
    if dry {
        return Ok(RunOutput {
            outputs: Vec::new(),
            warnings: Vec::new(),
            summary: format!("dry run: wrote manifest only into {}", out.display()),
            violation: None,
        });
    }
    let curve =
        experiments::tail_curve_u(spec, params.replicates, &params.thresholds, params.budget)?;
    formats::write_json(out, "tail.json", "tail-curve", &curve)
        .map_err(|e| io_err("tail.json", e))?;
    fs::write(out.join("tail.csv"), formats::tail_csv(&curve))
        .map_err(|e| io_err("tail.csv", e))?;
    let mut warnings = Vec::new();
    if curve.truncated > 0 {
        warnings.push(format!(
            "{} replicates hit the chain budget; their radii count as infinite",
            curve.truncated
        ));
    }
    Ok(RunOutput {
        outputs,
        warnings,
        summary: format!(
            "tail over {} replicates: log slope {}",
            params.replicates,
            curve.log_slope.map_or("n/a".to_owned(), |s| format!("{s:.4}"))
        ),
        violation: None,
    })
}

fn run_replay(manifest_path: &Path, out: &Path) -> Result<(), CmdError> {
    let manifest = RunManifest::load(manifest_path).map_err(|e| io_err("manifest", e))?;
    manifest.spec.validate().map_err(|e| CmdError::Config(e.to_string()))?;
    let params = manifest.params.clone();
    let spec = manifest.spec.clone();
    let o = match manifest.command.as_str() {
        "simulate" => run_simulate(&spec, &from_params(params)?, out, false)?,
        "verify" => run_verify(&spec, &from_params(params)?, out, false)?,
        "clt" => run_clt(&spec, &from_params(params)?, out, false)?,
        "compare" => run_compare(&spec, &from_params(params)?, out, false)?,
        "tail" => run_tail(&spec, &from_params(params)?, out, false)?,
        other => return Err(CmdError::Config(format!("unknown manifest command: {other}"))),
    };
    for w in &o.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", o.summary);

    // Compare against the originals when they are still next to the manifest.
    let origin = manifest_path.parent().unwrap_or(Path::new("."));
    let mut compared = 0usize;
    let mut mismatched = Vec::new();
    for name in &o.outputs {
        let old = origin.join(name);
        if !old.is_file() {
            continue;
        }
        compared += 1;
        let a = fs::read(&old).map_err(|e| io_err(name, e))?;
        let b = fs::read(out.join(name)).map_err(|e| io_err(name, e))?;
        if a != b {
            mismatched.push(name.clone());
        }
    }
    if compared > 0 {
        println!(
            "replay: {}/{} regenerated files byte-identical to the originals",
            compared - mismatched.len(),
            compared
        );
    }
    if !mismatched.is_empty() {
        return Err(CmdError::Violation(format!(
            "replay mismatch in {}",
            mismatched.join(", ")
        )));
    }
    if let Some(v) = o.violation {
        return Err(CmdError::Violation(v));
    }
    Ok(())
}

fn from_params<T: for<'de> Deserialize<'de>>(v: serde_json::Value) -> Result<T, CmdError> {
    serde_json::from_value(v).map_err(|e| CmdError::Config(format!("manifest params: {e}")))
}

// Scenario file parsing.

fn load_spec(cfg: &ConfigArgs) -> Result<ScenarioSpec, CmdError> {
    let text = fs::read_to_string(&cfg.config)
        .map_err(|e| io_err(&cfg.config.display().to_string(), e))?;
    let mut pairs = parse_kv_text(&text).map_err(CmdError::Config)?;
    for s in &cfg.set {
        let Some((k, v)) = s.split_once('=') else {
            return Err(CmdError::Config(format!("--set needs KEY=VALUE, got {s:?}")));
        };
        pairs.push((k.trim().to_lowercase(), v.trim().to_owned()));
    }
    let spec = spec_from_pairs(&pairs).map_err(CmdError::Config)?;
    spec.validate().map_err(|e| CmdError::Config(e.to_string()))?;
    Ok(spec)
}

fn parse_kv_text(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("line {}: expected key = value", i + 1));
        };
        out.push((k.trim().to_lowercase(), v.trim().to_owned()));
    }
    Ok(out)
}

fn spec_from_pairs(pairs: &[(String, String)]) -> Result<ScenarioSpec, String> {
    let mut map: BTreeMap<&str, &str> = BTreeMap::new();
    for (k, v) in pairs {
        match k.as_str() {
            "dimension" | "window" | "germs" | "births" | "shapes" | "seed" => {
                map.insert(k, v);
            }
            other => return Err(format!("unknown scenario key {other:?}")),
        }
    }
    let dimension: usize = map
        .get("dimension")
        .ok_or("missing key: dimension")?
        .parse()
        .map_err(|e| format!("dimension: {e}"))?;
    let window = parse_window(map.get("window").ok_or("missing key: window")?, dimension)?;
    let germs = parse_germs(map.get("germs").ok_or("missing key: germs")?)?;
    let births = map.get("births").map_or(Ok(BirthLaw::Constant), |v| parse_births(v))?;
    let shapes = map.get("shapes").map_or(Ok(ShapeLaw::UnitBall), |v| parse_shapes(v))?;
    let seed: u64 = map
        .get("seed")
        .map_or(Ok(0), |v| v.parse())
        .map_err(|e| format!("seed: {e}"))?;
    Ok(ScenarioSpec { dimension, window, germs, births, shapes, seed })
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect()
}

fn parse_window(s: &str, dim: usize) -> Result<Window, String> {
    let vals = parse_f64_list(s)?;
    if vals.len() != 2 * dim {
        return Err(format!(
            "window needs {} numbers for dimension {dim}, got {}",
            2 * dim,
            vals.len()
        ));
    }
    Window::new(vals[..dim].to_vec(), vals[dim..].to_vec()).map_err(|e| format!("window: {e}"))
}

fn split_law(s: &str) -> (&str, Option<&str>) {
    match s.split_once(':') {
        Some((name, rest)) => (name.trim(), Some(rest.trim())),
        None => (s.trim(), None),
    }
}

fn parse_germs(s: &str) -> Result<GermLaw, String> {
    match split_law(s) {
        ("poisson", Some(v)) => Ok(GermLaw::Poisson {
            intensity: v.parse().map_err(|e| format!("intensity: {e}"))?,
        }),
        ("binomial", Some(v)) => {
            Ok(GermLaw::Binomial { n: v.parse().map_err(|e| format!("count: {e}"))? })
        }
        _ => Err(format!("germs must be poisson:INTENSITY or binomial:N, got {s:?}")),
    }
}

fn parse_births(s: &str) -> Result<BirthLaw, String> {
    match split_law(s) {
        ("constant", None) => Ok(BirthLaw::Constant),
        ("uniform", Some(v)) => {
            Ok(BirthLaw::Uniform { t_max: v.parse().map_err(|e| format!("t_max: {e}"))? })
        }
        ("exponential", Some(v)) => {
            Ok(BirthLaw::Exponential { rate: v.parse().map_err(|e| format!("rate: {e}"))? })
        }
        _ => Err(format!(
            "births must be constant, uniform:T_MAX, or exponential:RATE, got {s:?}"
        )),
    }
}

fn parse_shapes(s: &str) -> Result<ShapeLaw, String> {
    match split_law(s) {
        ("ball", None) => Ok(ShapeLaw::UnitBall),
        ("ball-uniform", Some(v)) => {
            Ok(ShapeLaw::BallUniform { c: v.parse().map_err(|e| format!("c: {e}"))? })
        }
        ("polygon-regular", Some(v)) => Ok(ShapeLaw::RegularPolygon {
            sides: v.parse().map_err(|e| format!("sides: {e}"))?,
        }),
        ("square", half) => {
            let h: f64 = match half {
                Some(v) => v.parse().map_err(|e| format!("half width: {e}"))?,
                None => 1.0,
            };
            if !(h > 0.0) || !h.is_finite() {
                return Err("square half width must be positive".to_owned());
            }
            Ok(ShapeLaw::FixedPolygon {
                vertices: vec![[-h, -h], [h, -h], [h, h], [-h, h]],
            })
        }
        ("polygon", Some(v)) => {
            let mut vertices = Vec::new();
            for part in v.split(';') {
                let nums: Vec<&str> = part.split_whitespace().collect();
                if nums.len() != 2 {
                    return Err(format!("polygon vertex needs X Y, got {part:?}"));
                }
                let x = nums[0].parse().map_err(|e| format!("vertex x: {e}"))?;
                let y = nums[1].parse().map_err(|e| format!("vertex y: {e}"))?;
                vertices.push([x, y]);
            }
            Ok(ShapeLaw::FixedPolygon { vertices })
        }
        _ => Err(format!(
            "shapes must be ball, ball-uniform:C, polygon-regular:SIDES, square[:H], or polygon:X Y;..., got {s:?}"
        )),
    }
}

fn parse_functional(h: &str, f: &str) -> Result<FunctionalSpec, String> {
    let h = match split_law(h) {
        ("volume", None) => HVariant::Volume,
        ("count", None) => HVariant::Count,
        ("power", Some(v)) => {
            let parts: Vec<&str> = v.split(':').collect();
            if parts.len() != 2 {
                return Err(format!("power needs ALPHA:BETA, got {v:?}"));
            }
            HVariant::Power {
                alpha: parts[0].parse().map_err(|e| format!("alpha: {e}"))?,
                beta: parts[1].parse().map_err(|e| format!("beta: {e}"))?,
            }
        }
        _ => return Err(format!("h must be volume, count, or power:ALPHA:BETA, got {h:?}")),
    };
    let f = match split_law(f) {
        ("one", None) => Weight::One,
        ("coordinate", Some(v)) => {
            Weight::Coordinate { axis: v.parse().map_err(|e| format!("axis: {e}"))? }
        }
        ("box", Some(v)) => {
            let Some((lo, hi)) = v.split_once(':') else {
                return Err(format!("box needs L1,..:H1,.., got {v:?}"));
            };
            Weight::SubBox { lo: parse_f64_list(lo)?, hi: parse_f64_list(hi)? }
        }
        _ => {
            return Err(format!(
                "f must be one, coordinate:AXIS, or box:L1,..:H1,.., got {f:?}"
            ))
        }
    };
    Ok(FunctionalSpec { h, f })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_file_round_trips_through_the_parser() {
        let text = "\
# comment line
dimension = 2
window = 0, 0, 10, 10   # inline comment
germs = poisson:1.5
births = uniform:10
shapes = ball-uniform:2
seed = 42
";
        let pairs = parse_kv_text(text).unwrap();
        let spec = spec_from_pairs(&pairs).unwrap();
        assert_eq!(spec.dimension, 2);
        assert_eq!(spec.window.hi(), &[10.0, 10.0]);
        assert_eq!(spec.germs, GermLaw::Poisson { intensity: 1.5 });
        assert_eq!(spec.births, BirthLaw::Uniform { t_max: 10.0 });
        assert_eq!(spec.shapes, ShapeLaw::BallUniform { c: 2.0 });
        assert_eq!(spec.seed, 42);
    }

    #[test]
    fn later_pairs_override_earlier_ones() {
        let mut pairs = parse_kv_text("dimension = 2\nwindow = 0,0,4,4\ngerms = binomial:5\n")
            .unwrap();
        pairs.push(("seed".to_owned(), "9".to_owned()));
        pairs.push(("germs".to_owned(), "binomial:7".to_owned()));
        let spec = spec_from_pairs(&pairs).unwrap();
        assert_eq!(spec.germs, GermLaw::Binomial { n: 7 });
        assert_eq!(spec.seed, 9);
    }

    #[test]
    fn unknown_keys_and_short_windows_are_rejected() {
        let pairs = parse_kv_text("dimension = 2\nwindow = 0,0,4,4\ngerms = poisson:1\nwibble = 3\n").unwrap();
        assert!(spec_from_pairs(&pairs).unwrap_err().contains("wibble"));
        let pairs = parse_kv_text("dimension = 3\nwindow = 0,0,4,4\ngerms = poisson:1\n").unwrap();
        assert!(spec_from_pairs(&pairs).unwrap_err().contains("6 numbers"));
    }

    #[test]
    fn shape_sugar_expands_to_fixed_polygons() {
        let ShapeLaw::FixedPolygon { vertices } = parse_shapes("square:1.5").unwrap() else {
            panic!("square should become a fixed polygon");
        };
        assert_eq!(vertices.len(), 4);
        assert_eq!(vertices[2], [1.5, 1.5]);
        let ShapeLaw::FixedPolygon { vertices } =
            parse_shapes("polygon:0 0;2 0;1 2").unwrap() else {
            panic!("explicit vertex list should parse");
        };
        assert_eq!(vertices, vec![[0.0, 0.0], [2.0, 0.0], [1.0, 2.0]]);
    }

    #[test]
    fn functional_strings_parse_into_specs() {
        let f = parse_functional("power:2:1", "box:0,0:0.5,0.5").unwrap();
        assert_eq!(f.h, HVariant::Power { alpha: 2.0, beta: 1.0 });
        assert_eq!(
            f.f,
            Weight::SubBox { lo: vec![0.0, 0.0], hi: vec![0.5, 0.5] }
        );
        assert!(parse_functional("volume", "one").is_ok());
        assert!(parse_functional("power:1", "one").is_err());
        assert!(parse_functional("volume", "disc").is_err());
    }

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(CmdError::Violation("x".into()).code(), 1);
        assert_eq!(CmdError::Config("x".into()).code(), 2);
        assert_eq!(CmdError::Degenerate("x".into()).code(), 3);
        assert_eq!(CmdError::Regime("x".into()).code(), 4);
    }
}
