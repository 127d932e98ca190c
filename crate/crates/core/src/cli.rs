//! Command-line front end: configuration, the five commands, file I/O,
//! and plot-data emission (CSV only — no rendering).
//!
//! Outputs are deterministic: the same config and inputs produce byte
//! identical files, and every manifest embeds the config hash.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::measures::{parse_measure, serialize_measure, TraceTriple};
use crate::representation::{GridSpec, SolutionField};
use crate::traces::{extract_traces, ExtractionSchedule, TimeBins};
use crate::verify::{self, RoundtripSettings, SuiteReport};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Domain description as it appears in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Interval { bounds: (f64, f64), epsilon0: f64 },
    Rectangle { x: (f64, f64), y: (f64, f64), epsilon0: f64 },
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain> {
        match self {
            DomainSpec::Interval { bounds, epsilon0 } => {
                Domain::interval(bounds.0, bounds.1, *epsilon0)
            }
            DomainSpec::Rectangle { x, y, epsilon0 } => Domain::rectangle(*x, *y, *epsilon0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub kernel: f64,
    pub quadrature: f64,
    pub acceptance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub epsilon0: f64,
    pub t0: f64,
    pub levels: usize,
    pub bins: usize,
    pub richardson: bool,
}

/// Run configuration, read from a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub domain: DomainSpec,
    pub horizon: f64,
    pub tolerances: Tolerances,
    pub schedule: ScheduleSpec,
    pub grid: GridSpec,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            domain: DomainSpec::Interval {
                bounds: (0.0, std::f64::consts::PI),
                epsilon0: 0.3,
            },
            horizon: 1.0,
            tolerances: Tolerances { kernel: 1e-10, quadrature: 1e-8, acceptance: 1e-3 },
            schedule: ScheduleSpec { epsilon0: 0.3, t0: 0.05, levels: 8, bins: 16, richardson: true },
            grid: GridSpec { nx: 64, nt: 64, t_min: 0.01, t_max: 1.0 },
            seed: 42,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Schema(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Schema(format!("config {}: {e}", path.display())))?;
        if cfg.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported config schema_version {}",
                cfg.schema_version
            )));
        }
        cfg.apply_env_overrides()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// CALOTRACE_TOL_SCALE multiplies every tolerance, for loosening or
    /// tightening a whole run without editing the config.
    pub fn apply_env_overrides(&mut self) -> Result<()> {
        if let Ok(scale) = std::env::var("CALOTRACE_TOL_SCALE") {
            let s: f64 = scale
                .parse()
                .map_err(|_| Error::Schema(format!("CALOTRACE_TOL_SCALE={scale} is not a number")))?;
            if !(s > 0.0) {
                return Err(Error::Schema("CALOTRACE_TOL_SCALE must be positive".into()));
            }
            self.tolerances.kernel *= s;
            self.tolerances.quadrature *= s;
            self.tolerances.acceptance *= s;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.build()?;
        let t = &self.tolerances;
        if !(t.kernel > 0.0 && t.quadrature > 0.0 && t.acceptance > 0.0) {
            return Err(Error::Schema("all tolerances must be positive".into()));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::Schema("horizon must be positive".into()));
        }
        self.extraction_schedule()?.validate()?;
        Ok(())
    }

    pub fn extraction_schedule(&self) -> Result<ExtractionSchedule> {
        let mut s =
            ExtractionSchedule::geometric(self.schedule.epsilon0, self.schedule.t0, self.schedule.levels)?;
        s.richardson = self.schedule.richardson;
        Ok(s)
    }

    pub fn time_bins(&self) -> TimeBins {
        TimeBins {
            t_min: 0.05 * self.horizon,
            t_max: 0.95 * self.horizon,
            count: self.schedule.bins,
        }
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        hex_string(&hasher.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

/// Provenance record written next to every output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    /// Claim identifiers for the quantities the outputs contain.
    pub anchors: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl Manifest {
    fn new(command: &str, config: &RunConfig, anchors: &[&str]) -> Manifest {
        Manifest {
            tool: "calotrace".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash: config.hash(),
            seed: config.seed,
            anchors: anchors.iter().map(|s| s.to_string()).collect(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }
}

/// What a command produced; the caller maps it onto a process exit code.
#[derive(Debug)]
pub struct CommandOutcome {
    pub report: Option<SuiteReport>,
    pub files: Vec<PathBuf>,
    /// Extraction diagnostics failed to converge (traces command).
    pub non_convergent: bool,
}

/// Exit codes: 0 pass, 1 check failure, 2 usage/schema error,
/// 3 tolerance unachievable.
pub fn exit_code_for(outcome: &Result<CommandOutcome>, strict: bool) -> i32 {
    match outcome {
        Ok(out) => {
            if let Some(report) = &out.report {
                if report.any_failed() {
                    return 1;
                }
                if report.any_unachievable() {
                    return if strict { 1 } else { 3 };
                }
            }
            if out.non_convergent {
                return 1;
            }
            0
        }
        Err(Error::Schema(_)) | Err(Error::Io(_)) | Err(Error::Json(_)) => 2,
        Err(Error::ToleranceUnachievable(_)) => 3,
        Err(_) => 2,
    }
}

fn write_deterministic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

fn read_triple(path: &Path) -> Result<TraceTriple> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Schema(format!("cannot read triple {}: {e}", path.display())))?;
    parse_measure(&text)
}

fn float(v: f64) -> String {
    // Shortest round-trip decimal: deterministic and exact.
    format!("{v}")
}

/// `eval`: evaluate the triple's field on the configured grid; write
/// solution CSV and manifest.
pub fn cmd_eval(config: &RunConfig, triple_path: &Path, out_dir: &Path) -> Result<CommandOutcome> {
    let domain = config.domain.build()?;
    let triple = read_triple(triple_path)?;
    triple.check_admissible(&domain)?;
    if (triple.horizon - config.horizon).abs() > 1e-12 {
        return Err(Error::Schema(format!(
            "triple horizon {} does not match config horizon {}",
            triple.horizon, config.horizon
        )));
    }
    let field = SolutionField::from_triple(domain, triple, config.tolerances.quadrature)?
        .evaluate_on_grid(&config.grid)?;
    let cache = field.grid_cache().expect("grid evaluation populates the cache");

    let mut csv = String::from("x,t,u,err\n");
    for (i, &t) in cache.ts.iter().enumerate() {
        for (j, &x) in cache.xs.iter().enumerate() {
            let idx = i * cache.xs.len() + j;
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                float(x),
                float(t),
                float(cache.values[idx]),
                float(cache.errors[idx])
            );
        }
    }
    let csv_path = out_dir.join("solution.csv");
    write_deterministic(&csv_path, &csv)?;

    let mut manifest = Manifest::new("eval", config, &["representation-formula"]);
    manifest.inputs.push(triple_path.display().to_string());
    manifest.outputs.push("solution.csv".into());
    let manifest_path = out_dir.join("manifest.json");
    write_deterministic(&manifest_path, &serde_json::to_string_pretty(&manifest)?)?;

    Ok(CommandOutcome { report: None, files: vec![csv_path, manifest_path], non_convergent: false })
}

/// `traces`: extract the trace triple of the field named by the input
/// triple; write the estimated measures plus convergence diagnostics.
pub fn cmd_traces(config: &RunConfig, triple_path: &Path, out_dir: &Path) -> Result<CommandOutcome> {
    let domain = config.domain.build()?;
    let triple = read_triple(triple_path)?;
    let field = SolutionField::from_triple(domain, triple, config.tolerances.quadrature)?;
    let sched = config.extraction_schedule()?;
    let report = extract_traces(
        &field,
        &sched,
        config.time_bins(),
        65,
        config.tolerances.quadrature.max(1e-9),
        0.25,
    )?;

    let report_path = out_dir.join("trace_report.json");
    write_deterministic(&report_path, &serde_json::to_string_pretty(&report)?)?;

    // Convergence tables as CSV: component, bin, level parameter, value.
    let mut csv = String::from("component,bin,epsilon,value\n");
    for (label, tables) in &report.diagnostics.nu_tables {
        for (bin, table) in tables.iter().enumerate() {
            for (eps, value) in table {
                let _ = writeln!(csv, "{label},{bin},{},{}", float(*eps), float(*value));
            }
        }
    }
    let csv_path = out_dir.join("diagnostics.csv");
    write_deterministic(&csv_path, &csv)?;

    let mut manifest =
        Manifest::new("traces", config, &["lateral-trace-identity", "green-potential-decomposition"]);
    manifest.inputs.push(triple_path.display().to_string());
    manifest.outputs.push("trace_report.json".into());
    manifest.outputs.push("diagnostics.csv".into());
    let manifest_path = out_dir.join("manifest.json");
    write_deterministic(&manifest_path, &serde_json::to_string_pretty(&manifest)?)?;

    Ok(CommandOutcome {
        report: None,
        files: vec![report_path, csv_path, manifest_path],
        non_convergent: !report.diagnostics.converged,
    })
}

/// `roundtrip`: full both-directions comparison for the given triple.
pub fn cmd_roundtrip(config: &RunConfig, triple_path: &Path, out_dir: &Path) -> Result<CommandOutcome> {
    let domain = config.domain.build()?;
    let triple = read_triple(triple_path)?;
    let mut settings = RoundtripSettings::standard(config.horizon);
    settings.schedule = config.extraction_schedule()?;
    settings.bins = config.time_bins();
    settings.eval_tol = config.tolerances.quadrature;
    let mut report = verify::roundtrip(&domain, &triple, &settings)?;
    report.canonicalize();
    write_suite(config, "roundtrip", &report, triple_path, out_dir)
}

/// `oracle-compare`: representation formula vs the finite-difference
/// oracle at seeded probes.
pub fn cmd_oracle_compare(
    config: &RunConfig,
    triple_path: &Path,
    out_dir: &Path,
) -> Result<CommandOutcome> {
    let domain = config.domain.build()?;
    let triple = read_triple(triple_path)?;
    if config.tolerances.acceptance < 1e-12 {
        return Err(Error::ToleranceUnachievable(format!(
            "acceptance tolerance {} is below the oracle's discretization budget",
            config.tolerances.acceptance
        )));
    }
    let mut report = verify::oracle_compare(&domain, &triple, 256, config.seed, 20, config.tolerances.acceptance)?;
    report.canonicalize();
    write_suite(config, "oracle-compare", &report, triple_path, out_dir)
}

/// `kernel-check`: kernel identity suite plus a probe-table dump.
pub fn cmd_kernel_check(config: &RunConfig, out_dir: &Path) -> Result<CommandOutcome> {
    let domain = config.domain.build()?;
    if config.tolerances.acceptance < 1e-13 {
        return Err(Error::ToleranceUnachievable(format!(
            "acceptance tolerance {} is below the kernel error estimates",
            config.tolerances.acceptance
        )));
    }
    let mut report = verify::kernel_identity_suite(
        &domain,
        config.seed,
        100,
        config.tolerances.acceptance.min(1e-8),
    )?;
    report.canonicalize();

    // Probe table for plotting.
    let kernels = crate::kernels::KernelEvaluator::new(domain).with_tolerance(config.tolerances.kernel);
    let (a, b) = domain.interval_bounds()?;
    let mut csv = String::from("x,y,tau,value,error\n");
    for i in 1..8 {
        for j in 1..8 {
            for tau in [0.01, 0.05, 0.2, 1.0] {
                let x = a + (b - a) * i as f64 / 8.0;
                let y = a + (b - a) * j as f64 / 8.0;
                let v = kernels.heat_green(x.into(), tau, y.into(), 0.0)?;
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    float(x),
                    float(y),
                    float(tau),
                    float(v.value),
                    float(v.error)
                );
            }
        }
    }
    let csv_path = out_dir.join("kernel_probes.csv");
    write_deterministic(&csv_path, &csv)?;

    let mut outcome = write_suite_inner(config, "kernel-check", &report, None, out_dir)?;
    outcome.files.push(csv_path);
    Ok(outcome)
}

fn write_suite(
    config: &RunConfig,
    command: &str,
    report: &SuiteReport,
    triple_path: &Path,
    out_dir: &Path,
) -> Result<CommandOutcome> {
    write_suite_inner(config, command, report, Some(triple_path), out_dir)
}

fn write_suite_inner(
    config: &RunConfig,
    command: &str,
    report: &SuiteReport,
    triple_path: Option<&Path>,
    out_dir: &Path,
) -> Result<CommandOutcome> {
    let json_path = out_dir.join("suite_report.json");
    write_deterministic(&json_path, &serde_json::to_string_pretty(report)?)?;
    let anchors: Vec<&str> = report.entries.iter().map(|e| e.anchor.as_str()).collect();
    let mut manifest = Manifest::new(command, config, &anchors);
    if let Some(p) = triple_path {
        manifest.inputs.push(p.display().to_string());
    }
    manifest.outputs.push("suite_report.json".into());
    let manifest_path = out_dir.join("manifest.json");
    write_deterministic(&manifest_path, &serde_json::to_string_pretty(&manifest)?)?;
    Ok(CommandOutcome {
        report: Some(report.clone()),
        files: vec![json_path, manifest_path],
        non_convergent: false,
    })
}

/// Write a fixture triple file (used by docs and tests; the measure
/// schema is the on-disk format for all triples).
pub fn write_triple(path: &Path, triple: &TraceTriple) -> Result<()> {
    write_deterministic(path, &serialize_measure(triple)?)
}
