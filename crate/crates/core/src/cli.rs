//! Scenario configuration, presets, execution and export.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CavityConfig;
use crate::modes::{ModeFunction, ModeKind, SpheroidalParams};
use crate::oracle::{inverse_laplace, LaplaceInfo, LaplaceOptions, SpectralFunction};
use crate::pathsum::{simulate, uniform_grid, AmplitudeState, TimeSeries, Truncation};
use crate::quantization::{build_weight_table, QuantizationData};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pathsum,
    Laplace,
    Both,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pathsum" => Ok(Method::Pathsum),
            "laplace" => Ok(Method::Laplace),
            "both" => Ok(Method::Both),
            other => Err(Error::Config(format!("method: expected pathsum, laplace or both, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub eps: f64,
    pub kappa_eg: f64,
    pub gamma_tau: f64,
    pub phase_d: f64,
    pub phase_f: f64,
    /// `(Re b¹, Im b¹, Re b², Im b²)` at `t = 0`; normalised before use.
    pub init: [f64; 4],
    pub method: Method,
    pub tmax: f64,
    pub points: usize,
    /// Defaults to `max(tmax, 1)`.
    pub delay_cutoff: Option<f64>,
    pub weight_floor: f64,
    pub max_classes: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            eps: 0.5,
            kappa_eg: 1e4 * PI,
            gamma_tau: 16.0,
            phase_d: 0.0,
            phase_f: 0.0,
            init: [1.0, 0.0, 0.0, 0.0],
            method: Method::Pathsum,
            tmax: 3.0,
            points: 301,
            delay_cutoff: None,
            weight_floor: 1e-12,
            max_classes: 2_000_000,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: expected a number, got `{v}`")))?;
    if !x.is_finite() {
        return Err(Error::Config(format!("{key}: must be finite, got `{v}`")));
    }
    Ok(x)
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: expected a non-negative integer, got `{v}`")))
}

pub fn parse_init(v: &str) -> Result<[f64; 4]> {
    let parts: Vec<&str> = v.trim().trim_start_matches('[').trim_end_matches(']').split(',').collect();
    if parts.len() != 4 {
        return Err(Error::Config(format!("init: expected \"re1,im1,re2,im2\", got `{v}`")));
    }
    let mut out = [0.0; 4];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = parse_f64("init", p)?;
    }
    Ok(out)
}

impl ScenarioConfig {
    /// Set one field from its textual value.  Keys accept `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let k = key.trim().replace('-', "_");
        match k.as_str() {
            "eps" | "eccentricity" => self.eps = parse_f64(&k, value)?,
            "kappa_eg" => self.kappa_eg = parse_f64(&k, value)?,
            "gamma_tau" => self.gamma_tau = parse_f64(&k, value)?,
            "phase_d" => self.phase_d = parse_f64(&k, value)?,
            "phase_f" => self.phase_f = parse_f64(&k, value)?,
            "init" => self.init = parse_init(value)?,
            "method" => self.method = value.parse()?,
            "tmax" | "t_max" => self.tmax = parse_f64(&k, value)?,
            "points" => self.points = parse_usize(&k, value)?,
            "delay_cutoff" => {
                self.delay_cutoff = match value.trim() {
                    "" | "auto" | "null" => None,
                    v => Some(parse_f64(&k, v)?),
                }
            }
            "weight_floor" => self.weight_floor = parse_f64(&k, value)?,
            "max_classes" => self.max_classes = parse_usize(&k, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn cavity(&self) -> Result<CavityConfig> {
        CavityConfig::new(self.eps, self.kappa_eg, self.gamma_tau, self.phase_d, self.phase_f)
    }

    pub fn initial_state(&self) -> Result<AmplitudeState> {
        let [a, b, c, d] = self.init;
        AmplitudeState::normalized(Complex64::new(a, b), Complex64::new(c, d))
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        uniform_grid(self.tmax, self.points)
    }

    pub fn effective_cutoff(&self) -> f64 {
        self.delay_cutoff.unwrap_or(self.tmax.max(1.0))
    }

    pub fn truncation(&self) -> Truncation {
        Truncation {
            delay_cutoff: self.effective_cutoff(),
            weight_floor: self.weight_floor,
            max_classes: self.max_classes,
        }
    }

    /// Range checks that do not need any numerics.
    pub fn validate(&self) -> Result<()> {
        self.cavity()?;
        self.initial_state()?;
        self.grid()?;
        let cut = self.effective_cutoff();
        if !(cut > 0.0) {
            return Err(Error::Config(format!("delay_cutoff: must be positive, got {cut}")));
        }
        if self.tmax > cut {
            return Err(Error::Config(format!("tmax: {} exceeds the delay cutoff {cut}", self.tmax)));
        }
        if !(self.weight_floor >= 0.0 && self.weight_floor < 1.0) {
            return Err(Error::Config(format!("weight_floor: must lie in [0, 1), got {}", self.weight_floor)));
        }
        if self.max_classes == 0 {
            return Err(Error::Config("max_classes: must be positive".into()));
        }
        Ok(())
    }
}

/// Flat `key = value` lines (`#` comments) or a JSON object.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let trimmed = text.trim_start();
    let mut map = BTreeMap::new();
    if trimmed.starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("JSON config: {e}")))?;
        let obj = v.as_object().ok_or_else(|| Error::Config("JSON config must be an object".into()))?;
        for (k, v) in obj {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Array(a) => a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
                serde_json::Value::Null => String::new(),
                other => other.to_string(),
            };
            map.insert(k.clone(), s);
        }
        return Ok(map);
    }
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        map.insert(k.trim().to_string(), v.trim().trim_matches('"').to_string());
    }
    Ok(map)
}

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    build: fn() -> ScenarioConfig,
}

impl Preset {
    pub fn config(&self) -> ScenarioConfig {
        (self.build)()
    }
}

fn fig2(eps: f64, kappa: f64) -> ScenarioConfig {
    ScenarioConfig {
        eps,
        kappa_eg: kappa,
        tmax: 6.0,
        points: 601,
        ..ScenarioConfig::default()
    }
}

/// `Γτ` for which `τ = 4π/(15 Ω₀)` with `Ω₀ = √(2Γ/τ)`.
pub fn fig3_gamma_tau() -> f64 {
    let w = 4.0 * PI / 15.0;
    0.5 * w * w
}

/// Geometry used for the single-mode comparison: a nearly spherical
/// cavity in the short-wavelength regime with `φ_d + φ_f = π`.
pub fn single_mode_config(gamma_tau: f64) -> ScenarioConfig {
    let omega0 = (2.0 * gamma_tau).sqrt();
    ScenarioConfig {
        eps: 1e-4,
        kappa_eg: 1e4 * PI,
        gamma_tau,
        phase_d: 0.0,
        phase_f: PI,
        tmax: 4.0 * std::f64::consts::SQRT_2 * PI / omega0,
        points: 2001,
        weight_floor: 1e-8,
        ..ScenarioConfig::default()
    }
}

pub fn presets() -> Vec<Preset> {
    vec![
        Preset {
            name: "fig2a",
            description: "eps=1/10, Gamma tau=16, short wavelength (kappa_eg=1e4 pi), atom 1 excited",
            build: || fig2(0.1, 1e4 * PI),
        },
        Preset {
            name: "fig2b",
            description: "eps=1/2, Gamma tau=16, short wavelength (kappa_eg=1e4 pi), atom 1 excited",
            build: || fig2(0.5, 1e4 * PI),
        },
        Preset {
            name: "fig2c",
            description: "eps=1/2, Gamma tau=16, d/lambda=20 and f/lambda=10 (kappa_eg=20 pi)",
            build: || fig2(0.5, 20.0 * PI),
        },
        Preset {
            name: "fig3",
            description: "single-mode regime: eps=1e-4, tau=4 pi/(15 Omega0), phase_d+phase_f=pi",
            build: || single_mode_config(fig3_gamma_tau()),
        },
        Preset {
            name: "parabolic-limit",
            description: "eps=0.95, Gamma tau=16: elongated cavity, cross terms suppressed (qualitative only)",
            build: || fig2(0.95, 1e4 * PI),
        },
        Preset {
            name: "single-atom-decay",
            description: "eps=1/2, Gamma tau=16, t < first photon return: P1=exp(-Gamma t), P2=0",
            build: || ScenarioConfig {
                tmax: 0.45,
                points: 91,
                ..ScenarioConfig::default()
            },
        },
    ]
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .map(|p| p.config())
        .ok_or_else(|| {
            let names: Vec<_> = presets().iter().map(|p| p.name).collect();
            Error::Config(format!("preset: unknown `{name}` (available: {})", names.join(", ")))
        })
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodResult {
    pub series: TimeSeries,
    pub laplace: Option<LaplaceInfo>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutput {
    pub results: Vec<MethodResult>,
    /// `max_t |ΔP|` between the two methods when both ran.
    pub max_discrepancy: Option<f64>,
}

pub fn run_scenario(sc: &ScenarioConfig) -> Result<RunOutput> {
    sc.validate()?;
    let cfg = sc.cavity()?;
    let init = sc.initial_state()?;
    let grid = sc.grid()?;
    let tr = sc.truncation();
    let mut results = Vec::new();
    if matches!(sc.method, Method::Pathsum | Method::Both) {
        results.push(MethodResult {
            series: simulate(&cfg, init, &grid, tr)?,
            laplace: None,
        });
    }
    if matches!(sc.method, Method::Laplace | Method::Both) {
        let sf = SpectralFunction::from_config(&cfg, tr.delay_cutoff, tr.weight_floor)?;
        let (series, info) = inverse_laplace(&sf, init, &grid, LaplaceOptions::default())?;
        results.push(MethodResult { series, laplace: Some(info) });
    }
    let max_discrepancy = match results.as_slice() {
        [a, b] => Some(a.series.max_discrepancy(&b.series)?),
        _ => None,
    };
    Ok(RunOutput { results, max_discrepancy })
}

#[derive(Debug, Serialize)]
struct CavitySummary {
    f_over_d: f64,
    xi_boundary: f64,
    d_over_lambda: f64,
    f_over_lambda: f64,
    gamma_ratio: f64,
}

#[derive(Debug, Serialize)]
struct RunReport<'a> {
    version: &'static str,
    config: &'a ScenarioConfig,
    initial_state: [f64; 4],
    cavity: CavitySummary,
    outputs: Vec<OutputEntry<'a>>,
    max_discrepancy: Option<f64>,
}

#[derive(Debug, Serialize)]
struct OutputEntry<'a> {
    method: &'static str,
    csv: String,
    truncation: &'a Option<crate::pathsum::TruncationInfo>,
    laplace: &'a Option<LaplaceInfo>,
}

fn csv_header(sc: &ScenarioConfig, method: &str) -> Vec<String> {
    vec![
        format!("ellipseqed {VERSION}"),
        format!(
            "method={method} eps={} kappa_eg={} gamma_tau={} phase_d={} phase_f={}",
            sc.eps, sc.kappa_eg, sc.gamma_tau, sc.phase_d, sc.phase_f
        ),
    ]
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Write `<out>.csv` (or `<out>.pathsum.csv` and `<out>.laplace.csv`) and
/// `<out>.json`; returns the paths written.
pub fn write_outputs(sc: &ScenarioConfig, run: &RunOutput, out: &Path) -> Result<Vec<PathBuf>> {
    let cfg = sc.cavity()?;
    let qd = QuantizationData::from_config(&cfg)?;
    let init = sc.initial_state()?;
    let mut written = Vec::new();
    let mut entries = Vec::new();
    for r in &run.results {
        let path = if run.results.len() == 1 {
            with_suffix(out, ".csv")
        } else {
            with_suffix(out, &format!(".{}.csv", r.series.method))
        };
        let mut w = BufWriter::new(File::create(&path)?);
        r.series.write_csv(&mut w, &csv_header(sc, r.series.method))?;
        w.flush()?;
        entries.push(OutputEntry {
            method: r.series.method,
            csv: path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            truncation: &r.series.truncation,
            laplace: &r.laplace,
        });
        written.push(path);
    }
    let report = RunReport {
        version: VERSION,
        config: sc,
        initial_state: [init.b1.re, init.b1.im, init.b2.re, init.b2.im],
        cavity: CavitySummary {
            f_over_d: cfg.f_over_d(),
            xi_boundary: cfg.xi_boundary(),
            d_over_lambda: cfg.d_over_lambda(),
            f_over_lambda: cfg.f_over_lambda(),
            gamma_ratio: qd.gamma_ratio,
        },
        outputs: entries,
        max_discrepancy: run.max_discrepancy,
    };
    let json = with_suffix(out, ".json");
    let mut w = BufWriter::new(File::create(&json)?);
    serde_json::to_writer_pretty(&mut w, &report).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    written.push(json);
    Ok(written)
}

/// Parse `key=a:b:n` into the key and `n` evenly spaced values.
pub fn parse_sweep(spec: &str) -> Result<(String, Vec<f64>)> {
    let err = || Error::Config(format!("sweep: expected key=a:b:n, got `{spec}`"));
    let (key, range) = spec.split_once('=').ok_or_else(err)?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(err());
    }
    let a = parse_f64("sweep", parts[0])?;
    let b = parse_f64("sweep", parts[1])?;
    let n = parse_usize("sweep", parts[2])?;
    if n == 0 {
        return Err(err());
    }
    let vals = if n == 1 {
        vec![a]
    } else {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    };
    Ok((key.trim().to_string(), vals))
}

/// Process exit status for an error: 2 for bad input, 3 for numerical
/// failures, 1 for i/o.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation { .. } | Error::Config(_) | Error::Horizon { .. } | Error::Domain { .. } | Error::Index { .. } => 2,
        Error::Accuracy { .. }
        | Error::Integration { .. }
        | Error::Bracket { .. }
        | Error::Conditioning(_)
        | Error::Resource { .. } => 3,
        Error::Io(_) => 1,
    }
}

#[derive(Parser, Debug)]
#[command(name = "ellipseqed", version, about = "Two atoms exchanging a photon inside an ellipsoidal cavity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate the atomic amplitudes and write CSV + JSON.
    Run(RunArgs),
    /// List the built-in scenarios.
    Presets,
    /// Dump the hop-weight table.
    Weights(WeightsArgs),
    /// Tabulate a radial or angular mode function.
    Modes(ModesArgs),
}

#[derive(Args, Debug, Default, Clone)]
pub struct ScenarioArgs {
    #[arg(long)]
    pub preset: Option<String>,
    /// key=value or JSON file; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub kappa_eg: Option<f64>,
    #[arg(long)]
    pub gamma_tau: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phase_d: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phase_f: Option<f64>,
    /// "re1,im1,re2,im2"
    #[arg(long, allow_hyphen_values = true)]
    pub init: Option<String>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long)]
    pub delay_cutoff: Option<f64>,
    #[arg(long)]
    pub weight_floor: Option<f64>,
    #[arg(long)]
    pub max_classes: Option<usize>,
}

impl ScenarioArgs {
    /// Preset, then config file, then flags.
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let mut file = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("config {}: {e}", p.display())))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        let from_file = file.remove("preset");
        let mut sc = match self.preset.as_deref().or(from_file.as_deref()) {
            Some(name) => preset(name)?,
            None => ScenarioConfig::default(),
        };
        for (k, v) in &file {
            sc.set(k, v)?;
        }
        let num = |sc: &mut ScenarioConfig, k: &str, v: Option<f64>| -> Result<()> {
            if let Some(v) = v {
                sc.set(k, &v.to_string())?;
            }
            Ok(())
        };
        num(&mut sc, "eps", self.eps)?;
        num(&mut sc, "kappa_eg", self.kappa_eg)?;
        num(&mut sc, "gamma_tau", self.gamma_tau)?;
        num(&mut sc, "phase_d", self.phase_d)?;
        num(&mut sc, "phase_f", self.phase_f)?;
        num(&mut sc, "tmax", self.tmax)?;
        num(&mut sc, "delay_cutoff", self.delay_cutoff)?;
        num(&mut sc, "weight_floor", self.weight_floor)?;
        if let Some(v) = &self.init {
            sc.set("init", v)?;
        }
        if let Some(v) = self.points {
            sc.points = v;
        }
        if let Some(v) = self.max_classes {
            sc.max_classes = v;
        }
        if let Some(m) = self.method {
            sc.method = m;
        }
        Ok(sc)
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Output base path; without it a single-method CSV goes to stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=a:b:n, one run per value, written to <out>-<i>
    #[arg(long)]
    pub sweep: Option<String>,
}

#[derive(Args, Debug)]
pub struct WeightsArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    Radial,
    Angular,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeMethodArg {
    Exact,
    Jwkb,
    Ode,
}

#[derive(Args, Debug)]
pub struct ModesArgs {
    #[arg(long, value_enum, default_value = "radial")]
    pub kind: KindArg,
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: ModeMethodArg,
    /// First coordinate (xi for radial, eta for angular)
    #[arg(long, allow_hyphen_values = true)]
    pub from: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub to: f64,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let base = args.scenario.resolve()?;
    match &args.sweep {
        None => {
            base.validate()?;
            if base.method == Method::Both && args.out.is_none() {
                return Err(Error::Config("out: --method both needs an output base path".into()));
            }
            let run = run_scenario(&base)?;
            match &args.out {
                Some(out) => {
                    for p in write_outputs(&base, &run, out)? {
                        eprintln!("wrote {}", p.display());
                    }
                    if let Some(d) = run.max_discrepancy {
                        eprintln!("max discrepancy {d:.3e}");
                    }
                }
                None => {
                    let mut w = open_out(&None)?;
                    let s = &run.results[0].series;
                    s.write_csv(&mut w, &csv_header(&base, s.method))?;
                    w.flush()?;
                }
            }
            Ok(())
        }
        Some(spec) => {
            let (key, vals) = parse_sweep(spec)?;
            let out = args
                .out
                .as_ref()
                .ok_or_else(|| Error::Config("out: --sweep needs an output base path".into()))?;
            for (i, v) in vals.iter().enumerate() {
                let mut sc = base.clone();
                sc.set(&key, &v.to_string())?;
                sc.validate()?;
                let run = run_scenario(&sc)?;
                write_outputs(&sc, &run, &with_suffix(out, &format!("-{i}")))?;
                eprintln!("{key}={v}: done");
            }
            Ok(())
        }
    }
}

fn cmd_weights(args: &WeightsArgs) -> Result<()> {
    let sc = args.scenario.resolve()?;
    let cfg = sc.cavity()?;
    let qd = QuantizationData::from_config(&cfg)?;
    let table = build_weight_table(&cfg, &qd, sc.effective_cutoff(), sc.weight_floor)?;
    let mut w = open_out(&args.out)?;
    table.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_modes(args: &ModesArgs) -> Result<()> {
    let params = SpheroidalParams::new(args.kappa, args.alpha)?;
    let kind = match args.kind {
        KindArg::Radial => ModeKind::RadialF,
        KindArg::Angular => ModeKind::AngularG,
    };
    if args.points < 2 {
        return Err(Error::Config("points: need at least 2".into()));
    }
    let grid: Vec<f64> = (0..args.points)
        .map(|i| args.from + (args.to - args.from) * i as f64 / (args.points - 1) as f64)
        .collect();
    let mf = match args.method {
        ModeMethodArg::Exact => ModeFunction::exact(params, kind)?,
        ModeMethodArg::Jwkb => match kind {
            ModeKind::RadialF => ModeFunction::jwkb(params)?,
            ModeKind::AngularG => return Err(Error::Config("method: jwkb is available for the radial function only".into())),
        },
        ModeMethodArg::Ode => ModeFunction::ode_oracle(params, kind, &grid)?,
    };
    let mut w = open_out(&args.out)?;
    mf.write_csv(&grid, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Presets => {
            let mut w = open_out(&None)?;
            for p in presets() {
                writeln!(w, "{:<18} {}", p.name, p.description)?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Weights(a) => cmd_weights(a),
        Command::Modes(a) => cmd_modes(a),
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("ELLIPSEQED_THREADS") {
        let n = parse_usize("ELLIPSEQED_THREADS", &v)?;
        if n > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Config(format!("ELLIPSEQED_THREADS: {e}")))?;
        }
    }
    Ok(())
}

/// Entry point for the binary; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match configure_threads().and_then(|_| execute(&cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_registry() {
        let names: Vec<_> = presets().iter().map(|p| p.name).collect();
        for n in ["fig2a", "fig2b", "fig2c", "fig3", "parabolic-limit", "single-atom-decay"] {
            assert!(names.contains(&n), "{n}");
        }
        for p in presets() {
            p.config().validate().unwrap();
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn fig_presets_parameters() {
        let a = preset("fig2a").unwrap();
        assert_eq!((a.eps, a.gamma_tau, a.kappa_eg), (0.1, 16.0, 1e4 * PI));
        let c = preset("fig2c").unwrap();
        let cav = c.cavity().unwrap();
        assert!((cav.d_over_lambda() - 20.0).abs() < 1e-12);
        assert!((cav.f_over_lambda() - 10.0).abs() < 1e-12);
        let f = preset("fig3").unwrap();
        let omega0 = (2.0 * f.gamma_tau).sqrt();
        assert!((omega0 - 4.0 * PI / 15.0).abs() < 1e-14);
        let s = (2.0 * (f.phase_d + f.phase_f)).rem_euclid(2.0 * PI);
        assert!(s.min(2.0 * PI - s) < 1e-12);
    }

    #[test]
    fn key_value_and_json_configs() {
        let kv = parse_config_text("# comment\neps = 0.3\nkappa-eg=100\ninit = 0,1,0,0\nmethod=both\n").unwrap();
        let mut sc = ScenarioConfig::default();
        for (k, v) in &kv {
            sc.set(k, v).unwrap();
        }
        assert_eq!((sc.eps, sc.kappa_eg, sc.method), (0.3, 100.0, Method::Both));
        assert_eq!(sc.init, [0.0, 1.0, 0.0, 0.0]);
        let js = parse_config_text(r#"{"eps": 0.2, "init": [1, 0, 1, 0], "method": "laplace", "delay_cutoff": null}"#).unwrap();
        let mut sc2 = ScenarioConfig::default();
        for (k, v) in &js {
            sc2.set(k, v).unwrap();
        }
        assert_eq!((sc2.eps, sc2.method, sc2.delay_cutoff), (0.2, Method::Laplace, None));
        assert_eq!(sc2.init, [1.0, 0.0, 1.0, 0.0]);
        let s = sc2.initial_state().unwrap();
        assert!((s.b1.norm_sqr() + s.b2.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn field_level_errors() {
        let mut sc = ScenarioConfig::default();
        let e = sc.set("eps", "abc").unwrap_err();
        assert!(e.to_string().contains("eps"));
        assert!(sc.set("bogus", "1").is_err());
        assert!(sc.set("init", "1,2").is_err());
        sc.eps = 1.5;
        assert!(matches!(sc.validate(), Err(Error::Validation { field: "eccentricity", .. })));
        let mut sc = ScenarioConfig::default();
        sc.delay_cutoff = Some(1.0);
        assert_eq!(exit_code(&sc.validate().unwrap_err()), 2);
        sc = ScenarioConfig { init: [0.0; 4], ..ScenarioConfig::default() };
        assert_eq!(exit_code(&sc.validate().unwrap_err()), 2);
    }

    #[test]
    fn sweep_spec() {
        let (k, v) = parse_sweep("eps=0.1:0.5:5").unwrap();
        assert_eq!(k, "eps");
        assert_eq!(v.len(), 5);
        assert!((v[4] - 0.5).abs() < 1e-15 && (v[1] - 0.2).abs() < 1e-15);
        assert!(parse_sweep("eps=0.1:0.5").is_err());
        assert!(parse_sweep("eps").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.txt");
        std::fs::write(&p, "preset = fig2a\ngamma_tau = 4\n").unwrap();
        let args = ScenarioArgs { config: Some(p), gamma_tau: Some(2.0), ..Default::default() };
        let sc = args.resolve().unwrap();
        assert_eq!((sc.eps, sc.gamma_tau), (0.1, 2.0));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with_args(["ellipseqed", "run", "--eps", "2"]), 2);
        assert_eq!(main_with_args(["ellipseqed", "run", "--preset", "nothing"]), 2);
        assert_eq!(main_with_args(["ellipseqed", "run", "--method", "both"]), 2);
        assert_eq!(main_with_args(["ellipseqed", "bogus"]), 2);
    }
}
