//! Run configuration, figure presets and the file outputs of a run.
//!
//! Config files are UTF-8 `key = value` lines; `#` starts a comment. Initial
//! data is written as a comma-separated list of terms, for example
//! `initial.Omega = sin:1:1, cos:1:4, const:5`, where a term reads
//! `shape:amplitude:wavenumber[:phase]`.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::diagnostics::{linear_growth_fit, record, spectral_tail, DiagnosticsRecord, GrowthFit, TIMESERIES_HEADER};
use crate::error::{Error, Result};
use crate::models::{physical_fields, MhdState, ModelKind, ModelSpec};
use crate::spectral::{make_grid, FilterSpec, Gauge, Grid, SpectralField};
use crate::timestepper::{advance, Direction, StepControls, StepSize};

pub const DEFAULT_BKM_THRESHOLD: f64 = 1e6;
pub const SNAPSHOT_HEADER: &str = "x,Omega,omega,p,m,u,B,ux,Bx";
/// Environment variable that replaces the configured output directory.
pub const OUT_ENV: &str = "VORT1D_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
}

impl Preset {
    pub const NAMES: [&'static str; 3] = ["fig2", "fig3", "fig4"];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
        }
    }

    pub fn model(self) -> ModelSpec {
        match self {
            Preset::Fig2 => ModelSpec::mhd1d(1.0),
            Preset::Fig3 => ModelSpec::mhd1d(-1.0),
            Preset::Fig4 => ModelSpec::osw(1.0),
        }
    }

    pub fn initial(self) -> InitialSpec {
        match self {
            Preset::Fig2 | Preset::Fig3 => InitialSpec {
                omega_p: FieldSpec::new(vec![Term::sin(1.0, 1), Term::cos(1.0, 4)], 5.0),
                omega_m: FieldSpec::new(vec![Term::sin(1.0, 2)], 2.0),
            },
            Preset::Fig4 => InitialSpec {
                omega_p: FieldSpec::default(),
                omega_m: FieldSpec::new(vec![Term::sin(1.0, 1), Term::sin(0.1, 2)], 0.0),
            },
        }
    }

    pub fn n(self) -> usize {
        12800
    }

    pub fn t_end(self) -> f64 {
        match self {
            Preset::Fig2 | Preset::Fig3 => 4.0,
            Preset::Fig4 => 10.0,
        }
    }

    fn notes(self, gauge: Gauge) -> Vec<String> {
        let gauge = match gauge {
            Gauge::ZeroMean => "zero-mean".to_string(),
            Gauge::PointValue(x) => format!("point value p(t,{x}) = m(t,{x}) = 0"),
        };
        match self {
            Preset::Fig2 => vec![format!("gauge: {gauge}")],
            Preset::Fig3 => vec![
                format!("gauge: {gauge}"),
                "growth comparison: the fitted slope of linf_ux is expected to exceed the fig2 (a = 1) slope".into(),
            ],
            Preset::Fig4 => vec![
                format!("gauge: {gauge}"),
                "De Gregorio model; spectral_tail should stay small (no blow-up indicator)".into(),
            ],
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            other => Err(format!("unknown preset `{other}`; valid presets: {}", Self::NAMES.join(", "))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Sin,
    Cos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub amplitude: f64,
    pub wavenumber: u32,
    pub phase: f64,
    pub shape: Shape,
}

impl Term {
    pub fn sin(amplitude: f64, wavenumber: u32) -> Self {
        Term { amplitude, wavenumber, phase: 0.0, shape: Shape::Sin }
    }

    pub fn cos(amplitude: f64, wavenumber: u32) -> Self {
        Term { amplitude, wavenumber, phase: 0.0, shape: Shape::Cos }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        let arg = self.wavenumber as f64 * x + self.phase;
        self.amplitude
            * match self.shape {
                Shape::Sin => arg.sin(),
                Shape::Cos => arg.cos(),
            }
    }
}

/// A trigonometric polynomial: a sum of terms plus a constant.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FieldSpec {
    pub terms: Vec<Term>,
    pub offset: f64,
}

impl FieldSpec {
    pub fn new(terms: Vec<Term>, offset: f64) -> Self {
        FieldSpec { terms, offset }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.offset + self.terms.iter().map(|t| t.eval(x)).sum::<f64>()
    }

    pub fn max_wavenumber(&self) -> u32 {
        self.terms.iter().map(|t| t.wavenumber).max().unwrap_or(0)
    }

    pub fn sample(&self, grid: &std::sync::Arc<Grid>) -> SpectralField {
        SpectralField::from_fn(grid, |x| self.eval(x))
    }
}

impl FromStr for FieldSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let mut spec = FieldSpec::default();
        for raw in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let parts: Vec<&str> = raw.split(':').map(str::trim).collect();
            let num = |i: usize| -> std::result::Result<f64, String> {
                parts[i].parse::<f64>().map_err(|_| format!("`{}` in term `{raw}` is not a number", parts[i]))
            };
            match parts[0] {
                "const" if parts.len() == 2 => spec.offset += num(1)?,
                "sin" | "cos" if parts.len() == 3 || parts.len() == 4 => {
                    let wavenumber = parts[2]
                        .parse::<u32>()
                        .map_err(|_| format!("wavenumber `{}` in term `{raw}` is not a nonnegative integer", parts[2]))?;
                    spec.terms.push(Term {
                        amplitude: num(1)?,
                        wavenumber,
                        phase: if parts.len() == 4 { num(3)? } else { 0.0 },
                        shape: if parts[0] == "sin" { Shape::Sin } else { Shape::Cos },
                    });
                }
                _ => {
                    return Err(format!(
                        "bad term `{raw}`; expected sin:amp:k[:phase], cos:amp:k[:phase] or const:c"
                    ))
                }
            }
        }
        Ok(spec)
    }
}

/// Initial vorticities. For the OSW family only `omega_m` is used.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InitialSpec {
    pub omega_p: FieldSpec,
    pub omega_m: FieldSpec,
}

impl InitialSpec {
    pub fn state(&self, grid: &std::sync::Arc<Grid>, kind: ModelKind) -> MhdState {
        match kind {
            ModelKind::Osw => MhdState::scalar(self.omega_m.sample(grid), 0.0),
            _ => MhdState {
                omega_p: self.omega_p.sample(grid),
                omega_m: self.omega_m.sample(grid),
                time: 0.0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub n: usize,
    pub controls: StepControls,
    pub initial: InitialSpec,
    pub snapshot_times: Vec<f64>,
    pub out_dir: PathBuf,
    pub preset: Option<Preset>,
    /// A BKM integrand above this value aborts the run as blow-up suspected.
    pub bkm_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelSpec::mhd1d(1.0),
            n: 256,
            controls: StepControls::default(),
            initial: InitialSpec::default(),
            snapshot_times: Vec::new(),
            out_dir: PathBuf::from("out"),
            preset: None,
            bkm_threshold: DEFAULT_BKM_THRESHOLD,
        }
    }
}

impl RunConfig {
    /// Configuration of a figure preset with its full-scale `n` and `t_end`.
    pub fn preset(preset: Preset) -> Self {
        let mut cfg = RunConfig::default();
        cfg.apply_preset(preset);
        cfg.n = preset.n();
        cfg.controls.t_end = preset.t_end();
        cfg
    }

    fn apply_preset(&mut self, preset: Preset) {
        let m = preset.model();
        self.model.kind = m.kind;
        self.model.a = m.a;
        self.initial = preset.initial();
        self.preset = Some(preset);
    }

    pub fn initial_state(&self) -> Result<MhdState> {
        Ok(self.initial.state(&make_grid(self.n)?, self.model.kind))
    }
}

pub const CONFIG_KEYS: [&str; 20] = [
    "model",
    "a",
    "n",
    "dt",
    "cfl",
    "t_end",
    "filter.enabled",
    "filter.alpha",
    "filter.order",
    "gauge",
    "gauge.point",
    "full_model_dedup",
    "snapshot_times",
    "out_dir",
    "preset",
    "direction",
    "nan_abort",
    "bkm_threshold",
    "initial.Omega",
    "initial.omega",
];

struct Entry {
    key: String,
    value: String,
    line: usize,
}

fn entries(text: &str) -> Result<Vec<Entry>> {
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::config(content, line, "expected `key = value`"));
        };
        let key = key.trim();
        check_key(key, line)?;
        if out.iter().any(|e| e.key == key) {
            return Err(Error::config(key, line, "key given twice"));
        }
        out.push(Entry {
            key: key.to_string(),
            value: value.trim().to_string(),
            line,
        });
    }
    Ok(out)
}

fn check_key(key: &str, line: usize) -> Result<()> {
    if CONFIG_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(Error::config(key, line, format!("unknown key; valid keys: {}", CONFIG_KEYS.join(", "))))
    }
}

fn parse_value<T: FromStr>(e: &Entry, what: &str) -> Result<T> {
    e.value
        .parse::<T>()
        .map_err(|_| Error::config(&e.key, e.line, format!("`{}` is not {what}", e.value)))
}

fn parse_bool(e: &Entry) -> Result<bool> {
    match e.value.as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::config(&e.key, e.line, format!("`{}` is not a boolean", e.value))),
    }
}

fn parse_real(e: &Entry) -> Result<f64> {
    let v: f64 = parse_value(e, "a number")?;
    if !v.is_finite() {
        return Err(Error::config(&e.key, e.line, "value must be finite"));
    }
    Ok(v)
}

/// Parses a config document. Preset expansion happens after all keys are
/// read, so a preset fixes model, `a` and initial data while explicit `n`,
/// `t_end`, gauge, filter and step keys still apply.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &[])
}

/// Like [`parse_config`], with `overrides` replacing (or adding) keys as if
/// they were written in the document. Errors in overrides report line 0.
pub fn parse_config_with(text: &str, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut list = entries(text)?;
    for (key, value) in overrides {
        let key = key.trim();
        check_key(key, 0)?;
        list.retain(|e| e.key != key);
        list.push(Entry {
            key: key.to_string(),
            value: value.trim().to_string(),
            line: 0,
        });
    }
    let get = |key: &str| list.iter().find(|e| e.key == key);

    let mut cfg = RunConfig::default();
    if let Some(e) = get("model") {
        cfg.model.kind = e.value.parse().map_err(|m: String| Error::config(&e.key, e.line, m))?;
    }
    if let Some(e) = get("a") {
        cfg.model.a = parse_real(e)?;
    }
    if let Some(e) = get("n") {
        cfg.n = parse_value(e, "a grid size")?;
        make_grid_check(cfg.n).map_err(|m| Error::config(&e.key, e.line, m))?;
    }
    match (get("dt"), get("cfl")) {
        (Some(d), Some(c)) => {
            let later = if d.line >= c.line { d } else { c };
            return Err(Error::config(&later.key, later.line, "dt and cfl are mutually exclusive"));
        }
        (Some(e), None) => {
            let dt = parse_real(e)?;
            if dt <= 0.0 {
                return Err(Error::config(&e.key, e.line, "dt must be positive"));
            }
            cfg.controls.step = StepSize::Fixed(dt);
        }
        (None, Some(e)) => {
            let c = parse_real(e)?;
            if c <= 0.0 {
                return Err(Error::config(&e.key, e.line, "cfl must be positive"));
            }
            cfg.controls.step = StepSize::Cfl(c);
        }
        (None, None) => {}
    }
    if let Some(e) = get("t_end") {
        cfg.controls.t_end = parse_real(e)?;
    }
    let mut filter = FilterSpec::default();
    if let Some(e) = get("filter.enabled") {
        filter.enabled = parse_bool(e)?;
    }
    if let Some(e) = get("filter.alpha") {
        filter.alpha = parse_real(e)?;
    }
    if let Some(e) = get("filter.order") {
        filter.order = parse_value(e, "a positive even integer")?;
    }
    if let Err(err) = filter.validate() {
        let e = get("filter.order").or(get("filter.alpha")).expect("defaults are valid");
        return Err(Error::config(&e.key, e.line, err.to_string()));
    }
    cfg.controls.filter = filter;

    let point = match get("gauge.point") {
        Some(e) => Some((parse_real(e)?, e)),
        None => None,
    };
    let point_gauge = |x: f64, line: usize| {
        Gauge::point_value(x).map_err(|m| Error::config("gauge.point", line, m.to_string()))
    };
    cfg.model.gauge = match (get("gauge"), point) {
        (None, None) => Gauge::ZeroMean,
        // a bare gauge.point selects the point gauge
        (None, Some((x, e))) => point_gauge(x, e.line)?,
        (Some(g), None) if g.value == "zero-mean" => Gauge::ZeroMean,
        (Some(g), Some((_, e))) if g.value == "zero-mean" => {
            return Err(Error::config(&e.key, e.line, "gauge.point needs gauge = point"))
        }
        (Some(g), p) if g.value == "point" => point_gauge(p.map_or(0.0, |p| p.0), p.map_or(g.line, |p| p.1.line))?,
        (Some(g), _) => {
            return Err(Error::config(&g.key, g.line, format!("`{}` is not a gauge; use zero-mean or point", g.value)))
        }
    };
    if let Some(e) = get("full_model_dedup") {
        cfg.model.full_model_dedup = parse_bool(e)?;
    }
    if let Some(e) = get("direction") {
        cfg.controls.direction = match e.value.as_str() {
            "forward" => Direction::Forward,
            "backward" => Direction::Backward,
            _ => return Err(Error::config(&e.key, e.line, "direction is forward or backward")),
        };
    }
    if let Some(e) = get("nan_abort") {
        cfg.controls.nan_abort = parse_bool(e)?;
    }
    if let Some(e) = get("bkm_threshold") {
        cfg.bkm_threshold = parse_real(e)?;
        if cfg.bkm_threshold <= 0.0 {
            return Err(Error::config(&e.key, e.line, "threshold must be positive"));
        }
    }
    if let Some(e) = get("out_dir") {
        if e.value.is_empty() {
            return Err(Error::config(&e.key, e.line, "empty path"));
        }
        cfg.out_dir = PathBuf::from(&e.value);
    }
    for (key, slot) in [("initial.Omega", 0), ("initial.omega", 1)] {
        if let Some(e) = get(key) {
            let f: FieldSpec = e.value.parse().map_err(|m: String| Error::config(&e.key, e.line, m))?;
            if slot == 0 {
                cfg.initial.omega_p = f;
            } else {
                cfg.initial.omega_m = f;
            }
        }
    }

    if let Some(e) = get("preset") {
        let preset: Preset = e.value.parse().map_err(|m: String| Error::config(&e.key, e.line, m))?;
        cfg.apply_preset(preset);
        if get("n").is_none() {
            cfg.n = preset.n();
        }
        if get("t_end").is_none() {
            cfg.controls.t_end = preset.t_end();
        }
    }

    let reach = (cfg.controls.t_end) * cfg.controls.direction.sign();
    if reach < 0.0 {
        let e = get("t_end").or(get("direction")).expect("default t_end is forward");
        return Err(Error::config(&e.key, e.line, "t_end is not reachable in the chosen direction"));
    }
    for (key, f) in [("initial.Omega", &cfg.initial.omega_p), ("initial.omega", &cfg.initial.omega_m)] {
        if f.max_wavenumber() as usize >= cfg.n / 2 {
            let line = get(key).or(get("n")).map_or(0, |e| e.line);
            return Err(Error::config(
                key,
                line,
                format!("wavenumber {} is not below n/2 = {}", f.max_wavenumber(), cfg.n / 2),
            ));
        }
    }
    if let Some(e) = get("snapshot_times") {
        cfg.snapshot_times = parse_times(e, cfg.controls.t_end)?;
    }
    Ok(cfg)
}

fn make_grid_check(n: usize) -> std::result::Result<(), String> {
    if n < 4 || n % 2 == 1 {
        Err(Error::GridSize(n).to_string())
    } else {
        Ok(())
    }
}

fn parse_times(e: &Entry, t_end: f64) -> Result<Vec<f64>> {
    let body = e.value.trim().trim_start_matches('[').trim_end_matches(']');
    let mut times = Vec::new();
    for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let t: f64 = part
            .parse()
            .map_err(|_| Error::config(&e.key, e.line, format!("`{part}` is not a number")))?;
        let (lo, hi) = if t_end >= 0.0 { (0.0, t_end) } else { (t_end, 0.0) };
        if !(lo..=hi).contains(&t) {
            return Err(Error::config(&e.key, e.line, format!("time {t} lies outside [{lo}, {hi}]")));
        }
        times.push(t);
    }
    let sign = if t_end >= 0.0 { 1.0 } else { -1.0 };
    if times.windows(2).any(|w| (w[1] - w[0]) * sign <= 0.0) {
        return Err(Error::config(&e.key, e.line, "times must be strictly ordered along the run"));
    }
    Ok(times)
}

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes the nodal values of `s` and its derived fields as CSV.
pub fn write_snapshot(s: &MhdState, spec: &ModelSpec, path: &Path) -> Result<()> {
    s.omega_p.ensure_finite("Omega", s.time)?;
    s.omega_m.ensure_finite("omega", s.time)?;
    let d = physical_fields(s, spec);
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{SNAPSHOT_HEADER}").map_err(io)?;
    let cols = [
        s.omega_p.values(),
        s.omega_m.values(),
        d.p.values(),
        d.m.values(),
        d.u.values(),
        d.b.values(),
        d.ux.values(),
        d.bx.values(),
    ];
    for (j, x) in s.omega_p.grid().nodes().iter().enumerate() {
        let mut row = fmt_value(*x);
        for c in &cols {
            row.push(',');
            row.push_str(&fmt_value(c[j]));
        }
        writeln!(w, "{row}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a snapshot back into a state at time `time`.
pub fn read_snapshot(path: &Path, time: f64) -> Result<MhdState> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, msg: &str| Error::config("snapshot", line, msg.to_string());
    let mut lines = text.lines();
    if lines.next() != Some(SNAPSHOT_HEADER) {
        return Err(bad(1, "unexpected header"));
    }
    let (mut big, mut small) = (Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(i + 2, "malformed number"))?;
        if vals.len() != 9 {
            return Err(bad(i + 2, "expected 9 columns"));
        }
        big.push(vals[1]);
        small.push(vals[2]);
    }
    let grid = make_grid(big.len())?;
    MhdState::new(SpectralField::from_values(&grid, big)?, SpectralField::from_values(&grid, small)?, time)
}

pub fn snapshot_name(index: usize, t: f64) -> String {
    format!("snapshot_{index:03}_t{t:.6}.csv")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    NumericalFailure,
    BlowUpSuspected,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Ok => 0,
            RunStatus::NumericalFailure => 3,
            RunStatus::BlowUpSuspected => 4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub status: RunStatus,
    pub exit_code: i32,
    pub message: Option<String>,
    pub failure_time: Option<f64>,
    pub preset: Option<Preset>,
    pub model: ModelSpec,
    pub n: usize,
    pub controls: StepControls,
    pub initial: InitialSpec,
    pub t_final: f64,
    pub steps: usize,
    pub wall_time_s: f64,
    pub final_record: DiagnosticsRecord,
    pub bkm_integral: f64,
    /// Largest max-norm distance from the initial state over all steps.
    pub max_drift: f64,
    pub growth_linf_ux: Option<GrowthFit>,
    pub growth_linf_h: Option<GrowthFit>,
    pub spectral_tail_omega_p: f64,
    pub spectral_tail_omega_m: f64,
    pub snapshots: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: MhdState,
}

fn series(records: &[DiagnosticsRecord], f: impl Fn(&DiagnosticsRecord) -> f64) -> Option<GrowthFit> {
    let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.t.abs(), f(r))).collect();
    linear_growth_fit(&pts).ok()
}

/// Runs `cfg` and writes `timeseries.csv`, the snapshots and `report.json`
/// into `cfg.out_dir`. Numerical trouble is reported through the outcome's
/// status; only I/O and invalid configurations come back as errors.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome> {
    let started = Instant::now();
    let out = &cfg.out_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let s0 = cfg.initial_state()?;
    let spec = cfg.model;

    let mut records = vec![record(&s0, &spec, None)];
    let mut max_drift: f64 = 0.0;
    let mut snapshots = Vec::new();
    let mut state = s0.clone();
    let mut failure: Option<Error> = None;

    let mut targets = cfg.snapshot_times.clone();
    targets.push(cfg.controls.t_end);
    for (i, &target) in targets.iter().enumerate() {
        let is_snapshot = i < cfg.snapshot_times.len();
        let controls = StepControls { t_end: target, ..cfg.controls };
        let threshold = cfg.bkm_threshold;
        let observer = |s: &MhdState| -> Result<()> {
            let r = record(s, &spec, records.last());
            max_drift = max_drift.max(s.max_abs_diff(&s0));
            let integrand = r.bkm_integrand();
            records.push(r);
            if !r.is_finite() {
                return Err(Error::NumericalFailure { quantity: "diagnostics".into(), time: s.time });
            }
            if integrand > threshold {
                return Err(Error::BlowUpSuspected {
                    time: s.time,
                    reason: format!("BKM integrand {integrand:e} exceeds {threshold:e}"),
                });
            }
            Ok(())
        };
        match advance(&state, &spec, &controls, observer) {
            Ok(adv) => state = adv.state,
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
        if is_snapshot {
            let name = snapshot_name(snapshots.len(), target);
            write_snapshot(&state, &spec, &out.join(&name))?;
            snapshots.push(name);
        }
    }

    let (status, message, failure_time) = match &failure {
        None => (RunStatus::Ok, None, None),
        Some(e) => {
            let (status, time) = match e {
                Error::NumericalFailure { time, .. } | Error::StageFailure { time, .. } => (RunStatus::NumericalFailure, *time),
                Error::BlowUpSuspected { time, .. } => (RunStatus::BlowUpSuspected, *time),
                _ => return Err(failure.unwrap()),
            };
            (status, Some(e.to_string()), Some(time))
        }
    };

    write_timeseries(&records, &out.join("timeseries.csv"))?;

    let last = *records.last().expect("initial record");
    let mut notes = cfg.preset.map(|p| p.notes(spec.gauge)).unwrap_or_default();
    if spec.kind == ModelKind::Osw {
        notes.push("single-vorticity model: Omega columns are identically zero".into());
    }
    let report = RunReport {
        status,
        exit_code: status.exit_code(),
        message,
        failure_time,
        preset: cfg.preset,
        model: spec,
        n: cfg.n,
        controls: cfg.controls,
        initial: cfg.initial.clone(),
        t_final: last.t,
        steps: records.len() - 1,
        wall_time_s: started.elapsed().as_secs_f64(),
        final_record: last,
        bkm_integral: last.bkm_integral,
        max_drift,
        growth_linf_ux: series(&records, |r| r.linf_ux),
        growth_linf_h: series(&records, |r| r.bkm_integrand()),
        spectral_tail_omega_p: spectral_tail(&state.omega_p),
        spectral_tail_omega_m: spectral_tail(&state.omega_m),
        snapshots,
        notes,
    };
    let path = out.join("report.json");
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))?;

    Ok(RunOutcome { report, records, final_state: state })
}

pub fn write_timeseries(records: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{TIMESERIES_HEADER}").map_err(io)?;
    for r in records {
        let row: Vec<String> = r.columns().iter().map(|&v| fmt_value(v)).collect();
        writeln!(w, "{}", row.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads `timeseries.csv` back as rows of 14 values.
pub fn read_timeseries(path: &Path) -> Result<Vec<[f64; 14]>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(TIMESERIES_HEADER) {
        return Err(Error::config("timeseries", 1, "unexpected header"));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let vals: Vec<f64> = line
                .split(',')
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::config("timeseries", i + 2, "malformed number"))?;
            vals.try_into()
                .map_err(|_| Error::config("timeseries", i + 2, "expected 14 columns"))
        })
        .collect()
}

/// Applies [`OUT_ENV`] if set.
pub fn out_dir_from_env(cfg: &mut RunConfig) {
    if let Some(dir) = std::env::var_os(OUT_ENV).filter(|d| !d.is_empty()) {
        cfg.out_dir = PathBuf::from(dir);
    }
}

/// Runs several configs in parallel, each writing into `base/<name>`.
/// Results come back in input order.
pub fn sweep(configs: &[(String, RunConfig)], base: &Path) -> Vec<Result<RunOutcome>> {
    use rayon::prelude::*;
    configs
        .par_iter()
        .map(|(name, cfg)| {
            let mut cfg = cfg.clone();
            cfg.out_dir = base.join(name);
            execute(&cfg)
        })
        .collect()
}
