//! Command implementations behind the `fecam` binary.
//!
//! Every command is a pure function from configuration and input text to
//! output text, so the binary only handles argument parsing and file IO.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fecam::array::{bounds_sweep, search, ArrayDescription, FecamArray, SenseTime};
use fecam::cell::program_analog;
use fecam::config::GlobalConfig;
use fecam::cost::{energy_cross_check, per_bit_comparison, routing_report, CamMode, ComparisonReport};
use fecam::device::{drain_current, vth_from_pulse, WritePulse};
use fecam::encoder::{compile_table, parse_rules, RangeRule, RoutingTable, TableMode};
use fecam::FecamError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Environment variable naming the config file when `--config` is absent.
pub const CONFIG_ENV: &str = "FECAM_CONFIG";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] FecamError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.category(),
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads the config file (if any) and applies `section.field=value` overrides.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<GlobalConfig> {
    let text = match path {
        Some(p) => read_file(p)?,
        None => String::new(),
    };
    GlobalConfig::from_toml_with_overrides(&text, overrides).map_err(|e| match (e, path) {
        (FecamError::Parse { line, msg }, Some(p)) => FecamError::Parse {
            line,
            msg: format!("{}: {msg}", p.display()),
        }
        .into(),
        (e, _) => e.into(),
    })
}

/// Parses `a,b,c` or `start:stop:step` (inclusive).
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("expected a number, got `{s}`")))
    };
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = spec.split(':').collect();
    match parts[..] {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || stop < start {
                return Err(CliError::Usage(format!("bad range `{spec}`")));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|k| start + k as f64 * step).collect())
        }
        [_] => spec.split(',').map(num).collect(),
        _ => Err(CliError::Usage(format!(
            "expected `a,b,c` or `start:stop:step`, got `{spec}`"
        ))),
    }
}

fn parse_sense(spec: &str) -> Result<SenseTime> {
    if spec.eq_ignore_ascii_case("auto") {
        return Ok(SenseTime::Auto);
    }
    if let Some(amps) = spec.strip_suffix('A') {
        return amps
            .parse::<f64>()
            .map(SenseTime::Current)
            .map_err(|_| CliError::Usage(format!("sense current must be a number of amps, got `{spec}`")));
    }
    spec.parse::<f64>().map(SenseTime::Fixed).map_err(|_| {
        CliError::Usage(format!(
            "sense time must be `auto`, seconds, or a current like `25e-9A`, got `{spec}`"
        ))
    })
}

/// Gate sweep points of `transfer` (V).
pub fn gate_sweep(step: f64) -> Vec<f64> {
    let n = (1.2 / step + 1e-9).round() as usize;
    (0..=n).map(|k| k as f64 * step).collect()
}

/// Transfer characteristics after programming with each amplitude.
pub fn cmd_transfer(cfg: &GlobalConfig, amplitudes: &[f64], step: f64) -> Result<String> {
    if !(step > 0.0) {
        return Err(CliError::Usage(format!("gate step must be positive, got {step}")));
    }
    let sweep = gate_sweep(step);
    let mut out = String::from("amplitude_volts,v_gs_volts,i_d_amps\n");
    for &a in amplitudes {
        let vth = vth_from_pulse(&cfg.device, &WritePulse::program(a))?;
        for &vg in &sweep {
            let id = drain_current(&cfg.device, vg, cfg.cell.vdd, vth);
            let _ = writeln!(out, "{a},{vg:.6},{id:.6e}");
        }
    }
    Ok(out)
}

fn parse_queries(text: &str, cols: usize) -> Result<Vec<Vec<f64>>> {
    let mut queries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let q = content
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>().map_err(|_| FecamError::Parse {
                    line,
                    msg: format!("expected a voltage, got `{s}`"),
                })
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if q.len() != cols {
            return Err(FecamError::DimensionMismatch {
                what: format!("query on line {line}"),
                got: q.len(),
                expected: cols,
            }
            .into());
        }
        queries.push(q);
    }
    Ok(queries)
}

pub fn build_array(cfg: &GlobalConfig, array_text: &str) -> Result<FecamArray> {
    let desc = ArrayDescription::parse(array_text)?;
    Ok(desc.build(&cfg.cell, &cfg.device, &cfg.matchline)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutput {
    /// `query,row,match,v_ml_final_volts,sense_time_seconds`.
    pub summary: String,
    /// One `row,t_seconds,v_ml_volts` CSV per query.
    pub traces: Vec<String>,
    pub warnings: Vec<String>,
}

/// Runs every query line of `query_text` against the described array.
pub fn cmd_search(
    cfg: &GlobalConfig,
    array_text: &str,
    query_text: &str,
    sense: &str,
) -> Result<SearchOutput> {
    let arr = build_array(cfg, array_text)?;
    let sense = parse_sense(sense)?;
    let queries = parse_queries(query_text, arr.cols())?;
    let mut summary = String::from("query,row,match,v_ml_final_volts,sense_time_seconds\n");
    let mut traces = Vec::with_capacity(queries.len());
    for (qi, q) in queries.iter().enumerate() {
        let res = search(&arr, q, sense)?;
        let mut trace = String::from("row,t_seconds,v_ml_volts\n");
        for (r, row) in res.rows.iter().enumerate() {
            let _ = writeln!(
                summary,
                "{qi},{r},{},{:.9},{:.6e}",
                row.matched,
                row.final_voltage(),
                res.sense_time
            );
            for (t, v) in &row.trace {
                let _ = writeln!(trace, "{r},{t:.6e},{v:.9}");
            }
        }
        traces.push(trace);
    }
    Ok(SearchOutput {
        summary,
        traces,
        warnings: arr.warnings(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Rows,
    Cols,
    VSl,
}

impl std::str::FromStr for SweepAxis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rows" => Ok(SweepAxis::Rows),
            "cols" => Ok(SweepAxis::Cols),
            "v_sl" | "vsl" => Ok(SweepAxis::VSl),
            other => Err(CliError::Usage(format!(
                "unknown sweep axis `{other}`; supported axes: rows, cols, v_sl"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// Window programmed into every cell for the rows/cols axes and the default v_sl array.
    pub window: (f64, f64),
    pub sense: String,
    /// Optional array description for the v_sl axis.
    pub array_text: Option<String>,
}

fn uniform_array(cfg: &GlobalConfig, rows: usize, cols: usize, window: (f64, f64)) -> Result<FecamArray> {
    let mut arr = FecamArray::new(
        rows,
        cols,
        cfg.cell.clone(),
        cfg.device.clone(),
        cfg.matchline.clone(),
    )?;
    let cell = program_analog(window.0, window.1, &cfg.cell, &cfg.device)?;
    for r in 0..rows {
        arr.set_row(r, &vec![cell; cols])?;
    }
    Ok(arr)
}

fn as_count(v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(CliError::Usage(format!(
            "array size must be a positive integer, got {v}"
        )))
    }
}

/// Figure-style sweeps of measured bounds versus array size, or of match outcome versus search voltage.
pub fn cmd_sweep(cfg: &GlobalConfig, spec: &SweepSpec) -> Result<String> {
    let sense = parse_sense(&spec.sense)?;
    let fmt_bounds = |w: Option<fecam::cell::Window>| match w {
        Some(w) => (format!("{:.4}", w.lower), format!("{:.4}", w.upper)),
        None => ("nan".into(), "nan".into()),
    };
    match spec.axis {
        SweepAxis::Rows | SweepAxis::Cols => {
            let counts = spec
                .values
                .iter()
                .map(|&v| as_count(v))
                .collect::<Result<Vec<_>>>()?;
            let label = if spec.axis == SweepAxis::Rows {
                "rows"
            } else {
                "cols"
            };
            let lines = counts
                .par_iter()
                .map(|&n| {
                    let (rows, cols) = if spec.axis == SweepAxis::Rows {
                        (n, 1)
                    } else {
                        (1, n)
                    };
                    let arr = uniform_array(cfg, rows, cols, spec.window)?;
                    let sweep = bounds_sweep(&arr, sense)?;
                    let per_row: Vec<_> = (0..rows).map(|r| sweep.bounds(r)).collect();
                    let spread = per_row
                        .iter()
                        .flatten()
                        .flat_map(|w| {
                            per_row
                                .iter()
                                .flatten()
                                .map(move |o| (w.lower - o.lower).abs().max((w.upper - o.upper).abs()))
                        })
                        .fold(0.0, f64::max);
                    let (lo, hi) = fmt_bounds(per_row[0]);
                    Ok(format!("{n},{lo},{hi},{spread:.4},{:.6e}\n", sweep.sense_time))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut out = format!("{label},lower_volts,upper_volts,row_spread_volts,sense_time_seconds\n");
            out.extend(lines);
            Ok(out)
        }
        SweepAxis::VSl => {
            let arr = match &spec.array_text {
                Some(text) => build_array(cfg, text)?,
                None => uniform_array(cfg, 1, 1, spec.window)?,
            };
            let mut out = String::from("v_sl_volts");
            for r in 0..arr.rows() {
                let _ = write!(out, ",match_{r}");
            }
            out.push('\n');
            let lines = spec
                .values
                .par_iter()
                .map(|&v| {
                    let res = search(&arr, &vec![v; arr.cols()], sense)?;
                    let mut line = format!("{v:.6}");
                    for m in res.matches() {
                        let _ = write!(line, ",{}", u8::from(m));
                    }
                    line.push('\n');
                    Ok(line)
                })
                .collect::<Result<Vec<_>>>()?;
            out.extend(lines);
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteMode {
    Ternary,
    Analog,
    Both,
}

impl std::str::FromStr for RouteMode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ternary" => Ok(RouteMode::Ternary),
            "analog" => Ok(RouteMode::Analog),
            "both" => Ok(RouteMode::Both),
            other => Err(CliError::Usage(format!(
                "unknown mode `{other}`; supported modes: ternary, analog, both"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteOutput {
    pub tables: Vec<RoutingTable>,
    pub report: Option<ComparisonReport>,
    /// One `verify <mode>: pass|FAIL ...` line per table when verification ran.
    pub verify: Vec<String>,
    pub all_verified: bool,
}

impl RouteOutput {
    /// Human-readable listing followed by the key-value report.
    pub fn render(&self, cfg: &GlobalConfig) -> String {
        let mut out = String::new();
        for t in &self.tables {
            let cam = match t.mode {
                TableMode::Ternary => CamMode::CmosTcam,
                TableMode::Analog { .. } => CamMode::FecamAnalog,
            };
            let _ = writeln!(out, "# table mode = {}", t.mode);
            let _ = writeln!(out, "# entries = {}", t.entry_count());
            let _ = writeln!(out, "# cells = {}", t.cell_count());
            let _ = writeln!(
                out,
                "# search_energy_j = {:e}",
                fecam::cost::search_energy(&cfg.cost, cam, t.cell_count())
            );
            let _ = writeln!(
                out,
                "# area_units = {:e}",
                fecam::cost::area(&cfg.cost, cam, t.cell_count())
            );
            out.push_str(&t.to_text());
        }
        if let Some(r) = &self.report {
            out.push_str("# comparison\n");
            out.push_str(&r.to_key_value());
        }
        for v in &self.verify {
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

/// Checks table lookups against interval containment on uniformly sampled
/// addresses plus every rule boundary.
pub fn verify_table(table: &RoutingTable, samples: usize, seed: u64) -> (bool, String) {
    let width = table.rules.iter().map(|r| r.width).max().unwrap_or(1);
    let oracle = |addr: u64| -> Option<&str> {
        table
            .rules
            .iter()
            .find(|r: &&RangeRule| r.contains(addr))
            .map(|r| r.action.as_str())
    };
    let mut addrs: Vec<u64> = Vec::with_capacity(samples + 4 * table.rules.len());
    for r in &table.rules {
        addrs.extend([r.lo.saturating_sub(1), r.lo, r.hi, r.hi.saturating_add(1)]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    addrs.extend((0..samples).map(|_| rng.random_range(0..1u64 << width)));
    let failures = addrs
        .par_iter()
        .filter(|&&a| table.lookup(a) != oracle(a))
        .count();
    let ok = failures == 0;
    let line = format!(
        "verify {}: {} ({} addresses, {failures} mismatches)",
        table.mode,
        if ok { "pass" } else { "FAIL" },
        addrs.len()
    );
    (ok, line)
}

pub fn cmd_route(
    cfg: &GlobalConfig,
    rules_text: &str,
    mode: RouteMode,
    verify_samples: Option<usize>,
) -> Result<RouteOutput> {
    let rules = parse_rules(rules_text)?;
    let analog_mode = TableMode::Analog {
        bits_per_cell: cfg.cost.bits_per_cell.fecam_analog,
    };
    let modes: Vec<TableMode> = match mode {
        RouteMode::Ternary => vec![TableMode::Ternary],
        RouteMode::Analog => vec![analog_mode],
        RouteMode::Both => vec![TableMode::Ternary, analog_mode],
    };
    let tables = modes
        .into_iter()
        .map(|m| compile_table(&rules, m))
        .collect::<fecam::Result<Vec<_>>>()?;
    let report = match &tables[..] {
        [t, a] => Some(routing_report(&cfg.cost, t, a)?),
        _ => None,
    };
    let mut verify = Vec::new();
    let mut all_verified = true;
    if let Some(samples) = verify_samples {
        for t in &tables {
            let (ok, line) = verify_table(t, samples, cfg.rng_seed);
            all_verified &= ok;
            verify.push(line);
        }
    }
    Ok(RouteOutput {
        tables,
        report,
        verify,
        all_verified,
    })
}

/// Per-bit energy/area comparison and the match-line energy cross-check.
pub fn cmd_bench(cfg: &GlobalConfig) -> Result<String> {
    let mut out = String::new();
    for c in per_bit_comparison(&cfg.cost) {
        let m = c.mode.name();
        let _ = writeln!(out, "{m}.energy_per_bit_j = {:e}", c.energy_per_bit_j);
        let _ = writeln!(out, "{m}.energy_saving_vs_cmos = {:.4}", c.energy_saving);
        let _ = writeln!(out, "{m}.area_per_bit_units = {:e}", c.area_per_bit);
        let _ = writeln!(out, "{m}.area_saving_vs_cmos = {:.4}", c.area_saving);
        let _ = writeln!(out, "{m}.word_cells = {}", cfg.cost.word_cells.get(c.mode));
    }
    for mode in [CamMode::FecamDigital, CamMode::FecamAnalog] {
        let x = energy_cross_check(&cfg.cost, &cfg.matchline, mode)?;
        let m = mode.name();
        let _ = writeln!(out, "{m}.cv2_estimate_j_per_bit = {:e}", x.estimated_j_per_bit);
        let _ = writeln!(out, "{m}.cv2_relative_gap = {:.4}", x.relative_gap());
    }
    Ok(out)
}
