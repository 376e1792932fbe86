use rayon::prelude::*;

use super::{discharge_time, ml_capacitance, sense, FecamArray};
use crate::cell::{cell_drive, Window};
use crate::device::vds_factor;
use crate::error::{FecamError, Result};

/// RK4 steps per search window.
pub const INTEGRATION_STEPS: usize = 1000;

/// Search-voltage step of bound sweeps (V).
pub const SWEEP_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SenseTime {
    /// Column-adapted time from [`discharge_time`]. Assumes every cell of a
    /// mismatching row sinks the average current, so a lone near-boundary
    /// mismatch in a wide row may go undetected.
    Auto,
    /// Time at which a row sinking this constant current (A) would have
    /// dropped by the sense margin; `Current(i_discharge_avg)` detects a lone
    /// boundary cell at any width.
    Current(f64),
    Fixed(f64),
}

impl SenseTime {
    pub fn resolve(self, arr: &FecamArray) -> Result<f64> {
        match self {
            SenseTime::Auto => discharge_time(&arr.ml, arr.cols()),
            SenseTime::Current(i) if i > 0.0 && i.is_finite() => {
                Ok(ml_capacitance(&arr.ml, arr.cols()) * arr.ml.delta_v_ml / i)
            }
            SenseTime::Current(i) => Err(FecamError::InvalidParameter(format!(
                "sense current must be positive, got {i} A"
            ))),
            SenseTime::Fixed(t) if t > 0.0 && t.is_finite() => Ok(t),
            SenseTime::Fixed(t) => Err(FecamError::InvalidParameter(format!(
                "sense time must be positive, got {t} s"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowResult {
    pub matched: bool,
    /// `(t, v_ml)` samples from the start of the search phase.
    pub trace: Vec<(f64, f64)>,
}

impl RowResult {
    pub fn final_voltage(&self) -> f64 {
        self.trace.last().map(|s| s.1).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub rows: Vec<RowResult>,
    pub sense_time: f64,
}

impl SearchResult {
    pub fn matches(&self) -> Vec<bool> {
        self.rows.iter().map(|r| r.matched).collect()
    }
}

/// Integrates `c_ml * dV/dt = -current(V)` from `V(0) = v0` over `[0, t_end]`
/// with fixed-step RK4.
///
/// The discharge path cannot charge the line, so each step is clamped to
/// `[0, previous]`. `sample` is called with every `(t, V)` including the start.
pub fn integrate_match_line<F, S>(
    c_ml: f64,
    v0: f64,
    t_end: f64,
    steps: usize,
    current: F,
    mut sample: S,
) -> f64
where
    F: Fn(f64) -> f64,
    S: FnMut(f64, f64),
{
    let h = t_end / steps as f64;
    let dv = |v: f64| -current(v) / c_ml;
    let mut v = v0;
    sample(0.0, v);
    for k in 0..steps {
        let k1 = dv(v);
        let k2 = dv(v + 0.5 * h * k1);
        let k3 = dv(v + 0.5 * h * k2);
        let k4 = dv(v + h * k3);
        let next = v + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        v = next.clamp(0.0, v);
        sample((k + 1) as f64 * h, v);
    }
    v
}

fn validate_query(arr: &FecamArray, query: &[f64]) -> Result<()> {
    if query.len() != arr.cols() {
        return Err(FecamError::DimensionMismatch {
            what: "query".into(),
            got: query.len(),
            expected: arr.cols(),
        });
    }
    if let Some((i, v)) = query
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=arr.cfg.vdd).contains(*v))
    {
        return Err(FecamError::OutOfRange(format!(
            "query[{i}] = {v} V outside [0, {}] V",
            arr.cfg.vdd
        )));
    }
    Ok(())
}

/// Gate drive of a whole row: the row current with the match line above `v_dsat`.
fn row_drive(arr: &FecamArray, row: usize, query: &[f64]) -> f64 {
    arr.row(row)
        .iter()
        .zip(query)
        .map(|(cell, &v)| cell_drive(cell, v, &arr.cfg, &arr.params))
        .sum()
}

fn row_final_voltage(arr: &FecamArray, row: usize, query: &[f64], t_sense: f64) -> f64 {
    let drive = row_drive(arr, row, query);
    let params = &arr.params;
    integrate_match_line(
        arr.row_capacitance(),
        arr.ml.vdd,
        t_sense,
        INTEGRATION_STEPS,
        |v| drive * vds_factor(params, v),
        |_, _| {},
    )
}

/// Precharges every match line to `vdd`, applies `query` to the search lines,
/// and senses each row after `t_sense`.
pub fn search(arr: &FecamArray, query: &[f64], t_sense: SenseTime) -> Result<SearchResult> {
    validate_query(arr, query)?;
    let t = t_sense.resolve(arr)?;
    let c_ml = arr.row_capacitance();
    let rows = (0..arr.rows())
        .into_par_iter()
        .map(|r| {
            let drive = row_drive(arr, r, query);
            let mut trace = Vec::with_capacity(INTEGRATION_STEPS + 1);
            let v = integrate_match_line(
                c_ml,
                arr.ml.vdd,
                t,
                INTEGRATION_STEPS,
                |v| drive * vds_factor(&arr.params, v),
                |t, v| trace.push((t, v)),
            );
            RowResult {
                matched: sense(v, &arr.ml),
                trace,
            }
        })
        .collect();
    Ok(SearchResult { rows, sense_time: t })
}

/// Match outcome of every row while a common search voltage is swept over `[0, vdd]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsSweep {
    pub v_sl: Vec<f64>,
    /// `matches[k][r]`: row `r` matched at `v_sl[k]`.
    pub matches: Vec<Vec<bool>>,
    pub sense_time: f64,
}

impl BoundsSweep {
    /// Longest contiguous matching interval of `row`.
    pub fn bounds(&self, row: usize) -> Option<Window> {
        longest_run(&self.v_sl, self.matches.iter().map(|m| m[row]))
    }
}

fn sweep_points(vdd: f64) -> Vec<f64> {
    let n = (vdd / SWEEP_STEP).round() as usize;
    (0..=n).map(|k| (k as f64 * SWEEP_STEP).min(vdd)).collect()
}

fn longest_run(v: &[f64], matched: impl Iterator<Item = bool>) -> Option<Window> {
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (k, m) in matched.chain(std::iter::once(false)).enumerate() {
        match (m, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                if best.is_none_or(|(bs, be)| k - 1 - s > be - bs) {
                    best = Some((s, k - 1));
                }
                start = None;
            }
            _ => {}
        }
    }
    best.map(|(s, e)| Window::new(v[s], v[e]))
}

/// Sweeps one common search voltage across all columns at 1 mV steps.
pub fn bounds_sweep(arr: &FecamArray, t_sense: SenseTime) -> Result<BoundsSweep> {
    let t = t_sense.resolve(arr)?;
    let v_sl = sweep_points(arr.cfg.vdd);
    let matches = v_sl
        .par_iter()
        .map(|&v| {
            let query = vec![v; arr.cols()];
            (0..arr.rows())
                .map(|r| sense(row_final_voltage(arr, r, &query, t), &arr.ml))
                .collect()
        })
        .collect();
    Ok(BoundsSweep {
        v_sl,
        matches,
        sense_time: t,
    })
}

/// Edges of the longest contiguous matching interval of `row` under a common
/// search-voltage sweep, or `None` when no sweep point matches.
pub fn measure_bounds(arr: &FecamArray, row: usize, t_sense: SenseTime) -> Result<Option<Window>> {
    if row >= arr.rows() {
        return Err(FecamError::OutOfRange(format!(
            "row {row} outside array with {} rows",
            arr.rows()
        )));
    }
    let t = t_sense.resolve(arr)?;
    let v_sl = sweep_points(arr.cfg.vdd);
    let matched: Vec<bool> = v_sl
        .par_iter()
        .map(|&v| sense(row_final_voltage(arr, row, &vec![v; arr.cols()], t), &arr.ml))
        .collect();
    Ok(longest_run(&v_sl, matched.into_iter()))
}
