//! R×C FeCAM array: match-line electrical model, row writes, and transient search.

mod description;
mod search;
mod write;

pub use description::{ArrayDescription, CellSpec};
pub use search::{
    bounds_sweep, integrate_match_line, measure_bounds, search, BoundsSweep, RowResult, SearchResult,
    SenseTime, INTEGRATION_STEPS, SWEEP_STEP,
};
pub use write::{DisturbEntry, DisturbReport, FetSide, WritePhase, WritePlan};

use serde::{Deserialize, Serialize};

use crate::cell::{CellConfig, FecamCell};
use crate::device::DeviceParams;
use crate::error::{FecamError, Result};

/// Row/column count above which driver sizing becomes a concern.
pub const LARGE_ARRAY_LIMIT: usize = 64;

/// Match-line electrical parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchLineParams {
    /// Drain capacitance of the precharge pMOS (F).
    pub c_pmos: f64,
    /// Total drain capacitance one cell adds to the match line (F).
    pub c_drain: f64,
    /// Interconnect capacitance per cell (F).
    pub c_parasitic: f64,
    /// Match-line drop that separates match from mismatch (V).
    pub delta_v_ml: f64,
    /// Average per-cell discharge current at a window edge (A).
    pub i_discharge_avg: f64,
    /// Precharge level (V).
    pub vdd: f64,
}

impl Default for MatchLineParams {
    fn default() -> Self {
        MatchLineParams {
            c_pmos: 0.10e-15,
            c_drain: 0.35e-15,
            c_parasitic: 0.05e-15,
            delta_v_ml: 0.5,
            i_discharge_avg: 25e-9,
            vdd: 1.0,
        }
    }
}

impl MatchLineParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(FecamError::InvalidParameter(format!("matchline: {msg}")));
        if !(self.c_pmos > 0.0 && self.c_drain > 0.0 && self.c_parasitic > 0.0) {
            return bad("capacitances must be positive");
        }
        if !(self.vdd > 0.0) {
            return bad("vdd must be positive");
        }
        if !(self.delta_v_ml > 0.0 && self.delta_v_ml < self.vdd) {
            return bad("delta_v_ml must lie in (0, vdd)");
        }
        if !(self.i_discharge_avg > 0.0) {
            return bad("i_discharge_avg must be positive");
        }
        Ok(())
    }
}

/// Match-line capacitance of a row with `n_cols` cells.
pub fn ml_capacitance(p: &MatchLineParams, n_cols: usize) -> f64 {
    p.c_pmos + n_cols as f64 * (p.c_drain + p.c_parasitic)
}

/// Time for the match line to drop by `delta_v_ml` when every cell sinks the
/// average discharge current. Used as the column-adapted sense time.
pub fn discharge_time(p: &MatchLineParams, n_cols: usize) -> Result<f64> {
    if n_cols == 0 {
        return Err(FecamError::InvalidParameter(
            "discharge time needs at least one column".into(),
        ));
    }
    Ok(ml_capacitance(p, n_cols) * p.delta_v_ml / (n_cols as f64 * p.i_discharge_avg))
}

/// Large-column limit of [`discharge_time`].
pub fn discharge_time_limit(p: &MatchLineParams) -> f64 {
    p.delta_v_ml / p.i_discharge_avg * (p.c_drain + p.c_parasitic)
}

/// Sense amplifier: match iff the line stayed strictly above `vdd - delta_v_ml`.
pub fn sense(v_ml: f64, p: &MatchLineParams) -> bool {
    v_ml > p.vdd - p.delta_v_ml
}

#[derive(Debug, Clone, PartialEq)]
pub struct FecamArray {
    rows: usize,
    cols: usize,
    cells: Vec<FecamCell>,
    pub ml: MatchLineParams,
    pub cfg: CellConfig,
    pub params: DeviceParams,
}

impl FecamArray {
    /// Array with every cell erased (wildcard).
    pub fn new(
        rows: usize,
        cols: usize,
        cfg: CellConfig,
        params: DeviceParams,
        ml: MatchLineParams,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(FecamError::InvalidParameter(format!(
                "array must have at least one row and column, got {rows}x{cols}"
            )));
        }
        cfg.validate()?;
        params.validate()?;
        ml.validate()?;
        if (cfg.vdd - ml.vdd).abs() > 1e-12 {
            return Err(FecamError::InconsistentInput(format!(
                "cell vdd {} V differs from match-line vdd {} V",
                cfg.vdd, ml.vdd
            )));
        }
        let cells = vec![FecamCell::wildcard(&params); rows * cols];
        Ok(FecamArray {
            rows,
            cols,
            cells,
            ml,
            cfg,
            params,
        })
    }

    pub fn with_defaults(rows: usize, cols: usize) -> Result<Self> {
        Self::new(
            rows,
            cols,
            CellConfig::default(),
            DeviceParams::default(),
            MatchLineParams::default(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Notes on sizes beyond what the peripheral drivers are dimensioned for.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.rows > LARGE_ARRAY_LIMIT {
            out.push(format!(
                "{} rows exceeds {LARGE_ARRAY_LIMIT}: search-line parasitics need stronger SL drivers",
                self.rows
            ));
        }
        if self.cols > LARGE_ARRAY_LIMIT {
            out.push(format!(
                "{} columns exceeds {LARGE_ARRAY_LIMIT}: match-line precharge needs a stronger driver",
                self.cols
            ));
        }
        out
    }

    pub fn cell(&self, row: usize, col: usize) -> &FecamCell {
        &self.cells[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[FecamCell] {
        &self.cells[row * self.cols..(row + 1) * self.cols]
    }

    /// Places a cell directly, bypassing the write scheme.
    pub fn set_cell(&mut self, row: usize, col: usize, cell: FecamCell) -> Result<()> {
        self.check_index(row, col)?;
        self.cells[row * self.cols + col] = cell;
        Ok(())
    }

    /// Places a full row directly, bypassing the write scheme.
    pub fn set_row(&mut self, row: usize, cells: &[FecamCell]) -> Result<()> {
        self.check_index(row, 0)?;
        if cells.len() != self.cols {
            return Err(FecamError::DimensionMismatch {
                what: "row cells".into(),
                got: cells.len(),
                expected: self.cols,
            });
        }
        self.cells[row * self.cols..(row + 1) * self.cols].copy_from_slice(cells);
        Ok(())
    }

    /// Match-line capacitance of one row.
    pub fn row_capacitance(&self) -> f64 {
        ml_capacitance(&self.ml, self.cols)
    }

    fn check_index(&self, row: usize, col: usize) -> Result<()> {
        if row >= self.rows || col >= self.cols {
            return Err(FecamError::OutOfRange(format!(
                "cell ({row}, {col}) outside {}x{} array",
                self.rows, self.cols
            )));
        }
        Ok(())
    }
}
