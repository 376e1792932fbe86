//! Row-wise writes with half-voltage inhibition.
//!
//! A write is two phases on the selected row (sources grounded):
//!
//! 1. erase: every gate of the row gets the erase amplitude;
//! 2. program: each FeFET gets its programming amplitude, or 0 V if it stays erased.
//!
//! Unselected rows see the same gate voltages on their shared search lines.
//! Their source lines are biased to `unselected_bias[r]` during the program
//! phase and to its negation during the erase phase, so a bias of half the
//! write voltage keeps every unselected `|v_gs|` at that half.

use super::FecamArray;
use crate::cell::{CellMode, FecamCell};
use crate::device::{self, DeviceParams, FeFetState, WritePulse};
use crate::error::{FecamError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WritePlan {
    pub target_row: usize,
    /// Pulse amplitude for each upper FeFET (gate on SL), per column (V).
    pub sl_pulses: Vec<f64>,
    /// Pulse amplitude for each lower FeFET (gate on inverted SL), per column (V).
    pub slb_pulses: Vec<f64>,
    /// Program-phase source bias of every row (V); the entry for the target row is ignored.
    pub unselected_bias: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WritePhase {
    Erase,
    Program,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FetSide {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbEntry {
    pub row: usize,
    pub col: usize,
    pub fet: FetSide,
    pub phase: WritePhase,
    pub v_gs: f64,
}

/// Gate-source stress of every unselected FeFET during a write.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DisturbReport {
    pub entries: Vec<DisturbEntry>,
}

impl DisturbReport {
    pub fn max_abs_v_gs(&self) -> f64 {
        self.entries.iter().map(|e| e.v_gs.abs()).fold(0.0, f64::max)
    }

    pub fn worst(&self) -> Option<&DisturbEntry> {
        self.entries
            .iter()
            .max_by(|a, b| a.v_gs.abs().total_cmp(&b.v_gs.abs()))
    }
}

impl WritePlan {
    /// Plan that writes `cells` into `row` with unselected sources at half the
    /// maximum programming amplitude.
    pub fn v_half(arr: &FecamArray, row: usize, cells: &[FecamCell]) -> Result<Self> {
        let half = 0.5 * arr.params.v_prog_max;
        Self::with_bias(arr, row, cells, half)
    }

    /// Same as [`WritePlan::v_half`] with an explicit unselected-row bias.
    pub fn with_bias(arr: &FecamArray, row: usize, cells: &[FecamCell], bias: f64) -> Result<Self> {
        if cells.len() != arr.cols() {
            return Err(FecamError::DimensionMismatch {
                what: "write cells".into(),
                got: cells.len(),
                expected: arr.cols(),
            });
        }
        let p = &arr.params;
        let pulse = |vth: f64| device::pulse_for_vth(p, vth).map(|w| w.amplitude);
        let sl_pulses = cells
            .iter()
            .map(|c| pulse(c.upper_fet.vth))
            .collect::<Result<_>>()?;
        let slb_pulses = cells
            .iter()
            .map(|c| pulse(c.lower_fet.vth))
            .collect::<Result<_>>()?;
        let unselected_bias = (0..arr.rows())
            .map(|r| if r == row { 0.0 } else { bias })
            .collect();
        Ok(WritePlan {
            target_row: row,
            sl_pulses,
            slb_pulses,
            unselected_bias,
        })
    }

    pub fn validate(&self, arr: &FecamArray) -> Result<()> {
        if self.target_row >= arr.rows() {
            return Err(FecamError::OutOfRange(format!(
                "target row {} outside array with {} rows",
                self.target_row,
                arr.rows()
            )));
        }
        for (what, len, expected) in [
            ("sl_pulses", self.sl_pulses.len(), arr.cols()),
            ("slb_pulses", self.slb_pulses.len(), arr.cols()),
            ("unselected_bias", self.unselected_bias.len(), arr.rows()),
        ] {
            if len != expected {
                return Err(FecamError::DimensionMismatch {
                    what: what.into(),
                    got: len,
                    expected,
                });
            }
        }
        for &a in self.sl_pulses.iter().chain(&self.slb_pulses) {
            WritePulse::program(a).validate(&arr.params)?;
        }
        if let Some(b) = self.unselected_bias.iter().find(|b| !b.is_finite()) {
            return Err(FecamError::InvalidParameter(format!(
                "source bias {b} V is not finite"
            )));
        }
        Ok(())
    }

    /// Gate voltage of a FeFET during the program phase.
    fn program_gate(params: &DeviceParams, amplitude: f64) -> f64 {
        if (amplitude - params.erase_amplitude).abs() <= 1e-9 {
            0.0
        } else {
            amplitude
        }
    }

    /// Gate-source stress of every unselected FeFET over both phases.
    pub fn disturb_report(&self, arr: &FecamArray) -> DisturbReport {
        let params = &arr.params;
        let mut entries = Vec::with_capacity(4 * arr.cols() * arr.rows().saturating_sub(1));
        for (row, &bias) in self.unselected_bias.iter().enumerate() {
            if row == self.target_row {
                continue;
            }
            for col in 0..arr.cols() {
                for (fet, amplitude) in [
                    (FetSide::Upper, self.sl_pulses[col]),
                    (FetSide::Lower, self.slb_pulses[col]),
                ] {
                    entries.push(DisturbEntry {
                        row,
                        col,
                        fet,
                        phase: WritePhase::Erase,
                        v_gs: params.erase_amplitude + bias,
                    });
                    entries.push(DisturbEntry {
                        row,
                        col,
                        fet,
                        phase: WritePhase::Program,
                        v_gs: Self::program_gate(params, amplitude) - bias,
                    });
                }
            }
        }
        DisturbReport { entries }
    }
}

impl FecamArray {
    /// Applies `plan`. On a disturb violation the array is left untouched.
    pub fn write_row(&mut self, plan: &WritePlan) -> Result<DisturbReport> {
        plan.validate(self)?;
        let report = plan.disturb_report(self);
        let limit = self.params.disturb_limit;
        if let Some(worst) = report.worst() {
            if worst.v_gs.abs() > limit + 1e-9 {
                return Err(FecamError::DisturbViolation {
                    row: worst.row,
                    col: worst.col,
                    v_gs: worst.v_gs,
                    limit,
                });
            }
        }
        let params = self.params.clone();
        let state = |a: f64| FeFetState::after_pulse(&params, &WritePulse::program(a));
        let row: Vec<FecamCell> = plan
            .sl_pulses
            .iter()
            .zip(&plan.slb_pulses)
            .map(|(&up, &low)| {
                Ok(FecamCell {
                    upper_fet: state(up)?,
                    lower_fet: state(low)?,
                    mode: CellMode::Analog,
                })
            })
            .collect::<Result<_>>()?;
        self.set_row(plan.target_row, &row)?;
        Ok(report)
    }
}
