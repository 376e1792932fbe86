//! Range encoding for CAM tables.
//!
//! An integer range `[lo, hi]` is covered either by ternary prefix entries
//! (one bit per cell, `X` suffix) or by digit-range entries for multi-bit
//! analog cells (one base-`2^b` digit per cell, each cell storing an interval
//! of digits).

mod analog;
mod table;
mod ternary;

pub use analog::{range_to_analog_entries, AnalogEntry};
pub use table::{compile_table, parse_rules, RoutingTable, TableEntry, TableMode};
pub use ternary::{range_to_prefixes, TernaryEntry};

use crate::error::{FecamError, Result};

/// Widest supported address space in bits.
pub const MAX_WIDTH: u32 = 63;

/// One CAM row.
pub trait CamEntry {
    /// True if the entry matches `addr`.
    fn matches(&self, addr: u64) -> bool;
    /// Number of CAM cells the entry occupies.
    fn cell_count(&self) -> usize;
}

/// True iff some entry matches `addr`.
pub fn entries_match<E: CamEntry>(entries: &[E], addr: u64) -> bool {
    entries.iter().any(|e| e.matches(addr))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RangeRule {
    pub lo: u64,
    pub hi: u64,
    pub width: u32,
    pub action: String,
}

impl RangeRule {
    pub fn new(lo: u64, hi: u64, width: u32, action: impl Into<String>) -> Result<Self> {
        check_range(lo, hi, width)?;
        Ok(RangeRule {
            lo,
            hi,
            width,
            action: action.into(),
        })
    }

    pub fn contains(&self, addr: u64) -> bool {
        self.lo <= addr && addr <= self.hi
    }
}

pub(crate) fn check_range(lo: u64, hi: u64, width: u32) -> Result<()> {
    if width == 0 || width > MAX_WIDTH {
        return Err(FecamError::InvalidParameter(format!(
            "width must be in 1..={MAX_WIDTH}, got {width}"
        )));
    }
    if lo > hi || hi >= 1u64 << width {
        return Err(FecamError::OutOfRange(format!(
            "range [{lo}, {hi}] invalid for a {width}-bit space"
        )));
    }
    Ok(())
}
