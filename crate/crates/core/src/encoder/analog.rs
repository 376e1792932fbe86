use std::fmt;

use super::{check_range, CamEntry};
use crate::cell::{CellConfig, Window};
use crate::error::{FecamError, Result};

/// Multi-bit analog CAM row: one base-`2^bits_per_cell` digit interval per
/// cell, most significant digit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnalogEntry {
    pub bits_per_cell: u32,
    pub digits: Vec<(u32, u32)>,
}

impl AnalogEntry {
    pub fn base(&self) -> u64 {
        1 << self.bits_per_cell
    }

    fn digit_of(&self, addr: u64, cell: usize) -> u32 {
        let shift = (self.digits.len() - 1 - cell) as u32 * self.bits_per_cell;
        ((addr >> shift) & (self.base() - 1)) as u32
    }

    /// Match windows of every cell on the level grid of `cfg`.
    pub fn to_cells(&self, cfg: &CellConfig) -> Result<Vec<Window>> {
        if cfg.level_count as u64 != self.base() {
            return Err(FecamError::InvalidParameter(format!(
                "{} bits per cell needs {} levels, config has {}",
                self.bits_per_cell,
                self.base(),
                cfg.level_count
            )));
        }
        self.digits
            .iter()
            .map(|&(lo, hi)| cfg.level_window(lo as usize, hi as usize))
            .collect()
    }

    /// Level-center search voltages encoding `addr`, one per cell.
    pub fn query_voltages(&self, addr: u64, cfg: &CellConfig) -> Result<Vec<f64>> {
        (0..self.digits.len())
            .map(|c| cfg.level_center(self.digit_of(addr, c) as usize))
            .collect()
    }
}

impl CamEntry for AnalogEntry {
    fn matches(&self, addr: u64) -> bool {
        self.digits.iter().enumerate().all(|(c, &(lo, hi))| {
            let d = self.digit_of(addr, c);
            lo <= d && d <= hi
        })
    }

    fn cell_count(&self) -> usize {
        self.digits.len()
    }
}

impl fmt::Display for AnalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.digits
            .iter()
            .try_for_each(|(lo, hi)| write!(f, "[{lo}-{hi}]"))
    }
}

/// Greedy digit-range cover of `[lo, hi]`.
///
/// Each entry fixes the digits above some position, spans an interval at
/// that position, and wildcards every digit below it. At each step the
/// position is the highest one the cursor is aligned to whose single-step
/// block still fits, and the interval is stretched as far as the range allows.
pub fn range_to_analog_entries(lo: u64, hi: u64, width: u32, bits_per_cell: u32) -> Result<Vec<AnalogEntry>> {
    check_range(lo, hi, width)?;
    if bits_per_cell == 0 || !width.is_multiple_of(bits_per_cell) {
        return Err(FecamError::InvalidParameter(format!(
            "width {width} is not divisible by {bits_per_cell} bits per cell"
        )));
    }
    let cells = (width / bits_per_cell) as usize;
    let base = 1u64 << bits_per_cell;
    let max_digit = (base - 1) as u32;
    let digit = |v: u64, pos: usize| ((v >> (pos as u32 * bits_per_cell)) & (base - 1)) as u32;

    let mut out = Vec::new();
    let mut cursor = lo;
    loop {
        // Highest position `pos` such that the cursor is a multiple of base^pos
        // and one full block of base^pos fits.
        let mut pos = 0usize;
        while pos < cells {
            let next = (pos as u32 + 1) * bits_per_cell;
            let block = 1u64 << next;
            if !cursor.is_multiple_of(block) || cursor + (block - 1) > hi {
                break;
            }
            pos += 1;
        }
        if pos == cells {
            // Whole space.
            out.push(AnalogEntry {
                bits_per_cell,
                digits: vec![(0, max_digit); cells],
            });
            break;
        }
        let unit = 1u64 << (pos as u32 * bits_per_cell);
        let d_lo = digit(cursor, pos);
        let fit = (hi - cursor + 1) / unit;
        let d_hi = (d_lo as u64 + fit - 1).min(max_digit as u64) as u32;

        let digits = (0..cells)
            .rev()
            .map(|p| match p.cmp(&pos) {
                std::cmp::Ordering::Greater => (digit(cursor, p), digit(cursor, p)),
                std::cmp::Ordering::Equal => (d_lo, d_hi),
                std::cmp::Ordering::Less => (0, max_digit),
            })
            .collect();
        out.push(AnalogEntry {
            bits_per_cell,
            digits,
        });

        let end = cursor + (d_hi - d_lo + 1) as u64 * unit - 1;
        if end >= hi {
            break;
        }
        cursor = end + 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::entries_match;

    #[test]
    fn small_range_cover() {
        let cover = range_to_analog_entries(1, 62, 6, 3).unwrap();
        let digits: Vec<_> = cover.iter().map(|e| e.digits.clone()).collect();
        assert_eq!(
            digits,
            vec![vec![(0, 0), (1, 7)], vec![(1, 6), (0, 7)], vec![(7, 7), (0, 6)]]
        );
        for a in 0..64 {
            assert_eq!(entries_match(&cover, a), (1..=62).contains(&a), "addr {a}");
        }
        assert_eq!(cover[0].to_string(), "[0-0][1-7]");
    }

    #[test]
    fn full_space_is_one_entry() {
        let cover = range_to_analog_entries(0, (1 << 24) - 1, 24, 3).unwrap();
        assert_eq!(cover.len(), 1);
        assert_eq!(cover[0].digits, vec![(0, 7); 8]);
    }

    #[test]
    fn rejects_indivisible_width() {
        let err = range_to_analog_entries(0, 10, 8, 3).unwrap_err();
        assert_eq!(err.category(), "invalid-parameter");
    }

    #[test]
    fn cells_and_query_voltages() {
        let cfg = CellConfig::default();
        let full = AnalogEntry {
            bits_per_cell: 3,
            digits: vec![(0, 7), (3, 3)],
        };
        let windows = full.to_cells(&cfg).unwrap();
        assert_eq!(windows[0], Window::new(cfg.level_bounds[0], cfg.level_bounds[8]));
        assert_eq!(windows[1], Window::new(cfg.level_bounds[3], cfg.level_bounds[4]));
        let q = full.query_voltages(0o53, &cfg).unwrap();
        assert!((q[0] - 0.65).abs() < 1e-12 && (q[1] - 0.45).abs() < 1e-12);

        let two_bit = AnalogEntry {
            bits_per_cell: 2,
            digits: vec![(0, 3)],
        };
        assert!(two_bit.to_cells(&cfg).is_err());
    }
}
