use std::fmt;

use super::{check_range, CamEntry};
use crate::cell::DigitalBit;
use crate::error::Result;

/// Ternary CAM row, most significant bit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TernaryEntry {
    pub bits: Vec<DigitalBit>,
}

impl TernaryEntry {
    /// Entry matching every address whose top `width - wildcards` bits equal those of `value`.
    pub fn prefix(value: u64, width: u32, wildcards: u32) -> Self {
        let bits = (0..width)
            .rev()
            .map(|pos| {
                if pos < wildcards {
                    DigitalBit::DontCare
                } else if value >> pos & 1 == 1 {
                    DigitalBit::One
                } else {
                    DigitalBit::Zero
                }
            })
            .collect();
        TernaryEntry { bits }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    /// True if every `X` sits in a contiguous suffix.
    pub fn is_prefix_form(&self) -> bool {
        let first_x = self
            .bits
            .iter()
            .position(|b| *b == DigitalBit::DontCare)
            .unwrap_or(self.bits.len());
        self.bits[first_x..].iter().all(|b| *b == DigitalBit::DontCare)
    }
}

impl CamEntry for TernaryEntry {
    fn matches(&self, addr: u64) -> bool {
        let w = self.bits.len();
        self.bits.iter().enumerate().all(|(i, b)| {
            let bit = addr >> (w - 1 - i) & 1 == 1;
            match b {
                DigitalBit::DontCare => true,
                DigitalBit::One => bit,
                DigitalBit::Zero => !bit,
            }
        })
    }

    fn cell_count(&self) -> usize {
        self.bits.len()
    }
}

impl fmt::Display for TernaryEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.bits.iter().try_for_each(|b| write!(f, "{}", b.as_char()))
    }
}

/// Minimal prefix cover of `[lo, hi]`: at each step take the largest aligned
/// power-of-two block that starts at the cursor and stays inside the range.
pub fn range_to_prefixes(lo: u64, hi: u64, width: u32) -> Result<Vec<TernaryEntry>> {
    check_range(lo, hi, width)?;
    let mut out = Vec::new();
    let mut cursor = lo;
    loop {
        let align = if cursor == 0 {
            width
        } else {
            cursor.trailing_zeros().min(width)
        };
        let mut k = align;
        while k > 0 && cursor + ((1u64 << k) - 1) > hi {
            k -= 1;
        }
        out.push(TernaryEntry::prefix(cursor, width, k));
        let end = cursor + ((1u64 << k) - 1);
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

    fn strings(v: &[TernaryEntry]) -> Vec<String> {
        v.iter().map(|e| e.to_string()).collect()
    }

    /// Exhaustive oracle: smallest subset of all prefixes whose union is exactly the range.
    fn brute_force_min_cover(lo: u64, hi: u64, width: u32) -> usize {
        let mut prefixes = Vec::new();
        for k in 0..=width {
            for base in (0..1u64 << width).step_by(1 << k) {
                prefixes.push((base, base + (1 << k) - 1));
            }
        }
        let target: u64 = (lo..=hi).fold(0, |m, a| m | 1 << a);
        let n = prefixes.len();
        let mut best = usize::MAX;
        for subset in 0u64..1 << n {
            let count = subset.count_ones() as usize;
            if count >= best {
                continue;
            }
            let mut covered = 0u64;
            for (i, (a, b)) in prefixes.iter().enumerate() {
                if subset >> i & 1 == 1 {
                    covered |= (*a..=*b).fold(0, |m, x| m | 1 << x);
                }
            }
            if covered == target {
                best = count;
            }
        }
        best
    }

    #[test]
    fn small_range_cover() {
        let cover = range_to_prefixes(1, 6, 3).unwrap();
        assert_eq!(strings(&cover), ["001", "01X", "10X", "110"]);
        assert_eq!(brute_force_min_cover(1, 6, 3), 4);
    }

    #[test]
    fn greedy_is_minimal_for_every_three_bit_range() {
        for lo in 0..8 {
            for hi in lo..8 {
                let cover = range_to_prefixes(lo, hi, 3).unwrap();
                assert_eq!(cover.len(), brute_force_min_cover(lo, hi, 3), "[{lo}, {hi}]");
            }
        }
    }

    #[test]
    fn full_space_is_one_wildcard_entry() {
        let cover = range_to_prefixes(0, (1 << 24) - 1, 24).unwrap();
        assert_eq!(strings(&cover), ["X".repeat(24)]);
    }

    #[test]
    fn single_address_and_membership() {
        let cover = range_to_prefixes(5, 5, 4).unwrap();
        assert_eq!(strings(&cover), ["0101"]);
        let cover = range_to_prefixes(1, 6, 3).unwrap();
        assert!(!entries_match(&cover, 0));
        assert!(entries_match(&cover, 6));
        assert!(!entries_match(&cover, 7));
        assert!(cover.iter().all(TernaryEntry::is_prefix_form));
    }

    #[test]
    fn prefix_form_detection() {
        let e = TernaryEntry {
            bits: vec![DigitalBit::One, DigitalBit::DontCare, DigitalBit::Zero],
        };
        assert!(!e.is_prefix_form());
    }

    #[test]
    fn rejects_invalid_ranges() {
        assert!(range_to_prefixes(5, 4, 8).is_err());
        assert!(range_to_prefixes(0, 256, 8).is_err());
        assert!(range_to_prefixes(0, 0, 0).is_err());
    }
}
