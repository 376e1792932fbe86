use std::fmt;

use super::{range_to_analog_entries, range_to_prefixes, AnalogEntry, CamEntry, RangeRule, TernaryEntry};
use crate::error::{FecamError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableMode {
    /// One bit per cell, prefix entries.
    Ternary,
    /// Multi-bit analog cells with digit-range entries.
    Analog { bits_per_cell: u32 },
}

impl TableMode {
    pub const ANALOG_3B: TableMode = TableMode::Analog { bits_per_cell: 3 };
}

impl fmt::Display for TableMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableMode::Ternary => write!(f, "ternary"),
            TableMode::Analog { bits_per_cell } => write!(f, "analog{bits_per_cell}b"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TableEntry {
    Ternary(TernaryEntry),
    Analog(AnalogEntry),
}

impl CamEntry for TableEntry {
    fn matches(&self, addr: u64) -> bool {
        match self {
            TableEntry::Ternary(e) => e.matches(addr),
            TableEntry::Analog(e) => e.matches(addr),
        }
    }

    fn cell_count(&self) -> usize {
        match self {
            TableEntry::Ternary(e) => e.cell_count(),
            TableEntry::Analog(e) => e.cell_count(),
        }
    }
}

impl fmt::Display for TableEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableEntry::Ternary(e) => e.fmt(f),
            TableEntry::Analog(e) => e.fmt(f),
        }
    }
}

/// Compiled CAM table. Entries are in priority order.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingTable {
    pub mode: TableMode,
    pub rules: Vec<RangeRule>,
    /// `(entry, index into rules)`.
    pub entries: Vec<(TableEntry, usize)>,
}

impl RoutingTable {
    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn cell_count(&self) -> usize {
        self.entries.iter().map(|(e, _)| e.cell_count()).sum()
    }

    /// Action of the first matching entry.
    pub fn lookup(&self, addr: u64) -> Option<&str> {
        self.entries
            .iter()
            .find(|(e, _)| e.matches(addr))
            .map(|(_, r)| self.rules[*r].action.as_str())
    }

    /// One entry per line: the encoded entry, a space, and the action.
    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(e, r)| format!("{e} {}\n", self.rules[*r].action))
            .collect()
    }
}

/// Concatenates the covers of every rule; earlier rules take priority.
pub fn compile_table(rules: &[RangeRule], mode: TableMode) -> Result<RoutingTable> {
    let mut entries = Vec::new();
    for (i, rule) in rules.iter().enumerate() {
        match mode {
            TableMode::Ternary => entries.extend(
                range_to_prefixes(rule.lo, rule.hi, rule.width)?
                    .into_iter()
                    .map(|e| (TableEntry::Ternary(e), i)),
            ),
            TableMode::Analog { bits_per_cell } => entries.extend(
                range_to_analog_entries(rule.lo, rule.hi, rule.width, bits_per_cell)?
                    .into_iter()
                    .map(|e| (TableEntry::Analog(e), i)),
            ),
        }
    }
    Ok(RoutingTable {
        mode,
        rules: rules.to_vec(),
        entries,
    })
}

/// Parses a rule file: one `lo hi width action` per line, `#` comments.
pub fn parse_rules(text: &str) -> Result<Vec<RangeRule>> {
    let mut rules = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| FecamError::Parse { line, msg };
        let [lo, hi, width, action] = content.split_whitespace().collect::<Vec<_>>()[..] else {
            return Err(err(format!("expected `lo hi width action`, got `{content}`")));
        };
        let int = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| err(format!("expected an unsigned integer, got `{s}`")))
        };
        let (lo, hi, width) = (int(lo)?, int(hi)?, int(width)?);
        let width = u32::try_from(width).map_err(|_| err(format!("width {width} too large")))?;
        rules.push(RangeRule::new(lo, hi, width, action).map_err(|e| err(e.to_string()))?);
    }
    Ok(rules)
}
