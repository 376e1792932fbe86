//! Calibrated area and search-energy model for CMOS 16T TCAM, digital FeCAM,
//! and multi-bit analog FeCAM.
//!
//! Areas are expressed in units of one CMOS TCAM cell; only ratios are
//! meaningful. Energies are per searched bit, calibrated at a 45 nm node.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::array::{ml_capacitance, MatchLineParams};
use crate::encoder::{RoutingTable, TableMode};
use crate::error::{FecamError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CamMode {
    CmosTcam,
    FecamDigital,
    FecamAnalog,
}

impl CamMode {
    pub const ALL: [CamMode; 3] = [CamMode::CmosTcam, CamMode::FecamDigital, CamMode::FecamAnalog];

    pub fn name(self) -> &'static str {
        match self {
            CamMode::CmosTcam => "cmos_tcam",
            CamMode::FecamDigital => "fecam_digital",
            CamMode::FecamAnalog => "fecam_analog",
        }
    }
}

/// One value per CAM flavor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerMode<T> {
    pub cmos_tcam: T,
    pub fecam_digital: T,
    pub fecam_analog: T,
}

impl<T: Copy> PerMode<T> {
    pub fn get(&self, mode: CamMode) -> T {
        match mode {
            CamMode::CmosTcam => self.cmos_tcam,
            CamMode::FecamDigital => self.fecam_digital,
            CamMode::FecamAnalog => self.fecam_analog,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostParams {
    /// Search energy per stored bit (J).
    pub energy_per_bit: PerMode<f64>,
    /// Analog FeCAM area per bit relative to CMOS TCAM area per bit.
    pub area_per_bit_ratio_analog_vs_cmos: f64,
    pub bits_per_cell: PerMode<u32>,
    /// Area of one CMOS TCAM cell (arbitrary unit).
    pub cmos_cell_area: f64,
    /// Cells per word used when the per-bit energies were characterized.
    pub word_cells: PerMode<usize>,
    /// Published routing-table area saving, carried for comparison only.
    pub reference_area_ratio: f64,
    /// Published routing-table energy saving, carried for comparison only.
    pub reference_energy_ratio: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            energy_per_bit: PerMode {
                cmos_tcam: 0.590e-15,
                fecam_digital: 0.182e-15,
                fecam_analog: 0.069e-15,
            },
            area_per_bit_ratio_analog_vs_cmos: 0.045,
            bits_per_cell: PerMode {
                cmos_tcam: 1,
                fecam_digital: 1,
                fecam_analog: 3,
            },
            cmos_cell_area: 1.0,
            word_cells: PerMode {
                cmos_tcam: 64,
                fecam_digital: 64,
                fecam_analog: 22,
            },
            reference_area_ratio: 60.5,
            reference_energy_ratio: 23.1,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        let positive = CamMode::ALL.iter().all(|&m| {
            self.energy_per_bit.get(m) > 0.0 && self.bits_per_cell.get(m) >= 1 && self.word_cells.get(m) >= 1
        });
        if !positive || !(self.area_per_bit_ratio_analog_vs_cmos > 0.0) || !(self.cmos_cell_area > 0.0) {
            return Err(FecamError::InvalidParameter(
                "cost: energies, areas, bits per cell and word sizes must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Area of one cell. Digital and analog FeCAM use the same two-FeFET cell.
    pub fn cell_area(&self, mode: CamMode) -> f64 {
        let cmos_per_bit = self.cmos_cell_area / self.bits_per_cell.cmos_tcam as f64;
        let fecam_cell =
            self.bits_per_cell.fecam_analog as f64 * self.area_per_bit_ratio_analog_vs_cmos * cmos_per_bit;
        match mode {
            CamMode::CmosTcam => self.cmos_cell_area,
            CamMode::FecamDigital | CamMode::FecamAnalog => fecam_cell,
        }
    }

    pub fn area_per_bit(&self, mode: CamMode) -> f64 {
        self.cell_area(mode) / self.bits_per_cell.get(mode) as f64
    }
}

pub fn search_energy(p: &CostParams, mode: CamMode, n_cells: usize) -> f64 {
    n_cells as f64 * p.bits_per_cell.get(mode) as f64 * p.energy_per_bit.get(mode)
}

pub fn area(p: &CostParams, mode: CamMode, n_cells: usize) -> f64 {
    n_cells as f64 * p.cell_area(mode)
}

const REPORT_KEYS: [&str; 17] = [
    "rules",
    "ternary_entries",
    "ternary_cells",
    "analog_entries",
    "analog_cells",
    "analog_bits_per_cell",
    "cell_reduction",
    "cmos_area_units",
    "analog_area_units",
    "area_ratio",
    "reference_area_ratio",
    "area_ratio_gap",
    "cmos_search_energy_j",
    "analog_search_energy_j",
    "energy_ratio",
    "reference_energy_ratio",
    "energy_ratio_gap",
];

/// Routing-table comparison between a CMOS TCAM and an analog FeCAM implementation.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rules: usize,
    pub ternary_entries: usize,
    pub ternary_cells: usize,
    pub analog_entries: usize,
    pub analog_cells: usize,
    pub analog_bits_per_cell: u32,
    pub cell_reduction: f64,
    pub cmos_area: f64,
    pub analog_area: f64,
    pub area_ratio: f64,
    pub cmos_energy_j: f64,
    pub analog_energy_j: f64,
    pub energy_ratio: f64,
    pub reference_area_ratio: f64,
    pub reference_energy_ratio: f64,
}

impl ComparisonReport {
    /// Relative difference between the computed and reference area ratios.
    pub fn area_ratio_gap(&self) -> f64 {
        (self.reference_area_ratio - self.area_ratio) / self.reference_area_ratio
    }

    pub fn energy_ratio_gap(&self) -> f64 {
        (self.reference_energy_ratio - self.energy_ratio) / self.reference_energy_ratio
    }

    fn fields(&self) -> Vec<(&'static str, String)> {
        let ratio = |x: f64| {
            if x.is_finite() {
                format!("{x:.4}")
            } else {
                "nan".into()
            }
        };
        let values = [
            ("rules", self.rules.to_string()),
            ("ternary_entries", self.ternary_entries.to_string()),
            ("ternary_cells", self.ternary_cells.to_string()),
            ("analog_entries", self.analog_entries.to_string()),
            ("analog_cells", self.analog_cells.to_string()),
            ("analog_bits_per_cell", self.analog_bits_per_cell.to_string()),
            ("cell_reduction", ratio(self.cell_reduction)),
            ("cmos_area_units", format!("{:e}", self.cmos_area)),
            ("analog_area_units", format!("{:e}", self.analog_area)),
            ("area_ratio", ratio(self.area_ratio)),
            ("reference_area_ratio", ratio(self.reference_area_ratio)),
            ("area_ratio_gap", ratio(self.area_ratio_gap())),
            ("cmos_search_energy_j", format!("{:e}", self.cmos_energy_j)),
            ("analog_search_energy_j", format!("{:e}", self.analog_energy_j)),
            ("energy_ratio", ratio(self.energy_ratio)),
            ("reference_energy_ratio", ratio(self.reference_energy_ratio)),
            ("energy_ratio_gap", ratio(self.energy_ratio_gap())),
        ];
        debug_assert!(values.iter().map(|(k, _)| *k).eq(REPORT_KEYS));
        values.into()
    }

    /// Flat `key = value` document.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.fields() {
            let _ = writeln!(out, "{k} = {v}");
        }
        let _ = writeln!(
            out,
            "# area_ratio follows from the per-bit area ratio and the cell reduction; \
             area_ratio_gap is its relative shortfall against reference_area_ratio"
        );
        out
    }

    pub fn csv_header() -> String {
        REPORT_KEYS.join(",")
    }

    pub fn to_csv_row(&self) -> String {
        self.fields()
            .into_iter()
            .map(|(_, v)| v)
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Compares a ternary table against an analog table compiled from the same rules.
pub fn routing_report(
    p: &CostParams,
    ternary: &RoutingTable,
    analog: &RoutingTable,
) -> Result<ComparisonReport> {
    if ternary.mode != TableMode::Ternary {
        return Err(FecamError::InconsistentInput(format!(
            "first table must be ternary, got {}",
            ternary.mode
        )));
    }
    let TableMode::Analog { bits_per_cell } = analog.mode else {
        return Err(FecamError::InconsistentInput(format!(
            "second table must be analog, got {}",
            analog.mode
        )));
    };
    if bits_per_cell != p.bits_per_cell.fecam_analog {
        return Err(FecamError::InconsistentInput(format!(
            "analog table uses {bits_per_cell} bits per cell, cost model is calibrated for {}",
            p.bits_per_cell.fecam_analog
        )));
    }
    if ternary.rules != analog.rules {
        return Err(FecamError::InconsistentInput(
            "tables were compiled from different rule sets".into(),
        ));
    }
    let (tc, ac) = (ternary.cell_count(), analog.cell_count());
    let cmos_area = area(p, CamMode::CmosTcam, tc);
    let analog_area = area(p, CamMode::FecamAnalog, ac);
    let cmos_energy = search_energy(p, CamMode::CmosTcam, tc);
    let analog_energy = search_energy(p, CamMode::FecamAnalog, ac);
    Ok(ComparisonReport {
        rules: ternary.rules.len(),
        ternary_entries: ternary.entry_count(),
        ternary_cells: tc,
        analog_entries: analog.entry_count(),
        analog_cells: ac,
        analog_bits_per_cell: bits_per_cell,
        cell_reduction: tc as f64 / ac as f64,
        cmos_area,
        analog_area,
        area_ratio: cmos_area / analog_area,
        cmos_energy_j: cmos_energy,
        analog_energy_j: analog_energy,
        energy_ratio: cmos_energy / analog_energy,
        reference_area_ratio: p.reference_area_ratio,
        reference_energy_ratio: p.reference_energy_ratio,
    })
}

/// Per-bit search energy and area of each flavor relative to CMOS TCAM.
#[derive(Debug, Clone, PartialEq)]
pub struct PerBitComparison {
    pub mode: CamMode,
    pub energy_per_bit_j: f64,
    pub energy_saving: f64,
    pub area_per_bit: f64,
    pub area_saving: f64,
}

pub fn per_bit_comparison(p: &CostParams) -> Vec<PerBitComparison> {
    let cmos_e = p.energy_per_bit.cmos_tcam;
    let cmos_a = p.area_per_bit(CamMode::CmosTcam);
    CamMode::ALL
        .iter()
        .map(|&mode| PerBitComparison {
            mode,
            energy_per_bit_j: p.energy_per_bit.get(mode),
            energy_saving: cmos_e / p.energy_per_bit.get(mode),
            area_per_bit: p.area_per_bit(mode),
            area_saving: cmos_a / p.area_per_bit(mode),
        })
        .collect()
}

/// First-order `C * V * dV` match-line energy per bit for one word, next to
/// the calibrated figure. The gap is informational.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyCrossCheck {
    pub mode: CamMode,
    pub word_cells: usize,
    pub estimated_j_per_bit: f64,
    pub calibrated_j_per_bit: f64,
}

impl EnergyCrossCheck {
    pub fn relative_gap(&self) -> f64 {
        (self.estimated_j_per_bit - self.calibrated_j_per_bit) / self.calibrated_j_per_bit
    }
}

pub fn energy_cross_check(p: &CostParams, ml: &MatchLineParams, mode: CamMode) -> Result<EnergyCrossCheck> {
    if mode == CamMode::CmosTcam {
        return Err(FecamError::InvalidParameter(
            "the match-line model only describes FeCAM rows".into(),
        ));
    }
    let cells = p.word_cells.get(mode);
    let bits = cells as f64 * p.bits_per_cell.get(mode) as f64;
    let energy = ml_capacitance(ml, cells) * ml.vdd * ml.delta_v_ml;
    Ok(EnergyCrossCheck {
        mode,
        word_cells: cells,
        estimated_j_per_bit: energy / bits,
        calibrated_j_per_bit: p.energy_per_bit.get(mode),
    })
}
