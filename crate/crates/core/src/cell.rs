//! Two-FeFET CAM cell.
//!
//! The "upper" FeFET has its gate on the search line and conducts once the
//! search voltage rises above its threshold, so its threshold is the upper
//! edge of the match window. The "lower" FeFET is driven by the inverted
//! search line and conducts once `vdd - v_sl` exceeds its threshold, so the
//! lower edge is `vdd - lower_fet.vth`. A bound at the edge of the search
//! range leaves the corresponding FeFET erased, which keeps it off for every
//! search voltage.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::device::{self, DeviceParams, FeFetState};
use crate::error::{FecamError, Result};

const EDGE_EPS: f64 = 1e-12;

/// Transfer curve of the search-line inverter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InverterModel {
    /// `vdd - v_sl`.
    #[default]
    Ideal,
    /// Smooth tanh transfer pinned to the rails, `gain` in 1/V.
    Tanh { gain: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellConfig {
    /// Supply and full search range (V).
    pub vdd: f64,
    /// Number of quantized windows.
    pub level_count: usize,
    /// Fence posts `b_0 < ... < b_L` of the quantized windows (V).
    pub level_bounds: Vec<f64>,
    /// Lower window edge of a stored digital `1` (V).
    pub digital_one_lower: f64,
    /// Upper window edge of a stored digital `0` (V).
    pub digital_zero_upper: f64,
    pub inverter: InverterModel,
}

impl Default for CellConfig {
    fn default() -> Self {
        CellConfig {
            vdd: 1.0,
            level_count: 8,
            level_bounds: (0..=8).map(|k| 0.1 + 0.1 * k as f64).collect(),
            digital_one_lower: 0.7,
            digital_zero_upper: 0.3,
            inverter: InverterModel::Ideal,
        }
    }
}

impl CellConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FecamError::InvalidParameter(format!("cell: {msg}")));
        if !(self.vdd > 0.0) {
            return bad(format!("vdd must be positive, got {}", self.vdd));
        }
        if self.level_count == 0 {
            return bad("level_count must be at least 1".into());
        }
        if self.level_bounds.len() != self.level_count + 1 {
            return bad(format!(
                "level_bounds has {} entries, expected level_count + 1 = {}",
                self.level_bounds.len(),
                self.level_count + 1
            ));
        }
        if self.level_bounds.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("level_bounds must be strictly increasing".into());
        }
        if self.level_bounds.iter().any(|&b| !(0.0..=self.vdd).contains(&b)) {
            return bad("level_bounds must lie in [0, vdd]".into());
        }
        if !(0.0 < self.digital_zero_upper && self.digital_zero_upper < self.vdd) {
            return bad("digital_zero_upper must lie in (0, vdd)".into());
        }
        if !(0.0 < self.digital_one_lower && self.digital_one_lower < self.vdd) {
            return bad("digital_one_lower must lie in (0, vdd)".into());
        }
        if let InverterModel::Tanh { gain } = self.inverter {
            if !(gain > 0.0) {
                return bad("inverter gain must be positive".into());
            }
        }
        Ok(())
    }

    /// Window spanning levels `lo..=hi` on the fence-post grid.
    pub fn level_window(&self, lo: usize, hi: usize) -> Result<Window> {
        if lo > hi || hi >= self.level_count {
            return Err(FecamError::OutOfRange(format!(
                "level range [{lo}, {hi}] invalid for {} levels",
                self.level_count
            )));
        }
        Ok(Window::new(self.level_bounds[lo], self.level_bounds[hi + 1]))
    }

    /// Search voltage at the center of level `d`.
    pub fn level_center(&self, d: usize) -> Result<f64> {
        if d >= self.level_count {
            return Err(FecamError::OutOfRange(format!(
                "level {d} invalid for {} levels",
                self.level_count
            )));
        }
        Ok(0.5 * (self.level_bounds[d] + self.level_bounds[d + 1]))
    }
}

/// Closed voltage interval `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lower: f64,
    pub upper: f64,
}

impl Window {
    pub fn new(lower: f64, upper: f64) -> Self {
        Window { lower, upper }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellMode {
    Analog,
    Digital,
}

/// Stored ternary digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DigitalBit {
    Zero,
    One,
    DontCare,
}

impl DigitalBit {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(DigitalBit::Zero),
            '1' => Some(DigitalBit::One),
            'X' | 'x' | '*' => Some(DigitalBit::DontCare),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            DigitalBit::Zero => '0',
            DigitalBit::One => '1',
            DigitalBit::DontCare => 'X',
        }
    }

    /// Search voltage that encodes a query bit.
    pub fn query_voltage(bit: bool, cfg: &CellConfig) -> f64 {
        if bit {
            cfg.vdd
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FecamCell {
    /// Gate on the search line; sets the upper bound.
    pub upper_fet: FeFetState,
    /// Gate on the inverted search line; sets the lower bound.
    pub lower_fet: FeFetState,
    pub mode: CellMode,
}

impl FecamCell {
    /// Both FeFETs erased: matches every search voltage.
    pub fn wildcard(params: &DeviceParams) -> Self {
        FecamCell {
            upper_fet: FeFetState::erased(params),
            lower_fet: FeFetState::erased(params),
            mode: CellMode::Analog,
        }
    }

    /// Nominal window implied by the two thresholds.
    pub fn nominal_window(&self, cfg: &CellConfig) -> Window {
        Window::new(cfg.vdd - self.lower_fet.vth, self.upper_fet.vth)
    }
}

pub fn inverter(v_sl: f64, cfg: &CellConfig) -> f64 {
    match cfg.inverter {
        InverterModel::Ideal => cfg.vdd - v_sl,
        InverterModel::Tanh { gain } => {
            let half = 0.5 * cfg.vdd;
            half * (1.0 - (gain * (v_sl - half)).tanh() / (gain * half).tanh())
        }
    }
}

/// Programs an analog window `[lower, upper]`.
pub fn program_analog(lower: f64, upper: f64, cfg: &CellConfig, params: &DeviceParams) -> Result<FecamCell> {
    if !(lower < upper) {
        return Err(FecamError::EmptyWindow { lower, upper });
    }
    if !(lower >= -EDGE_EPS && upper <= cfg.vdd + EDGE_EPS) {
        return Err(FecamError::OutOfRange(format!(
            "window [{lower}, {upper}] V outside search range [0, {}] V",
            cfg.vdd
        )));
    }
    let upper_fet = if upper >= cfg.vdd - EDGE_EPS {
        FeFetState::erased(params)
    } else {
        FeFetState::with_vth(params, upper)?
    };
    let lower_fet = if lower <= EDGE_EPS {
        FeFetState::erased(params)
    } else {
        FeFetState::with_vth(params, cfg.vdd - lower)?
    };
    Ok(FecamCell {
        upper_fet,
        lower_fet,
        mode: CellMode::Analog,
    })
}

/// Programs the quantized window of level `k`.
pub fn program_level(k: usize, cfg: &CellConfig, params: &DeviceParams) -> Result<FecamCell> {
    let w = cfg.level_window(k, k)?;
    program_analog(w.lower, w.upper, cfg, params)
}

/// Programs a ternary digit. Query voltages are `0` for a 0 bit and `vdd` for a 1 bit.
pub fn program_digital(bit: DigitalBit, cfg: &CellConfig, params: &DeviceParams) -> FecamCell {
    let erased = FeFetState::erased(params);
    let clamp = |vth: f64| vth.clamp(params.vth_low, params.vth_high);
    let (upper_fet, lower_fet) = match bit {
        DigitalBit::One => (
            erased,
            FeFetState::from_polarization(
                params,
                (params.vth_high - clamp(cfg.vdd - cfg.digital_one_lower)) / params.vth_span(),
            ),
        ),
        DigitalBit::Zero => (
            FeFetState::from_polarization(
                params,
                (params.vth_high - clamp(cfg.digital_zero_upper)) / params.vth_span(),
            ),
            erased,
        ),
        DigitalBit::DontCare => (erased, erased),
    };
    FecamCell {
        upper_fet,
        lower_fet,
        mode: CellMode::Digital,
    }
}

/// Total current the cell draws from the match line.
pub fn cell_current(cell: &FecamCell, v_sl: f64, v_ml: f64, cfg: &CellConfig, params: &DeviceParams) -> f64 {
    device::drain_current(params, v_sl, v_ml, cell.upper_fet.vth)
        + device::drain_current(params, inverter(v_sl, cfg), v_ml, cell.lower_fet.vth)
}

/// Cell current with the match line above `v_dsat`; `cell_current` equals this
/// times the drain-voltage factor.
pub fn cell_drive(cell: &FecamCell, v_sl: f64, cfg: &CellConfig, params: &DeviceParams) -> f64 {
    device::gate_drive(params, v_sl, cell.upper_fet.vth)
        + device::gate_drive(params, inverter(v_sl, cfg), cell.lower_fet.vth)
}

/// Cell-level match criterion: the cell current at full match-line voltage stays below `i_threshold`.
pub fn cell_matches(cell: &FecamCell, v_sl: f64, cfg: &CellConfig, params: &DeviceParams) -> bool {
    cell_current(cell, v_sl, cfg.vdd, cfg, params) < params.i_threshold
}

/// Edge resolution of [`match_window`] (V).
pub const WINDOW_RESOLUTION: f64 = 1e-6;

/// Maximal interval of search voltages where the cell matches, or `None` if empty.
pub fn match_window(cell: &FecamCell, cfg: &CellConfig, params: &DeviceParams) -> Option<Window> {
    let current = |v: f64| cell_current(cell, v, cfg.vdd, cfg, params);
    let matches = |v: f64| current(v) < params.i_threshold;

    // The current is a sum of an increasing and a decreasing branch; locate
    // the minimum on a 1 mV grid, then bisect each edge.
    let steps = (cfg.vdd / 1e-3).round().max(1.0) as usize;
    let best = (0..=steps)
        .map(|k| cfg.vdd * k as f64 / steps as f64)
        .min_by(|a, b| current(*a).total_cmp(&current(*b)))?;
    if !matches(best) {
        return None;
    }

    let bisect = |mut inside: f64, mut outside: f64| {
        while (inside - outside).abs() > WINDOW_RESOLUTION {
            let mid = 0.5 * (inside + outside);
            if matches(mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        0.5 * (inside + outside)
    };
    let lower = if matches(0.0) { 0.0 } else { bisect(best, 0.0) };
    let upper = if matches(cfg.vdd) {
        cfg.vdd
    } else {
        bisect(best, cfg.vdd)
    };
    Some(Window::new(lower, upper))
}

/// The adjacent windows `[b_k, b_{k+1})` of the level grid.
pub fn quantized_levels(cfg: &CellConfig) -> Vec<Window> {
    cfg.level_bounds
        .windows(2)
        .map(|w| Window::new(w[0], w[1]))
        .collect()
}

/// Largest number of equal-width levels, up to `max_levels`, that can be packed
/// into the configured grid span and still be told apart under threshold
/// variation `sigma_vth`.
///
/// A grid of `L` levels is separable when, in each of `trials` draws, every
/// level's cell (both thresholds perturbed) matches its own center voltage
/// and rejects the centers of its neighbors. Draws are seeded per
/// `(L, trial, level)`, and each perturbation scales with `sigma_vth`, so
/// calls with the same seed and different sigmas share their random normals.
pub fn distinguishable_levels(
    cfg: &CellConfig,
    params: &DeviceParams,
    sigma_vth: f64,
    trials: usize,
    max_levels: usize,
    seed: u64,
) -> Result<usize> {
    if !(sigma_vth >= 0.0) {
        return Err(FecamError::InvalidParameter(format!(
            "variation sigma must be non-negative, got {sigma_vth}"
        )));
    }
    let start = cfg.level_bounds[0];
    let end = cfg.level_bounds[cfg.level_count];
    let mut best = 0;
    for levels in 1..=max_levels {
        let step = (end - start) / levels as f64;
        let bound = |k: usize| start + step * k as f64;
        let center = |k: usize| start + step * (k as f64 + 0.5);
        let mut separable = true;
        'trials: for trial in 0..trials {
            for k in 0..levels {
                let nominal = program_analog(bound(k), bound(k + 1), cfg, params)?;
                let stream = seed ^ ((levels as u64) << 48) ^ ((trial as u64) << 20) ^ k as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(stream);
                let mut cell = nominal;
                cell.upper_fet = FeFetState::with_vth(
                    params,
                    device::perturb_vth(params, nominal.upper_fet.vth, sigma_vth, &mut rng)?,
                )?;
                cell.lower_fet = FeFetState::with_vth(
                    params,
                    device::perturb_vth(params, nominal.lower_fet.vth, sigma_vth, &mut rng)?,
                )?;
                let own = cell_matches(&cell, center(k), cfg, params);
                let below = k == 0 || !cell_matches(&cell, center(k - 1), cfg, params);
                let above = k + 1 == levels || !cell_matches(&cell, center(k + 1), cfg, params);
                if !(own && below && above) {
                    separable = false;
                    break 'trials;
                }
            }
        }
        if separable {
            best = levels;
        }
    }
    Ok(best)
}
