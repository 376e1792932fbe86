//! Global calibration file.
//!
//! A TOML document with one section per component; every field is optional
//! and falls back to its default:
//!
//! ```toml
//! rng_seed = 7
//!
//! [device]
//! subthreshold_slope = 0.08
//!
//! [cell]
//! vdd = 1.0
//!
//! [matchline]
//! c_drain = 0.35e-15
//!
//! [cost.energy_per_bit]
//! cmos_tcam = 0.59e-15
//! fecam_digital = 0.182e-15
//! fecam_analog = 0.069e-15
//! ```

use serde::{Deserialize, Serialize};

use crate::array::MatchLineParams;
use crate::cell::CellConfig;
use crate::cost::CostParams;
use crate::device::DeviceParams;
use crate::error::{FecamError, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlobalConfig {
    pub device: DeviceParams,
    pub cell: CellConfig,
    pub matchline: MatchLineParams,
    pub cost: CostParams,
    pub rng_seed: u64,
}

fn toml_error(text: &str, err: &toml::de::Error) -> FecamError {
    let line = err
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
        .unwrap_or(0);
    FecamError::Parse {
        line,
        msg: err.message().trim().to_string(),
    }
}

impl GlobalConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with_overrides(text, &[])
    }

    /// Parses `text`, then applies `section.field=value` overrides (value in TOML syntax).
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let cfg: GlobalConfig = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
        if overrides.is_empty() {
            cfg.validate()?;
            return Ok(cfg);
        }
        let mut table: toml::Table = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        let cfg: GlobalConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| {
                FecamError::InvalidParameter(format!("override: {}", e.message()))
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.device.validate()?;
        self.cell.validate()?;
        self.matchline.validate()?;
        self.cost.validate()?;
        if (self.cell.vdd - self.matchline.vdd).abs() > 1e-12 {
            return Err(FecamError::InconsistentInput(format!(
                "cell.vdd = {} V but matchline.vdd = {} V",
                self.cell.vdd, self.matchline.vdd
            )));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }
}

fn apply_override(table: &mut toml::Table, ov: &str) -> Result<()> {
    let bad = |msg: String| FecamError::InvalidParameter(format!("override `{ov}`: {msg}"));
    let (path, raw) = ov
        .split_once('=')
        .ok_or_else(|| bad("expected `path=value`".into()))?;
    let value: toml::Value = {
        let doc: toml::Table = toml::from_str(&format!("v = {}", raw.trim()))
            .or_else(|_| toml::from_str(&format!("v = \"{}\"", raw.trim())))
            .map_err(|e: toml::de::Error| bad(e.message().to_string()))?;
        doc["v"].clone()
    };
    let keys: Vec<&str> = path.trim().split('.').collect();
    let (last, parents) = keys.split_last().ok_or_else(|| bad("empty path".into()))?;
    let mut cur = table;
    for k in parents {
        cur = cur
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| bad(format!("`{k}` is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
