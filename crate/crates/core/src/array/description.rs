//! Line-oriented array description files.
//!
//! ```text
//! # comment
//! rows 2
//! cols 3
//! ml c_drain 0.35e-15          # match-line parameter override
//! fill digital X               # default for every cell (this is also the implicit default)
//! row 0 analog 0.4 0.6 ; level 3 ; digital 1
//! cell 1 2 level 5
//! ```
//!
//! Cell specs are `analog <lo> <hi>`, `level <k>`, or `digital 0|1|X`. Later
//! lines override earlier ones.

use super::{FecamArray, MatchLineParams};
use crate::cell::{program_analog, program_digital, program_level, CellConfig, DigitalBit, FecamCell};
use crate::device::DeviceParams;
use crate::error::{FecamError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellSpec {
    Analog { lower: f64, upper: f64 },
    Level(usize),
    Digital(DigitalBit),
}

impl CellSpec {
    pub fn program(&self, cfg: &CellConfig, params: &DeviceParams) -> Result<FecamCell> {
        match *self {
            CellSpec::Analog { lower, upper } => program_analog(lower, upper, cfg, params),
            CellSpec::Level(k) => program_level(k, cfg, params),
            CellSpec::Digital(bit) => Ok(program_digital(bit, cfg, params)),
        }
    }

    fn parse(tokens: &[&str]) -> std::result::Result<Self, String> {
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| format!("expected a number, got `{s}`"))
        };
        match tokens {
            ["analog", lo, hi] => Ok(CellSpec::Analog {
                lower: num(lo)?,
                upper: num(hi)?,
            }),
            ["level", k] => k
                .parse()
                .map(CellSpec::Level)
                .map_err(|_| format!("expected a level index, got `{k}`")),
            ["digital", b] if b.chars().count() == 1 => {
                DigitalBit::from_char(b.chars().next().unwrap_or(' '))
                    .map(CellSpec::Digital)
                    .ok_or_else(|| format!("expected 0, 1 or X, got `{b}`"))
            }
            _ => Err(format!(
                "expected `analog <lo> <hi>`, `level <k>` or `digital 0|1|X`, got `{}`",
                tokens.join(" ")
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayDescription {
    pub rows: usize,
    pub cols: usize,
    pub ml_overrides: Vec<(String, f64)>,
    pub fill: CellSpec,
    /// `(row, col, spec, line)` in file order.
    pub cells: Vec<(usize, usize, CellSpec, usize)>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> FecamError {
    FecamError::Parse {
        line,
        msg: msg.into(),
    }
}

impl ArrayDescription {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = None;
        let mut cols = None;
        let mut ml_overrides = Vec::new();
        let mut fill = CellSpec::Digital(DigitalBit::DontCare);
        // Row lines are resolved once `cols` is known.
        let mut pending: Vec<(usize, usize, CellSpec, usize)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let index = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| parse_err(line, format!("expected an index, got `{s}`")))
            };
            match tokens[0] {
                "rows" | "cols" => {
                    let [_, n] = tokens[..] else {
                        return Err(parse_err(line, format!("expected `{} <count>`", tokens[0])));
                    };
                    let n = index(n)?;
                    if tokens[0] == "rows" {
                        rows = Some(n);
                    } else {
                        cols = Some(n);
                    }
                }
                "ml" => {
                    let [_, key, value] = tokens[..] else {
                        return Err(parse_err(line, "expected `ml <field> <value>`"));
                    };
                    let value = value
                        .parse::<f64>()
                        .map_err(|_| parse_err(line, format!("expected a number, got `{value}`")))?;
                    ml_overrides.push((key.to_string(), value));
                }
                "fill" => fill = CellSpec::parse(&tokens[1..]).map_err(|m| parse_err(line, m))?,
                "cell" => {
                    if tokens.len() < 4 {
                        return Err(parse_err(line, "expected `cell <row> <col> <spec>`"));
                    }
                    let spec = CellSpec::parse(&tokens[3..]).map_err(|m| parse_err(line, m))?;
                    pending.push((index(tokens[1])?, index(tokens[2])?, spec, line));
                }
                "row" => {
                    if tokens.len() < 3 {
                        return Err(parse_err(line, "expected `row <row> <spec> ; <spec> ...`"));
                    }
                    let r = index(tokens[1])?;
                    let rest = content.splitn(3, char::is_whitespace).nth(2).unwrap_or("").trim();
                    for (c, part) in rest.split(';').enumerate() {
                        let t: Vec<&str> = part.split_whitespace().collect();
                        let spec =
                            CellSpec::parse(&t).map_err(|m| parse_err(line, format!("column {c}: {m}")))?;
                        pending.push((r, c, spec, line));
                    }
                }
                other => return Err(parse_err(line, format!("unknown directive `{other}`"))),
            }
        }

        let rows = rows.ok_or_else(|| parse_err(0, "missing `rows`"))?;
        let cols = cols.ok_or_else(|| parse_err(0, "missing `cols`"))?;
        let mut cells = Vec::with_capacity(pending.len());
        for (r, c, spec, line) in pending {
            if r >= rows || c >= cols {
                return Err(parse_err(
                    line,
                    format!("cell ({r}, {c}) outside {rows}x{cols} array"),
                ));
            }
            cells.push((r, c, spec, line));
        }
        Ok(ArrayDescription {
            rows,
            cols,
            ml_overrides,
            fill,
            cells,
        })
    }

    /// Applies the `ml` overrides on top of `base`.
    pub fn match_line(&self, base: &MatchLineParams) -> Result<MatchLineParams> {
        let mut ml = base.clone();
        for (key, value) in &self.ml_overrides {
            let slot = match key.as_str() {
                "c_pmos" => &mut ml.c_pmos,
                "c_drain" => &mut ml.c_drain,
                "c_parasitic" => &mut ml.c_parasitic,
                "delta_v_ml" => &mut ml.delta_v_ml,
                "i_discharge_avg" => &mut ml.i_discharge_avg,
                "vdd" => &mut ml.vdd,
                other => {
                    return Err(FecamError::InvalidParameter(format!(
                        "unknown match-line field `{other}`"
                    )))
                }
            };
            *slot = *value;
        }
        Ok(ml)
    }

    /// Builds and programs the described array.
    pub fn build(&self, cfg: &CellConfig, params: &DeviceParams, ml: &MatchLineParams) -> Result<FecamArray> {
        let ml = self.match_line(ml)?;
        let mut arr = FecamArray::new(self.rows, self.cols, cfg.clone(), params.clone(), ml)?;
        let fill = self.fill.program(cfg, params)?;
        for r in 0..self.rows {
            arr.set_row(r, &vec![fill; self.cols])?;
        }
        for &(r, c, spec, line) in &self.cells {
            let cell = spec
                .program(cfg, params)
                .map_err(|e| parse_err(line, e.to_string()))?;
            arr.set_cell(r, c, cell)?;
        }
        Ok(arr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# two rows
rows 2
cols 3
ml c_drain 0.40e-15
row 0 analog 0.4 0.6 ; level 3 ; digital 1
cell 1 2 level 5   # trailing comment
";

    #[test]
    fn parses_and_builds() {
        let desc = ArrayDescription::parse(SAMPLE).unwrap();
        assert_eq!((desc.rows, desc.cols), (2, 3));
        assert_eq!(desc.cells.len(), 4);
        let arr = desc
            .build(
                &CellConfig::default(),
                &DeviceParams::default(),
                &MatchLineParams::default(),
            )
            .unwrap();
        assert_eq!(arr.ml.c_drain, 0.40e-15);
        assert!((arr.cell(0, 0).upper_fet.vth - 0.6).abs() < 1e-12);
        assert!((arr.cell(0, 1).upper_fet.vth - 0.5).abs() < 1e-12);
        assert_eq!(
            *arr.cell(1, 0),
            FecamCell::wildcard(&arr.params).with_mode_digital()
        );
    }

    #[test]
    fn reports_line_numbers() {
        let err = ArrayDescription::parse("rows 1\ncols 1\ncell 0 0 analog 0.4\n").unwrap_err();
        assert!(matches!(err, FecamError::Parse { line: 3, .. }), "{err:?}");
        let err = ArrayDescription::parse("rows 1\ncols 1\ncell 0 4 level 1\n").unwrap_err();
        assert!(matches!(err, FecamError::Parse { line: 3, .. }), "{err:?}");
        let err = ArrayDescription::parse("rows 1\nbogus\n").unwrap_err();
        assert!(matches!(err, FecamError::Parse { line: 2, .. }), "{err:?}");
        let err = ArrayDescription::parse("rows 1\ncols 1\ncell 0 0 analog 0.6 0.4\n")
            .unwrap()
            .build(
                &CellConfig::default(),
                &DeviceParams::default(),
                &MatchLineParams::default(),
            )
            .unwrap_err();
        assert!(matches!(err, FecamError::Parse { line: 3, .. }), "{err:?}");
    }

    impl FecamCell {
        fn with_mode_digital(mut self) -> Self {
            self.mode = crate::cell::CellMode::Digital;
            self
        }
    }
}
