use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fecam_cli::{
    cmd_bench, cmd_route, cmd_search, cmd_sweep, cmd_transfer, load_config, parse_values, read_file,
    write_file, CliError, RouteMode, SweepAxis, SweepSpec, CONFIG_ENV,
};

#[derive(Parser)]
#[command(name = "fecam", version, about = "FeFET content-addressable memory simulator")]
struct Cli {
    /// Calibration file (TOML). Defaults apply when absent.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Override a config value, e.g. `--set matchline.c_drain=0.4e-15`. Repeatable.
    #[arg(long = "set", global = true, value_name = "PATH=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Drain current versus gate voltage after each programming amplitude.
    Transfer {
        /// Amplitudes as `a,b,c` or `start:stop:step` (V).
        #[arg(long, default_value = "2:4:0.05", allow_hyphen_values = true)]
        amplitudes: String,
        /// Gate sweep step over 0-1.2 V (V).
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transient search of an array description against query vectors.
    Search {
        #[arg(long)]
        array: PathBuf,
        /// One query per line, comma or space separated voltages.
        #[arg(long)]
        queries: PathBuf,
        /// `auto` (column-adapted), a time in seconds, or a row trip current such as `25e-9A`.
        #[arg(long, default_value = "auto")]
        sense: String,
        /// Summary CSV destination (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory receiving `trace_<query>.csv` match-line waveforms.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
    /// Bounds and sense time versus rows or columns, or match outcome versus search voltage.
    Sweep {
        /// rows, cols, or v_sl.
        #[arg(long)]
        axis: String,
        /// Axis values as `a,b,c` or `start:stop:step`.
        #[arg(long)]
        values: String,
        /// Window programmed into every cell, `lower,upper` (V).
        #[arg(long, default_value = "0.4,0.6")]
        window: String,
        #[arg(long, default_value = "auto")]
        sense: String,
        /// Array description used by the v_sl axis.
        #[arg(long)]
        array: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile range rules into CAM tables and compare their cost.
    Route {
        /// One `lo hi width action` rule per line.
        #[arg(long)]
        rules: PathBuf,
        /// ternary, analog, or both.
        #[arg(long, default_value = "both")]
        mode: String,
        /// Check lookups against interval containment.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Also write the comparison as a CSV header + row.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-bit energy and area comparison of the three CAM flavors.
    Bench {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_window(spec: &str) -> Result<(f64, f64), CliError> {
    match parse_values(spec)?[..] {
        [lo, hi] => Ok((lo, hi)),
        _ => Err(CliError::Usage(format!(
            "window must be `lower,upper`, got `{spec}`"
        ))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = load_config(cli.config.as_deref(), &cli.overrides)?;
    match cli.command {
        Command::Transfer {
            amplitudes,
            step,
            out,
        } => {
            let csv = cmd_transfer(&cfg, &parse_values(&amplitudes)?, step)?;
            emit(out.as_deref(), &csv)
        }
        Command::Search {
            array,
            queries,
            sense,
            out,
            trace_dir,
        } => {
            let res = cmd_search(&cfg, &read_file(&array)?, &read_file(&queries)?, &sense)?;
            for w in &res.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(dir) = trace_dir {
                std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
                    path: dir.clone(),
                    source,
                })?;
                for (i, t) in res.traces.iter().enumerate() {
                    write_file(&dir.join(format!("trace_{i}.csv")), t)?;
                }
            }
            emit(out.as_deref(), &res.summary)
        }
        Command::Sweep {
            axis,
            values,
            window,
            sense,
            array,
            out,
        } => {
            let spec = SweepSpec {
                axis: axis.parse::<SweepAxis>()?,
                values: parse_values(&values)?,
                window: parse_window(&window)?,
                sense,
                array_text: array.as_deref().map(read_file).transpose()?,
            };
            emit(out.as_deref(), &cmd_sweep(&cfg, &spec)?)
        }
        Command::Route {
            rules,
            mode,
            verify,
            samples,
            csv,
            out,
        } => {
            let res = cmd_route(
                &cfg,
                &read_file(&rules)?,
                mode.parse::<RouteMode>()?,
                verify.then_some(samples),
            )?;
            if let (Some(path), Some(report)) = (csv, &res.report) {
                write_file(
                    &path,
                    &format!(
                        "{}\n{}\n",
                        fecam::cost::ComparisonReport::csv_header(),
                        report.to_csv_row()
                    ),
                )?;
            }
            emit(out.as_deref(), &res.render(&cfg))?;
            if res.all_verified {
                Ok(())
            } else {
                Err(CliError::Usage("verification failed".into()))
            }
        }
        Command::Bench { out } => emit(out.as_deref(), &cmd_bench(&cfg)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.category());
            ExitCode::FAILURE
        }
    }
}
