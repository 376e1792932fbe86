//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Expected values are restated here from first principles rather than taken
//! from the library, so a wrong constant in the library shows up as a failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;
use std::time::{Duration, Instant};

use fecam::array::{
    bounds_sweep, discharge_time, discharge_time_limit, measure_bounds, search, FecamArray, MatchLineParams,
    SearchResult, SenseTime, WritePlan,
};
use fecam::cell::{distinguishable_levels, program_analog, program_level, CellConfig, Window};
use fecam::cost::{per_bit_comparison, routing_report, CamMode, CostParams};
use fecam::device::{apply_variation, pulse_for_vth, vth_from_pulse, DeviceParams, WritePulse};
use fecam::encoder::{
    compile_table, entries_match, range_to_analog_entries, range_to_prefixes, RangeRule, TableMode,
};
use fecam::FecamError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !($cond) {
            return Err(format!($($fmt)+));
        }
    };
}

fn lib<T>(r: fecam::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| format!("library error: {e}"))
}

fn uniform(rows: usize, cols: usize, lo: f64, hi: f64) -> std::result::Result<FecamArray, String> {
    let mut arr = lib(FecamArray::with_defaults(rows, cols))?;
    let cell = lib(program_analog(lo, hi, &arr.cfg, &arr.params))?;
    for r in 0..rows {
        lib(arr.set_row(r, &vec![cell; cols]))?;
    }
    Ok(arr)
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn in_time(start: Instant, limit: Duration) -> Check {
    let el = start.elapsed();
    ensure!(el < limit, "took {el:.2?}, limit {limit:?}");
    Ok(())
}

fn cell_window_reproduction() -> Check {
    let start = Instant::now();
    let arr = uniform(1, 1, 0.4, 0.6)?;
    for (v, want) in [(0.3, false), (0.5, true), (0.7, false)] {
        let got = lib(search(&arr, &[v], SenseTime::Auto))?.matches()[0];
        ensure!(got == want, "v_sl = {v}: match = {got}, expected {want}");
    }
    let w = lib(measure_bounds(&arr, 0, SenseTime::Auto))?.ok_or("no matching interval")?;
    ensure!(
        within(w.lower, 0.4, 0.020) && within(w.upper, 0.6, 0.020),
        "bounds [{:.4}, {:.4}]",
        w.lower,
        w.upper
    );
    in_time(start, Duration::from_secs(1))
}

fn three_bit_levels() -> Check {
    let start = Instant::now();
    const BAND: f64 = 0.025;
    let mut arr = lib(FecamArray::with_defaults(8, 1))?;
    // fence posts 0.1, 0.2, ..., 0.9 V
    let windows: Vec<Window> = (0..8)
        .map(|k| Window::new(0.1 + 0.1 * k as f64, 0.2 + 0.1 * k as f64))
        .collect();
    for k in 0..8 {
        let cell = lib(program_level(k, &arr.cfg, &arr.params))?;
        lib(arr.set_cell(k, 0, cell))?;
    }
    let sweep = lib(bounds_sweep(&arr, SenseTime::Auto))?;
    let edges: Vec<f64> = (0..=8).map(|k| 0.1 + 0.1 * k as f64).collect();
    let mut checked = 0;
    for (v, row) in sweep.v_sl.iter().zip(&sweep.matches) {
        if edges.iter().any(|e| (v - e).abs() <= BAND) {
            continue;
        }
        checked += 1;
        let expected: Vec<bool> = windows.iter().map(|w| w.lower <= *v && *v <= w.upper).collect();
        ensure!(
            *row == expected,
            "v_sl = {v:.3}: matches {row:?}, expected {expected:?}"
        );
        ensure!(
            expected.iter().filter(|&&m| m).count() <= 1,
            "windows overlap at {v}"
        );
    }
    ensure!(
        checked > 300,
        "only {checked} sweep points outside the transition bands"
    );
    in_time(start, Duration::from_secs(10))
}

fn row_invariance() -> Check {
    let mut bounds = Vec::new();
    for rows in [1, 16, 64] {
        let arr = uniform(rows, 1, 0.4, 0.6)?;
        let sweep = lib(bounds_sweep(&arr, SenseTime::Auto))?;
        for r in 0..rows {
            bounds.push((
                rows,
                sweep.bounds(r).ok_or(format!("R={rows} row {r}: no match"))?,
            ));
        }
    }
    let (_, first) = bounds[0];
    for (rows, w) in &bounds {
        ensure!(
            within(w.lower, first.lower, 1e-3) && within(w.upper, first.upper, 1e-3),
            "R={rows}: [{:.4}, {:.4}] vs [{:.4}, {:.4}]",
            w.lower,
            w.upper,
            first.lower,
            first.upper
        );
    }
    Ok(())
}

fn column_adaptation() -> Check {
    let ml = MatchLineParams::default();
    // C_ML = c_pmos + N (c_drain + c_parasitic); dt = C_ML dV / (N I)
    let (c_pmos, c_d, c_p, dv, i_avg) = (0.10e-15, 0.35e-15, 0.05e-15, 0.5, 25e-9);
    ensure!(
        ml.c_pmos == c_pmos
            && ml.c_drain == c_d
            && ml.c_parasitic == c_p
            && ml.delta_v_ml == dv
            && ml.i_discharge_avg == i_avg,
        "match-line defaults differ from the calibration this check restates: {ml:?}"
    );
    let mut prev = f64::INFINITY;
    for cols in [1usize, 8, 32, 64] {
        let n = cols as f64;
        let oracle = (c_pmos + n * (c_d + c_p)) * dv / (n * i_avg);
        let t = lib(discharge_time(&ml, cols))?;
        ensure!(
            ((t - oracle) / oracle).abs() < 1e-3,
            "C={cols}: sense time {t:e} vs {oracle:e}"
        );
        ensure!(t < prev, "C={cols}: sense time {t:e} not below {prev:e}");
        prev = t;

        let arr = uniform(1, cols, 0.4, 0.6)?;
        let w = lib(measure_bounds(&arr, 0, SenseTime::Auto))?.ok_or(format!("C={cols}: no match"))?;
        ensure!(
            within(w.lower, 0.4, 0.020) && within(w.upper, 0.6, 0.020),
            "C={cols}: bounds [{:.4}, {:.4}]",
            w.lower,
            w.upper
        );
    }
    let asym = dv / i_avg * (c_d + c_p);
    let lim = discharge_time_limit(&ml);
    ensure!(
        ((lim - asym) / asym).abs() < 1e-3,
        "asymptote {lim:e} vs {asym:e}"
    );
    Ok(())
}

fn write_disturb() -> Check {
    let mut arr = lib(FecamArray::with_defaults(8, 8))?;
    let cells = vec![lib(program_level(3, &arr.cfg, &arr.params))?; 8];
    let four_volt = |mut plan: WritePlan| {
        plan.sl_pulses.iter_mut().for_each(|p| *p = 4.0);
        plan.slb_pulses.iter_mut().for_each(|p| *p = 4.0);
        plan
    };
    let plan = four_volt(lib(WritePlan::v_half(&arr, 2, &cells))?);
    ensure!(
        plan.unselected_bias
            .iter()
            .enumerate()
            .all(|(r, &b)| r == 2 || b == 2.0),
        "unselected bias {:?}",
        plan.unselected_bias
    );
    let report = lib(arr.write_row(&plan))?;
    ensure!(
        within(report.max_abs_v_gs(), 2.0, 1e-9),
        "max |v_gs| = {}",
        report.max_abs_v_gs()
    );

    let before = arr.clone();
    let plan = four_volt(lib(WritePlan::with_bias(&arr, 2, &cells, 0.0))?);
    match arr.write_row(&plan) {
        Err(FecamError::DisturbViolation { .. }) => {}
        other => return Err(format!("zero-bias plan not rejected: {other:?}")),
    }
    ensure!(arr == before, "rejected plan modified the array");
    Ok(())
}

const REF_LO: u64 = 98305;
const REF_HI: u64 = 14712838;

fn routing_counts() -> Check {
    let rule = lib(RangeRule::new(REF_LO, REF_HI, 24, "fwd"))?;
    let t = lib(compile_table(std::slice::from_ref(&rule), TableMode::Ternary))?;
    let a = lib(compile_table(std::slice::from_ref(&rule), TableMode::ANALOG_3B))?;
    ensure!(t.entry_count() == 27, "ternary entries {}", t.entry_count());
    ensure!(a.entry_count() == 10, "analog entries {}", a.entry_count());
    // 24 one-bit cells per ternary entry, 24 / 3 = 8 cells per analog entry
    ensure!(t.cell_count() == 27 * 24, "ternary cells {}", t.cell_count());
    ensure!(a.cell_count() == 10 * 8, "analog cells {}", a.cell_count());
    let ratio = t.cell_count() as f64 / a.cell_count() as f64;
    ensure!(within(ratio, 8.1, 1e-3), "reduction {ratio}");
    Ok(())
}

fn cover_exactness() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..1000 {
        let width = rng.random_range(1..=16u32);
        let max = (1u64 << width) - 1;
        let (x, y) = (rng.random_range(0..=max), rng.random_range(0..=max));
        let (lo, hi) = (x.min(y), x.max(y));
        let tern = lib(range_to_prefixes(lo, hi, width))?;
        let divisors: Vec<u32> = (1..=4).filter(|b| width % b == 0).collect();
        let bpc = divisors[rng.random_range(0..divisors.len())];
        let analog = lib(range_to_analog_entries(lo, hi, width, bpc))?;
        for addr in 0..=max {
            let inside = lo <= addr && addr <= hi;
            ensure!(
                entries_match(&tern, addr) == inside,
                "#{i} ternary [{lo}, {hi}] w={width}: addr {addr}"
            );
            ensure!(
                entries_match(&analog, addr) == inside,
                "#{i} analog {bpc}b [{lo}, {hi}] w={width}: addr {addr}"
            );
        }
    }
    let tern = lib(range_to_prefixes(REF_LO, REF_HI, 24))?;
    let analog = lib(range_to_analog_entries(REF_LO, REF_HI, 24, 3))?;
    let edges = [0, REF_LO - 1, REF_LO, REF_HI, REF_HI + 1, (1 << 24) - 1];
    let samples = (0..1_000_000)
        .map(|_| rng.random_range(0..1u64 << 24))
        .chain(edges);
    for addr in samples {
        let inside = (REF_LO..=REF_HI).contains(&addr);
        ensure!(
            entries_match(&tern, addr) == inside,
            "ternary width 24: addr {addr}"
        );
        ensure!(
            entries_match(&analog, addr) == inside,
            "analog width 24: addr {addr}"
        );
    }
    in_time(start, Duration::from_secs(60))
}

fn cost_ratios() -> Check {
    let p = CostParams::default();
    // fJ per bit searched
    let (cmos, digital, analog) = (0.590, 0.182, 0.069);
    let saving = |m: CamMode| {
        per_bit_comparison(&p)
            .into_iter()
            .find(|c| c.mode == m)
            .map(|c| c.energy_saving)
            .unwrap_or(f64::NAN)
    };
    let ea = saving(CamMode::FecamAnalog);
    let ed = saving(CamMode::FecamDigital);
    ensure!(
        within(cmos / analog, 8.55, 0.05) && within(ea, cmos / analog, 1e-9),
        "analog saving {ea}"
    );
    ensure!(
        within(cmos / digital, 3.24, 0.05) && within(ed, cmos / digital, 1e-9),
        "digital saving {ed}"
    );

    let rule = lib(RangeRule::new(REF_LO, REF_HI, 24, "fwd"))?;
    let t = lib(compile_table(std::slice::from_ref(&rule), TableMode::Ternary))?;
    let a = lib(compile_table(std::slice::from_ref(&rule), TableMode::ANALOG_3B))?;
    let rep = lib(routing_report(&p, &t, &a))?;
    // 648 one-bit CMOS cells against 80 three-bit analog cells
    let energy_oracle = (648.0 * cmos) / (80.0 * 3.0 * analog);
    let area_oracle = 648.0 / (80.0 * 3.0 * 0.045);
    ensure!(
        within(energy_oracle, 23.08, 0.1),
        "oracle energy ratio {energy_oracle}"
    );
    ensure!(
        within(rep.energy_ratio, energy_oracle, 1e-9),
        "energy ratio {}",
        rep.energy_ratio
    );
    ensure!(
        within(rep.area_ratio, area_oracle, 1e-9),
        "area ratio {}",
        rep.area_ratio
    );
    ensure!(within(rep.area_ratio, 60.0, 1.0), "area ratio {}", rep.area_ratio);
    ensure!(
        within(rep.area_ratio_gap(), (60.5 - rep.area_ratio) / 60.5, 1e-9),
        "area gap {} not reported against 60.5",
        rep.area_ratio_gap()
    );
    let kv = rep.to_key_value();
    ensure!(
        kv.contains("area_ratio_gap") && kv.contains("reference_area_ratio"),
        "report omits the area gap"
    );
    Ok(())
}

fn property_suites() -> Check {
    let params = DeviceParams::default();
    let cfg = CellConfig::default();

    let vths: Vec<f64> = (0..41)
        .map(|k| vth_from_pulse(&params, &WritePulse::program(2.0 + 0.05 * k as f64)))
        .collect::<fecam::Result<_>>()
        .map_err(|e| e.to_string())?;
    ensure!(
        vths.windows(2).all(|w| w[1] <= w[0]),
        "vth not monotone in amplitude: {vths:?}"
    );
    ensure!(vths[0] > vths[40], "vth flat over the amplitude grid");

    let (lo, hi) = fecam::device::programmable_vth_range(&params);
    for k in 0..=50 {
        let target = lo + (hi - lo) * k as f64 / 50.0;
        let pulse = lib(pulse_for_vth(&params, target))?;
        let back = lib(vth_from_pulse(&params, &pulse))?;
        ensure!(within(back, target, 1e-3), "round trip {target} -> {back}");
    }

    let mut arr = lib(FecamArray::with_defaults(4, 4))?;
    for r in 0..4 {
        let cells: Vec<_> = (0..4)
            .map(|c| program_level((r + 2 * c) % 8, &arr.cfg, &arr.params))
            .collect::<fecam::Result<_>>()
            .map_err(|e| e.to_string())?;
        lib(arr.set_row(r, &cells))?;
    }
    let query = [0.15, 0.45, 0.62, 0.88];
    let a = lib(search(&arr, &query, SenseTime::Auto))?;
    for (r, row) in a.rows.iter().enumerate() {
        ensure!(
            row.trace.windows(2).all(|w| w[1].1 <= w[0].1),
            "row {r}: match line voltage rises"
        );
    }
    let b = lib(search(&arr, &query, SenseTime::Auto))?;
    let bits = |s: &SearchResult| -> Vec<u64> {
        s.rows
            .iter()
            .flat_map(|r| r.trace.iter().flat_map(|(t, v)| [t.to_bits(), v.to_bits()]))
            .collect()
    };
    ensure!(
        bits(&a) == bits(&b) && a.matches() == b.matches(),
        "search reruns differ"
    );
    ensure!(
        lib(apply_variation(&params, 0.5, 0.02, 9))?.to_bits()
            == lib(apply_variation(&params, 0.5, 0.02, 9))?.to_bits(),
        "variation draws differ for one seed"
    );

    let sigmas = [0.0, 0.01, 0.02, 0.04];
    let counts: Vec<usize> = sigmas
        .iter()
        .map(|&s| distinguishable_levels(&cfg, &params, s, 32, 16, 11))
        .collect::<fecam::Result<_>>()
        .map_err(|e| e.to_string())?;
    ensure!(
        counts.windows(2).all(|w| w[1] <= w[0]) && counts[3] < counts[0],
        "separable levels {counts:?} for sigma {sigmas:?}"
    );
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 cell window reproduction", cell_window_reproduction),
        ("2 three-bit level windows", three_bit_levels),
        ("3 row invariance", row_invariance),
        ("4 column adaptation", column_adaptation),
        ("5 write disturb", write_disturb),
        ("6 routing entry counts", routing_counts),
        ("7 cover exactness", cover_exactness),
        ("8 cost ratios", cost_ratios),
        ("9 property suites", property_suites),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let el = start.elapsed();
        match outcome {
            Ok(()) => println!("PASS  criterion {name} ({el:.2?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name} ({el:.2?}): {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
