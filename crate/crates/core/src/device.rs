//! Phenomenological multilevel FeFET model.
//!
//! The ferroelectric layer is treated as an ensemble of domains whose
//! coercive voltages follow a Gaussian distribution. A positive write pulse
//! of amplitude `a` switches every domain with coercive voltage below `a`,
//! so the switched fraction is the Gaussian CDF evaluated at `a`. The
//! threshold voltage moves linearly from `vth_high` (fully erased) to
//! `vth_low` (fully switched) with that fraction.
//!
//! Writes are erase-then-program: the state after a write depends only on
//! the last pulse.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{FecamError, Result};

/// Amplitude tolerance used when comparing against the erase level.
const AMPLITUDE_EPS: f64 = 1e-9;

/// Device calibration constants, all in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceParams {
    /// Threshold voltage of the fully switched state (V).
    pub vth_low: f64,
    /// Threshold voltage of the erased state (V).
    pub vth_high: f64,
    /// Mean coercive voltage of the domain ensemble (V).
    pub coercive_mu: f64,
    /// Spread of the coercive voltage distribution (V).
    pub coercive_sigma: f64,
    /// Subthreshold swing (V/decade).
    pub subthreshold_slope: f64,
    /// Saturated on-current (A).
    pub i_on: f64,
    /// Off-state leakage floor (A).
    pub i_off: f64,
    /// Drain current that defines "turned on" (A). `v_gs = vth` yields exactly this current.
    pub i_threshold: f64,
    /// Drain-source voltage above which the current no longer depends on `v_ds` (V).
    pub v_dsat: f64,
    /// Smallest accepted programming amplitude (V).
    pub v_prog_min: f64,
    /// Largest accepted programming amplitude (V).
    pub v_prog_max: f64,
    /// Amplitude of the erase pulse (V, negative).
    pub erase_amplitude: f64,
    /// Largest gate-source magnitude an unselected cell tolerates without disturb (V).
    pub disturb_limit: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams {
            vth_low: 0.1,
            vth_high: 1.1,
            coercive_mu: 3.0,
            coercive_sigma: 0.4,
            subthreshold_slope: 0.080,
            i_on: 1e-6,
            i_off: 1e-12,
            i_threshold: 25e-9,
            v_dsat: 0.1,
            v_prog_min: 2.0,
            v_prog_max: 4.0,
            erase_amplitude: -4.0,
            disturb_limit: 2.0,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(FecamError::InvalidParameter(format!("device: {msg}")));
        if !(self.vth_low < self.vth_high) {
            return bad("vth_low must be below vth_high");
        }
        if !(self.coercive_sigma > 0.0) {
            return bad("coercive_sigma must be positive");
        }
        if !(self.subthreshold_slope > 0.0) {
            return bad("subthreshold_slope must be positive");
        }
        if !(self.i_off > 0.0 && self.i_off < self.i_threshold && self.i_threshold < self.i_on) {
            return bad("currents must satisfy 0 < i_off < i_threshold < i_on");
        }
        if !(self.v_dsat > 0.0) {
            return bad("v_dsat must be positive");
        }
        if !(0.0 < self.v_prog_min && self.v_prog_min < self.v_prog_max) {
            return bad("programming range must satisfy 0 < v_prog_min < v_prog_max");
        }
        if !(self.erase_amplitude < 0.0) {
            return bad("erase_amplitude must be negative");
        }
        if !(self.disturb_limit > 0.0) {
            return bad("disturb_limit must be positive");
        }
        Ok(())
    }

    pub fn vth_span(&self) -> f64 {
        self.vth_high - self.vth_low
    }

    pub fn erase_pulse(&self) -> WritePulse {
        WritePulse {
            amplitude: self.erase_amplitude,
            width: DEFAULT_PULSE_WIDTH,
        }
    }

    fn is_erase(&self, amplitude: f64) -> bool {
        (amplitude - self.erase_amplitude).abs() <= AMPLITUDE_EPS
    }
}

/// Default pulse width (s). Width is carried but does not affect the programmed state.
pub const DEFAULT_PULSE_WIDTH: f64 = 1e-6;

/// A single gate write pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WritePulse {
    pub amplitude: f64,
    pub width: f64,
}

impl WritePulse {
    pub fn program(amplitude: f64) -> Self {
        WritePulse {
            amplitude,
            width: DEFAULT_PULSE_WIDTH,
        }
    }

    pub fn validate(&self, params: &DeviceParams) -> Result<()> {
        if !(self.width > 0.0) {
            return Err(FecamError::InvalidPulse(format!(
                "width must be positive, got {}",
                self.width
            )));
        }
        let a = self.amplitude;
        let in_program_range =
            a >= params.v_prog_min - AMPLITUDE_EPS && a <= params.v_prog_max + AMPLITUDE_EPS;
        if in_program_range || params.is_erase(a) {
            Ok(())
        } else {
            Err(FecamError::InvalidPulse(format!(
                "amplitude {a} V is neither in [{}, {}] V nor the erase level {} V",
                params.v_prog_min, params.v_prog_max, params.erase_amplitude
            )))
        }
    }
}

/// Programmed state of one FeFET.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeFetState {
    pub vth: f64,
    pub polarization_fraction: f64,
}

impl FeFetState {
    pub fn erased(params: &DeviceParams) -> Self {
        FeFetState {
            vth: params.vth_high,
            polarization_fraction: 0.0,
        }
    }

    pub fn from_polarization(params: &DeviceParams, fraction: f64) -> Self {
        let fraction = fraction.clamp(0.0, 1.0);
        FeFetState {
            vth: params.vth_high - fraction * params.vth_span(),
            polarization_fraction: fraction,
        }
    }

    /// State with the given threshold voltage; fails outside `[vth_low, vth_high]`.
    pub fn with_vth(params: &DeviceParams, vth: f64) -> Result<Self> {
        if !(vth >= params.vth_low - AMPLITUDE_EPS && vth <= params.vth_high + AMPLITUDE_EPS) {
            return Err(FecamError::OutOfRange(format!(
                "threshold {vth} V outside [{}, {}] V",
                params.vth_low, params.vth_high
            )));
        }
        let vth = vth.clamp(params.vth_low, params.vth_high);
        Ok(FeFetState {
            vth,
            polarization_fraction: (params.vth_high - vth) / params.vth_span(),
        })
    }

    pub fn after_pulse(params: &DeviceParams, pulse: &WritePulse) -> Result<Self> {
        let fraction = polarization_after_pulse(params, pulse)?;
        Ok(FeFetState::from_polarization(params, fraction))
    }
}

fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Fraction of switched domains after an erase followed by `pulse`.
pub fn polarization_after_pulse(params: &DeviceParams, pulse: &WritePulse) -> Result<f64> {
    pulse.validate(params)?;
    if params.is_erase(pulse.amplitude) {
        return Ok(0.0);
    }
    let z = (pulse.amplitude - params.coercive_mu) / params.coercive_sigma;
    Ok(standard_normal_cdf(z))
}

pub fn vth_from_pulse(params: &DeviceParams, pulse: &WritePulse) -> Result<f64> {
    let p = polarization_after_pulse(params, pulse)?;
    Ok(params.vth_high - p * params.vth_span())
}

fn vth_at_amplitude(params: &DeviceParams, amplitude: f64) -> f64 {
    let z = (amplitude - params.coercive_mu) / params.coercive_sigma;
    params.vth_high - standard_normal_cdf(z) * params.vth_span()
}

/// Thresholds reachable by a single programming pulse, as `(lowest, highest)`.
/// The erased level `vth_high` is reachable as well via the erase pulse.
pub fn programmable_vth_range(params: &DeviceParams) -> (f64, f64) {
    (
        vth_at_amplitude(params, params.v_prog_max),
        vth_at_amplitude(params, params.v_prog_min),
    )
}

/// Tolerance on the programmed threshold (V).
pub const PROGRAM_TOLERANCE: f64 = 1e-3;

/// Finds the write pulse that programs `target_vth`, by bisection over the amplitude.
pub fn pulse_for_vth(params: &DeviceParams, target_vth: f64) -> Result<WritePulse> {
    if !(target_vth >= params.vth_low && target_vth <= params.vth_high) {
        return Err(FecamError::OutOfRange(format!(
            "target threshold {target_vth} V outside [{}, {}] V",
            params.vth_low, params.vth_high
        )));
    }
    if params.vth_high - target_vth <= PROGRAM_TOLERANCE {
        return Ok(params.erase_pulse());
    }
    let (reach_low, reach_high) = programmable_vth_range(params);
    if target_vth < reach_low - PROGRAM_TOLERANCE || target_vth > reach_high + PROGRAM_TOLERANCE {
        return Err(FecamError::OutOfRange(format!(
            "target threshold {target_vth} V not reachable with pulses in [{}, {}] V \
             (reachable [{reach_low:.4}, {reach_high:.4}] V)",
            params.v_prog_min, params.v_prog_max
        )));
    }

    // vth decreases with amplitude.
    let (mut lo, mut hi) = (params.v_prog_min, params.v_prog_max);
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if vth_at_amplitude(params, mid) > target_vth {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(WritePulse::program(0.5 * (lo + hi)))
}

/// Drain current of a FeFET with threshold `vth`.
///
/// Exponential subthreshold characteristic with a leakage floor and a hard
/// on-current clamp, multiplied by a linear `v_ds` factor that saturates at
/// `v_dsat`. At `v_gs = vth` and `v_ds >= v_dsat` the current is exactly
/// `i_threshold`.
pub fn drain_current(params: &DeviceParams, v_gs: f64, v_ds: f64, vth: f64) -> f64 {
    gate_drive(params, v_gs, vth) * vds_factor(params, v_ds)
}

/// Gate-controlled part of the drain current, valid for `v_ds >= v_dsat`.
pub fn gate_drive(params: &DeviceParams, v_gs: f64, vth: f64) -> f64 {
    let exp = 10f64.powf((v_gs - vth) / params.subthreshold_slope);
    (params.i_off + (params.i_threshold - params.i_off) * exp).min(params.i_on)
}

pub fn vds_factor(params: &DeviceParams, v_ds: f64) -> f64 {
    (v_ds.max(0.0) / params.v_dsat).min(1.0)
}

/// Perturbs a threshold with Gaussian device-to-device variation.
///
/// The result is clamped to `[vth_low, vth_high]` and depends only on the seed.
pub fn apply_variation(params: &DeviceParams, vth: f64, sigma_vth: f64, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perturb_vth(params, vth, sigma_vth, &mut rng)
}

/// Same as [`apply_variation`] but drawing from a caller-owned generator.
pub fn perturb_vth<R: rand::Rng + ?Sized>(
    params: &DeviceParams,
    vth: f64,
    sigma_vth: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(sigma_vth >= 0.0) || !sigma_vth.is_finite() {
        return Err(FecamError::InvalidParameter(format!(
            "variation sigma must be non-negative, got {sigma_vth}"
        )));
    }
    if sigma_vth == 0.0 {
        return Ok(vth);
    }
    let normal = Normal::new(0.0, sigma_vth).map_err(|e| FecamError::InvalidParameter(e.to_string()))?;
    Ok((vth + normal.sample(rng)).clamp(params.vth_low, params.vth_high))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p() -> DeviceParams {
        DeviceParams::default()
    }

    #[test]
    fn defaults_are_valid() {
        p().validate().unwrap();
    }

    #[test]
    fn erase_gives_zero_polarization_and_vth_high() {
        let params = p();
        let erase = params.erase_pulse();
        assert_eq!(polarization_after_pulse(&params, &erase).unwrap(), 0.0);
        assert_eq!(vth_from_pulse(&params, &erase).unwrap(), params.vth_high);
    }

    #[test]
    fn half_switching_at_mean_coercive_voltage() {
        let params = p();
        let pol = polarization_after_pulse(&params, &WritePulse::program(params.coercive_mu)).unwrap();
        assert_relative_eq!(pol, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn full_amplitude_lands_within_one_percent_of_vth_low() {
        let params = p();
        // Phi(2.5) from tables.
        let expected_fraction = 0.993_790_334_674_2;
        let pol = polarization_after_pulse(&params, &WritePulse::program(4.0)).unwrap();
        assert_relative_eq!(pol, expected_fraction, epsilon = 1e-10);
        let vth = vth_from_pulse(&params, &WritePulse::program(4.0)).unwrap();
        assert!((vth - params.vth_low) <= 0.01 * params.vth_span());
    }

    #[test]
    fn rejects_pulses_outside_the_allowed_ranges() {
        let params = p();
        for a in [0.0, 1.99, 4.01, -2.0, -4.5] {
            let err = polarization_after_pulse(&params, &WritePulse::program(a)).unwrap_err();
            assert_eq!(err.category(), "invalid-pulse");
        }
        let zero_width = WritePulse {
            amplitude: 3.0,
            width: 0.0,
        };
        assert!(polarization_after_pulse(&params, &zero_width).is_err());
    }

    #[test]
    fn pulse_for_vth_edge_targets() {
        let params = p();
        assert_eq!(
            pulse_for_vth(&params, params.vth_high).unwrap(),
            params.erase_pulse()
        );
        let mid = 0.5 * (params.vth_low + params.vth_high);
        let pulse = pulse_for_vth(&params, mid).unwrap();
        assert!((pulse.amplitude - params.coercive_mu).abs() < 1e-9);
        assert_eq!(
            pulse_for_vth(&params, 1.2).unwrap_err().category(),
            "out-of-range"
        );
        assert_eq!(
            pulse_for_vth(&params, 0.0).unwrap_err().category(),
            "out-of-range"
        );
        // Inside [vth_low, vth_high] but below what a 4 V pulse can reach.
        assert_eq!(
            pulse_for_vth(&params, 0.1).unwrap_err().category(),
            "out-of-range"
        );
    }

    #[test]
    fn drain_current_reference_points() {
        let params = p();
        let i = drain_current(&params, 0.6, 1.0, 0.6);
        assert_relative_eq!(i, params.i_threshold, max_relative = 1e-12);
        let half = drain_current(&params, 0.6, 0.5 * params.v_dsat, 0.6);
        assert_relative_eq!(half, 0.5 * params.i_threshold, max_relative = 1e-12);
        let floor = drain_current(&params, 0.6 - 10.0 * params.subthreshold_slope, 1.0, 0.6);
        assert!(floor >= params.i_off && floor < 2.0 * params.i_off);
        assert_eq!(drain_current(&params, 5.0, 1.0, 0.1), params.i_on);
        assert_eq!(drain_current(&params, 0.5, 0.0, 0.1), 0.0);
    }

    #[test]
    fn transfer_curves_shift_rigidly() {
        let params = p();
        let vths: Vec<f64> = (0..8).map(|k| 0.2 + 0.1 * k as f64).collect();
        for w in vths.windows(2) {
            let shift = w[1] - w[0];
            for k in 0..50 {
                let vg = 0.01 * k as f64;
                let a = drain_current(&params, vg, 1.0, w[0]);
                let b = drain_current(&params, vg + shift, 1.0, w[1]);
                assert_relative_eq!(a, b, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn variation_zero_sigma_is_identity_and_negative_is_rejected() {
        let params = p();
        assert_eq!(apply_variation(&params, 0.55, 0.0, 7).unwrap(), 0.55);
        assert_eq!(
            apply_variation(&params, 0.55, -0.01, 7).unwrap_err().category(),
            "invalid-parameter"
        );
        let a = apply_variation(&params, 0.55, 0.05, 42).unwrap();
        let b = apply_variation(&params, 0.55, 0.05, 42).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let c = apply_variation(&params, 0.55, 5.0, 1).unwrap();
        assert!(c >= params.vth_low && c <= params.vth_high);
    }

    #[test]
    fn variation_sample_mean_converges() {
        let params = p();
        let (vth, sigma, n) = (0.6, 0.02, 100_000u64);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mean = (0..n)
            .map(|_| perturb_vth(&params, vth, sigma, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - vth).abs() <= 3.0 * sigma / (n as f64).sqrt());
    }
}
