//! Pump-probe THz sampling: scan the probe across the THz pulse, read `eta`
//! at each delay and invert the universal law for `|E_T|`.
//!
//! A delay `tau` means the probe centre meets the THz field value `E_T(tau)`;
//! the THz pulse is moved, the probe stays at `t = 0`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::orbits::{analytic_ratio, LOW_SIGNAL_GAMMA, PERTURBATIVE_MAX_GAMMA};
use crate::pipeline::HhgSimulation;
use crate::spectrum::{ratio_point, EvenOddPoint};
use crate::units::{
    asymmetry_parameter, au_time_to_fs, field_to_kv_per_cm, ProbePulse, ThzContribution, ThzPulse,
};
use crate::Real;

/// Probe intensity range (W/cm^2) where the law is known to hold.
pub const INTENSITY_RANGE: (f64, f64) = (1.0e14, 4.0e14);
pub const MIN_WAVELENGTH_NM: f64 = 1200.0;
/// THz peak field range in kV/cm.
pub const THZ_FIELD_RANGE: (f64, f64) = (20.0, 2000.0);
pub const GAMMA_RANGE: (f64, f64) = (LOW_SIGNAL_GAMMA, PERTURBATIVE_MAX_GAMMA);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inversion<T> {
    /// `|E_T|` in a.u.
    pub field: T,
    /// `eta` was infinite; `field` is the edge of the principal branch.
    pub saturated: bool,
}

/// `|E_T| = w0^3 / (E0 |C|) * arctan(sqrt(eta))` on the principal branch
/// `C gamma` in `[0, pi/2)`.
pub fn invert_ratio<T: Real>(eta: T, peak_field: T, omega: T, c: T) -> Result<Inversion<T>> {
    if eta.is_nan() || eta < T::zero() {
        return Err(domain(format!("eta must be >= 0, got {eta}")));
    }
    if !(peak_field > T::zero() && omega > T::zero() && c != T::zero()) {
        return Err(domain("inversion needs E0 > 0, w0 > 0 and C != 0"));
    }
    let scale = omega * omega * omega / (peak_field * c.abs());
    if eta.is_infinite() {
        return Ok(Inversion {
            field: scale * T::FRAC_PI_2(),
            saturated: true,
        });
    }
    Ok(Inversion {
        field: scale * eta.sqrt().atan(),
        saturated: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// The time-dependent THz pulse, shifted by the delay.
    FullWave,
    /// A static field equal to the THz value at the probe centre.
    QuasiStatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeCheck {
    pub name: &'static str,
    pub value: f64,
    pub min: f64,
    pub max: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkingRangeReport {
    pub checks: Vec<RangeCheck>,
}

impl WorkingRangeReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &RangeCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Checks the probe and THz peak against the range where the law holds.
pub fn working_range_guard<T: Real>(probe: &ProbePulse<T>, thz_peak: T) -> WorkingRangeReport {
    let check = |name, value: f64, (min, max): (f64, f64)| RangeCheck {
        name,
        value,
        min,
        max,
        pass: value >= min && value <= max,
    };
    let gamma = asymmetry_parameter(probe.peak_amplitude, probe.carrier_frequency, thz_peak.abs());
    WorkingRangeReport {
        checks: vec![
            check("intensity_w_per_cm2", probe.intensity_w_per_cm2().to_f64_lossy(), INTENSITY_RANGE),
            check(
                "wavelength_nm",
                probe.wavelength_nm().to_f64_lossy(),
                (MIN_WAVELENGTH_NM, f64::INFINITY),
            ),
            check(
                "thz_field_kv_per_cm",
                field_to_kv_per_cm(thz_peak.abs()).to_f64_lossy(),
                THZ_FIELD_RANGE,
            ),
            check("gamma", gamma.to_f64_lossy(), GAMMA_RANGE),
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayOutcome<T> {
    Measured(EvenOddPoint<T>),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayPoint<T> {
    /// Delay in a.u. of time.
    pub delay: T,
    /// THz field at the probe centre for this delay.
    pub thz_at_probe: T,
    pub outcome: DelayOutcome<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayScan<T> {
    pub probe: ProbePulse<T>,
    pub thz: ThzPulse<T>,
    pub mode: ScanMode,
    /// Every probe/THz check passed.
    pub in_working_range: bool,
    pub points: Vec<DelayPoint<T>>,
}

impl<T: Real> DelayScan<T> {
    pub fn delays(&self) -> Vec<T> {
        self.points.iter().map(|p| p.delay).collect()
    }

    pub fn failures(&self) -> usize {
        self.points
            .iter()
            .filter(|p| matches!(p.outcome, DelayOutcome::Failed(_)))
            .count()
    }
}

fn check_delays<T: Real>(delays: &[T]) -> Result<()> {
    if delays.is_empty() {
        return Err(domain("delay list is empty"));
    }
    if delays.iter().any(|d| !d.is_finite()) || delays.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("delays must be finite and strictly increasing"));
    }
    Ok(())
}

/// THz pulse moved so that the probe centre sees `E_T(delay)`.
pub fn thz_at_delay<T: Real>(thz: &ThzPulse<T>, delay: T) -> ThzPulse<T> {
    thz.shifted(-delay)
}

/// Runs one TDSE propagation per delay in parallel on the current rayon
/// pool. A failed delay is recorded, not propagated. Probes outside the
/// working range are refused unless `allow_outside_range` is set.
pub fn simulate_scan<T: Real>(
    sim: &HhgSimulation<T>,
    thz: &ThzPulse<T>,
    delays: &[T],
    mode: ScanMode,
    allow_outside_range: bool,
) -> Result<DelayScan<T>> {
    check_delays(delays)?;
    let guard = working_range_guard(&sim.probe, thz.peak_amplitude);
    if !guard.all_pass() && !allow_outside_range {
        let names: Vec<_> = guard.warnings().map(|c| c.name).collect();
        return Err(domain(format!("outside the working range: {}", names.join(", "))));
    }
    let points = delays
        .par_iter()
        .map(|&delay| {
            let shifted = thz_at_delay(thz, delay);
            let thz_at_probe = shifted.field_at(T::zero());
            let contribution = match mode {
                ScanMode::FullWave => ThzContribution::Pulse(shifted),
                ScanMode::QuasiStatic => ThzContribution::Static(thz_at_probe),
            };
            let outcome = match sim.even_odd(contribution) {
                Ok(p) => DelayOutcome::Measured(p),
                Err(e) => DelayOutcome::Failed(e.to_string()),
            };
            DelayPoint {
                delay,
                thz_at_probe,
                outcome,
            }
        })
        .collect();
    Ok(DelayScan {
        probe: sim.probe,
        thz: *thz,
        mode,
        in_working_range: guard.all_pass(),
        points,
    })
}

/// Scan built from the analytic law instead of the TDSE.
pub fn synthetic_scan<T: Real>(
    probe: &ProbePulse<T>,
    thz: &ThzPulse<T>,
    delays: &[T],
    c: T,
    order: u32,
) -> Result<DelayScan<T>> {
    check_delays(delays)?;
    let points = delays
        .iter()
        .map(|&delay| {
            let e_t = thz_at_delay(thz, delay).field_at(T::zero());
            let gamma = asymmetry_parameter(probe.peak_amplitude, probe.carrier_frequency, e_t);
            let eta = analytic_ratio(gamma, c);
            let point = if eta.is_infinite() {
                ratio_point(order, T::one(), T::zero())
            } else {
                ratio_point(order, eta, T::one())
            };
            DelayPoint {
                delay,
                thz_at_probe: e_t,
                outcome: DelayOutcome::Measured(point),
            }
        })
        .collect();
    Ok(DelayScan {
        probe: *probe,
        thz: *thz,
        mode: ScanMode::QuasiStatic,
        in_working_range: working_range_guard(probe, thz.peak_amplitude).all_pass(),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleFlag {
    Valid,
    /// Estimated `gamma` below 0.1.
    LowSignal,
    /// Infinite `eta` or estimated `gamma` past the perturbative range.
    OutOfBranch,
    /// The probe or THz peak lies outside the working range.
    WorkingRange,
    /// The propagation at this delay failed.
    Failed,
}

impl SampleFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Valid => "valid",
            Self::LowSignal => "low_signal",
            Self::OutOfBranch => "out_of_branch",
            Self::WorkingRange => "working_range",
            Self::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformSample<T> {
    pub delay_au: T,
    pub delay_fs: T,
    /// NaN for failed delays.
    pub eta: T,
    pub field_abs_au: T,
    pub field_abs_kv_per_cm: T,
    pub gamma_estimate: T,
    pub flag: SampleFlag,
    /// `|E_T|` at the probe centre, when the input waveform is known.
    pub benchmark_au: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructedWaveform<T> {
    pub samples: Vec<WaveformSample<T>>,
    pub c: T,
    /// RMS of `|E_T|_rec - |E_T|_true` over valid samples, in a.u.; `None`
    /// when no sample is valid.
    pub rms_error: Option<T>,
    /// `rms_error` over the benchmark peak.
    pub rms_fraction_of_peak: Option<T>,
}

impl<T: Real> ReconstructedWaveform<T> {
    pub fn valid(&self) -> impl Iterator<Item = &WaveformSample<T>> {
        self.samples.iter().filter(|s| s.flag == SampleFlag::Valid)
    }

    /// CSV with columns
    /// `delay_fs,eta,ET_abs_au,ET_abs_kVcm,flag,ET_benchmark_kVcm`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "delay_fs,eta,ET_abs_au,ET_abs_kVcm,flag,ET_benchmark_kVcm")?;
        for s in &self.samples {
            let bench = s
                .benchmark_au
                .map(|b| format!("{:.6e}", field_to_kv_per_cm(b)))
                .unwrap_or_default();
            writeln!(
                w,
                "{:.6},{:.6e},{:.6e},{:.6e},{},{}",
                s.delay_fs,
                s.eta,
                s.field_abs_au,
                s.field_abs_kv_per_cm,
                s.flag.as_str(),
                bench
            )?;
        }
        Ok(())
    }
}

/// Inverts every delay of `scan` with coefficient `c` and scores the result
/// against the THz pulse that produced it.
pub fn reconstruct<T: Real>(scan: &DelayScan<T>, c: T) -> Result<ReconstructedWaveform<T>> {
    reconstruct_with_benchmark(scan, c, true)
}

/// As [`reconstruct`]; `with_benchmark = false` treats the waveform as
/// unknown (measured data).
pub fn reconstruct_with_benchmark<T: Real>(
    scan: &DelayScan<T>,
    c: T,
    with_benchmark: bool,
) -> Result<ReconstructedWaveform<T>> {
    if scan.points.is_empty() {
        return Err(domain("scan has no delays"));
    }
    let (e0, w0) = (scan.probe.peak_amplitude, scan.probe.carrier_frequency);
    let mut samples = Vec::with_capacity(scan.points.len());
    for p in &scan.points {
        let benchmark_au = with_benchmark.then(|| p.thz_at_probe.abs());
        let (eta, field, flag) = match &p.outcome {
            DelayOutcome::Failed(_) => (T::nan(), T::nan(), SampleFlag::Failed),
            DelayOutcome::Measured(point) => {
                let inv = invert_ratio(point.eta, e0, w0, c)?;
                let gamma = asymmetry_parameter(e0, w0, inv.field);
                let flag = if !scan.in_working_range {
                    SampleFlag::WorkingRange
                } else if inv.saturated || gamma > T::lit(PERTURBATIVE_MAX_GAMMA) {
                    SampleFlag::OutOfBranch
                } else if gamma < T::lit(LOW_SIGNAL_GAMMA) {
                    SampleFlag::LowSignal
                } else {
                    SampleFlag::Valid
                };
                (point.eta, inv.field, flag)
            }
        };
        samples.push(WaveformSample {
            delay_au: p.delay,
            delay_fs: au_time_to_fs(p.delay),
            eta,
            field_abs_au: field,
            field_abs_kv_per_cm: field_to_kv_per_cm(field),
            gamma_estimate: asymmetry_parameter(e0, w0, field),
            flag,
            benchmark_au,
        });
    }
    let (rms_error, rms_fraction_of_peak) = if with_benchmark {
        let peak = scan
            .thz
            .peak_amplitude
            .abs()
            .max(samples.iter().filter_map(|s| s.benchmark_au).fold(T::zero(), T::max));
        let errs: Vec<T> = samples
            .iter()
            .filter(|s| s.flag == SampleFlag::Valid)
            .filter_map(|s| s.benchmark_au.map(|b| s.field_abs_au - b))
            .collect();
        if errs.is_empty() {
            (None, None)
        } else {
            let rms = (errs.iter().map(|&e| e * e).sum::<T>() / T::from_usize_lossy(errs.len())).sqrt();
            (Some(rms), Some(rms / peak))
        }
    } else {
        (None, None)
    };
    Ok(ReconstructedWaveform {
        samples,
        c,
        rms_error,
        rms_fraction_of_peak,
    })
}

/// `count` delays evenly spread over `[-span, span]`.
pub fn delay_grid<T: Real>(span: T, count: usize) -> Result<Vec<T>> {
    if count < 2 || !(span > T::zero()) {
        return Err(domain("delay grid needs span > 0 and at least two delays"));
    }
    let step = T::lit(2.0) * span / T::from_usize_lossy(count - 1);
    Ok((0..count).map(|k| -span + step * T::from_usize_lossy(k)).collect())
}

/// Default grid: steps of one probe flat top across `+-4 sigma` of the THz
/// envelope `exp(-(wT t / 6 pi)^2)`.
pub fn default_delay_grid<T: Real>(probe: &ProbePulse<T>, thz: &ThzPulse<T>) -> Result<Vec<T>> {
    let (a, b) = probe.flat_top();
    let step = b - a;
    // envelope exp(-t^2 / (2 sigma^2)) with sigma = 6 pi / (sqrt(2) wT)
    let sigma = T::lit(6.0) * T::PI() / (T::lit(2.0).sqrt() * thz.frequency);
    let half = T::lit(4.0) * sigma;
    let n = (half / step).ceil().to_usize().unwrap_or(0);
    if n == 0 {
        return Err(domain("probe flat top longer than the THz support"));
    }
    let centre = thz.time_offset;
    Ok((0..=2 * n)
        .map(|k| centre + step * (T::from_usize_lossy(k) - T::from_usize_lossy(n)))
        .collect())
}

/// Machine-readable record of a scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanManifest<'a, T> {
    pub version: &'static str,
    pub probe: &'a ProbePulse<T>,
    pub thz: &'a ThzPulse<T>,
    pub mode: ScanMode,
    pub grid: Option<crate::tdse::GridSpec<T>>,
    pub working_range: WorkingRangeReport,
    pub delays: Vec<DelayStatus<T>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DelayStatus<T> {
    pub delay_au: T,
    pub status: String,
}

impl<'a, T: Real + Serialize> ScanManifest<'a, T> {
    pub fn new(scan: &'a DelayScan<T>, grid: Option<crate::tdse::GridSpec<T>>) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            probe: &scan.probe,
            thz: &scan.thz,
            mode: scan.mode,
            grid,
            working_range: working_range_guard(&scan.probe, scan.thz.peak_amplitude),
            delays: scan
                .points
                .iter()
                .map(|p| DelayStatus {
                    delay_au: p.delay,
                    status: match &p.outcome {
                        DelayOutcome::Measured(_) => "ok".to_string(),
                        DelayOutcome::Failed(e) => format!("failed: {e}"),
                    },
                })
                .collect(),
        }
    }
}
