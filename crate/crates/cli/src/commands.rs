//! Subcommand implementations.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use oddeven::orbits::{
    analytic_ratio, coefficient_for_harmonic, cutoff_trajectory, pure_even_points, pure_odd_points,
    reversal_points, solve_return, Branch, Trajectory, CUTOFF_C,
};
use oddeven::pipeline::HhgSimulation;
use oddeven::sampling::{
    default_delay_grid, delay_grid, reconstruct, simulate_scan, synthetic_scan, DelayOutcome, ScanManifest,
};
use oddeven::spectrum::{compute_spectrum, cutoff_order, monitored_even_order, plateau_cutoff, EvenOddPoint, Window};
use oddeven::tdse::{write_checkpoint, DipoleSignal};
use oddeven::units::{
    asymmetry_parameter, au_time_to_fs, intensity_to_field, kv_per_cm_to_field, thz_field_for_asymmetry,
    wavelength_to_frequency, ProbePulse, ThzContribution,
};

use crate::collapse::{collapse_metric, gamma_grid, resample};
use crate::config::{
    config_hash, load, AtomConfig, CollapseConfig, RunConfig, ScanConfig, SweepValue, SweepVariable,
};
use crate::output::{resolve_out_dir, write_csv, write_json, Plot, Series, VERSION};
use crate::{CliError, Command, Common};

/// Depth below the plateau, in decades, at which the comb counts as ended.
const CUTOFF_DEPTH_DECADES: f64 = 4.0;

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Groundstate { config, common } => {
            let cfg: RunConfig = load(&config)?;
            cfg.validate()?;
            with_pool(parallelism(&common, cfg.parallelism), || groundstate(&cfg, &common))
        }
        Command::Spectrum {
            config,
            quasi_static,
            synthetic,
            common,
        } => {
            let cfg: RunConfig = load(&config)?;
            cfg.validate()?;
            with_pool(parallelism(&common, cfg.parallelism), || {
                spectrum(&cfg, &common, quasi_static, synthetic)
            })
        }
        Command::Scan {
            config,
            synthetic,
            common,
        } => {
            let cfg: ScanConfig = load(&config)?;
            cfg.validate()?;
            with_pool(parallelism(&common, cfg.base.parallelism), || {
                scan_command(&cfg, &common, synthetic)
            })
        }
        Command::Collapse {
            config,
            synthetic,
            common,
        } => {
            let cfg: CollapseConfig = load(&config)?;
            cfg.validate()?;
            let threads = parallelism(&common, cfg.scans[0].base.parallelism);
            with_pool(threads, || collapse_command(&cfg, &common, synthetic))
        }
        Command::Orbits {
            config,
            cutoff,
            energy,
            harmonic,
            common,
        } => {
            let cfg = match &config {
                Some(p) => {
                    let c: RunConfig = load(p)?;
                    c.validate()?;
                    Some(c)
                }
                None => None,
            };
            // --cutoff is the default request and only documents intent
            let _ = cutoff;
            orbits_command(cfg.as_ref(), energy, harmonic, &common)
        }
        Command::Reconstruct {
            config,
            quasi_static,
            synthetic,
            common,
        } => {
            let cfg: RunConfig = load(&config)?;
            cfg.validate()?;
            with_pool(parallelism(&common, cfg.parallelism), || {
                reconstruct_command(&cfg, &common, quasi_static, synthetic)
            })
        }
    }
}

fn parallelism(common: &Common, from_config: Option<usize>) -> Option<usize> {
    common.parallel.or(from_config)
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_pool<R: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<R, CliError> + Send,
) -> Result<R, CliError> {
    match threads {
        Some(0) => Err(CliError::Config("--parallel must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            pool.install(f)
        }
        None => f(),
    }
}

fn simulation(cfg: &RunConfig) -> Result<HhgSimulation<f64>, CliError> {
    Ok(HhgSimulation::new(
        cfg.probe.pulse()?,
        cfg.atom.choice()?,
        cfg.grid.numerics()?,
    )?)
}

#[derive(Serialize)]
struct GridReport {
    x_min: f64,
    x_max: f64,
    num_points: usize,
    dx: f64,
    dt: f64,
}

#[derive(Serialize)]
struct GroundReport {
    version: &'static str,
    atom: String,
    energy_au: f64,
    soft_core_a: f64,
    ionization_potential_au: f64,
    grid: GridReport,
    checkpoint: String,
}

fn groundstate(cfg: &RunConfig, common: &Common) -> Result<(), CliError> {
    let out = resolve_out_dir(common.out.as_deref(), cfg.output_dir.as_deref())?;
    let sim = simulation(cfg)?;
    let ckpt = out.join("groundstate.bin");
    let file = std::io::BufWriter::new(std::fs::File::create(&ckpt)?);
    write_checkpoint(file, &sim.grid, &sim.ground)?;
    let report = GroundReport {
        version: VERSION,
        atom: cfg.atom.name(),
        energy_au: sim.ground_energy,
        soft_core_a: sim.atom.soft_core,
        ionization_potential_au: sim.atom.ionization_potential,
        grid: GridReport {
            x_min: sim.grid.x_min,
            x_max: sim.grid.x_max,
            num_points: sim.grid.num_points,
            dx: sim.grid.dx(),
            dt: sim.grid.dt,
        },
        checkpoint: "groundstate.bin".into(),
    };
    write_json(&out.join("groundstate.json"), &report)?;
    println!("ground state energy {:.9} a.u.", sim.ground_energy);
    Ok(())
}

#[derive(Serialize)]
struct SpectrumReport {
    version: &'static str,
    mode: &'static str,
    thz_at_probe_au: f64,
    gamma: f64,
    cutoff_order_law: f64,
    plateau_cutoff: Option<f64>,
    monitored_order: u32,
    eta: Option<f64>,
    even_intensity: Option<f64>,
    odd_average: Option<f64>,
    flag: Option<String>,
    final_norm: Option<f64>,
    peak_order: f64,
}

fn spectrum(cfg: &RunConfig, common: &Common, quasi_static: bool, synthetic: Option<u32>) -> Result<(), CliError> {
    let out = resolve_out_dir(common.out.as_deref(), cfg.output_dir.as_deref())?;
    let hash = config_hash(cfg);
    let probe = cfg.probe.pulse()?;
    let thz = cfg.thz_contribution(quasi_static)?;
    let thz_at_probe = thz_at_centre(&thz);
    let gamma = asymmetry_parameter(probe.peak_amplitude, probe.carrier_frequency, thz_at_probe);
    let ip = cfg.atom.ip()?;
    let law = cutoff_order(probe.peak_amplitude, probe.carrier_frequency, ip);

    let (spec, point, final_norm, mode) = match synthetic {
        Some(order) => {
            let dt = cfg.grid.numerics()?.dt;
            let n = (probe.duration() / dt).round() as usize;
            let w = order as f64 * probe.carrier_frequency;
            let accel = (0..n).map(|k| (w * (probe.start() + dt * k as f64)).cos()).collect();
            let signal = DipoleSignal::synthetic(probe.start(), dt, accel, probe.carrier_frequency);
            (compute_spectrum(&signal, Window::HannFull)?, None, None, "synthetic")
        }
        None => {
            let sim = simulation(cfg)?;
            let signal = sim.signal(thz)?;
            let spec = sim.spectrum_of(&signal)?;
            let point = oddeven::spectrum::even_to_odd_ratio(&spec, sim.monitored_order)?;
            let norm = signal.norm.last().copied();
            (spec, Some(point), norm, if quasi_static { "quasi_static" } else { "tdse" })
        }
    };

    let peak_order = spec
        .orders
        .iter()
        .zip(&spec.intensity)
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(o, _)| *o)
        .unwrap_or(0.0);
    let monitored = cfg
        .grid
        .monitored_order
        .unwrap_or_else(|| monitored_even_order(probe.peak_amplitude, probe.carrier_frequency, ip));
    let report = SpectrumReport {
        version: VERSION,
        mode,
        thz_at_probe_au: thz_at_probe,
        gamma,
        cutoff_order_law: law,
        plateau_cutoff: point
            .as_ref()
            .and_then(|_| plateau_cutoff(&spec, 11, CUTOFF_DEPTH_DECADES).ok()),
        monitored_order: point.map_or(monitored, |p| p.order),
        eta: point.map(|p| p.eta),
        even_intensity: point.map(|p| p.even_intensity),
        odd_average: point.map(|p| p.odd_average),
        flag: point.map(|p| p.flag.to_string()),
        final_norm,
        peak_order,
    };

    let mut body = Vec::new();
    spec.write_csv(&mut body)?;
    write_csv(&out.join("spectrum.csv"), &hash, &body)?;
    write_json(&out.join("spectrum.json"), &report)?;
    if common.svg {
        let limit = if synthetic.is_some() { 2.0 * peak_order } else { 1.3 * law };
        let points = spec
            .orders
            .iter()
            .zip(&spec.intensity)
            .filter(|(o, _)| **o <= limit)
            .map(|(o, i)| (*o, *i))
            .collect();
        Plot {
            title: format!("harmonic spectrum, gamma = {gamma:.3}"),
            x_label: "harmonic order".into(),
            y_label: "intensity (arb.)".into(),
            log_y: true,
            series: vec![Series {
                label: mode.into(),
                points,
            }],
        }
        .write(&out.join("spectrum.svg"))?;
    }
    match point {
        Some(p) => println!("H{}: eta = {:.4e} ({}), gamma = {gamma:.4}", p.order, p.eta, p.flag),
        None => println!("synthetic spectrum peaks at order {peak_order:.2}"),
    }
    Ok(())
}

fn thz_at_centre(thz: &ThzContribution<f64>) -> f64 {
    match thz {
        ThzContribution::None => 0.0,
        ThzContribution::Pulse(p) => p.field_at(0.0),
        ThzContribution::Static(v) => *v,
    }
}

/// One scan row; `sort_key` orders the output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub value: String,
    #[serde(skip)]
    sort_key: SortKey,
    pub et_au: f64,
    pub gamma: f64,
    pub order: u32,
    pub eta: f64,
    pub even_intensity: f64,
    pub odd_average: f64,
    pub flag: String,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
enum SortKey {
    Number(f64),
    Label(String),
}

impl SortKey {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Self::Number(a), Self::Number(b)) => a.total_cmp(b),
            (Self::Label(a), Self::Label(b)) => a.cmp(b),
            (Self::Number(_), Self::Label(_)) => Ordering::Less,
            (Self::Label(_), Self::Number(_)) => Ordering::Greater,
        }
    }
}

struct PointSetup {
    run: RunConfig,
    thz: ThzContribution<f64>,
}

fn point_setup(cfg: &ScanConfig, value: &SweepValue) -> Result<PointSetup, CliError> {
    let mut run = cfg.base.clone();
    if let Some(order) = cfg.monitored_order {
        run.grid.monitored_order = Some(order);
    }
    let x = match value {
        SweepValue::Number(x) => *x,
        SweepValue::Label(s) => {
            run.atom = AtomConfig::Label(s.clone());
            0.0
        }
    };
    match cfg.variable {
        SweepVariable::IntensityWCm2 => run.probe.intensity_w_cm2 = x,
        SweepVariable::WavelengthNm => run.probe.wavelength_nm = x,
        SweepVariable::Cycles => run.probe.cycles = x as u32,
        _ => {}
    }
    let probe = run.probe.pulse()?;
    let thz = match cfg.variable {
        SweepVariable::EtKvCm => ThzContribution::Static(kv_per_cm_to_field(x)),
        SweepVariable::EtAu => ThzContribution::Static(x),
        SweepVariable::Gamma => ThzContribution::Static(thz_field_for_asymmetry(
            probe.peak_amplitude,
            probe.carrier_frequency,
            x,
        )),
        _ => run.thz_contribution(false)?,
    };
    Ok(PointSetup { run, thz })
}

fn value_text(v: &SweepValue) -> (String, SortKey) {
    match v {
        SweepValue::Number(x) => (format!("{x}"), SortKey::Number(*x)),
        SweepValue::Label(s) => (s.clone(), SortKey::Label(s.clone())),
    }
}

/// Runs every point of `cfg` on the current rayon pool and returns the rows
/// sorted by sweep value. Failed points carry `eta = NaN` and the error.
pub fn run_scan(cfg: &ScanConfig, synthetic: bool) -> Result<Vec<ScanRow>, CliError> {
    let setups = cfg
        .values
        .iter()
        .map(|v| point_setup(cfg, v))
        .collect::<Result<Vec<_>, _>>()?;
    let c = cfg.base.coefficient.unwrap_or(CUTOFF_C);

    // field sweeps share one ground state
    let field_sweep = matches!(
        cfg.variable,
        SweepVariable::EtKvCm | SweepVariable::EtAu | SweepVariable::Gamma
    );
    let shared = if field_sweep && !synthetic {
        Some(simulation(&setups[0].run)?)
    } else {
        None
    };

    let points: Vec<(f64, f64, Result<EvenOddPoint<f64>, String>)> = setups
        .par_iter()
        .map(|s| {
            let probe = s.run.probe.pulse().expect("validated");
            let et = thz_at_centre(&s.thz);
            let gamma = asymmetry_parameter(probe.peak_amplitude, probe.carrier_frequency, et);
            let result = if synthetic {
                synthetic_point(&s.run, &probe, gamma, c)
            } else {
                let owned;
                let sim = match &shared {
                    Some(sim) => sim,
                    None => {
                        owned = simulation(&s.run).map_err(|e| e.to_string());
                        match &owned {
                            Ok(sim) => sim,
                            Err(e) => return (et, gamma, Err(e.clone())),
                        }
                    }
                };
                sim.even_odd(s.thz).map_err(|e| e.to_string())
            };
            (et, gamma, result)
        })
        .collect();

    let mut rows: Vec<ScanRow> = cfg
        .values
        .iter()
        .zip(points)
        .map(|(v, (et, gamma, result))| {
            let (value, sort_key) = value_text(v);
            match result {
                Ok(p) => ScanRow {
                    value,
                    sort_key,
                    et_au: et,
                    gamma,
                    order: p.order,
                    eta: p.eta,
                    even_intensity: p.even_intensity,
                    odd_average: p.odd_average,
                    flag: p.flag.to_string(),
                    error: None,
                },
                Err(e) => ScanRow {
                    value,
                    sort_key,
                    et_au: et,
                    gamma,
                    order: 0,
                    eta: f64::NAN,
                    even_intensity: f64::NAN,
                    odd_average: f64::NAN,
                    flag: "failed".into(),
                    error: Some(e),
                },
            }
        })
        .collect();
    rows.sort_by(|a, b| a.sort_key.cmp(&b.sort_key));
    Ok(rows)
}

fn synthetic_point(run: &RunConfig, probe: &ProbePulse<f64>, gamma: f64, c: f64) -> Result<EvenOddPoint<f64>, String> {
    let ip = run.atom.ip().map_err(|e| e.to_string())?;
    let order = run
        .grid
        .monitored_order
        .unwrap_or_else(|| monitored_even_order(probe.peak_amplitude, probe.carrier_frequency, ip));
    let eta = analytic_ratio(gamma, c);
    let (even, odd) = if eta.is_infinite() { (1.0, 0.0) } else { (eta, 1.0) };
    Ok(EvenOddPoint {
        order,
        eta,
        even_intensity: even,
        odd_average: odd,
        flag: if eta.is_infinite() {
            oddeven::spectrum::RatioFlag::PureEven
        } else {
            oddeven::spectrum::RatioFlag::Ok
        },
    })
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut s = String::from("value,ET_au,gamma,order,eta,I_even,I_odd_avg,flag\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.6e},{:.6},{},{:.6e},{:.6e},{:.6e},{}",
            r.value, r.et_au, r.gamma, r.order, r.eta, r.even_intensity, r.odd_average, r.flag
        );
    }
    s
}

fn report_failures(rows: &[ScanRow]) {
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("oddeven: point {} failed: {}", r.value, r.error.as_deref().unwrap_or(""));
    }
}

fn scan_command(cfg: &ScanConfig, common: &Common, synthetic: bool) -> Result<(), CliError> {
    let out = resolve_out_dir(common.out.as_deref(), cfg.base.output_dir.as_deref())?;
    let rows = run_scan(cfg, synthetic)?;
    report_failures(&rows);
    write_csv(&out.join("scan.csv"), &config_hash(cfg), scan_csv(&rows).as_bytes())?;
    if common.svg {
        let x_of = |r: &ScanRow| match r.sort_key {
            SortKey::Number(x) => x,
            SortKey::Label(_) => r.gamma,
        };
        Plot {
            title: format!("even-to-odd ratio vs {:?}", cfg.variable),
            x_label: format!("{:?}", cfg.variable),
            y_label: "eta".into(),
            log_y: true,
            series: vec![Series {
                label: cfg.id.clone().unwrap_or_else(|| "scan".into()),
                points: rows.iter().map(|r| (x_of(r), r.eta)).collect(),
            }],
        }
        .write(&out.join("scan.svg"))?;
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    println!("{} points, {} failed", rows.len(), failed);
    Ok(())
}

#[derive(Serialize)]
struct CollapseReport {
    version: &'static str,
    ids: Vec<String>,
    gamma_grid: Vec<f64>,
    /// Largest pairwise `max/min - 1` on the grid.
    metric: f64,
}

/// `(id, eta(gamma))` for every scan, sorted by `|gamma|`, failed points
/// dropped.
pub fn collapse_curves(cfg: &CollapseConfig, synthetic: bool) -> Result<Vec<(String, Vec<(f64, f64)>)>, CliError> {
    cfg.scans
        .iter()
        .enumerate()
        .map(|(k, scan)| {
            let rows = run_scan(scan, synthetic)?;
            report_failures(&rows);
            let mut curve: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.error.is_none())
                .map(|r| (r.gamma.abs(), r.eta))
                .collect();
            curve.sort_by(|a, b| a.0.total_cmp(&b.0));
            Ok((scan.id.clone().unwrap_or_else(|| format!("scan{k}")), curve))
        })
        .collect()
}

fn collapse_command(cfg: &CollapseConfig, common: &Common, synthetic: bool) -> Result<(), CliError> {
    let out = resolve_out_dir(common.out.as_deref(), cfg.scans[0].base.output_dir.as_deref())?;
    let curves = collapse_curves(cfg, synthetic)?;
    let grid = gamma_grid(cfg.gamma_min, cfg.gamma_max, cfg.grid_points);
    let resampled = resample(&curves, &grid)?;
    let metric = collapse_metric(&resampled);

    let mut body = String::from("config_id,gamma,eta\n");
    for ((id, _), etas) in curves.iter().zip(&resampled) {
        for (g, e) in grid.iter().zip(etas) {
            let _ = writeln!(body, "{id},{g:.6},{e:.6e}");
        }
    }
    write_csv(&out.join("collapse.csv"), &config_hash(cfg), body.as_bytes())?;
    write_json(
        &out.join("collapse.json"),
        &CollapseReport {
            version: VERSION,
            ids: curves.iter().map(|(id, _)| id.clone()).collect(),
            gamma_grid: grid.clone(),
            metric,
        },
    )?;
    if common.svg {
        Plot {
            title: "eta vs gamma".into(),
            x_label: "gamma".into(),
            y_label: "eta".into(),
            log_y: true,
            series: curves
                .iter()
                .map(|(id, c)| Series {
                    label: id.clone(),
                    points: c.clone(),
                })
                .collect(),
        }
        .write(&out.join("collapse.svg"))?;
    }
    println!("collapse metric {metric:.4}");
    Ok(())
}

#[derive(Serialize)]
struct OrbitEntry {
    branch: Branch,
    #[serde(flatten)]
    record: oddeven::orbits::OrbitRecord<f64>,
    excursion_cycles: f64,
    residual: f64,
    reversal_points: Vec<f64>,
    pure_odd_points: Vec<f64>,
    pure_even_points: Vec<f64>,
}

#[derive(Serialize)]
struct OrbitReport {
    version: &'static str,
    request: String,
    trajectories: Vec<OrbitEntry>,
}

fn orbit_entry(t: &Trajectory<f64>) -> OrbitEntry {
    let c = t.coefficient().magnitude;
    OrbitEntry {
        branch: t.branch,
        record: t.record(),
        excursion_cycles: t.excursion_cycles(),
        residual: t.residual(),
        reversal_points: reversal_points(c, 3),
        pure_odd_points: pure_odd_points(c, 3),
        pure_even_points: pure_even_points(c, 3),
    }
}

fn orbits_command(
    cfg: Option<&RunConfig>,
    energy: Option<f64>,
    harmonic: Option<u32>,
    common: &Common,
) -> Result<(), CliError> {
    let out = resolve_out_dir(common.out.as_deref(), cfg.and_then(|c| c.output_dir.as_deref()))?;
    let (request, trajectories) = match (energy, harmonic) {
        (Some(e), _) => {
            if !(e > 0.0) {
                return Err(CliError::Config(format!("--energy must be positive, got {e}")));
            }
            let (s, l) = solve_return(e)?;
            (format!("energy {e} Up"), vec![s, l])
        }
        (None, Some(n)) => {
            let cfg = cfg.ok_or_else(|| CliError::Config("--harmonic needs --config for the probe".into()))?;
            let e0 = intensity_to_field(cfg.probe.intensity_w_cm2)?;
            let w0 = wavelength_to_frequency(cfg.probe.wavelength_nm)?;
            let (s, l) = coefficient_for_harmonic(n as f64, e0, w0, cfg.atom.ip()?)?;
            (format!("harmonic {n}"), vec![s, l])
        }
        (None, None) => ("cutoff".into(), vec![cutoff_trajectory::<f64>()]),
    };
    let report = OrbitReport {
        version: VERSION,
        request,
        trajectories: trajectories.iter().map(orbit_entry).collect(),
    };
    write_json(&out.join("orbits.json"), &report)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?
    );
    Ok(())
}

#[derive(Serialize)]
struct ReconstructReport {
    version: &'static str,
    mode: &'static str,
    coefficient: f64,
    delays: usize,
    valid_samples: usize,
    failures: usize,
    in_working_range: bool,
    peak_benchmark_au: f64,
    rms_error_au: Option<f64>,
    rms_fraction_of_peak: Option<f64>,
}

fn reconstruct_command(cfg: &RunConfig, common: &Common, quasi_static: bool, synthetic: bool) -> Result<(), CliError> {
    let thz_cfg = cfg
        .thz
        .as_ref()
        .ok_or_else(|| CliError::Config("reconstruct needs a thz section".into()))?;
    let out = resolve_out_dir(common.out.as_deref(), cfg.output_dir.as_deref())?;
    let probe = cfg.probe.pulse()?;
    let thz = thz_cfg.pulse()?;
    let c = cfg.coefficient.unwrap_or(CUTOFF_C);
    let delays = match &cfg.delays {
        Some(d) => delay_grid(d.span_periods * thz.period(), d.count)?
            .into_iter()
            .map(|t| t + thz.time_offset)
            .collect(),
        None => default_delay_grid(&probe, &thz)?,
    };
    let (scan, grid, mode) = if synthetic {
        let order = cfg.grid.monitored_order.unwrap_or_else(|| {
            monitored_even_order(probe.peak_amplitude, probe.carrier_frequency, cfg.atom.ip().unwrap_or(0.5))
        });
        (synthetic_scan(&probe, &thz, &delays, c, order)?, None, "synthetic")
    } else {
        let sim = simulation(cfg)?;
        let mode = thz_cfg.scan_mode(quasi_static);
        let scan = simulate_scan(&sim, &thz, &delays, mode, cfg.allow_outside_range)?;
        (scan, Some(sim.grid), if quasi_static { "quasi_static" } else { "tdse" })
    };
    for p in &scan.points {
        if let DelayOutcome::Failed(e) = &p.outcome {
            eprintln!("oddeven: delay {:.1} fs failed: {e}", au_time_to_fs(p.delay));
        }
    }
    let wave = reconstruct(&scan, c)?;
    let hash = config_hash(cfg);
    let mut body = Vec::new();
    wave.write_csv(&mut body)?;
    write_csv(&out.join("waveform.csv"), &hash, &body)?;
    let report = ReconstructReport {
        version: VERSION,
        mode,
        coefficient: c,
        delays: scan.points.len(),
        valid_samples: wave.valid().count(),
        failures: scan.failures(),
        in_working_range: scan.in_working_range,
        peak_benchmark_au: thz.peak_amplitude.abs(),
        rms_error_au: wave.rms_error,
        rms_fraction_of_peak: wave.rms_fraction_of_peak,
    };
    write_json(&out.join("report.json"), &report)?;
    write_json(&out.join("manifest.json"), &ScanManifest::new(&scan, grid))?;
    if common.svg {
        let series = |label: &str, f: &dyn Fn(&oddeven::sampling::WaveformSample<f64>) -> Option<f64>| Series {
            label: label.into(),
            points: wave
                .samples
                .iter()
                .filter_map(|s| f(s).map(|v| (s.delay_fs, v)))
                .collect(),
        };
        Plot {
            title: "THz waveform |E_T|".into(),
            x_label: "delay (fs)".into(),
            y_label: "|E_T| (a.u.)".into(),
            log_y: false,
            series: vec![
                series("reconstructed", &|s| Some(s.field_abs_au)),
                series("benchmark", &|s| s.benchmark_au),
            ],
        }
        .write(&out.join("waveform.svg"))?;
    }
    match wave.rms_fraction_of_peak {
        Some(f) => println!("{} valid samples, RMS error {:.1}% of peak", report.valid_samples, 100.0 * f),
        None => println!("no valid samples"),
    }
    Ok(())
}
