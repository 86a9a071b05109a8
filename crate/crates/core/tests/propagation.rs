//! Conservation laws and symmetries of the split-step propagator.

use oddeven::pipeline::{AtomChoice, HhgSimulation, Numerics};
use oddeven::spectrum::{compute_spectrum, even_to_odd_ratio, Window};
use oddeven::tdse::{convergence_probe, Propagator};
use oddeven::units::{CompositeField, ProbePulse, ThzContribution, ThzPulse};

fn short_probe() -> ProbePulse<f64> {
    ProbePulse::from_lab(1.0e14, 1600.0, 3).unwrap()
}

fn hydrogen(probe: ProbePulse<f64>, absorber: bool) -> HhgSimulation<f64> {
    let mut numerics = Numerics::default();
    if !absorber {
        numerics.absorber = None;
    }
    HhgSimulation::new(probe, AtomChoice::Label(oddeven::tdse::AtomLabel::H), numerics).unwrap()
}

#[test]
fn norm_is_conserved_without_absorber() {
    let sim = hydrogen(short_probe(), false);
    let signal = sim.signal(ThzContribution::Static(1e-4)).unwrap();
    let worst = signal.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-10, "norm drift {worst}");
}

#[test]
fn absorber_only_removes_norm() {
    let sim = hydrogen(ProbePulse::from_lab(3.0e14, 1600.0, 3).unwrap(), true);
    let signal = sim.signal(ThzContribution::None).unwrap();
    assert!(signal.norm.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!(*signal.norm.last().unwrap() < 1.0);
}

#[test]
fn acceleration_obeys_ehrenfest() {
    let sim = hydrogen(short_probe(), false);
    let field = sim.field(ThzContribution::None);
    let mut state = sim.ground.clone();
    let signal = Propagator::new(&sim.grid, &sim.atom, None)
        .record_dipole(true)
        .run_pulse(&mut state, &field)
        .unwrap();
    let x = signal.dipole.as_ref().unwrap();
    let dt = signal.dt;
    let scale = signal.acceleration.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let mut worst = 0.0f64;
    // later on, ionized flux wraps through the periodic box and <x> jumps
    for n in 1..x.len() / 2 {
        let second = (x[n + 1] - 2.0 * x[n] + x[n - 1]) / (dt * dt);
        worst = worst.max((second - signal.acceleration[n]).abs());
    }
    // second differences carry an O(dt^2) error
    assert!(worst < 5e-3 * scale, "Ehrenfest mismatch {worst} of {scale}");
}

#[test]
fn mirrored_field_negates_the_response() {
    let sim = hydrogen(short_probe(), true);
    let thz = ThzPulse::from_lab(300.0, 1.3, 200.0).unwrap();
    let field = CompositeField::with_pulse(sim.probe, thz);
    let a = sim.signal_for(&field).unwrap();
    let b = sim.signal_for(&field.mirrored()).unwrap();
    let scale = a.acceleration.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = a
        .acceleration
        .iter()
        .zip(&b.acceleration)
        .map(|(x, y)| (x + y).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-9 * scale, "mirror mismatch {worst} of {scale}");
}

#[test]
fn near_field_free_evolution_keeps_parity() {
    // a negligible field leaves the even ground state even and <x> at zero
    let sim = hydrogen(short_probe(), false);
    let mut state = sim.ground.clone();
    let mut prop = Propagator::new(&sim.grid, &sim.atom, None).record_dipole(true);
    let field = CompositeField::with_static(
        ProbePulse {
            peak_amplitude: 1e-12,
            ..sim.probe
        },
        0.0,
    );
    let signal = prop.run(&mut state, &field, 400).unwrap();
    let x_max = signal.dipole.unwrap().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(x_max < 1e-9, "<x> drifted to {x_max}");
    let mirrored = state.mirrored();
    let diff = state
        .psi
        .iter()
        .zip(&mirrored.psi)
        .map(|(p, q)| (p - q).norm())
        .fold(0.0, f64::max);
    assert!(diff < 1e-9, "parity broken by {diff}");
}

#[test]
fn pure_probe_spectrum_is_odd() {
    let sim = hydrogen(ProbePulse::from_lab(2.0e14, 1600.0, 5).unwrap(), true);
    let spec = sim.spectrum(ThzContribution::None).unwrap();
    let odd = oddeven::spectrum::harmonic_intensity(&spec, 101).unwrap().intensity;
    let even = oddeven::spectrum::harmonic_intensity(&spec, 100).unwrap().intensity;
    assert!(even < odd, "H100 {even} vs H101 {odd}");
    // static THz raises the even orders
    let with_thz = sim.spectrum(ThzContribution::Static(sim.thz_field_for_gamma(0.3))).unwrap();
    let p0 = even_to_odd_ratio(&spec, 100).unwrap();
    let p1 = even_to_odd_ratio(&with_thz, 100).unwrap();
    assert!(p1.eta > 3.0 * p0.eta, "{} vs {}", p1.eta, p0.eta);
}

#[test]
fn window_choice_preserves_parseval() {
    let sim = hydrogen(short_probe(), true);
    let signal = sim.signal(ThzContribution::None).unwrap();
    for window in [Window::HannFlatTop, Window::HannFull, Window::Rectangular] {
        let spec = compute_spectrum(&signal, window).unwrap();
        let time_side = oddeven::spectrum::windowed_energy(&signal, window).unwrap();
        let rel = (spec.total_energy() - time_side).abs() / time_side;
        assert!(rel < 1e-10, "{window:?}: {rel}");
    }
}

#[test]
fn convergence_probe_reports_relative_change() {
    let sim = hydrogen(short_probe(), true);
    let report = convergence_probe(&sim, ThzContribution::Static(sim.thz_field_for_gamma(0.3))).unwrap();
    assert_eq!(report.order, sim.monitored_order);
    assert!(report.eta_coarse > 0.0 && report.eta_fine > 0.0);
    assert!(report.relative_change.is_finite());
    assert_eq!(
        report.passed,
        report.relative_change <= oddeven::tdse::CONVERGENCE_TOLERANCE
    );
}
