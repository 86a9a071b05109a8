//! Classical return trajectories in `E(t) = E0 cos(w0 t)` and the analytic
//! even-to-odd law `eta = tan^2(C gamma)`.
//!
//! Phases are in radians of the probe cycle (`phi = w0 t`); energies are in
//! units of the ponderomotive energy `Up`. An electron born at rest at the
//! origin at phase `phi_i` sits at
//! `x(phi) = (E0/w0^2) [(cos phi - cos phi_i) + (phi - phi_i) sin phi_i]`
//! and returns with kinetic energy `2 Up (sin phi_r - sin phi_i)^2`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::{Complex, Real};

/// Return energy at the classical cutoff, in `Up`.
pub const CUTOFF_ENERGY_UP: f64 = 3.17;
/// `C` for cutoff harmonics, used when inverting measured ratios.
pub const CUTOFF_C: f64 = 2.558;
/// Below this `gamma` the even signal is lost in numerical noise.
pub const LOW_SIGNAL_GAMMA: f64 = 0.1;
pub const PERTURBATIVE_MAX_GAMMA: f64 = 0.6;
pub const INTERMEDIATE_MAX_GAMMA: f64 = 4.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Short,
    Long,
    Cutoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub phi_i: T,
    pub phi_r: T,
    /// Kinetic energy at return, in `Up`.
    pub return_energy: T,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseAngles<T> {
    pub theta: T,
    pub delta_theta: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffCoefficient<T> {
    /// Signed value; only `magnitude` enters `eta`.
    pub c: T,
    pub magnitude: T,
}

/// Return-condition residual `x(phi_r) w0^2 / E0`.
pub fn return_residual<T: Real>(phi_i: T, phi_r: T) -> T {
    (phi_r.cos() - phi_i.cos()) + (phi_r - phi_i) * phi_i.sin()
}

/// Kinetic energy (in `Up`) at the return phase.
pub fn return_energy_at<T: Real>(phi_i: T, phi_r: T) -> T {
    let dv = phi_r.sin() - phi_i.sin();
    T::lit(2.0) * dv * dv
}

/// Bisection on a sign-changing bracket down to adjacent floats.
fn bisect<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T) -> Result<T> {
    let (mut f_lo, f_hi) = (f(lo), f(hi));
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Solver(format!("root not bracketed in [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == T::zero() {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

/// First return phase after `phi_i` for `phi_i` in `(0, pi/2)`.
pub fn return_phase<T: Real>(phi_i: T) -> Result<T> {
    let half_pi = T::FRAC_PI_2();
    if !(phi_i > T::zero() && phi_i < half_pi) {
        return Err(domain(format!("ionization phase {phi_i} outside (0, pi/2)")));
    }
    let f = |phi_r: T| return_residual(phi_i, phi_r);
    // f < 0 right after birth and f(phi_i + 2 pi) = 2 pi sin(phi_i) > 0;
    // the first root sits near phi_i + 3 cot(phi_i) when phi_i -> pi/2
    let first_guess = (T::lit(3.0) / phi_i.tan()).min(T::one());
    let step = (first_guess / T::lit(8.0)).max(T::epsilon());
    let end = phi_i + T::TAU();
    let mut hi = phi_i + step / T::lit(4.0);
    while hi < end {
        let next = (hi + step).min(end);
        if f(next) > T::zero() {
            return bisect(f, hi, next);
        }
        hi = next;
    }
    Err(Error::Solver(format!("no return found for phi_i = {phi_i}")))
}

/// Trajectory born at `phi_i`, with its branch set relative to the cutoff.
pub fn trajectory_from_birth<T: Real>(phi_i: T) -> Result<Trajectory<T>> {
    let phi_r = return_phase(phi_i)?;
    let cut = cutoff_trajectory::<T>();
    let branch = if (phi_i - cut.phi_i).abs() <= T::epsilon().sqrt() {
        Branch::Cutoff
    } else if phi_i < cut.phi_i {
        Branch::Long
    } else {
        Branch::Short
    };
    Ok(Trajectory {
        phi_i,
        phi_r,
        return_energy: return_energy_at(phi_i, phi_r),
        branch,
    })
}

/// The trajectory of maximal return energy, found by golden-section search
/// over `phi_i` in `(0, pi/2)`.
pub fn cutoff_trajectory<T: Real>() -> Trajectory<T> {
    let energy = |phi_i: T| {
        return_phase(phi_i)
            .map(|phi_r| return_energy_at(phi_i, phi_r))
            .unwrap_or(T::zero())
    };
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (T::lit(0.05), T::lit(1.2));
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut fc, mut fd) = (energy(c), energy(d));
    let tol = T::epsilon().sqrt() * T::lit(0.1);
    while (b - a) > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = energy(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = energy(d);
        }
    }
    let phi_i = (a + b) / T::lit(2.0);
    let phi_r = return_phase(phi_i).expect("cutoff birth phase inside (0, pi/2)");
    Trajectory {
        phi_i,
        phi_r,
        return_energy: return_energy_at(phi_i, phi_r),
        branch: Branch::Cutoff,
    }
}

/// Short and long trajectories returning with `return_energy` (in `Up`).
pub fn solve_return<T: Real>(return_energy: T) -> Result<(Trajectory<T>, Trajectory<T>)> {
    let cut = cutoff_trajectory::<T>();
    if !(return_energy > T::zero() && return_energy <= cut.return_energy) {
        return Err(domain(format!(
            "return energy {return_energy} Up outside (0, {}]",
            cut.return_energy
        )));
    }
    let mismatch = |phi_i: T| -> T {
        match return_phase(phi_i) {
            Ok(phi_r) => return_energy_at(phi_i, phi_r) - return_energy,
            Err(_) => -return_energy,
        }
    };
    // return energy grows like 25 phi_i near phi_i = 0 but only
    // quadratically in the distance from pi/2
    let long_edge = T::epsilon().sqrt() * T::lit(1e-4);
    let short_edge = T::lit(1e-6).max(T::epsilon().sqrt());
    let at_peak = cut.return_energy - return_energy <= T::epsilon() * T::lit(16.0);
    let (long_i, short_i) = if at_peak {
        (cut.phi_i, cut.phi_i)
    } else {
        (
            bisect(mismatch, long_edge, cut.phi_i)?,
            bisect(mismatch, cut.phi_i, T::FRAC_PI_2() - short_edge)?,
        )
    };
    let build = |phi_i: T, branch| -> Result<Trajectory<T>> {
        let phi_r = return_phase(phi_i)?;
        Ok(Trajectory {
            phi_i,
            phi_r,
            return_energy: return_energy_at(phi_i, phi_r),
            branch,
        })
    };
    Ok((build(short_i, Branch::Short)?, build(long_i, Branch::Long)?))
}

impl<T: Real> Trajectory<T> {
    pub fn angles(&self) -> PhaseAngles<T> {
        PhaseAngles {
            theta: (self.phi_r + self.phi_i) / T::lit(2.0),
            delta_theta: (self.phi_r - self.phi_i) / T::lit(2.0),
        }
    }

    pub fn residual(&self) -> T {
        return_residual(self.phi_i, self.phi_r)
    }

    pub fn coefficient(&self) -> CutoffCoefficient<T> {
        coefficient_c(self.angles())
    }

    /// Excursion time in units of the probe period.
    pub fn excursion_cycles(&self) -> T {
        (self.phi_r - self.phi_i) / T::TAU()
    }

    pub fn record(&self) -> OrbitRecord<T> {
        let a = self.angles();
        OrbitRecord {
            phi_i: self.phi_i,
            phi_r: self.phi_r,
            theta: a.theta,
            delta_theta: a.delta_theta,
            c: coefficient_c(a).c,
            energy_up: self.return_energy,
        }
    }
}

pub fn coefficient_c<T: Real>(angles: PhaseAngles<T>) -> CutoffCoefficient<T> {
    let PhaseAngles { theta, delta_theta } = angles;
    let c = T::lit(2.0) * theta.sin() * (delta_theta * delta_theta.cos() - delta_theta.sin());
    CutoffCoefficient {
        c,
        magnitude: c.abs(),
    }
}

/// Return energy (in `Up`) needed to emit harmonic `order`.
pub fn harmonic_return_energy<T: Real>(order: T, peak_field: T, omega: T, ip: T) -> T {
    let up = crate::units::ponderomotive_energy(peak_field, omega);
    (order * omega - ip) / up
}

/// `C` of the short and long branches for a sub-cutoff harmonic.
pub fn coefficient_for_harmonic<T: Real>(
    order: T,
    peak_field: T,
    omega: T,
    ip: T,
) -> Result<(Trajectory<T>, Trajectory<T>)> {
    solve_return(harmonic_return_energy(order, peak_field, omega, ip))
}

/// `eta = tan^2(C gamma)`; `+inf` at the poles.
pub fn analytic_ratio<T: Real>(gamma: T, c: T) -> T {
    let arg = c * gamma;
    let (s, co) = arg.sin_cos();
    if co.abs() <= T::epsilon() * s.abs() {
        return T::infinity();
    }
    let t = s / co;
    t * t
}

/// `eta = 1` crossings `(k + 1/2) pi / (2|C|)` for `k = 0..=k_max`.
pub fn reversal_points<T: Real>(c: T, k_max: usize) -> Vec<T> {
    let step = T::PI() / (T::lit(2.0) * c.abs());
    (0..=k_max)
        .map(|k| (T::from_usize_lossy(k) + T::lit(0.5)) * step)
        .collect()
}

/// Pure-odd points `k pi / |C|`.
pub fn pure_odd_points<T: Real>(c: T, k_max: usize) -> Vec<T> {
    let step = T::PI() / c.abs();
    (0..=k_max).map(|k| T::from_usize_lossy(k) * step).collect()
}

/// Pure-even points `(k + 1/2) pi / |C|`.
pub fn pure_even_points<T: Real>(c: T, k_max: usize) -> Vec<T> {
    let step = T::PI() / c.abs();
    (0..=k_max)
        .map(|k| (T::from_usize_lossy(k) + T::lit(0.5)) * step)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Perturbative,
    Intermediate,
    Disordered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeClass {
    pub regime: Regime,
    /// Set below `gamma = 0.1`, where the even signal is too weak to trust.
    pub low_signal: bool,
}

/// Regime of the `eta(gamma)` response; `eta` is even in `gamma`, so the
/// sign is ignored.
pub fn classify_regime<T: Real>(gamma: T) -> RegimeClass {
    let g = gamma.abs();
    let regime = if g <= T::lit(PERTURBATIVE_MAX_GAMMA) {
        Regime::Perturbative
    } else if g <= T::lit(INTERMEDIATE_MAX_GAMMA) {
        Regime::Intermediate
    } else {
        Regime::Disordered
    };
    RegimeClass {
        regime,
        low_signal: g < T::lit(LOW_SIGNAL_GAMMA),
    }
}

/// Two consecutive half-cycle bursts seen at harmonic `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstPair<T> {
    pub d1: Complex<T>,
    pub d2: Complex<T>,
    pub phi1: T,
    pub phi2: T,
    /// `phi2 - phi1 = N pi - Re(delta_action)`.
    pub delta_phi: T,
    pub delta_action: Complex<T>,
    /// First-order action shift `C gamma` picked up by each burst, with
    /// opposite signs in the two half cycles.
    pub s_t: T,
}

impl<T: Real> BurstPair<T> {
    /// Equal-strength bursts. The dipole flips sign with the field every half
    /// cycle, so `d2 = -d1`; the THz field advances one burst's action by
    /// `S_T` and retards the other's by the same amount.
    pub fn perturbative(order: u32, gamma: T, c: T) -> Self {
        let s_t = c * gamma;
        let delta_action = Complex::new(T::lit(2.0) * s_t, T::zero());
        let delta_phi = T::from_u32(order).unwrap() * T::PI() - delta_action.re;
        Self {
            d1: Complex::new(T::one(), T::zero()),
            d2: Complex::new(-T::one(), T::zero()),
            phi1: T::zero(),
            phi2: delta_phi,
            delta_phi,
            delta_action,
            s_t,
        }
    }

    /// `|d1 e^{-i phi1} + d2 e^{-i phi2}|^2`.
    pub fn intensity(&self) -> T {
        let e = |phi: T| Complex::new(phi.cos(), -phi.sin());
        (self.d1 * e(self.phi1) + self.d2 * e(self.phi2)).norm_sqr()
    }
}

/// Relative intensity of harmonic `order` from two interfering bursts
/// (peak value 4).
pub fn analytic_even_odd_spectrum<T: Real>(order: u32, gamma: T, c: T) -> T {
    BurstPair::perturbative(order, gamma, c).intensity()
}

/// JSON form of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord<T> {
    pub phi_i: T,
    pub phi_r: T,
    pub theta: T,
    pub delta_theta: T,
    #[serde(rename = "C")]
    pub c: T,
    pub energy_up: T,
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: f64 = 2.558;

    #[test]
    fn cutoff_values() {
        let t = cutoff_trajectory::<f64>();
        assert!((t.return_energy - 3.17).abs() < 0.01, "{}", t.return_energy);
        assert!((t.phi_i - 0.31).abs() < 0.02, "{}", t.phi_i);
        assert!((t.phi_r - 4.40).abs() < 0.05, "{}", t.phi_r);
        assert!(t.residual().abs() < 1e-10);
        let a = t.angles();
        assert!((a.theta - 2.36).abs() < 0.03);
        assert!((a.delta_theta - 2.05).abs() < 0.03);
        let c = t.coefficient();
        assert!((c.magnitude - 2.558).abs() < 0.02 * 2.558, "{}", c.magnitude);
    }

    #[test]
    fn coefficient_limits() {
        let c = coefficient_c(PhaseAngles { theta: 0.0_f64, delta_theta: 1.3 });
        assert_eq!(c.c, 0.0);
        let small = coefficient_c(PhaseAngles { theta: 1.0_f64, delta_theta: 1e-3 });
        assert!(small.magnitude < 1e-8);
    }

    #[test]
    fn branches_ordered() {
        let cut = cutoff_trajectory::<f64>();
        let (short, long) = solve_return(2.0_f64).unwrap();
        assert!(short.phi_r < cut.phi_r && cut.phi_r < long.phi_r);
        assert!(short.phi_i > cut.phi_i && long.phi_i < cut.phi_i);
        for t in [short, long] {
            assert!((t.return_energy - 2.0).abs() < 1e-10);
            assert!(t.residual().abs() < 1e-10);
        }
    }

    #[test]
    fn low_energy_long_branch_grazes() {
        let (_, long) = solve_return(1e-6_f64).unwrap();
        assert!(long.phi_i < 1e-2, "{}", long.phi_i);
        assert!((long.phi_r - std::f64::consts::TAU).abs() < 2e-2, "{}", long.phi_r);
    }

    #[test]
    fn out_of_range_energies() {
        assert!(solve_return(0.0_f64).is_err());
        assert!(solve_return(3.2_f64).is_err());
        assert!(solve_return(-1.0_f64).is_err());
        assert!(solve_return(3.17_f64).is_ok());
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(analytic_ratio(0.0, C), 0.0);
        let g = std::f64::consts::PI / (4.0 * 2.558);
        assert!((g - 0.3070).abs() < 1e-4);
        assert!((analytic_ratio(g, C) - 1.0).abs() < 1e-12);
        assert!((analytic_ratio(0.2, C) - 0.31524).abs() < 1e-5);
        let pole = std::f64::consts::FRAC_PI_2;
        assert!(analytic_ratio(pole, 1.0_f64).is_infinite());
    }

    #[test]
    fn reversal_sequence() {
        let r = reversal_points(C, 2);
        assert!((r[0] - 0.3070).abs() < 1e-4);
        assert!((r[1] - 0.9211).abs() < 1e-4);
        let step = std::f64::consts::PI / (2.0 * 2.558);
        assert!(((r[2] - r[1]) - step).abs() < 1e-12);
        assert!((reversal_points(-C, 0)[0] - r[0]).abs() < 1e-15);
        for (k, g) in pure_odd_points(C, 3).into_iter().enumerate() {
            assert!(analytic_ratio(g, C) < 1e-20 || k == 0);
        }
        for g in pure_even_points(C, 3) {
            assert!(analytic_ratio(g, C) > 1e20);
        }
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(0.3_f64).regime, Regime::Perturbative);
        assert!(!classify_regime(0.3_f64).low_signal);
        assert!(classify_regime(0.05).low_signal);
        assert_eq!(classify_regime(0.05).regime, Regime::Perturbative);
        assert_eq!(classify_regime(2.0).regime, Regime::Intermediate);
        assert_eq!(classify_regime(5.0).regime, Regime::Disordered);
        assert_eq!(classify_regime(-2.0), classify_regime(2.0));
    }

    #[test]
    fn burst_interference() {
        assert!(analytic_even_odd_spectrum(500, 0.0, C) < 1e-24);
        assert!((analytic_even_odd_spectrum(501, 0.0, C) - 4.0).abs() < 1e-12);
        let g = std::f64::consts::FRAC_PI_2 / 2.558;
        assert!((analytic_even_odd_spectrum(500, g, C) - 4.0).abs() < 1e-9);
        assert!(analytic_even_odd_spectrum(501, g, C) < 1e-9);
        for &gamma in &[0.05, 0.2, 0.3, 0.45] {
            let even = analytic_even_odd_spectrum(500, gamma, C);
            let odd = 0.5
                * (analytic_even_odd_spectrum(499, gamma, C)
                    + analytic_even_odd_spectrum(501, gamma, C));
            let law = analytic_ratio(gamma, C);
            assert!((even / odd - law).abs() < 1e-9 * law.max(1.0));
        }
    }

    #[test]
    fn record_json_keys() {
        let json = serde_json::to_value(cutoff_trajectory::<f64>().record()).unwrap();
        for key in ["phi_i", "phi_r", "theta", "delta_theta", "C", "energy_up"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn single_precision_cutoff() {
        let t = cutoff_trajectory::<f32>();
        assert!((t.return_energy - 3.17).abs() < 0.01);
        assert!((t.coefficient().magnitude - 2.558).abs() < 0.05);
    }
}
