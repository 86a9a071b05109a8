//! One-dimensional single-active-electron TDSE in the length gauge.
//!
//! The electron moves in a soft-core Coulomb well `V(x) = -1/sqrt(x^2 + a^2)`
//! on a periodic grid. Kinetic energy is applied spectrally, the potential and
//! the `x E(t)` coupling in position space (Strang splitting). A
//! `cos^(1/8)` mask at both box edges removes far-ionized flux.

mod checkpoint;
mod convergence;
mod ground;
mod operators;
mod propagate;

pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use convergence::{convergence_probe, ConvergenceReport, CONVERGENCE_TOLERANCE, ETA_FLOOR};
pub use ground::{ground_state, lowest_eigenstate, tune_soft_core, GroundState};
pub use propagate::{propagate, DipoleSignal, Propagator, SignalMeta};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::units::ProbePulse;
use crate::{Complex, Real};

/// Default spatial step (a.u.).
pub const DEFAULT_DX: f64 = 0.2;
/// Default time step (a.u.).
pub const DEFAULT_DT: f64 = 0.05;
/// Smallest grid the engine accepts.
pub const MIN_POINTS: usize = 1024;

/// Uniform periodic grid on `[x_min, x_max)` plus the time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    pub x_min: T,
    pub x_max: T,
    pub num_points: usize,
    pub dt: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(x_min: T, x_max: T, num_points: usize, dt: T) -> Result<Self> {
        if !(x_min < T::zero() && T::zero() < x_max) {
            return Err(domain("grid must straddle the origin: x_min < 0 < x_max"));
        }
        if num_points < MIN_POINTS {
            return Err(domain(format!(
                "grid needs at least {MIN_POINTS} points, got {num_points}"
            )));
        }
        if num_points % 2 != 0 {
            return Err(domain("grid point count must be even"));
        }
        if !(dt > T::zero()) {
            return Err(domain("time step must be positive"));
        }
        Ok(Self {
            x_min,
            x_max,
            num_points,
            dt,
        })
    }

    /// Symmetric box of at least `half_width` with spacing exactly `dx`.
    ///
    /// The point count is rounded up to an even 5-smooth number so the FFTs
    /// stay fast; the box grows accordingly.
    pub fn symmetric(half_width: T, dx: T, dt: T) -> Result<Self> {
        if !(half_width > T::zero() && dx > T::zero()) {
            return Err(domain("box half-width and dx must be positive"));
        }
        let wanted = (T::lit(2.0) * half_width / dx).ceil().to_usize().unwrap_or(usize::MAX);
        let n = smooth_size(wanted.max(MIN_POINTS));
        let half = dx * T::from_usize_lossy(n) / T::lit(2.0);
        Self::new(-half, half, n, dt)
    }

    /// Default box for a probe: half-width `max(2 E0/w0^2 + 100, 400)`.
    pub fn for_probe(probe: &ProbePulse<T>, dx: T, dt: T) -> Result<Self> {
        let half = (T::lit(2.0) * probe.quiver_radius() + T::lit(100.0)).max(T::lit(400.0));
        Self::symmetric(half, dx, dt)
    }

    pub fn dx(&self) -> T {
        (self.x_max - self.x_min) / T::from_usize_lossy(self.num_points)
    }

    pub fn half_width(&self) -> T {
        self.x_max.min(-self.x_min)
    }

    pub fn x(&self, j: usize) -> T {
        self.x_min + T::from_usize_lossy(j) * self.dx()
    }

    pub fn positions(&self) -> Vec<T> {
        (0..self.num_points).map(|j| self.x(j)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<T> {
        let n = self.num_points;
        let dk = T::TAU() / (T::from_usize_lossy(n) * self.dx());
        (0..n)
            .map(|j| {
                if j < n / 2 {
                    T::from_usize_lossy(j) * dk
                } else {
                    -(T::from_usize_lossy(n - j) * dk)
                }
            })
            .collect()
    }

    /// Same box with half the spacing and half the time step.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.x_min, self.x_max, self.num_points * 2, self.dt / T::lit(2.0))
    }

    /// Same spacing and time step on a box of at least `half_width`.
    pub fn with_half_width(&self, half_width: T) -> Result<Self> {
        Self::symmetric(half_width, self.dx(), self.dt)
    }
}

/// Smallest even integer `>= n` whose prime factors are 2, 3 and 5.
pub fn smooth_size(n: usize) -> usize {
    let mut m = n.max(2);
    loop {
        if m % 2 == 0 {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            if r == 1 {
                return m;
            }
        }
        m += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AtomLabel {
    H,
    He,
    Ne,
    Ar,
    Custom,
}

impl AtomLabel {
    /// Ionization potential (a.u.) the model is tuned to.
    pub fn ionization_potential(self) -> Option<f64> {
        match self {
            AtomLabel::H => Some(0.5),
            AtomLabel::He => Some(0.9036),
            AtomLabel::Ne => Some(0.7925),
            AtomLabel::Ar => Some(0.5792),
            AtomLabel::Custom => None,
        }
    }
}

impl std::str::FromStr for AtomLabel {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" => Ok(AtomLabel::H),
            "He" => Ok(AtomLabel::He),
            "Ne" => Ok(AtomLabel::Ne),
            "Ar" => Ok(AtomLabel::Ar),
            "custom" | "Custom" => Ok(AtomLabel::Custom),
            other => Err(domain(format!("unknown atom label {other:?}"))),
        }
    }
}

impl std::fmt::Display for AtomLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AtomLabel::H => "H",
            AtomLabel::He => "He",
            AtomLabel::Ne => "Ne",
            AtomLabel::Ar => "Ar",
            AtomLabel::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Soft-core single-active-electron atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomModel<T> {
    pub soft_core: T,
    pub ionization_potential: T,
    pub label: AtomLabel,
}

impl<T: Real> AtomModel<T> {
    pub fn new(soft_core: T, ionization_potential: T, label: AtomLabel) -> Result<Self> {
        if !(soft_core > T::zero()) {
            return Err(domain("soft-core parameter must be positive"));
        }
        if !(ionization_potential > T::zero()) {
            return Err(domain("ionization potential must be positive"));
        }
        Ok(Self {
            soft_core,
            ionization_potential,
            label,
        })
    }

    /// The classic `a = sqrt(2)` hydrogen model with `Ip = 0.5`.
    pub fn hydrogen() -> Self {
        Self {
            soft_core: T::SQRT_2(),
            ionization_potential: T::lit(0.5),
            label: AtomLabel::H,
        }
    }

    /// Model for `label` with the soft-core parameter tuned on `grid`.
    pub fn tuned(label: AtomLabel, grid: &GridSpec<T>) -> Result<Self> {
        let ip = label
            .ionization_potential()
            .ok_or_else(|| domain("custom atoms need an explicit ionization potential"))?;
        Self::tuned_to(T::lit(ip), label, grid)
    }

    pub fn tuned_to(ionization_potential: T, label: AtomLabel, grid: &GridSpec<T>) -> Result<Self> {
        let a = tune_soft_core(ionization_potential, grid)?;
        Self::new(a, ionization_potential, label)
    }

    pub fn potential(&self, x: T) -> T {
        -(x * x + self.soft_core * self.soft_core).sqrt().recip()
    }

    /// `dV/dx`.
    pub fn force_gradient(&self, x: T) -> T {
        let r2 = x * x + self.soft_core * self.soft_core;
        x / (r2 * r2.sqrt())
    }

    pub fn potential_on(&self, grid: &GridSpec<T>) -> Vec<T> {
        grid.positions().into_iter().map(|x| self.potential(x)).collect()
    }
}

/// Edge mask `cos(pi/2 * s)^exponent` over the outer `width_fraction` of each
/// half-box, with `s` running from 0 at the inner edge towards 1 at the wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorberSpec<T> {
    pub width_fraction: T,
    pub mask_exponent: T,
}

impl<T: Real> Default for AbsorberSpec<T> {
    fn default() -> Self {
        Self {
            width_fraction: T::lit(0.1),
            mask_exponent: T::lit(0.125),
        }
    }
}

impl<T: Real> AbsorberSpec<T> {
    pub fn new(width_fraction: T, mask_exponent: T) -> Result<Self> {
        if !(width_fraction > T::zero() && width_fraction < T::lit(0.5)) {
            return Err(domain("absorber width fraction must lie in (0, 0.5)"));
        }
        if !(mask_exponent > T::zero()) {
            return Err(domain("absorber mask exponent must be positive"));
        }
        Ok(Self {
            width_fraction,
            mask_exponent,
        })
    }

    pub fn mask(&self, grid: &GridSpec<T>) -> Vec<T> {
        let half = grid.half_width();
        let inner = half * (T::one() - self.width_fraction);
        // one extra dx keeps the outermost point strictly positive
        let span = half - inner + grid.dx();
        grid.positions()
            .into_iter()
            .map(|x| {
                let d = x.abs() - inner;
                if d <= T::zero() {
                    T::one()
                } else {
                    (T::FRAC_PI_2() * d / span).cos().powf(self.mask_exponent)
                }
            })
            .collect()
    }
}

/// Complex amplitudes on the grid at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction<T> {
    pub psi: Vec<Complex<T>>,
    pub time: T,
}

impl<T: Real> Wavefunction<T> {
    pub fn new(psi: Vec<Complex<T>>, time: T) -> Self {
        Self { psi, time }
    }

    pub fn norm_sqr(&self, dx: T) -> T {
        norm_sqr(&self.psi) * dx
    }

    pub fn normalize(&mut self, dx: T) {
        let n = self.norm_sqr(dx).sqrt();
        if n > T::zero() {
            let inv = n.recip();
            self.psi.iter_mut().for_each(|c| *c = *c * inv);
        }
    }

    /// `<self|other> dx`.
    pub fn overlap(&self, other: &Self, dx: T) -> Complex<T> {
        let s: Complex<T> = self
            .psi
            .iter()
            .zip(&other.psi)
            .map(|(a, b)| a.conj() * b)
            .fold(Complex::new(T::zero(), T::zero()), |acc, v| acc + v);
        s * dx
    }

    pub fn expectation_x(&self, grid: &GridSpec<T>) -> T {
        let dx = grid.dx();
        self.psi
            .iter()
            .enumerate()
            .map(|(j, c)| c.norm_sqr() * grid.x(j))
            .sum::<T>()
            * dx
    }

    /// Reflection through `x = 0` on the periodic grid (`j -> N - j`).
    pub fn mirrored(&self) -> Self {
        let n = self.psi.len();
        let psi = (0..n).map(|j| self.psi[(n - j) % n]).collect();
        Self {
            psi,
            time: self.time,
        }
    }
}

pub(crate) fn norm_sqr<T: Real>(psi: &[Complex<T>]) -> T {
    psi.iter().map(|c| c.norm_sqr()).sum()
}
