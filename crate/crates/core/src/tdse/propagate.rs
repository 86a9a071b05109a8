use std::io::Write;

use super::operators::{apply_ramped_phase, SpectralOps};
use super::{AbsorberSpec, AtomModel, GridSpec, Wavefunction};
use crate::error::{domain, Error, Result};
use crate::units::CompositeField;
use crate::{Complex, Real};

/// Where a recorded signal came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalMeta<T> {
    pub carrier_frequency: T,
    /// Interval on which the probe envelope is flat, if known.
    pub flat_top: Option<(T, T)>,
    pub field: Option<CompositeField<T>>,
    pub atom: Option<AtomModel<T>>,
    pub grid: Option<GridSpec<T>>,
}

/// Dipole acceleration sampled every `dt` from `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleSignal<T> {
    pub t0: T,
    pub dt: T,
    pub acceleration: Vec<T>,
    /// `<x>(t)` on the same time axis, when requested.
    pub dipole: Option<Vec<T>>,
    /// Norm of the state on the same time axis.
    pub norm: Vec<T>,
    pub meta: SignalMeta<T>,
}

impl<T: Real> DipoleSignal<T> {
    /// Wraps an externally generated acceleration record.
    pub fn synthetic(t0: T, dt: T, acceleration: Vec<T>, carrier_frequency: T) -> Self {
        let norm = vec![T::one(); acceleration.len()];
        Self {
            t0,
            dt,
            acceleration,
            dipole: None,
            norm,
            meta: SignalMeta {
                carrier_frequency,
                flat_top: None,
                field: None,
                atom: None,
                grid: None,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.acceleration.len()
    }

    pub fn is_empty(&self) -> bool {
        self.acceleration.is_empty()
    }

    pub fn time(&self, n: usize) -> T {
        self.t0 + T::from_usize_lossy(n) * self.dt
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.len()).map(|n| self.time(n)).collect()
    }

    pub fn end_time(&self) -> T {
        self.time(self.len().saturating_sub(1))
    }

    /// `t_au,accel_au` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t_au,accel_au")?;
        for (n, a) in self.acceleration.iter().enumerate() {
            writeln!(w, "{:.10e},{:.12e}", self.time(n), a)?;
        }
        Ok(())
    }
}

/// Strang-split real-time propagator for one grid and atom.
pub struct Propagator<T: Real> {
    grid: GridSpec<T>,
    atom: AtomModel<T>,
    ops: SpectralOps<T>,
    kinetic_phase: Vec<Complex<T>>,
    potential_half_phase: Vec<Complex<T>>,
    gradient: Vec<T>,
    positions: Vec<T>,
    mask: Option<Vec<T>>,
    record_dipole: bool,
}

impl<T: Real> Propagator<T> {
    pub fn new(grid: &GridSpec<T>, atom: &AtomModel<T>, absorber: Option<&AbsorberSpec<T>>) -> Self {
        let ops = SpectralOps::new(grid);
        let dt = grid.dt;
        let inv_n = T::from_usize_lossy(grid.num_points).recip();
        let kinetic_phase = ops
            .kinetic
            .iter()
            .map(|&k| Complex::from_polar(inv_n, -k * dt))
            .collect();
        let positions = grid.positions();
        let potential_half_phase = positions
            .iter()
            .map(|&x| Complex::from_polar(T::one(), -atom.potential(x) * dt / T::lit(2.0)))
            .collect();
        let gradient = positions.iter().map(|&x| atom.force_gradient(x)).collect();
        Self {
            grid: *grid,
            atom: *atom,
            ops,
            kinetic_phase,
            potential_half_phase,
            gradient,
            positions,
            mask: absorber.map(|a| a.mask(grid)),
            record_dipole: false,
        }
    }

    /// Also record `<x>(t)`.
    pub fn record_dipole(mut self, on: bool) -> Self {
        self.record_dipole = on;
        self
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    fn half_potential_step(&self, psi: &mut [Complex<T>], field: T) {
        let half_dt = self.grid.dt / T::lit(2.0);
        let c0 = half_dt * field * self.grid.x_min;
        let dc = half_dt * field * self.grid.dx();
        apply_ramped_phase(psi, &self.potential_half_phase, c0, dc);
    }

    fn observe(&self, psi: &[Complex<T>], field: T) -> (T, T, T) {
        let dx = self.grid.dx();
        let mut norm = T::zero();
        let mut force = T::zero();
        let mut x_mean = T::zero();
        for ((c, &g), &x) in psi.iter().zip(&self.gradient).zip(&self.positions) {
            let p = c.norm_sqr();
            norm = norm + p;
            force = force + p * g;
            if self.record_dipole {
                x_mean = x_mean + p * x;
            }
        }
        (-force * dx - field, norm * dx, x_mean * dx)
    }

    /// Advances `state` by `steps` time steps of the composite field,
    /// recording the acceleration before the first and after every step.
    pub fn run(
        &mut self,
        state: &mut Wavefunction<T>,
        field: &CompositeField<T>,
        steps: usize,
    ) -> Result<DipoleSignal<T>> {
        if state.psi.len() != self.grid.num_points {
            return Err(domain("wavefunction length does not match grid"));
        }
        let dt = self.grid.dt;
        let t0 = state.time;
        let mut acceleration = Vec::with_capacity(steps + 1);
        let mut norms = Vec::with_capacity(steps + 1);
        let mut dipole = self.record_dipole.then(|| Vec::with_capacity(steps + 1));

        let (a, n0, x) = self.observe(&state.psi, field.field_at(t0));
        acceleration.push(a);
        norms.push(n0);
        if let Some(d) = dipole.as_mut() {
            d.push(x);
        }
        let mut lowest_norm = n0;
        let tolerance = T::lit(1e-6);

        let psi = &mut state.psi;
        for step in 0..steps {
            let t = t0 + T::from_usize_lossy(step) * dt;
            let t_next = t0 + T::from_usize_lossy(step + 1) * dt;
            let e_now = field.field_at(t);
            let e_next = field.field_at(t_next);

            self.half_potential_step(psi, e_now);
            self.ops.forward(psi);
            psi.iter_mut()
                .zip(&self.kinetic_phase)
                .for_each(|(c, &k)| *c = *c * k);
            self.ops.inverse(psi);
            self.half_potential_step(psi, e_next);
            if let Some(mask) = &self.mask {
                psi.iter_mut().zip(mask).for_each(|(c, &m)| *c = *c * m);
            }

            let (a, norm, x) = self.observe(psi, e_next);
            if !a.is_finite() || !norm.is_finite() {
                return Err(Error::Instability {
                    step: step + 1,
                    reason: "non-finite amplitude".into(),
                });
            }
            if norm > lowest_norm + tolerance {
                return Err(Error::Instability {
                    step: step + 1,
                    reason: format!("norm grew from {lowest_norm} to {norm}"),
                });
            }
            lowest_norm = lowest_norm.min(norm);
            acceleration.push(a);
            norms.push(norm);
            if let Some(d) = dipole.as_mut() {
                d.push(x);
            }
        }
        state.time = t0 + T::from_usize_lossy(steps) * dt;

        Ok(DipoleSignal {
            t0,
            dt,
            acceleration,
            dipole,
            norm: norms,
            meta: SignalMeta {
                carrier_frequency: field.probe.carrier_frequency,
                flat_top: Some(field.probe.flat_top()),
                field: Some(*field),
                atom: Some(self.atom),
                grid: Some(self.grid),
            },
        })
    }

    /// Runs over the whole probe support, starting the clock at the probe's
    /// leading edge regardless of `state.time`.
    pub fn run_pulse(
        &mut self,
        state: &mut Wavefunction<T>,
        field: &CompositeField<T>,
    ) -> Result<DipoleSignal<T>> {
        check_box(&self.grid, field)?;
        let norm = state.norm_sqr(self.grid.dx());
        if (norm - T::one()).abs() > T::lit(1e-6) {
            return Err(domain(format!("initial state must be normalized, norm = {norm}")));
        }
        let steps = (field.probe.duration() / self.grid.dt)
            .round()
            .to_usize()
            .unwrap_or(0);
        state.time = field.probe.start();
        self.run(state, field, steps)
    }
}

/// The box must hold twice the quiver excursion plus a margin of 50 a.u.
fn check_box<T: Real>(grid: &GridSpec<T>, field: &CompositeField<T>) -> Result<()> {
    let needed = T::lit(2.0) * field.probe.quiver_radius() + T::lit(50.0);
    if grid.half_width() < needed {
        return Err(domain(format!(
            "box half-width {} below 2 E0/w0^2 + 50 = {}",
            grid.half_width(),
            needed
        )));
    }
    Ok(())
}

/// Propagates `state` through the whole probe pulse and returns the
/// recorded dipole acceleration.
pub fn propagate<T: Real>(
    mut state: Wavefunction<T>,
    field: &CompositeField<T>,
    grid: &GridSpec<T>,
    atom: &AtomModel<T>,
    absorber: Option<&AbsorberSpec<T>>,
) -> Result<DipoleSignal<T>> {
    Propagator::new(grid, atom, absorber).run_pulse(&mut state, field)
}
