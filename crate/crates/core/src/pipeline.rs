//! Ground state -> propagation -> spectrum -> `eta`, packaged so that sweeps
//! over the THz field reuse one ground state.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spectrum::{compute_spectrum, even_to_odd_ratio, monitored_even_order, EvenOddPoint, HhgSpectrum, Window};
use crate::tdse::{ground_state, AbsorberSpec, AtomLabel, AtomModel, DipoleSignal, GridSpec, Propagator, Wavefunction};
use crate::units::{asymmetry_parameter, thz_field_for_asymmetry, CompositeField, ProbePulse, ThzContribution};
use crate::Real;

/// How the atom is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomChoice<T> {
    /// Use this model as is.
    Model(AtomModel<T>),
    /// Named target; hydrogen uses `a = sqrt(2)`, the others are tuned.
    Label(AtomLabel),
    /// Custom target tuned to this ionization potential.
    Ip(T),
}

/// Discretization and readout settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerics<T> {
    pub dx: T,
    pub dt: T,
    /// Box half-width; defaults to the probe-sized box.
    pub half_width: Option<T>,
    pub absorber: Option<AbsorberSpec<T>>,
    pub window: Window<T>,
    /// Even order to monitor; defaults to the largest even order below cutoff.
    pub monitored_order: Option<u32>,
}

impl<T: Real> Default for Numerics<T> {
    fn default() -> Self {
        Self {
            dx: T::lit(crate::tdse::DEFAULT_DX),
            dt: T::lit(crate::tdse::DEFAULT_DT),
            half_width: None,
            absorber: Some(AbsorberSpec::default()),
            window: Window::HannFlatTop,
            monitored_order: None,
        }
    }
}

/// A probe, an atom and a grid with the atom's ground state precomputed.
#[derive(Debug, Clone)]
pub struct HhgSimulation<T: Real> {
    pub probe: ProbePulse<T>,
    pub atom: AtomModel<T>,
    pub grid: GridSpec<T>,
    pub numerics: Numerics<T>,
    pub monitored_order: u32,
    pub ground: Wavefunction<T>,
    pub ground_energy: T,
}

impl<T: Real> HhgSimulation<T> {
    pub fn new(probe: ProbePulse<T>, atom: AtomChoice<T>, numerics: Numerics<T>) -> Result<Self> {
        let grid = match numerics.half_width {
            Some(h) => GridSpec::symmetric(h, numerics.dx, numerics.dt)?,
            None => GridSpec::for_probe(&probe, numerics.dx, numerics.dt)?,
        };
        let atom = match atom {
            AtomChoice::Model(m) => m,
            AtomChoice::Label(AtomLabel::H) => AtomModel::hydrogen(),
            AtomChoice::Label(label) => AtomModel::tuned(label, &grid)?,
            AtomChoice::Ip(ip) => AtomModel::tuned_to(ip, AtomLabel::Custom, &grid)?,
        };
        Self::on_grid(probe, atom, grid, numerics)
    }

    pub fn on_grid(
        probe: ProbePulse<T>,
        atom: AtomModel<T>,
        grid: GridSpec<T>,
        numerics: Numerics<T>,
    ) -> Result<Self> {
        let gs = ground_state(&grid, &atom)?;
        let monitored_order = numerics.monitored_order.unwrap_or_else(|| {
            monitored_even_order(
                probe.peak_amplitude,
                probe.carrier_frequency,
                atom.ionization_potential,
            )
        });
        Ok(Self {
            probe,
            atom,
            grid,
            numerics,
            monitored_order,
            ground: gs.state,
            ground_energy: gs.energy,
        })
    }

    /// Same physics with `dx` and `dt` halved.
    pub fn refined(&self) -> Result<Self> {
        let mut numerics = self.numerics;
        numerics.dx = numerics.dx / T::lit(2.0);
        numerics.dt = numerics.dt / T::lit(2.0);
        numerics.monitored_order = Some(self.monitored_order);
        Self::on_grid(self.probe, self.atom, self.grid.refined()?, numerics)
    }

    pub fn field(&self, thz: ThzContribution<T>) -> CompositeField<T> {
        CompositeField {
            probe: self.probe,
            thz,
        }
    }

    pub fn gamma(&self, thz_field: T) -> T {
        asymmetry_parameter(self.probe.peak_amplitude, self.probe.carrier_frequency, thz_field)
    }

    pub fn thz_field_for_gamma(&self, gamma: T) -> T {
        thz_field_for_asymmetry(self.probe.peak_amplitude, self.probe.carrier_frequency, gamma)
    }

    pub fn propagator(&self) -> Propagator<T> {
        Propagator::new(&self.grid, &self.atom, self.numerics.absorber.as_ref())
    }

    pub fn signal_for(&self, field: &CompositeField<T>) -> Result<DipoleSignal<T>> {
        let mut state = self.ground.clone();
        self.propagator().run_pulse(&mut state, field)
    }

    pub fn signal(&self, thz: ThzContribution<T>) -> Result<DipoleSignal<T>> {
        self.signal_for(&self.field(thz))
    }

    pub fn spectrum_of(&self, signal: &DipoleSignal<T>) -> Result<HhgSpectrum<T>> {
        compute_spectrum(signal, self.numerics.window)
    }

    pub fn spectrum(&self, thz: ThzContribution<T>) -> Result<HhgSpectrum<T>> {
        self.spectrum_of(&self.signal(thz)?)
    }

    pub fn even_odd_for(&self, field: &CompositeField<T>) -> Result<EvenOddPoint<T>> {
        let spec = self.spectrum_of(&self.signal_for(field)?)?;
        even_to_odd_ratio(&spec, self.monitored_order)
    }

    pub fn even_odd(&self, thz: ThzContribution<T>) -> Result<EvenOddPoint<T>> {
        self.even_odd_for(&self.field(thz))
    }

    /// `eta` for each THz setting, computed in parallel on the current rayon
    /// pool. Output order follows input order.
    pub fn even_odd_sweep(&self, settings: &[ThzContribution<T>]) -> Vec<Result<EvenOddPoint<T>>> {
        settings.par_iter().map(|&thz| self.even_odd(thz)).collect()
    }

    /// Static-field sweep over asymmetry parameters.
    pub fn gamma_sweep(&self, gammas: &[T]) -> Vec<Result<EvenOddPoint<T>>> {
        let settings: Vec<_> = gammas
            .iter()
            .map(|&g| ThzContribution::Static(self.thz_field_for_gamma(g)))
            .collect();
        self.even_odd_sweep(&settings)
    }
}
