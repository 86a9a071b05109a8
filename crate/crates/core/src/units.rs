//! Atomic-unit conversions and the time-dependent fields of the probe laser
//! and the THz pulse.
//!
//! Time origin: `t = 0` is the centre of the probe pulse. THz offsets are
//! measured from the same origin.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::Real;

/// Field strength of one atomic unit, in kV/cm.
pub const FIELD_AU_IN_KV_PER_CM: f64 = 5.142e6;
/// Intensity corresponding to a peak field of one atomic unit, in W/cm^2.
pub const INTENSITY_AU_IN_W_PER_CM2: f64 = 3.50945e16;
/// `lambda[nm] * omega[a.u.]` for a photon.
pub const NM_TIMES_OMEGA_AU: f64 = 45.5633;
/// One atomic unit of time, in seconds.
pub const TIME_AU_IN_S: f64 = 2.4189e-17;
/// One atomic unit of time, in femtoseconds.
pub const TIME_AU_IN_FS: f64 = TIME_AU_IN_S * 1e15;

/// Peak field amplitude (a.u.) of a linearly polarized pulse of the given
/// intensity in W/cm^2.
pub fn intensity_to_field<T: Real>(intensity: T) -> Result<T> {
    if !(intensity > T::zero()) {
        return Err(domain(format!("intensity must be positive, got {intensity}")));
    }
    Ok((intensity / T::lit(INTENSITY_AU_IN_W_PER_CM2)).sqrt())
}

/// Inverse of [`intensity_to_field`].
pub fn field_to_intensity<T: Real>(field: T) -> T {
    field * field * T::lit(INTENSITY_AU_IN_W_PER_CM2)
}

/// Photon angular frequency (a.u.) for a vacuum wavelength in nm.
pub fn wavelength_to_frequency<T: Real>(wavelength_nm: T) -> Result<T> {
    if !(wavelength_nm > T::zero()) {
        return Err(domain(format!("wavelength must be positive, got {wavelength_nm}")));
    }
    Ok(T::lit(NM_TIMES_OMEGA_AU) / wavelength_nm)
}

pub fn frequency_to_wavelength<T: Real>(omega: T) -> Result<T> {
    if !(omega > T::zero()) {
        return Err(domain(format!("frequency must be positive, got {omega}")));
    }
    Ok(T::lit(NM_TIMES_OMEGA_AU) / omega)
}

pub fn field_to_kv_per_cm<T: Real>(field: T) -> T {
    field * T::lit(FIELD_AU_IN_KV_PER_CM)
}

pub fn kv_per_cm_to_field<T: Real>(kv_per_cm: T) -> T {
    kv_per_cm / T::lit(FIELD_AU_IN_KV_PER_CM)
}

/// Angular frequency (a.u.) of an oscillation at `f` THz.
pub fn thz_to_angular_frequency<T: Real>(terahertz: T) -> T {
    T::TAU() * terahertz * T::lit(1e12 * TIME_AU_IN_S)
}

pub fn au_time_to_fs<T: Real>(t: T) -> T {
    t * T::lit(TIME_AU_IN_FS)
}

pub fn fs_to_au_time<T: Real>(t_fs: T) -> T {
    t_fs / T::lit(TIME_AU_IN_FS)
}

/// Cycle-averaged quiver energy `E0^2 / 4 w0^2`.
pub fn ponderomotive_energy<T: Real>(peak_field: T, omega: T) -> T {
    peak_field * peak_field / (T::lit(4.0) * omega * omega)
}

/// Classical quiver amplitude `E0 / w0^2`.
pub fn quiver_radius<T: Real>(peak_field: T, omega: T) -> T {
    peak_field / (omega * omega)
}

/// The scaled THz field `gamma = E0 * ET / w0^3`.
pub fn asymmetry_parameter<T: Real>(peak_field: T, omega: T, thz_field: T) -> T {
    peak_field * thz_field / (omega * omega * omega)
}

/// THz field giving the asymmetry parameter `gamma`; inverse of
/// [`asymmetry_parameter`] in its last argument.
pub fn thz_field_for_asymmetry<T: Real>(peak_field: T, omega: T, gamma: T) -> T {
    gamma * omega * omega * omega / peak_field
}

/// Mid-IR probe with a linear trapezoidal envelope centred on `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePulse<T> {
    pub peak_amplitude: T,
    pub carrier_frequency: T,
    pub total_cycles: u32,
    pub ramp_cycles: u32,
    pub carrier_envelope_phase: T,
}

impl<T: Real> ProbePulse<T> {
    pub fn new(
        peak_amplitude: T,
        carrier_frequency: T,
        total_cycles: u32,
        ramp_cycles: u32,
        carrier_envelope_phase: T,
    ) -> Result<Self> {
        if !(peak_amplitude > T::zero()) {
            return Err(domain("probe peak amplitude must be positive"));
        }
        if !(carrier_frequency > T::zero()) {
            return Err(domain("probe carrier frequency must be positive"));
        }
        if total_cycles < 2 * ramp_cycles + 1 {
            return Err(domain(format!(
                "{total_cycles} cycles cannot hold two {ramp_cycles}-cycle ramps and a flat top"
            )));
        }
        Ok(Self {
            peak_amplitude,
            carrier_frequency,
            total_cycles,
            ramp_cycles,
            carrier_envelope_phase,
        })
    }

    /// Probe from laboratory units: intensity in W/cm^2 and wavelength in nm,
    /// one-cycle ramps and zero CEP.
    pub fn from_lab(intensity: T, wavelength_nm: T, total_cycles: u32) -> Result<Self> {
        Self::new(
            intensity_to_field(intensity)?,
            wavelength_to_frequency(wavelength_nm)?,
            total_cycles,
            1,
            T::zero(),
        )
    }

    pub fn period(&self) -> T {
        T::TAU() / self.carrier_frequency
    }

    pub fn duration(&self) -> T {
        T::from_u32(self.total_cycles).unwrap() * self.period()
    }

    pub fn start(&self) -> T {
        -self.duration() / T::lit(2.0)
    }

    pub fn end(&self) -> T {
        self.duration() / T::lit(2.0)
    }

    pub fn ramp_duration(&self) -> T {
        T::from_u32(self.ramp_cycles).unwrap() * self.period()
    }

    /// Interval on which the envelope equals one.
    pub fn flat_top(&self) -> (T, T) {
        (self.start() + self.ramp_duration(), self.end() - self.ramp_duration())
    }

    pub fn envelope(&self, t: T) -> T {
        let s = t - self.start();
        let duration = self.duration();
        if s < T::zero() || s > duration {
            return T::zero();
        }
        let ramp = self.ramp_duration();
        if ramp <= T::zero() {
            return T::one();
        }
        if s < ramp {
            s / ramp
        } else if s > duration - ramp {
            (duration - s) / ramp
        } else {
            T::one()
        }
    }

    pub fn field_at(&self, t: T) -> T {
        let envelope = self.envelope(t);
        if envelope == T::zero() {
            return T::zero();
        }
        self.peak_amplitude
            * envelope
            * (self.carrier_frequency * t + self.carrier_envelope_phase).cos()
    }

    pub fn ponderomotive_energy(&self) -> T {
        ponderomotive_energy(self.peak_amplitude, self.carrier_frequency)
    }

    pub fn quiver_radius(&self) -> T {
        quiver_radius(self.peak_amplitude, self.carrier_frequency)
    }

    pub fn intensity_w_per_cm2(&self) -> T {
        field_to_intensity(self.peak_amplitude)
    }

    pub fn wavelength_nm(&self) -> T {
        T::lit(NM_TIMES_OMEGA_AU) / self.carrier_frequency
    }
}

/// THz transient `ET0 exp(-wT^2 s^2 / 36 pi^2) sin(wT s)` with `s = t - offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThzPulse<T> {
    pub peak_amplitude: T,
    pub frequency: T,
    pub time_offset: T,
}

impl<T: Real> ThzPulse<T> {
    pub fn new(peak_amplitude: T, frequency: T, time_offset: T) -> Result<Self> {
        if !(frequency > T::zero()) {
            return Err(domain("THz frequency must be positive"));
        }
        if !peak_amplitude.is_finite() || !time_offset.is_finite() {
            return Err(domain("THz amplitude and offset must be finite"));
        }
        Ok(Self {
            peak_amplitude,
            frequency,
            time_offset,
        })
    }

    /// THz pulse from kV/cm and THz (ordinary frequency).
    pub fn from_lab(peak_kv_per_cm: T, terahertz: T, time_offset: T) -> Result<Self> {
        Self::new(
            kv_per_cm_to_field(peak_kv_per_cm),
            thz_to_angular_frequency(terahertz),
            time_offset,
        )
    }

    pub fn period(&self) -> T {
        T::TAU() / self.frequency
    }

    pub fn field_at(&self, t: T) -> T {
        let s = t - self.time_offset;
        let phase = self.frequency * s;
        let width = T::lit(6.0) * T::PI();
        self.peak_amplitude * (-(phase / width).powi(2)).exp() * phase.sin()
    }

    /// Same waveform, shifted later in time by `shift`.
    pub fn shifted(&self, shift: T) -> Self {
        Self {
            time_offset: self.time_offset + shift,
            ..*self
        }
    }

    /// Same waveform with the field sign flipped.
    pub fn inverted(&self) -> Self {
        Self {
            peak_amplitude: -self.peak_amplitude,
            ..*self
        }
    }
}

/// THz contribution to the total field. At most one kind is ever active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThzContribution<T> {
    None,
    Pulse(ThzPulse<T>),
    /// Constant field over the whole probe, the quasi-static limit of a slow
    /// THz transient.
    Static(T),
}

/// Probe plus an optional THz contribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeField<T> {
    pub probe: ProbePulse<T>,
    pub thz: ThzContribution<T>,
}

impl<T: Real> CompositeField<T> {
    pub fn probe_only(probe: ProbePulse<T>) -> Self {
        Self {
            probe,
            thz: ThzContribution::None,
        }
    }

    pub fn with_pulse(probe: ProbePulse<T>, thz: ThzPulse<T>) -> Self {
        Self {
            probe,
            thz: ThzContribution::Pulse(thz),
        }
    }

    pub fn with_static(probe: ProbePulse<T>, thz_field: T) -> Self {
        Self {
            probe,
            thz: ThzContribution::Static(thz_field),
        }
    }

    /// Replaces a THz pulse by its value at the probe centre.
    pub fn quasi_static(&self) -> Self {
        match self.thz {
            ThzContribution::Pulse(p) => Self::with_static(self.probe, p.field_at(T::zero())),
            _ => *self,
        }
    }

    pub fn thz_field_at(&self, t: T) -> T {
        match self.thz {
            ThzContribution::None => T::zero(),
            ThzContribution::Pulse(p) => p.field_at(t),
            ThzContribution::Static(value) => value,
        }
    }

    pub fn field_at(&self, t: T) -> T {
        self.probe.field_at(t) + self.thz_field_at(t)
    }

    /// THz field seen by the probe centre.
    pub fn thz_at_center(&self) -> T {
        self.thz_field_at(T::zero())
    }

    /// Same physics mirrored through `x -> -x`: every field flips sign.
    pub fn mirrored(&self) -> Self {
        let mut probe = self.probe;
        probe.carrier_envelope_phase = probe.carrier_envelope_phase + T::PI();
        let thz = match self.thz {
            ThzContribution::None => ThzContribution::None,
            ThzContribution::Pulse(p) => ThzContribution::Pulse(p.inverted()),
            ThzContribution::Static(v) => ThzContribution::Static(-v),
        };
        Self { probe, thz }
    }
}

/// One point on the scaled-field axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryPoint<T> {
    pub gamma: T,
    pub thz_field: T,
    pub peak_field: T,
    pub omega: T,
}

impl<T: Real> AsymmetryPoint<T> {
    pub fn new(peak_field: T, omega: T, thz_field: T) -> Self {
        Self {
            gamma: asymmetry_parameter(peak_field, omega, thz_field),
            thz_field,
            peak_field,
            omega,
        }
    }

    pub fn from_probe(probe: &ProbePulse<T>, thz_field: T) -> Self {
        Self::new(probe.peak_amplitude, probe.carrier_frequency, thz_field)
    }
}
