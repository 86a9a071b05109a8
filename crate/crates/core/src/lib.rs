//! Odd-even high-order harmonic generation from a single-active-electron atom
//! driven by a mid-IR probe and a THz field.
//!
//! The crate covers the whole chain: atomic-unit field definitions
//! ([`units`]), a one-dimensional split-step TDSE ([`tdse`]), harmonic spectra
//! and the even-to-odd ratio ([`spectrum`]), classical return trajectories
//! and the law `eta = tan^2(C gamma)` ([`orbits`]), and pump-probe THz
//! waveform sampling ([`sampling`]).
//!
//! All numerics are generic over the floating point type through [`Real`];
//! the `*F64` / `*F32` aliases below name the concrete instantiations.

pub mod error;
pub mod orbits;
pub mod pipeline;
pub mod sampling;
pub mod spectrum;
pub mod tdse;
pub mod units;

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

pub use error::{Error, Result};
pub use rustfft::num_complex::Complex;

/// Scalar type the numerics are written against: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + FftNum
    + Default
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("finite float")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type ProbePulseF64 = units::ProbePulse<f64>;
pub type ThzPulseF64 = units::ThzPulse<f64>;
pub type CompositeFieldF64 = units::CompositeField<f64>;
pub type GridSpecF64 = tdse::GridSpec<f64>;
pub type AtomModelF64 = tdse::AtomModel<f64>;
pub type WavefunctionF64 = tdse::Wavefunction<f64>;
pub type DipoleSignalF64 = tdse::DipoleSignal<f64>;
pub type HhgSpectrumF64 = spectrum::HhgSpectrum<f64>;
pub type EvenOddPointF64 = spectrum::EvenOddPoint<f64>;
pub type TrajectoryF64 = orbits::Trajectory<f64>;
pub type DelayScanF64 = sampling::DelayScan<f64>;
pub type ReconstructedWaveformF64 = sampling::ReconstructedWaveform<f64>;

pub type HhgSimulationF64 = pipeline::HhgSimulation<f64>;

pub type ProbePulseF32 = units::ProbePulse<f32>;
pub type ThzPulseF32 = units::ThzPulse<f32>;

