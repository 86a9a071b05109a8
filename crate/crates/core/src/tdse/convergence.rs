use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pipeline::HhgSimulation;
use crate::units::ThzContribution;
use crate::Real;

/// Largest relative change of `eta` under `(dx, dt) -> (dx/2, dt/2)` that
/// still counts as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 0.05;
/// Ratios below this are indistinguishable from a pure-odd spectrum and do
/// not enter the relative change with their own magnitude.
pub const ETA_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport<T> {
    pub order: u32,
    pub eta_coarse: T,
    pub eta_fine: T,
    pub relative_change: T,
    pub passed: bool,
}

/// Reruns the simulation with halved `dx` and `dt` and compares `eta` at the
/// monitored order.
pub fn convergence_probe<T: Real>(
    sim: &HhgSimulation<T>,
    thz: ThzContribution<T>,
) -> Result<ConvergenceReport<T>> {
    let fine_sim = sim.refined()?;
    let (coarse, fine) = rayon::join(|| sim.even_odd(thz), || fine_sim.even_odd(thz));
    let (coarse, fine) = (coarse?.eta, fine?.eta);
    let scale = coarse.max(fine).max(T::lit(ETA_FLOOR));
    let relative_change = if coarse.is_finite() && fine.is_finite() {
        (coarse - fine).abs() / scale
    } else if coarse == fine {
        T::zero()
    } else {
        T::infinity()
    };
    Ok(ConvergenceReport {
        order: sim.monitored_order,
        eta_coarse: coarse,
        eta_fine: fine,
        relative_change,
        passed: relative_change < T::lit(CONVERGENCE_TOLERANCE),
    })
}
