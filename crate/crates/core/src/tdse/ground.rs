//! Ground-state preparation.
//!
//! Imaginary-time split-step propagation brings a Gaussian close to the
//! lowest eigenstate; shifted inverse iteration (each solve done by
//! preconditioned conjugate gradients with the exact spectral Hamiltonian)
//! then removes the `O(dt^2)` splitting bias so the returned energy is the
//! eigenvalue of the discretized Hamiltonian itself.

use super::operators::SpectralOps;
use super::{AtomModel, GridSpec, Wavefunction, MIN_POINTS};
use crate::error::{domain, Error, Result};
use crate::{Complex, Real};

const IMAGINARY_STEP: f64 = 0.1;
const MAX_IMAGINARY_STEPS: usize = 20_000;
const MAX_INVERSE_ITERATIONS: usize = 3000;
const SHIFT_BELOW: f64 = 0.02;

#[derive(Debug, Clone)]
pub struct GroundState<T> {
    pub state: Wavefunction<T>,
    pub energy: T,
    /// `||H psi - E psi||` of the returned state.
    pub residual: T,
    pub iterations: usize,
}

/// Lowest eigenstate of `p^2/2 + V` for the atom's soft-core potential.
pub fn ground_state<T: Real>(grid: &GridSpec<T>, atom: &AtomModel<T>) -> Result<GroundState<T>> {
    lowest_eigenstate(grid, &atom.potential_on(grid))
}

/// Lowest eigenstate of `p^2/2 + V` for an arbitrary sampled potential.
pub fn lowest_eigenstate<T: Real>(grid: &GridSpec<T>, potential: &[T]) -> Result<GroundState<T>> {
    let n = grid.num_points;
    if potential.len() != n {
        return Err(domain("potential length does not match grid"));
    }
    let dx = grid.dx();
    let mut ops = SpectralOps::new(grid);
    let zero = Complex::new(T::zero(), T::zero());

    let mut psi: Vec<Complex<T>> = grid
        .positions()
        .into_iter()
        .map(|x| Complex::new((-(x * x) / T::lit(2.0)).exp(), T::zero()))
        .collect();
    normalize(&mut psi, dx);

    // imaginary time
    let tau = T::lit(IMAGINARY_STEP);
    let half_pot: Vec<T> = potential.iter().map(|&v| (-v * tau / T::lit(2.0)).exp()).collect();
    let inv_n = T::from_usize_lossy(n).recip();
    let kin: Vec<T> = ops.kinetic.iter().map(|&k| (-k * tau).exp() * inv_n).collect();
    let mut work = Vec::with_capacity(n);
    let mut energy = ops.energy(&psi, potential, &mut work);
    let itp_tol = T::lit(1e-9).max(T::epsilon() * T::lit(100.0));
    for step in 1..=MAX_IMAGINARY_STEPS {
        psi.iter_mut().zip(&half_pot).for_each(|(c, &h)| *c = *c * h);
        ops.forward(&mut psi);
        psi.iter_mut().zip(&kin).for_each(|(c, &k)| *c = *c * k);
        ops.inverse(&mut psi);
        psi.iter_mut().zip(&half_pot).for_each(|(c, &h)| *c = *c * h);
        normalize(&mut psi, dx);
        if step % 20 == 0 {
            let e = ops.energy(&psi, potential, &mut work);
            let change = (e - energy).abs();
            energy = e;
            if change < itp_tol {
                break;
            }
        }
    }

    // shifted inverse iteration
    let shift = energy - T::lit(SHIFT_BELOW);
    let mean_v = potential.iter().copied().sum::<T>() / T::from_usize_lossy(n);
    let precond_offset = (mean_v - shift).max(T::lit(1e-3));
    let precond: Vec<T> = ops
        .kinetic
        .iter()
        .map(|&k| (k + precond_offset).recip())
        .collect();
    let stationary = T::lit(1e-12).max(T::epsilon() * T::lit(1e4));
    let mut solution = vec![zero; n];
    let mut residual = T::infinity();
    for iteration in 1..=MAX_INVERSE_ITERATIONS {
        solve_shifted(&mut ops, potential, shift, &precond, &psi, &mut solution)?;
        std::mem::swap(&mut psi, &mut solution);
        normalize(&mut psi, dx);
        let e = ops.energy(&psi, potential, &mut work);
        residual = residual_norm(&psi, &work, e, dx);
        let change = (e - energy).abs();
        energy = e;
        if change < stationary && iteration > 1 {
            fix_phase(&mut psi);
            return Ok(GroundState {
                state: Wavefunction::new(psi, T::zero()),
                energy,
                residual,
                iterations: iteration,
            });
        }
    }
    Err(Error::Convergence {
        iterations: MAX_INVERSE_ITERATIONS,
        residual: residual.to_f64_lossy(),
    })
}

/// Soft-core parameter `a` whose ground state sits at `-ip`.
///
/// The energy rises monotonically with `a`, so plain bisection suffices. The
/// tuning runs on a box of the same spacing trimmed to 120 a.u., which bound
/// states of `ip > 0.1` never reach.
pub fn tune_soft_core<T: Real>(ip: T, grid: &GridSpec<T>) -> Result<T> {
    if !(ip > T::lit(0.1) && ip < T::lit(2.0)) {
        return Err(domain(format!("ionization potential {ip} outside (0.1, 2.0)")));
    }
    let local = if grid.half_width() > T::lit(120.0) {
        grid.with_half_width(T::lit(120.0))?
    } else {
        *grid
    };
    debug_assert!(local.num_points >= MIN_POINTS);
    let energy_at = |a: T| -> Result<T> {
        let atom = AtomModel {
            soft_core: a,
            ionization_potential: ip,
            label: super::AtomLabel::Custom,
        };
        Ok(ground_state(&local, &atom)?.energy)
    };
    let (mut lo, mut hi) = (T::lit(0.05), T::lit(20.0));
    let target = -ip;
    let (e_lo, e_hi) = (energy_at(lo)?, energy_at(hi)?);
    if !(e_lo < target && target < e_hi) {
        return Err(domain(format!(
            "cannot bracket Ip = {ip}: energies span [{e_lo}, {e_hi}]"
        )));
    }
    let tol = T::lit(1e-7).max(T::epsilon().sqrt());
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        let e = energy_at(mid)?;
        if (e - target).abs() < tol {
            return Ok(mid);
        }
        if e < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

fn normalize<T: Real>(psi: &mut [Complex<T>], dx: T) {
    let n = (super::norm_sqr(psi) * dx).sqrt();
    let inv = n.recip();
    psi.iter_mut().for_each(|c| *c = *c * inv);
}

fn residual_norm<T: Real>(psi: &[Complex<T>], h_psi: &[Complex<T>], e: T, dx: T) -> T {
    (psi.iter()
        .zip(h_psi)
        .map(|(p, h)| (*h - *p * e).norm_sqr())
        .sum::<T>()
        * dx)
        .sqrt()
}

/// Rotates the global phase so the largest amplitude is real and positive.
fn fix_phase<T: Real>(psi: &mut [Complex<T>]) {
    let peak = psi
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sqr().partial_cmp(&b.norm_sqr()).unwrap())
        .unwrap_or(Complex::new(T::one(), T::zero()));
    if peak.norm() > T::zero() {
        let rot = peak.conj() / peak.norm();
        psi.iter_mut().for_each(|c| *c = *c * rot);
    }
}

/// Solves `(H - shift) x = b` by preconditioned CG; `H - shift` is positive
/// definite because `shift` lies below the spectrum.
fn solve_shifted<T: Real>(
    ops: &mut SpectralOps<T>,
    potential: &[T],
    shift: T,
    precond: &[T],
    b: &[Complex<T>],
    x: &mut Vec<Complex<T>>,
) -> Result<()> {
    let n = b.len();
    let zero = Complex::new(T::zero(), T::zero());
    let dot = |u: &[Complex<T>], v: &[Complex<T>]| -> T {
        u.iter().zip(v).map(|(a, b)| (a.conj() * b).re).sum()
    };
    let apply = |ops: &mut SpectralOps<T>, v: &[Complex<T>], out: &mut Vec<Complex<T>>| {
        ops.apply_hamiltonian(v, potential, out);
        out.iter_mut().zip(v).for_each(|(o, p)| *o = *o - *p * shift);
    };

    x.clear();
    x.resize(n, zero);
    let mut r = b.to_vec();
    let mut z = Vec::with_capacity(n);
    ops.apply_diagonal(&r, precond, &mut z);
    let mut p = z.clone();
    let mut ap = Vec::with_capacity(n);
    let mut rz = dot(&r, &z);
    let b_norm = dot(b, b).sqrt();
    let tol = T::lit(1e-13).max(T::epsilon() * T::lit(10.0)) * b_norm;
    for _ in 0..5000 {
        apply(ops, &p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for j in 0..n {
            x[j] = x[j] + p[j] * alpha;
            r[j] = r[j] - ap[j] * alpha;
        }
        if dot(&r, &r).sqrt() < tol {
            return Ok(());
        }
        ops.apply_diagonal(&r, precond, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for j in 0..n {
            p[j] = z[j] + p[j] * beta;
        }
    }
    // an inexact solve still advances inverse iteration
    Ok(())
}
