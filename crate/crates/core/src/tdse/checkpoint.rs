//! Binary wavefunction checkpoints.
//!
//! Layout (little endian): magic `OEWF`, `u32` version, `f64` x_min, `f64`
//! x_max, `u64` point count, `f64` dt, `f64` time, then `re, im` pairs as
//! `f64`. Values are always stored in double precision.

use std::io::{Read, Write};

use super::{GridSpec, Wavefunction};
use crate::error::{Error, Result};
use crate::{Complex, Real};

const MAGIC: &[u8; 4] = b"OEWF";
const VERSION: u32 = 1;

pub fn write_checkpoint<T: Real, W: Write>(
    mut w: W,
    grid: &GridSpec<T>,
    state: &Wavefunction<T>,
) -> Result<()> {
    if state.psi.len() != grid.num_points {
        return Err(Error::Checkpoint("state length does not match grid".into()));
    }
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for v in [grid.x_min, grid.x_max] {
        w.write_all(&v.to_f64_lossy().to_le_bytes())?;
    }
    w.write_all(&(grid.num_points as u64).to_le_bytes())?;
    for v in [grid.dt, state.time] {
        w.write_all(&v.to_f64_lossy().to_le_bytes())?;
    }
    for c in &state.psi {
        w.write_all(&c.re.to_f64_lossy().to_le_bytes())?;
        w.write_all(&c.im.to_f64_lossy().to_le_bytes())?;
    }
    Ok(())
}

pub fn read_checkpoint<T: Real, R: Read>(mut r: R) -> Result<(GridSpec<T>, Wavefunction<T>)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let f64_at = |r: &mut R| -> Result<T> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        Ok(T::lit(f64::from_le_bytes(b)))
    };
    let x_min = f64_at(&mut r)?;
    let x_max = f64_at(&mut r)?;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = usize::try_from(u64::from_le_bytes(b8))
        .map_err(|_| Error::Checkpoint("point count overflows usize".into()))?;
    let dt = f64_at(&mut r)?;
    let time = f64_at(&mut r)?;
    let grid = GridSpec::new(x_min, x_max, n, dt)
        .map_err(|e| Error::Checkpoint(format!("invalid grid: {e}")))?;
    let mut psi = Vec::with_capacity(n);
    for _ in 0..n {
        let re = f64_at(&mut r)?;
        let im = f64_at(&mut r)?;
        psi.push(Complex::new(re, im));
    }
    Ok((grid, Wavefunction::new(psi, time)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let grid = GridSpec::new(-100.0, 100.0, 1024, 0.05).unwrap();
        let psi = (0..1024)
            .map(|j| Complex::new(j as f64 * 0.5, -(j as f64)))
            .collect();
        let state = Wavefunction::new(psi, 12.5);
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &grid, &state).unwrap();
        let (g2, s2) = read_checkpoint::<f64, _>(buf.as_slice()).unwrap();
        assert_eq!(g2, grid);
        assert_eq!(s2, state);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_checkpoint::<f64, _>(&b"NOPE...."[..]).is_err());
        let grid = GridSpec::new(-100.0, 100.0, 1024, 0.05).unwrap();
        let state = Wavefunction::new(vec![Complex::new(1.0, 0.0); 1024], 0.0);
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &grid, &state).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_checkpoint::<f64, _>(buf.as_slice()).is_err());
        buf[4] = 9;
        assert!(read_checkpoint::<f64, _>(buf.as_slice()).is_err());
    }
}
