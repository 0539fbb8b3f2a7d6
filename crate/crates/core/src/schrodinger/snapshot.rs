use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex;

use super::field::WaveField;
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotFormat {
    /// Header line `nx ny dx dy time`, then one `re im` pair per node, row by row.
    Text,
    /// `ABSN`, `nx`, `ny` as little-endian `u64`, `dx dy time` and the pairs as little-endian `f64`.
    Binary,
}

const MAGIC: &[u8; 4] = b"ABSN";

fn io(e: std::io::Error) -> Error {
    Error::InvalidParameter(format!("snapshot i/o: {e}"))
}

pub fn write_snapshot<T: Real, W: Write>(field: &WaveField<T>, mut out: W, format: SnapshotFormat) -> Result<()> {
    let g = field.grid();
    match format {
        SnapshotFormat::Text => {
            writeln!(
                out,
                "{} {} {:e} {:e} {:e}",
                g.nx(),
                g.ny(),
                g.dx().as_f64(),
                g.dy().as_f64(),
                field.time().as_f64()
            )
            .map_err(io)?;
            for z in field.amplitudes() {
                writeln!(out, "{:e} {:e}", z.re.as_f64(), z.im.as_f64()).map_err(io)?;
            }
        }
        SnapshotFormat::Binary => {
            out.write_all(MAGIC).map_err(io)?;
            out.write_all(&(g.nx() as u64).to_le_bytes()).map_err(io)?;
            out.write_all(&(g.ny() as u64).to_le_bytes()).map_err(io)?;
            for v in [g.dx(), g.dy(), field.time()] {
                out.write_all(&v.as_f64().to_le_bytes()).map_err(io)?;
            }
            for z in field.amplitudes() {
                out.write_all(&z.re.as_f64().to_le_bytes()).map_err(io)?;
                out.write_all(&z.im.as_f64().to_le_bytes()).map_err(io)?;
            }
        }
    }
    Ok(())
}

/// Raw snapshot contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub time: f64,
    pub amplitudes: Vec<Complex<f64>>,
}

impl Snapshot {
    /// Rebuilds a wave field on `grid`, which must have the recorded shape.
    pub fn into_field<T: Real>(self, grid: Arc<Grid<T>>) -> Result<WaveField<T>> {
        if grid.nx() != self.nx || grid.ny() != self.ny {
            return Err(Error::GridMismatch(format!("snapshot is {}x{}", self.nx, self.ny)));
        }
        let psi = self.amplitudes.iter().map(|z| Complex::new(T::lit(z.re), T::lit(z.im))).collect();
        WaveField::new(grid, psi, T::lit(self.time))
    }
}

pub fn read_snapshot<R: BufRead>(mut input: R, format: SnapshotFormat) -> Result<Snapshot> {
    let bad = |m: &str| Error::InvalidParameter(format!("malformed snapshot: {m}"));
    match format {
        SnapshotFormat::Text => {
            let mut lines = input.lines();
            let header = lines.next().ok_or_else(|| bad("empty"))?.map_err(io)?;
            let h: Vec<&str> = header.split_whitespace().collect();
            if h.len() != 5 {
                return Err(bad("header"));
            }
            let nx: usize = h[0].parse().map_err(|_| bad("nx"))?;
            let ny: usize = h[1].parse().map_err(|_| bad("ny"))?;
            let f = |s: &str| s.parse::<f64>().map_err(|_| bad("header number"));
            let (dx, dy, time) = (f(h[2])?, f(h[3])?, f(h[4])?);
            let mut amplitudes = Vec::with_capacity(nx * ny);
            for line in lines {
                let line = line.map_err(io)?;
                let mut parts = line.split_whitespace();
                let re = parts.next().ok_or_else(|| bad("pair"))?.parse().map_err(|_| bad("re"))?;
                let im = parts.next().ok_or_else(|| bad("pair"))?.parse().map_err(|_| bad("im"))?;
                amplitudes.push(Complex::new(re, im));
            }
            if amplitudes.len() != nx * ny {
                return Err(bad("node count"));
            }
            Ok(Snapshot { nx, ny, dx, dy, time, amplitudes })
        }
        SnapshotFormat::Binary => {
            let mut bytes = Vec::new();
            input.read_to_end(&mut bytes).map_err(io)?;
            if bytes.len() < 44 || &bytes[..4] != MAGIC {
                return Err(bad("header"));
            }
            let u = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
            let f = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
            let (nx, ny) = (u(4) as usize, u(12) as usize);
            if bytes.len() != 44 + 16 * nx * ny {
                return Err(bad("node count"));
            }
            let amplitudes = (0..nx * ny).map(|k| Complex::new(f(44 + 16 * k), f(52 + 16 * k))).collect();
            Ok(Snapshot { nx, ny, dx: f(20), dy: f(28), time: f(36), amplitudes })
        }
    }
}
