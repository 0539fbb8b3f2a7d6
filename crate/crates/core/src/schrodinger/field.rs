use std::sync::Arc;

use num_complex::Complex;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::gauge_fields::{GaugeFunction, PhysConstants};
use crate::scalar::{wrap_angle, Real};

/// Complex amplitudes on every node of a grid (hard-wall nodes hold zero).
#[derive(Debug, Clone)]
pub struct WaveField<T> {
    grid: Arc<Grid<T>>,
    pub(crate) psi: Vec<Complex<T>>,
    time: T,
}

impl<T: Real> WaveField<T> {
    pub fn new(grid: Arc<Grid<T>>, psi: Vec<Complex<T>>, time: T) -> Result<Self> {
        if psi.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} amplitudes for {} nodes", psi.len(), grid.len())));
        }
        if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite amplitude".into()));
        }
        if psi.iter().enumerate().any(|(k, z)| grid.is_wall(k) && *z != Complex::new(T::zero(), T::zero())) {
            return Err(Error::InvalidParameter("hard-wall nodes must carry zero amplitude".into()));
        }
        let f = Self { grid, psi, time };
        if !(f.norm_sq() > T::zero()) {
            return Err(Error::InvalidParameter("wave field has zero norm".into()));
        }
        Ok(f)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.psi
    }

    pub fn at(&self, i: usize, j: usize) -> Complex<T> {
        self.psi[self.grid.index(i, j)]
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub(crate) fn set_time(&mut self, t: T) {
        self.time = t;
    }

    /// `Σ |ψ|² dx dy`.
    pub fn norm_sq(&self) -> T {
        self.psi.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()) * self.grid.cell_area()
    }

    pub fn normalize(&mut self) {
        let s = T::one() / self.norm_sq().sqrt();
        for z in &mut self.psi {
            *z = *z * s;
        }
    }

    /// Pointwise multiplication by a unimodular (or any) factor; hard walls stay zero.
    pub fn map_nodes(&self, f: impl Fn(usize, Complex<T>) -> Complex<T>) -> Self {
        let psi = self.psi.iter().enumerate().map(|(k, z)| if self.grid.is_wall(k) { *z } else { f(k, *z) }).collect();
        Self { grid: self.grid.clone(), psi, time: self.time }
    }

    /// Largest pointwise `|ψ - φ|`.
    pub fn max_abs_diff(&self, other: &WaveField<T>) -> T {
        self.psi.iter().zip(&other.psi).fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }
}

/// Normalized Gaussian packet `exp(-|r - c|²/4σ² + i k₀·r)`.
pub fn init_gaussian_packet<T: Real>(grid: Arc<Grid<T>>, center: [T; 2], sigma: T, k0: [T; 2]) -> Result<WaveField<T>> {
    let spacing = grid.dx().max(grid.dy());
    if !(sigma >= spacing * T::lit(2.0)) {
        return Err(Error::PacketTooNarrow { sigma: sigma.as_f64(), spacing: spacing.as_f64() });
    }
    let reach = sigma * T::lit(5.0);
    let (x0, x1) = (grid.x(0), grid.x(grid.nx() - 1));
    let (y0, y1) = (grid.y(0), grid.y(grid.ny() - 1));
    if center[0] - reach < x0 || center[0] + reach > x1 || center[1] - reach < y0 || center[1] + reach > y1 {
        return Err(Error::PacketOutOfBounds(format!(
            "5 sigma = {reach} around ({}, {}) leaves the grid",
            center[0], center[1]
        )));
    }
    let four_s2 = T::lit(4.0) * sigma * sigma;
    let mut psi = Vec::with_capacity(grid.len());
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let (x, y) = (grid.x(i), grid.y(j));
            let (ddx, ddy) = (x - center[0], y - center[1]);
            let amp = (-(ddx * ddx + ddy * ddy) / four_s2).exp();
            psi.push(Complex::from_polar(amp, k0[0] * x + k0[1] * y));
        }
    }
    let total = psi.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
    let on_wall =
        psi.iter().enumerate().filter(|(k, _)| grid.is_wall(*k)).fold(T::zero(), |a, (_, z)| a + z.norm_sqr());
    let fraction = on_wall / total;
    if fraction > T::lit(1e-6) {
        return Err(Error::PacketOverlapsWall { fraction: fraction.as_f64() });
    }
    for (k, z) in psi.iter_mut().enumerate() {
        if grid.is_wall(k) {
            *z = Complex::new(T::zero(), T::zero());
        }
    }
    let mut f = WaveField::new(grid, psi, T::zero())?;
    f.normalize();
    Ok(f)
}

/// `|ψ|²` per node.
pub fn born_density<T: Real>(field: &WaveField<T>) -> Vec<T> {
    field.psi.iter().map(|z| z.norm_sqr()).collect()
}

/// `ψ = R e^{iS}` per node.
#[derive(Debug, Clone)]
pub struct Polar<T> {
    pub r: Vec<T>,
    /// In `(-π, π]`; zero where the phase is undefined.
    pub s: Vec<T>,
    pub phase_undefined: Vec<bool>,
}

pub fn polar_decompose<T: Real>(field: &WaveField<T>) -> Polar<T> {
    let floor = T::from_f64(1e-300).unwrap_or_else(T::zero);
    let n = field.psi.len();
    let mut out = Polar { r: Vec::with_capacity(n), s: Vec::with_capacity(n), phase_undefined: Vec::with_capacity(n) };
    for z in &field.psi {
        let r = z.norm();
        let undefined = r < floor || r == T::zero();
        out.r.push(r);
        out.s.push(if undefined { T::zero() } else { wrap_angle(z.arg()) });
        out.phase_undefined.push(undefined);
    }
    out
}

/// Phase along a node path, unwrapped by summing re-wrapped neighbour differences.
pub fn unwrapped_phase<T: Real>(field: &WaveField<T>, nodes: &[(usize, usize)]) -> Vec<T> {
    let mut out = Vec::with_capacity(nodes.len());
    let mut prev: Option<(T, T)> = None;
    for &(i, j) in nodes {
        let s = field.at(i, j).arg();
        let acc = match prev {
            None => s,
            Some((last_s, last_acc)) => last_acc + wrap_angle(s - last_s),
        };
        out.push(acc);
        prev = Some((s, acc));
    }
    out
}

/// Winding of the phase around a closed loop of nodes (closing step included).
pub fn phase_winding<T: Real>(field: &WaveField<T>, loop_nodes: &[(usize, usize)]) -> i64 {
    let n = loop_nodes.len();
    let total = (0..n).fold(T::zero(), |acc, k| {
        let (a, b) = (loop_nodes[k], loop_nodes[(k + 1) % n]);
        acc + wrap_angle(field.at(b.0, b.1).arg() - field.at(a.0, a.1).arg())
    });
    (total / T::tau()).round().to_i64().unwrap_or(0)
}

/// `ψ' = e^{iqχ/ħc} ψ` at the field's current time.
pub fn gauge_transform_wavefunction<T: Real>(
    field: &WaveField<T>,
    chi: &GaugeFunction<T>,
    constants: &PhysConstants<T>,
) -> WaveField<T> {
    let coupling = constants.coupling();
    let grid = field.grid.clone();
    let t = field.time;
    field.map_nodes(|k, z| {
        let (i, j) = grid.coords(k);
        z * Complex::from_polar(T::one(), coupling * chi.value(grid.position(i, j), t))
    })
}
