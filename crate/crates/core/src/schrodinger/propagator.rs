use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::field::WaveField;
use super::grid::Grid;
use super::links::LinkPhases;
use super::tridiag::{CayleyLines, Layout};
use crate::error::{Error, Result};
use crate::gauge_fields::PhysConstants;
use crate::scalar::Real;
use crate::vector::Vec3;

/// Time-stepping scheme.
///
/// `CnAdi` is a symmetric direction split of Crank–Nicolson: half a step of
/// `x` hopping, a full step of `y` hopping, another half step of `x`, each as
/// an exact Cayley factor, with the potential applied as phase half-steps
/// on either side. Every factor is unitary, so the norm is conserved to
/// rounding for any link configuration, and the scheme is second order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    CnAdi,
}

/// Damping layer along the grid boundary.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Absorber<T> {
    #[default]
    None,
    /// Per step, a node `d` cells from the edge (`d < width`) is multiplied by
    /// `exp(−strength · s² · dt)` with `s = (width − d)/width`.
    Layer { width: usize, strength: T },
}

pub const DEFAULT_ABSORBER_WIDTH: usize = 24;

/// Static scalar potential `V(r)`.
#[derive(Clone, Default)]
pub enum Potential<T> {
    #[default]
    Zero,
    Constant(T),
    Sampled(Arc<dyn Fn(Vec3<T>) -> T + Send + Sync>),
}

impl<T: Real> Potential<T> {
    pub fn sample(f: impl Fn(Vec3<T>) -> T + Send + Sync + 'static) -> Self {
        Potential::Sampled(Arc::new(f))
    }

    pub fn value(&self, r: Vec3<T>) -> T {
        match self {
            Potential::Zero => T::zero(),
            Potential::Constant(v) => *v,
            Potential::Sampled(f) => f(r),
        }
    }

    /// Same potential plus a constant.
    pub fn shifted(&self, v0: T) -> Self {
        match self {
            Potential::Zero => Potential::Constant(v0),
            Potential::Constant(v) => Potential::Constant(*v + v0),
            Potential::Sampled(f) => {
                let f = f.clone();
                Potential::Sampled(Arc::new(move |r| f(r) + v0))
            }
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Potential::Zero)
    }
}

impl<T: fmt::Debug> fmt::Debug for Potential<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Zero => f.write_str("Zero"),
            Potential::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Potential::Sampled(_) => f.write_str("Sampled(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropagatorConfig<T> {
    pub constants: PhysConstants<T>,
    pub dt: T,
    pub scheme: Scheme,
    pub absorber: Absorber<T>,
    pub potential: Potential<T>,
    /// Largest `dt ħ / (m dx²)` accepted without a warning.
    pub quality_bound: T,
}

impl<T: Real> Default for PropagatorConfig<T> {
    fn default() -> Self {
        Self {
            constants: PhysConstants::default(),
            dt: T::lit(0.1),
            scheme: Scheme::CnAdi,
            absorber: Absorber::None,
            potential: Potential::Zero,
            quality_bound: T::lit(0.5),
        }
    }
}

impl<T: Real> PropagatorConfig<T> {
    pub fn with_dt(dt: T) -> Self {
        Self { dt, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if let Absorber::Layer { width, strength } = self.absorber {
            if width == 0 || !(strength >= T::zero()) || !strength.is_finite() {
                return Err(Error::InvalidParameter("absorber needs width > 0 and strength >= 0".into()));
            }
        }
        Ok(())
    }

    /// `dt ħ / (m h²)` with `h` the finer spacing.
    pub fn quality(&self, grid: &Grid<T>) -> T {
        let h = grid.dx().min(grid.dy());
        self.dt * self.constants.hbar / (self.constants.m * h * h)
    }
}

/// Precomputed factors for repeated steps on one grid and link set.
pub struct Propagator<T> {
    grid: Arc<Grid<T>>,
    dt: T,
    rows_half: CayleyLines<T>,
    cols_full: CayleyLines<T>,
    potential_half: Option<Vec<Complex<T>>>,
    damping: Option<Vec<T>>,
}

impl<T: Real> Propagator<T> {
    pub fn new(grid: Arc<Grid<T>>, links: &LinkPhases<T>, config: &PropagatorConfig<T>) -> Result<Self> {
        config.validate()?;
        links.check_grid(&grid)?;
        let quality = config.quality(&grid);
        if quality > config.quality_bound {
            log::warn!(
                "dt*hbar/(m h^2) = {quality} exceeds the quality bound {}; phases will be inaccurate",
                config.quality_bound
            );
        }
        let k = &config.constants;
        let (nx, ny) = (grid.nx(), grid.ny());
        let two = T::lit(2.0);
        let tx = k.hbar * k.hbar / (two * k.m * grid.dx() * grid.dx());
        let ty = k.hbar * k.hbar / (two * k.m * grid.dy() * grid.dy());
        let a_half = config.dt / (T::lit(4.0) * k.hbar);
        let a_full = config.dt / (two * k.hbar);
        let g = &grid;
        let rows_half =
            CayleyLines::new(nx, ny, a_half, tx, |j, i| !g.is_wall(g.index(i, j)), |j, i| links.x_edge(i, j))?;
        let cols_full = CayleyLines::with_layout(
            Layout::Interleaved,
            ny,
            nx,
            a_full,
            ty,
            |i, j| !g.is_wall(g.index(i, j)),
            |i, j| links.y_edge(i, j),
        )?;
        let potential_half = (!config.potential.is_zero()).then(|| {
            (0..grid.len())
                .map(|n| {
                    let (i, j) = grid.coords(n);
                    let v = config.potential.value(grid.position(i, j));
                    Complex::from_polar(T::one(), -v * config.dt / (two * k.hbar))
                })
                .collect()
        });
        let damping = match config.absorber {
            Absorber::None => None,
            Absorber::Layer { width, strength } => Some(
                (0..grid.len())
                    .map(|n| {
                        let (i, j) = grid.coords(n);
                        let d = i.min(nx - 1 - i).min(j).min(ny - 1 - j);
                        if d >= width {
                            T::one()
                        } else {
                            let s = T::from_usize_lossy(width - d) / T::from_usize_lossy(width);
                            (-strength * s * s * config.dt).exp()
                        }
                    })
                    .collect(),
            ),
        };
        Ok(Self { grid, dt: config.dt, rows_half, cols_full, potential_half, damping })
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Advances `field` by `n_steps` steps in place.
    pub fn advance(&mut self, field: &mut WaveField<T>, n_steps: usize) -> Result<()> {
        field.grid().check_same(&self.grid)?;
        let t0 = field.time();
        for s in 0..n_steps {
            let psi = &mut field.psi;
            if let Some(v) = &self.potential_half {
                psi.iter_mut().zip(v).for_each(|(z, p)| *z = *z * *p);
            }
            self.rows_half.apply_all(psi);
            self.cols_full.apply_all(psi);
            self.rows_half.apply_all(psi);
            if let Some(v) = &self.potential_half {
                psi.iter_mut().zip(v).for_each(|(z, p)| *z = *z * *p);
            }
            if let Some(d) = &self.damping {
                psi.iter_mut().zip(d).for_each(|(z, f)| *z = *z * *f);
            }
            field.set_time(t0 + self.dt * T::from_usize_lossy(s + 1));
        }
        Ok(())
    }
}

/// Evolves a copy of `field` by `n_steps` steps.
pub fn step<T: Real>(
    field: &WaveField<T>,
    links: &LinkPhases<T>,
    config: &PropagatorConfig<T>,
    n_steps: usize,
) -> Result<WaveField<T>> {
    let mut p = Propagator::new(field.grid_arc().clone(), links, config)?;
    let mut out = field.clone();
    p.advance(&mut out, n_steps)?;
    Ok(out)
}

/// `Hψ` for the minimally coupled lattice Hamiltonian (hard-wall nodes give zero).
pub fn apply_hamiltonian<T: Real>(
    grid: &Grid<T>,
    links: &LinkPhases<T>,
    constants: &PhysConstants<T>,
    potential: &Potential<T>,
    psi: &[Complex<T>],
) -> Vec<Complex<T>> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let two = T::lit(2.0);
    let tx = constants.hbar * constants.hbar / (two * constants.m * grid.dx() * grid.dx());
    let ty = constants.hbar * constants.hbar / (two * constants.m * grid.dy() * grid.dy());
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; psi.len()];
    for j in 0..ny {
        for i in 0..nx {
            let k = grid.index(i, j);
            if grid.is_wall(k) {
                continue;
            }
            let v = potential.value(grid.position(i, j));
            let mut h = psi[k] * (two * tx + two * ty + v);
            if i + 1 < nx {
                h = h - psi[k + 1] * Complex::from_polar(tx, -links.x_edge(i, j));
            }
            if i > 0 {
                h = h - psi[k - 1] * Complex::from_polar(tx, links.x_edge(i - 1, j));
            }
            if j + 1 < ny {
                h = h - psi[k + nx] * Complex::from_polar(ty, -links.y_edge(i, j));
            }
            if j > 0 {
                h = h - psi[k - nx] * Complex::from_polar(ty, links.y_edge(i, j - 1));
            }
            out[k] = h;
        }
    }
    out
}
