use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fringe::extract_fringe_phase;
use crate::error::{Error, Result};
use crate::gauge_fields::{FieldSpec, PhysConstants};
use crate::path_integrals::spec_segment_integral;
use crate::quadrature::QuadratureSpec;
use crate::scalar::{wrap_angle, Real};
use crate::schrodinger::{
    build_link_phases, gauge_transform_wavefunction, init_gaussian_packet, Absorber, Grid, Propagator,
    PropagatorConfig, WaveField,
};
use crate::vector::Vec3;
use num_complex::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketParams<T> {
    pub center: [T; 2],
    pub sigma: T,
    pub k0: [T; 2],
}

/// Barrier with two slits, a flux line hidden in the wall between them and a
/// detector column behind. Indices are lattice nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleSlitGeometry<T> {
    pub barrier_column: usize,
    pub barrier_thickness: usize,
    /// Centre rows, lower slit first.
    pub slit_centers: [usize; 2],
    /// Open rows per slit.
    pub slit_width: usize,
    pub flux_position: [T; 2],
    pub detector_column: usize,
    pub source: PacketParams<T>,
}

impl<T: Real> DoubleSlitGeometry<T> {
    fn slit_rows(&self, s: usize) -> (usize, usize) {
        let c = self.slit_centers[s];
        let lo = c.saturating_sub(self.slit_width / 2);
        (lo, lo + self.slit_width)
    }

    /// Grid with the barrier masked.
    pub fn build_grid(&self, nx: usize, ny: usize, dx: T) -> Result<Grid<T>> {
        let mut g = Grid::new(nx, ny, dx, dx, [T::zero(); 2])?;
        let end = self.barrier_column + self.barrier_thickness;
        g.wall_rect(self.barrier_column, end, 0, ny);
        for s in 0..2 {
            let (lo, hi) = self.slit_rows(s);
            for j in lo..hi.min(ny) {
                for i in self.barrier_column..end.min(nx) {
                    g.set_wall(i, j, false);
                }
            }
        }
        Ok(g)
    }

    pub fn validate(&self, nx: usize, ny: usize, dx: T, absorber_width: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(format!("double-slit geometry: {m}")));
        if self.slit_width == 0 || self.barrier_thickness == 0 {
            return bad("slit width and barrier thickness must be positive".into());
        }
        let end = self.barrier_column + self.barrier_thickness;
        if end >= nx {
            return bad("barrier leaves the grid".into());
        }
        let (l0, l1) = self.slit_rows(0);
        let (u0, u1) = self.slit_rows(1);
        if self.slit_centers[0] >= self.slit_centers[1] || l1 > u0 {
            return bad(format!("slits overlap or are out of order (rows {l0}..{l1} and {u0}..{u1})"));
        }
        if l0 == 0 || u1 >= ny {
            return bad("slits leave the grid".into());
        }
        if self.detector_column < end || self.detector_column + absorber_width >= nx {
            return bad("detector must lie beyond the barrier and before the absorber".into());
        }
        let g = self.build_grid(nx, ny, dx)?;
        let p = self.flux_position;
        let clearance = (0..g.len())
            .filter(|&k| !g.is_wall(k))
            .map(|k| {
                let (i, j) = g.coords(k);
                (g.x(i) - p[0]).hypot(g.y(j) - p[1])
            })
            .fold(T::infinity(), T::min);
        let inside_x = p[0] > g.x(self.barrier_column) && p[0] < g.x(end - 1);
        let inside_y = p[1] > g.y(l1 - 1) && p[1] < g.y(u0);
        if !(inside_x && inside_y && clearance >= dx) {
            return bad("flux line must sit inside the wall between the slits, a full cell from open nodes".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DoubleSlitConfig<T> {
    pub nx: usize,
    pub ny: usize,
    pub dx: T,
    pub propagator: PropagatorConfig<T>,
    pub max_steps: usize,
    pub check_interval: usize,
    /// Stop once the detector total grows by less than this fraction per check.
    pub saturation_tolerance: T,
    pub min_transmitted: T,
}

impl<T: Real> DoubleSlitConfig<T> {
    pub fn new(nx: usize, ny: usize, dx: T, propagator: PropagatorConfig<T>) -> Self {
        Self {
            nx,
            ny,
            dx,
            propagator,
            max_steps: 20_000,
            check_interval: 100,
            saturation_tolerance: T::lit(1e-6),
            min_transmitted: T::lit(1e-4),
        }
    }

    fn absorber_width(&self) -> usize {
        match self.propagator.absorber {
            Absorber::None => 0,
            Absorber::Layer { width, .. } => width,
        }
    }
}

/// Time-integrated detector profile for one flux value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeRecord<T> {
    pub flux: T,
    pub y: Vec<T>,
    pub intensity: Vec<T>,
    /// Fringe phase relative to the zero-flux record, in `(-π, π]`.
    pub delta: T,
    pub period: T,
    /// `|wrap(δ − (q/ħc)Φ)|`.
    pub residual: T,
    /// Largest norm seen beyond the barrier.
    pub transmitted: T,
    pub steps: usize,
    /// False when the step cap ended the run before the detector saturated.
    pub saturated: bool,
}

struct Detection<T> {
    intensity: Vec<T>,
    transmitted: T,
    steps: usize,
    saturated: bool,
}

/// Multiplies the free packet by `exp(i(q/ħc)∫A·dl)` along straight lines from
/// the packet centre, so every flux value starts from the same physical state.
/// Nodes at or past the barrier are dropped; the packet has no weight there.
fn dress_incident<T: Real>(
    free: &WaveField<T>,
    spec: &FieldSpec<T>,
    constants: &PhysConstants<T>,
    center: [T; 2],
    barrier_column: usize,
) -> Result<WaveField<T>> {
    let grid = free.grid_arc().clone();
    let coupling = constants.coupling();
    let base = spec.base();
    let quad = QuadratureSpec::default();
    let origin = Vec3::new(center[0], center[1], T::zero());
    let phases: Vec<Option<T>> = (0..grid.len())
        .into_par_iter()
        .map(|n| {
            let (i, j) = grid.coords(n);
            if i >= barrier_column || grid.is_wall(n) {
                return Ok(None);
            }
            Ok(Some(coupling * spec_segment_integral(base, origin, grid.position(i, j), T::zero(), &quad)?))
        })
        .collect::<Result<_>>()?;
    let mut psi = free.map_nodes(|n, z| match phases[n] {
        Some(p) => z * Complex::from_polar(T::one(), p),
        None => Complex::new(T::zero(), T::zero()),
    });
    for chi in spec.gauge_chain().into_iter().rev() {
        psi = gauge_transform_wavefunction(&psi, chi, constants);
    }
    psi.normalize();
    Ok(psi)
}

fn detect<T: Real>(
    geometry: &DoubleSlitGeometry<T>,
    grid: &Arc<Grid<T>>,
    spec: &FieldSpec<T>,
    config: &DoubleSlitConfig<T>,
) -> Result<Detection<T>> {
    let k = &config.propagator.constants;
    let links = build_link_phases(grid, spec, k)?;
    let src = &geometry.source;
    let mut psi = dress_incident(
        &init_gaussian_packet(grid.clone(), src.center, src.sigma, src.k0)?,
        spec,
        k,
        src.center,
        geometry.barrier_column,
    )?;
    let mut prop = Propagator::new(grid.clone(), &links, &config.propagator)?;
    let (nx, ny) = (grid.nx(), grid.ny());
    let det = geometry.detector_column;
    let dt = config.propagator.dt;
    let beyond = geometry.barrier_column + geometry.barrier_thickness;
    let mut intensity = vec![T::zero(); ny];
    let mut transmitted = T::zero();
    let mut last_total = T::zero();
    let mut steps = 0;
    let interval = config.check_interval.max(1);
    while steps < config.max_steps {
        let n = interval.min(config.max_steps - steps);
        for _ in 0..n {
            prop.advance(&mut psi, 1)?;
            for (j, acc) in intensity.iter_mut().enumerate() {
                *acc = *acc + psi.psi[j * nx + det].norm_sqr() * dt;
            }
        }
        steps += n;
        let right = (0..ny)
            .flat_map(|j| (beyond..nx).map(move |i| j * nx + i))
            .fold(T::zero(), |a, kk| a + psi.psi[kk].norm_sqr())
            * grid.cell_area();
        transmitted = transmitted.max(right);
        let total = intensity.iter().fold(T::zero(), |a, v| a + *v);
        if total > T::zero()
            && total - last_total < config.saturation_tolerance * total
            && transmitted >= config.min_transmitted
        {
            return Ok(Detection { intensity, transmitted, steps, saturated: true });
        }
        last_total = total;
    }
    if transmitted < config.min_transmitted {
        return Err(Error::NoTransmission { transmitted: transmitted.as_f64() });
    }
    log::warn!("double-slit run hit the {}-step cap before the detector saturated", config.max_steps);
    Ok(Detection { intensity, transmitted, steps, saturated: false })
}

/// Runs the double-slit experiment once per flux value and extracts the
/// fringe phase of each against the zero-flux run.
pub fn run_double_slit<T: Real>(
    geometry: &DoubleSlitGeometry<T>,
    spec: &FieldSpec<T>,
    config: &DoubleSlitConfig<T>,
    flux_list: &[T],
) -> Result<Vec<FringeRecord<T>>> {
    let aw = config.absorber_width();
    geometry.validate(config.nx, config.ny, config.dx, aw)?;
    config.propagator.validate()?;
    let grid = Arc::new(geometry.build_grid(config.nx, config.ny, config.dx)?);
    let mut fluxes: Vec<T> = flux_list.to_vec();
    let has_reference = fluxes.iter().any(|f| *f == T::zero());
    if !has_reference {
        fluxes.push(T::zero());
    }
    let runs: Vec<Detection<T>> = fluxes
        .par_iter()
        .map(|&flux| detect(geometry, &grid, &spec.with_flux(flux)?, config))
        .collect::<Result<_>>()?;
    let reference = fluxes.iter().position(|f| *f == T::zero()).unwrap();
    let rows = aw..config.ny - aw;
    let y: Vec<T> = rows.clone().map(|j| grid.y(j)).collect();
    let ref_profile = &runs[reference].intensity[rows.clone()];
    let k: &PhysConstants<T> = &config.propagator.constants;
    let mut out = Vec::with_capacity(flux_list.len());
    for (flux, run) in fluxes.iter().zip(&runs).take(flux_list.len()) {
        let profile = run.intensity[rows.clone()].to_vec();
        let phase = extract_fringe_phase(ref_profile, &profile, &y)?;
        out.push(FringeRecord {
            flux: *flux,
            y: y.clone(),
            intensity: profile,
            delta: phase.delta,
            period: phase.period,
            residual: wrap_angle(phase.delta - k.coupling() * *flux).abs(),
            transmitted: run.transmitted,
            steps: run.steps,
            saturated: run.saturated,
        });
    }
    Ok(out)
}
