use super::grid::Grid;
use crate::error::{Error, Result};
use crate::gauge_fields::DEFAULT_EXCLUSION;
use crate::gauge_fields::{FieldSpec, GaugeFunction, PhysConstants};
use crate::path_integrals::{kink_parameters, segment_integral_fixed};
use crate::quadrature::FixedRule;
use crate::scalar::Real;
use crate::vector::Vec3;

/// Peierls angles `(q/ħc) ∫ A·dl` on every lattice edge, stored as reals so
/// the link factors are unimodular by construction.
///
/// `x` holds edges `(i, j) → (i+1, j)` at `j (nx-1) + i`; `y` holds edges
/// `(i, j) → (i, j+1)` at `j nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPhases<T> {
    nx: usize,
    ny: usize,
    dx: T,
    dy: T,
    origin: [T; 2],
    pub x: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Real> LinkPhases<T> {
    pub fn zero(grid: &Grid<T>) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        Self {
            nx,
            ny,
            dx: grid.dx(),
            dy: grid.dy(),
            origin: grid.origin(),
            x: vec![T::zero(); (nx - 1) * ny],
            y: vec![T::zero(); nx * (ny - 1)],
        }
    }

    #[inline]
    pub fn x_edge(&self, i: usize, j: usize) -> T {
        self.x[j * (self.nx - 1) + i]
    }

    #[inline]
    pub fn y_edge(&self, i: usize, j: usize) -> T {
        self.y[j * self.nx + i]
    }

    /// Counterclockwise angle sum around the cell with lower-left node `(i, j)`.
    pub fn plaquette(&self, i: usize, j: usize) -> T {
        self.x_edge(i, j) + self.y_edge(i + 1, j) - self.x_edge(i, j + 1) - self.y_edge(i, j)
    }

    pub fn matches(&self, grid: &Grid<T>) -> bool {
        self.nx == grid.nx()
            && self.ny == grid.ny()
            && self.dx == grid.dx()
            && self.dy == grid.dy()
            && self.origin == grid.origin()
    }

    pub(crate) fn check_grid(&self, grid: &Grid<T>) -> Result<()> {
        if self.matches(grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch("link phases were built on a different grid".into()))
        }
    }

    /// Links of the gauge `A + ∇χ`: each edge shifts by `(q/ħc)(χ(end) − χ(start))`.
    pub fn gauge_shifted(&self, grid: &Grid<T>, chi: &GaugeFunction<T>, constants: &PhysConstants<T>, t: T) -> Self {
        let k = constants.coupling();
        let (nx, ny) = (self.nx, self.ny);
        let values: Vec<T> = (0..nx * ny)
            .map(|n| {
                let (i, j) = grid.coords(n);
                chi.value(grid.position(i, j), t)
            })
            .collect();
        let mut out = self.clone();
        for j in 0..ny {
            for i in 0..nx - 1 {
                out.x[j * (nx - 1) + i] = out.x[j * (nx - 1) + i] + k * (values[j * nx + i + 1] - values[j * nx + i]);
            }
        }
        for j in 0..ny - 1 {
            for i in 0..nx {
                out.y[j * nx + i] = out.y[j * nx + i] + k * (values[(j + 1) * nx + i] - values[j * nx + i]);
            }
        }
        out
    }
}

/// Straight-edge link angles for a field spec, using 4-point Gauss–Legendre.
///
/// Gauge-shifted specs add the exact endpoint difference of `χ`. Edges with
/// a hard-wall endpoint never enter the dynamics, so a singular integrand
/// there yields a zero angle; on an edge between interior nodes it is an error.
pub fn build_link_phases<T: Real>(
    grid: &Grid<T>,
    spec: &FieldSpec<T>,
    constants: &PhysConstants<T>,
) -> Result<LinkPhases<T>> {
    spec.validate()?;
    constants.validate()?;
    if let FieldSpec::GaugeShifted { base, chi } = spec {
        let links = build_link_phases(grid, base, constants)?;
        return Ok(links.gauge_shifted(grid, chi, constants, T::zero()));
    }
    let mut links = LinkPhases::zero(grid);
    let rule = FixedRule::<T>::gauss_legendre(4);
    let k = constants.coupling();
    let sampler = |r| spec.vector_potential(r, T::zero());
    let (nx, ny) = (grid.nx(), grid.ny());
    let singular_at = singular_point(spec);
    let edge = |i: usize, j: usize, i2: usize, j2: usize, axis: char| -> Result<T> {
        let (a, b) = (grid.position(i, j), grid.position(i2, j2));
        let crossing = singular_at
            .filter(|c| segment_distance(a, b, *c) <= T::lit(DEFAULT_EXCLUSION))
            .map(|c| Err(crate::error::Error::singular(c, T::lit(DEFAULT_EXCLUSION))));
        match crossing.unwrap_or_else(|| {
            let mut pts = vec![a];
            pts.extend(kink_parameters(spec, a, b).into_iter().map(|s| a + (b - a) * s));
            pts.push(b);
            pts.windows(2).try_fold(T::zero(), |acc, w| Ok(acc + segment_integral_fixed(&sampler, w[0], w[1], &rule)?))
        }) {
            Ok(v) => Ok(k * v),
            Err(Error::SingularPoint { .. }) => {
                if grid.is_wall(grid.index(i, j)) || grid.is_wall(grid.index(i2, j2)) {
                    Ok(T::zero())
                } else {
                    Err(Error::SingularEdge { i, j, axis })
                }
            }
            Err(e) => Err(e),
        }
    };
    for j in 0..ny {
        for i in 0..nx - 1 {
            links.x[j * (nx - 1) + i] = edge(i, j, i + 1, j, 'x')?;
        }
    }
    for j in 0..ny - 1 {
        for i in 0..nx {
            links.y[j * nx + i] = edge(i, j, i, j + 1, 'y')?;
        }
    }
    Ok(links)
}

/// Where a spec's singular set meets the plane `z = 0`, if anywhere.
fn singular_point<T: Real>(spec: &FieldSpec<T>) -> Option<Vec3<T>> {
    match spec.base() {
        FieldSpec::FluxLine { center, .. } => Some(Vec3::planar(center[0], center[1])),
        FieldSpec::MonopoleStringSouth { .. } | FieldSpec::MonopoleStringNorth { .. } => Some(Vec3::zero()),
        _ => None,
    }
}

fn segment_distance<T: Real>(a: Vec3<T>, b: Vec3<T>, p: Vec3<T>) -> T {
    let d = b - a;
    let s = ((p - a).dot(d) / d.norm_sq()).max(T::zero()).min(T::one());
    (a + d * s - p).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge_fields::{gauge_transform_potentials, Monomial};
    use crate::path_integrals::enclosed_flux_stokes;
    use crate::path_integrals::Path;

    #[test]
    fn zero_flux_gives_zero_angles() {
        let g = Grid::<f64>::unit(20, 20).unwrap();
        let links = build_link_phases(&g, &FieldSpec::flux_line(9.5, 9.5, 0.0), &PhysConstants::default()).unwrap();
        assert!(links.x.iter().chain(&links.y).all(|a| *a == 0.0));
    }

    #[test]
    fn plaquettes_see_only_the_flux_cell() {
        let g = Grid::<f64>::unit(20, 20).unwrap();
        let k = PhysConstants::default();
        let phi = 1.3;
        let spec = FieldSpec::flux_line(9.5, 9.5, phi);
        let links = build_link_phases(&g, &spec, &k).unwrap();
        for j in 0..19 {
            for i in 0..19 {
                let cell = Path::rectangle(i as f64, j as f64, i as f64 + 1.0, j as f64 + 1.0, 0.0).unwrap();
                let stokes = k.coupling() * enclosed_flux_stokes(&spec, &cell, 1).unwrap();
                let p = links.plaquette(i, j);
                // the 4-point rule smears some flux into the ring of cells around the filament
                let near = i.abs_diff(9) <= 1 && j.abs_diff(9) <= 1;
                let tol = if near { 2e-3 } else { 1e-4 };
                assert!((p - stokes).abs() < tol, "cell ({i},{j}): {p} vs {stokes}");
            }
        }
        let block: f64 = (8..11).flat_map(|j| (8..11).map(move |i| (i, j))).map(|(i, j)| links.plaquette(i, j)).sum();
        assert!((block - k.coupling() * phi).abs() < 1e-4);
        assert!(links.plaquette(2, 3).abs() < 1e-7);
    }

    #[test]
    fn gauge_shift_is_an_endpoint_difference() {
        let g = Grid::<f64>::new(18, 16, 0.5, 0.7, [-3.0, 1.0]).unwrap();
        let k = PhysConstants::default();
        let base = FieldSpec::UniformB { b0: crate::Vec3::new(0.0, 0.0, 0.2) };
        let chi = GaugeFunction::polynomial(vec![Monomial::new(0.05, 3, 2, 0, 0), Monomial::new(1.5, 1, 0, 0, 0)]);
        let a = build_link_phases(&g, &base, &k).unwrap();
        let b = build_link_phases(&g, &gauge_transform_potentials(&base, chi.clone()), &k).unwrap();
        for j in 0..g.ny() {
            for i in 0..g.nx() - 1 {
                let d = chi.value(g.position(i + 1, j), 0.0) - chi.value(g.position(i, j), 0.0);
                assert!((b.x_edge(i, j) - a.x_edge(i, j) - k.coupling() * d).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_active_edge_is_rejected() {
        let g = Grid::<f64>::unit(20, 20).unwrap();
        let spec = FieldSpec::flux_line(5.5, 7.0, 1.0);
        assert!(matches!(
            build_link_phases(&g, &spec, &PhysConstants::default()),
            Err(Error::SingularEdge { i: 5, j: 7, axis: 'x' })
        ));
        let mut walled = g.clone();
        walled.set_wall(5, 7, true);
        assert!(build_link_phases(&walled, &spec, &PhysConstants::default()).is_ok());
    }
}
