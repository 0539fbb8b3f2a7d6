use num_complex::Complex;

use super::field::WaveField;
use super::links::LinkPhases;
use super::propagator::{apply_hamiltonian, PropagatorConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `‖iħ(ψ₊ − ψ₋)/2dt − Hψ₀‖ / ‖Hψ₀‖` over the selected nodes (all
/// interior nodes when `region` is `None`).
pub fn schrodinger_residual<T: Real>(
    snapshots: [&WaveField<T>; 3],
    links: &LinkPhases<T>,
    config: &PropagatorConfig<T>,
    region: Option<&[bool]>,
) -> Result<T> {
    let [before, now, after] = snapshots;
    let grid = now.grid();
    before.grid().check_same(grid)?;
    after.grid().check_same(grid)?;
    links.check_grid(grid)?;
    if let Some(r) = region {
        if r.len() != grid.len() {
            return Err(Error::GridMismatch("region mask length differs from the grid".into()));
        }
    }
    let (d1, d2) = (now.time() - before.time(), after.time() - now.time());
    if !(d1 > T::zero()) || (d1 - d2).abs() > T::lit(1e-9) * d1.abs().max(d2.abs()) {
        return Err(Error::GridMismatch(format!("snapshots are not equally spaced in time ({d1} vs {d2})")));
    }
    let k = &config.constants;
    let h = apply_hamiltonian(grid, links, k, &config.potential, now.amplitudes());
    let scale = Complex::new(T::zero(), k.hbar / (d1 + d2));
    let (mut num, mut den) = (T::zero(), T::zero());
    for n in 0..grid.len() {
        if grid.is_wall(n) || region.is_some_and(|r| !r[n]) {
            continue;
        }
        let lhs = scale * (after.psi[n] - before.psi[n]);
        num = num + (lhs - h[n]).norm_sqr();
        den = den + h[n].norm_sqr();
    }
    if !(den > T::zero()) {
        return Err(Error::InvalidParameter("Hψ vanishes on the selected nodes".into()));
    }
    Ok((num / den).sqrt())
}
