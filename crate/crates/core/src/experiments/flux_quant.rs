use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge_fields::{FieldSpec, PhysConstants};
use crate::path_integrals::{spec_line_integral, Path};
use crate::quadrature::QuadratureSpec;
use crate::scalar::{round_half_even, wrap_angle, Real};
use crate::vector::Vec3;

pub const MIN_RING_NODES: usize = 64;
/// Cooper-pair charge in units of `e`.
pub const DEFAULT_PAIR_CHARGE: f64 = -2.0;

/// Order-parameter phases sampled on a circular ring.
///
/// `phases[k]` belongs to the node at angle `2πk/N`, counterclockwise. They
/// are the phases of the reference order parameter `Ψ₀`; the physical
/// `Ψ = exp(i(q/ħc)∫A·dl) Ψ₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingModel<T> {
    pub center: [T; 2],
    pub radius: T,
    pub phases: Vec<T>,
    pub q_pair: T,
    /// Externally applied flux, kept for reporting.
    pub flux_ext: T,
}

impl<T: Real> RingModel<T> {
    pub fn uniform(center: [T; 2], radius: T, nodes: usize, flux_ext: T) -> Self {
        Self { center, radius, phases: vec![T::zero(); nodes], q_pair: T::lit(DEFAULT_PAIR_CHARGE), flux_ext }
    }

    pub fn validate(&self) -> Result<()> {
        if self.phases.len() < MIN_RING_NODES {
            return Err(Error::InvalidParameter(format!(
                "ring needs at least {MIN_RING_NODES} nodes, got {}",
                self.phases.len()
            )));
        }
        if !(self.radius > T::zero()) || self.phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("ring radius must be positive and phases finite".into()));
        }
        if self.q_pair == T::zero() {
            return Err(Error::InvalidParameter("pair charge must be nonzero".into()));
        }
        Ok(())
    }

    pub fn contour(&self) -> Result<Path<T>> {
        Path::circle(Vec3::planar(self.center[0], self.center[1]), self.radius, self.phases.len())
    }

    /// Sum of nearest-neighbour phase steps, each re-wrapped to `(-π, π]`, closing step included.
    pub fn phase_winding(&self) -> T {
        let n = self.phases.len();
        (0..n).fold(T::zero(), |acc, k| acc + wrap_angle(self.phases[(k + 1) % n] - self.phases[k]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fluxoid<T> {
    pub n: i64,
    pub residual: T,
    pub winding_phase: T,
    pub ab_phase: T,
}

/// Fluxoid number `n = round(sgn(q) [Θ₀ + (q/ħc)∮A·dl] / 2π)`.
pub fn ring_fluxoid<T: Real>(
    ring: &RingModel<T>,
    spec: &FieldSpec<T>,
    constants: &PhysConstants<T>,
) -> Result<Fluxoid<T>> {
    ring.validate()?;
    let k = constants.with_charge(ring.q_pair);
    let ab_phase = k.coupling() * spec_line_integral(spec, &ring.contour()?, T::zero(), &QuadratureSpec::default())?;
    let winding_phase = ring.phase_winding();
    let x = ring.q_pair.signum() * (winding_phase + ab_phase) / T::tau();
    let n = x.round();
    let residual = (x - n).abs();
    if residual >= T::lit(0.01) {
        return Err(Error::InconsistentState { residual: residual.as_f64() });
    }
    Ok(Fluxoid { n: n.to_i64().unwrap_or(0), residual, winding_phase, ab_phase })
}

/// Nearest quantized flux `nΦ₀`, `Φ₀ = 2πħc/|q_pair|`, ties to even `n`.
pub fn trap_flux<T: Real>(flux_applied: T, constants: &PhysConstants<T>, q_pair: T) -> (i64, T) {
    let phi0 = constants.with_charge(q_pair).flux_quantum();
    let n = round_half_even(flux_applied / phi0);
    (n.to_i64().unwrap_or(0), n * phi0)
}

/// Lowest-energy ring state in an applied flux: the ring traps the nearest
/// flux quantum, threaded as a filament through its centre, with a uniform `Ψ₀`.
pub fn ground_state_ring<T: Real>(
    center: [T; 2],
    radius: T,
    nodes: usize,
    flux_ext: T,
    constants: &PhysConstants<T>,
) -> (RingModel<T>, FieldSpec<T>) {
    let ring = RingModel::uniform(center, radius, nodes, flux_ext);
    let (_, trapped) = trap_flux(flux_ext, constants, ring.q_pair);
    (ring, FieldSpec::flux_line(center[0], center[1], trapped))
}
