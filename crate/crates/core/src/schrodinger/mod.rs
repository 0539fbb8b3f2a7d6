//! Gauge-covariant time-dependent Schrödinger propagation on a masked 2D lattice.

mod ab_solution;
mod field;
mod grid;
mod links;
mod propagator;
mod residual;
mod snapshot;
pub mod tridiag;

pub use ab_solution::{construct_ab_solution, region_interior, AbSolution, AbSolutionOptions, SpanningTree};
pub use field::{
    born_density, gauge_transform_wavefunction, init_gaussian_packet, phase_winding, polar_decompose, unwrapped_phase,
    Polar, WaveField,
};
pub use grid::{Cell, Grid, MIN_NODES};
pub use links::{build_link_phases, LinkPhases};
pub use propagator::{
    apply_hamiltonian, step, Absorber, Potential, Propagator, PropagatorConfig, Scheme, DEFAULT_ABSORBER_WIDTH,
};
pub use residual::schrodinger_residual;
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, SnapshotFormat};
