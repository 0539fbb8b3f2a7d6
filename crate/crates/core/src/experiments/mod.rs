//! Double-slit fringe shift, ring fluxoid quantization, monopole phases and
//! the classical Lorentz-force comparator.

mod classical;
mod double_slit;
mod flux_quant;
mod fringe;
mod monopole;

pub use classical::{classical_trajectory, Trajectory};
pub use double_slit::{run_double_slit, DoubleSlitConfig, DoubleSlitGeometry, FringeRecord, PacketParams};
pub use flux_quant::{
    ground_state_ring, ring_fluxoid, trap_flux, Fluxoid, RingModel, DEFAULT_PAIR_CHARGE, MIN_RING_NODES,
};
pub use fringe::{
    analytic_two_path_pattern, extract_fringe_phase, relative_l2, FringePhase, TwoSlitModel, MIN_FRINGE_BIN,
};
pub use monopole::{
    dirac_quantization_check, monopole_interference_phase, monopole_loop_phase, DiracCheck, StringGauge,
    DIRAC_TOLERANCE,
};
