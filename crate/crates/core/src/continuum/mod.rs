//! Lattice Dirac Hamiltonians and the analytic states the walk is tested
//! against.

pub mod battery;
pub mod dirac;
pub mod frame;
pub mod higher_order;
pub mod jackiw_rebbi;
pub mod oscillator;
pub mod trotter;

pub use battery::{
    combined_state_residual, corner_product_overlap, gaussian_refined_overlap, jr_walk_overlap, oscillator_ladder,
    LadderLevel,
};
pub use dirac::{
    axis_parts, build_dirac, central_clusters, commutator_profile, derivative_matrix, momentum_matrix, schrodinger_1d,
    square_decomposition_check, CentralCluster, DerivativeScheme, LatticeHamiltonian, MassProfile, OracleParams,
};
pub use frame::{fractional_shift_1d, fractional_shift_2d, half_step_frame_1d, half_step_frame_2d, translation_kernel};
pub use higher_order::{
    build_higher_order, check_chiral_set, ChiralBlock, ChiralReport, ChiralSet, HigherOrderHamiltonian,
    ANTICOMMUTATION_LIMIT,
};
pub use jackiw_rebbi::{
    dispersion_reference, jr_edge_state, jr_scattering, topo_index, topo_product, DispersionCase, DispersionReference,
    JrScattering,
};
pub use oscillator::{
    analytic_zero_mode_2d, assemble_2d, combine_2d, dirac_oscillator_eigenstate, hermite_state, hermite_states,
    sigma_x_expectation, Branch, CombinedEigenstate, ZeroModeKind, HERMITE_TAIL_LIMIT,
};
pub use trotter::{trotter_error, trotter_study, TrotterRun, TrotterSetup};
