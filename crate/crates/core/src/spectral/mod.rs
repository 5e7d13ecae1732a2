//! Quasi-energy spectra: momentum blocks, bulk bands, near-unit eigenpairs
//! of the full walk and localization measures.

mod bands;
mod edge;
mod localization;
mod momentum;
mod near_unity;

pub use bands::{
    bulk_bands, bulk_gap_around_zero, bulk_unitary, min_band_gap, pair_gaps, project_bands, uniform_grid,
    BandStructure, ProjectedBands,
};
pub use edge::{
    block_states_near_zero, block_weight_near, bulk_angle_pairs, bulk_values, fit_linear_branch, in_gap_states,
    projection_at, sector_splitting, EdgeBranch, LinearFit, PROJECTION_SAMPLES,
};
pub use localization::{localization_metrics, span_weight, LocalizationReport, Region};
pub use momentum::{
    commensurate_grid, momentum_block, quasi_energies, spectrum_scan, MomentumBlock, QuasiEnergySpectrum, TauSector,
};
pub use near_unity::{
    near_unity_states, near_unity_states_dense, ChebyshevOptions, EigenPair, EigenpairSet, RESIDUAL_LIMIT,
};
