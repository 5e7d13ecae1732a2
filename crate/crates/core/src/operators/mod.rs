//! Coin and shift operators and the one-step walk unitaries.

mod profile;
mod step;

pub use profile::{parse_angle, AngleProfile, Noise, ProfileShape};
pub use step::{apply_shift, coin_matrix, Axis, StepOperator1D, StepOperator2D};
