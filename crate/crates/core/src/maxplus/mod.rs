//! Max-plus scalars, dense matrices and vectors, cycle kernels and distances.

mod cycle;
mod matrix;
mod norm;
mod scalar;

pub use cycle::{kleene_star, max_cycle_mean, star_column_mean, CYCLE_TOL};
pub(crate) use matrix::{finite_range, require_square};
pub use matrix::{first_all_neg_inf_row, mat_mat, mat_vec, support, MaxPlusMatrix, MaxPlusVector};
pub use norm::{pnorm_distance, residual, residual_norm, squared_distance, Norm};
pub use scalar::{ExtReal, ResidualValue};
