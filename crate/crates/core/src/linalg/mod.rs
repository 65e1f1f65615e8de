//! Snapshots, windowed sample covariance and Hermitian eigendecomposition.

mod jacobi;
mod matrix;
pub mod tridiagonal;
mod window;

pub use jacobi::{hermitian_eig, EigenSystem, MAX_SWEEPS};
pub use matrix::{HermitianMatrix, C64};
pub use window::{sample_covariance, Snapshot, SnapshotWindow};
