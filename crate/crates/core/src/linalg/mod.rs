//! Small dense linear algebra kernels.

mod jacobi;
mod lu;
mod matrix;
mod qr;

pub use jacobi::{hermitian_eigen, symmetric_eigen, HermitianEigen, MAX_SWEEPS, OFF_DIAGONAL_TOL};
pub use lu::ComplexLu;
pub use matrix::{CMatrix, Matrix, RMatrix};
pub use qr::{eigenvalues, hessenberg};
