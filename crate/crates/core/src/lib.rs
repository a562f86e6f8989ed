//! Complex q-Fourier transform.
//!
//! * [`qcore`]: q-exponentials and the two-sheeted kernel.
//! * [`special`]: complex log-gamma and the Gauss hypergeometric function.
//! * [`quad`]: adaptive Gauss-Kronrod quadrature with algebraic tails.
//! * [`transform`]: the forward transform on either half-plane and its real-axis cut.
//! * [`closedform`]: exact transforms for power laws, steps and constants.
//! * [`ultra`]: contour functionals of analytic representatives.
//! * [`inversion`]: recovery of `f` through the `q -> 1` slice.
//! * [`verify`]: self-check suites.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod closedform;
pub mod inversion;
pub mod qcore;
pub mod quad;
pub mod special;
pub mod transform;
pub mod ultra;
pub mod verify;

pub use num_complex::Complex64;
pub use qcore::QParam;
pub use quad::{Estimate, QuadratureConfig};
pub use transform::{FunctionSpec, HalfPlanePoint, Plane};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Q(#[from] qcore::QError),
    #[error(transparent)]
    Special(#[from] special::SpecialError),
    #[error(transparent)]
    Quad(#[from] quad::QuadError),
    #[error(transparent)]
    Transform(#[from] transform::TransformError),
    #[error(transparent)]
    ClosedForm(#[from] closedform::ClosedFormError),
    #[error(transparent)]
    Ultra(#[from] ultra::UltraError),
    #[error(transparent)]
    Inversion(#[from] inversion::InversionError),
}

pub type Result<T> = std::result::Result<T, Error>;
