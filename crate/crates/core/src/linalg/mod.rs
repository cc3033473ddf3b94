//! Dense complex linear algebra: matrix primitives, QR and Cholesky
//! factorizations, and the iterative approximate-inverse family.

mod factor;
pub mod flops;
mod iterative;
mod matrix;

pub use factor::{exact_inverse, gram, qr_decompose};
pub use iterative::{
    approx_inverse, init_gain, initial_state, IterInverseState, IterOrder, INIT_GAIN_SAFEGUARD,
};
pub use matrix::{relative_frobenius_distance, vec_dot, vec_norm_sqr, vec_sub, ComplexMatrix};
