//! Polynomials, transfer functions, state-space models and the small dense
//! linear algebra they rest on.

mod matrix;
mod model;
mod poly;
mod stability;

pub use matrix::Matrix;
pub use model::{
    char_poly, dc_gain, eigenvalues, feedback_interconnect, ss_to_tf, tf_series, tf_to_ss,
    StateSpaceModel, TransferFunction,
};
pub use poly::{Polynomial, ROOT_MAX_ITERATIONS, ROOT_TOLERANCE};
pub use stability::is_hurwitz;

pub(crate) fn fmt_num(v: f64) -> String {
    crate::numfmt::format_g(v, 6)
}
