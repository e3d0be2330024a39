// Guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod config;
pub mod constants;
pub mod error;
pub mod gaussian;
pub mod metrology;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod overlay;
pub mod sweep;

pub use error::{Error, Result};
