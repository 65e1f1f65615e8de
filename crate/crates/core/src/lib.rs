pub mod beta;
pub mod doa;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod linalg;
pub mod rank;
pub mod rmt;
mod ode;
pub mod specfun;
pub mod threshold;
pub mod tracy_widom;

pub use beta::Beta;
pub use error::{Error, Result};
