pub mod error;
pub mod numeric;

pub use error::{Error, Result};
pub mod assignment;
pub mod subdivision;
pub mod oracles;
pub mod preference;
pub mod hausdorff1d;
pub mod hausdorff2d;
pub mod io;
