pub mod algebra;
pub mod audit;
pub mod classical;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod lipnorm;
pub mod lp;
pub mod propinquity;
pub mod states;
pub mod tunnels;

pub use error::{Error, Result};
