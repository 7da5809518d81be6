pub mod bargaining;
pub mod cancellation;
pub mod cli;
pub mod curvature;
pub mod equilibrium;
pub mod error;
pub mod model;
pub mod pareto;
pub mod rates;

mod linalg;
mod optim;

pub use error::{Error, Result};
