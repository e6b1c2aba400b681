pub mod cluster;
pub mod config;
pub mod curve;
pub mod discretize;
pub mod error;
pub mod frechet;
pub mod geom;
pub mod oracles;
pub mod simplify;
pub mod twophase;

pub use curve::PolygonalCurve;
pub use error::{Error, Result};
