pub mod constants;
pub mod dft;
pub mod config;
pub mod diffops;
pub mod error;
pub mod experiment;
pub mod field;
pub mod grid;
pub mod hankel;
pub mod io;
pub mod metrics;
pub mod oracle;
pub mod sampling;
pub mod solvers;
pub mod tightframe;

pub use error::{Result, SlrmError};
pub use field::{FieldSource, SampleField, SpatialImage};
pub use grid::{grid_difference, make_centered_grid, CenteredGrid, GridDifference, Index2};
