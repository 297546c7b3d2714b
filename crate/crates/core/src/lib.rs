pub mod assignment;
pub mod bld_maps;
pub mod currents;
pub mod equidist;
pub mod error;
pub mod flatnorm;
pub mod forms;
pub mod lp;
pub mod mesh;
pub mod qvalued;
pub mod spaces;
pub mod transport;

pub use bld_maps::{BldMap, FiberEntry, Window};
pub use currents::{RationalCurrent, SimplicialComplex, SimplicialCurrent};
pub use error::{Error, Result};
pub use spaces::{Lattice, Space, SpacePoint};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
