//! Discrete quad nets that admit continuous families of area-preserving
//! Combescure transformations: classification, construction, explicit
//! deformation families, smooth cone-cylinder nets and isotropic duality.

pub mod error;
pub mod geom;
pub mod net;
pub mod ratios;
pub mod classify;
pub mod construct;
pub mod deform;
pub mod isotropic;
pub mod smooth;
pub mod io;
pub mod samples;

pub use error::{Error, Result};
pub use geom::Point;
pub use net::{Net, Quad, Side, Tolerances};
