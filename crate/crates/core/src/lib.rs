pub mod app;
pub mod convex;
pub mod error;
pub mod linalg;
pub mod mixtures;
pub mod monotone;
pub mod oracle;
pub mod output;
pub mod sampling;
mod serde_util;
pub mod solver;
pub mod verify;

pub use convex::ConvexFnSpec;
pub use error::{Error, Result};
pub use linalg::{make_subspace, LinOp, Point, Subspace};
pub use monotone::{FirmlyNonexpansive, MonotoneOpSpec};
