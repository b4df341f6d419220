pub mod averaging;
pub mod conditions;
pub mod cones;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod level;
pub mod norms;
pub mod powerlog;
pub mod quad;
pub mod sample;
pub mod serde_ext;
pub mod stepfn;
pub mod weight;

pub use error::{Error, Result};
pub use grid::{Grid, SupResult, Verdict};
pub use powerlog::PowerLog;
pub use weight::{Term, Weight};
pub use stepfn::{DecreasingStep, Domain, StepFunction};
pub use averaging::AveragingOp;
pub use fourier::{ModulatedStep, Piece};
