//! File formats, reports, random generators and the command-line driver
//! around `logtrace-core`.

pub mod checks;
pub mod cli;
pub mod gen;
pub mod model;
pub mod report;

pub use model::{ModelError, ModelFile};
pub use report::{analyze, AnalysisError, AnalysisReport};
