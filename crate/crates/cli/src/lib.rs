//! Command-line front end: batch enhancement with JSON reports, and the CBAM
//! block on weight and tensor files.

pub mod args;
pub mod batch;
pub mod cbam_cmd;

pub use batch::{run_batch, run_enhance, JobError, JobSpec, Report, Summary};
pub use cbam_cmd::run_cbam;
