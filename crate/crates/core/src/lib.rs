pub mod audio;
pub mod dsp;
pub mod error;
pub mod manifest;
pub mod metrics;
pub mod report;
pub mod simulate;

pub use error::{Error, Result};
