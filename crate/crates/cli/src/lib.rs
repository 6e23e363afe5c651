//! Experiment harness around `hyperslice`: every experiment writes a CSV
//! with a one-line header, LF line endings and floats at 17 significant
//! digits.

pub mod error;
pub mod experiments;
pub mod flow;

use std::fs::File;
use std::io::{BufWriter, Write};

pub use error::{CliError, Result};

/// Open `path` for writing; `-` is standard output.
pub fn open_output(path: &str) -> Result<Box<dyn Write>> {
    if path == "-" {
        Ok(Box::new(BufWriter::new(std::io::stdout().lock())))
    } else {
        Ok(Box::new(BufWriter::new(File::create(path)?)))
    }
}
