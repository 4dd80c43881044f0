use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write results here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

/// Fixed 17-significant-digit float formatting.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl OutputArgs {
    /// Renders either the CSV text or the JSON of `value`.
    pub fn render<T: Serialize>(&self, csv: impl FnOnce() -> String, value: &T) -> Result<String, CliError> {
        Ok(match self.format {
            Format::Csv => csv(),
            Format::Json => serde_json::to_string_pretty(value)? + "\n",
        })
    }

    /// Returns true when the data went to a file.
    pub fn emit(&self, text: &str) -> Result<bool, CliError> {
        match &self.out {
            Some(path) => {
                write_file(path, text)?;
                Ok(true)
            }
            None => {
                print!("{text}");
                Ok(false)
            }
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    let wrap = |source| CliError::Write { path: path.to_path_buf(), source };
    let mut f = std::fs::File::create(path).map_err(wrap)?;
    f.write_all(text.as_bytes()).map_err(wrap)
}
