//! Command-line front end: configuration, output writers and validation.

pub mod config;
pub mod emit;
pub mod validate;

pub use config::{parse_config, Mode, OutputFormat, Overrides, ProtocolConfig};
pub use validate::{validate, Fault, ValidateOptions, ValidationReport};
