//! Support library for the `factoric` binary: the text file formats.

pub mod formats;
