//! Command-line front end for the `urngame` library.

pub mod commands;
pub mod compare;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;
