//! File formats, DOT export and the command-line front end for `wdsec`.

pub mod commands;
pub mod dot;
pub mod fixtures;
pub mod schema;

pub use commands::run;
