//! Command-line front end: a text syntax for operator expressions and the
//! `mcomp` subcommands built on it.

pub mod app;
pub mod dsl;

pub use app::run;
