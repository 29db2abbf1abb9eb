//! Loop files, reports, corpus generation and benchmarking on top of
//! `monoterm-core`.

pub mod bench;
pub mod gen;
pub mod parse;
pub mod print;
pub mod report;

pub use parse::{parse, ParseError};
pub use print::print;
