//! File formats, DOT export and the acceptance suite for `dts-core`.

pub mod dot;
pub mod format;
pub mod suite;
