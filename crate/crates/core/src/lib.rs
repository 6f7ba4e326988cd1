//! Verification toolkit for Čech-presented bundle gerbes, their Lie 2-algebras
//! of symmetries, and butterflies between them.

pub mod bundle;
pub mod cartan;
pub mod cech;
pub mod error;
pub mod gerbevf;
pub mod lie2core;
pub mod plectic;
pub mod quantomorph;
pub mod report;
pub mod suites;
pub mod symexpr;
#[cfg(test)]
mod testing;
