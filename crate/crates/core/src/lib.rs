//! Combinatorial dynamics of tree maps.
//!
//! Periodic-orbit patterns on finite trees, their snowflake decompositions,
//! period-forcing arithmetic, Markov piecewise-linear models with exact
//! period enumeration, and explicit constructions of maps with prescribed
//! period sets.

pub mod enumerate;
pub mod forcing;
pub mod pattern;
pub mod pattern_file;
pub mod plmap;
pub mod report;
pub mod snowflake;
pub mod sweep;
pub mod synthesis;
pub mod tree;
