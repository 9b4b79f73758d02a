//! Numerical laboratory for linear isometries of Fréchet spaces whose metric
//! is built from a sequence of seminorms.

pub mod quadrature;
pub mod theta;
pub mod metric;
pub mod measure;
pub mod holodisc;
pub mod contspace;
pub mod cli;
