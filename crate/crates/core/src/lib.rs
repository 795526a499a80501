//! Finite-dimensional toolkit for sectorial operators and linear relations.

pub mod cli;
pub mod diffop;
pub mod numlin;
pub mod oprange;
pub mod relcalc;
pub mod spectheory;
