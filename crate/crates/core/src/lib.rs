//! Certified computation of the irrationality-criterion sequences for
//! Euler's constant built from linear forms in logarithms, their Padé
//! substitutes, and the integral representations behind them.

pub mod analytic;
pub mod ball;
pub mod combinatorics;
pub mod criterion;
pub mod pade;
pub mod quad;
