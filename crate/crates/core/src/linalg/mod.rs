//! Small dense linear algebra backends: complex matrices sized by the genus
//! (g <= 8 in practice) and exact integer/rational elimination for the
//! polynomial rank and kernel computations.

pub mod complex;
pub mod exact;
