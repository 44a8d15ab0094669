//! Explicit-state verification workbench for Peterson's leader election on
//! unidirectional asynchronous rings.

pub mod ctl;
pub mod protocol;
pub mod simulate;
pub mod smv;
pub mod statespace;
