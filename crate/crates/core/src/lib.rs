//! Synthesis of polynomial loops from polynomial invariants.
//!
//! The crate is organised bottom-up: [`ring`] provides exact polynomials over
//! the rationals, [`groebner`] ideal membership and radical tests, and the
//! remaining modules build the invariant-set computation, loop synthesis,
//! constraint solving and verification on top of them.

pub mod groebner;
pub mod invariant;
pub mod synth;
pub mod universal;
pub mod verify;
pub mod ring;
pub mod solve;

pub(crate) mod par;
