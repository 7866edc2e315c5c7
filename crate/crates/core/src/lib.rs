//! Explicit solutions of constant-coefficient Hessian equations from the
//! variation-of-quadrics ansatz.

pub mod arrowhead;
pub mod dhym;
pub mod equations;
pub mod error;
pub mod families;
pub mod nonrec3;
pub mod ode;
pub mod poly;
pub mod quad;
pub mod slag;
pub mod symfun;
pub mod verify;

pub use error::{Error, Result};
