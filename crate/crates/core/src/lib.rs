//! Exact arithmetic in divided-power hyperalgebras of rank at most two over
//! prime fields, together with a machine-checked Frobenius splitting of
//! truncated induction rings built from the Steinberg module.

pub mod error;
pub mod field;
pub mod linalg;
pub mod rootdata;

pub use error::{Error, Result};
pub use field::PrimeField;
pub use hyperalg::{Atom, GenWord, HyperElt, Hyperalgebra, PbwKey};
pub use rootdata::{Kind, RootSystem, Weight};
pub mod hyperalg;
pub mod dualring;
pub mod steinberg;
pub mod splitring;
pub mod suites;
