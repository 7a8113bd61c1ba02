//! Foundation number systems: rationals, number-field elements, capped
//! precision p-adics, complex balls and 2x2 matrices over Z/N.

pub mod ball;
pub mod cpx;
pub mod linalg;
pub mod modmatrix;
pub mod nf;
pub mod padic;
pub mod rat;
pub mod roots;

pub use ball::ComplexBall;
pub use modmatrix::ModMatrix;
pub use nf::{NfElt, NumberField};
pub use padic::PadicElement;
