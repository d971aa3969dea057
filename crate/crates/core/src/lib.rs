//! Power-flow equations as polynomial systems.
//!
//! The crate assembles the power-flow and optimal-power-flow polynomials of a
//! network and attacks them with three tools:
//!
//! * [`homotopy`]: all isolated complex solutions via total-degree homotopy
//!   continuation, with a damped Newton baseline in [`newton`];
//! * [`groebner`]: exact Buchberger bases over the rationals, lex elimination
//!   and triangular back-substitution;
//! * [`moment`]: real and complex moment/sum-of-squares relaxations of OPF,
//!   solved by the dense interior-point method in [`sdp`].

pub mod groebner;
pub mod homotopy;
pub mod linalg;
pub mod moment;
pub mod network;
pub mod newton;
pub mod poly;
pub mod sdp;

pub use poly::{Coeff, Monomial, MonomialOrder, PolyError, PolySystem, Polynomial, Rational, Ring};
