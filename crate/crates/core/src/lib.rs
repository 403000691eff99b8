//! Closed-form entire solution families of first-order complex PDEs of the
//! form `H(u_{z1}, …, u_{zn}) = P(u)`, together with the numerical machinery
//! used to verify them: forward-mode jets, an expression language, polynomial
//! root finding, a characteristics integrator, Weierstrass ℘ evaluation and a
//! residual engine.

pub mod characteristics;
pub mod cli;
pub mod cxjet;
pub mod expr;
pub mod families;
pub mod poly;
pub mod sampling;
pub mod special;
pub mod verify;

pub use cxjet::{Cx, Jet, JetError};
pub use expr::{parse_expr, Expr};
