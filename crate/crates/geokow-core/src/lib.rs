//! Exact and numerical tools for pencils of conics, discriminantly separable
//! polynomials, Kowalevski-type systems and two-valued groups.

pub mod algebra;
pub mod discrimsep;
pub mod dynamics;
pub mod kotter;
pub mod numeric;
pub mod ode;
pub mod par;
pub mod pencil;
pub mod sampling;
pub mod twovalued;
