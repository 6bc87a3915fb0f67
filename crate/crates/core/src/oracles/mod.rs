//! Reference computations that do not go through the linear solve.

mod born;
mod helmholtz;
mod mie;

pub use born::{born_field, BornField};
pub use helmholtz::helmholtz_residual;
pub use mie::{default_truncation, rayleigh_cross_section, MieSolution};
