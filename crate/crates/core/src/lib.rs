pub mod assembly;
pub mod basis;
pub mod error;
pub mod experiment;
pub mod field;
pub mod geometry;
pub mod green;
pub mod medium;
pub mod oracles;
pub mod quadrature;
pub mod solver;
pub mod vec3;
