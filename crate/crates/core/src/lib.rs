pub mod analysis;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod solvers;
pub mod spectral_ops;
pub mod sum;
pub mod transform;
