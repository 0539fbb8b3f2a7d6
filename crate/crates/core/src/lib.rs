#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod gauge_fields;
pub mod path_integrals;
pub mod quadrature;
pub mod scalar;
pub mod schrodinger;
pub mod vector;

pub use error::{Error, Result};
pub use scalar::Real;
pub use vector::Vec3;

pub type FieldSpec64 = gauge_fields::FieldSpec<f64>;
pub type FieldSpec32 = gauge_fields::FieldSpec<f32>;
pub type PhysConstants64 = gauge_fields::PhysConstants<f64>;
pub type PhysConstants32 = gauge_fields::PhysConstants<f32>;
pub type Path64 = path_integrals::Path<f64>;
pub type Path32 = path_integrals::Path<f32>;
pub type Grid64 = schrodinger::Grid<f64>;
pub type Grid32 = schrodinger::Grid<f32>;
pub type WaveField64 = schrodinger::WaveField<f64>;
pub type WaveField32 = schrodinger::WaveField<f32>;
