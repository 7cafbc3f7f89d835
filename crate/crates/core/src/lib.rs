//! Ricci curvature, prescribed Ricci curvature and Ricci iteration for
//! homogeneous metrics on spheres and complex projective spaces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ancient;
pub mod cli;
pub mod cubic;
pub mod einstein;
pub mod error;
pub mod geometry;
pub mod iteration;
pub mod newton;
pub mod prescribed;

pub use error::{Result, RicciError};
