//! Collisionless periodic trajectories for linear mechanical systems with
//! intermittent one-dimensional ground contact.

pub mod analytic2;
pub mod cauchy;
pub mod critical;
pub mod error;
pub mod impact;
pub mod linalg;
pub mod model;
pub mod reproduce;
pub mod serde_mat;
pub mod spectral;
pub mod trajectory;

pub use error::{Error, Result};
