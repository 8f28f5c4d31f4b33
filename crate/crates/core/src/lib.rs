//! Axis-typed index algebra and a static checker for hierarchical model
//! construction.

pub mod axis;
pub mod check;
pub mod kernels;
pub mod lang;
pub mod registry;
pub mod runtime;
pub mod typed;
