//! Symbolic verification of characteristics, symmetries and Lagrange
//! anchors for ODE systems and free field models.

pub mod catalog;
pub mod expr;
pub mod field_models;
pub mod forms;
pub mod linop;
pub mod model;
pub mod ode_anchor;
pub mod oracle;
pub mod report;
pub mod runner;
