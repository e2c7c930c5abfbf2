//! Cord processes, their traced categories, finite loop models and the
//! Needham-Schroeder analysis built on them.

pub mod cords;
pub mod dsl;
pub mod gen;
pub mod int_cat;
pub mod laws;
pub mod loop_model;
pub mod proc_cat;
pub mod protocols;
pub mod terms;
