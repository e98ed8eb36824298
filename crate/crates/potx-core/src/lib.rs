//! Modeling toolkit for human-in-the-loop system models.
//!
//! A system landscape is declared in a small textual language (`.potx` files):
//! raw *measures*, physical and non-physical *states*, *models* that connect
//! them, and *observers* that render parts of the landscape transparent. On
//! top of the resolved graph the crate derives perspective membership
//! (introperspective, exteroperspective, bridge), per-node required observer
//! levels, observer-generated transparency regions, a gap-analysis recipe
//! that proposes missing observers, and exact discrete inference restricted
//! to transparent regions.
//!
//! The typical pipeline is [`dsl::parse`] -> [`graph::resolve`] ->
//! [`classify::classify_all`] / [`transparency::opacity_map`] ->
//! [`recipe::analyze_gaps`] or [`inference::infer`].
//!
//! With the default `parallel` feature the per-observer and per-assignment
//! inner loops run on rayon; disabling it falls back to equivalent
//! sequential code.

pub mod classify;
pub mod dsl;
mod exec;
pub mod graph;
pub mod inference;
pub mod recipe;
pub mod transparency;
