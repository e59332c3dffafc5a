//! Deciders, certificates and extraction procedures for ω^n·σ-largeness in
//! its plain, apartness-constrained and product-tree forms.

pub mod error;
pub mod formula;
pub mod largeness;
pub mod milliken;
pub mod par;
pub mod pigeonhole;
pub mod pipelines;
pub mod structure;

pub use error::{Error, Result};
