//! Argumentative case-based classification of scenes described by their
//! objects.
//!
//! The pipeline turns object-level annotations into symbolic
//! characterisations ([`characterisation`]), reduces labelled examples to a
//! compact casebase ([`reduction`]), mines an argumentation framework per query
//! and predicts via grounded semantics ([`aacbr`], [`af`]), and chains binary
//! models into a one-vs-rest tournament ([`multiclass`]).

pub mod aacbr;
pub mod af;
pub mod characterisation;
pub mod evaluate;
pub mod io;
pub mod multiclass;
pub mod reduction;
pub mod scene;
