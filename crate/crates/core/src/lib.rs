//! Joint entity mention detection and coreference resolution as beam
//! search, trained online with an approximate large-margin update.
//!
//! The crate is organized around a domain-agnostic search/learning kernel
//! ([`laso`]), a sparse linear model over interned base × decision
//! meta-features ([`sparse`], [`registry`]), the left-to-right joint EDT
//! search space ([`hypothesis`], [`search_space`], [`linkage`]), the base
//! and decision feature extractors ([`features`]), corpus io and synthetic
//! corpus generation ([`document`], [`corpus`], [`synth`]), an ACE-style
//! scorer ([`scorer`]), and the training/experiment drivers used by the
//! command-line tool ([`train`], [`experiments`], [`mine`]).

pub mod config;
pub mod corpus;
pub mod document;
pub mod error;
pub mod features;
pub mod hypothesis;
pub mod laso;
pub mod linkage;
pub mod matching;
pub mod model;
pub mod registry;
pub mod resources;
pub mod scorer;
pub mod search_space;
pub mod synth;
pub mod sparse;
pub mod train;
pub mod types;

pub use error::{EdtError, Result};
