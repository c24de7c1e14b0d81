//! Reduction gadgets for Minimum Maximal Matching, built end to end from
//! Unique Label Cover instances, together with exact verifiers.
//!
//! The pipeline: [`ulc`] instances feed the weighted [`gadget`] graphs;
//! [`fracmatch`] saturates them using Hamiltonian cycles from [`kneser`];
//! [`blowup`] turns the weighted graph into an unweighted one and
//! discretizes the fractional matching; [`bipartite`] covers the bipartite
//! variants. [`solvers`] provides the exact oracles and [`harness`] the
//! lemma verifiers, serialization, and experiment tables.

pub mod bipartite;
pub mod blowup;
pub mod error;
mod flow;
pub mod fracmatch;
pub mod gadget;
pub mod graph;
pub mod harness;
pub mod kneser;
pub mod rational;
pub mod solvers;
pub mod ulc;

pub use error::{Error, Result};
pub use rational::Rational;
