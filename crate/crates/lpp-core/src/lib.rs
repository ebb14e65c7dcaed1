//! Last-passage percolation constants of Barak-Erdős-type random graphs.
//!
//! The growth rate `C(p)` of the longest path in the directed random graph on
//! the integers, where each edge `i -> j` (`i < j`) is present with probability
//! `p`, is reached here through four independent routes:
//!
//! * direct simulation of graph windows ([`graph`]),
//! * the infinite bin model and its front speed ([`ibm`]),
//! * exact combinatorics of selection words and finite Markov chains
//!   ([`words`], [`chainbounds`]),
//! * perfect simulation of the max growth system ([`mgs`]).
//!
//! The supporting modules cover the Euler function behind the skeleton density
//! ([`euler`]), the Poisson-weighted infinite tree that describes sparse graphs
//! ([`pwit`]), and the two-weights model with its criticality witnesses
//! ([`charged`]). All randomness flows through [`harness::RngStream`].

pub mod error;
pub mod euler;
pub mod chainbounds;
pub mod harness;
pub mod ibm;
pub mod words;
pub mod graph;
pub mod pwit;
pub mod charged;
pub mod mgs;

pub use error::{LppError, Result};
