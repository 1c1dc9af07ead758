//! Expander decomposition of undirected multigraphs.
//!
//! The pipeline is a cut-matching game played on the subdivision graph: a
//! spectral cut player proposes source/target split nodes, a bounded-height
//! push-relabel matching player routes them or exposes a sparse level cut,
//! and a recursive driver with trimming turns game outcomes into clusters.
//! Dense and brute-force reference implementations live in [`oracles`].

pub mod cut_matching;
pub mod decomposition;
pub mod error;
pub mod gen;
pub mod graph;
pub mod io;
pub mod oracles;
pub mod params;
pub mod rng;
pub mod spectral;
pub mod unit_flow;

pub use cut_matching::{cut_matching, CaseKind, CutMatchingOutcome, GameOptions, RoundRecord};
pub use decomposition::{decomp, decomp_with, trim, CertMethod, ClusterCert, DecompOptions, Partition};
pub use error::{Error, Result};
pub use graph::{Cut, MultiGraph, Subdivision};
pub use params::{Mode, ParamSpec, Params};
