//! Probabilistic models of phylogenies.
//!
//! The crate is organised around the objects a phylogeny can be reduced to:
//!
//! * [`tree`]: binary tree shapes, optionally labelled and/or ranked, with
//!   Newick and hierarchy I/O and exhaustive enumeration for small sizes.
//! * [`combinatorics`]: exact rational counts and probabilities of the
//!   uniform families (PDA, ERM, URT) and of Galton–Watson leaf counts.
//! * [`branching`]: Markov branching models (β-splitting, measure-driven
//!   splitting laws), their samplers and sampling consistency checks.
//! * [`generators`]: Yule, Kingman and binary Galton–Watson simulators.
//! * [`chronos`]: chronological trees, splitting-tree simulation and the
//!   bijection with jumping contour paths.
//! * [`comb`]: combs and the ultrametric spaces they code.
//! * [`cpp`]: coalescent point processes, scale functions, bottlenecks,
//!   phylogenetic diversity loss, likelihoods and fitting.
//!
//! Supporting modules: [`numerics`] (quadrature, root finding, Nelder–Mead),
//! [`gof`] (goodness-of-fit statistics) and [`rng`] (seed streams).

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod branching;
pub mod chronos;
pub mod comb;
pub mod combinatorics;
pub mod cpp;
pub mod generators;
pub mod gof;
pub mod golden;
pub mod numerics;
pub mod rng;
pub mod tree;

pub use branching::{SplitLaw, SplitMeasure};
pub use chronos::{ChronologicalTree, ContourPath, LifespanModel, Lifetime};
pub use comb::{Comb, UltrametricMatrix, UltrametricTree};
pub use combinatorics::ModelId;
pub use cpp::ScaleFunction;
pub use tree::{Tree, TreeKind};
