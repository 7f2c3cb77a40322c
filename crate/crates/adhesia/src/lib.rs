//! Coalgebraic graphs with arbitrarily nested nodes and edges.
//!
//! The library is organised around four layers:
//!
//! * [`term`] and [`finset`] — nested-set terms with a canonical order, and
//!   the category of finite sets (composition, pullbacks, pushouts,
//!   pushout complements).
//! * [`functor`] — a small expression language of endofunctors on one or two
//!   sorts (`Pot`, `PPa`, `PPb`, `PotOm`, products, coproducts, words,
//!   copies, the final functor), with membership, morphism action and
//!   bounded enumeration.
//! * [`limits`] — machine checks for pullback preservation: the comparison
//!   map `h`, its explicit inverse `hbar`, and preservation verdicts
//!   (ordinary / along monos / weak).
//! * [`graph`], [`category`], [`dpo`] — coalgebraic graphs `(N, E, node, st)`
//!   over a functor signature, their pullbacks/pushouts, the vertical weak
//!   Van Kampen cube check, and double-pushout rewriting.
//!
//! [`encodings`] collects the signature presets for the hierarchical-graph
//! flavours (packages, layered hypergraphs, parent maps, bigraphs, grouping)
//! together with the worked example graphs as frozen fixtures, and [`dot`]
//! renders graphs as GraphViz clusters for visual inspection.

pub mod category;
pub mod dot;
pub mod dpo;
pub mod encodings;
pub mod error;
pub mod finset;
pub mod functor;
pub mod graph;
pub mod limits;
pub mod term;

pub use error::Error;
pub use finset::{FinFunction, FinSet};
pub use functor::{CarrierEnv, FunctorExpr, SortedFunction};
pub use graph::{CoalgGraph, GraphMorphism, Signature};
pub use term::{AtomId, Flavor, NestedTerm};
