//! Directed correlation graphs (cDGs) and local independence.
//!
//! The crate covers four areas:
//!
//! * [`graph`]: graphs with directed, blunt and bidirected edges, the `.cdg`
//!   text format and structural primitives (ancestors, condensation,
//!   ancestral sets, blunt components).
//! * [`separation`]: μ-separation and m-separation deciders, weak inducing
//!   paths, canonical separators and independence models.
//! * [`equivalence`]: Markov equivalence of cDGs, collider equivalence,
//!   virtual collider tripaths, maximality and class enumeration.
//! * [`hardness`]: the reduction from 3DNF tautology to non-equivalence.
//! * [`ou`]: Ornstein-Uhlenbeck models, Riccati solvers, Kalman-Bucy
//!   filtering and numerical checks of the global Markov property.

pub mod equivalence;
pub mod graph;
pub mod hardness;
pub mod linalg;
pub mod nodeset;
pub mod ou;
pub mod random;
pub mod separation;

pub use graph::{Edge, Graph, GraphBuilder, GraphClass, GraphError, NodeId};
pub use nodeset::NodeSet;
