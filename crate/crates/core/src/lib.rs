//! Quantum cellular automata on Cayley graphs of Z^d.
//!
//! The crate covers presentations and Brillouin zones ([`cayley`]), generic
//! automata with unitarity and isotropy checks ([`automaton`]), the Weyl and
//! Dirac families ([`weyl`], [`dirac`]), lattice evolution and tiling
//! ([`evolution`]) and the two-field electrodynamics ([`maxwell`]).

pub mod automaton;
pub mod builtins;
pub mod cayley;
pub mod dirac;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod maxwell;
pub mod weyl;

pub use automaton::{AutomatonDescriptor, IsotropyGroup, TransitionRule};
pub use builtins::Builtin;
pub use cayley::{build_presentation, make_tiling, CayleyPresentation, Label, PresentationKind, TilingMap};
pub use dirac::DiracDescriptor;
pub use error::{QcaError, Result};
pub use evolution::{FieldState, LatticeSpec};
pub use linalg::{CMat, C64};
pub use weyl::WeylVariant;
