//! Compositional security modeling over wiring diagrams.
//!
//! Systems are boxes of the wiring-diagram category inhabited by Moore
//! machines. Composite behavior is computed by the Moore-machine algebra,
//! attackers learn by comparing test outcomes against a knowledge base, and
//! attacks either rewrite a component machine or rewire a component box.
//!
//! Module map:
//!
//! * [`fincat`] finite categories, set-valued functors, natural
//!   transformations and a brute-force Yoneda verifier.
//! * [`wiring`] boxes, wiring diagrams, composition, tensor, architectures.
//! * [`moore`] Moore machines, homomorphisms and the composite-machine algebra.
//! * [`probes`] tests, knowledge bases and the learning filter.
//! * [`oracle`] brute-force equivalence checking, independent of [`moore`]'s
//!   composite construction.
//! * [`attacks`] rewriting and rewiring attacks and attack scripts.
//! * [`scenarios`] the UAV fixtures.
//! * [`random`] seeded random wired networks for law checking.

pub mod attacks;
pub mod fincat;
pub mod moore;
pub mod oracle;
pub mod probes;
pub mod random;
pub mod scenarios;
pub mod wiring;

pub use attacks::{AttackScript, AttackStep, CompositeSystem, RewireStep, RewriteMode, RewriteStep};
pub use moore::{apply_algebra, lift_hom, MachineHom, MooreMachine};
pub use probes::{KnowledgeBase, LearnResult, Test, TestKind};
pub use wiring::{BoxShape, Port, SourceExpr, SourceRef, Wiring};

/// A tuple of symbols, one per port, each an index into that port's alphabet.
pub type Tuple = Vec<usize>;

/// A finite input (or output) word.
pub type Word = Vec<Tuple>;
