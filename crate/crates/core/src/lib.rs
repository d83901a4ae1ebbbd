//! Generating tuples of finite groups under Nielsen moves.
//!
//! The crate models the action of `Aut(F_n)` on generating `n`-tuples of a
//! finite group `G` and the induced `Out(F_n)` action on `Aut(G)`-classes of
//! such tuples (T-systems). Modules:
//!
//! * [`group`]: finite group backends, subgroup closure, automorphisms.
//! * [`free`]: reduced words, evaluation, Nielsen moves.
//! * [`tuples`]: generating tuples, class tables, generation of powers,
//!   spread, and matrices whose columns generate.
//! * [`action`]: the induced permutation action on classes.
//! * [`connect`]: word search in product groups and explicit move pipelines.
//! * [`laws`]: group laws and the automorphisms they produce.

pub mod action;
pub mod connect;
pub mod error;
pub mod free;
pub mod group;
pub mod laws;
pub mod tuples;

pub use error::{Error, Result};
pub use free::{MoveSequence, NielsenMove, Sign, Word};
pub use group::{load, load_group, Elem, FiniteGroup, GroupSpec, IDENTITY};
