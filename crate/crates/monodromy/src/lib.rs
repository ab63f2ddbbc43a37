//! Exact mod-2 computations for positive Dehn-twist factorizations on a
//! genus-5 surface.
//!
//! The crate models the homology shadow of a mapping class group: a
//! named curve registry on the genus-5 surface, Dehn twists acting as
//! symplectic transvections over GF(2), positive factorizations with
//! Hurwitz moves, the graph invariant chi (a quadratic refinement of the
//! intersection form) that obstructs twist membership, and a
//! Schreier-Sims engine computing exact subgroup orders in Sp(10, Z/2).
//!
//! Modules:
//! - [`gf2`]: bit-vectors, bit-matrices, rank, affine solving.
//! - [`surface`]: curve registry, intersection form, twist words,
//!   registry validation.
//! - [`factorization`]: the eta / xi / Y words, Hurwitz moves, total
//!   monodromy shadow, Euler characteristics.
//! - [`quadform`]: chi graphs, domination/exclusion certificates, Arf
//!   invariant, certificate search, the parity distinguisher.
//! - [`spgroup`]: transvection matrices, stabilizer chains, orders,
//!   membership, named twist identities, chain caching.
//! - [`script`]: replayable equivalence scripts.
//! - [`expr`], [`report`], [`cli`]: input grammars, report documents and
//!   the command-line front end.

pub mod cli;
pub mod expr;
pub mod factorization;
pub mod gf2;
pub mod quadform;
pub mod report;
pub mod script;
pub mod spgroup;
pub mod surface;

pub use factorization::{
    conjugate_by_class, conjugate_factorization, eta, eta_power, euler_characteristic,
    hurwitz_move, rotate_block, total_monodromy_sp2, xi, y_fact, Direction, Factorization,
    Letter,
};
pub use gf2::{rank, solve_affine, AffineSolution, BitMatrix, BitVec};
pub use quadform::{
    distinguish, find_certificate, graph_from, shipped_graph, solve_stallings_class, Certificate,
    ChiGraph, Verdict,
};
pub use script::{run_script, shipped_y_reduce, ScriptDoc, ScriptReport};
pub use spgroup::{
    group_from_cached, group_of_factorization, twist_matrix, verify_twist_identity, SpElement,
    SpSubgroup, TwistIdentity,
};
pub use surface::{
    apply_word, intersection, kanenobu_word, transvect, validate_registry, CurveRegistry,
    HomologyClass, MappingClassWord,
};
