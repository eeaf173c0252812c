//! Multi-district school choice.
//!
//! Each district runs the Boston mechanism (BM) or student-proposing
//! deferred acceptance (DA) on the students enrolled in it. Students differ
//! in sophistication (sincere or strategic reporting) and constraint (stuck
//! in their district of residence or free to enroll in either). The crate
//! computes the pure-strategy Nash equilibria of the induced game, compares
//! equilibria across counterfactual worlds, samples uniform random markets
//! and detects the small structures that make counterintuitive preferences
//! abundant in large markets.

pub mod behavior;
pub mod equilibrium;
pub mod io;
pub mod lab;
pub mod mechanisms;
pub mod model;
pub mod random;
pub mod report;

pub use equilibrium::{
    compare_worlds, enumerate_equilibria, evaluate_profile, is_nash, prefers, Answer,
    EquilibriumError, EquilibriumSet, StrategyProfile, Transform, DEFAULT_BUDGET,
};
pub use model::{
    Constraint, District, Matching, Mechanism, Mechanisms, Problem, Rol, School, SchoolId,
    SincereMode, Sophistication, Student, StudentId,
};
