//! Example markets, witness-structure detection in random markets, the
//! closed-form probability that a fixed tuple of students forms a witness,
//! and solver confirmation of detected witnesses.

pub mod conditions;
pub mod confirm;
pub mod detect;
pub mod experiment;
pub mod fixtures;
pub mod probability;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::EquilibriumError;
use crate::model::{District, Problem, SchoolId, StudentId};

pub use conditions::{check_tuple, ConditionFailure};
pub use confirm::{confirm_tuple, induced_subproblem, Verdict};
pub use detect::{detect, labelings};
pub use experiment::{run_experiment, ExperimentReport, ExperimentRow, ExperimentSpec, TupleRow};
pub use fixtures::{build_fixture, embed, FixtureName};
pub use probability::{tuple_probability, TupleProbability};

/// The four witness constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Theorem {
    /// A sophisticated student gains when a sincere student turns
    /// sophisticated (five students, six schools).
    T1,
    /// A sophisticated student gains when her district switches from BM to
    /// DA (three students, three schools).
    T2,
    /// An unconstrained student gains when a constrained student becomes
    /// unconstrained (two students, two schools).
    L1,
    /// A constrained student gains when a constrained student of the other
    /// district becomes unconstrained (three students, three schools).
    L2,
}

impl Theorem {
    pub const ALL: [Theorem; 4] = [Theorem::T1, Theorem::T2, Theorem::L1, Theorem::L2];

    pub fn tuple_size(self) -> usize {
        match self {
            Theorem::T1 => 5,
            Theorem::T2 | Theorem::L2 => 3,
            Theorem::L1 => 2,
        }
    }

    /// Role names of the named schools, in `WitnessTuple::schools` order.
    pub fn school_roles(self) -> &'static [&'static str] {
        match self {
            Theorem::T1 => &["l1", "l2", "r1", "r2", "r3", "r4"],
            Theorem::T2 | Theorem::L2 => &["l1", "l2", "r1"],
            Theorem::L1 => &["l", "r"],
        }
    }

    /// Shortest preference list length under which the construction exists.
    pub fn min_list_length(self) -> usize {
        match self {
            Theorem::T1 => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Theorem::T1 => "T1",
            Theorem::T2 => "T2",
            Theorem::L1 => "L1",
            Theorem::L2 => "L2",
        };
        f.write_str(s)
    }
}

impl FromStr for Theorem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "T1" => Ok(Theorem::T1),
            "T2" => Ok(Theorem::T2),
            "L1" => Ok(Theorem::L1),
            "L2" => Ok(Theorem::L2),
            other => Err(format!("unknown theorem `{other}` (T1, T2, L1, L2)")),
        }
    }
}

/// Students and schools realizing one construction. `left` is the district
/// playing the role of L in the construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct WitnessTuple {
    pub theorem: Theorem,
    pub left: District,
    pub students: Vec<StudentId>,
    pub schools: Vec<SchoolId>,
}

impl WitnessTuple {
    pub fn student_names(&self, p: &Problem) -> Vec<String> {
        self.students
            .iter()
            .map(|&s| p.student(s).name.clone())
            .collect()
    }

    pub fn school_names(&self, p: &Problem) -> Vec<String> {
        self.schools
            .iter()
            .map(|&s| p.school(s).name.clone())
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum LabError {
    #[error("{theorem} detection needs {needed}")]
    MechanismPrecondition {
        theorem: Theorem,
        needed: &'static str,
    },
    #[error("tuple does not satisfy the {theorem} conditions: {failure}")]
    NotAWitness {
        theorem: Theorem,
        failure: ConditionFailure,
    },
    #[error("n={n}, k={k} too small for the {theorem} product")]
    TooSmall {
        theorem: Theorem,
        n: usize,
        k: usize,
    },
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Params(#[from] crate::random::ParamError),
    #[error(transparent)]
    Spec(#[from] experiment::SpecError),
}
