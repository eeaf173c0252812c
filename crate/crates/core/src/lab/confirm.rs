//! Solver confirmation of a detected tuple on its induced subproblem.

use serde::Serialize;

use super::conditions::check_tuple;
use super::detect::labelings;
use super::{LabError, Theorem, WitnessTuple};
use crate::equilibrium::{compare_worlds, Answer, Transform, WorldComparison};
use crate::model::{
    Constraint, Mechanism, Problem, School, SchoolId, Sophistication, Student, StudentId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Confirmed,
    Refuted,
}

/// The tuple's students and named schools alone. Students keep the named
/// schools of their lists in order; schools keep the tuple students in
/// priority order. Ids follow tuple and role order.
pub fn induced_subproblem(p: &Problem, w: &WitnessTuple) -> Problem {
    let school_id = |s: SchoolId| {
        w.schools
            .iter()
            .position(|&x| x == s)
            .map(|j| SchoolId(j as u32))
    };
    let student_id = |i: StudentId| {
        w.students
            .iter()
            .position(|&x| x == i)
            .map(|j| StudentId(j as u32))
    };
    let students = w
        .students
        .iter()
        .map(|&i| {
            let s = p.student(i);
            Student {
                preferences: s.preferences.iter().filter_map(|&c| school_id(c)).collect(),
                ..s.clone()
            }
        })
        .collect();
    let schools = w
        .schools
        .iter()
        .map(|&c| {
            let s = p.school(c);
            let order = s.priority().iter().filter_map(|&i| student_id(i)).collect();
            School::new(s.name.clone(), s.district, s.capacity, order)
        })
        .collect();
    Problem {
        students,
        schools,
        mechanisms: p.mechanisms,
        mode: p.mode,
    }
}

/// The student whose gain the construction claims, and the change, in
/// subproblem ids.
pub fn claim(w: &WitnessTuple) -> (StudentId, Transform) {
    match w.theorem {
        Theorem::T1 => (
            StudentId(2),
            Transform::SetSophistication(StudentId(1), Sophistication::Sophisticated),
        ),
        Theorem::T2 => (
            StudentId(1),
            Transform::SetMechanism(w.left, Mechanism::DeferredAcceptance),
        ),
        Theorem::L1 | Theorem::L2 => (
            StudentId(0),
            Transform::SetConstraint(StudentId(1), Constraint::Unconstrained),
        ),
    }
}

/// Solves the claim on the induced subproblem and returns the full
/// comparison.
pub fn compare_tuple(
    p: &Problem,
    w: &WitnessTuple,
    budget: u64,
) -> Result<WorldComparison, LabError> {
    if !labelings(w.theorem, p.mechanisms)?.contains(&w.left) {
        return Err(LabError::MechanismPrecondition {
            theorem: w.theorem,
            needed: "the tuple's labeling to match the district mechanisms",
        });
    }
    match check_tuple(p, w.theorem, w.left, &w.students) {
        Ok(schools) if schools == w.schools => {}
        Ok(_) => {
            return Err(LabError::NotAWitness {
                theorem: w.theorem,
                failure: super::ConditionFailure::Arity {
                    expected: w.theorem.school_roles().len(),
                    got: w.schools.len(),
                },
            })
        }
        Err(failure) => {
            return Err(LabError::NotAWitness {
                theorem: w.theorem,
                failure,
            })
        }
    }
    let sub = induced_subproblem(p, w);
    let (student, transform) = claim(w);
    Ok(compare_worlds(&sub, student, transform, true, budget)?)
}

pub fn confirm_tuple(p: &Problem, w: &WitnessTuple, budget: u64) -> Result<Verdict, LabError> {
    let cmp = compare_tuple(p, w, budget)?;
    Ok(if cmp.answer == Answer::Yes {
        Verdict::Confirmed
    } else {
        Verdict::Refuted
    })
}
