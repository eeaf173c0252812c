//! The condition lists of the four constructions, checked literally on an
//! ordered tuple of students.
//!
//! Each list has three groups: categories (sophistication, constraint,
//! residence), preferences and school locations, and school priorities. The
//! preference group is an ordered sequence whose items line up one-to-one
//! with the preference factors of [`super::tuple_probability`], so that a
//! prefix of the sequence can be calibrated against a prefix of the product.
//! Named schools are read off the tuple's preference lists; members' lists
//! beyond the named positions are unconstrained. "No other student" means
//! students outside the tuple.

use std::fmt;

use super::Theorem;
use crate::model::{Constraint, District, Problem, SchoolId, Sophistication, StudentId};
use crate::random::Category;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConditionFailure {
    Arity { expected: usize, got: usize },
    RepeatedStudent,
    Category { role: usize },
    Preference { index: usize },
    Priority,
}

impl fmt::Display for ConditionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionFailure::Arity { expected, got } => {
                write!(f, "expected {expected} students, got {got}")
            }
            ConditionFailure::RepeatedStudent => f.write_str("students are not distinct"),
            ConditionFailure::Category { role } => write!(f, "category of i{} fails", role + 1),
            ConditionFailure::Preference { index } => {
                write!(f, "preference condition #{} fails", index + 1)
            }
            ConditionFailure::Priority => f.write_str("priority conditions fail"),
        }
    }
}

/// Whether a student of category `cat` may fill `role` (0-based) when
/// `left` plays L.
pub fn category_fits(theorem: Theorem, role: usize, cat: Category, left: District) -> bool {
    use Constraint::*;
    use Sophistication::*;
    let in_l = cat.residence == left;
    let sincere = cat.sophistication == Sincere;
    let unc = cat.constraint == Unconstrained;
    match (theorem, role) {
        (Theorem::T1, 0) => sincere && in_l,
        (Theorem::T1, 1) => sincere && unc,
        (Theorem::T1, 2) => !sincere && unc,
        (Theorem::T1, 3) | (Theorem::T1, 4) => sincere && !in_l,
        (Theorem::T2, 0) => sincere && in_l,
        (Theorem::T2, 1) => !sincere && in_l,
        (Theorem::T2, 2) => !sincere && unc,
        (Theorem::L1, 0) => unc,
        (Theorem::L1, 1) => cat.constraint == Constrained && in_l,
        (Theorem::L2, 0) => cat.constraint == Constrained && in_l,
        (Theorem::L2, 1) => cat.constraint == Constrained && !in_l,
        (Theorem::L2, 2) => unc,
        _ => false,
    }
}

/// Number of items in the preference group.
pub fn preference_condition_count(theorem: Theorem) -> usize {
    match theorem {
        Theorem::T1 => 6,
        Theorem::T2 | Theorem::L2 => 4,
        Theorem::L1 => 3,
    }
}

fn pref(p: &Problem, s: StudentId, pos: usize) -> Option<SchoolId> {
    p.student(s).preferences.get(pos).copied()
}

/// Named schools read off the members' lists, in
/// [`Theorem::school_roles`] order.
pub fn named_schools(
    p: &Problem,
    theorem: Theorem,
    students: &[StudentId],
) -> Option<Vec<SchoolId>> {
    let s = students;
    Some(match theorem {
        // l1 l2 r1 r2 r3 r4
        Theorem::T1 => vec![
            pref(p, s[0], 0)?,
            pref(p, s[2], 0)?,
            pref(p, s[4], 0)?,
            pref(p, s[3], 0)?,
            pref(p, s[2], 1)?,
            pref(p, s[4], 1)?,
        ],
        // l1 l2 r1
        Theorem::T2 => vec![pref(p, s[0], 0)?, pref(p, s[0], 1)?, pref(p, s[2], 1)?],
        // l r
        Theorem::L1 => vec![pref(p, s[0], 0)?, pref(p, s[1], 0)?],
        // l1 l2 r1
        Theorem::L2 => vec![pref(p, s[0], 0)?, pref(p, s[1], 0)?, pref(p, s[1], 1)?],
    })
}

/// How many leading items of the preference group hold.
pub fn preference_prefix(
    p: &Problem,
    theorem: Theorem,
    left: District,
    students: &[StudentId],
) -> usize {
    let in_l = |s: SchoolId| p.district_of(s) == left;
    let in_r = |s: SchoolId| p.district_of(s) != left;
    let at = |i: usize, pos: usize| pref(p, students[i], pos);
    let exclusive = |named: &[SchoolId]| {
        p.student_ids()
            .filter(|i| !students.contains(i))
            .all(|i| !p.student(i).preferences.iter().any(|s| named.contains(s)))
    };

    let checks: Vec<Box<dyn Fn() -> bool + '_>> = match theorem {
        Theorem::T1 => vec![
            // i1 -> l1 in L
            Box::new(move || at(0, 0).is_some_and(in_l)),
            // i5 -> r1, r4 in R
            Box::new(move || at(4, 0).is_some_and(in_r) && at(4, 1).is_some_and(in_r)),
            // i4 -> r2 in R, new
            Box::new(move || {
                at(3, 0).is_some_and(|r2| in_r(r2) && Some(r2) != at(4, 0) && Some(r2) != at(4, 1))
            }),
            // i3 -> l2 in L, r3 in R, both new
            Box::new(move || {
                let named = [at(0, 0), at(4, 0), at(4, 1), at(3, 0)];
                at(2, 0).is_some_and(|l2| in_l(l2) && !named.contains(&Some(l2)))
                    && at(2, 1).is_some_and(|r3| in_r(r3) && !named.contains(&Some(r3)))
            }),
            // i2 ranks l1, r2, r1, l2
            Box::new(move || {
                let want = [at(0, 0), at(3, 0), at(4, 0), at(2, 0)];
                (0..4).all(|pos| at(1, pos).is_some() && at(1, pos) == want[pos])
            }),
            Box::new(move || named_schools(p, theorem, students).is_some_and(|n| exclusive(&n))),
        ],
        Theorem::T2 => vec![
            // i1 -> l1, l2 in L
            Box::new(move || at(0, 0).is_some_and(in_l) && at(0, 1).is_some_and(in_l)),
            // i2 ranks l2 then l1
            Box::new(move || at(1, 0).is_some() && at(1, 0) == at(0, 1) && at(1, 1) == at(0, 0)),
            // i3 -> l2, then r1 in R
            Box::new(move || {
                at(2, 0).is_some() && at(2, 0) == at(0, 1) && at(2, 1).is_some_and(in_r)
            }),
            Box::new(move || named_schools(p, theorem, students).is_some_and(|n| exclusive(&n))),
        ],
        Theorem::L1 => vec![
            // i1 -> l in L
            Box::new(move || at(0, 0).is_some_and(in_l)),
            // i2 -> r in R, then l
            Box::new(move || {
                at(1, 0).is_some_and(in_r) && at(1, 1).is_some() && at(1, 1) == at(0, 0)
            }),
            Box::new(move || named_schools(p, theorem, students).is_some_and(|n| exclusive(&n))),
        ],
        Theorem::L2 => vec![
            // i1 -> l1 in L
            Box::new(move || at(0, 0).is_some_and(in_l)),
            // i2 -> l2 in L (new), then r1 in R
            Box::new(move || {
                at(1, 0).is_some_and(|l2| in_l(l2) && Some(l2) != at(0, 0))
                    && at(1, 1).is_some_and(in_r)
            }),
            // i3 -> r1, then l1
            Box::new(move || at(2, 0).is_some() && at(2, 0) == at(1, 1) && at(2, 1) == at(0, 0)),
            Box::new(move || named_schools(p, theorem, students).is_some_and(|n| exclusive(&n))),
        ],
    };
    checks.iter().take_while(|c| c()).count()
}

/// Priority conditions, given the named schools.
pub fn priorities_hold(
    p: &Problem,
    theorem: Theorem,
    students: &[StudentId],
    schools: &[SchoolId],
) -> bool {
    let above = |school: usize, a: usize, b: usize| {
        p.school(schools[school]).prefers(students[a], students[b])
    };
    match theorem {
        // l1: i1 > i2; l2: i2 > i3; r1: i2 > i5; r2: i4 > i2
        Theorem::T1 => above(0, 0, 1) && above(1, 1, 2) && above(2, 1, 4) && above(3, 3, 1),
        // l1: i2 > i1; l2: i1 > i3 > i2
        Theorem::T2 => above(0, 1, 0) && above(1, 0, 2) && above(1, 2, 1),
        // l: i2 > i1
        Theorem::L1 => above(0, 1, 0),
        // l1: i3 > i1; r1: i2 > i3
        Theorem::L2 => above(0, 2, 0) && above(2, 1, 2),
    }
}

/// Checks every condition of `theorem` on the ordered tuple `students`,
/// with `left` playing L. Returns the named schools on success.
pub fn check_tuple(
    p: &Problem,
    theorem: Theorem,
    left: District,
    students: &[StudentId],
) -> Result<Vec<SchoolId>, ConditionFailure> {
    if students.len() != theorem.tuple_size() {
        return Err(ConditionFailure::Arity {
            expected: theorem.tuple_size(),
            got: students.len(),
        });
    }
    for (i, a) in students.iter().enumerate() {
        if students[..i].contains(a) || a.index() >= p.students.len() {
            return Err(ConditionFailure::RepeatedStudent);
        }
    }
    for (role, &s) in students.iter().enumerate() {
        if !category_fits(theorem, role, Category::of(p.student(s)), left) {
            return Err(ConditionFailure::Category { role });
        }
    }
    let held = preference_prefix(p, theorem, left, students);
    if held < preference_condition_count(theorem) {
        return Err(ConditionFailure::Preference { index: held });
    }
    let schools =
        named_schools(p, theorem, students).expect("preference conditions name every school");
    if !priorities_hold(p, theorem, students, &schools) {
        return Err(ConditionFailure::Priority);
    }
    Ok(schools)
}
