//! What each student does: sincere students follow fixed rules, strategic
//! students choose from an enumerated strategy space.

use serde::Serialize;
use thiserror::Error;

use crate::mechanisms::Enrollment;
use crate::model::{
    Constraint, District, Problem, Rol, SchoolId, SincereMode, Sophistication, Student, StudentId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Behavior fully determined by preferences.
    Fixed,
    /// Submits her sincere ROL but picks the district.
    DistrictOnly,
    /// Chooses the ROL, and the district if unconstrained.
    Full,
}

pub fn role(student: &Student, mode: SincereMode) -> Role {
    match (student.sophistication, student.constraint, mode) {
        (Sophistication::Sophisticated, _, _) => Role::Full,
        (Sophistication::Sincere, Constraint::Constrained, _) => Role::Fixed,
        (Sophistication::Sincere, Constraint::Unconstrained, SincereMode::Naive) => Role::Fixed,
        (Sophistication::Sincere, Constraint::Unconstrained, SincereMode::DistrictStrategic) => {
            Role::DistrictOnly
        }
    }
}

pub fn is_strategic(student: &Student, mode: SincereMode) -> bool {
    role(student, mode) != Role::Fixed
}

/// True preferences restricted to schools of `district`, order preserved.
pub fn sincere_rol(problem: &Problem, student: &Student, district: District) -> Rol {
    Rol(student
        .preferences
        .iter()
        .copied()
        .filter(|&s| problem.district_of(s) == district)
        .collect())
}

/// District of the first-choice school; residence for an empty list.
pub fn naive_district_choice(problem: &Problem, student: &Student) -> District {
    student
        .preferences
        .first()
        .map(|&s| problem.district_of(s))
        .unwrap_or(student.residence)
}

pub fn allowed_districts(student: &Student) -> &'static [District] {
    match (student.constraint, student.residence) {
        (Constraint::Unconstrained, _) => &District::ALL,
        (Constraint::Constrained, District::L) => &[District::L],
        (Constraint::Constrained, District::R) => &[District::R],
    }
}

/// Enrollment of a fixed-role student, `None` for strategic students.
pub fn fixed_enrollment(problem: &Problem, id: StudentId) -> Option<Enrollment> {
    let student = problem.student(id);
    if is_strategic(student, problem.mode) {
        return None;
    }
    let district = match student.constraint {
        Constraint::Constrained => student.residence,
        Constraint::Unconstrained => naive_district_choice(problem, student),
    };
    Some(Enrollment::new(
        district,
        sincere_rol(problem, student, district),
    ))
}

/// One pure strategy. Every empty ROL is the same `Abstain` strategy.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Abstain,
    Enroll { district: District, rol: Rol },
}

impl Strategy {
    pub fn enrollment(&self, student: &Student) -> Enrollment {
        match self {
            Strategy::Abstain => Enrollment::new(student.residence, Rol::empty()),
            Strategy::Enroll { district, rol } => Enrollment::new(*district, rol.clone()),
        }
    }

    pub(crate) fn district_and_rol<'a>(
        &'a self,
        student: &Student,
        empty: &'a Rol,
    ) -> (District, &'a Rol) {
        match self {
            Strategy::Abstain => (student.residence, empty),
            Strategy::Enroll { district, rol } => (*district, rol),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BehaviorError {
    #[error("student {0} has a fixed role and no strategy space")]
    NotStrategic(String),
}

/// Strategy space of a strategic student, in canonical order: `Abstain`
/// first, then district L before R, then ROLs by length and lexicographically
/// by school id. Only schools the student finds acceptable are ever ranked.
pub fn strategy_space(problem: &Problem, id: StudentId) -> Result<Vec<Strategy>, BehaviorError> {
    let student = problem.student(id);
    let mut out = vec![Strategy::Abstain];
    match role(student, problem.mode) {
        Role::Fixed => return Err(BehaviorError::NotStrategic(student.name.clone())),
        Role::DistrictOnly => {
            let mut any_empty = false;
            for &d in allowed_districts(student) {
                let rol = sincere_rol(problem, student, d);
                if rol.is_empty() {
                    any_empty = true;
                } else {
                    out.push(Strategy::Enroll { district: d, rol });
                }
            }
            if !any_empty {
                out.remove(0);
            }
        }
        Role::Full => {
            for &d in allowed_districts(student) {
                let mut acceptable: Vec<SchoolId> = sincere_rol(problem, student, d).0;
                acceptable.sort_unstable();
                for len in 1..=acceptable.len() {
                    for_each_arrangement(&acceptable, len, &mut |seq| {
                        out.push(Strategy::Enroll {
                            district: d,
                            rol: Rol(seq.to_vec()),
                        })
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Calls `f` with every ordered selection of `len` distinct items, in
/// lexicographic order of positions.
fn for_each_arrangement(items: &[SchoolId], len: usize, f: &mut dyn FnMut(&[SchoolId])) {
    fn go(
        items: &[SchoolId],
        len: usize,
        used: &mut [bool],
        cur: &mut Vec<SchoolId>,
        f: &mut dyn FnMut(&[SchoolId]),
    ) {
        if cur.len() == len {
            f(cur);
            return;
        }
        for i in 0..items.len() {
            if !used[i] {
                used[i] = true;
                cur.push(items[i]);
                go(items, len, used, cur, f);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut used = vec![false; items.len()];
    go(items, len, &mut used, &mut Vec::with_capacity(len), f);
}
