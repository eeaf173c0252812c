//! Boston and deferred acceptance over one district, and the multi-district
//! assembly that runs each district on the students who enrolled there.

use thiserror::Error;

use crate::model::{District, Matching, Mechanism, Problem, Rol, School, SchoolId, StudentId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MechanismError {
    #[error("student #{student} ranks nonexistent school #{school}")]
    UnknownSchool { student: u32, school: u32 },
    #[error("student #{student} ranks school {school} outside district {district}")]
    ForeignSchool {
        student: u32,
        school: String,
        district: District,
    },
    #[error("student #{student} ranks school {school} more than once")]
    RepeatedSchool { student: u32, school: String },
    #[error("expected one enrollment per student ({expected}), got {got}")]
    EnrollmentCount { expected: usize, got: usize },
}

/// The ROLs submitted to one district. `schools` is the full school table of
/// the problem (indexed by `SchoolId`); only schools of `district` may be
/// ranked.
#[derive(Debug, Clone)]
pub struct DistrictInput<'a> {
    pub district: District,
    pub schools: &'a [School],
    pub rols: Vec<(StudentId, &'a Rol)>,
}

/// Assignment of each applicant, aligned with `DistrictInput::rols`.
pub type DistrictMatching = Vec<(StudentId, Option<SchoolId>)>;

impl DistrictInput<'_> {
    fn check(&self) -> Result<(), MechanismError> {
        let mut seen = vec![u32::MAX; self.schools.len()];
        for (pos, (student, rol)) in self.rols.iter().enumerate() {
            for &s in rol.schools() {
                let school = self
                    .schools
                    .get(s.index())
                    .ok_or(MechanismError::UnknownSchool {
                        student: student.0,
                        school: s.0,
                    })?;
                if school.district != self.district {
                    return Err(MechanismError::ForeignSchool {
                        student: student.0,
                        school: school.name.clone(),
                        district: self.district,
                    });
                }
                if seen[s.index()] == pos as u32 {
                    return Err(MechanismError::RepeatedSchool {
                        student: student.0,
                        school: school.name.clone(),
                    });
                }
                seen[s.index()] = pos as u32;
            }
        }
        Ok(())
    }
}

/// Boston mechanism: in round `k` every still-unassigned applicant applies to
/// the `k`-th school on her ROL and each school permanently fills its
/// remaining seats by priority.
pub fn boston_match(input: &DistrictInput) -> Result<DistrictMatching, MechanismError> {
    input.check()?;
    let mut seats: Vec<u32> = input.schools.iter().map(|s| s.capacity).collect();
    let mut result: Vec<Option<SchoolId>> = vec![None; input.rols.len()];
    let rounds = input.rols.iter().map(|(_, r)| r.len()).max().unwrap_or(0);

    let mut applications: Vec<(SchoolId, u32, usize)> = Vec::new();
    for round in 0..rounds {
        applications.clear();
        for (idx, (student, rol)) in input.rols.iter().enumerate() {
            if result[idx].is_none() {
                if let Some(&s) = rol.schools().get(round) {
                    applications.push((s, input.schools[s.index()].rank(*student), idx));
                }
            }
        }
        // each school sees its applicants as a set ordered by priority
        applications.sort_unstable();
        for &(s, _, idx) in &applications {
            if seats[s.index()] > 0 {
                seats[s.index()] -= 1;
                result[idx] = Some(s);
            }
        }
    }
    Ok(input
        .rols
        .iter()
        .zip(result)
        .map(|((student, _), s)| (*student, s))
        .collect())
}

/// Student-proposing deferred acceptance. Held students get no advantage
/// over new applicants; tentative holds become final when nobody is left
/// to propose.
pub fn deferred_acceptance_match(
    input: &DistrictInput,
) -> Result<DistrictMatching, MechanismError> {
    input.check()?;
    let count = input.rols.len();
    let mut next = vec![0usize; count];
    let mut held: Vec<Vec<(u32, usize)>> = vec![Vec::new(); input.schools.len()];
    let mut touched = vec![false; input.schools.len()];
    let mut touched_list: Vec<usize> = Vec::new();
    let mut proposers: Vec<usize> = (0..count).collect();

    while !proposers.is_empty() {
        for &idx in &proposers {
            let (student, rol) = input.rols[idx];
            if let Some(&s) = rol.schools().get(next[idx]) {
                next[idx] += 1;
                held[s.index()].push((input.schools[s.index()].rank(student), idx));
                if !touched[s.index()] {
                    touched[s.index()] = true;
                    touched_list.push(s.index());
                }
            }
        }
        proposers.clear();
        for &s in &touched_list {
            touched[s] = false;
            let cap = input.schools[s].capacity as usize;
            let pool = &mut held[s];
            if pool.len() > cap {
                pool.sort_unstable();
                proposers.extend(pool.drain(cap..).map(|(_, idx)| idx));
            }
        }
        touched_list.clear();
        proposers.sort_unstable();
    }

    let mut result: Vec<Option<SchoolId>> = vec![None; count];
    for (s, pool) in held.iter().enumerate() {
        for &(_, idx) in pool {
            result[idx] = Some(SchoolId(s as u32));
        }
    }
    Ok(input
        .rols
        .iter()
        .zip(result)
        .map(|((student, _), s)| (*student, s))
        .collect())
}

pub fn run_mechanism(
    mechanism: Mechanism,
    input: &DistrictInput,
) -> Result<DistrictMatching, MechanismError> {
    match mechanism {
        Mechanism::Boston => boston_match(input),
        Mechanism::DeferredAcceptance => deferred_acceptance_match(input),
    }
}

/// Where a student enrolls and what she submits there.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Enrollment {
    pub district: District,
    pub rol: Rol,
}

impl Enrollment {
    pub fn new(district: District, rol: Rol) -> Self {
        Enrollment { district, rol }
    }
}

/// Runs every district's mechanism on its enrolled students and merges the
/// results. `enrollments` holds exactly one entry per student, indexed by
/// `StudentId`.
pub fn run_multi_district(
    problem: &Problem,
    enrollments: &[Enrollment],
) -> Result<Matching, MechanismError> {
    let refs: Vec<(District, &Rol)> = enrollments.iter().map(|e| (e.district, &e.rol)).collect();
    run_multi_district_refs(problem, &refs)
}

pub(crate) fn run_multi_district_refs(
    problem: &Problem,
    enrollments: &[(District, &Rol)],
) -> Result<Matching, MechanismError> {
    if enrollments.len() != problem.students.len() {
        return Err(MechanismError::EnrollmentCount {
            expected: problem.students.len(),
            got: enrollments.len(),
        });
    }
    let mut matching = Matching::unassigned(problem.students.len());
    for district in District::ALL {
        let rols: Vec<(StudentId, &Rol)> = enrollments
            .iter()
            .enumerate()
            .filter(|(_, (d, rol))| *d == district && !rol.is_empty())
            .map(|(i, (_, rol))| (StudentId(i as u32), *rol))
            .collect();
        if rols.is_empty() {
            continue;
        }
        let input = DistrictInput {
            district,
            schools: &problem.schools,
            rols,
        };
        for (student, school) in run_mechanism(problem.mechanisms.get(district), &input)? {
            matching.set(student, school);
        }
    }
    Ok(matching)
}
