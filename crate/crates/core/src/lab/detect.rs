//! Detection of construction tuples in a market.
//!
//! Candidates are generated from the positional links between members'
//! lists (for example, every T2 triplet has `i2` and `i3` ranking `i1`'s
//! second school first), then verified with [`check_tuple`]. Every tuple
//! satisfying the conditions is generated exactly once.

use rayon::prelude::*;

use super::conditions::check_tuple;
use super::{LabError, Theorem, WitnessTuple};
use crate::model::{District, Mechanism, Mechanisms, Problem, SchoolId, StudentId};

/// Districts that may play L for `theorem` under `mechanisms`.
pub fn labelings(theorem: Theorem, mechanisms: Mechanisms) -> Result<Vec<District>, LabError> {
    let uses = |m: Mechanism| -> Vec<District> {
        District::ALL
            .into_iter()
            .filter(|&d| mechanisms.get(d) == m)
            .collect()
    };
    match theorem {
        Theorem::T1 => {
            let da = uses(Mechanism::DeferredAcceptance);
            if da.len() != 1 {
                return Err(LabError::MechanismPrecondition {
                    theorem,
                    needed: "one district using DA and the other using BM",
                });
            }
            Ok(da)
        }
        Theorem::T2 => {
            let bm = uses(Mechanism::Boston);
            if bm.is_empty() {
                return Err(LabError::MechanismPrecondition {
                    theorem,
                    needed: "a district using BM",
                });
            }
            Ok(bm)
        }
        Theorem::L1 | Theorem::L2 => Ok(District::ALL.to_vec()),
    }
}

/// Students listing each school, with the position at which they list it.
struct Listers(Vec<Vec<(StudentId, usize)>>);

impl Listers {
    fn new(p: &Problem) -> Self {
        let mut v = vec![Vec::new(); p.schools.len()];
        for i in p.student_ids() {
            for (pos, s) in p.student(i).preferences.iter().enumerate() {
                v[s.index()].push((i, pos));
            }
        }
        Listers(v)
    }

    fn at(&self, school: SchoolId, pos: usize) -> impl Iterator<Item = StudentId> + '_ {
        self.0[school.index()]
            .iter()
            .filter(move |&&(_, q)| q == pos)
            .map(|&(i, _)| i)
    }
}

fn nth(p: &Problem, i: StudentId, pos: usize) -> Option<SchoolId> {
    p.student(i).preferences.get(pos).copied()
}

fn candidates_from(
    p: &Problem,
    theorem: Theorem,
    listers: &Listers,
    anchor: StudentId,
) -> Vec<Vec<StudentId>> {
    let mut out = Vec::new();
    match theorem {
        Theorem::T1 => {
            // anchor is i2, ranking l1 r2 r1 l2
            let (Some(l1), Some(r2), Some(r1), Some(l2)) = (
                nth(p, anchor, 0),
                nth(p, anchor, 1),
                nth(p, anchor, 2),
                nth(p, anchor, 3),
            ) else {
                return out;
            };
            for i1 in listers.at(l1, 0) {
                for i3 in listers.at(l2, 0) {
                    for i4 in listers.at(r2, 0) {
                        for i5 in listers.at(r1, 0) {
                            out.push(vec![i1, anchor, i3, i4, i5]);
                        }
                    }
                }
            }
        }
        Theorem::T2 => {
            // anchor is i1, ranking l1 l2
            let Some(l2) = nth(p, anchor, 1) else {
                return out;
            };
            for i2 in listers.at(l2, 0) {
                for i3 in listers.at(l2, 0) {
                    out.push(vec![anchor, i2, i3]);
                }
            }
        }
        Theorem::L1 => {
            let Some(l) = nth(p, anchor, 0) else {
                return out;
            };
            for i2 in listers.at(l, 1) {
                out.push(vec![anchor, i2]);
            }
        }
        Theorem::L2 => {
            let Some(l1) = nth(p, anchor, 0) else {
                return out;
            };
            for i3 in listers.at(l1, 1) {
                let Some(r1) = nth(p, i3, 0) else { continue };
                for i2 in listers.at(r1, 1) {
                    out.push(vec![anchor, i2, i3]);
                }
            }
        }
    }
    out
}

/// Every ordered tuple of `p` satisfying `theorem`'s conditions, for every
/// admissible labeling, sorted.
pub fn detect(p: &Problem, theorem: Theorem) -> Result<Vec<WitnessTuple>, LabError> {
    let lefts = labelings(theorem, p.mechanisms)?;
    if p.students.len() < theorem.tuple_size() {
        return Ok(Vec::new());
    }
    let listers = Listers::new(p);
    let mut hits: Vec<WitnessTuple> = p
        .student_ids()
        .collect::<Vec<_>>()
        .into_par_iter()
        .flat_map_iter(|anchor| {
            let cands = candidates_from(p, theorem, &listers, anchor);
            let mut found = Vec::new();
            for students in cands {
                for &left in &lefts {
                    if let Ok(schools) = check_tuple(p, theorem, left, &students) {
                        found.push(WitnessTuple {
                            theorem,
                            left,
                            students: students.clone(),
                            schools,
                        });
                    }
                }
            }
            found
        })
        .collect();
    hits.sort();
    Ok(hits)
}
