//! JSON problem files.
//!
//! Schools may list only part of the student body in `priority`; the missing
//! students are appended below the listed ones in the order they appear in
//! the `students` array.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    validate_problem, Constraint, District, Mechanism, Mechanisms, Problem, School, SchoolId,
    SincereMode, Sophistication, Student, StudentId, Violation,
};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed problem file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid problem: {}", join(.0))]
    Invalid(Vec<Violation>),
}

fn join(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistrictEntry {
    pub label: District,
    pub mechanism: Mechanism,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchoolEntry {
    pub id: String,
    pub district: District,
    pub capacity: u32,
    #[serde(default)]
    pub priority: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudentEntry {
    pub id: String,
    pub residence: District,
    pub sophistication: Sophistication,
    pub constraint: Constraint,
    #[serde(default)]
    pub preferences: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub districts: Vec<DistrictEntry>,
    pub schools: Vec<SchoolEntry>,
    pub students: Vec<StudentEntry>,
    #[serde(default)]
    pub mode: SincereMode,
}

impl ProblemFile {
    pub fn from_problem(p: &Problem) -> Self {
        let student_name = |s: &StudentId| p.student(*s).name.clone();
        ProblemFile {
            districts: District::ALL
                .iter()
                .map(|&d| DistrictEntry {
                    label: d,
                    mechanism: p.mechanisms.get(d),
                })
                .collect(),
            schools: p
                .schools
                .iter()
                .map(|s| SchoolEntry {
                    id: s.name.clone(),
                    district: s.district,
                    capacity: s.capacity,
                    priority: s.priority().iter().map(student_name).collect(),
                })
                .collect(),
            students: p
                .students
                .iter()
                .map(|s| StudentEntry {
                    id: s.name.clone(),
                    residence: s.residence,
                    sophistication: s.sophistication,
                    constraint: s.constraint,
                    preferences: s
                        .preferences
                        .iter()
                        .map(|&c| p.school(c).name.clone())
                        .collect(),
                })
                .collect(),
            mode: p.mode,
        }
    }

    /// Resolves names, completes partial priorities and validates.
    pub fn into_problem(self) -> Result<Problem, LoadError> {
        let mut violations = Vec::new();

        let mut mech: [Option<Mechanism>; 2] = [None, None];
        for d in &self.districts {
            if mech[d.label.index()].replace(d.mechanism).is_some() {
                violations.push(Violation::new(
                    format!("district {}", d.label),
                    "declared more than once",
                ));
            }
        }
        for d in District::ALL {
            if mech[d.index()].is_none() {
                violations.push(Violation::new(format!("district {d}"), "missing"));
            }
        }

        let student_index: HashMap<&str, StudentId> = self
            .students
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), StudentId(i as u32)))
            .collect();
        let school_index: HashMap<&str, SchoolId> = self
            .schools
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), SchoolId(i as u32)))
            .collect();

        let students = self
            .students
            .iter()
            .map(|s| {
                let preferences = s
                    .preferences
                    .iter()
                    .filter_map(|name| match school_index.get(name.as_str()) {
                        Some(&id) => Some(id),
                        None => {
                            violations.push(Violation::new(
                                format!("student {}", s.id),
                                format!("preference lists nonexistent school {name}"),
                            ));
                            None
                        }
                    })
                    .collect();
                Student {
                    name: s.id.clone(),
                    residence: s.residence,
                    sophistication: s.sophistication,
                    constraint: s.constraint,
                    preferences,
                }
            })
            .collect();

        let n = self.students.len();
        let schools = self
            .schools
            .iter()
            .map(|s| {
                let mut placed = vec![false; n];
                let mut priority = Vec::with_capacity(n);
                for name in &s.priority {
                    match student_index.get(name.as_str()) {
                        Some(&id) if !placed[id.index()] => {
                            placed[id.index()] = true;
                            priority.push(id);
                        }
                        Some(_) => violations.push(Violation::new(
                            format!("school {}", s.id),
                            format!("priority lists student {name} more than once"),
                        )),
                        None => violations.push(Violation::new(
                            format!("school {}", s.id),
                            format!("priority names nonexistent student {name}"),
                        )),
                    }
                }
                priority.extend((0..n).filter(|&i| !placed[i]).map(|i| StudentId(i as u32)));
                School::new(s.id.clone(), s.district, s.capacity, priority)
            })
            .collect();

        let problem = Problem {
            students,
            schools,
            mechanisms: Mechanisms::new(
                mech[0].unwrap_or(Mechanism::Boston),
                mech[1].unwrap_or(Mechanism::Boston),
            ),
            mode: self.mode,
        };
        violations.extend(validate_problem(&problem));
        if violations.is_empty() {
            Ok(problem)
        } else {
            Err(LoadError::Invalid(violations))
        }
    }
}

pub fn parse_problem(json: &str) -> Result<Problem, LoadError> {
    serde_json::from_str::<ProblemFile>(json)?.into_problem()
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<Problem, LoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_problem(&text)
}

pub fn problem_to_json(p: &Problem) -> String {
    serde_json::to_string_pretty(&ProblemFile::from_problem(p)).expect("problem serializes")
}
