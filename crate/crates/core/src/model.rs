//! Students, schools, districts and the two-district school choice problem.
//!
//! Identifiers are dense indices: `StudentId(i)` is the `i`-th entry of
//! [`Problem::students`] and `SchoolId(s)` the `s`-th entry of
//! [`Problem::schools`]. Human-readable labels live in the `name` fields and
//! are only used for IO and reports.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum District {
    L,
    R,
}

impl District {
    pub const ALL: [District; 2] = [District::L, District::R];

    pub fn other(self) -> District {
        match self {
            District::L => District::R,
            District::R => District::L,
        }
    }

    pub fn index(self) -> usize {
        match self {
            District::L => 0,
            District::R => 1,
        }
    }
}

impl fmt::Display for District {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            District::L => f.write_str("L"),
            District::R => f.write_str("R"),
        }
    }
}

impl FromStr for District {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "L" | "l" => Ok(District::L),
            "R" | "r" => Ok(District::R),
            other => Err(format!("unknown district `{other}` (expected L or R)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mechanism {
    /// Boston mechanism (immediate acceptance).
    #[serde(rename = "BM")]
    Boston,
    /// Student-proposing deferred acceptance.
    #[serde(rename = "DA")]
    DeferredAcceptance,
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mechanism::Boston => f.write_str("BM"),
            Mechanism::DeferredAcceptance => f.write_str("DA"),
        }
    }
}

impl FromStr for Mechanism {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "BM" | "BOSTON" | "IA" => Ok(Mechanism::Boston),
            "DA" => Ok(Mechanism::DeferredAcceptance),
            other => Err(format!("unknown mechanism `{other}` (expected BM or DA)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sophistication {
    Sincere,
    Sophisticated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    Constrained,
    Unconstrained,
}

impl FromStr for Sophistication {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "sincere" => Ok(Sophistication::Sincere),
            "sophisticated" => Ok(Sophistication::Sophisticated),
            other => Err(format!(
                "unknown sophistication `{other}` (expected sincere or sophisticated)"
            )),
        }
    }
}

impl FromStr for Constraint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "constrained" => Ok(Constraint::Constrained),
            "unconstrained" => Ok(Constraint::Unconstrained),
            other => Err(format!(
                "unknown constraint `{other}` (expected constrained or unconstrained)"
            )),
        }
    }
}

/// How sincere-unconstrained students pick their district.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SincereMode {
    /// Enroll in the district of the first-choice school.
    #[default]
    Naive,
    /// Report truthfully, but pick the district strategically.
    DistrictStrategic,
}

impl FromStr for SincereMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "naive" => Ok(SincereMode::Naive),
            "strategic" | "district_strategic" => Ok(SincereMode::DistrictStrategic),
            other => Err(format!(
                "unknown mode `{other}` (expected naive or strategic)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StudentId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SchoolId(pub u32);

impl StudentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl SchoolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Student {
    pub name: String,
    pub residence: District,
    pub sophistication: Sophistication,
    pub constraint: Constraint,
    /// Strict preference list; schools not listed are unacceptable.
    pub preferences: Vec<SchoolId>,
}

impl Student {
    pub fn rank_of(&self, school: SchoolId) -> Option<usize> {
        self.preferences.iter().position(|&s| s == school)
    }

    pub fn finds_acceptable(&self, school: SchoolId) -> bool {
        self.preferences.contains(&school)
    }

    /// Ordinal key of an assignment: smaller is better. Listed schools come
    /// first, then unassigned, then every unacceptable school (tied).
    pub fn assignment_key(&self, assignment: Option<SchoolId>) -> usize {
        match assignment {
            None => self.preferences.len(),
            Some(s) => self.rank_of(s).unwrap_or(self.preferences.len() + 1),
        }
    }
}

/// A school with a strict priority order over students.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct School {
    pub name: String,
    pub district: District,
    pub capacity: u32,
    priority: Vec<StudentId>,
    rank: Vec<u32>,
}

impl School {
    pub fn new(
        name: impl Into<String>,
        district: District,
        capacity: u32,
        priority: Vec<StudentId>,
    ) -> Self {
        let len = priority.iter().map(|s| s.index() + 1).max().unwrap_or(0);
        let mut rank = vec![u32::MAX; len];
        for (pos, s) in priority.iter().enumerate() {
            // first occurrence wins; duplicates are reported by validation
            if rank[s.index()] == u32::MAX {
                rank[s.index()] = pos as u32;
            }
        }
        School {
            name: name.into(),
            district,
            capacity,
            priority,
            rank,
        }
    }

    /// Priority order, highest first.
    pub fn priority(&self) -> &[StudentId] {
        &self.priority
    }

    /// Position of `student` in the priority order (0 = highest). Students
    /// missing from the order rank below everyone.
    pub fn rank(&self, student: StudentId) -> u32 {
        self.rank.get(student.index()).copied().unwrap_or(u32::MAX)
    }

    pub fn prefers(&self, a: StudentId, b: StudentId) -> bool {
        self.rank(a) < self.rank(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mechanisms {
    pub l: Mechanism,
    pub r: Mechanism,
}

impl Mechanisms {
    pub fn new(l: Mechanism, r: Mechanism) -> Self {
        Mechanisms { l, r }
    }

    pub fn get(&self, d: District) -> Mechanism {
        match d {
            District::L => self.l,
            District::R => self.r,
        }
    }

    pub fn set(&mut self, d: District, m: Mechanism) {
        match d {
            District::L => self.l = m,
            District::R => self.r = m,
        }
    }
}

/// A rank-order list submitted to one district's mechanism.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rol(pub Vec<SchoolId>);

impl Rol {
    pub fn empty() -> Self {
        Rol(Vec::new())
    }

    pub fn schools(&self) -> &[SchoolId] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub students: Vec<Student>,
    pub schools: Vec<School>,
    pub mechanisms: Mechanisms,
    pub mode: SincereMode,
}

impl Problem {
    pub fn student(&self, id: StudentId) -> &Student {
        &self.students[id.index()]
    }

    pub fn school(&self, id: SchoolId) -> &School {
        &self.schools[id.index()]
    }

    pub fn student_ids(&self) -> impl Iterator<Item = StudentId> + '_ {
        (0..self.students.len() as u32).map(StudentId)
    }

    pub fn school_ids(&self) -> impl Iterator<Item = SchoolId> + '_ {
        (0..self.schools.len() as u32).map(SchoolId)
    }

    pub fn district_of(&self, school: SchoolId) -> District {
        self.school(school).district
    }

    pub fn find_student(&self, name: &str) -> Option<StudentId> {
        self.students
            .iter()
            .position(|s| s.name == name)
            .map(|i| StudentId(i as u32))
    }

    pub fn find_school(&self, name: &str) -> Option<SchoolId> {
        self.schools
            .iter()
            .position(|s| s.name == name)
            .map(|i| SchoolId(i as u32))
    }

    pub fn with_mechanism(mut self, district: District, mechanism: Mechanism) -> Self {
        self.mechanisms.set(district, mechanism);
        self
    }

    pub fn with_mode(mut self, mode: SincereMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_sophistication(mut self, id: StudentId, s: Sophistication) -> Self {
        self.students[id.index()].sophistication = s;
        self
    }

    pub fn with_constraint(mut self, id: StudentId, c: Constraint) -> Self {
        self.students[id.index()].constraint = c;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignmentPreference {
    PrefersA,
    Indifferent,
    PrefersB,
}

/// Ordinal comparison of two assignments under the student's true preferences.
pub fn compare_assignment(
    student: &Student,
    a: Option<SchoolId>,
    b: Option<SchoolId>,
) -> AssignmentPreference {
    if a == b {
        return AssignmentPreference::Indifferent;
    }
    match student.assignment_key(a).cmp(&student.assignment_key(b)) {
        Ordering::Less => AssignmentPreference::PrefersA,
        Ordering::Equal => AssignmentPreference::Indifferent,
        Ordering::Greater => AssignmentPreference::PrefersB,
    }
}

/// Assignment of every student of a problem to a school or to nothing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    assignment: Vec<Option<SchoolId>>,
}

impl Matching {
    pub fn unassigned(students: usize) -> Self {
        Matching {
            assignment: vec![None; students],
        }
    }

    pub fn from_vec(assignment: Vec<Option<SchoolId>>) -> Self {
        Matching { assignment }
    }

    pub fn get(&self, student: StudentId) -> Option<SchoolId> {
        self.assignment[student.index()]
    }

    pub fn set(&mut self, student: StudentId, school: Option<SchoolId>) {
        self.assignment[student.index()] = school;
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (StudentId, Option<SchoolId>)> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .map(|(i, &s)| (StudentId(i as u32), s))
    }

    pub fn as_slice(&self) -> &[Option<SchoolId>] {
        &self.assignment
    }

    /// Number of students assigned to each school, indexed by school.
    pub fn loads(&self, schools: usize) -> Vec<u32> {
        let mut loads = vec![0u32; schools];
        for s in self.assignment.iter().flatten() {
            loads[s.index()] += 1;
        }
        loads
    }

    pub fn respects_capacities(&self, problem: &Problem) -> bool {
        self.loads(problem.schools.len())
            .iter()
            .zip(&problem.schools)
            .all(|(&load, school)| load <= school.capacity)
    }
}

/// One invariant violation found by [`validate_problem`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub subject: String,
    pub message: String,
}

impl Violation {
    pub fn new(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            subject: subject.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

/// Every invariant violation of `problem`; empty when the problem is valid.
pub fn validate_problem(problem: &Problem) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = problem.students.len();
    let m = problem.schools.len();

    let mut seen = std::collections::HashSet::new();
    for s in &problem.students {
        if !seen.insert(s.name.as_str()) {
            out.push(Violation::new(
                format!("student {}", s.name),
                "duplicate student id",
            ));
        }
    }
    seen.clear();
    for s in &problem.schools {
        if !seen.insert(s.name.as_str()) {
            out.push(Violation::new(
                format!("school {}", s.name),
                "duplicate school id",
            ));
        }
    }

    for student in &problem.students {
        let subject = format!("student {}", student.name);
        let mut listed = vec![false; m];
        for &school in &student.preferences {
            if school.index() >= m {
                out.push(Violation::new(
                    &subject,
                    format!("preference lists nonexistent school #{}", school.0),
                ));
                continue;
            }
            if listed[school.index()] {
                out.push(Violation::new(
                    &subject,
                    format!(
                        "preference lists school {} more than once",
                        problem.school(school).name
                    ),
                ));
            }
            listed[school.index()] = true;
        }
    }

    for school in &problem.schools {
        let subject = format!("school {}", school.name);
        if school.capacity == 0 {
            out.push(Violation::new(&subject, "capacity must be at least 1"));
        }
        let mut present = vec![false; n];
        for &s in school.priority() {
            if s.index() >= n {
                out.push(Violation::new(
                    &subject,
                    format!("priority names nonexistent student #{}", s.0),
                ));
            } else if present[s.index()] {
                out.push(Violation::new(
                    &subject,
                    format!(
                        "priority lists student {} more than once",
                        problem.student(s).name
                    ),
                ));
            } else {
                present[s.index()] = true;
            }
        }
        for (i, _) in present.iter().enumerate().filter(|(_, &p)| !p) {
            out.push(Violation::new(
                &subject,
                format!("priority omits student {}", problem.students[i].name),
            ));
        }
    }
    out
}
