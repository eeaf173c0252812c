//! The hand-built example markets, and embedding of one market into another.

use std::fmt;
use std::str::FromStr;

use crate::model::{
    Constraint, District, Mechanism, Mechanisms, Problem, School, SchoolId, SincereMode,
    Sophistication, Student, StudentId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureName {
    /// Sincere student's sophistication helps a sophisticated one.
    Sec31,
    /// Sophisticated student prefers deferred acceptance in her district.
    Sec41,
    /// The preference cycle of length `x` generalizing `Sec41`.
    Cycle(u32),
}

impl fmt::Display for FixtureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixtureName::Sec31 => f.write_str("sec31"),
            FixtureName::Sec41 => f.write_str("sec41"),
            FixtureName::Cycle(x) => write!(f, "cycle{x}"),
        }
    }
}

impl FromStr for FixtureName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sec31" => Ok(FixtureName::Sec31),
            "sec41" => Ok(FixtureName::Sec41),
            _ => {
                let x = s
                    .strip_prefix("cycle")
                    .map(|r| r.trim_start_matches([':', '-', '(']).trim_end_matches(')'))
                    .and_then(|r| r.parse::<u32>().ok())
                    .ok_or_else(|| format!("unknown fixture `{s}` (sec31, sec41, cycle<x>)"))?;
                if x < 2 {
                    return Err("cycle length must be at least 2".into());
                }
                Ok(FixtureName::Cycle(x))
            }
        }
    }
}

struct Builder {
    students: Vec<Student>,
    schools: Vec<(String, District)>,
    partial: Vec<Vec<usize>>,
}

impl Builder {
    fn new(schools: &[(&str, District)]) -> Self {
        Builder {
            students: Vec::new(),
            schools: schools.iter().map(|(n, d)| (n.to_string(), *d)).collect(),
            partial: vec![Vec::new(); schools.len()],
        }
    }

    fn school(&self, name: &str) -> SchoolId {
        SchoolId(
            self.schools
                .iter()
                .position(|(n, _)| n == name)
                .expect("fixture school") as u32,
        )
    }

    fn student(
        &mut self,
        name: &str,
        soph: Sophistication,
        constraint: Constraint,
        residence: District,
        prefs: &[&str],
    ) {
        let preferences = prefs.iter().map(|s| self.school(s)).collect();
        self.students.push(Student {
            name: name.into(),
            residence,
            sophistication: soph,
            constraint,
            preferences,
        });
    }

    /// Priority over the named students; everyone else follows in id order.
    fn priority(&mut self, school: &str, order: &[usize]) {
        let s = self.school(school).index();
        self.partial[s] = order.to_vec();
    }

    fn build(self, mechanisms: Mechanisms) -> Problem {
        let n = self.students.len();
        let schools = self
            .schools
            .into_iter()
            .zip(self.partial)
            .map(|((name, d), listed)| {
                let mut order: Vec<StudentId> =
                    listed.iter().map(|&i| StudentId(i as u32)).collect();
                order.extend(
                    (0..n)
                        .filter(|i| !listed.contains(i))
                        .map(|i| StudentId(i as u32)),
                );
                School::new(name, d, 1, order)
            })
            .collect();
        Problem {
            students: self.students,
            schools,
            mechanisms,
            mode: SincereMode::Naive,
        }
    }
}

/// Builds a named example. `Sec31` uses DA in L and BM in R; the others use
/// BM in both districts (set L with [`Problem::with_mechanism`]).
pub fn build_fixture(name: FixtureName) -> Problem {
    use Constraint::*;
    use District::*;
    use Sophistication::*;
    match name {
        FixtureName::Sec31 => {
            let mut b = Builder::new(&[
                ("l1", L),
                ("l2", L),
                ("r1", R),
                ("r2", R),
                ("r3", R),
                ("r4", R),
            ]);
            b.student("i1", Sincere, Constrained, L, &["l1"]);
            b.student("i2", Sincere, Unconstrained, L, &["l1", "r2", "r1", "l2"]);
            b.student("i3", Sophisticated, Unconstrained, L, &["l2", "r3"]);
            b.student("i4", Sincere, Constrained, R, &["r2"]);
            b.student("i5", Sincere, Constrained, R, &["r1", "r4"]);
            b.priority("l1", &[0, 1]);
            b.priority("l2", &[1, 2]);
            b.priority("r1", &[1, 4]);
            b.priority("r2", &[3, 1]);
            b.priority("r3", &[2]);
            b.priority("r4", &[4]);
            b.build(Mechanisms::new(
                Mechanism::DeferredAcceptance,
                Mechanism::Boston,
            ))
        }
        FixtureName::Sec41 => {
            let mut b = Builder::new(&[("l1", L), ("l2", L), ("r1", R)]);
            b.student("i1", Sincere, Constrained, L, &["l1", "l2"]);
            b.student("i2", Sophisticated, Constrained, L, &["l2", "l1"]);
            b.student("i3", Sophisticated, Unconstrained, L, &["l2", "r1"]);
            b.priority("l1", &[1, 0]);
            b.priority("l2", &[0, 2, 1]);
            b.priority("r1", &[2]);
            b.build(Mechanisms::new(Mechanism::Boston, Mechanism::Boston))
        }
        FixtureName::Cycle(x) => {
            assert!(x >= 2, "cycle length must be at least 2");
            let x = x as usize;
            let names: Vec<String> = (1..=x)
                .map(|j| format!("l{j}"))
                .chain(["r1".into()])
                .collect();
            let districts: Vec<(&str, District)> = names
                .iter()
                .map(|n| (n.as_str(), if n.starts_with('l') { L } else { R }))
                .collect();
            let mut b = Builder::new(&districts);
            let l = |j: usize| format!("l{j}");
            b.student("i1", Sincere, Constrained, L, &[&l(1), &l(x)]);
            for j in 2..=x {
                b.student(
                    &format!("i{j}"),
                    Sophisticated,
                    Unconstrained,
                    L,
                    &[&l(j), &l(j - 1)],
                );
            }
            b.student(
                &format!("i{}", x + 1),
                Sophisticated,
                Unconstrained,
                L,
                &[&l(x), "r1"],
            );
            // student i_j has index j - 1
            for j in 1..x {
                b.priority(&l(j), &[j, j - 1]);
            }
            b.priority(&l(x), &[0, x, x - 1]);
            b.priority("r1", &[x]);
            b.build(Mechanisms::new(Mechanism::Boston, Mechanism::Boston))
        }
    }
}

/// Disjoint union of two markets. `host` keeps its ids; `guest` students and
/// schools are appended with `guest_prefix` prepended to their names. Each
/// school ranks its own market's students first, then the other market's
/// students in id order. Mechanisms and mode come from `host`.
pub fn embed(host: &Problem, guest: &Problem, guest_prefix: &str) -> Problem {
    let hn = host.students.len() as u32;
    let hm = host.schools.len() as u32;
    let gn = guest.students.len() as u32;
    let mut students = host.students.clone();
    students.extend(guest.students.iter().map(|s| Student {
        name: format!("{guest_prefix}{}", s.name),
        preferences: s.preferences.iter().map(|c| SchoolId(c.0 + hm)).collect(),
        ..s.clone()
    }));
    let mut schools: Vec<School> = host
        .schools
        .iter()
        .map(|s| {
            let mut order = s.priority().to_vec();
            order.extend((hn..hn + gn).map(StudentId));
            School::new(s.name.clone(), s.district, s.capacity, order)
        })
        .collect();
    schools.extend(guest.schools.iter().map(|s| {
        let mut order: Vec<StudentId> = s.priority().iter().map(|i| StudentId(i.0 + hn)).collect();
        order.extend((0..hn).map(StudentId));
        School::new(
            format!("{guest_prefix}{}", s.name),
            s.district,
            s.capacity,
            order,
        )
    }));
    Problem {
        students,
        schools,
        mechanisms: host.mechanisms,
        mode: host.mode,
    }
}
