//! Brute-force oracles shared by the integration tests and the acceptance
//! suite. Nothing here calls the library's own stability or condition code.

#![allow(dead_code)]

use district_match::lab::Theorem;
use district_match::mechanisms::{run_mechanism, DistrictInput};
use district_match::model::{
    Constraint, District, Mechanism, Mechanisms, Problem, Rol, School, SchoolId, SincereMode,
    Sophistication, Student, StudentId,
};
use district_match::random::Category;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A single-district instance: every school is in L and every student
/// submits her full preference list.
pub struct Instance {
    pub problem: Problem,
}

impl Instance {
    pub fn rols(&self) -> Vec<Rol> {
        self.problem
            .students
            .iter()
            .map(|s| Rol(s.preferences.clone()))
            .collect()
    }
}

pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=6usize);
    let m = rng.gen_range(1..=6usize);
    let k = rng.gen_range(1..=m.min(3));
    let students = (0..n)
        .map(|i| {
            let len = rng.gen_range(0..=k);
            let mut all: Vec<u32> = (0..m as u32).collect();
            all.shuffle(&mut rng);
            Student {
                name: format!("s{i}"),
                residence: District::L,
                sophistication: Sophistication::Sincere,
                constraint: Constraint::Constrained,
                preferences: all[..len].iter().map(|&c| SchoolId(c)).collect(),
            }
        })
        .collect();
    let schools = (0..m)
        .map(|j| {
            let mut order: Vec<StudentId> = (0..n as u32).map(StudentId).collect();
            order.shuffle(&mut rng);
            School::new(format!("c{j}"), District::L, rng.gen_range(1..=2), order)
        })
        .collect();
    Instance {
        problem: Problem {
            students,
            schools,
            mechanisms: Mechanisms::new(Mechanism::Boston, Mechanism::DeferredAcceptance),
            mode: SincereMode::Naive,
        },
    }
}

/// Runs one mechanism on the instance with the given ROLs.
pub fn run(p: &Problem, mechanism: Mechanism, rols: &[Rol]) -> Vec<Option<SchoolId>> {
    let input = DistrictInput {
        district: District::L,
        schools: &p.schools,
        rols: rols
            .iter()
            .enumerate()
            .map(|(i, r)| (StudentId(i as u32), r))
            .collect(),
    };
    let out = run_mechanism(mechanism, &input).expect("valid instance");
    let mut m = vec![None; rols.len()];
    for (i, s) in out {
        m[i.index()] = s;
    }
    m
}

fn position(list: &[SchoolId], s: Option<SchoolId>) -> usize {
    match s {
        Some(s) => list.iter().position(|&x| x == s).unwrap_or(usize::MAX),
        None => list.len(),
    }
}

fn priority_pos(school: &School, i: usize) -> usize {
    school
        .priority()
        .iter()
        .position(|s| s.index() == i)
        .expect("complete priority")
}

pub fn feasible(p: &Problem, rols: &[Rol], m: &[Option<SchoolId>]) -> bool {
    let mut load = vec![0u32; p.schools.len()];
    for (i, s) in m.iter().enumerate() {
        if let Some(s) = s {
            if !rols[i].0.contains(s) {
                return false;
            }
            load[s.index()] += 1;
        }
    }
    load.iter().zip(&p.schools).all(|(&l, s)| l <= s.capacity)
}

pub fn stable(p: &Problem, rols: &[Rol], m: &[Option<SchoolId>]) -> bool {
    for (i, rol) in rols.iter().enumerate() {
        let mine = position(&rol.0, m[i]);
        for &s in &rol.0[..mine.min(rol.0.len())] {
            let school = &p.schools[s.index()];
            let holders: Vec<usize> = (0..m.len()).filter(|&j| m[j] == Some(s)).collect();
            if (holders.len() as u32) < school.capacity {
                return false;
            }
            if holders
                .iter()
                .any(|&j| priority_pos(school, j) > priority_pos(school, i))
            {
                return false;
            }
        }
    }
    true
}

/// The student-optimal stable matching, by enumerating every feasible
/// matching. `None` if no stable matching dominates all others.
pub fn student_optimal_stable(p: &Problem, rols: &[Rol]) -> Option<Vec<Option<SchoolId>>> {
    let n = rols.len();
    let mut stable_set = Vec::new();
    let mut choice = vec![0usize; n];
    loop {
        let m: Vec<Option<SchoolId>> = (0..n).map(|i| rols[i].0.get(choice[i]).copied()).collect();
        if feasible(p, rols, &m) && stable(p, rols, &m) {
            stable_set.push(m);
        }
        // odometer over ROL positions, the last value meaning unassigned
        let mut i = 0;
        loop {
            if i == n {
                return stable_set
                    .iter()
                    .find(|a| {
                        stable_set.iter().all(|b| {
                            (0..n).all(|j| position(&rols[j].0, a[j]) <= position(&rols[j].0, b[j]))
                        })
                    })
                    .cloned();
            }
            choice[i] += 1;
            if choice[i] <= rols[i].0.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Every ordering of every subset of `schools`.
pub fn all_rols(schools: &[SchoolId]) -> Vec<Rol> {
    let mut out = vec![Rol(Vec::new())];
    let mut frontier = vec![Vec::<SchoolId>::new()];
    for _ in 0..schools.len() {
        let mut next = Vec::new();
        for prefix in &frontier {
            for &s in schools {
                if !prefix.contains(&s) {
                    let mut v = prefix.clone();
                    v.push(s);
                    out.push(Rol(v.clone()));
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    out
}

#[derive(Debug, Default)]
pub struct SuiteReport {
    pub instances: usize,
    pub da_not_student_optimal: usize,
    pub da_manipulable: usize,
    pub bm_first_round: usize,
    pub infeasible: usize,
    pub first_failure: Option<String>,
}

impl SuiteReport {
    pub fn failures(&self) -> usize {
        self.da_not_student_optimal + self.da_manipulable + self.bm_first_round + self.infeasible
    }

    fn fail(&mut self, seed: u64, what: &str) {
        if self.first_failure.is_none() {
            self.first_failure = Some(format!("seed {seed}: {what}"));
        }
    }
}

/// Runs every mechanism property on `count` random instances.
pub fn mechanism_suite(count: u64) -> SuiteReport {
    let mut r = SuiteReport::default();
    for seed in 0..count {
        let inst = random_instance(seed);
        let p = &inst.problem;
        let rols = inst.rols();
        r.instances += 1;

        let da = run(p, Mechanism::DeferredAcceptance, &rols);
        let bm = run(p, Mechanism::Boston, &rols);

        if student_optimal_stable(p, &rols).as_deref() != Some(da.as_slice()) {
            r.da_not_student_optimal += 1;
            r.fail(seed, "DA differs from the student-optimal stable matching");
        }
        if !feasible(p, &rols, &da) || !feasible(p, &rols, &bm) {
            r.infeasible += 1;
            r.fail(seed, "capacity or ROL membership violated");
        }

        // first-round demand per school, capped by capacity
        let mut demand = vec![0u32; p.schools.len()];
        for rol in &rols {
            if let Some(s) = rol.0.first() {
                demand[s.index()] += 1;
            }
        }
        let expected: u32 = demand
            .iter()
            .zip(&p.schools)
            .map(|(&d, s)| d.min(s.capacity))
            .sum();
        let got = (0..rols.len())
            .filter(|&i| bm[i].is_some() && bm[i] == rols[i].0.first().copied())
            .count();
        if got as u32 != expected {
            r.bm_first_round += 1;
            r.fail(seed, "BM first-round count");
        }

        'students: for i in 0..rols.len() {
            let truth = &rols[i].0;
            let mut acceptable = truth.clone();
            acceptable.sort();
            for alt in all_rols(&acceptable) {
                let mut dev = rols.clone();
                dev[i] = alt;
                let out = run(p, Mechanism::DeferredAcceptance, &dev);
                if position(truth, out[i]) < position(truth, da[i]) {
                    r.da_manipulable += 1;
                    r.fail(seed, "DA profitable misreport");
                    break 'students;
                }
            }
        }
    }
    r
}

// ---- independent construction-condition oracle ----

fn prefs(p: &Problem, i: StudentId) -> &[SchoolId] {
    &p.students[i.index()].preferences
}

fn located(p: &Problem, s: SchoolId, d: District) -> bool {
    p.schools[s.index()].district == d
}

fn above(p: &Problem, s: SchoolId, a: StudentId, b: StudentId) -> bool {
    let order = p.schools[s.index()].priority();
    let pa = order.iter().position(|&x| x == a).unwrap();
    let pb = order.iter().position(|&x| x == b).unwrap();
    pa < pb
}

fn nobody_else_lists(p: &Problem, members: &[StudentId], schools: &[SchoolId]) -> bool {
    p.students.iter().enumerate().all(|(i, st)| {
        members.contains(&StudentId(i as u32))
            || st.preferences.iter().all(|s| !schools.contains(s))
    })
}

fn cat(p: &Problem, i: StudentId) -> Category {
    Category::of(&p.students[i.index()])
}

fn role_ok(theorem: Theorem, role: usize, c: Category, left: District) -> bool {
    let soph = c.sophistication == Sophistication::Sophisticated;
    let free = c.constraint == Constraint::Unconstrained;
    let home = c.residence == left;
    match theorem {
        Theorem::T1 => [
            !soph && home,
            !soph && free,
            soph && free,
            !soph && !home,
            !soph && !home,
        ][role],
        Theorem::T2 => [!soph && home, soph && home, soph && free][role],
        Theorem::L1 => [free, !free && home][role],
        Theorem::L2 => [!free && home, !free && !home, free][role],
    }
}

/// Named schools if the ordered tuple satisfies every condition.
pub fn oracle_check(
    p: &Problem,
    theorem: Theorem,
    left: District,
    t: &[StudentId],
) -> Option<Vec<SchoolId>> {
    let right = left.other();
    match theorem {
        Theorem::T1 => {
            let (a, b, c, d, e) = (
                prefs(p, t[0]),
                prefs(p, t[1]),
                prefs(p, t[2]),
                prefs(p, t[3]),
                prefs(p, t[4]),
            );
            if a.is_empty() || b.len() < 4 || c.len() < 2 || d.is_empty() || e.len() < 2 {
                return None;
            }
            let (l1, l2, r1, r2, r3, r4) = (a[0], c[0], e[0], d[0], c[1], e[1]);
            let named = vec![l1, l2, r1, r2, r3, r4];
            let distinct = (0..6).all(|x| (0..x).all(|y| named[x] != named[y]));
            let ok = distinct
                && located(p, l1, left)
                && located(p, l2, left)
                && [r1, r2, r3, r4].iter().all(|&s| located(p, s, right))
                && b[..4] == [l1, r2, r1, l2]
                && nobody_else_lists(p, t, &named)
                && above(p, l1, t[0], t[1])
                && above(p, l2, t[1], t[2])
                && above(p, r1, t[1], t[4])
                && above(p, r2, t[3], t[1]);
            ok.then_some(named)
        }
        Theorem::T2 => {
            let (a, b, c) = (prefs(p, t[0]), prefs(p, t[1]), prefs(p, t[2]));
            if a.len() < 2 || b.len() < 2 || c.len() < 2 {
                return None;
            }
            let (l1, l2, r1) = (a[0], a[1], c[1]);
            let ok = located(p, l1, left)
                && located(p, l2, left)
                && located(p, r1, right)
                && b[..2] == [l2, l1]
                && c[0] == l2
                && nobody_else_lists(p, t, &[l1, l2, r1])
                && above(p, l1, t[1], t[0])
                && above(p, l2, t[0], t[2])
                && above(p, l2, t[2], t[1]);
            ok.then(|| vec![l1, l2, r1])
        }
        Theorem::L1 => {
            let (a, b) = (prefs(p, t[0]), prefs(p, t[1]));
            if a.is_empty() || b.len() < 2 {
                return None;
            }
            let (l, r) = (a[0], b[0]);
            let ok = located(p, l, left)
                && located(p, r, right)
                && b[1] == l
                && nobody_else_lists(p, t, &[l, r])
                && above(p, l, t[1], t[0]);
            ok.then(|| vec![l, r])
        }
        Theorem::L2 => {
            let (a, b, c) = (prefs(p, t[0]), prefs(p, t[1]), prefs(p, t[2]));
            if a.is_empty() || b.len() < 2 || c.len() < 2 {
                return None;
            }
            let (l1, l2, r1) = (a[0], b[0], b[1]);
            let ok = located(p, l1, left)
                && located(p, l2, left)
                && l1 != l2
                && located(p, r1, right)
                && c[..2] == [r1, l1]
                && nobody_else_lists(p, t, &[l1, l2, r1])
                && above(p, l1, t[2], t[0])
                && above(p, r1, t[1], t[2]);
            ok.then(|| vec![l1, l2, r1])
        }
    }
}

/// Every ordered tuple passing [`oracle_check`], by exhaustive scan with
/// per-role category pruning. Items are (left, students, schools), sorted.
pub fn oracle_scan(
    p: &Problem,
    theorem: Theorem,
    lefts: &[District],
) -> Vec<(District, Vec<StudentId>, Vec<SchoolId>)> {
    let size = theorem.tuple_size();
    let n = p.students.len();
    let mut out = Vec::new();
    for &left in lefts {
        let mut tuple = Vec::with_capacity(size);
        extend(p, theorem, left, n, size, &mut tuple, &mut out);
    }
    out.sort();
    out
}

fn extend(
    p: &Problem,
    theorem: Theorem,
    left: District,
    n: usize,
    size: usize,
    tuple: &mut Vec<StudentId>,
    out: &mut Vec<(District, Vec<StudentId>, Vec<SchoolId>)>,
) {
    if tuple.len() == size {
        if let Some(s) = oracle_check(p, theorem, left, tuple) {
            out.push((left, tuple.clone(), s));
        }
        return;
    }
    for i in 0..n as u32 {
        let id = StudentId(i);
        if tuple.contains(&id) || !role_ok(theorem, tuple.len(), cat(p, id), left) {
            continue;
        }
        tuple.push(id);
        extend(p, theorem, left, n, size, tuple, out);
        tuple.pop();
    }
}
