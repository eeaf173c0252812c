//! Pure-strategy Nash equilibria of the game induced by a multi-district
//! problem, and the counterfactual "does student i prefer world C to world
//! B" predicate that quantifies over all equilibria of both worlds.
//!
//! Enumeration builds a payoff table over the full profile space (one
//! mechanism run per profile), then checks every profile against every
//! unilateral deviation by table lookup. Profiles are numbered in mixed
//! radix with the lowest student id most significant, so index order is
//! lexicographic order by (student id, strategy index).

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::behavior::{fixed_enrollment, is_strategic, strategy_space, Strategy};
use crate::mechanisms::{run_multi_district_refs, MechanismError};
use crate::model::{
    compare_assignment, AssignmentPreference, Constraint, District, Matching, Mechanism, Problem,
    Rol, SchoolId, Sophistication, StudentId,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquilibriumError {
    #[error("profile is missing strategic players: {0:?}")]
    MissingPlayers(Vec<String>),
    #[error("profile names non-strategic or unknown players: {0:?}")]
    ExtraPlayers(Vec<String>),
    #[error("strategy for {0} is outside her strategy space")]
    InvalidStrategy(String),
    #[error("profile space has {size} profiles, budget is {budget}")]
    BudgetExceeded { size: u128, budget: u64 },
    #[error("transform references unknown student #{0}")]
    UnknownStudent(u32),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

/// Choices of the strategic players, keyed by student.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct StrategyProfile {
    pub choices: BTreeMap<StudentId, Strategy>,
}

impl StrategyProfile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, student: StudentId, strategy: Strategy) -> Self {
        self.choices.insert(student, strategy);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deviation {
    pub student: StudentId,
    pub strategy: Strategy,
    pub from: Option<SchoolId>,
    pub to: Option<SchoolId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NashCheck {
    Yes,
    No(Deviation),
}

impl NashCheck {
    pub fn is_yes(&self) -> bool {
        matches!(self, NashCheck::Yes)
    }
}

#[derive(Debug, Clone)]
pub struct EquilibriumSet {
    pub players: Vec<StudentId>,
    pub strategy_space_sizes: Vec<usize>,
    pub profiles_scanned: u64,
    pub profiles: Vec<StrategyProfile>,
    /// Distinct matchings, in order of first appearance among `profiles`.
    pub outcomes: Vec<Matching>,
}

/// Strategic players and their strategy spaces for one problem.
pub struct Game<'p> {
    problem: &'p Problem,
    players: Vec<StudentId>,
    spaces: Vec<Vec<Strategy>>,
    fixed: Vec<Option<(District, Rol)>>,
    empty: Rol,
}

impl<'p> Game<'p> {
    pub fn new(problem: &'p Problem) -> Self {
        let mut players = Vec::new();
        let mut spaces = Vec::new();
        let mut fixed = Vec::with_capacity(problem.students.len());
        for id in problem.student_ids() {
            if is_strategic(problem.student(id), problem.mode) {
                players.push(id);
                spaces.push(strategy_space(problem, id).expect("strategic player"));
                fixed.push(None);
            } else {
                let e = fixed_enrollment(problem, id).expect("fixed player");
                fixed.push(Some((e.district, e.rol)));
            }
        }
        Game {
            problem,
            players,
            spaces,
            fixed,
            empty: Rol::empty(),
        }
    }

    pub fn players(&self) -> &[StudentId] {
        &self.players
    }

    pub fn spaces(&self) -> &[Vec<Strategy>] {
        &self.spaces
    }

    /// Size of the profile space, saturating at `u128::MAX`.
    pub fn profile_count(&self) -> u128 {
        self.spaces
            .iter()
            .try_fold(1u128, |acc, s| acc.checked_mul(s.len() as u128))
            .unwrap_or(u128::MAX)
    }

    fn evaluate_indices(&self, choice: &[usize]) -> Result<Matching, MechanismError> {
        let mut refs: Vec<(District, &Rol)> = Vec::with_capacity(self.fixed.len());
        let mut next = 0;
        for (i, f) in self.fixed.iter().enumerate() {
            match f {
                Some((d, rol)) => refs.push((*d, rol)),
                None => {
                    let strategy = &self.spaces[next][choice[next]];
                    refs.push(strategy.district_and_rol(&self.problem.students[i], &self.empty));
                    next += 1;
                }
            }
        }
        run_multi_district_refs(self.problem, &refs)
    }

    fn decode(&self, mut index: u64, out: &mut [usize]) {
        for p in (0..self.spaces.len()).rev() {
            let radix = self.spaces[p].len() as u64;
            out[p] = (index % radix) as usize;
            index /= radix;
        }
    }

    fn profile_from_indices(&self, choice: &[usize]) -> StrategyProfile {
        StrategyProfile {
            choices: self
                .players
                .iter()
                .zip(choice)
                .enumerate()
                .map(|(p, (&id, &c))| (id, self.spaces[p][c].clone()))
                .collect(),
        }
    }

    fn indices_from_profile(
        &self,
        profile: &StrategyProfile,
    ) -> Result<Vec<usize>, EquilibriumError> {
        let name = |id: &StudentId| {
            self.problem
                .students
                .get(id.index())
                .map(|s| s.name.clone())
                .unwrap_or_else(|| format!("#{}", id.0))
        };
        let missing: Vec<String> = self
            .players
            .iter()
            .filter(|id| !profile.choices.contains_key(id))
            .map(name)
            .collect();
        if !missing.is_empty() {
            return Err(EquilibriumError::MissingPlayers(missing));
        }
        let extra: Vec<String> = profile
            .choices
            .keys()
            .filter(|id| !self.players.contains(id))
            .map(name)
            .collect();
        if !extra.is_empty() {
            return Err(EquilibriumError::ExtraPlayers(extra));
        }
        self.players
            .iter()
            .enumerate()
            .map(|(p, id)| {
                let s = &profile.choices[id];
                self.spaces[p]
                    .iter()
                    .position(|x| x == s)
                    .ok_or_else(|| EquilibriumError::InvalidStrategy(name(id)))
            })
            .collect()
    }
}

/// Matching produced when the strategic players follow `profile` and
/// everyone else behaves sincerely.
pub fn evaluate_profile(
    problem: &Problem,
    profile: &StrategyProfile,
) -> Result<Matching, EquilibriumError> {
    let game = Game::new(problem);
    let choice = game.indices_from_profile(profile)?;
    Ok(game.evaluate_indices(&choice)?)
}

/// Checks every unilateral deviation of every strategic player directly.
pub fn is_nash(
    problem: &Problem,
    profile: &StrategyProfile,
) -> Result<NashCheck, EquilibriumError> {
    let game = Game::new(problem);
    let mut choice = game.indices_from_profile(profile)?;
    let base = game.evaluate_indices(&choice)?;
    for (p, &id) in game.players.iter().enumerate() {
        let student = problem.student(id);
        let current = choice[p];
        for alt in 0..game.spaces[p].len() {
            if alt == current {
                continue;
            }
            choice[p] = alt;
            let deviated = game.evaluate_indices(&choice)?;
            if compare_assignment(student, deviated.get(id), base.get(id))
                == AssignmentPreference::PrefersA
            {
                return Ok(NashCheck::No(Deviation {
                    student: id,
                    strategy: game.spaces[p][alt].clone(),
                    from: base.get(id),
                    to: deviated.get(id),
                }));
            }
        }
        choice[p] = current;
    }
    Ok(NashCheck::Yes)
}

pub const DEFAULT_BUDGET: u64 = 2_000_000;

/// All pure-strategy Nash equilibria, by exhaustive scan of the profile
/// space.
pub fn enumerate_equilibria(
    problem: &Problem,
    budget: u64,
) -> Result<EquilibriumSet, EquilibriumError> {
    let game = Game::new(problem);
    let size = game.profile_count();
    if size > budget as u128 {
        return Err(EquilibriumError::BudgetExceeded { size, budget });
    }
    let total = size as u64;
    let players = game.players.len();

    // payoff keys of every player in every profile; lower is better
    let keys: Vec<u32> = {
        let chunk = 1024u64;
        let chunks: Result<Vec<Vec<u32>>, MechanismError> = (0..total.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut choice = vec![0usize; players];
                let mut out = Vec::with_capacity((chunk as usize) * players);
                for idx in c * chunk..((c + 1) * chunk).min(total) {
                    game.decode(idx, &mut choice);
                    let m = game.evaluate_indices(&choice)?;
                    for &id in &game.players {
                        out.push(problem.student(id).assignment_key(m.get(id)) as u32);
                    }
                }
                Ok(out)
            })
            .collect();
        chunks?.concat()
    };

    let mut strides = vec![1u64; players];
    for p in (0..players.saturating_sub(1)).rev() {
        strides[p] = strides[p + 1] * game.spaces[p + 1].len() as u64;
    }

    let equilibria: Vec<u64> = (0..total)
        .into_par_iter()
        .filter(|&idx| {
            let mut rest = idx;
            (0..players).all(|p| {
                let radix = game.spaces[p].len() as u64;
                let cur = (rest / strides[p]) % radix;
                rest %= strides[p];
                let own = keys[(idx as usize) * players + p];
                (0..radix).all(|alt| {
                    let dev = idx - cur * strides[p] + alt * strides[p];
                    keys[(dev as usize) * players + p] >= own
                })
            })
        })
        .collect();

    let mut choice = vec![0usize; players];
    let mut profiles = Vec::with_capacity(equilibria.len());
    let mut outcomes = Vec::new();
    let mut seen = HashSet::new();
    for idx in equilibria {
        game.decode(idx, &mut choice);
        profiles.push(game.profile_from_indices(&choice));
        let m = game.evaluate_indices(&choice)?;
        if seen.insert(m.clone()) {
            outcomes.push(m);
        }
    }

    Ok(EquilibriumSet {
        players: game.players.clone(),
        strategy_space_sizes: game.spaces.iter().map(Vec::len).collect(),
        profiles_scanned: total,
        profiles,
        outcomes,
    })
}

/// A single change to a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    SetSophistication(StudentId, Sophistication),
    SetConstraint(StudentId, Constraint),
    SetMechanism(District, Mechanism),
}

impl Transform {
    pub fn apply(&self, problem: &Problem) -> Result<Problem, EquilibriumError> {
        self.check(problem)?;
        let p = problem.clone();
        Ok(match *self {
            Transform::SetSophistication(id, s) => p.with_sophistication(id, s),
            Transform::SetConstraint(id, c) => p.with_constraint(id, c),
            Transform::SetMechanism(d, m) => p.with_mechanism(d, m),
        })
    }

    /// The transform that restores `problem`'s current value.
    pub fn inverse(&self, problem: &Problem) -> Result<Transform, EquilibriumError> {
        self.check(problem)?;
        Ok(match *self {
            Transform::SetSophistication(id, _) => {
                Transform::SetSophistication(id, problem.student(id).sophistication)
            }
            Transform::SetConstraint(id, _) => {
                Transform::SetConstraint(id, problem.student(id).constraint)
            }
            Transform::SetMechanism(d, _) => Transform::SetMechanism(d, problem.mechanisms.get(d)),
        })
    }

    fn check(&self, problem: &Problem) -> Result<(), EquilibriumError> {
        match *self {
            Transform::SetSophistication(id, _) | Transform::SetConstraint(id, _)
                if id.index() >= problem.students.len() =>
            {
                Err(EquilibriumError::UnknownStudent(id.0))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
    /// One of the two worlds has no pure-strategy equilibrium.
    Undefined,
}

#[derive(Debug, Clone)]
pub struct WorldComparison {
    pub baseline: EquilibriumSet,
    pub counterfactual: EquilibriumSet,
    pub answer: Answer,
    /// Some outcome pairs satisfy the comparison and some do not.
    pub mixed: bool,
}

/// Compares `student`'s assignments across every pair of equilibrium
/// outcomes of `problem` (baseline) and `transform(problem)`.
pub fn compare_worlds(
    problem: &Problem,
    student: StudentId,
    transform: Transform,
    strict: bool,
    budget: u64,
) -> Result<WorldComparison, EquilibriumError> {
    if student.index() >= problem.students.len() {
        return Err(EquilibriumError::UnknownStudent(student.0));
    }
    let baseline = enumerate_equilibria(problem, budget)?;
    let counterfactual = enumerate_equilibria(&transform.apply(problem)?, budget)?;
    let s = problem.student(student);
    let mut holds = 0usize;
    let mut fails = 0usize;
    for b in &baseline.outcomes {
        for c in &counterfactual.outcomes {
            let ok = match compare_assignment(s, c.get(student), b.get(student)) {
                AssignmentPreference::PrefersA => true,
                AssignmentPreference::Indifferent => !strict,
                AssignmentPreference::PrefersB => false,
            };
            if ok {
                holds += 1;
            } else {
                fails += 1;
            }
        }
    }
    let answer = if baseline.outcomes.is_empty() || counterfactual.outcomes.is_empty() {
        Answer::Undefined
    } else if fails == 0 {
        Answer::Yes
    } else {
        Answer::No
    };
    Ok(WorldComparison {
        baseline,
        counterfactual,
        answer,
        mixed: holds > 0 && fails > 0,
    })
}

/// Whether `student` prefers (strictly, or weakly) her assignment in every
/// equilibrium after `transform` to her assignment in every equilibrium
/// before it.
pub fn prefers(
    problem: &Problem,
    student: StudentId,
    transform: Transform,
    strict: bool,
    budget: u64,
) -> Result<Answer, EquilibriumError> {
    Ok(compare_worlds(problem, student, transform, strict, budget)?.answer)
}
