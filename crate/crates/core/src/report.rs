//! Serializable equilibrium reports keyed by student and school names.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::behavior::Strategy;
use crate::equilibrium::{enumerate_equilibria, EquilibriumError, EquilibriumSet, StrategyProfile};
use crate::model::{District, Matching, Mechanism, Problem, SincereMode};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub student: String,
    /// `None` when unassigned.
    pub school: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Choice {
    pub student: String,
    /// `None` for the empty list.
    pub district: Option<District>,
    pub rol: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlayerSummary {
    pub student: String,
    pub strategies: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub mechanisms: BTreeMap<District, Mechanism>,
    pub mode: SincereMode,
    pub players: Vec<PlayerSummary>,
    pub profiles_scanned: u64,
    pub wall_time_ms: f64,
    pub equilibria: Vec<Vec<Choice>>,
    pub outcomes: Vec<Vec<Assignment>>,
}

pub fn outcome_names(p: &Problem, m: &Matching) -> Vec<Assignment> {
    m.iter()
        .map(|(i, s)| Assignment {
            student: p.student(i).name.clone(),
            school: s.map(|s| p.school(s).name.clone()),
        })
        .collect()
}

pub fn profile_names(p: &Problem, profile: &StrategyProfile) -> Vec<Choice> {
    profile
        .choices
        .iter()
        .map(|(&i, s)| {
            let student = p.student(i).name.clone();
            match s {
                Strategy::Abstain => Choice {
                    student,
                    district: None,
                    rol: Vec::new(),
                },
                Strategy::Enroll { district, rol } => Choice {
                    student,
                    district: Some(*district),
                    rol: rol
                        .schools()
                        .iter()
                        .map(|&c| p.school(c).name.clone())
                        .collect(),
                },
            }
        })
        .collect()
}

impl EquilibriumReport {
    pub fn new(p: &Problem, set: &EquilibriumSet, wall_time_ms: f64) -> Self {
        EquilibriumReport {
            mechanisms: District::ALL
                .into_iter()
                .map(|d| (d, p.mechanisms.get(d)))
                .collect(),
            mode: p.mode,
            players: set
                .players
                .iter()
                .zip(&set.strategy_space_sizes)
                .map(|(&i, &n)| PlayerSummary {
                    student: p.student(i).name.clone(),
                    strategies: n,
                })
                .collect(),
            profiles_scanned: set.profiles_scanned,
            wall_time_ms,
            equilibria: set.profiles.iter().map(|pr| profile_names(p, pr)).collect(),
            outcomes: set.outcomes.iter().map(|m| outcome_names(p, m)).collect(),
        }
    }
}

/// Enumerates the equilibria of `p` and times the scan.
pub fn solve(p: &Problem, budget: u64) -> Result<EquilibriumReport, EquilibriumError> {
    let start = Instant::now();
    let set = enumerate_equilibria(p, budget)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(EquilibriumReport::new(p, &set, ms))
}
