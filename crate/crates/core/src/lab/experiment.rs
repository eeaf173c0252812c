//! Seeded Monte Carlo experiments over random markets.
//!
//! Detection mode counts every construction tuple in each sampled market and
//! compares the mean against the analytic expectation (admissible labelings
//! times ordered tuples times the per-tuple probability). Fixed-tuple mode
//! tests only the first students of each market, with L playing L, and
//! compares the hit frequency against the per-tuple probability directly.
//!
//! Each trial draws its market from a seed derived from the master seed, n
//! and the trial index, so any row can be replayed on its own.

use rayon::prelude::*;
use serde::Serialize;

use super::conditions::{check_tuple, preference_condition_count, preference_prefix};
use super::confirm::{confirm_tuple, Verdict};
use super::detect::{detect, labelings};
use super::probability::{ordered_tuples, tuple_probability};
use super::{LabError, Theorem, WitnessTuple};
use crate::model::{District, Mechanism, Mechanisms, Problem, StudentId};
use crate::random::{sample_market, MarketParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub theorem: Theorem,
    pub ns: Vec<usize>,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub mechanisms: Mechanisms,
    pub category_weights: [f64; 8],
    pub location_l: f64,
    pub fixed_tuple: bool,
    /// Run the solver on every detected tuple.
    pub confirm: bool,
    pub budget: u64,
}

impl ExperimentSpec {
    pub fn new(theorem: Theorem, ns: Vec<usize>, k: usize, trials: usize, seed: u64) -> Self {
        ExperimentSpec {
            theorem,
            ns,
            k,
            trials,
            seed,
            mechanisms: default_mechanisms(theorem),
            category_weights: MarketParams::UNIFORM_WEIGHTS,
            location_l: 0.5,
            fixed_tuple: false,
            confirm: false,
            budget: crate::equilibrium::DEFAULT_BUDGET,
        }
    }

    pub fn params(&self, n: usize, seed: u64) -> MarketParams {
        MarketParams {
            n,
            k: self.k,
            category_weights: self.category_weights,
            location_l: self.location_l,
            seed,
        }
    }
}

/// L=DA, R=BM for T1; BM in both districts otherwise.
pub fn default_mechanisms(theorem: Theorem) -> Mechanisms {
    match theorem {
        Theorem::T1 => Mechanisms::new(Mechanism::DeferredAcceptance, Mechanism::Boston),
        _ => Mechanisms::new(Mechanism::Boston, Mechanism::Boston),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("at least one market size is required")]
    NoSizes,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(master: u64, n: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(master ^ (n as u64).rotate_left(32)) ^ trial as u64)
}

/// One CSV row. Trial rows fill `trial_seed`, `trial` and the counts;
/// aggregate rows fill the statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub row_type: &'static str,
    pub theorem: Theorem,
    pub mode: &'static str,
    pub master_seed: u64,
    pub trial_seed: Option<u64>,
    pub n: usize,
    pub k: usize,
    pub trial: Option<usize>,
    pub trials: usize,
    pub count: Option<u64>,
    pub preference_count: Option<u64>,
    pub confirmed: Option<u64>,
    pub refuted: Option<u64>,
    pub mean: Option<f64>,
    pub std_error: Option<f64>,
    pub tuple_probability: Option<f64>,
    pub expected: Option<f64>,
    pub z_score: Option<f64>,
    pub within_3se: Option<bool>,
}

/// One detected tuple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TupleRow {
    pub seed: u64,
    pub theorem: Theorem,
    pub left: District,
    pub students: String,
    pub schools: String,
    pub confirmed: Option<bool>,
}

impl TupleRow {
    pub fn new(p: &Problem, seed: u64, w: &WitnessTuple, confirmed: Option<bool>) -> Self {
        TupleRow {
            seed,
            theorem: w.theorem,
            left: w.left,
            students: w.student_names(p).join(";"),
            schools: w.school_names(p).join(";"),
            confirmed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
    pub tuples: Vec<TupleRow>,
}

impl ExperimentReport {
    pub fn aggregates(&self) -> impl Iterator<Item = &ExperimentRow> {
        self.rows.iter().filter(|r| r.row_type != "trial")
    }
}

struct TrialResult {
    seed: u64,
    count: u64,
    preference_count: Option<u64>,
    confirmed: u64,
    refuted: u64,
    tuples: Vec<TupleRow>,
}

fn run_trial(spec: &ExperimentSpec, n: usize, trial: usize) -> Result<TrialResult, LabError> {
    let seed = trial_seed(spec.seed, n, trial);
    let p = sample_market(&spec.params(n, seed), spec.mechanisms)?;
    if spec.fixed_tuple {
        let students: Vec<StudentId> = (0..spec.theorem.tuple_size() as u32)
            .map(StudentId)
            .collect();
        let all = check_tuple(&p, spec.theorem, District::L, &students).is_ok();
        let pref = preference_prefix(&p, spec.theorem, District::L, &students)
            == preference_condition_count(spec.theorem);
        return Ok(TrialResult {
            seed,
            count: all as u64,
            preference_count: Some(pref as u64),
            confirmed: 0,
            refuted: 0,
            tuples: Vec::new(),
        });
    }
    let hits = detect(&p, spec.theorem)?;
    let (mut confirmed, mut refuted) = (0, 0);
    let mut tuples = Vec::with_capacity(hits.len());
    for w in &hits {
        let verdict = if spec.confirm {
            let v = confirm_tuple(&p, w, spec.budget)? == Verdict::Confirmed;
            if v {
                confirmed += 1;
            } else {
                refuted += 1;
            }
            Some(v)
        } else {
            None
        };
        tuples.push(TupleRow::new(&p, seed, w, verdict));
    }
    Ok(TrialResult {
        seed,
        count: hits.len() as u64,
        preference_count: None,
        confirmed,
        refuted,
        tuples,
    })
}

struct Stats {
    mean: f64,
    se: f64,
}

fn empirical(values: &[u64]) -> Stats {
    let t = values.len() as f64;
    let mean = values.iter().sum::<u64>() as f64 / t;
    let var = if values.len() > 1 {
        values
            .iter()
            .map(|&v| (v as f64 - mean).powi(2))
            .sum::<f64>()
            / (t - 1.0)
    } else {
        0.0
    };
    Stats {
        mean,
        se: (var / t).sqrt(),
    }
}

fn compare(mean: f64, expected: f64, se: f64) -> (Option<f64>, bool) {
    let diff = mean - expected;
    let z = if se > 0.0 { Some(diff / se) } else { None };
    (z, diff.abs() <= 3.0 * se)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, LabError> {
    if spec.trials == 0 {
        return Err(LabError::Spec(SpecError::NoTrials));
    }
    if spec.ns.is_empty() {
        return Err(LabError::Spec(SpecError::NoSizes));
    }
    let lefts = if spec.fixed_tuple {
        vec![District::L]
    } else {
        labelings(spec.theorem, spec.mechanisms)?
    };
    let mode = if spec.fixed_tuple {
        "fixed_tuple"
    } else {
        "detect"
    };
    let mut report = ExperimentReport::default();
    for &n in &spec.ns {
        spec.params(n, spec.seed).validate()?;
        let probs = lefts
            .iter()
            .map(|&left| tuple_probability(spec.theorem, &spec.params(n, spec.seed), left))
            .collect::<Result<Vec<_>, _>>()?;
        let results = (0..spec.trials)
            .into_par_iter()
            .map(|t| run_trial(spec, n, t))
            .collect::<Result<Vec<_>, _>>()?;

        let base = ExperimentRow {
            row_type: "trial",
            theorem: spec.theorem,
            mode,
            master_seed: spec.seed,
            trial_seed: None,
            n,
            k: spec.k,
            trial: None,
            trials: spec.trials,
            count: None,
            preference_count: None,
            confirmed: None,
            refuted: None,
            mean: None,
            std_error: None,
            tuple_probability: None,
            expected: None,
            z_score: None,
            within_3se: None,
        };
        for (t, r) in results.iter().enumerate() {
            report.rows.push(ExperimentRow {
                trial_seed: Some(r.seed),
                trial: Some(t),
                count: Some(r.count),
                preference_count: r.preference_count,
                confirmed: spec.confirm.then_some(r.confirmed),
                refuted: spec.confirm.then_some(r.refuted),
                ..base.clone()
            });
        }

        let counts: Vec<u64> = results.iter().map(|r| r.count).collect();
        let per_tuple = probs[0].value();
        let (expected, se) = if spec.fixed_tuple {
            let s = (per_tuple * (1.0 - per_tuple) / spec.trials as f64).sqrt();
            (per_tuple, s)
        } else {
            let e = probs.iter().map(|p| p.value()).sum::<f64>() * ordered_tuples(spec.theorem, n);
            (e, empirical(&counts).se)
        };
        let mean = empirical(&counts).mean;
        let (z, ok) = compare(mean, expected, se);
        report.rows.push(ExperimentRow {
            row_type: "aggregate",
            count: Some(counts.iter().sum()),
            confirmed: spec
                .confirm
                .then(|| results.iter().map(|r| r.confirmed).sum()),
            refuted: spec
                .confirm
                .then(|| results.iter().map(|r| r.refuted).sum()),
            mean: Some(mean),
            std_error: Some(se),
            tuple_probability: Some(per_tuple),
            expected: Some(expected),
            z_score: z,
            within_3se: Some(ok),
            ..base.clone()
        });

        if spec.fixed_tuple {
            let prefs: Vec<u64> = results.iter().filter_map(|r| r.preference_count).collect();
            let pp = probs[0].preference_product();
            let se = (pp * (1.0 - pp) / spec.trials as f64).sqrt();
            let mean = empirical(&prefs).mean;
            let (z, ok) = compare(mean, pp, se);
            report.rows.push(ExperimentRow {
                row_type: "aggregate_preference",
                preference_count: Some(prefs.iter().sum()),
                mean: Some(mean),
                std_error: Some(se),
                tuple_probability: Some(pp),
                expected: Some(pp),
                z_score: z,
                within_3se: Some(ok),
                ..base.clone()
            });
        }
        report
            .tuples
            .extend(results.into_iter().flat_map(|r| r.tuples));
    }
    Ok(report)
}
