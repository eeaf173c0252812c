//! Uniform (n; k) random two-district markets.
//!
//! Every entity draws from its own ChaCha8 stream derived from the master
//! seed: student `i` uses stream `2i`, school `j` uses stream `2j + 1`. A
//! student draws her category, then an ordered k-subset of schools; a school
//! draws its district, then a uniform permutation of all students. Sampling
//! can therefore run entity by entity in any order, or in parallel, and
//! produce the same market.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Constraint, District, Mechanisms, Problem, School, SchoolId, SincereMode, Sophistication,
    Student, StudentId,
};

/// One of the eight (sophistication, constraint, residence) combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Category {
    pub sophistication: Sophistication,
    pub constraint: Constraint,
    pub residence: District,
}

impl Category {
    /// Weight index: sophisticated adds 4, unconstrained adds 2, residence R
    /// adds 1.
    pub fn index(&self) -> usize {
        let s = matches!(self.sophistication, Sophistication::Sophisticated) as usize;
        let c = matches!(self.constraint, Constraint::Unconstrained) as usize;
        4 * s + 2 * c + self.residence.index()
    }

    pub fn from_index(i: usize) -> Category {
        assert!(i < 8, "category index out of range");
        Category {
            sophistication: if i & 4 == 0 {
                Sophistication::Sincere
            } else {
                Sophistication::Sophisticated
            },
            constraint: if i & 2 == 0 {
                Constraint::Constrained
            } else {
                Constraint::Unconstrained
            },
            residence: if i & 1 == 0 { District::L } else { District::R },
        }
    }

    pub fn all() -> impl Iterator<Item = Category> {
        (0..8).map(Category::from_index)
    }

    pub fn of(student: &Student) -> Category {
        Category {
            sophistication: student.sophistication,
            constraint: student.constraint,
            residence: student.residence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Number of students, and of schools.
    pub n: usize,
    /// Preference list length.
    pub k: usize,
    /// Category probabilities, indexed by [`Category::index`].
    pub category_weights: [f64; 8],
    /// Probability that a school is located in district L.
    pub location_l: f64,
    pub seed: u64,
}

impl MarketParams {
    pub const UNIFORM_WEIGHTS: [f64; 8] = [0.125; 8];

    pub fn uniform(n: usize, k: usize, seed: u64) -> Self {
        MarketParams {
            n,
            k,
            category_weights: Self::UNIFORM_WEIGHTS,
            location_l: 0.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.n == 0 {
            return Err(ParamError::EmptyMarket);
        }
        if self.k == 0 || self.k > self.n {
            return Err(ParamError::ListLength {
                n: self.n,
                k: self.k,
            });
        }
        if self
            .category_weights
            .iter()
            .any(|w| !(w.is_finite() && *w > 0.0))
        {
            return Err(ParamError::Weights(
                "every category weight must be positive".into(),
            ));
        }
        let sum: f64 = self.category_weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ParamError::Weights(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        if !(self.location_l > 0.0 && self.location_l < 1.0) {
            return Err(ParamError::Location(self.location_l));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("market needs at least one student")]
    EmptyMarket,
    #[error("list length k={k} must satisfy 1 <= k <= n={n}")]
    ListLength { n: usize, k: usize },
    #[error("invalid category weights: {0}")]
    Weights(String),
    #[error("location probability {0} must lie strictly between 0 and 1")]
    Location(f64),
}

pub fn entity_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn sample_market(params: &MarketParams, mechanisms: Mechanisms) -> Result<Problem, ParamError> {
    params.validate()?;
    let n = params.n;
    let categories = WeightedIndex::new(params.category_weights)
        .map_err(|e| ParamError::Weights(e.to_string()))?;

    let students = (0..n)
        .map(|i| {
            let mut rng = entity_rng(params.seed, 2 * i as u64);
            let cat = Category::from_index(categories.sample(&mut rng));
            let preferences = rand::seq::index::sample(&mut rng, n, params.k)
                .into_iter()
                .map(|s| SchoolId(s as u32))
                .collect();
            Student {
                name: format!("i{}", i + 1),
                residence: cat.residence,
                sophistication: cat.sophistication,
                constraint: cat.constraint,
                preferences,
            }
        })
        .collect();

    let schools = (0..n)
        .map(|j| {
            let mut rng = entity_rng(params.seed, 2 * j as u64 + 1);
            let district = if rng.gen_bool(params.location_l) {
                District::L
            } else {
                District::R
            };
            let mut priority: Vec<StudentId> = (0..n as u32).map(StudentId).collect();
            priority.shuffle(&mut rng);
            School::new(format!("s{}", j + 1), district, 1, priority)
        })
        .collect();

    Ok(Problem {
        students,
        schools,
        mechanisms,
        mode: SincereMode::Naive,
    })
}
