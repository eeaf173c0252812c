//! Closed-form probability that one fixed ordered tuple of students in a
//! uniform random market satisfies a construction's conditions.
//!
//! The preference factors are conditional probabilities, one per item of the
//! preference group in [`super::conditions`], so partial products can be
//! compared against partial condition checks. The category factor is the
//! exact probability implied by the weights; `category_lower_bound` is the
//! coarser `p^m` with `p` the smallest weight.

use serde::Serialize;

use super::conditions::{category_fits, preference_condition_count};
use super::{LabError, Theorem};
use crate::model::District;
use crate::random::{Category, MarketParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Factor {
    pub label: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TupleProbability {
    pub theorem: Theorem,
    pub n: usize,
    pub k: usize,
    pub left: District,
    pub category: f64,
    pub category_lower_bound: f64,
    pub preference: Vec<Factor>,
    pub priority: f64,
}

impl TupleProbability {
    /// Product of the first `m` preference factors.
    pub fn preference_prefix(&self, m: usize) -> f64 {
        self.preference.iter().take(m).map(|f| f.value).product()
    }

    pub fn preference_product(&self) -> f64 {
        self.preference_prefix(self.preference.len())
    }

    pub fn value(&self) -> f64 {
        self.category * self.preference_product() * self.priority
    }

    /// Same product with the category factor replaced by `p^m`.
    pub fn lower_bound_value(&self) -> f64 {
        self.category_lower_bound * self.preference_product() * self.priority
    }
}

/// Probability that none of the `n - t` students outside the tuple lists any
/// of `m` given schools, each list being a uniform ordered `k`-subset.
fn exclusivity(n: usize, k: usize, m: usize, t: usize) -> f64 {
    // C(n - m, k) / C(n, k), zero once fewer than k schools remain
    let one: f64 = (0..k)
        .map(|j| (n as f64 - m as f64 - j as f64).max(0.0) / (n - j) as f64)
        .product();
    one.powi((n - t) as i32)
}

/// Evaluates the product for `theorem` with `left` playing L. Uses `n`, `k`,
/// `category_weights` and `location_l` of `params`; the seed is ignored.
pub fn tuple_probability(
    theorem: Theorem,
    params: &MarketParams,
    left: District,
) -> Result<TupleProbability, LabError> {
    let (n, k) = (params.n, params.k);
    let m = theorem.school_roles().len();
    let t = theorem.tuple_size();
    if k < theorem.min_list_length() || k > n || n < t || n < m {
        return Err(LabError::TooSmall { theorem, n, k });
    }
    let w = &params.category_weights;
    if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(crate::random::ParamError::Weights(
            "weights must be finite and nonnegative".into(),
        )
        .into());
    }
    if !(0.0..=1.0).contains(&params.location_l) {
        return Err(crate::random::ParamError::Location(params.location_l).into());
    }

    let category = (0..t)
        .map(|role| {
            Category::all()
                .filter(|&c| category_fits(theorem, role, c, left))
                .map(|c| w[c.index()])
                .sum::<f64>()
        })
        .product();
    let p_min = w.iter().copied().fold(f64::INFINITY, f64::min);
    let category_lower_bound = p_min.powi(t as i32);

    let q = if left == District::L {
        params.location_l
    } else {
        1.0 - params.location_l
    };
    let nf = n as f64;
    let f = |label, value| Factor { label, value };
    let preference = match theorem {
        Theorem::T1 => vec![
            f("l1 in left", q),
            f(
                "i5 ranks r1, r4 in right",
                (nf - 1.0) / nf * (1.0 - q) * (nf - 2.0) / (nf - 1.0) * (1.0 - q),
            ),
            f("i4 ranks a new r2 in right", (nf - 3.0) / nf * (1.0 - q)),
            f(
                "i3 ranks new l2 in left, new r3 in right",
                (nf - 4.0) / nf * q * (nf - 5.0) / (nf - 1.0) * (1.0 - q),
            ),
            f(
                "i2 ranks l1, r2, r1, l2",
                1.0 / (nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0)),
            ),
            f(
                "no other student lists the six schools",
                exclusivity(n, k, 6, 5),
            ),
        ],
        Theorem::T2 => vec![
            f("i1 ranks l1, l2 in left", q * q),
            f("i2 ranks l2, l1", 1.0 / (nf * (nf - 1.0))),
            f(
                "i3 ranks l2, then r1 in right",
                1.0 / nf * (nf - 2.0) / (nf - 1.0) * (1.0 - q),
            ),
            f(
                "no other student lists the three schools",
                exclusivity(n, k, 3, 3),
            ),
        ],
        Theorem::L1 => vec![
            f("l in left", q),
            f(
                "i2 ranks r in right, then l",
                (nf - 1.0) / nf * (1.0 - q) / (nf - 1.0),
            ),
            f(
                "no other student lists the two schools",
                exclusivity(n, k, 2, 2),
            ),
        ],
        Theorem::L2 => vec![
            f("l1 in left", q),
            f(
                "i2 ranks new l2 in left, then r1 in right",
                (nf - 1.0) / nf * q * (nf - 2.0) / (nf - 1.0) * (1.0 - q),
            ),
            f("i3 ranks r1, l1", 1.0 / (nf * (nf - 1.0))),
            f(
                "no other student lists the three schools",
                exclusivity(n, k, 3, 3),
            ),
        ],
    };
    debug_assert_eq!(preference.len(), preference_condition_count(theorem));
    let priority = match theorem {
        Theorem::T1 => 1.0 / 16.0,
        Theorem::T2 => 1.0 / 12.0,
        Theorem::L1 => 0.5,
        Theorem::L2 => 0.25,
    };
    Ok(TupleProbability {
        theorem,
        n,
        k,
        left,
        category,
        category_lower_bound,
        preference,
        priority,
    })
}

/// Number of ordered tuples of `theorem`'s size among `n` students.
pub fn ordered_tuples(theorem: Theorem, n: usize) -> f64 {
    (0..theorem.tuple_size()).map(|j| (n - j) as f64).product()
}
