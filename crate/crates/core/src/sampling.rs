//! Deterministic sample points in the triangle `0 ≤ a < b ≤ 1`.
//!
//! Float plans draw from a seeded ChaCha stream with a decile overlay: the
//! `i`-th pair has its midpoint in decile `i mod 10` (for triples, the middle
//! point), so no region of `[0,1]` goes unsampled. Gaps are log-uniform
//! between `min_gap` and the largest gap that fits, which mixes near-diagonal
//! samples with wide ones.
//!
//! Exact plans enumerate the user pool instead of inventing random
//! rationals. When `count` is smaller than the number of admissible
//! combinations, an evenly strided subset of the lexicographic enumeration is
//! returned; otherwise every combination is returned once.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::{Mode, QSqrt2, Scalar};

/// Smallest gap drawn when `min_gap` is (nearly) zero.
const GAP_FLOOR: f64 = 1e-6;
const BANDS: usize = 10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamplingError {
    #[error("exact pool needs at least {needed} distinct values in [0,1], found {found}")]
    InsufficientPool { needed: usize, found: usize },
    #[error("min_gap {min_gap} is infeasible: {reason}")]
    InfeasibleGap { min_gap: f64, reason: String },
    #[error("invalid sampling plan: {0}")]
    InvalidPlan(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub seed: u64,
    pub count: usize,
    pub min_gap: f64,
    pub mode: Mode,
    pub include_endpoints: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_pool: Option<Vec<Scalar>>,
}

impl SamplingPlan {
    pub fn float(seed: u64, count: usize) -> Self {
        Self {
            seed,
            count,
            min_gap: 1e-3,
            mode: Mode::Float,
            include_endpoints: false,
            exact_pool: None,
        }
    }

    pub fn exact(pool: Vec<Scalar>, count: usize) -> Self {
        Self {
            seed: 0,
            count,
            min_gap: 0.0,
            mode: Mode::Exact,
            include_endpoints: false,
            exact_pool: Some(pool),
        }
    }

    pub fn with_min_gap(mut self, min_gap: f64) -> Self {
        self.min_gap = min_gap;
        self
    }

    pub fn with_endpoints(mut self, include: bool) -> Self {
        self.include_endpoints = include;
        self
    }

    fn validate(&self) -> Result<(), SamplingError> {
        if !(self.min_gap.is_finite() && self.min_gap >= 0.0) {
            return Err(SamplingError::InvalidPlan(format!(
                "min_gap must be a nonnegative number, got {}",
                self.min_gap
            )));
        }
        Ok(())
    }
}

pub type Pair = (Scalar, Scalar);
pub type Triple = (Scalar, Scalar, Scalar);

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return hi;
    }
    (lo.ln() + (hi.ln() - lo.ln()) * rng.gen::<f64>()).exp().clamp(lo, hi)
}

/// Lower bound used for drawn gaps, nudged up so rounding of the endpoints
/// never produces a gap below `min_gap`.
fn gap_lower(min_gap: f64) -> f64 {
    min_gap.max(GAP_FLOOR) * (1.0 + 1e-12) + 4.0 * f64::EPSILON
}

fn band(k: usize) -> (f64, f64) {
    (k as f64 / BANDS as f64, (k + 1) as f64 / BANDS as f64)
}

/// Checks that every decile the overlay will visit admits a centre point in
/// `[reach, 1 - reach]`.
fn check_bands(count: usize, reach: f64, min_gap: f64, what: &str) -> Result<(), SamplingError> {
    for k in 0..count.min(BANDS) {
        let (lo, hi) = band(k);
        if !(hi > reach && lo < 1.0 - reach) {
            return Err(SamplingError::InfeasibleGap {
                min_gap,
                reason: format!(
                    "no {what} with this gap can be centred in decile [{lo:.1}, {hi:.1})"
                ),
            });
        }
    }
    Ok(())
}

/// Sample pairs `(a, b)` with `0 ≤ a < b ≤ 1` and `b − a ≥ min_gap`.
pub fn gen_pairs(plan: &SamplingPlan) -> Result<Vec<Pair>, SamplingError> {
    plan.validate()?;
    match plan.mode {
        Mode::Float => float_pairs(plan),
        Mode::Exact => {
            let pool = sorted_pool(plan, 2)?;
            let all = combinations(&pool, 2, plan.min_gap)?;
            Ok(stride(all, plan.count)
                .into_iter()
                .map(|v| (v[0].clone(), v[1].clone()))
                .collect())
        }
    }
}

/// Sample triples `(a, b, c)` with `0 ≤ a < b < c ≤ 1` and both gaps at
/// least `min_gap`.
pub fn gen_triples(plan: &SamplingPlan) -> Result<Vec<Triple>, SamplingError> {
    plan.validate()?;
    match plan.mode {
        Mode::Float => float_triples(plan),
        Mode::Exact => {
            let pool = sorted_pool(plan, 3)?;
            let all = combinations(&pool, 3, plan.min_gap)?;
            Ok(stride(all, plan.count)
                .into_iter()
                .map(|v| (v[0].clone(), v[1].clone(), v[2].clone()))
                .collect())
        }
    }
}

fn float_pairs(plan: &SamplingPlan) -> Result<Vec<Pair>, SamplingError> {
    if plan.count == 0 {
        return Ok(Vec::new());
    }
    let g = plan.min_gap;
    if g >= 1.0 {
        return Err(SamplingError::InfeasibleGap { min_gap: g, reason: "no pair in [0,1] has b − a ≥ 1".into() });
    }
    check_bands(plan.count, g / 2.0, g, "pair")?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let glo = gap_lower(g);
    let mut out = Vec::with_capacity(plan.count);
    for i in 0..plan.count {
        if plan.include_endpoints && i == 0 {
            out.push((Scalar::Float(0.0), Scalar::Float(1.0)));
            continue;
        }
        let (lo, hi) = band(i % BANDS);
        let m = uniform(&mut rng, lo.max(glo / 2.0), hi.min(1.0 - glo / 2.0));
        let room = 2.0 * m.min(1.0 - m);
        let gap = log_uniform(&mut rng, glo.min(room), room);
        let a = (m - gap / 2.0).max(0.0);
        let b = (m + gap / 2.0).min(1.0);
        out.push((Scalar::Float(a), Scalar::Float(b)));
    }
    Ok(out)
}

fn float_triples(plan: &SamplingPlan) -> Result<Vec<Triple>, SamplingError> {
    if plan.count == 0 {
        return Ok(Vec::new());
    }
    let g = plan.min_gap;
    if g >= 0.5 {
        return Err(SamplingError::InfeasibleGap { min_gap: g, reason: "two gaps of at least 0.5 do not fit in [0,1]".into() });
    }
    check_bands(plan.count, g, g, "triple")?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let glo = gap_lower(g);
    let mut out = Vec::with_capacity(plan.count);
    for i in 0..plan.count {
        if plan.include_endpoints && i == 0 {
            out.push((Scalar::Float(0.0), Scalar::Float(0.5), Scalar::Float(1.0)));
            continue;
        }
        let (lo, hi) = band(i % BANDS);
        let b = uniform(&mut rng, lo.max(glo), hi.min(1.0 - glo));
        let left = log_uniform(&mut rng, glo.min(b), b);
        let right = log_uniform(&mut rng, glo.min(1.0 - b), 1.0 - b);
        let a = (b - left).max(0.0);
        let c = (b + right).min(1.0);
        out.push((Scalar::Float(a), Scalar::Float(b), Scalar::Float(c)));
    }
    Ok(out)
}

/// Pool values outside `[0, 1]`, which exact sampling skips.
pub fn excluded_pool_values(plan: &SamplingPlan) -> Vec<Scalar> {
    let (zero, one) = (QSqrt2::from_integer(0), QSqrt2::from_integer(1));
    plan.exact_pool
        .iter()
        .flatten()
        .filter(|s| matches!(s.as_exact(), Some(q) if *q < zero || *q > one))
        .cloned()
        .collect()
}

fn sorted_pool(plan: &SamplingPlan, needed: usize) -> Result<Vec<QSqrt2>, SamplingError> {
    let raw = plan
        .exact_pool
        .as_ref()
        .ok_or_else(|| SamplingError::InvalidPlan("exact mode needs an exact pool".into()))?;
    let zero = QSqrt2::from_integer(0);
    let one = QSqrt2::from_integer(1);
    let mut pool = Vec::with_capacity(raw.len());
    for s in raw {
        let q = s
            .as_exact()
            .ok_or_else(|| SamplingError::InvalidPlan(format!("pool value {s} is not exact")))?;
        if *q >= zero && *q <= one {
            pool.push(q.clone());
        }
    }
    pool.sort();
    pool.dedup();
    if pool.len() < needed {
        return Err(SamplingError::InsufficientPool { needed, found: pool.len() });
    }
    Ok(pool)
}

/// All strictly increasing `k`-combinations of the sorted pool whose
/// consecutive gaps are at least `min_gap`, in lexicographic order.
fn combinations(pool: &[QSqrt2], k: usize, min_gap: f64) -> Result<Vec<Vec<Scalar>>, SamplingError> {
    let gap = QSqrt2::from_f64(min_gap).expect("validated finite");
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    let n = pool.len();
    loop {
        let ok = idx.windows(2).all(|w| &pool[w[1]] - &pool[w[0]] >= gap);
        if ok {
            out.push(idx.iter().map(|&i| Scalar::Exact(pool[i].clone())).collect());
        }
        // advance to the next combination
        let mut pos = k;
        while pos > 0 && idx[pos - 1] == n - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        idx[pos - 1] += 1;
        for j in pos..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    if out.is_empty() {
        return Err(SamplingError::InfeasibleGap {
            min_gap,
            reason: "no pool combination satisfies the gap".into(),
        });
    }
    Ok(out)
}

fn stride<T>(all: Vec<T>, count: usize) -> Vec<T> {
    let total = all.len();
    if count >= total {
        return all;
    }
    let mut slots: Vec<Option<T>> = all.into_iter().map(Some).collect();
    (0..count)
        .map(|i| slots[i * total / count].take().expect("stride indices are distinct"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ex(s: &str) -> Scalar {
        Scalar::exact(s.parse().unwrap())
    }

    fn pool(items: &[&str]) -> Vec<Scalar> {
        items.iter().map(|s| ex(s)).collect()
    }

    fn lt(x: &Scalar, y: &Scalar) -> bool {
        x.compare(y).unwrap().is_lt()
    }

    #[test]
    fn float_pairs_are_ordered_and_distinct() {
        let pairs = gen_pairs(&SamplingPlan::float(42, 3)).unwrap();
        assert_eq!(pairs.len(), 3);
        for (a, b) in &pairs {
            assert!(lt(a, b));
        }
        assert_ne!(pairs[0], pairs[1]);
        assert_ne!(pairs[1], pairs[2]);
    }

    #[test]
    fn exact_pairs_come_from_pool() {
        let items = ["0", "1/3", "1/2", "1/2*sqrt2", "1"];
        let p = pool(&items);
        let pairs = gen_pairs(&SamplingPlan::exact(p.clone(), 4)).unwrap();
        assert_eq!(pairs.len(), 4);
        // brute-force enumeration of ordered pool pairs
        let mut admissible = Vec::new();
        for x in &p {
            for y in &p {
                if lt(x, y) {
                    admissible.push((x.clone(), y.clone()));
                }
            }
        }
        assert_eq!(admissible.len(), 10);
        for pair in &pairs {
            assert!(admissible.contains(pair), "{pair:?}");
        }
        let all = gen_pairs(&SamplingPlan::exact(p, 100)).unwrap();
        assert_eq!(all.len(), 10);
    }

    #[test]
    fn infeasible_gap() {
        let plan = SamplingPlan::float(1, 10).with_min_gap(0.6);
        assert!(matches!(gen_pairs(&plan), Err(SamplingError::InfeasibleGap { .. })));
        let plan = SamplingPlan::float(1, 10).with_min_gap(0.15);
        assert!(matches!(gen_triples(&plan), Err(SamplingError::InfeasibleGap { .. })));
        let plan = SamplingPlan::exact(pool(&["0", "1/10", "1/5"]), 5).with_min_gap(0.5);
        assert!(matches!(gen_pairs(&plan), Err(SamplingError::InfeasibleGap { .. })));
    }

    #[test]
    fn pool_errors() {
        let plan = SamplingPlan::exact(pool(&["1/2", "1/2"]), 3);
        assert_eq!(gen_pairs(&plan), Err(SamplingError::InsufficientPool { needed: 2, found: 1 }));
        let plan = SamplingPlan::exact(pool(&["0", "1/2", "2"]), 3);
        assert_eq!(gen_pairs(&plan).unwrap().len(), 1);
        assert_eq!(excluded_pool_values(&plan), pool(&["2"]));
        let plan = SamplingPlan::exact(pool(&["0", "3/2", "2"]), 3);
        assert_eq!(gen_pairs(&plan), Err(SamplingError::InsufficientPool { needed: 2, found: 1 }));
        let plan = SamplingPlan { exact_pool: None, ..SamplingPlan::exact(vec![], 3) };
        assert!(matches!(gen_triples(&plan), Err(SamplingError::InvalidPlan(_))));
    }

    #[test]
    fn float_triples_increase() {
        let triples = gen_triples(&SamplingPlan::float(7, 5)).unwrap();
        assert_eq!(triples.len(), 5);
        for (a, b, c) in &triples {
            assert!(lt(a, b) && lt(b, c));
            assert!(a.to_f64() >= 0.0 && c.to_f64() <= 1.0);
        }
    }

    #[test]
    fn exact_triples_reach_irrational_member() {
        let p = pool(&["0", "1/4", "1/2", "1/2*sqrt2", "1"]);
        let triples = gen_triples(&SamplingPlan::exact(p, 3)).unwrap();
        assert_eq!(triples.len(), 3);
        let irrational = |s: &Scalar| !s.is_rational().unwrap();
        assert!(triples.iter().any(|(a, b, c)| irrational(a) || irrational(b) || irrational(c)));
        for (a, b, c) in &triples {
            assert!(lt(a, b) && lt(b, c));
        }
    }

    #[test]
    fn empty_count() {
        assert!(gen_triples(&SamplingPlan::float(7, 0)).unwrap().is_empty());
        assert!(gen_pairs(&SamplingPlan::float(7, 0)).unwrap().is_empty());
    }

    #[test]
    fn endpoints() {
        let pairs = gen_pairs(&SamplingPlan::float(3, 4).with_endpoints(true)).unwrap();
        assert_eq!(pairs[0], (Scalar::Float(0.0), Scalar::Float(1.0)));
        let triples = gen_triples(&SamplingPlan::float(3, 4).with_endpoints(true)).unwrap();
        assert_eq!(triples[0].1, Scalar::Float(0.5));
    }

    proptest! {
        #[test]
        fn pair_invariants(seed in any::<u64>(), count in 0usize..80, gap in 0.0f64..0.19) {
            let plan = SamplingPlan::float(seed, count).with_min_gap(gap);
            let pairs = gen_pairs(&plan).unwrap();
            prop_assert_eq!(pairs.len(), count);
            for (a, b) in &pairs {
                let (a, b) = (a.to_f64(), b.to_f64());
                prop_assert!(0.0 <= a && a < b && b <= 1.0);
                prop_assert!(b - a >= gap, "gap {} < {}", b - a, gap);
            }
            prop_assert_eq!(gen_pairs(&plan).unwrap(), pairs);
        }

        #[test]
        fn triple_invariants(seed in any::<u64>(), count in 0usize..80, gap in 0.0f64..0.09) {
            let plan = SamplingPlan::float(seed, count).with_min_gap(gap);
            let triples = gen_triples(&plan).unwrap();
            prop_assert_eq!(triples.len(), count);
            for (a, b, c) in &triples {
                let (a, b, c) = (a.to_f64(), b.to_f64(), c.to_f64());
                prop_assert!(0.0 <= a && a < b && b < c && c <= 1.0);
                prop_assert!(b - a >= gap && c - b >= gap);
            }
            prop_assert_eq!(gen_triples(&plan).unwrap(), triples);
        }

        #[test]
        fn midpoints_cover_deciles(seed in any::<u64>(), count in 32usize..100) {
            let pairs = gen_pairs(&SamplingPlan::float(seed, count)).unwrap();
            let mut hit = [false; 10];
            for (a, b) in &pairs {
                let m = (a.to_f64() + b.to_f64()) / 2.0;
                hit[((m * 10.0) as usize).min(9)] = true;
            }
            prop_assert!(hit.iter().filter(|h| **h).count() >= 8);
        }
    }
}
