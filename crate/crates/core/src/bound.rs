//! How many distinct Gini gains can a binary-class node of size `N` produce?
//!
//! For a node with `N₁` class-1 and `N₂` class-2 instances, a split into
//! children of sizes `L` and `R = N − L` with class counts `(L₁, L₂)` and
//! `(R₁, R₂)` has weighted child impurity `(2/N)(L₁L₂/L + R₁R₂/R)`. Since the
//! parent impurity is fixed, distinct gains correspond one-to-one with
//! distinct weighted impurities. This module enumerates them exactly and
//! checks the count against `N(N+2)/4 − 1` (a ceiling sum for odd `N`).

use std::collections::BTreeSet;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::exec::Execution;
use crate::rng;
use crate::tree::best_split_for_feature;
use crate::{Error, Result};

pub type Rational = Ratio<u64>;

/// Class composition of a binary node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeComposition {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
}

impl NodeComposition {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        let n = n1 + n2;
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "node size {n} must be at least 2"
            )));
        }
        Ok(NodeComposition { n, n1, n2 })
    }

    /// Every composition of a node with `n` instances, from `N₁ = 0` to `N₁ = n`.
    pub fn all(n: usize) -> Result<Vec<Self>> {
        (0..=n).map(|n1| NodeComposition::new(n1, n - n1)).collect()
    }

    /// Feasible `(L, L₁)` pairs: `1 ≤ L ≤ N−1`, `max(0, L−N₂) ≤ L₁ ≤ min(L, N₁)`.
    fn splits(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.n).flat_map(move |l| {
            let lo = l.saturating_sub(self.n2);
            let hi = l.min(self.n1);
            (lo..=hi).map(move |l1| (l, l1))
        })
    }

    /// `L₁L₂/L + R₁R₂/R` for one split, exactly.
    pub fn child_term(&self, l: usize, l1: usize) -> Rational {
        let (l2, r) = (l - l1, self.n - l);
        let (r1, r2) = (self.n1 - l1, self.n2 - l2);
        let (l, r) = (l as u64, r as u64);
        Rational::new((l1 * l2) as u64 * r + (r1 * r2) as u64 * l, l * r)
    }

    /// Weighted child impurity `(2/N)(L₁L₂/L + R₁R₂/R)`, exactly.
    pub fn weighted_impurity(&self, l: usize, l1: usize) -> Rational {
        self.child_term(l, l1) * Rational::new(2, self.n as u64)
    }
}

/// Distinct weighted-child-impurity values of a node (or a union of nodes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEnumeration {
    pub n: usize,
    /// Sorted ascending.
    pub values: Vec<f64>,
    pub count: usize,
    pub bound: u64,
}

impl SplitEnumeration {
    pub fn within_bound(&self) -> bool {
        self.count as u64 <= self.bound
    }
}

fn exact_set(comp: &NodeComposition) -> BTreeSet<Rational> {
    comp.splits()
        .map(|(l, l1)| comp.weighted_impurity(l, l1))
        .collect()
}

fn float_values(comp: &NodeComposition) -> Vec<f64> {
    let n = comp.n as f64;
    comp.splits()
        .map(|(l, l1)| {
            let (l2, r) = (l - l1, comp.n - l);
            let (r1, r2) = (comp.n1 - l1, comp.n2 - l2);
            (2.0 / n) * ((l1 * l2) as f64 / l as f64 + (r1 * r2) as f64 / r as f64)
        })
        .collect()
}

/// Sorts and merges values within a relative tolerance of `rel_tol`.
fn distinct_with_tolerance(mut values: Vec<f64>, rel_tol: f64) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    for v in values {
        match out.last() {
            Some(&last) if (v - last).abs() <= rel_tol * v.abs().max(last.abs()) => {}
            _ => out.push(v),
        }
    }
    out
}

fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Distinct weighted child impurities of one node composition.
///
/// With `exact_rational` the values are compared as exact fractions;
/// otherwise as floats merged at relative tolerance `1e-9`.
pub fn enumerate_distinct(comp: &NodeComposition, exact_rational: bool) -> SplitEnumeration {
    let values = if exact_rational {
        exact_set(comp).iter().map(to_f64).collect()
    } else {
        distinct_with_tolerance(float_values(comp), 1e-9)
    };
    SplitEnumeration {
        n: comp.n,
        count: values.len(),
        values,
        bound: theorem_bound(comp.n),
    }
}

/// Union of [`enumerate_distinct`] over every composition of a size-`n` node.
///
/// The per-node bound need not hold for this union; it is reported for comparison.
pub fn enumerate_union(n: usize, exact_rational: bool) -> Result<SplitEnumeration> {
    let comps = NodeComposition::all(n)?;
    let values: Vec<f64> = if exact_rational {
        let mut all = BTreeSet::new();
        for c in &comps {
            all.extend(exact_set(c));
        }
        all.iter().map(to_f64).collect()
    } else {
        distinct_with_tolerance(comps.iter().flat_map(float_values).collect(), 1e-9)
    };
    Ok(SplitEnumeration {
        n,
        count: values.len(),
        values,
        bound: theorem_bound(n),
    })
}

/// Upper bound on distinct Gini gains at a binary node of size `n ≥ 2`.
///
/// Even `n`: `n(n+2)/4 − 1`. Odd `n`: `Σ_{L=1}^{n−1} ⌈(L+1)/2⌉`, the sum
/// the closed form is derived from.
pub fn theorem_bound(n: usize) -> u64 {
    assert!(n >= 2, "node size must be at least 2");
    let n = n as u64;
    if n.is_multiple_of(2) {
        n * (n + 2) / 4 - 1
    } else {
        (1..n).map(|l| (l + 2) / 2).sum()
    }
}

/// The closed form `n(n+2)/4 − 1` evaluated for any `n` (fractional for odd `n`).
pub fn closed_form_bound(n: usize) -> f64 {
    let n = n as f64;
    n * (n + 2.0) / 4.0 - 1.0
}

/// Distinct values of `L₁(L − L₁)` over `L₁ ∈ {0..L}` against `⌈(L+1)/2⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductCheck {
    pub l: usize,
    pub distinct: usize,
    pub bound: usize,
}

impl ProductCheck {
    pub fn holds(&self) -> bool {
        self.distinct <= self.bound
    }

    pub fn tight(&self) -> bool {
        self.distinct == self.bound
    }

    pub fn verified(&self) -> bool {
        self.holds() && self.tight()
    }
}

pub fn lemma1_check(l: usize) -> ProductCheck {
    let products: BTreeSet<usize> = (0..=l).map(|l1| l1 * (l - l1)).collect();
    ProductCheck {
        l,
        distinct: products.len(),
        bound: (l + 2) / 2,
    }
}

/// One line of the bound verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: usize,
    pub bound: u64,
    pub closed_form: f64,
    /// Largest distinct count over all compositions of the node.
    pub max_distinct: usize,
    /// Distinct count of the union over compositions (informational).
    pub union_distinct: usize,
    pub pass: bool,
}

impl BoundRow {
    pub const CSV_HEADER: &'static str = "n,bound,max_distinct,status,closed_form,union_distinct";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.n,
            self.bound,
            self.max_distinct,
            if self.pass { "PASS" } else { "FAIL" },
            self.closed_form,
            self.union_distinct
        )
    }
}

/// Checks every composition of a size-`n` node against [`theorem_bound`].
pub fn verify_bound(n: usize) -> Result<BoundRow> {
    let comps = NodeComposition::all(n)?;
    let max_distinct = comps.iter().map(|c| exact_set(c).len()).max().unwrap_or(0);
    let bound = theorem_bound(n);
    Ok(BoundRow {
        n,
        bound,
        closed_form: closed_form_bound(n),
        max_distinct,
        union_distinct: enumerate_union(n, true)?.count,
        pass: max_distinct as u64 <= bound,
    })
}

/// Monte-Carlo tie statistics for random nodes with continuous features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TieStats {
    /// Mean fraction of features whose best gain equals the node maximum.
    pub max_tie_fraction: f64,
    /// Mean fraction of features whose best gain equals some other feature's.
    pub shared_fraction: f64,
    /// Mean number of distinct best-gain values per node.
    pub mean_distinct: f64,
}

/// Mean fraction of features tying the best gain at a random binary node.
pub fn tie_frequency(n: usize, p: usize, trials: usize, seed: u64) -> Result<f64> {
    Ok(tie_statistics(n, p, trials, seed, Execution::default())?.max_tie_fraction)
}

/// Draws `trials` nodes of `n` rows with random binary labels (both classes
/// present) and `p` independent uniform features, and measures how often
/// the features' best Gini gains coincide. Gains equal within a relative
/// `1e-12` count as tied.
pub fn tie_statistics(
    n: usize,
    p: usize,
    trials: usize,
    seed: u64,
    execution: Execution,
) -> Result<TieStats> {
    if n < 2 || p < 1 || trials < 1 {
        return Err(Error::InvalidParameter(format!(
            "tie statistics need n >= 2, p >= 1, trials >= 1 (got {n}, {p}, {trials})"
        )));
    }
    let per_trial = execution.map_range(trials, |t| {
        let mut rng = rng::stream(seed, t as u64);
        let labels: Vec<usize> = loop {
            let l: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
            if l.contains(&0) && l.contains(&1) {
                break l;
            }
        };
        let columns = (0..p)
            .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
            .collect();
        let d = Dataset::from_columns(
            columns,
            labels,
            (0..p).map(|j| format!("X{j}")).collect(),
            vec!["1".into(), "2".into()],
        )
        .expect("generated node is valid");
        let rows: Vec<usize> = (0..n).collect();
        let gains: Vec<f64> = (0..p)
            .map(|f| best_split_for_feature(&d, &rows, f).map_or(0.0, |s| s.raw_gain))
            .collect();
        node_ties(&gains)
    });
    let k = trials as f64;
    Ok(TieStats {
        max_tie_fraction: per_trial.iter().map(|t| t.0).sum::<f64>() / k,
        shared_fraction: per_trial.iter().map(|t| t.1).sum::<f64>() / k,
        mean_distinct: per_trial.iter().map(|t| t.2 as f64).sum::<f64>() / k,
    })
}

fn node_ties(gains: &[f64]) -> (f64, f64, usize) {
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    let p = gains.len() as f64;
    let max = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let at_max = gains.iter().filter(|&&g| same(g, max)).count();
    let shared = gains
        .iter()
        .enumerate()
        .filter(|&(i, &g)| gains.iter().enumerate().any(|(j, &h)| i != j && same(g, h)))
        .count();
    let distinct = distinct_with_tolerance(gains.to_vec(), 1e-12).len();
    (at_max as f64 / p, shared as f64 / p, distinct)
}
