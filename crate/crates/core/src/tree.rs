//! Fully grown binary classification trees with plain or regularized Gini splitting.

use std::sync::Arc;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::{Error, Result};

/// Per-class instance counts at a node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassCounts(Vec<usize>);

impl ClassCounts {
    pub fn new(counts: Vec<usize>) -> Self {
        ClassCounts(counts)
    }

    pub fn zeros(n_classes: usize) -> Self {
        ClassCounts(vec![0; n_classes])
    }

    pub fn from_rows(d: &Dataset, rows: &[usize]) -> Self {
        let mut counts = vec![0; d.n_classes()];
        let labels = d.labels();
        for &r in rows {
            counts[labels[r]] += 1;
        }
        ClassCounts(counts)
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_pure(&self) -> bool {
        self.0.iter().filter(|&&c| c > 0).count() <= 1
    }

    /// Majority class; ties go to the smallest class index.
    pub fn majority(&self) -> usize {
        let mut best = 0;
        for (c, &n) in self.0.iter().enumerate() {
            if n > self.0[best] {
                best = c;
            }
        }
        best
    }

    fn sum_of_squares(&self) -> u128 {
        self.0.iter().map(|&c| (c as u128) * (c as u128)).sum()
    }
}

fn gini_of(counts: &[usize], total: usize) -> f64 {
    let t = total as f64;
    counts
        .iter()
        .map(|&c| {
            let p = c as f64 / t;
            p * (1.0 - p)
        })
        .sum()
}

fn gain_of(parent: &ClassCounts, left: &ClassCounts, right: &ClassCounts) -> f64 {
    let (n, l, r) = (parent.total(), left.total(), right.total());
    gini_of(&parent.0, n)
        - (l as f64 / n as f64) * gini_of(&left.0, l)
        - (r as f64 / n as f64) * gini_of(&right.0, r)
}

/// Gini index `Σ p_c (1 − p_c)` of a node.
pub fn gini(counts: &ClassCounts) -> Result<f64> {
    match counts.total() {
        0 => Err(Error::EmptyNode),
        t => Ok(gini_of(&counts.0, t)),
    }
}

/// Gini gain of splitting `parent` into `left` and `right`:
/// `Gini(parent) − w_L·Gini(left) − w_R·Gini(right)` with instance-proportion weights.
pub fn gini_gain(parent: &ClassCounts, left: &ClassCounts, right: &ClassCounts) -> Result<f64> {
    if left.0.len() != parent.0.len()
        || right.0.len() != parent.0.len()
        || parent
            .0
            .iter()
            .zip(left.0.iter().zip(&right.0))
            .any(|(&p, (&l, &r))| l + r != p)
    {
        return Err(Error::PartitionMismatch);
    }
    if left.total() == 0 || right.total() == 0 {
        return Err(Error::EmptyNode);
    }
    Ok(gain_of(parent, left, right))
}

/// A binary split `feature ≤ threshold` with its child counts and gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub left_counts: ClassCounts,
    pub right_counts: ClassCounts,
    pub raw_gain: f64,
    pub regularized_gain: f64,
}

/// Best Gini split of `feature` restricted to `rows`.
///
/// Thresholds are midpoints between consecutive distinct values. Candidates
/// are compared exactly (integer arithmetic on `Σl²/L + Σr²/R`), so equal
/// gains really tie and the smallest threshold wins. Returns `None` when the
/// feature is constant on `rows`.
pub fn best_split_for_feature(
    d: &Dataset,
    rows: &[usize],
    feature: usize,
) -> Option<SplitCandidate> {
    let column = d.column(feature);
    let labels = d.labels();
    let mut pairs: Vec<(f64, usize)> = rows.iter().map(|&r| (column[r], labels[r])).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let parent = ClassCounts::from_rows(d, rows);
    let n = pairs.len();
    let mut left = ClassCounts::zeros(d.n_classes());
    let mut right = parent.clone();

    // Best score so far as the fraction num / den, where score = Σl²/L + Σr²/R.
    let mut best: Option<(u128, u128, usize, ClassCounts)> = None;
    for i in 0..n.saturating_sub(1) {
        let class = pairs[i].1;
        left.0[class] += 1;
        right.0[class] -= 1;
        if pairs[i].0 == pairs[i + 1].0 {
            continue;
        }
        let (l, r) = ((i + 1) as u128, (n - i - 1) as u128);
        let num = left.sum_of_squares() * r + right.sum_of_squares() * l;
        let den = l * r;
        let better = match &best {
            None => true,
            Some((bn, bd, _, _)) => num * bd > bn * den,
        };
        if better {
            best = Some((num, den, i, left.clone()));
        }
    }

    let (num, den, i, left) = best?;
    let (lo, hi) = (pairs[i].0, pairs[i + 1].0);
    let mid = 0.5 * (lo + hi);
    let threshold = if mid.is_finite() && lo <= mid && mid < hi {
        mid
    } else {
        lo
    };
    let right = ClassCounts(parent.0.iter().zip(&left.0).map(|(p, l)| p - l).collect());
    // gain = (n·num − Σp²·den) / (n²·den); the numerator is exact, so a split
    // that leaves the class proportions unchanged scores exactly 0.
    let n = n as u128;
    let excess = (n * num).saturating_sub(parent.sum_of_squares() * den);
    let raw_gain = excess as f64 / (n * n * den) as f64;
    Some(SplitCandidate {
        feature,
        threshold,
        left_counts: left,
        right_counts: right,
        raw_gain,
        regularized_gain: raw_gain,
    })
}

/// The shared selected-feature set `F`, kept in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSet {
    order: Vec<usize>,
    member: Vec<bool>,
}

impl FeatureSet {
    pub fn new(n_features: usize) -> Self {
        FeatureSet {
            order: Vec::new(),
            member: vec![false; n_features],
        }
    }

    pub fn contains(&self, feature: usize) -> bool {
        self.member.get(feature).copied().unwrap_or(false)
    }

    /// Adds `feature`; returns false if it was already present.
    pub fn insert(&mut self, feature: usize) -> bool {
        if self.member[feature] {
            return false;
        }
        self.member[feature] = true;
        self.order.push(feature);
        true
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Members in order of first insertion.
    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }
}

/// Coefficient applied to the gain of a feature outside `F`.
#[derive(Debug, Clone, PartialEq)]
pub enum Penalty {
    /// One coefficient λ for every feature (RRF).
    Constant(f64),
    /// One coefficient λᵢ per feature (GRRF).
    PerFeature(Arc<[f64]>),
}

impl Penalty {
    pub fn coefficient(&self, feature: usize) -> f64 {
        match self {
            Penalty::Constant(lambda) => *lambda,
            Penalty::PerFeature(lambdas) => lambdas[feature],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Criterion {
    /// Ordinary random-forest node: `mtry` random features, unpenalized gain.
    Plain,
    /// Regularized node selection against the shared set `F`.
    Regularized(Penalty),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthConfig {
    /// In plain mode, the number of features drawn per node. In regularized
    /// mode, the number of features outside `F` evaluated per node.
    pub mtry: usize,
    /// Nodes with fewer rows become leaves.
    pub min_node: usize,
    pub criterion: Criterion,
}

/// `⌈√p⌉`, computed exactly.
pub fn default_mtry(n_features: usize) -> usize {
    let mut m = (n_features as f64).sqrt() as usize;
    while m * m < n_features {
        m += 1;
    }
    while m > 1 && (m - 1) * (m - 1) >= n_features {
        m -= 1;
    }
    m.max(1)
}

impl GrowthConfig {
    pub fn plain(n_features: usize) -> Self {
        GrowthConfig {
            mtry: default_mtry(n_features),
            min_node: 2,
            criterion: Criterion::Plain,
        }
    }

    pub fn regularized(n_features: usize, penalty: Penalty) -> Self {
        GrowthConfig {
            mtry: default_mtry(n_features),
            min_node: 2,
            criterion: Criterion::Regularized(penalty),
        }
    }
}

/// One feature's evaluation at a node, in visitation order.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRecord {
    pub feature: usize,
    pub in_set: bool,
    /// Coefficient applied to the raw gain (1 for members of `F`).
    pub coefficient: f64,
    /// `None` when the feature is constant on the node's rows.
    pub raw_gain: Option<f64>,
    pub regularized_gain: f64,
}

/// Outcome of [`evaluate_node`] when a split is chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeDecision {
    pub split: SplitCandidate,
    /// True if the winning feature entered `F` at this node.
    pub entered: bool,
}

/// Chooses the split feature at a node and updates `F`.
///
/// Features are visited in uniformly random order. In regularized mode every
/// member of `F` is scored by its raw gain, and at most `mtry` non-members are
/// scored by `coefficient × raw gain`; further non-members are skipped. The
/// strict maximum above zero wins, so among equal scores the first visited
/// wins. A winner outside `F` is appended to it. Plain mode scores a uniform
/// random subset of `mtry` features by raw gain.
pub fn evaluate_node<R: Rng + ?Sized>(
    d: &Dataset,
    rows: &[usize],
    features: &mut FeatureSet,
    config: &GrowthConfig,
    rng: &mut R,
) -> Option<NodeDecision> {
    evaluate(d, rows, features, config, rng, None)
}

/// [`evaluate_node`] that also returns the scored candidates in visitation order.
pub fn evaluate_node_traced<R: Rng + ?Sized>(
    d: &Dataset,
    rows: &[usize],
    features: &mut FeatureSet,
    config: &GrowthConfig,
    rng: &mut R,
) -> (Option<NodeDecision>, Vec<CandidateRecord>) {
    let mut trace = Vec::new();
    let decision = evaluate(d, rows, features, config, rng, Some(&mut trace));
    (decision, trace)
}

fn evaluate<R: Rng + ?Sized>(
    d: &Dataset,
    rows: &[usize],
    features: &mut FeatureSet,
    config: &GrowthConfig,
    rng: &mut R,
    mut trace: Option<&mut Vec<CandidateRecord>>,
) -> Option<NodeDecision> {
    let p = d.n_features();
    let budget = config.mtry.clamp(1, p);
    let (order, penalty): (Vec<usize>, Option<&Penalty>) = match &config.criterion {
        Criterion::Plain => (index::sample(rng, p, budget).into_vec(), None),
        Criterion::Regularized(penalty) => {
            let mut order: Vec<usize> = (0..p).collect();
            order.shuffle(rng);
            (order, Some(penalty))
        }
    };

    let mut best_score = 0.0;
    let mut best: Option<SplitCandidate> = None;
    let mut new_examined = 0;
    for m in order {
        let in_set = penalty.is_some() && features.contains(m);
        let coefficient = match penalty {
            Some(_) if in_set => 1.0,
            Some(pen) => {
                if new_examined >= budget {
                    continue;
                }
                new_examined += 1;
                pen.coefficient(m)
            }
            None => 1.0,
        };
        let candidate = best_split_for_feature(d, rows, m);
        let raw = candidate.as_ref().map(|c| c.raw_gain);
        let score = if in_set || penalty.is_none() {
            raw.unwrap_or(0.0)
        } else {
            coefficient * raw.unwrap_or(0.0)
        };
        if let Some(t) = trace.as_deref_mut() {
            t.push(CandidateRecord {
                feature: m,
                in_set,
                coefficient,
                raw_gain: raw,
                regularized_gain: score,
            });
        }
        if score > best_score {
            best_score = score;
            let mut c = candidate.expect("positive score implies a split");
            c.regularized_gain = score;
            best = Some(c);
        }
    }

    let split = best?;
    let entered = features.insert(split.feature);
    Some(NodeDecision { split, entered })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Internal,
    Leaf,
}

/// A node of the flat tree array. Internal nodes carry the split and the
/// raw Gini gain it achieved; leaves carry neither.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub kind: NodeKind,
    pub feature: Option<usize>,
    pub threshold: Option<f64>,
    pub counts: ClassCounts,
    pub left: Option<usize>,
    pub right: Option<usize>,
    pub gain: Option<f64>,
    pub prediction: usize,
}

/// A binary tree stored as a flat node array; node 0 is the root and ids
/// follow depth-first, left-first visitation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Internal)
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, id: usize) -> usize {
            let n = &t.nodes[id];
            match (n.left, n.right) {
                (Some(l), Some(r)) => 1 + go(t, l).max(go(t, r)),
                _ => 0,
            }
        }
        go(self, 0)
    }

    /// Leaf class for `row`; values `≤ threshold` go left.
    pub fn predict(&self, row: &[f64]) -> usize {
        let mut node = &self.nodes[0];
        while let (Some(f), Some(t), Some(l), Some(r)) =
            (node.feature, node.threshold, node.left, node.right)
        {
            node = &self.nodes[if row[f] <= t { l } else { r }];
        }
        node.prediction
    }
}

/// Predicted class of `row` under `tree`.
pub fn predict_tree(tree: &Tree, row: &[f64]) -> usize {
    tree.predict(row)
}

/// Grows a tree on `rows` until every leaf is pure, smaller than
/// `min_node`, or has no split with positive score. `features` is shared
/// state and keeps every insertion made while growing.
pub fn grow_tree<R: Rng + ?Sized>(
    d: &Dataset,
    rows: &[usize],
    features: &mut FeatureSet,
    config: &GrowthConfig,
    rng: &mut R,
) -> Tree {
    struct Pending {
        rows: Vec<usize>,
        parent: Option<(usize, bool)>,
    }

    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut stack = vec![Pending {
        rows: rows.to_vec(),
        parent: None,
    }];
    while let Some(Pending { rows, parent }) = stack.pop() {
        let id = nodes.len();
        if let Some((pid, is_left)) = parent {
            if is_left {
                nodes[pid].left = Some(id);
            } else {
                nodes[pid].right = Some(id);
            }
        }
        let counts = ClassCounts::from_rows(d, &rows);
        let prediction = counts.majority();
        let decision = if counts.is_pure() || rows.len() < config.min_node {
            None
        } else {
            evaluate_node(d, &rows, features, config, rng)
        };
        match decision {
            None => nodes.push(TreeNode {
                id,
                kind: NodeKind::Leaf,
                feature: None,
                threshold: None,
                counts,
                left: None,
                right: None,
                gain: None,
                prediction,
            }),
            Some(NodeDecision { split, .. }) => {
                let column = d.column(split.feature);
                let (left, right): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&r| column[r] <= split.threshold);
                nodes.push(TreeNode {
                    id,
                    kind: NodeKind::Internal,
                    feature: Some(split.feature),
                    threshold: Some(split.threshold),
                    counts,
                    left: None,
                    right: None,
                    gain: Some(split.raw_gain),
                    prediction,
                });
                stack.push(Pending {
                    rows: right,
                    parent: Some((id, false)),
                });
                stack.push(Pending {
                    rows: left,
                    parent: Some((id, true)),
                });
            }
        }
    }
    Tree { nodes }
}
