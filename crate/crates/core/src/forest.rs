//! Random forest ensembles: ordinary RF, regularized RF (RRF) and guided RRF (GRRF).
//!
//! RF trees are independent and may be grown concurrently. RRF and GRRF
//! trees share one selected-feature set `F` and are grown strictly in order;
//! the selected subset is `F` after the last tree.
//!
//! Tree `i` always draws from stream `i` of the configured seed, so RRF with
//! λ = 1 and GRRF with γ = 0 consume identical random numbers and select the
//! same features in the same order.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::data::{sample_count, sample_rows, Dataset};
use crate::exec::Execution;
use crate::rng::{self, derive_seed};
use crate::tree::{default_mtry, grow_tree, Criterion, FeatureSet, GrowthConfig, Penalty, Tree};
use crate::{Error, Result, SCHEMA_VERSION};

/// How each tree's training rows are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleMode {
    /// `N` draws with replacement.
    Bootstrap,
    /// `⌊fraction·N⌋` distinct rows.
    WithoutReplacement { fraction: f64 },
}

/// Fraction of rows drawn without replacement for each RRF/GRRF tree.
pub const DEFAULT_SUBSAMPLE: f64 = 0.63;
pub const DEFAULT_NTREE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    Rf,
    /// Constant penalty coefficient λ for features outside `F`.
    Rrf {
        lambda: f64,
    },
    /// Per-feature coefficient `λᵢ = (1−γ)·λ₀ + γ·Impᵢ′` with base coefficient `λ₀`.
    Grrf {
        gamma: f64,
        base: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub ntree: usize,
    /// `None` means `⌈√P⌉`.
    pub mtry: Option<usize>,
    pub min_node: usize,
    pub sample_mode: SampleMode,
    pub mode: Mode,
    pub seed: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl ForestConfig {
    pub fn rf(seed: u64) -> Self {
        ForestConfig {
            ntree: DEFAULT_NTREE,
            mtry: None,
            min_node: 2,
            sample_mode: SampleMode::Bootstrap,
            mode: Mode::Rf,
            seed,
            execution: Execution::default(),
        }
    }

    pub fn rrf(lambda: f64, seed: u64) -> Self {
        ForestConfig {
            sample_mode: SampleMode::WithoutReplacement {
                fraction: DEFAULT_SUBSAMPLE,
            },
            mode: Mode::Rrf { lambda },
            ..ForestConfig::rf(seed)
        }
    }

    /// GRRF with the base coefficient fixed at 1.
    pub fn grrf(gamma: f64, seed: u64) -> Self {
        ForestConfig {
            mode: Mode::Grrf { gamma, base: 1.0 },
            ..ForestConfig::rrf(1.0, seed)
        }
    }

    pub fn with_ntree(mut self, ntree: usize) -> Self {
        self.ntree = ntree;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn resolved_mtry(&self, n_features: usize) -> usize {
        self.mtry.unwrap_or_else(|| default_mtry(n_features))
    }

    /// Checks every parameter range against a dataset with `n_features` columns.
    pub fn validate(&self, n_features: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.ntree == 0 {
            return bad("ntree must be at least 1".into());
        }
        if let Some(m) = self.mtry {
            if m == 0 || m > n_features {
                return bad(format!("mtry {m} outside [1, {n_features}]"));
            }
        }
        if self.min_node < 2 {
            return bad(format!("min_node {} must be at least 2", self.min_node));
        }
        if let SampleMode::WithoutReplacement { fraction } = self.sample_mode {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return bad(format!("subsample fraction {fraction} outside (0, 1]"));
            }
        }
        match self.mode {
            Mode::Rf => {}
            Mode::Rrf { lambda } => {
                if !(lambda > 0.0 && lambda <= 1.0) {
                    return bad(format!("lambda {lambda} outside the valid range (0, 1]"));
                }
            }
            Mode::Grrf { gamma, base } => {
                if !(0.0..=1.0).contains(&gamma) {
                    return bad(format!("gamma {gamma} outside the valid range [0, 1]"));
                }
                if !(base > 0.0 && base <= 1.0) {
                    return bad(format!(
                        "base coefficient {base} outside the valid range (0, 1]"
                    ));
                }
            }
        }
        Ok(())
    }

    fn growth(&self, n_features: usize, criterion: Criterion) -> GrowthConfig {
        GrowthConfig {
            mtry: self.resolved_mtry(n_features),
            min_node: self.min_node,
            criterion,
        }
    }

    fn draw_rows(&self, rows: &[usize], rng: &mut rng::StreamRng) -> Vec<usize> {
        match self.sample_mode {
            SampleMode::Bootstrap => sample_rows(rows, 1.0, true, rng),
            SampleMode::WithoutReplacement { fraction } => sample_rows(rows, fraction, false, rng),
        }
    }
}

/// A trained ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub config: ForestConfig,
    pub n_features: usize,
    pub n_classes: usize,
    pub feature_names: Vec<String>,
    pub trees: Vec<Tree>,
}

impl Forest {
    pub fn ntree(&self) -> usize {
        self.trees.len()
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        predict_forest(self, row)
    }

    pub fn predict_rows(&self, d: &Dataset) -> Vec<usize> {
        (0..d.n_rows()).map(|i| self.predict(&d.row(i))).collect()
    }

    /// Fraction of rows of `d` misclassified.
    pub fn error_rate(&self, d: &Dataset) -> f64 {
        let wrong = self
            .predict_rows(d)
            .iter()
            .zip(d.labels())
            .filter(|(p, l)| p != l)
            .count();
        wrong as f64 / d.n_rows() as f64
    }

    /// Distinct split features in order of first use (tree order, then node id).
    pub fn features_in_use(&self) -> Vec<FirstUse> {
        let mut seen = vec![false; self.n_features];
        let mut out = Vec::new();
        for (t, tree) in self.trees.iter().enumerate() {
            for node in tree.internal_nodes() {
                let f = node.feature.expect("internal node has a feature");
                if !seen[f] {
                    seen[f] = true;
                    out.push(FirstUse {
                        feature: f,
                        tree: t,
                        node: node.id,
                    });
                }
            }
        }
        out
    }
}

/// Where a feature first entered the selected set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstUse {
    pub feature: usize,
    pub tree: usize,
    pub node: usize,
}

/// The selected feature subset `F` of an RRF or GRRF run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Feature indices in order of entry into `F`.
    pub selected: Vec<usize>,
    pub selected_names: Vec<String>,
    pub per_feature: Vec<FirstUse>,
    pub subset_size: usize,
    pub config: ForestConfig,
}

/// Impurity importance: per-feature sum of split gains divided by `ntree`,
/// plus the same scores divided by their maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceVector {
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
    /// Set when no tree split at all; `normalized` is then all zero.
    pub all_zero: bool,
}

impl ImportanceVector {
    pub fn from_raw(raw: Vec<f64>) -> Self {
        let max = raw.iter().copied().fold(0.0, f64::max);
        let all_zero = max <= 0.0;
        let normalized = if all_zero {
            vec![0.0; raw.len()]
        } else {
            raw.iter().map(|&v| v / max).collect()
        };
        ImportanceVector {
            raw,
            normalized,
            all_zero,
        }
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    /// Feature indices sorted by decreasing raw score (stable on ties).
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.raw.len()).collect();
        idx.sort_by(|&a, &b| self.raw[b].total_cmp(&self.raw[a]));
        idx
    }
}

pub fn importance(forest: &Forest) -> ImportanceVector {
    let mut raw = vec![0.0; forest.n_features];
    for tree in &forest.trees {
        for node in tree.internal_nodes() {
            if let (Some(f), Some(g)) = (node.feature, node.gain) {
                raw[f] += g;
            }
        }
    }
    let ntree = forest.trees.len().max(1) as f64;
    for v in &mut raw {
        *v /= ntree;
    }
    ImportanceVector::from_raw(raw)
}

/// Unweighted majority vote; ties go to the smallest class index.
pub fn predict_forest(forest: &Forest, row: &[f64]) -> usize {
    let mut votes = vec![0usize; forest.n_classes];
    for tree in &forest.trees {
        votes[tree.predict(row)] += 1;
    }
    let mut best = 0;
    for (c, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = c;
        }
    }
    best
}

/// Column projection of `d` onto `selected`, in the given order.
pub fn project(d: &Dataset, selected: &[usize]) -> Result<Dataset> {
    d.select_features(selected)
}

fn check_rows(d: &Dataset, config: &ForestConfig, rows: &[usize]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no training rows".into()));
    }
    if let Some(&bad) = rows.iter().find(|&&r| r >= d.n_rows()) {
        return Err(Error::IndexOutOfRange {
            what: "rows",
            index: bad,
            len: d.n_rows(),
        });
    }
    if let SampleMode::WithoutReplacement { fraction } = config.sample_mode {
        if sample_count(rows.len(), fraction) == 0 {
            return Err(Error::InvalidParameter(format!(
                "subsample fraction {fraction} of {} rows selects nothing",
                rows.len()
            )));
        }
    }
    Ok(())
}

fn empty_forest(d: &Dataset, config: &ForestConfig) -> Forest {
    Forest {
        config: config.clone(),
        n_features: d.n_features(),
        n_classes: d.n_classes(),
        feature_names: d.feature_names().to_vec(),
        trees: Vec::with_capacity(config.ntree),
    }
}

/// Trains an ordinary random forest on `rows` (all rows when `None`).
///
/// `config.mode` must be [`Mode::Rf`]. Trees are independent and built
/// according to `config.execution`; the result does not depend on it.
pub fn train_rf(d: &Dataset, rows: Option<&[usize]>, config: &ForestConfig) -> Result<Forest> {
    if config.mode != Mode::Rf {
        return Err(Error::InvalidParameter(
            "train_rf requires the rf mode".into(),
        ));
    }
    config.validate(d.n_features())?;
    let all: Vec<usize>;
    let rows = match rows {
        Some(r) => r,
        None => {
            all = (0..d.n_rows()).collect();
            &all
        }
    };
    check_rows(d, config, rows)?;
    let growth = config.growth(d.n_features(), Criterion::Plain);
    let mut forest = empty_forest(d, config);
    forest.trees = config.execution.map_range(config.ntree, |i| {
        let mut rng = rng::stream(config.seed, i as u64);
        let sample = config.draw_rows(rows, &mut rng);
        let mut unused = FeatureSet::new(d.n_features());
        grow_tree(d, &sample, &mut unused, &growth, &mut rng)
    });
    Ok(forest)
}

fn train_regularized(
    d: &Dataset,
    config: &ForestConfig,
    penalty: Penalty,
) -> Result<(Forest, SelectionResult)> {
    let rows: Vec<usize> = (0..d.n_rows()).collect();
    check_rows(d, config, &rows)?;
    let growth = config.growth(d.n_features(), Criterion::Regularized(penalty));
    let mut features = FeatureSet::new(d.n_features());
    let mut forest = empty_forest(d, config);
    for i in 0..config.ntree {
        let mut rng = rng::stream(config.seed, i as u64);
        let sample = config.draw_rows(&rows, &mut rng);
        forest
            .trees
            .push(grow_tree(d, &sample, &mut features, &growth, &mut rng));
    }
    let per_feature = forest.features_in_use();
    debug_assert!(per_feature
        .iter()
        .map(|u| u.feature)
        .eq(features.as_slice().iter().copied()));
    let selected = features.as_slice().to_vec();
    let selection = SelectionResult {
        selected_names: selected
            .iter()
            .map(|&f| d.feature_names()[f].clone())
            .collect(),
        subset_size: selected.len(),
        selected,
        per_feature,
        config: config.clone(),
    };
    Ok((forest, selection))
}

/// Regularized random forest with constant penalty λ.
pub fn train_rrf(d: &Dataset, config: &ForestConfig) -> Result<(Forest, SelectionResult)> {
    let Mode::Rrf { lambda } = config.mode else {
        return Err(Error::InvalidParameter(
            "train_rrf requires the rrf mode".into(),
        ));
    };
    config.validate(d.n_features())?;
    train_regularized(d, config, Penalty::Constant(lambda))
}

/// Per-feature penalty coefficients `λᵢ = (1−γ)·λ₀ + γ·Impᵢ′`.
///
/// With `λ₀ = 1` this is `1 − γ(1 − Impᵢ′)`. A coefficient of exactly 0
/// (γ = 1, Impᵢ′ = 0) is kept: such a feature can never enter `F`.
pub fn guided_coefficients(normalized: &[f64], gamma: f64, base: f64) -> Vec<f64> {
    normalized
        .iter()
        .map(|&imp| (1.0 - gamma) * base + gamma * imp)
        .collect()
}

/// Guided regularized random forest; `pre_importance` comes from an
/// ordinary RF trained on the same rows.
pub fn train_grrf(
    d: &Dataset,
    pre_importance: &ImportanceVector,
    config: &ForestConfig,
) -> Result<(Forest, SelectionResult)> {
    let Mode::Grrf { gamma, base } = config.mode else {
        return Err(Error::InvalidParameter(
            "train_grrf requires the grrf mode".into(),
        ));
    };
    config.validate(d.n_features())?;
    if pre_importance.len() != d.n_features() {
        return Err(Error::InvalidParameter(format!(
            "importance vector has {} entries for {} features",
            pre_importance.len(),
            d.n_features()
        )));
    }
    let lambdas: Arc<[f64]> = guided_coefficients(&pre_importance.normalized, gamma, base).into();
    train_regularized(d, config, Penalty::PerFeature(lambdas))
}

/// Configuration of the preliminary RF that guides a GRRF run: an ordinary
/// bootstrap forest with the same size parameters and a derived seed.
pub fn preliminary_config(config: &ForestConfig) -> ForestConfig {
    ForestConfig {
        sample_mode: SampleMode::Bootstrap,
        mode: Mode::Rf,
        seed: derive_seed(config.seed, 0x5052_454c),
        ..config.clone()
    }
}

/// Output of [`select`]: the selecting forest, its subset, and for GRRF the
/// guiding importance scores.
#[derive(Debug, Clone)]
pub struct Selection {
    pub forest: Forest,
    pub result: SelectionResult,
    pub guide: Option<ImportanceVector>,
}

/// Runs RRF, or a preliminary RF followed by GRRF, on all rows of `d`.
pub fn select(d: &Dataset, config: &ForestConfig) -> Result<Selection> {
    match config.mode {
        Mode::Rf => Err(Error::InvalidParameter(
            "feature selection needs the rrf or grrf mode".into(),
        )),
        Mode::Rrf { .. } => {
            let (forest, result) = train_rrf(d, config)?;
            Ok(Selection {
                forest,
                result,
                guide: None,
            })
        }
        Mode::Grrf { .. } => {
            config.validate(d.n_features())?;
            let pre = train_rf(d, None, &preliminary_config(config))?;
            let guide = importance(&pre);
            let (forest, result) = train_grrf(d, &guide, config)?;
            Ok(Selection {
                forest,
                result,
                guide: Some(guide),
            })
        }
    }
}

/// Single JSON document carrying a forest, its configuration and selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestDocument {
    pub schema_version: u32,
    pub forest: Forest,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub selection: Option<SelectionResult>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub guide_importance: Option<ImportanceVector>,
}

impl ForestDocument {
    pub fn new(forest: Forest, selection: Option<SelectionResult>) -> Self {
        ForestDocument {
            schema_version: SCHEMA_VERSION,
            forest,
            selection,
            guide_importance: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_friedman;
    use approx::assert_relative_eq;

    fn separable() -> Dataset {
        Dataset::from_columns(
            vec![vec![0.1, 0.2, 0.8, 0.9]],
            vec![0, 0, 1, 1],
            vec!["a".into()],
            vec!["n".into(), "y".into()],
        )
        .unwrap()
    }

    #[test]
    fn defaults() {
        let c = ForestConfig::rf(1);
        assert_eq!(
            (c.ntree, c.mtry, c.sample_mode),
            (1000, None, SampleMode::Bootstrap)
        );
        let r = ForestConfig::rrf(0.8, 1);
        assert_eq!(
            r.sample_mode,
            SampleMode::WithoutReplacement { fraction: 0.63 }
        );
        assert_eq!(
            ForestConfig::grrf(0.3, 1).mode,
            Mode::Grrf {
                gamma: 0.3,
                base: 1.0
            }
        );
        assert_eq!(c.resolved_mtry(15), 4);
    }

    #[test]
    fn parameter_ranges() {
        assert!(ForestConfig::rrf(1.5, 0).validate(3).is_err());
        assert!(ForestConfig::rrf(0.0, 0).validate(3).is_err());
        assert!(ForestConfig::rrf(1.0, 0).validate(3).is_ok());
        assert!(ForestConfig::grrf(1.1, 0).validate(3).is_err());
        assert!(ForestConfig::grrf(0.0, 0).validate(3).is_ok());
        assert!(ForestConfig::rf(0).with_ntree(0).validate(3).is_err());
        let mut c = ForestConfig::rf(0);
        c.mtry = Some(4);
        assert!(c.validate(3).is_err());
    }

    #[test]
    fn single_tree_fits_separable_data() {
        let d = separable();
        let f = train_rf(&d, None, &ForestConfig::rf(3).with_ntree(1)).unwrap();
        assert_eq!(f.ntree(), 1);
        // Every row of the bootstrap sample lies on the correct side.
        for i in 0..4 {
            let pred = f.trees[0].predict(&d.row(i));
            if f.trees[0].nodes.len() > 1 {
                assert_eq!(pred, d.labels()[i]);
            }
        }
    }

    #[test]
    fn rf_is_deterministic_and_thread_independent() {
        let d = generate_friedman(200, 5).unwrap();
        let cfg = ForestConfig::rf(9).with_ntree(20);
        let a = train_rf(&d, None, &cfg).unwrap();
        let b = train_rf(&d, None, &cfg.clone().with_execution(Execution::Sequential)).unwrap();
        assert_eq!(
            serde_json::to_string(&a.trees).unwrap(),
            serde_json::to_string(&b.trees).unwrap()
        );
    }

    #[test]
    fn importance_single_root_split() {
        let d = Dataset::from_columns(
            vec![
                vec![5.0; 4],
                vec![5.0; 4],
                vec![5.0; 4],
                vec![0.0, 0.0, 1.0, 1.0],
            ],
            vec![0, 0, 1, 1],
            (0..4).map(|j| format!("f{j}")).collect(),
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        let mut cfg = ForestConfig::rf(0).with_ntree(1);
        cfg.mtry = Some(4);
        cfg.sample_mode = SampleMode::WithoutReplacement { fraction: 1.0 };
        let f = train_rf(&d, None, &cfg).unwrap();
        let imp = importance(&f);
        assert_eq!(imp.raw, [0.0, 0.0, 0.0, 0.5]);
        assert_eq!(imp.normalized[3], 1.0);
        assert!(!imp.all_zero);
    }

    #[test]
    fn importance_of_leaf_only_forest_is_flagged() {
        let d = Dataset::from_columns(
            vec![vec![1.0, 1.0]],
            vec![0, 1],
            vec!["c".into()],
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        let f = train_rf(&d, None, &ForestConfig::rf(0).with_ntree(3)).unwrap();
        let imp = importance(&f);
        assert!(imp.all_zero);
        assert_eq!(imp.normalized, [0.0]);
    }

    #[test]
    fn votes_and_ties() {
        let leaf = |c: usize| Tree {
            nodes: vec![crate::tree::TreeNode {
                id: 0,
                kind: crate::tree::NodeKind::Leaf,
                feature: None,
                threshold: None,
                counts: crate::ClassCounts::new(vec![1, 1]),
                left: None,
                right: None,
                gain: None,
                prediction: c,
            }],
        };
        let mut f = empty_forest(&separable(), &ForestConfig::rf(0));
        f.trees = vec![leaf(1)];
        assert_eq!(predict_forest(&f, &[0.0]), 1);
        f.trees = vec![leaf(0), leaf(0), leaf(1)];
        assert_eq!(predict_forest(&f, &[0.0]), 0);
        f.trees = vec![leaf(1), leaf(1), leaf(0)];
        assert_eq!(predict_forest(&f, &[0.0]), 1);
        f.trees = vec![leaf(0), leaf(1)];
        assert_eq!(predict_forest(&f, &[0.0]), 0);
        f.trees = vec![leaf(1), leaf(0)];
        assert_eq!(predict_forest(&f, &[0.0]), 0);
    }

    #[test]
    fn guided_coefficients_arithmetic() {
        let l = guided_coefficients(&[0.4, 1.0, 0.0], 0.5, 1.0);
        assert_relative_eq!(l[0], 0.7, epsilon = 1e-15);
        assert_eq!(l[1], 1.0);
        assert_eq!(l[2], 0.5);
        for g in [0.0, 0.3, 1.0] {
            assert_eq!(guided_coefficients(&[1.0], g, 1.0), [1.0]);
        }
        assert_eq!(guided_coefficients(&[0.3, 0.9], 0.0, 1.0), [1.0, 1.0]);
        assert_eq!(guided_coefficients(&[0.0], 1.0, 1.0), [0.0]);
    }

    #[test]
    fn grrf_rejects_mismatched_importance() {
        let d = separable();
        let imp = ImportanceVector::from_raw(vec![1.0, 2.0]);
        assert!(train_grrf(&d, &imp, &ForestConfig::grrf(0.5, 0)).is_err());
    }

    #[test]
    fn single_feature_selection() {
        let d = separable();
        let (f, sel) = train_rrf(&d, &ForestConfig::rrf(0.5, 2).with_ntree(5)).unwrap();
        let any_split = f.trees.iter().any(|t| t.nodes.len() > 1);
        assert_eq!(sel.selected, if any_split { vec![0] } else { vec![] });
    }

    #[test]
    fn projection() {
        let d = generate_friedman(10, 0).unwrap();
        let all: Vec<usize> = (0..15).collect();
        assert_eq!(project(&d, &all).unwrap(), d);
        assert!(matches!(project(&d, &[]), Err(Error::EmptySelection)));
        assert!(project(&d, &[15]).is_err());
        let p = project(&d, &[2, 0]).unwrap();
        assert_eq!(p.column(0), d.column(2));
        assert_eq!(p.column(1), d.column(0));
        assert_eq!(p.feature_names(), ["X3", "X1"]);
        assert_eq!(p.labels(), d.labels());
    }

    #[test]
    fn document_round_trip() {
        let d = generate_friedman(60, 1).unwrap();
        let s = select(&d, &ForestConfig::grrf(0.5, 4).with_ntree(5)).unwrap();
        let doc = ForestDocument::new(s.forest, Some(s.result));
        let text = doc.to_json().unwrap();
        assert!(text.contains("\"schema_version\":1"));
        assert!(text.contains("\"seed\":4"));
        assert_eq!(ForestDocument::from_json(&text).unwrap(), doc);
    }
}
