//! Replicated train/test evaluation of feature selectors, Friedman group
//! recovery, and parameter sweeps.
//!
//! One replicate: split the rows 2/3 vs 1/3 at random, run the selector on
//! the training part only, train an ordinary RF on the selected columns of
//! the training part, and measure its error on the same columns of the test
//! part. Replicates use derived seeds and may run concurrently.

use std::fmt::Write as _;

use serde::Serialize;

use crate::data::{generate_friedman, train_test_split, Dataset, FRIEDMAN_FEATURES};
use crate::exec::Execution;
use crate::forest::{self, ForestConfig, SampleMode, DEFAULT_NTREE, DEFAULT_SUBSAMPLE};
use crate::rng::derive_seed;
use crate::{Error, Result};

/// Anything that picks a feature subset from a training set.
pub trait FeatureSelector: Sync {
    /// Short method name used in reports.
    fn label(&self) -> String;
    /// The method's tuning parameter, if any.
    fn parameter(&self) -> Option<f64>;
    fn select(&self, train: &Dataset, seed: u64) -> Result<Vec<usize>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// No selection: every column (the "All-RF" baseline).
    All,
    Rrf {
        lambda: f64,
    },
    Grrf {
        gamma: f64,
    },
}

/// A built-in selector together with its forest size parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectorSpec {
    pub method: Method,
    pub ntree: usize,
    pub mtry: Option<usize>,
    pub subsample: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl SelectorSpec {
    pub fn new(method: Method) -> Self {
        SelectorSpec {
            method,
            ntree: DEFAULT_NTREE,
            mtry: None,
            subsample: DEFAULT_SUBSAMPLE,
            execution: Execution::default(),
        }
    }

    pub fn with_ntree(mut self, ntree: usize) -> Self {
        self.ntree = ntree;
        self
    }

    /// Forest configuration for this selector, or `None` for [`Method::All`].
    pub fn forest_config(&self, seed: u64) -> Option<ForestConfig> {
        let base = match self.method {
            Method::All => return None,
            Method::Rrf { lambda } => ForestConfig::rrf(lambda, seed),
            Method::Grrf { gamma } => ForestConfig::grrf(gamma, seed),
        };
        Some(ForestConfig {
            ntree: self.ntree,
            mtry: self.mtry,
            sample_mode: SampleMode::WithoutReplacement {
                fraction: self.subsample,
            },
            execution: self.execution,
            ..base
        })
    }
}

impl FeatureSelector for SelectorSpec {
    fn label(&self) -> String {
        match self.method {
            Method::All => "all".into(),
            Method::Rrf { .. } => "rrf".into(),
            Method::Grrf { .. } => "grrf".into(),
        }
    }

    fn parameter(&self) -> Option<f64> {
        match self.method {
            Method::All => None,
            Method::Rrf { lambda } => Some(lambda),
            Method::Grrf { gamma } => Some(gamma),
        }
    }

    fn select(&self, train: &Dataset, seed: u64) -> Result<Vec<usize>> {
        match self.forest_config(seed) {
            None => Ok((0..train.n_features()).collect()),
            Some(config) => Ok(forest::select(train, &config)?.result.selected),
        }
    }
}

/// Protocol settings shared by every replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub train_fraction: f64,
    /// Trees in the RF classifier trained on the selected columns.
    pub classifier_ntree: usize,
    pub execution: Execution,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            train_fraction: 2.0 / 3.0,
            classifier_ntree: DEFAULT_NTREE,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    pub seed: u64,
    pub subset_size: usize,
    /// `None` for a failed replicate.
    pub error_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Aggregated result of [`run_protocol`]. Failed replicates are excluded
/// from the means and counted in `failed`. Standard errors are
/// `sample std / √k` over the `k` successful replicates (0 when `k = 1`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub method: String,
    pub parameter: Option<f64>,
    pub per_replicate: Vec<ReplicateOutcome>,
    pub mean_size: f64,
    pub stderr_size: f64,
    pub mean_error: f64,
    pub stderr_error: f64,
    pub failed: usize,
}

/// Mean and standard error of the mean (NaN mean for an empty sample).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn replicate_seed(seed: u64, replicate: usize) -> u64 {
    derive_seed(seed, replicate as u64)
}

fn run_replicate(
    d: &Dataset,
    selector: &dyn FeatureSelector,
    seed: u64,
    replicate: usize,
    config: &EvalConfig,
) -> Result<ReplicateOutcome> {
    let rep_seed = replicate_seed(seed, replicate);
    let plan = train_test_split(d, config.train_fraction, derive_seed(rep_seed, 1))?;
    let train = d.take_rows(&plan.train_indices)?;
    let selected = selector.select(&train, derive_seed(rep_seed, 2))?;
    if selected.is_empty() {
        return Ok(ReplicateOutcome {
            replicate,
            seed: rep_seed,
            subset_size: 0,
            error_rate: None,
            failure: Some("selector returned an empty feature subset".into()),
        });
    }
    let test = d.take_rows(&plan.test_indices)?;
    let train = forest::project(&train, &selected)?;
    let test = forest::project(&test, &selected)?;
    let classifier = ForestConfig {
        ntree: config.classifier_ntree,
        execution: config.execution,
        ..ForestConfig::rf(derive_seed(rep_seed, 3))
    };
    let rf = forest::train_rf(&train, None, &classifier)?;
    Ok(ReplicateOutcome {
        replicate,
        seed: rep_seed,
        subset_size: selected.len(),
        error_rate: Some(rf.error_rate(&test)),
        failure: None,
    })
}

/// Runs `replicates` independent split/select/classify rounds.
pub fn run_protocol(
    d: &Dataset,
    selector: &dyn FeatureSelector,
    replicates: usize,
    seed: u64,
    config: &EvalConfig,
) -> Result<RunReport> {
    if replicates == 0 {
        return Err(Error::InvalidParameter(
            "replicates must be at least 1".into(),
        ));
    }
    let outcomes = config
        .execution
        .map_range(replicates, |r| run_replicate(d, selector, seed, r, config))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let ok: Vec<&ReplicateOutcome> = outcomes.iter().filter(|o| o.error_rate.is_some()).collect();
    let sizes: Vec<f64> = ok.iter().map(|o| o.subset_size as f64).collect();
    let errors: Vec<f64> = ok.iter().filter_map(|o| o.error_rate).collect();
    let (mean_size, stderr_size) = mean_stderr(&sizes);
    let (mean_error, stderr_error) = mean_stderr(&errors);
    Ok(RunReport {
        method: selector.label(),
        parameter: selector.parameter(),
        failed: outcomes.len() - ok.len(),
        per_replicate: outcomes,
        mean_size,
        stderr_size,
        mean_error,
        stderr_error,
    })
}

/// Which penalty parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepFamily {
    /// Varies λ.
    Rrf,
    /// Varies γ.
    Grrf,
}

/// One [`RunReport`] per grid value. Every grid point uses the same seed,
/// so RRF at λ = 1 and GRRF at γ = 0 see identical splits and streams.
pub fn sensitivity_sweep(
    d: &Dataset,
    family: SweepFamily,
    grid: &[f64],
    replicates: usize,
    seed: u64,
    template: &SelectorSpec,
    config: &EvalConfig,
) -> Result<Vec<RunReport>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("parameter grid is empty".into()));
    }
    grid.iter()
        .map(|&value| {
            let method = match family {
                SweepFamily::Rrf => Method::Rrf { lambda: value },
                SweepFamily::Grrf => Method::Grrf { gamma: value },
            };
            let spec = SelectorSpec {
                method,
                ..template.clone()
            };
            if let Some(cfg) = spec.forest_config(seed) {
                cfg.validate(d.n_features())?;
            }
            run_protocol(d, &spec, replicates, seed, config)
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

pub const REPORT_CSV_HEADER: &str = "method,parameter,replicate,seed,subset_size,error_rate";

/// Per-replicate rows followed by one `summary` row per report
/// (mean subset size and mean error rate).
pub fn reports_to_csv(reports: &[RunReport]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for rep in reports {
        let param = fmt_opt(rep.parameter);
        for o in &rep.per_replicate {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                rep.method,
                param,
                o.replicate,
                o.seed,
                o.subset_size,
                fmt_opt(o.error_rate)
            );
        }
    }
    for rep in reports {
        let _ = writeln!(
            out,
            "{},{},summary,,{},{}",
            rep.method,
            fmt_opt(rep.parameter),
            rep.mean_size,
            rep.mean_error
        );
    }
    out
}

/// Group structure of the Friedman layout: `{Xi, Xi+10}` for i = 1..5 are
/// interchangeable copies; X6..X10 are noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GroupMetrics {
    /// Groups with at least one selected member.
    pub groups_identified: usize,
    /// Selected noise features plus extra members beyond the first in each group.
    pub irrelevant_or_redundant: usize,
}

pub const GROUP_METRIC_DEFINITION: &str = "groups_identified = number of groups {Xi, Xi+10} (i = 1..5) with at least one selected member; \
irrelevant_or_redundant = |selected ∩ {X6..X10}| + Σ_groups max(0, selected members − 1)";

/// Scores a selected subset (zero-based indices 0..15) against the Friedman groups.
pub fn friedman_group_metrics(selected: &[usize]) -> Result<GroupMetrics> {
    let mut per_group = [0usize; 5];
    let mut noise = 0;
    for &f in selected {
        match f {
            0..=4 => per_group[f] += 1,
            5..=9 => noise += 1,
            10..=14 => per_group[f - 10] += 1,
            _ => {
                return Err(Error::IndexOutOfRange {
                    what: "Friedman features",
                    index: f,
                    len: FRIEDMAN_FEATURES,
                })
            }
        }
    }
    Ok(GroupMetrics {
        groups_identified: per_group.iter().filter(|&&c| c > 0).count(),
        irrelevant_or_redundant: noise
            + per_group
                .iter()
                .map(|&c| c.saturating_sub(1))
                .sum::<usize>(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FriedmanReplicate {
    pub replicate: usize,
    pub seed: u64,
    pub selected: Vec<usize>,
    pub metrics: GroupMetrics,
}

/// Group recovery of a selector over independently simulated Friedman data sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FriedmanReport {
    pub method: String,
    pub parameter: Option<f64>,
    pub n: usize,
    pub metric_definition: &'static str,
    pub per_replicate: Vec<FriedmanReplicate>,
    pub mean_groups: f64,
    pub stderr_groups: f64,
    pub mean_irrelevant_or_redundant: f64,
    pub stderr_irrelevant_or_redundant: f64,
    pub mean_size: f64,
    /// Mean count of selected features among X6..X10.
    pub mean_noise: f64,
}

/// Simulates `replicates` Friedman data sets of `n` rows and runs the
/// selector on each full data set.
pub fn friedman_study(
    selector: &dyn FeatureSelector,
    n: usize,
    replicates: usize,
    seed: u64,
    execution: Execution,
) -> Result<FriedmanReport> {
    if replicates == 0 {
        return Err(Error::InvalidParameter(
            "replicates must be at least 1".into(),
        ));
    }
    let per_replicate = execution
        .map_range(replicates, |r| -> Result<FriedmanReplicate> {
            let rep_seed = replicate_seed(seed, r);
            let d = generate_friedman(n, derive_seed(rep_seed, 1))?;
            let selected = selector.select(&d, derive_seed(rep_seed, 2))?;
            let metrics = friedman_group_metrics(&selected)?;
            Ok(FriedmanReplicate {
                replicate: r,
                seed: rep_seed,
                selected,
                metrics,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let col = |f: &dyn Fn(&FriedmanReplicate) -> f64| -> Vec<f64> {
        per_replicate.iter().map(f).collect()
    };
    let (mean_groups, stderr_groups) = mean_stderr(&col(&|r| r.metrics.groups_identified as f64));
    let (mean_irr, stderr_irr) = mean_stderr(&col(&|r| r.metrics.irrelevant_or_redundant as f64));
    let (mean_size, _) = mean_stderr(&col(&|r| r.selected.len() as f64));
    let (mean_noise, _) = mean_stderr(&col(&|r| {
        r.selected.iter().filter(|&&f| (5..10).contains(&f)).count() as f64
    }));
    Ok(FriedmanReport {
        method: selector.label(),
        parameter: selector.parameter(),
        n,
        metric_definition: GROUP_METRIC_DEFINITION,
        per_replicate,
        mean_groups,
        stderr_groups,
        mean_irrelevant_or_redundant: mean_irr,
        stderr_irrelevant_or_redundant: stderr_irr,
        mean_size,
        mean_noise,
    })
}

/// CSV of a Friedman study; the metric definition is written as a `#` comment header.
pub fn friedman_to_csv(report: &FriedmanReport) -> String {
    let mut out = format!("# {}\n", report.metric_definition);
    out.push_str("method,parameter,replicate,seed,subset_size,groups_identified,irrelevant_or_redundant,selected\n");
    let param = fmt_opt(report.parameter);
    for r in &report.per_replicate {
        let names: Vec<String> = r.selected.iter().map(|f| format!("X{}", f + 1)).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            report.method,
            param,
            r.replicate,
            r.seed,
            r.selected.len(),
            r.metrics.groups_identified,
            r.metrics.irrelevant_or_redundant,
            names.join(" ")
        );
    }
    let _ = writeln!(
        out,
        "{},{},summary,,{},{},{},",
        report.method,
        param,
        report.mean_size,
        report.mean_groups,
        report.mean_irrelevant_or_redundant
    );
    out
}
