//! Datasets, CSV ingestion, row sampling and the Friedman simulation.

use std::collections::HashMap;
use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::{self, StreamRng};
use crate::{Error, Result};

/// Numeric feature matrix with integer class labels.
///
/// Values are stored column-major: the split search reads one feature at a
/// time, so each column is a contiguous slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    n_rows: usize,
    n_features: usize,
    values: Vec<f64>,
    labels: Vec<usize>,
    feature_names: Vec<String>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from per-feature columns.
    pub fn from_columns(
        columns: Vec<Vec<f64>>,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n_rows = labels.len();
        let n_features = columns.len();
        if n_rows == 0 {
            return Err(Error::InvalidDataset("no rows".into()));
        }
        if n_features == 0 {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        if feature_names.len() != n_features {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                n_features
            )));
        }
        if class_names.len() < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least two classes, got {}",
                class_names.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::InvalidDataset(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        let mut values = Vec::with_capacity(n_rows * n_features);
        for (j, column) in columns.into_iter().enumerate() {
            if column.len() != n_rows {
                return Err(Error::InvalidDataset(format!(
                    "column {j} has {} values, expected {n_rows}",
                    column.len()
                )));
            }
            if let Some(i) = column.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "non-finite value at row {i}, column {j}"
                )));
            }
            values.extend(column);
        }
        Ok(Dataset {
            n_rows,
            n_features,
            values,
            labels,
            feature_names,
            class_names,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn column(&self, feature: usize) -> &[f64] {
        &self.values[feature * self.n_rows..(feature + 1) * self.n_rows]
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.values[feature * self.n_rows + row]
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        (0..self.n_features).map(|j| self.value(row, j)).collect()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// New dataset holding the given rows, in the given order.
    pub fn take_rows(&self, rows: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_rows) {
            return Err(Error::IndexOutOfRange {
                what: "rows",
                index: bad,
                len: self.n_rows,
            });
        }
        let columns = (0..self.n_features)
            .map(|j| {
                let col = self.column(j);
                rows.iter().map(|&r| col[r]).collect()
            })
            .collect();
        let labels = rows.iter().map(|&r| self.labels[r]).collect();
        Dataset::from_columns(
            columns,
            labels,
            self.feature_names.clone(),
            self.class_names.clone(),
        )
    }

    /// Column projection; `features` order is preserved.
    pub fn select_features(&self, features: &[usize]) -> Result<Dataset> {
        if features.is_empty() {
            return Err(Error::EmptySelection);
        }
        let mut seen = HashSet::new();
        for &f in features {
            if f >= self.n_features {
                return Err(Error::IndexOutOfRange {
                    what: "features",
                    index: f,
                    len: self.n_features,
                });
            }
            if !seen.insert(f) {
                return Err(Error::InvalidParameter(format!(
                    "feature index {f} selected twice"
                )));
            }
        }
        Dataset::from_columns(
            features.iter().map(|&f| self.column(f).to_vec()).collect(),
            self.labels.clone(),
            features
                .iter()
                .map(|&f| self.feature_names[f].clone())
                .collect(),
            self.class_names.clone(),
        )
    }

    /// Writes the dataset as CSV with a header; the label goes in a trailing `class` column.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut line = String::new();
        for name in &self.feature_names {
            line.push_str(name);
            line.push(',');
        }
        line.push_str("class\n");
        out.write_all(line.as_bytes())?;
        for i in 0..self.n_rows {
            line.clear();
            for j in 0..self.n_features {
                // `{}` prints the shortest representation that parses back exactly.
                let _ = write!(line, "{},", self.value(i, j));
            }
            line.push_str(&self.class_names[self.labels[i]]);
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        out.flush()
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    /// Zero-based column index.
    Index(usize),
    Last,
}

impl LabelColumn {
    /// Interprets a user-supplied token: a header name if one matches, else a zero-based index.
    pub fn parse(token: &str) -> LabelColumn {
        match token {
            "last" => LabelColumn::Last,
            _ => LabelColumn::Name(token.to_string()),
        }
    }

    fn resolve(&self, header: Option<&[String]>, width: usize) -> Result<usize> {
        match self {
            LabelColumn::Last => Ok(width - 1),
            LabelColumn::Index(i) if *i < width => Ok(*i),
            LabelColumn::Index(i) => Err(Error::MissingColumn(i.to_string())),
            LabelColumn::Name(name) => {
                if let Some(pos) = header.and_then(|h| h.iter().position(|c| c == name)) {
                    return Ok(pos);
                }
                match name.parse::<usize>() {
                    Ok(i) if i < width => Ok(i),
                    _ => Err(Error::MissingColumn(name.clone())),
                }
            }
        }
    }
}

/// Loads a comma-separated file. See [`read_csv`].
pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, label, has_header)
}

/// Parses CSV text into a [`Dataset`].
///
/// Labels are encoded densely in order of first appearance. Every other
/// cell must parse as a finite number. Error positions are 1-based line and
/// column numbers in the file.
pub fn read_csv<R: Read>(input: R, label: &LabelColumn, has_header: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = reader.records();

    let csv_err = |e: csv::Error, line: usize| {
        let row = e.position().map(|p| p.line() as usize).unwrap_or(line);
        Error::Parse {
            row,
            column: 0,
            message: e.to_string(),
        }
    };

    let header: Option<Vec<String>> = if has_header {
        match records.next() {
            Some(rec) => Some(
                rec.map_err(|e| csv_err(e, 1))?
                    .iter()
                    .map(str::to_string)
                    .collect(),
            ),
            None => return Err(Error::InvalidDataset("empty file".into())),
        }
    } else {
        None
    };

    let mut rows: Vec<(usize, csv::StringRecord)> = Vec::new();
    let first_line = if has_header { 2 } else { 1 };
    for (k, rec) in records.enumerate() {
        let rec = rec.map_err(|e| csv_err(e, first_line + k))?;
        let line = rec
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(first_line + k);
        rows.push((line, rec));
    }
    let width = match (&header, rows.first()) {
        (Some(h), _) => h.len(),
        (None, Some((_, r))) => r.len(),
        (None, None) => return Err(Error::InvalidDataset("empty file".into())),
    };
    if rows.is_empty() {
        return Err(Error::InvalidDataset("no data rows".into()));
    }
    if width < 2 {
        return Err(Error::InvalidDataset(
            "need at least one feature column and a label column".into(),
        ));
    }
    let label_col = label.resolve(header.as_deref(), width)?;

    let feature_cols: Vec<usize> = (0..width).filter(|&c| c != label_col).collect();
    let feature_names: Vec<String> = match &header {
        Some(h) => feature_cols.iter().map(|&c| h[c].clone()).collect(),
        None => (1..=feature_cols.len()).map(|j| format!("X{j}")).collect(),
    };
    let mut seen = HashSet::new();
    for name in &feature_names {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateName(name.clone()));
        }
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(rows.len()); feature_cols.len()];
    let mut labels = Vec::with_capacity(rows.len());
    let mut class_names: Vec<String> = Vec::new();
    let mut class_index: HashMap<String, usize> = HashMap::new();
    for (line, rec) in &rows {
        if rec.len() != width {
            return Err(Error::Parse {
                row: *line,
                column: rec.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        for (slot, &c) in feature_cols.iter().enumerate() {
            let cell = &rec[c];
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: *line,
                column: c + 1,
                message: format!("`{cell}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: *line,
                    column: c + 1,
                    message: format!("`{cell}` is not finite"),
                });
            }
            columns[slot].push(v);
        }
        let token = &rec[label_col];
        let next = class_names.len();
        let id = *class_index.entry(token.to_string()).or_insert_with(|| {
            class_names.push(token.to_string());
            next
        });
        labels.push(id);
    }
    if class_names.len() < 2 {
        return Err(Error::SingleClass(class_names[0].clone()));
    }
    Dataset::from_columns(columns, labels, feature_names, class_names)
}

/// Disjoint train/test row sets produced by [`train_test_split`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    #[serde(rename = "train")]
    pub train_indices: Vec<usize>,
    #[serde(rename = "test")]
    pub test_indices: Vec<usize>,
    pub seed: u64,
}

pub(crate) fn sample_count(n: usize, fraction: f64) -> usize {
    // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
    (fraction * n as f64 + 1e-9).floor() as usize
}

/// Draws `⌊fraction·|rows|⌋` entries of `rows`, with or without replacement.
///
/// Without replacement the result is sorted; with replacement it keeps draw order.
pub(crate) fn sample_rows(
    rows: &[usize],
    fraction: f64,
    replacement: bool,
    rng: &mut StreamRng,
) -> Vec<usize> {
    let k = sample_count(rows.len(), fraction).max(1);
    if replacement {
        (0..k)
            .map(|_| rows[rng.random_range(0..rows.len())])
            .collect()
    } else {
        let mut picked: Vec<usize> = index::sample(rng, rows.len(), k.min(rows.len()))
            .into_iter()
            .map(|i| rows[i])
            .collect();
        picked.sort_unstable();
        picked
    }
}

fn check_fraction(fraction: f64, n: usize) -> Result<()> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sampling fraction {fraction} outside (0, 1]"
        )));
    }
    if sample_count(n, fraction) < 1 {
        return Err(Error::InvalidParameter(format!(
            "sampling fraction {fraction} of {n} rows selects nothing"
        )));
    }
    Ok(())
}

/// Row indices of a random subsample of `d`.
///
/// Without replacement: `⌊fraction·N⌋` distinct indices, sorted. With
/// replacement: the same number of independent uniform draws (a bootstrap
/// sample when `fraction = 1`).
pub fn subsample(d: &Dataset, fraction: f64, replacement: bool, seed: u64) -> Result<Vec<usize>> {
    check_fraction(fraction, d.n_rows())?;
    let all: Vec<usize> = (0..d.n_rows()).collect();
    Ok(sample_rows(
        &all,
        fraction,
        replacement,
        &mut rng::stream(seed, 0),
    ))
}

/// Random, unstratified train/test partition with `round(train_fraction·N)` training rows.
pub fn train_test_split(d: &Dataset, train_fraction: f64, seed: u64) -> Result<SplitPlan> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let n = d.n_rows();
    let n_train = (train_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::InvalidParameter(format!(
            "train fraction {train_fraction} of {n} rows leaves an empty partition"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, 0));
    let mut train_indices = order[..n_train].to_vec();
    let mut test_indices = order[n_train..].to_vec();
    train_indices.sort_unstable();
    test_indices.sort_unstable();
    Ok(SplitPlan {
        train_indices,
        test_indices,
        seed,
    })
}

/// Number of informative features in the Friedman layout (X1..X5).
pub const FRIEDMAN_INFORMATIVE: usize = 5;
/// Total feature count of the Friedman layout: 10 independent + 5 duplicates.
pub const FRIEDMAN_FEATURES: usize = 15;

/// Friedman's simulation turned into a two-class problem.
///
/// `X1..X10 ~ U[0,1]`, `Y = 10 sin(π X1 X2) + 20 (X3 − 0.5)² + 10 X4 + 5 X5 + e`
/// with `e ~ N(0,1)`. Rows with `Y` strictly above the sample median are
/// class `"2"`, the rest class `"1"`. Columns `X11..X15` duplicate `X1..X5`.
pub fn generate_friedman(n: usize, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "Friedman data needs at least 2 rows, got {n}"
        )));
    }
    let mut rng = rng::stream(seed, 0);
    let mut columns: Vec<Vec<f64>> = (0..FRIEDMAN_FEATURES)
        .map(|_| Vec::with_capacity(n))
        .collect();
    let mut response = Vec::with_capacity(n);
    for _ in 0..n {
        let x: [f64; 10] = std::array::from_fn(|_| rng.random::<f64>());
        let noise: f64 = rng.sample(StandardNormal);
        let y = 10.0 * (std::f64::consts::PI * x[0] * x[1]).sin()
            + 20.0 * (x[2] - 0.5).powi(2)
            + 10.0 * x[3]
            + 5.0 * x[4]
            + noise;
        response.push(y);
        for (j, v) in x.iter().enumerate() {
            columns[j].push(*v);
        }
    }
    for j in 0..FRIEDMAN_INFORMATIVE {
        columns[10 + j] = columns[j].clone();
    }
    let median = median(&response);
    let labels = response.iter().map(|&y| usize::from(y > median)).collect();
    Dataset::from_columns(
        columns,
        labels,
        (1..=FRIEDMAN_FEATURES).map(|j| format!("X{j}")).collect(),
        vec!["1".into(), "2".into()],
    )
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
