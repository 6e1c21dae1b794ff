//! Dataset ingestion, coordinate scaling and labeled/unlabeled sampling.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Half-width of the box every scaled coordinate is mapped into.
pub const SCALE_LIMIT: f64 = 100.0;

/// Binary-labeled points, stored point-major (`features[i * dim + k]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<i8>,
    ids: Vec<u64>,
    #[serde(default)]
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(dim: usize, features: Vec<f64>, labels: Vec<i8>, ids: Vec<u64>) -> Result<Self> {
        let d = Dataset {
            dim,
            features,
            labels,
            ids,
            feature_names: Vec::new(),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: names.len(),
            });
        }
        self.feature_names = names;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::invalid_data("dataset needs at least one feature"));
        }
        let n = self.labels.len();
        if n < 2 {
            return Err(Error::invalid_data(format!(
                "dataset needs at least 2 points, has {n}"
            )));
        }
        if self.features.len() != n * self.dim {
            return Err(Error::DimensionMismatch {
                expected: n * self.dim,
                got: self.features.len(),
            });
        }
        if self.ids.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.ids.len(),
            });
        }
        if let Some(bad) = self.labels.iter().find(|&&l| l != 1 && l != -1) {
            return Err(Error::invalid_data(format!("label {bad} is not +1/-1")));
        }
        if self.features.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid_data("non-finite feature value"));
        }
        Ok(())
    }

    /// Number of features `p`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of points `N`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> i8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    /// Points `indices` as a contiguous point-major matrix.
    pub fn gather(&self, indices: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            out.extend_from_slice(self.point(i));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_json(path, "c2rf-dataset", self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let d: Dataset = crate::io::read_json(path, "c2rf-dataset")?;
        d.validate()?;
        Ok(d)
    }
}

/// Options for [`load_csv`].
#[derive(Clone, Debug)]
pub struct CsvOptions {
    pub label_column: String,
    pub delimiter: u8,
    /// Label value mapped to the positive class; every other class is negative.
    pub positive_label: String,
}

impl CsvOptions {
    pub fn new(label_column: impl Into<String>) -> Self {
        CsvOptions {
            label_column: label_column.into(),
            delimiter: b',',
            positive_label: "1".to_string(),
        }
    }
}

fn is_missing(field: &str) -> bool {
    let f = field.trim();
    f.is_empty()
        || ["na", "nan", "?", "null", "none"]
            .iter()
            .any(|m| f.eq_ignore_ascii_case(m))
}

fn same_label(a: &str, b: &str) -> bool {
    if a == b {
        return true;
    }
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

/// Reads a headed CSV file with one label column and numeric features.
///
/// Rows with a missing field are dropped first, then exact duplicate rows
/// (features and label) are removed keeping the first occurrence. Two or
/// three distinct classes are accepted; the class equal to
/// `opts.positive_label` becomes `+1`, all others `-1`.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, opts)
}

/// [`load_csv`] over any reader.
pub fn read_csv<R: std::io::Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let label_pos = headers
        .iter()
        .position(|h| h == opts.label_column)
        .ok_or_else(|| {
            Error::invalid_data(format!("label column '{}' not found", opts.label_column))
        })?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != label_pos)
        .map(|(_, h)| h.to_string())
        .collect();
    let dim = feature_names.len();

    let mut raw_labels: Vec<String> = Vec::new();
    let mut features: Vec<f64> = Vec::new();
    let mut ids: Vec<u64> = Vec::new();
    let mut seen: HashSet<(Vec<u64>, String)> = HashSet::new();

    for (row_no, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::invalid_data(format!(
                "row {} has {} fields, header has {}",
                row_no + 1,
                record.len(),
                headers.len()
            )));
        }
        if record.iter().any(is_missing) {
            continue;
        }
        let mut row = Vec::with_capacity(dim);
        for (k, field) in record.iter().enumerate() {
            if k == label_pos {
                continue;
            }
            let v: f64 = field.parse().map_err(|_| {
                Error::invalid_data(format!(
                    "row {}: field '{}' is not numeric",
                    row_no + 1,
                    field
                ))
            })?;
            row.push(v);
        }
        let label = record[label_pos].to_string();
        let key = (row.iter().map(|x| x.to_bits()).collect(), label.clone());
        if !seen.insert(key) {
            continue;
        }
        features.extend(row);
        raw_labels.push(label);
        ids.push(row_no as u64);
    }

    let mut classes: Vec<&str> = Vec::new();
    for l in &raw_labels {
        if !classes.iter().any(|c| same_label(c, l)) {
            classes.push(l);
        }
    }
    if classes.len() > 3 {
        return Err(Error::invalid_data(format!(
            "{} distinct classes; at most 3 are supported",
            classes.len()
        )));
    }
    if classes.len() >= 2 && !classes.iter().any(|c| same_label(c, &opts.positive_label)) {
        return Err(Error::invalid_data(format!(
            "positive label '{}' does not occur among classes {:?}",
            opts.positive_label, classes
        )));
    }
    let labels: Vec<i8> = raw_labels
        .iter()
        .map(|l| {
            if same_label(l, &opts.positive_label) {
                1
            } else {
                -1
            }
        })
        .collect();

    Dataset::new(dim, features, labels, ids)?.with_feature_names(feature_names)
}

/// Centers every coordinate on the midpoint of its range and, when the
/// centered range still exceeds `±SCALE_LIMIT`, maps it affinely onto
/// `[-SCALE_LIMIT, SCALE_LIMIT]`.
pub fn scale(d: &Dataset) -> Dataset {
    let mut out = d.clone();
    let n = d.len();
    for k in 0..d.dim {
        let col = (0..n).map(|i| d.features[i * d.dim + k]);
        let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        });
        let mut mid = 0.5 * (lo + hi);
        // Already centered up to rounding; leaving it keeps scale idempotent.
        if mid.abs() <= 1e-12 * lo.abs().max(hi.abs()) {
            mid = 0.0;
        }
        let (lo_c, hi_c) = (lo - mid, hi - mid);
        let rescale = lo_c < -SCALE_LIMIT || hi_c > SCALE_LIMIT;
        for i in 0..n {
            let x = &mut out.features[i * d.dim + k];
            *x = if rescale {
                // (x - mid - lo_c) / (hi_c - lo_c) == (x - lo) / (hi - lo)
                (2.0 * SCALE_LIMIT * (*x - lo) / (hi - lo) - SCALE_LIMIT).clamp(-SCALE_LIMIT, SCALE_LIMIT)
            } else {
                *x - mid
            };
        }
    }
    out
}

/// How the labeled points are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SamplingMode {
    /// Every point is equally likely to be labeled.
    Simple,
    /// Each labeled slot comes from the positive class with probability `p_pos`.
    Biased { p_pos: f64 },
}

/// A labeled/unlabeled partition of a [`Dataset`].
///
/// Unlabeled ground truth is kept for evaluation only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitDataset {
    pub labeled: Vec<usize>,
    pub labeled_labels: Vec<i8>,
    pub unlabeled: Vec<usize>,
    pub unlabeled_truth: Vec<i8>,
    /// Number of unlabeled points whose true class is `+1`.
    pub lambda: usize,
}

impl SplitDataset {
    pub fn n(&self) -> usize {
        self.labeled.len()
    }

    pub fn m(&self) -> usize {
        self.unlabeled.len()
    }

    /// Builds a split from labeled indices; the rest of the dataset is unlabeled.
    pub fn from_labeled(d: &Dataset, mut labeled: Vec<usize>) -> Result<Self> {
        labeled.sort_unstable();
        labeled.dedup();
        if let Some(&bad) = labeled.iter().find(|&&i| i >= d.len()) {
            return Err(Error::invalid_arg(format!("index {bad} out of range")));
        }
        let mut is_labeled = vec![false; d.len()];
        for &i in &labeled {
            is_labeled[i] = true;
        }
        let unlabeled: Vec<usize> = (0..d.len()).filter(|&i| !is_labeled[i]).collect();
        let labeled_labels = labeled.iter().map(|&i| d.label(i)).collect();
        let unlabeled_truth: Vec<i8> = unlabeled.iter().map(|&i| d.label(i)).collect();
        let lambda = unlabeled_truth.iter().filter(|&&l| l == 1).count();
        Ok(SplitDataset {
            labeled,
            labeled_labels,
            unlabeled,
            unlabeled_truth,
            lambda,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_json(path, "c2rf-split", self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        crate::io::read_json(path, "c2rf-split")
    }
}

/// Draws `round(labeled_fraction * N)` labeled points.
///
/// Biased mode fills the labeled slots one at a time: a `p_pos` coin picks the
/// class, then a point of that class is drawn uniformly without replacement.
/// When the chosen class is exhausted the other class is used.
pub fn draw_sample(
    d: &Dataset,
    labeled_fraction: f64,
    mode: SamplingMode,
    seed: u64,
) -> Result<SplitDataset> {
    if !(labeled_fraction > 0.0 && labeled_fraction < 1.0) {
        return Err(Error::invalid_arg(format!(
            "labeled fraction must lie in (0, 1), got {labeled_fraction}"
        )));
    }
    let big_n = d.len();
    let n = (labeled_fraction * big_n as f64).round() as usize;
    if n >= big_n {
        return Err(Error::invalid_arg(format!(
            "labeled sample of {n} points leaves no unlabeled data (N = {big_n})"
        )));
    }
    if n == 0 {
        return Err(Error::invalid_arg(format!(
            "labeled fraction {labeled_fraction} yields an empty sample for N = {big_n}"
        )));
    }
    let pos = d.positives();
    if pos == 0 || pos == big_n {
        return Err(Error::invalid_data("one of the two classes is empty"));
    }

    let mut rng = rng::stream(seed, rng::streams::SAMPLE);
    let labeled: Vec<usize> = match mode {
        SamplingMode::Simple => index::sample(&mut rng, big_n, n).into_vec(),
        SamplingMode::Biased { p_pos } => {
            if !(p_pos > 0.0 && p_pos < 1.0) {
                return Err(Error::invalid_arg(format!(
                    "p_pos must lie in (0, 1), got {p_pos}"
                )));
            }
            let mut pool_pos: Vec<usize> = (0..big_n).filter(|&i| d.label(i) == 1).collect();
            let mut pool_neg: Vec<usize> = (0..big_n).filter(|&i| d.label(i) == -1).collect();
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                let want_pos = rng.random::<f64>() < p_pos;
                let pool = match (want_pos, pool_pos.is_empty(), pool_neg.is_empty()) {
                    (true, false, _) | (false, _, true) => &mut pool_pos,
                    _ => &mut pool_neg,
                };
                let k = rng.random_range(0..pool.len());
                out.push(pool.swap_remove(k));
            }
            out
        }
    };
    SplitDataset::from_labeled(d, labeled)
}
