//! Datasets, CSV I/O, stratified folds and the random-walk Gaussian simulator.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::Partition;
use crate::seeding;

/// Dense row-major `n × d` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<FeatureMatrix> {
        if values.len() != n * d {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: n * d,
            });
        }
        Ok(FeatureMatrix { n, d, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<FeatureMatrix> {
        let d = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Ok(FeatureMatrix {
            n: rows.len(),
            d,
            values,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics, and a zero-width matrix has no meaningful rows
        self.values.chunks_exact(self.d.max(1))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn gather(&self, indices: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            n: indices.len(),
            d: self.d,
            values,
        }
    }
}

/// Features plus 0-based labels in `0..k0`.
///
/// Every class in `0..k0` has at least one point and all features are finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: FeatureMatrix,
    labels: Vec<usize>,
    k0: usize,
    class_names: Vec<String>,
    feature_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset with default names (`x1..xd`, `1..k0`).
    pub fn new(features: FeatureMatrix, labels: Vec<usize>, k0: usize) -> Result<Dataset> {
        let class_names = (1..=k0).map(|c| c.to_string()).collect();
        let feature_names = (1..=features.d()).map(|j| format!("x{j}")).collect();
        Dataset::with_names(features, labels, k0, class_names, feature_names)
    }

    pub fn with_names(
        features: FeatureMatrix,
        labels: Vec<usize>,
        k0: usize,
        class_names: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Dataset> {
        if features.n() == 0 {
            return Err(Error::InvalidDataset("no rows".into()));
        }
        if features.d() == 0 {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        if labels.len() != features.n() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: features.n(),
            });
        }
        if class_names.len() != k0 || feature_names.len() != features.d() {
            return Err(Error::InvalidDataset("name list has the wrong length".into()));
        }
        if let Some(pos) = features.values().iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite feature at row {}, column {}",
                pos / features.d() + 1,
                pos % features.d() + 1
            )));
        }
        let mut counts = vec![0usize; k0];
        for &y in &labels {
            if y >= k0 {
                return Err(Error::LabelOutOfRange { label: y + 1, k0 });
            }
            counts[y] += 1;
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidDataset(format!(
                "class {} has no points",
                empty + 1
            )));
        }
        Ok(Dataset {
            features,
            labels,
            k0,
            class_names,
            feature_names,
        })
    }

    pub fn n(&self) -> usize {
        self.features.n()
    }

    pub fn d(&self) -> usize {
        self.features.d()
    }

    pub fn k0(&self) -> usize {
        self.k0
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_counts(&self) -> Vec<usize> {
        class_counts(&self.labels, self.k0)
    }

    /// `p̂_k = count(k) / n`.
    pub fn class_proportions(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.class_counts().iter().map(|&c| c as f64 / n).collect()
    }

    /// Same rows with labels replaced by `labels` (for example after splitting a class).
    pub fn relabel(&self, labels: Vec<usize>, k0: usize, class_names: Vec<String>) -> Result<Dataset> {
        Dataset::with_names(
            self.features.clone(),
            labels,
            k0,
            class_names,
            self.feature_names.clone(),
        )
    }

    /// Writes a header row, the features and a trailing `label` column of class names.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push("label");
        out.write_record(&header)?;
        let mut record = Vec::with_capacity(self.d() + 1);
        for (row, &y) in self.features.rows().zip(&self.labels) {
            record.clear();
            record.extend(row.iter().map(|v| v.to_string()));
            record.push(self.class_names[y].clone());
            out.write_record(&record)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

pub fn class_counts(labels: &[usize], k: usize) -> Vec<usize> {
    let mut counts = vec![0; k];
    for &y in labels {
        counts[y] += 1;
    }
    counts
}

/// Reads a headed CSV. Integer labels in `label_column` are numbered in
/// ascending order, any other labels by first appearance; every other
/// column must be numeric.
pub fn load_csv(path: &Path, label_column: &str) -> Result<Dataset> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, label_column)
}

pub fn read_csv<R: std::io::Read>(reader: R, label_column: &str) -> Result<Dataset> {
    let mut input = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = input.headers()?.iter().map(str::to_string).collect();
    let label_at = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::InvalidDataset(format!("no column named {label_column:?}")))?;
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != label_at)
        .map(|(_, h)| h.clone())
        .collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut n = 0;
    for record in input.records() {
        let record = record?;
        let row = record.position().map_or(n + 2, |p| p.line() as usize);
        for (j, name) in header.iter().enumerate() {
            let cell = record.get(j).unwrap_or("");
            if cell.is_empty() {
                return Err(Error::Parse {
                    row,
                    column: name.clone(),
                    reason: "missing value".into(),
                });
            }
            if j == label_at {
                let class = match class_names.iter().position(|c| c == cell) {
                    Some(c) => c,
                    None => {
                        class_names.push(cell.to_string());
                        class_names.len() - 1
                    }
                };
                labels.push(class);
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::NonNumericFeature {
                    row,
                    column: name.clone(),
                    value: cell.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(Error::NonNumericFeature {
                        row,
                        column: name.clone(),
                        value: cell.to_string(),
                    });
                }
                values.push(v);
            }
        }
        if record.len() > header.len() {
            return Err(Error::Parse {
                row,
                column: format!("#{}", header.len() + 1),
                reason: "more fields than header columns".into(),
            });
        }
        n += 1;
    }
    if class_names.len() < 2 {
        return Err(Error::SingleClass);
    }
    // Integer labels usually carry an order; keep it.
    let numeric: Option<Vec<i64>> = class_names.iter().map(|c| c.parse().ok()).collect();
    if let Some(keys) = numeric {
        let mut order: Vec<usize> = (0..class_names.len()).collect();
        order.sort_by_key(|&c| keys[c]);
        let mut rank = vec![0; order.len()];
        for (r, &c) in order.iter().enumerate() {
            rank[c] = r;
        }
        labels.iter_mut().for_each(|y| *y = rank[*y]);
        class_names = order.iter().map(|&c| class_names[c].clone()).collect();
    }
    let k0 = class_names.len();
    let features = FeatureMatrix::new(n, feature_names.len(), values)?;
    Dataset::with_names(features, labels, k0, class_names, feature_names)
}

/// Assignment of every point to one of `r` cross-validation folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    r: usize,
    seed: u64,
    assignment: Vec<usize>,
}

impl FoldPlan {
    /// Shuffles each class independently, lays the classes end to end and
    /// deals positions round-robin, so both overall and per-class fold sizes
    /// differ by at most one.
    pub fn stratified(labels: &[usize], r: usize, seed: u64) -> Result<FoldPlan> {
        if r < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 folds, got {r}")));
        }
        if labels.len() < r {
            return Err(Error::TooFewPoints {
                n: labels.len(),
                folds: r,
            });
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, &y) in labels.iter().enumerate() {
            by_class[y].push(i);
        }
        let mut rng = seeding::rng(seed);
        let mut assignment = vec![0; labels.len()];
        let mut position = 0;
        for members in &mut by_class {
            members.shuffle(&mut rng);
            for &i in members.iter() {
                assignment[i] = position % r;
                position += 1;
            }
        }
        Ok(FoldPlan {
            r,
            seed,
            assignment,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn eval_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        class_counts(&self.assignment, self.r)
    }
}

pub fn stratified_folds(ds: &Dataset, r: usize, seed: u64) -> Result<FoldPlan> {
    FoldPlan::stratified(ds.labels(), r, seed)
}

fn default_max_attempts() -> usize {
    10_000
}

/// Random-walk Gaussian simulation.
///
/// Centers start at the origin and take `K* − 1` steps of length
/// `step_length` in uniformly random directions; the walk is redrawn until
/// all centers are more than `sigma` apart. Each point draws a true class
/// `Y*` uniformly, an observed class `Y` uniformly among the observed
/// classes mapped to `Y*`, and features from `N(μ_{Y*}, σ² I)`.
///
/// With `class_probabilities` set, `Y` is drawn from those probabilities
/// instead and `Y* = π*(Y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub k0: usize,
    pub true_partition: Partition,
    pub step_length: f64,
    pub sigma: f64,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_probabilities: Option<Vec<f64>>,
    #[serde(default = "default_max_attempts")]
    pub max_center_attempts: usize,
}

impl SimulationConfig {
    pub fn new(true_partition: Partition, step_length: f64, sigma: f64, n: usize, d: usize, seed: u64) -> SimulationConfig {
        SimulationConfig {
            k0: true_partition.k0(),
            true_partition,
            step_length,
            sigma,
            n,
            d,
            seed,
            class_probabilities: None,
            max_center_attempts: default_max_attempts(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.k0 != self.true_partition.k0() {
            return bad(format!(
                "k0 = {} but the true partition covers {} classes",
                self.k0,
                self.true_partition.k0()
            ));
        }
        if !(self.step_length > 0.0 && self.step_length.is_finite()) {
            return bad("step_length must be positive".into());
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be positive".into());
        }
        if self.n == 0 || self.d == 0 {
            return bad("n and d must be positive".into());
        }
        if self.max_center_attempts == 0 {
            return bad("max_center_attempts must be positive".into());
        }
        if let Some(p) = &self.class_probabilities {
            if p.len() != self.k0 {
                return bad(format!("{} class probabilities for {} classes", p.len(), self.k0));
            }
            if p.iter().any(|&v| !(v >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return bad("class probabilities must be nonnegative and sum to 1".into());
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Simulation {
    pub dataset: Dataset,
    /// `K* × d` true-class centers.
    pub centers: Vec<Vec<f64>>,
    /// 0-based true class of every point.
    pub true_classes: Vec<usize>,
}

pub fn simulate(cfg: &SimulationConfig) -> Result<Simulation> {
    cfg.validate()?;
    let mut rng = seeding::rng(cfg.seed);
    let k_star = cfg.true_partition.k();
    let centers = random_walk_centers(&mut rng, k_star, cfg)?;

    let groups = cfg.true_partition.groups();
    let weights = match &cfg.class_probabilities {
        Some(p) => Some(
            WeightedIndex::new(p).map_err(|e| Error::InvalidConfig(e.to_string()))?,
        ),
        None => None,
    };
    let mut values = Vec::with_capacity(cfg.n * cfg.d);
    let mut labels = Vec::with_capacity(cfg.n);
    let mut true_classes = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let (y, y_star) = match &weights {
            Some(w) => {
                let y = w.sample(&mut rng);
                (y, cfg.true_partition.class_of(y))
            }
            None => {
                let y_star = rng.random_range(0..k_star);
                let members = &groups[y_star];
                (members[rng.random_range(0..members.len())], y_star)
            }
        };
        for mu in &centers[y_star] {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push(mu + cfg.sigma * z);
        }
        labels.push(y);
        true_classes.push(y_star);
    }
    let features = FeatureMatrix::new(cfg.n, cfg.d, values)?;
    let dataset = Dataset::new(features, labels, cfg.k0)?;
    Ok(Simulation {
        dataset,
        centers,
        true_classes,
    })
}

fn random_walk_centers<R: Rng>(rng: &mut R, k_star: usize, cfg: &SimulationConfig) -> Result<Vec<Vec<f64>>> {
    for _ in 0..cfg.max_center_attempts {
        let mut centers = vec![vec![0.0; cfg.d]];
        while centers.len() < k_star {
            let direction = unit_vector(rng, cfg.d);
            let last = centers.last().expect("non-empty");
            let next = last
                .iter()
                .zip(&direction)
                .map(|(m, v)| m + cfg.step_length * v)
                .collect();
            centers.push(next);
        }
        if min_pairwise_distance(&centers) > cfg.sigma {
            return Ok(centers);
        }
    }
    Err(Error::CenterGenerationTimeout {
        attempts: cfg.max_center_attempts,
    })
}

fn unit_vector<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Smallest Euclidean distance between two rows; infinite for fewer than two rows.
pub fn min_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            best = best.min(euclidean(&points[i], &points[j]));
        }
    }
    best
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Writes the JSON sidecar that accompanies a simulated CSV.
pub fn write_sidecar<W: Write>(cfg: &SimulationConfig, sim: &Simulation, writer: W) -> Result<()> {
    #[derive(Serialize)]
    struct Sidecar<'a> {
        config: &'a SimulationConfig,
        true_partition: String,
        centers: &'a [Vec<f64>],
    }
    serde_json::to_writer_pretty(
        writer,
        &Sidecar {
            config: cfg,
            true_partition: cfg.true_partition.to_string(),
            centers: &sim.centers,
        },
    )?;
    Ok(())
}
