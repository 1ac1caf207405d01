//! Classification algorithms fitted on combined labels.
//!
//! [`ClassifierSpec`] describes an algorithm and its hyperparameters;
//! [`ClassifierSpec::fit`] produces an immutable [`TrainedClassifier`].
//! Labels are 0-based combined classes throughout.

mod forest;
mod lda;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::data::{class_counts, FeatureMatrix};
use crate::error::{Error, Result};
use crate::partitions::Partition;
use crate::seeding;

pub use forest::{ForestParams, RandomForest};
pub use lda::Lda;

/// Default ridge added to the pooled covariance, relative to its mean variance.
pub const DEFAULT_SHRINKAGE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Lda,
    SoftLda,
    NearestCentroid,
    RandomForest,
    Majority,
    Oracle,
}

impl ClassifierKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Lda => "lda",
            ClassifierKind::SoftLda => "soft_lda",
            ClassifierKind::NearestCentroid => "nearest_centroid",
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::Majority => "majority",
            ClassifierKind::Oracle => "oracle",
        }
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ClassifierKind> {
        Ok(match s {
            "lda" => ClassifierKind::Lda,
            "soft_lda" => ClassifierKind::SoftLda,
            "nearest_centroid" => ClassifierKind::NearestCentroid,
            "random_forest" => ClassifierKind::RandomForest,
            "majority" => ClassifierKind::Majority,
            "oracle" => ClassifierKind::Oracle,
            other => return Err(Error::InvalidConfig(format!("unknown classifier {other:?}"))),
        })
    }
}

/// The idealized classifier: perfect outside `same_distributed`, and inside
/// it a random guess among those classes in proportion to their probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleSpec {
    /// 0-based original classes sharing one feature distribution.
    pub same_distributed: Vec<usize>,
    pub class_probabilities: Vec<f64>,
}

impl OracleSpec {
    pub fn validate(&self) -> Result<()> {
        let k0 = self.class_probabilities.len();
        if self.same_distributed.len() == 1 {
            return Err(Error::InvalidConfig(
                "the same-distributed set needs at least two classes or none".into(),
            ));
        }
        if let Some(&c) = self.same_distributed.iter().find(|&&c| c >= k0) {
            return Err(Error::LabelOutOfRange { label: c + 1, k0 });
        }
        let total: f64 = self.class_probabilities.iter().sum();
        if self.class_probabilities.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(
                "oracle class probabilities must be nonnegative and sum to 1".into(),
            ));
        }
        if self.same_distributed.iter().all(|&c| self.class_probabilities[c] == 0.0)
            && !self.same_distributed.is_empty()
        {
            return Err(Error::InvalidConfig(
                "same-distributed classes have zero total probability".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClassifierParams {
    Lda { shrinkage: f64 },
    SoftLda { shrinkage: f64 },
    NearestCentroid,
    RandomForest(ForestParams),
    Majority,
    Oracle(OracleSpec),
}

/// An algorithm plus its hyperparameters and base seed.
///
/// Serialized as `{"kind": "...", "params": {...}, "seed": ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct ClassifierSpec {
    pub params: ClassifierParams,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn lda() -> ClassifierSpec {
        ClassifierSpec::new(ClassifierParams::Lda {
            shrinkage: DEFAULT_SHRINKAGE,
        })
    }

    pub fn soft_lda() -> ClassifierSpec {
        ClassifierSpec::new(ClassifierParams::SoftLda {
            shrinkage: DEFAULT_SHRINKAGE,
        })
    }

    pub fn nearest_centroid() -> ClassifierSpec {
        ClassifierSpec::new(ClassifierParams::NearestCentroid)
    }

    pub fn random_forest(params: ForestParams) -> ClassifierSpec {
        ClassifierSpec::new(ClassifierParams::RandomForest(params))
    }

    pub fn majority() -> ClassifierSpec {
        ClassifierSpec::new(ClassifierParams::Majority)
    }

    pub fn oracle(same_distributed: Vec<usize>, class_probabilities: Vec<f64>) -> ClassifierSpec {
        ClassifierSpec::new(ClassifierParams::Oracle(OracleSpec {
            same_distributed,
            class_probabilities,
        }))
    }

    pub fn new(params: ClassifierParams) -> ClassifierSpec {
        ClassifierSpec { params, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> ClassifierSpec {
        self.seed = seed;
        self
    }

    pub fn kind(&self) -> ClassifierKind {
        match self.params {
            ClassifierParams::Lda { .. } => ClassifierKind::Lda,
            ClassifierParams::SoftLda { .. } => ClassifierKind::SoftLda,
            ClassifierParams::NearestCentroid => ClassifierKind::NearestCentroid,
            ClassifierParams::RandomForest(_) => ClassifierKind::RandomForest,
            ClassifierParams::Majority => ClassifierKind::Majority,
            ClassifierParams::Oracle(_) => ClassifierKind::Oracle,
        }
    }

    /// Default hyperparameters for `kind`. The oracle has no defaults.
    pub fn default_for(kind: ClassifierKind) -> Result<ClassifierSpec> {
        Ok(match kind {
            ClassifierKind::Lda => ClassifierSpec::lda(),
            ClassifierKind::SoftLda => ClassifierSpec::soft_lda(),
            ClassifierKind::NearestCentroid => ClassifierSpec::nearest_centroid(),
            ClassifierKind::RandomForest => ClassifierSpec::random_forest(ForestParams::default()),
            ClassifierKind::Majority => ClassifierSpec::majority(),
            ClassifierKind::Oracle => {
                return Err(Error::InvalidConfig(
                    "the oracle needs same_distributed and class_probabilities".into(),
                ))
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        match &self.params {
            ClassifierParams::Lda { shrinkage } | ClassifierParams::SoftLda { shrinkage } => {
                if !(*shrinkage >= 0.0 && shrinkage.is_finite()) {
                    return Err(Error::InvalidConfig("shrinkage must be >= 0".into()));
                }
                Ok(())
            }
            ClassifierParams::RandomForest(p) => p.validate(),
            ClassifierParams::Oracle(o) => o.validate(),
            ClassifierParams::NearestCentroid | ClassifierParams::Majority => Ok(()),
        }
    }

    /// Fits on `x` with 0-based combined labels `y` in `0..partition.k()`.
    ///
    /// `seed` drives any randomness in fitting (bootstrap, feature sampling).
    pub fn fit(&self, x: &FeatureMatrix, y: &[usize], partition: &Partition, seed: u64) -> Result<TrainedClassifier> {
        if x.n() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.n(),
                right: y.len(),
            });
        }
        let k = partition.k();
        if let Some(&bad) = y.iter().find(|&&c| c >= k) {
            return Err(Error::LabelOutOfRange { label: bad + 1, k0: k });
        }
        let model = match &self.params {
            ClassifierParams::Lda { shrinkage } => Model::Lda(Lda::fit(x, y, k, *shrinkage)?, false),
            ClassifierParams::SoftLda { shrinkage } => Model::Lda(Lda::fit(x, y, k, *shrinkage)?, true),
            ClassifierParams::NearestCentroid => Model::Centroid(centroids(x, y, k)?),
            ClassifierParams::RandomForest(p) => Model::Forest(RandomForest::fit(x, y, k, p, seed)?),
            ClassifierParams::Majority => Model::Majority(majority_class(y, k)),
            ClassifierParams::Oracle(o) => {
                o.validate()?;
                if o.class_probabilities.len() != partition.k0() {
                    return Err(Error::LengthMismatch {
                        left: o.class_probabilities.len(),
                        right: partition.k0(),
                    });
                }
                Model::Oracle(o.clone(), partition.clone())
            }
        };
        Ok(TrainedClassifier { model, k, d: x.d() })
    }
}

#[derive(Clone, Debug)]
enum Model {
    Lda(Lda, bool),
    Centroid(Vec<Vec<f64>>),
    Forest(RandomForest),
    Majority(usize),
    Oracle(OracleSpec, Partition),
}

/// A fitted, read-only predictor over `k` combined classes.
#[derive(Clone, Debug)]
pub struct TrainedClassifier {
    model: Model,
    k: usize,
    d: usize,
}

impl TrainedClassifier {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Hard 0-based predictions.
    ///
    /// Soft LDA and the oracle draw from a stream seeded by `seed`; the other
    /// kinds ignore it. The oracle also needs the original 0-based labels.
    pub fn predict(&self, x: &FeatureMatrix, seed: u64, truth: Option<&[usize]>) -> Result<Vec<usize>> {
        if x.d() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: x.d(),
            });
        }
        match &self.model {
            Model::Lda(lda, false) => Ok(x.rows().take(x.n()).map(|r| lda.predict_row(r)).collect()),
            Model::Lda(lda, true) => {
                let mut rng = seeding::rng(seed);
                Ok(x.rows()
                    .take(x.n())
                    .map(|r| sample_softmax(&lda.scores(r), &mut rng))
                    .collect())
            }
            Model::Centroid(centers) => Ok(x
                .rows()
                .take(x.n())
                .map(|r| nearest(centers, r))
                .collect()),
            Model::Forest(forest) => Ok(x.rows().take(x.n()).map(|r| forest.predict_row(r)).collect()),
            Model::Majority(c) => Ok(vec![*c; x.n()]),
            Model::Oracle(spec, partition) => {
                let truth = truth.ok_or(Error::MissingTruth)?;
                if truth.len() != x.n() {
                    return Err(Error::LengthMismatch {
                        left: truth.len(),
                        right: x.n(),
                    });
                }
                oracle_predict(spec, partition, truth, seed)
            }
        }
    }
}

/// Index of the largest value, lowest index on ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn softmax(scores: &[f64]) -> Vec<f64> {
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = scores.iter().map(|s| (s - top).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

fn sample_softmax<R: Rng>(scores: &[f64], rng: &mut R) -> usize {
    sample_discrete(&softmax(scores), rng)
}

/// Inverse-CDF draw from unnormalized nonnegative weights.
fn sample_discrete<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
            acc += w;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

fn centroids(x: &FeatureMatrix, y: &[usize], k: usize) -> Result<Vec<Vec<f64>>> {
    let counts = class_counts(y, k);
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::DegenerateClass { class: empty + 1 });
    }
    let mut sums = vec![vec![0.0; x.d()]; k];
    for (row, &c) in x.rows().zip(y) {
        for (s, v) in sums[c].iter_mut().zip(row) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        for v in s.iter_mut() {
            *v /= c as f64;
        }
    }
    Ok(sums)
}

fn nearest(centers: &[Vec<f64>], row: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.iter().enumerate() {
        let d: f64 = center.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn majority_class(y: &[usize], k: usize) -> usize {
    let counts = class_counts(y, k);
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

fn oracle_predict(spec: &OracleSpec, partition: &Partition, truth: &[usize], seed: u64) -> Result<Vec<usize>> {
    let k0 = partition.k0();
    let weights: Vec<f64> = spec
        .same_distributed
        .iter()
        .map(|&c| spec.class_probabilities[c])
        .collect();
    let mut rng = seeding::rng(seed);
    truth
        .iter()
        .map(|&y| {
            if y >= k0 {
                return Err(Error::LabelOutOfRange { label: y + 1, k0 });
            }
            if spec.same_distributed.contains(&y) {
                let guess = spec.same_distributed[sample_discrete(&weights, &mut rng)];
                Ok(partition.class_of(guess))
            } else {
                Ok(partition.class_of(y))
            }
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    kind: ClassifierKind,
    #[serde(default)]
    params: Map<String, Value>,
    #[serde(default)]
    seed: u64,
}

struct Params {
    kind: ClassifierKind,
    map: Map<String, Value>,
}

impl Params {
    fn take_f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| self.bad(key, "a number")),
        }
    }

    fn take_usize(&mut self, key: &str) -> Result<Option<usize>> {
        match self.map.remove(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_u64()
                .map(|u| Some(u as usize))
                .ok_or_else(|| self.bad(key, "a nonnegative integer")),
        }
    }

    fn take_bool(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(v) => v.as_bool().ok_or_else(|| self.bad(key, "a boolean")),
        }
    }

    fn take_value<T: serde::de::DeserializeOwned>(&mut self, key: &str, what: &str) -> Result<T> {
        let v = self
            .map
            .remove(key)
            .ok_or_else(|| Error::InvalidConfig(format!("{} needs parameter {key:?}", self.kind.name())))?;
        serde_json::from_value(v).map_err(|_| self.bad(key, what))
    }

    fn bad(&self, key: &str, what: &str) -> Error {
        Error::InvalidConfig(format!("{} parameter {key:?} must be {what}", self.kind.name()))
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            None => Ok(()),
            Some(k) => Err(Error::InvalidConfig(format!(
                "unknown {} parameter {k:?}",
                self.kind.name()
            ))),
        }
    }
}

impl TryFrom<RawSpec> for ClassifierSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<ClassifierSpec> {
        let mut p = Params {
            kind: raw.kind,
            map: raw.params,
        };
        let params = match raw.kind {
            ClassifierKind::Lda => ClassifierParams::Lda {
                shrinkage: p.take_f64("shrinkage", DEFAULT_SHRINKAGE)?,
            },
            ClassifierKind::SoftLda => ClassifierParams::SoftLda {
                shrinkage: p.take_f64("shrinkage", DEFAULT_SHRINKAGE)?,
            },
            ClassifierKind::NearestCentroid => ClassifierParams::NearestCentroid,
            ClassifierKind::Majority => ClassifierParams::Majority,
            ClassifierKind::RandomForest => {
                let defaults = ForestParams::default();
                ClassifierParams::RandomForest(ForestParams {
                    trees: p.take_usize("trees")?.unwrap_or(defaults.trees),
                    max_features: p.take_usize("max_features")?,
                    min_samples_split: p
                        .take_usize("min_samples_split")?
                        .unwrap_or(defaults.min_samples_split),
                    max_depth: p.take_usize("max_depth")?,
                    bootstrap: p.take_bool("bootstrap", defaults.bootstrap)?,
                })
            }
            ClassifierKind::Oracle => {
                let same: Vec<usize> = p.take_value("same_distributed", "a list of 1-based labels")?;
                if same.contains(&0) {
                    return Err(p.bad("same_distributed", "a list of 1-based labels"));
                }
                ClassifierParams::Oracle(OracleSpec {
                    same_distributed: same.into_iter().map(|c| c - 1).collect(),
                    class_probabilities: p.take_value("class_probabilities", "a list of probabilities")?,
                })
            }
        };
        p.finish()?;
        let spec = ClassifierSpec {
            params,
            seed: raw.seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<ClassifierSpec> for RawSpec {
    fn from(spec: ClassifierSpec) -> RawSpec {
        let kind = spec.kind();
        let mut params = Map::new();
        match spec.params {
            ClassifierParams::Lda { shrinkage } | ClassifierParams::SoftLda { shrinkage } => {
                params.insert("shrinkage".into(), shrinkage.into());
            }
            ClassifierParams::RandomForest(f) => {
                params.insert("trees".into(), f.trees.into());
                if let Some(m) = f.max_features {
                    params.insert("max_features".into(), m.into());
                }
                params.insert("min_samples_split".into(), f.min_samples_split.into());
                if let Some(m) = f.max_depth {
                    params.insert("max_depth".into(), m.into());
                }
                params.insert("bootstrap".into(), f.bootstrap.into());
            }
            ClassifierParams::Oracle(o) => {
                let same: Vec<usize> = o.same_distributed.iter().map(|c| c + 1).collect();
                params.insert("same_distributed".into(), same.into());
                params.insert("class_probabilities".into(), o.class_probabilities.into());
            }
            ClassifierParams::NearestCentroid | ClassifierParams::Majority => {}
        }
        RawSpec {
            kind,
            params,
            seed: spec.seed,
        }
    }
}
