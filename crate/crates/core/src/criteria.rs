//! Cross-validated criteria for a class combination.
//!
//! A partition is evaluated once per fold ([`CvContext::evaluate`]); every
//! criterion is then a pure function of the stored predictions, so switching
//! criteria never refits a classifier.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::ClassifierSpec;
use crate::data::{Dataset, FeatureMatrix, FoldPlan};
use crate::error::{Error, Result};
use crate::gmm::{gmm_kl_approx, GaussianMixture};
use crate::partitions::Partition;
use crate::seeding;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionName {
    Itca,
    ItcaAlt,
    Acc,
    Mi,
    AacProportion,
    AacCardinality,
    Ckl,
    Pe,
}

impl CriterionName {
    pub const ALL: [CriterionName; 8] = [
        CriterionName::Itca,
        CriterionName::ItcaAlt,
        CriterionName::Acc,
        CriterionName::Mi,
        CriterionName::AacProportion,
        CriterionName::AacCardinality,
        CriterionName::Ckl,
        CriterionName::Pe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CriterionName::Itca => "itca",
            CriterionName::ItcaAlt => "itca_alt",
            CriterionName::Acc => "acc",
            CriterionName::Mi => "mi",
            CriterionName::AacProportion => "aac_proportion",
            CriterionName::AacCardinality => "aac_cardinality",
            CriterionName::Ckl => "ckl",
            CriterionName::Pe => "pe",
        }
    }
}

impl fmt::Display for CriterionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CriterionName {
    type Err = Error;

    fn from_str(s: &str) -> Result<CriterionName> {
        CriterionName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown criterion {s:?}")))
    }
}

/// Where the class proportions `p̂` in the entropy and AAC weights come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProportionSource {
    /// The whole dataset.
    #[default]
    Full,
    /// The evaluation fold only.
    EvalFold,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionOptions {
    pub proportions: ProportionSource,
    pub ckl_shrinkage: f64,
}

impl Default for CriterionOptions {
    fn default() -> CriterionOptions {
        CriterionOptions {
            proportions: ProportionSource::Full,
            ckl_shrinkage: crate::classifiers::DEFAULT_SHRINKAGE,
        }
    }
}

/// Per-fold values of one criterion for one partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub name: CriterionName,
    pub per_fold: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
}

impl CriterionReport {
    /// `stderr` is the sample standard deviation (divisor `R − 1`) over `√R`.
    pub fn from_folds(name: CriterionName, per_fold: Vec<f64>) -> CriterionReport {
        let r = per_fold.len() as f64;
        let mean = per_fold.iter().sum::<f64>() / r;
        let stderr = if per_fold.len() < 2 {
            0.0
        } else {
            let var = per_fold.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
            (var / r).sqrt()
        };
        CriterionReport {
            name,
            per_fold,
            mean,
            stderr,
        }
    }
}

/// Held-out predictions for one fold.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldOutcome {
    pub eval: Vec<usize>,
    /// 0-based combined-class predictions, aligned with `eval`.
    pub predicted: Vec<usize>,
}

/// All folds of one partition.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub partition: Partition,
    pub folds: Vec<FoldOutcome>,
}

/// Per combined class: proportion and pooled held-out conditional accuracy.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalAccuracyTable {
    pub proportions: Vec<f64>,
    pub accuracies: Vec<f64>,
}

/// One held-out fold viewed through a partition.
#[derive(Clone, Copy, Debug)]
pub struct SplitView<'a> {
    pub partition: &'a Partition,
    /// Original 0-based labels of the evaluation points.
    pub truth: &'a [usize],
    /// Predicted 0-based combined labels.
    pub predicted: &'a [usize],
}

impl SplitView<'_> {
    fn n(&self) -> f64 {
        self.truth.len() as f64
    }

    fn combined(&self, i: usize) -> usize {
        self.partition.class_of(self.truth[i])
    }

    fn correct(&self, i: usize) -> bool {
        self.predicted[i] == self.combined(i)
    }

    /// Original-class proportions among the evaluation points.
    pub fn eval_proportions(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.partition.k0()];
        for &y in self.truth {
            p[y] += 1.0;
        }
        p.iter_mut().for_each(|v| *v /= self.n());
        p
    }
}

fn combine(partition: &Partition, proportions: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; partition.k()];
    for (c0, &p) in proportions.iter().enumerate() {
        out[partition.class_of(c0)] += p;
    }
    out
}

fn neg_p_ln_p(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}

/// `Σ_k −P_k ln P_k · correct_k / max(1, count_k)` with `P` the combined
/// version of the original-class `proportions`.
pub fn itca_split(v: &SplitView, proportions: &[f64]) -> f64 {
    let k = v.partition.k();
    let weights = combine(v.partition, proportions);
    let mut correct = vec![0usize; k];
    let mut count = vec![0usize; k];
    for i in 0..v.truth.len() {
        let c = v.combined(i);
        count[c] += 1;
        if v.correct(i) {
            correct[c] += 1;
        }
    }
    (0..k)
        .map(|c| neg_p_ln_p(weights[c]) * correct[c] as f64 / count[c].max(1) as f64)
        .sum()
}

/// Mean over evaluation points of `−ln P_e(π(Y)) · 1[correct]`, with `P_e`
/// the combined-class proportions in the evaluation fold.
pub fn itca_alt_split(v: &SplitView) -> f64 {
    let weights = combine(v.partition, &v.eval_proportions());
    let total: f64 = (0..v.truth.len())
        .filter(|&i| v.correct(i))
        .map(|i| -weights[v.combined(i)].ln())
        .sum();
    total / v.n()
}

pub fn acc_split(v: &SplitView) -> f64 {
    (0..v.truth.len()).filter(|&i| v.correct(i)).count() as f64 / v.n()
}

/// Plug-in mutual information between predicted combined labels and original labels.
pub fn mi_split(v: &SplitView) -> f64 {
    let (k, k0) = (v.partition.k(), v.partition.k0());
    let mut joint = vec![0usize; k * k0];
    let mut pred = vec![0usize; k];
    let mut orig = vec![0usize; k0];
    for (&a, &b) in v.predicted.iter().zip(v.truth) {
        joint[a * k0 + b] += 1;
        pred[a] += 1;
        orig[b] += 1;
    }
    let n = v.n();
    let mut mi = 0.0;
    for a in 0..k {
        for b in 0..k0 {
            let c = joint[a * k0 + b];
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (pred[a] as f64 * orig[b] as f64)).ln();
            }
        }
    }
    mi
}

/// Mean of `1[correct] / P(π(Y))` with `P` the combined `proportions`.
pub fn aac_proportion_split(v: &SplitView, proportions: &[f64]) -> f64 {
    let weights = combine(v.partition, proportions);
    let total: f64 = (0..v.truth.len())
        .filter(|&i| v.correct(i))
        .map(|i| 1.0 / weights[v.combined(i)])
        .sum();
    total / v.n()
}

/// Mean of `1[correct] / |π⁻¹(π(Y))|`.
pub fn aac_cardinality_split(v: &SplitView) -> f64 {
    let sizes = v.partition.group_sizes();
    let total: f64 = (0..v.truth.len())
        .filter(|&i| v.correct(i))
        .map(|i| 1.0 / sizes[v.combined(i)] as f64)
        .sum();
    total / v.n()
}

/// `−Σ_k q_k ln q_k`, `q_k` the fraction of points both predicted and truly in `k`.
pub fn pe_split(v: &SplitView) -> f64 {
    let mut hits = vec![0usize; v.partition.k()];
    for i in 0..v.truth.len() {
        if v.correct(i) {
            hits[v.combined(i)] += 1;
        }
    }
    hits.iter().map(|&h| neg_p_ln_p(h as f64 / v.n())).sum()
}

/// `KL(F_π ‖ F_orig) + KL(F_pred ‖ F_π)`, each feature law a Gaussian
/// mixture fitted on the evaluation fold with one component per class.
pub fn ckl_split(v: &SplitView, x: &FeatureMatrix, eval: &[usize], shrinkage: f64) -> Result<f64> {
    let combined: Vec<usize> = (0..v.truth.len()).map(|i| v.combined(i)).collect();
    let (k, k0) = (v.partition.k(), v.partition.k0());
    let f_orig = GaussianMixture::fit_groups(x, eval, v.truth, k0, shrinkage)?;
    let f_comb = GaussianMixture::fit_groups(x, eval, &combined, k, shrinkage)?;
    let f_pred = GaussianMixture::fit_groups(x, eval, v.predicted, k, shrinkage)?;
    Ok(gmm_kl_approx(&f_comb, &f_orig)? + gmm_kl_approx(&f_pred, &f_comb)?)
}

/// Population ITCA `Σ_k −p_k ln p_k · a_k`.
pub fn p_itca(class_probabilities: &[f64], conditional_accuracies: &[f64]) -> f64 {
    class_probabilities
        .iter()
        .zip(conditional_accuracies)
        .map(|(&p, &a)| neg_p_ln_p(p) * a)
        .sum()
}

/// Population prediction entropy `−Σ_k q_k ln q_k`.
pub fn p_pe(joint_correct: &[f64]) -> f64 {
    joint_correct.iter().map(|&q| neg_p_ln_p(q)).sum()
}

/// Everything needed to cross-validate partitions on one dataset.
#[derive(Clone, Copy, Debug)]
pub struct CvContext<'a> {
    pub dataset: &'a Dataset,
    pub classifier: &'a ClassifierSpec,
    pub folds: &'a FoldPlan,
    pub options: CriterionOptions,
}

impl<'a> CvContext<'a> {
    pub fn new(dataset: &'a Dataset, classifier: &'a ClassifierSpec, folds: &'a FoldPlan) -> CvContext<'a> {
        CvContext {
            dataset,
            classifier,
            folds,
            options: CriterionOptions::default(),
        }
    }

    /// Fits on each training fold and predicts the held-out fold.
    ///
    /// Seeds depend only on the classifier seed, the partition and the fold,
    /// so evaluation order never changes results.
    pub fn evaluate(&self, partition: &Partition) -> Result<Evaluation> {
        if partition.k0() != self.dataset.k0() {
            return Err(Error::LengthMismatch {
                left: partition.k0(),
                right: self.dataset.k0(),
            });
        }
        if self.folds.assignment().len() != self.dataset.n() {
            return Err(Error::LengthMismatch {
                left: self.folds.assignment().len(),
                right: self.dataset.n(),
            });
        }
        let text = partition.to_string();
        let folds = (0..self.folds.r())
            .map(|fold| {
                let seed = seeding::task_seed(self.classifier.seed, &text, fold);
                evaluate_split(
                    self.dataset,
                    &self.folds.train_indices(fold),
                    self.folds.eval_indices(fold),
                    partition,
                    self.classifier,
                    seed,
                )
                .map_err(|e| e.in_fold(fold))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Evaluation {
            partition: partition.clone(),
            folds,
        })
    }

    pub fn cv(&self, name: CriterionName, partition: &Partition) -> Result<CriterionReport> {
        self.evaluate(partition)?.report(name, self.dataset, &self.options)
    }
}

/// Fits on `train` and predicts `eval` under `partition`.
pub fn evaluate_split(
    ds: &Dataset,
    train: &[usize],
    eval: Vec<usize>,
    partition: &Partition,
    spec: &ClassifierSpec,
    seed: u64,
) -> Result<FoldOutcome> {
    let labels = ds.labels();
    let y: Vec<usize> = train.iter().map(|&i| partition.class_of(labels[i])).collect();
    let model = spec.fit(&ds.features().gather(train), &y, partition, seeding::mix(seed, 1))?;
    let truth: Vec<usize> = eval.iter().map(|&i| labels[i]).collect();
    let predicted = model.predict(&ds.features().gather(&eval), seeding::mix(seed, 2), Some(&truth))?;
    Ok(FoldOutcome { eval, predicted })
}

impl Evaluation {
    pub fn view<'a>(&'a self, fold: &'a FoldOutcome, truth: &'a [usize]) -> SplitView<'a> {
        SplitView {
            partition: &self.partition,
            truth,
            predicted: &fold.predicted,
        }
    }

    pub fn split_value(&self, name: CriterionName, ds: &Dataset, fold: &FoldOutcome, options: &CriterionOptions) -> Result<f64> {
        let truth: Vec<usize> = fold.eval.iter().map(|&i| ds.labels()[i]).collect();
        let v = self.view(fold, &truth);
        let proportions = || match options.proportions {
            ProportionSource::Full => ds.class_proportions(),
            ProportionSource::EvalFold => v.eval_proportions(),
        };
        Ok(match name {
            CriterionName::Itca => itca_split(&v, &proportions()),
            CriterionName::ItcaAlt => itca_alt_split(&v),
            CriterionName::Acc => acc_split(&v),
            CriterionName::Mi => mi_split(&v),
            CriterionName::AacProportion => aac_proportion_split(&v, &proportions()),
            CriterionName::AacCardinality => aac_cardinality_split(&v),
            CriterionName::Pe => pe_split(&v),
            CriterionName::Ckl => ckl_split(&v, ds.features(), &fold.eval, options.ckl_shrinkage)?,
        })
    }

    pub fn report(&self, name: CriterionName, ds: &Dataset, options: &CriterionOptions) -> Result<CriterionReport> {
        let per_fold = self
            .folds
            .iter()
            .enumerate()
            .map(|(f, fold)| self.split_value(name, ds, fold, options).map_err(|e| e.in_fold(f)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(CriterionReport::from_folds(name, per_fold))
    }

    /// Conditional accuracy per combined class, pooling all held-out points.
    pub fn conditional_accuracy(&self, ds: &Dataset, source: ProportionSource) -> ConditionalAccuracyTable {
        let k = self.partition.k();
        let mut correct = vec![0usize; k];
        let mut count = vec![0usize; k];
        for fold in &self.folds {
            for (&i, &pred) in fold.eval.iter().zip(&fold.predicted) {
                let c = self.partition.class_of(ds.labels()[i]);
                count[c] += 1;
                if pred == c {
                    correct[c] += 1;
                }
            }
        }
        let proportions = match source {
            ProportionSource::Full => combine(&self.partition, &ds.class_proportions()),
            ProportionSource::EvalFold => {
                let n: usize = count.iter().sum();
                count.iter().map(|&c| c as f64 / n as f64).collect()
            }
        };
        ConditionalAccuracyTable {
            proportions,
            accuracies: correct
                .iter()
                .zip(&count)
                .map(|(&a, &c)| a as f64 / c.max(1) as f64)
                .collect(),
        }
    }
}
