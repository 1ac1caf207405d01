//! Simulation sweeps: one dataset per true ordinal combination, each searched
//! with every requested criterion and strategy, scored by whether the true
//! combination is recovered and by the Hamming distance of the encodings.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::ClassifierSpec;
use crate::criteria::{CriterionName, CvContext};
use crate::data::{simulate, FoldPlan, SimulationConfig};
use crate::error::{Error, Result};
use crate::partitions::{enumerate_ordinal, ForbiddenMerges, OrdinalEncoding, Partition};
use crate::search::{Searcher, Strategy};
use crate::seeding;

/// Predefined sets of true combinations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// All 31 ordinal combinations of 6 classes with at least two groups.
    K0_6,
    /// All 127 ordinal combinations of 8 classes with at least two groups.
    K0_8,
    /// 50 random ordinal combinations of 20 classes.
    K0_20,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::K0_6 => "k0_6",
            Suite::K0_8 => "k0_8",
            Suite::K0_20 => "k0_20",
        }
    }

    pub fn k0(self) -> usize {
        match self {
            Suite::K0_6 => 6,
            Suite::K0_8 => 8,
            Suite::K0_20 => 20,
        }
    }

    pub fn true_partitions(self, seed: u64) -> Vec<Partition> {
        match self {
            Suite::K0_6 | Suite::K0_8 => enumerate_ordinal(self.k0(), true).filter(|p| p.k() >= 2).collect(),
            Suite::K0_20 => random_ordinal(20, 50, seed),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        match s {
            "k0_6" => Ok(Suite::K0_6),
            "k0_8" => Ok(Suite::K0_8),
            "k0_20" => Ok(Suite::K0_20),
            other => Err(Error::InvalidConfig(format!("unknown suite {other:?}"))),
        }
    }
}

/// `count` ordinal combinations of `k0` classes with independent fair
/// boundary bits, redrawn until at least two groups exist.
pub fn random_ordinal(k0: usize, count: usize, seed: u64) -> Vec<Partition> {
    let mut rng = seeding::rng(seed);
    (0..count)
        .map(|_| loop {
            let bits: Vec<bool> = (1..k0).map(|_| rng.random::<bool>()).collect();
            if bits.iter().any(|&b| b) {
                break OrdinalEncoding::new(bits).decode();
            }
        })
        .collect()
}

/// One search variant of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variant {
    pub strategy: Strategy,
    #[serde(default)]
    pub prune: bool,
}

impl Variant {
    pub fn new(strategy: Strategy, prune: bool) -> Variant {
        Variant { strategy, prune }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prune {
            write!(f, "{}_pruned", self.strategy)
        } else {
            write!(f, "{}", self.strategy)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub true_partitions: Vec<Partition>,
    pub step_length: f64,
    pub sigma: f64,
    pub n: usize,
    pub d: usize,
    pub folds: usize,
    pub seed: u64,
    pub classifier: ClassifierSpec,
    pub criteria: Vec<CriterionName>,
    pub variants: Vec<Variant>,
}

impl SweepConfig {
    /// Random-walk step 3, σ = 1.5, 2000 points in 5 dimensions, 5 folds.
    pub fn new(true_partitions: Vec<Partition>, classifier: ClassifierSpec) -> SweepConfig {
        SweepConfig {
            true_partitions,
            step_length: 3.0,
            sigma: 1.5,
            n: 2000,
            d: 5,
            folds: 5,
            seed: 0,
            classifier,
            criteria: vec![CriterionName::Itca],
            variants: vec![Variant::new(Strategy::Exhaustive, false)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.classifier.validate()?;
        let Some(first) = self.true_partitions.first() else {
            return Err(Error::InvalidConfig("the sweep has no true partitions".into()));
        };
        if self.true_partitions.iter().any(|p| p.k0() != first.k0() || !p.is_ordinal()) {
            return Err(Error::InvalidConfig(
                "true partitions must be ordinal over one class count".into(),
            ));
        }
        if self.criteria.is_empty() || self.variants.is_empty() {
            return Err(Error::InvalidConfig("need at least one criterion and one variant".into()));
        }
        for v in &self.variants {
            if v.prune && (v.strategy == Strategy::Exhaustive || self.criteria.iter().any(|&c| c != CriterionName::Itca)) {
                return Err(Error::InvalidConfig(format!(
                    "variant {v} prunes, which needs a heuristic strategy and itca only"
                )));
            }
        }
        Ok(())
    }

    /// The simulation for instance `index`.
    pub fn simulation(&self, index: usize) -> SimulationConfig {
        SimulationConfig::new(
            self.true_partitions[index].clone(),
            self.step_length,
            self.sigma,
            self.n,
            self.d,
            seeding::mix(self.seed, index as u64),
        )
    }
}

/// Outcome of one (instance, criterion, variant) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub instance: usize,
    pub true_partition: Partition,
    pub k_star: usize,
    pub criterion: CriterionName,
    pub variant: String,
    pub best: Partition,
    pub best_value: f64,
    pub hamming: usize,
    pub success: bool,
    pub evaluations: usize,
}

/// Simulates instance `index` and runs every criterion and variant on it.
pub fn run_instance(cfg: &SweepConfig, index: usize) -> Result<Vec<SweepRecord>> {
    let sim_cfg = cfg.simulation(index);
    let sim = simulate(&sim_cfg)?;
    let folds = FoldPlan::stratified(sim.dataset.labels(), cfg.folds, seeding::mix(sim_cfg.seed, 1))?;
    let ctx = CvContext::new(&sim.dataset, &cfg.classifier, &folds);
    let truth = &cfg.true_partitions[index];
    let truth_code = truth.encode_ordinal()?;
    let mut searcher = Searcher::new(ctx, cfg.criteria[0]);
    let mut out = Vec::new();
    for &criterion in &cfg.criteria {
        searcher.set_criterion(criterion);
        for v in &cfg.variants {
            let trace = searcher.run(v.strategy, true, &ForbiddenMerges::none(), v.prune)?;
            let hamming = trace.best.encode_ordinal()?.hamming(&truth_code)?;
            out.push(SweepRecord {
                instance: index,
                true_partition: truth.clone(),
                k_star: truth.k(),
                criterion,
                variant: v.to_string(),
                best: trace.best.clone(),
                best_value: trace.best_value,
                hamming,
                success: hamming == 0,
                evaluations: trace.evaluation_count,
            });
        }
    }
    Ok(out)
}

/// Runs every instance, in parallel, returning records in instance order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let per_instance = (0..cfg.true_partitions.len())
        .into_par_iter()
        .map(|i| run_instance(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_instance.into_iter().flatten().collect())
}

/// Table row: one criterion and variant across all instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub criterion: CriterionName,
    pub variant: String,
    pub successes: usize,
    pub total: usize,
    pub mean_hamming: f64,
    pub max_hamming: usize,
    pub mean_evaluations: f64,
}

/// Groups records by criterion and variant, in first-seen order.
pub fn summarize(records: &[SweepRecord]) -> Vec<SummaryRow> {
    let mut order = Vec::new();
    let mut groups: BTreeMap<(CriterionName, String), Vec<&SweepRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.criterion, r.variant.clone());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let rs = &groups[&key];
            let total = rs.len();
            SummaryRow {
                criterion: key.0,
                variant: key.1,
                successes: rs.iter().filter(|r| r.success).count(),
                total,
                mean_hamming: rs.iter().map(|r| r.hamming as f64).sum::<f64>() / total as f64,
                max_hamming: rs.iter().map(|r| r.hamming).max().unwrap_or(0),
                mean_evaluations: rs.iter().map(|r| r.evaluations as f64).sum::<f64>() / total as f64,
            }
        })
        .collect()
}

pub fn write_records_csv<W: Write>(records: &[SweepRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the summary with a `successes/total` column.
pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["criterion", "variant", "successes", "mean_hamming", "max_hamming", "mean_evaluations"])?;
    for r in rows {
        w.write_record([
            r.criterion.to_string(),
            r.variant.clone(),
            format!("{}/{}", r.successes, r.total),
            format!("{:.2}", r.mean_hamming),
            r.max_hamming.to_string(),
            format!("{:.2}", r.mean_evaluations),
        ])?;
    }
    w.flush()?;
    Ok(())
}
