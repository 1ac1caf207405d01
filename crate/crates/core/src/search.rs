//! Maximizing a criterion over class combinations.
//!
//! Three strategies share one evaluation cache ([`Searcher`]):
//!
//! - exhaustive: every allowed partition with at least two classes;
//! - greedy: from the identity, repeatedly take the best one-merge neighbor
//!   while it strictly improves;
//! - breadth-first: expand every strictly improving neighbor, return the best
//!   candidate seen.
//!
//! Greedy and breadth-first search can skip merges that cannot raise
//! population ITCA given the incumbent's conditional accuracies.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::ClassifierSpec;
use crate::criteria::{
    ConditionalAccuracyTable, CriterionName, CriterionOptions, CriterionReport, CvContext, Evaluation,
};
use crate::data::{Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::partitions::{enumerate_nominal, enumerate_ordinal, ForbiddenMerges, Partition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Exhaustive,
    Greedy,
    Bfs,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Exhaustive => "exhaustive",
            Strategy::Greedy => "greedy",
            Strategy::Bfs => "bfs",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Strategy> {
        match s {
            "exhaustive" => Ok(Strategy::Exhaustive),
            "greedy" => Ok(Strategy::Greedy),
            "bfs" => Ok(Strategy::Bfs),
            other => Err(Error::InvalidConfig(format!("unknown strategy {other:?}"))),
        }
    }
}

fn default_folds() -> usize {
    5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub strategy: Strategy,
    pub criterion: CriterionName,
    pub classifier: ClassifierSpec,
    pub ordinal: bool,
    #[serde(default, skip_serializing_if = "ForbiddenMerges::is_empty")]
    pub forbidden: ForbiddenMerges,
    #[serde(default)]
    pub prune: bool,
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// Seeds the fold assignment; the classifier carries its own seed.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub options: CriterionOptions,
}

impl SearchConfig {
    pub fn new(strategy: Strategy, criterion: CriterionName, classifier: ClassifierSpec, ordinal: bool) -> SearchConfig {
        SearchConfig {
            strategy,
            criterion,
            classifier,
            ordinal,
            forbidden: ForbiddenMerges::none(),
            prune: false,
            folds: default_folds(),
            seed: 0,
            options: CriterionOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.classifier.validate()?;
        if self.folds < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 folds, got {}", self.folds)));
        }
        check_pruning(self.prune, self.strategy, self.criterion)
    }
}

fn check_pruning(prune: bool, strategy: Strategy, criterion: CriterionName) -> Result<()> {
    if prune && strategy == Strategy::Exhaustive {
        return Err(Error::InvalidConfig("pruning applies to greedy and bfs only".into()));
    }
    if prune && criterion != CriterionName::Itca {
        return Err(Error::InvalidConfig("pruning is derived for itca only".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub partition: Partition,
    pub k: usize,
    pub report: CriterionReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrunedEntry {
    pub partition: Partition,
    /// The incumbent whose conditional accuracies ruled the merge out.
    pub parent: Partition,
    /// Right-hand side of the merge condition; pruned when above 1.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub strategy: Strategy,
    pub criterion: CriterionName,
    pub evaluated: Vec<TraceEntry>,
    pub pruned: Vec<PrunedEntry>,
    pub best: Partition,
    pub best_value: f64,
    pub evaluation_count: usize,
}

impl SearchTrace {
    pub fn best_entry(&self) -> &TraceEntry {
        self.evaluated
            .iter()
            .find(|e| e.partition == self.best)
            .expect("best is always evaluated")
    }

    /// Best and runner-up means among evaluated partitions, in tie-break order.
    pub fn ranked(&self) -> Vec<&TraceEntry> {
        let mut all: Vec<&TraceEntry> = self.evaluated.iter().collect();
        all.sort_by(|a, b| rank(&b.partition, b.report.mean, &a.partition, a.report.mean));
        all
    }

    /// Writes one JSON object per evaluated partition.
    pub fn write_jsonl<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        for e in &self.evaluated {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Orders `(a, va)` against `(b, vb)`: higher value, then more classes, then
/// the lexicographically smaller canonical assignment. `Greater` means `a` wins.
pub fn rank(a: &Partition, va: f64, b: &Partition, vb: f64) -> Ordering {
    let key = |v: f64| if v.is_nan() { f64::NEG_INFINITY } else { v };
    key(va)
        .partial_cmp(&key(vb))
        .unwrap_or(Ordering::Equal)
        .then(a.k().cmp(&b.k()))
        .then_with(|| b.assignment().cmp(a.assignment()))
}

/// Every partition with `K ≥ 2` that respects the constraints, identity included.
pub fn allowed_partitions(k0: usize, ordinal: bool, forbidden: &ForbiddenMerges) -> Result<Vec<Partition>> {
    let all: Box<dyn Iterator<Item = Partition>> = if ordinal {
        Box::new(enumerate_ordinal(k0, true))
    } else {
        Box::new(enumerate_nominal(k0, true)?)
    };
    Ok(all.filter(|p| p.k() >= 2 && forbidden.admits(p)).collect())
}

/// Right-hand side of the p-ITCA merge condition for classes with
/// proportions `p_i, p_j` and conditional accuracies `a_i, a_j`:
/// `(p_i ln p_i a_i + p_j ln p_j a_j) / ((p_i + p_j) ln(p_i + p_j))`.
///
/// Infinite when `p_i + p_j ≥ 1`: the merge would leave a single class.
pub fn prune_bound(p_i: f64, p_j: f64, a_i: f64, a_j: f64) -> f64 {
    let total = p_i + p_j;
    if total >= 1.0 {
        return f64::INFINITY;
    }
    let plnp = |p: f64| if p > 0.0 { p * p.ln() } else { 0.0 };
    let denom = plnp(total);
    if denom == 0.0 {
        return 0.0;
    }
    (plnp(p_i) * a_i + plnp(p_j) * a_j) / denom
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PruneDecision {
    Keep,
    Prune,
}

/// Prunes the merge of combined classes `i` and `j` when its bound exceeds 1,
/// since the accuracy on the merged class cannot.
pub fn prune_check(i: usize, j: usize, table: &ConditionalAccuracyTable) -> PruneDecision {
    let bound = prune_bound(
        table.proportions[i],
        table.proportions[j],
        table.accuracies[i],
        table.accuracies[j],
    );
    if bound > 1.0 {
        PruneDecision::Prune
    } else {
        PruneDecision::Keep
    }
}

/// Runs searches over one dataset, classifier and fold plan, caching
/// evaluations across strategies and criteria.
pub struct Searcher<'a> {
    ctx: CvContext<'a>,
    criterion: CriterionName,
    evaluations: HashMap<Partition, Evaluation>,
    reports: HashMap<Partition, CriterionReport>,
}

impl<'a> Searcher<'a> {
    pub fn new(ctx: CvContext<'a>, criterion: CriterionName) -> Searcher<'a> {
        Searcher {
            ctx,
            criterion,
            evaluations: HashMap::new(),
            reports: HashMap::new(),
        }
    }

    pub fn criterion(&self) -> CriterionName {
        self.criterion
    }

    pub fn set_criterion(&mut self, criterion: CriterionName) {
        if criterion != self.criterion {
            self.criterion = criterion;
            self.reports.clear();
        }
    }

    pub fn evaluation(&self, p: &Partition) -> Option<&Evaluation> {
        self.evaluations.get(p)
    }

    /// Reports for `parts`, fitting uncached partitions in parallel.
    pub fn score(&mut self, parts: &[Partition]) -> Result<Vec<CriterionReport>> {
        let mut seen = HashSet::new();
        let missing: Vec<&Partition> = parts
            .iter()
            .filter(|p| !self.evaluations.contains_key(*p) && seen.insert(*p))
            .collect();
        let ctx = self.ctx;
        let fresh: Vec<Evaluation> = missing
            .par_iter()
            .map(|p| ctx.evaluate(p))
            .collect::<Result<_>>()?;
        for e in fresh {
            self.evaluations.insert(e.partition.clone(), e);
        }
        parts
            .iter()
            .map(|p| {
                if let Some(r) = self.reports.get(p) {
                    return Ok(r.clone());
                }
                let r = self.evaluations[p].report(self.criterion, ctx.dataset, &ctx.options)?;
                self.reports.insert(p.clone(), r.clone());
                Ok(r)
            })
            .collect()
    }

    pub fn run(&mut self, strategy: Strategy, ordinal: bool, forbidden: &ForbiddenMerges, prune: bool) -> Result<SearchTrace> {
        check_pruning(prune, strategy, self.criterion)?;
        if self.ctx.dataset.k0() < 2 {
            return Err(Error::SingleClass);
        }
        match strategy {
            Strategy::Exhaustive => self.exhaustive(ordinal, forbidden),
            Strategy::Greedy => self.greedy(ordinal, forbidden, prune),
            Strategy::Bfs => self.bfs(ordinal, forbidden, prune),
        }
    }

    pub fn exhaustive(&mut self, ordinal: bool, forbidden: &ForbiddenMerges) -> Result<SearchTrace> {
        let mut parts = allowed_partitions(self.ctx.dataset.k0(), ordinal, forbidden)?;
        // The identity leads the trace, as in the other strategies.
        if let Some(at) = parts.iter().position(Partition::is_identity) {
            parts[..=at].rotate_right(1);
        }
        let reports = self.score(&parts)?;
        let mut log = TraceLog::default();
        for (p, r) in parts.into_iter().zip(reports) {
            log.push(p, r);
        }
        let best = log.argmax(|_| true);
        Ok(log.finish(Strategy::Exhaustive, self.criterion, best))
    }

    pub fn greedy(&mut self, ordinal: bool, forbidden: &ForbiddenMerges, prune: bool) -> Result<SearchTrace> {
        let mut log = TraceLog::default();
        let mut current = Partition::identity(self.ctx.dataset.k0());
        let mut current_value = self.score(std::slice::from_ref(&current))?[0].mean;
        log.push(current.clone(), self.reports[&current].clone());

        while current.k() > 2 {
            let candidates = self.candidates(&current, ordinal, forbidden, prune, &mut log);
            if candidates.is_empty() {
                break;
            }
            let reports = self.score(&candidates)?;
            let mut best: Option<(Partition, f64)> = None;
            for (p, r) in candidates.into_iter().zip(reports) {
                let v = r.mean;
                log.push(p.clone(), r);
                if best
                    .as_ref()
                    .is_none_or(|(bp, bv)| rank(&p, v, bp, *bv) == Ordering::Greater)
                {
                    best = Some((p, v));
                }
            }
            let (next, value) = best.expect("non-empty");
            if value > current_value {
                current = next;
                current_value = value;
            } else {
                break;
            }
        }
        Ok(log.finish(Strategy::Greedy, self.criterion, current))
    }

    pub fn bfs(&mut self, ordinal: bool, forbidden: &ForbiddenMerges, prune: bool) -> Result<SearchTrace> {
        let mut log = TraceLog::default();
        let identity = Partition::identity(self.ctx.dataset.k0());
        let report = self.score(std::slice::from_ref(&identity))?.remove(0);
        let mut candidates: HashSet<Partition> = HashSet::new();
        let mut visited: HashSet<Partition> = HashSet::new();
        let mut queue = VecDeque::new();
        log.push(identity.clone(), report.clone());
        candidates.insert(identity.clone());
        visited.insert(identity.clone());
        queue.push_back((identity, report.mean));

        while let Some((current, value)) = queue.pop_front() {
            if current.k() < 3 {
                continue;
            }
            let fresh: Vec<Partition> = self
                .candidates(&current, ordinal, forbidden, prune, &mut log)
                .into_iter()
                .filter(|p| !visited.contains(p))
                .collect();
            let reports = self.score(&fresh)?;
            for (p, r) in fresh.into_iter().zip(reports) {
                let v = r.mean;
                log.push(p.clone(), r);
                if v > value {
                    candidates.insert(p.clone());
                    queue.push_back((p.clone(), v));
                }
                visited.insert(p);
            }
        }
        let best = log.argmax(|p| candidates.contains(p));
        Ok(log.finish(Strategy::Bfs, self.criterion, best))
    }

    /// One-merge neighbors of `current`, minus pruned merges (which are logged).
    fn candidates(
        &self,
        current: &Partition,
        ordinal: bool,
        forbidden: &ForbiddenMerges,
        prune: bool,
        log: &mut TraceLog,
    ) -> Vec<Partition> {
        let pairs = current.merge_pairs(ordinal, forbidden);
        if !prune {
            return pairs.into_iter().map(|(i, j)| current.merge(i, j)).collect();
        }
        let table = self.evaluations[current].conditional_accuracy(self.ctx.dataset, self.ctx.options.proportions);
        let mut keep = Vec::new();
        for (i, j) in pairs {
            let merged = current.merge(i, j);
            match prune_check(i, j, &table) {
                PruneDecision::Keep => keep.push(merged),
                PruneDecision::Prune => log.pruned.push(PrunedEntry {
                    partition: merged,
                    parent: current.clone(),
                    bound: prune_bound(
                        table.proportions[i],
                        table.proportions[j],
                        table.accuracies[i],
                        table.accuracies[j],
                    ),
                }),
            }
        }
        keep
    }
}

#[derive(Default)]
struct TraceLog {
    evaluated: Vec<TraceEntry>,
    seen: HashSet<Partition>,
    pruned: Vec<PrunedEntry>,
}

impl TraceLog {
    fn push(&mut self, partition: Partition, report: CriterionReport) {
        if self.seen.insert(partition.clone()) {
            self.evaluated.push(TraceEntry {
                k: partition.k(),
                partition,
                report,
            });
        }
    }

    fn argmax(&self, allowed: impl Fn(&Partition) -> bool) -> Partition {
        self.evaluated
            .iter()
            .filter(|e| allowed(&e.partition))
            .max_by(|a, b| rank(&a.partition, a.report.mean, &b.partition, b.report.mean))
            .expect("at least one partition evaluated")
            .partition
            .clone()
    }

    fn finish(self, strategy: Strategy, criterion: CriterionName, best: Partition) -> SearchTrace {
        let best_value = self
            .evaluated
            .iter()
            .find(|e| e.partition == best)
            .expect("best is evaluated")
            .report
            .mean;
        SearchTrace {
            strategy,
            criterion,
            evaluation_count: self.evaluated.len(),
            evaluated: self.evaluated,
            pruned: self.pruned,
            best,
            best_value,
        }
    }
}

/// Builds stratified folds from `cfg.seed` and runs the configured search.
pub fn search(ds: &Dataset, cfg: &SearchConfig) -> Result<SearchTrace> {
    cfg.validate()?;
    let folds = FoldPlan::stratified(ds.labels(), cfg.folds, cfg.seed)?;
    let mut ctx = CvContext::new(ds, &cfg.classifier, &folds);
    ctx.options = cfg.options;
    let mut searcher = Searcher::new(ctx, cfg.criterion);
    searcher.run(cfg.strategy, cfg.ordinal, &cfg.forbidden, cfg.prune)
}
