//! Closed-form population ITCA differences for merging two same-distributed
//! classes, and grids of those differences over the proportion simplex.
//!
//! Throughout, `Δ = p-ITCA(merged) − p-ITCA(separate)` for classes 1 and 2
//! with proportions `(p1, p2)` in `Ω = {p1 > 0, p2 > 0, p1 + p2 < 1}`; the
//! classes are merged exactly when `Δ > 0`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::classifiers::ClassifierSpec;
use crate::criteria::{CriterionName, CriterionReport, CvContext};
use crate::data::{simulate, FoldPlan, SimulationConfig};
use crate::error::{Error, Result};
use crate::partitions::Partition;
use crate::seeding;

/// Standard normal CDF through the complementary error function, which keeps
/// full relative precision in the lower tail.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn check_omega(p1: f64, p2: f64) -> Result<()> {
    if p1 > 0.0 && p2 > 0.0 && p1 + p2 < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfOmega { p1, p2 })
    }
}

fn xlnx(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// `p1² ln p1 + p2² ln p2 − (p1+p2)² ln(p1+p2)`: positive exactly where the
/// oracle merges. Equals `(p1 + p2) · oracle_delta(p1, p2)`.
pub fn oracle_region_value(p1: f64, p2: f64) -> Result<f64> {
    check_omega(p1, p2)?;
    let s = p1 + p2;
    Ok(p1 * xlnx(p1) + p2 * xlnx(p2) - s * xlnx(s))
}

/// Population ITCA gain of merging two classes the oracle cannot tell apart.
///
/// Separately each class is recovered with probability `p_i / (p1 + p2)`;
/// merged, the pair is recovered with certainty, so
/// `Δ = −s ln s + (p1² ln p1 + p2² ln p2) / s` with `s = p1 + p2`.
pub fn oracle_delta(p1: f64, p2: f64) -> Result<f64> {
    Ok(oracle_region_value(p1, p2)? / (p1 + p2))
}

/// Population ITCA gain for infinite-sample LDA with three classes: 1 and 2
/// at one mean, 3 at distance `separation = ‖μ‖/σ`.
pub fn lda_delta(p1: f64, p2: f64, separation: f64) -> Result<f64> {
    check_omega(p1, p2)?;
    if !(separation > 0.0) || separation.is_nan() {
        return Err(Error::InvalidConfig(format!("separation must be positive, got {separation}")));
    }
    let p3 = 1.0 - p1 - p2;
    let a = separation / 2.0;
    let c = 1.0 / separation;
    // p-ITCA of a two-way split between a class of proportion p (at the
    // shared mean) and class 3.
    let two_way = |p: f64| {
        let t = c * (p / p3).ln();
        -normal_cdf(a + t) * xlnx(p) - normal_cdf(a - t) * xlnx(p3)
    };
    Ok(two_way(p1 + p2) - two_way(p1.max(p2)))
}

/// [`lda_delta`] as the separation grows without bound:
/// `p∨ ln p∨ − s ln s` with `p∨ = max(p1, p2)`, `s = p1 + p2`.
pub fn lda_limit_delta(p1: f64, p2: f64) -> Result<f64> {
    check_omega(p1, p2)?;
    Ok(xlnx(p1.max(p2)) - xlnx(p1 + p2))
}

/// Square window of proportions, further cut to `p1 + p2 ≤ max_sum`.
/// Cells always stay strictly inside `Ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub max_sum: f64,
}

impl Domain {
    /// All of `Ω`.
    pub const OMEGA: Domain = Domain {
        lo: 0.0,
        hi: 1.0,
        max_sum: 1.0,
    };

    /// `0.1 ≤ p1, p2 ≤ 0.7` and `p1 + p2 ≤ 0.8`, where the empirical
    /// simulations keep every class reasonably populated.
    pub const RESTRICTED: Domain = Domain {
        lo: 0.1,
        hi: 0.7,
        max_sum: 0.8,
    };

    fn validate(&self) -> Result<()> {
        if !(0.0 <= self.lo && self.lo < self.hi && self.hi <= 1.0 && self.max_sum > 0.0) {
            return Err(Error::InvalidConfig(format!("bad domain {self:?}")));
        }
        Ok(())
    }

    fn admits(&self, p1: f64, p2: f64) -> bool {
        let s = p1 + p2;
        s < 1.0 && s <= self.max_sum + 1e-9
    }
}

/// Settings for estimating `Δ` from simulated data instead of a closed form.
///
/// Each cell simulates three observed classes with proportions
/// `(p1, p2, 1 − p1 − p2)`, classes 1 and 2 sharing a center, and reports the
/// cross-validated ITCA of `{(1,2),3}` minus that of `{1,2,3}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPlan {
    pub classifier: ClassifierSpec,
    pub step_length: f64,
    pub sigma: f64,
    pub n: usize,
    pub d: usize,
    pub folds: usize,
    pub seed: u64,
    /// Independent datasets per cell; their fold differences are pooled.
    pub replicates: usize,
}

impl EmpiricalPlan {
    pub fn new(classifier: ClassifierSpec) -> EmpiricalPlan {
        EmpiricalPlan {
            classifier,
            step_length: 5.0,
            sigma: 1.5,
            n: 5000,
            d: 5,
            folds: 5,
            seed: 0,
            replicates: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum GridAlgorithm {
    Oracle,
    LdaLimit,
    Lda { separation: f64 },
    Empirical(EmpiricalPlan),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub p1: f64,
    pub p2: f64,
    pub delta: f64,
    /// Standard error of an empirical `Δ`; zero for closed forms.
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionGrid {
    /// Cells per axis of the domain window.
    pub resolution: usize,
    pub domain: Domain,
    pub cells: Vec<GridCell>,
    /// Fraction of cells with `Δ > 0`.
    pub area_fraction: f64,
}

impl RegionGrid {
    pub fn cell_width(&self) -> f64 {
        (self.domain.hi - self.domain.lo) / self.resolution as f64
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["p1", "p2", "delta", "stderr"])?;
        for c in &self.cells {
            w.write_record([c.p1.to_string(), c.p2.to_string(), c.delta.to_string(), c.stderr.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Cell centers of a `resolution × resolution` tiling of the domain window
/// that fall inside the domain.
pub fn grid_points(domain: &Domain, resolution: usize) -> Vec<(f64, f64)> {
    let h = (domain.hi - domain.lo) / resolution as f64;
    let center = |i: usize| domain.lo + (i as f64 + 0.5) * h;
    let mut out = Vec::new();
    for i in 0..resolution {
        for j in 0..resolution {
            let (p1, p2) = (center(i), center(j));
            if domain.admits(p1, p2) {
                out.push((p1, p2));
            }
        }
    }
    out
}

/// Minimum cells per axis for closed-form grids.
pub const MIN_CLOSED_FORM_RESOLUTION: usize = 20;

/// Evaluates `Δ` at every cell center of the domain.
pub fn region_grid(algorithm: &GridAlgorithm, resolution: usize, domain: Domain) -> Result<RegionGrid> {
    domain.validate()?;
    if resolution == 0 {
        return Err(Error::InvalidConfig("resolution must be positive".into()));
    }
    if !matches!(algorithm, GridAlgorithm::Empirical(_)) && resolution < MIN_CLOSED_FORM_RESOLUTION {
        return Err(Error::InvalidConfig(format!(
            "closed-form grids need at least {MIN_CLOSED_FORM_RESOLUTION} cells per axis, got {resolution}"
        )));
    }
    let points = grid_points(&domain, resolution);
    if points.is_empty() {
        return Err(Error::InvalidConfig("the domain contains no grid cells".into()));
    }
    let cells = points
        .par_iter()
        .map(|&(p1, p2)| {
            let (delta, stderr) = match algorithm {
                GridAlgorithm::Oracle => (oracle_delta(p1, p2)?, 0.0),
                GridAlgorithm::LdaLimit => (lda_limit_delta(p1, p2)?, 0.0),
                GridAlgorithm::Lda { separation } => (lda_delta(p1, p2, *separation)?, 0.0),
                GridAlgorithm::Empirical(plan) => {
                    let r = empirical_delta(plan, p1, p2)?;
                    (r.mean, r.stderr)
                }
            };
            Ok(GridCell { p1, p2, delta, stderr })
        })
        .collect::<Result<Vec<_>>>()?;
    let positive = cells.iter().filter(|c| c.delta > 0.0).count();
    Ok(RegionGrid {
        resolution,
        domain,
        area_fraction: positive as f64 / cells.len() as f64,
        cells,
    })
}

/// Cross-validated ITCA of `{(1,2),3}` minus that of `{1,2,3}` on data
/// simulated with proportions `(p1, p2, 1 − p1 − p2)`.
///
/// The report holds one difference per fold and replicate.
pub fn empirical_delta(plan: &EmpiricalPlan, p1: f64, p2: f64) -> Result<CriterionReport> {
    check_omega(p1, p2)?;
    if plan.replicates == 0 {
        return Err(Error::InvalidConfig("replicates must be positive".into()));
    }
    let merged: Partition = "{(1,2),3}".parse()?;
    let separate = Partition::identity(3);
    let cell = format!("{p1:.9},{p2:.9}");
    let mut diffs = Vec::with_capacity(plan.folds * plan.replicates);
    for rep in 0..plan.replicates {
        let seed = seeding::task_seed(plan.seed, &cell, rep);
        let mut cfg = SimulationConfig::new(merged.clone(), plan.step_length, plan.sigma, plan.n, plan.d, seed);
        cfg.class_probabilities = Some(vec![p1, p2, 1.0 - p1 - p2]);
        let sim = simulate(&cfg)?;
        let folds = FoldPlan::stratified(sim.dataset.labels(), plan.folds, seeding::mix(seed, 1))?;
        let classifier = plan.classifier.clone().with_seed(seeding::mix(seed, 2));
        let ctx = CvContext::new(&sim.dataset, &classifier, &folds);
        let a = ctx.cv(CriterionName::Itca, &merged)?;
        let b = ctx.cv(CriterionName::Itca, &separate)?;
        diffs.extend(a.per_fold.iter().zip(&b.per_fold).map(|(x, y)| x - y));
    }
    Ok(CriterionReport::from_folds(CriterionName::Itca, diffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_reference_values() {
        let cases = [
            (0.0, 0.5),
            (1.96, 0.975_002_104_851_779_6),
            (-1.96, 0.024_997_895_148_220_435),
            (0.5, 0.691_462_461_274_013_1),
            (-3.0, 0.001_349_898_031_630_094_5),
            (2.5, 0.993_790_334_674_223_9),
            (1e-3, 0.500_398_942_213_911_1),
        ];
        for (z, want) in cases {
            assert!((normal_cdf(z) - want).abs() < 1e-10, "Φ({z})");
            assert!((normal_cdf(-z) - (1.0 - normal_cdf(z))).abs() < 1e-12);
        }
        let tail = normal_cdf(-7.5);
        assert!((tail / 3.190_891_672_910_896e-14 - 1.0).abs() < 1e-9);
        let deep = normal_cdf(-12.0);
        assert!((deep / 1.776_482_112_077_679e-33 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(oracle_delta(0.25, 0.25).unwrap().abs() < 1e-15, true);
        let region = oracle_region_value(0.05, 0.30).unwrap();
        assert!((region - 0.01276).abs() < 5e-6, "{region}");
        let delta = oracle_delta(0.05, 0.30).unwrap();
        assert!((delta - region / 0.35).abs() < 1e-15);
        assert!(oracle_delta(0.4, 0.4).unwrap() < 0.0);
        assert!(matches!(oracle_delta(0.5, 0.5), Err(Error::OutOfOmega { .. })));
        assert!(oracle_delta(0.0, 0.3).is_err());
    }

    #[test]
    fn oracle_delta_is_the_itca_difference() {
        // Direct from the definition with K0 = 3.
        let (p1, p2) = (0.12, 0.33);
        let p3: f64 = 1.0 - p1 - p2;
        let s = p1 + p2;
        let h = |p: f64| -p * p.ln();
        let separate = h(p1) * p1 / s + h(p2) * p2 / s + h(p3);
        let merged = h(s) + h(p3);
        assert!((oracle_delta(p1, p2).unwrap() - (merged - separate)).abs() < 1e-14);
    }

    #[test]
    fn lda_examples() {
        assert!(lda_limit_delta(0.25, 0.25).unwrap().abs() < 1e-15);
        let limit = lda_limit_delta(0.1, 0.2).unwrap();
        assert!((limit - 0.0393).abs() < 5e-5, "{limit}");
        let full = lda_delta(0.1, 0.2, 10.0).unwrap();
        assert!((full - limit).abs() < 1e-3);
        assert!(lda_delta(0.1, 0.2, 0.0).is_err());
        assert!(lda_delta(0.6, 0.5, 3.0).is_err());
    }

    #[test]
    fn lda_delta_matches_direct_accuracies() {
        // Class-conditional accuracies of the Bayes rule, written out.
        let (p1, p2, sep) = (0.3, 0.2, 1.7);
        let p3: f64 = 1.0 - p1 - p2;
        let h = |p: f64| -p * p.ln();
        let threshold = |p: f64| sep / 2.0 + (p / p3).ln() / sep;
        let separate = h(p1) * normal_cdf(threshold(p1)) + h(p3) * (1.0 - normal_cdf(threshold(p1) - sep));
        let merged = h(p1 + p2) * normal_cdf(threshold(p1 + p2)) + h(p3) * (1.0 - normal_cdf(threshold(p1 + p2) - sep));
        assert!((lda_delta(p1, p2, sep).unwrap() - (merged - separate)).abs() < 1e-14);
    }

    #[test]
    fn grid_covers_omega_by_centers() {
        let g = region_grid(&GridAlgorithm::Oracle, 20, Domain::OMEGA).unwrap();
        // Centers (i + ½)/20 with i + j ≤ 18.
        assert_eq!(g.cells.len(), 19 * 20 / 2);
        assert!(g.cells.iter().all(|c| c.p1 + c.p2 < 1.0));
        assert!((0.0..=1.0).contains(&g.area_fraction));
        for c in &g.cells {
            assert_eq!(c.delta, oracle_delta(c.p1, c.p2).unwrap());
        }
        assert!(region_grid(&GridAlgorithm::Oracle, 10, Domain::OMEGA).is_err());
    }

    #[test]
    fn restricted_domain_cells() {
        let pts = grid_points(&Domain::RESTRICTED, 6);
        assert_eq!(pts.len(), 21);
        assert!(pts.iter().all(|&(a, b)| a >= 0.1 && b <= 0.7 && a + b <= 0.8 + 1e-9));
    }

    #[test]
    fn grid_csv_has_header_and_rows() {
        let g = region_grid(&GridAlgorithm::LdaLimit, 20, Domain::OMEGA).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("p1,p2,delta,stderr\n"));
        assert_eq!(text.lines().count(), g.cells.len() + 1);
    }
}
