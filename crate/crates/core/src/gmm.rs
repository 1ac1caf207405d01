//! Gaussians, Gaussian mixtures and the variational KL bounds between mixtures.

use std::f64::consts::{E, PI};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    log_det: f64,
}

impl Gaussian {
    pub fn new(mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Gaussian> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: cov.nrows(),
            });
        }
        let chol = cov.clone().cholesky().ok_or(Error::NonPositiveDefinite)?;
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        if !log_det.is_finite() {
            return Err(Error::NonPositiveDefinite);
        }
        Ok(Gaussian {
            mean: DVector::from_vec(mean),
            cov,
            chol,
            log_det,
        })
    }

    pub fn d(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Differential entropy `½ ln((2πe)^d |Σ|)`.
    pub fn entropy(&self) -> f64 {
        0.5 * (self.d() as f64 * (2.0 * PI * E).ln() + self.log_det)
    }

    /// Closed-form `KL(self ‖ other)`.
    pub fn kl(&self, other: &Gaussian) -> f64 {
        let d = self.d() as f64;
        let trace = other.chol.solve(&self.cov).trace();
        let delta = &self.mean - &other.mean;
        let maha = delta.dot(&other.chol.solve(&delta));
        0.5 * (other.log_det - self.log_det + trace + maha - d)
    }

    /// `ln ∫ f g`, the log of the product-of-densities normalizer.
    pub fn log_overlap(&self, other: &Gaussian) -> Result<f64> {
        let sum = &self.cov + &other.cov;
        let chol = sum.cholesky().ok_or(Error::NonPositiveDefinite)?;
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let delta = &other.mean - &self.mean;
        let maha = delta.dot(&chol.solve(&delta));
        Ok(-0.5 * self.d() as f64 * (2.0 * PI).ln() - 0.5 * log_det - 0.5 * maha)
    }
}

#[derive(Clone, Debug)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    components: Vec<Gaussian>,
}

impl GaussianMixture {
    /// Components with nonpositive weight are dropped; remaining weights are renormalized.
    pub fn new(weights: Vec<f64>, components: Vec<Gaussian>) -> Result<GaussianMixture> {
        if weights.len() != components.len() {
            return Err(Error::LengthMismatch {
                left: weights.len(),
                right: components.len(),
            });
        }
        let total: f64 = weights.iter().filter(|&&w| w > 0.0).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidConfig("mixture has no positive weight".into()));
        }
        let (weights, components) = weights
            .into_iter()
            .zip(components)
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, c)| (w / total, c))
            .unzip();
        Ok(GaussianMixture {
            weights,
            components,
        })
    }

    pub fn single(g: Gaussian) -> GaussianMixture {
        GaussianMixture {
            weights: vec![1.0],
            components: vec![g],
        }
    }

    /// One component per group of `rows`, weighted by group size.
    ///
    /// Covariances are sample covariances plus `shrinkage · (tr/d) · I`; a
    /// group whose scatter has zero trace borrows the trace of all `rows`.
    pub fn fit_groups(
        x: &FeatureMatrix,
        rows: &[usize],
        groups: &[usize],
        k: usize,
        shrinkage: f64,
    ) -> Result<GaussianMixture> {
        let d = x.d();
        let fallback_scale = {
            let all = vec![0; rows.len()];
            let (_, cov) = moments(x, rows, &all, 1).remove(0);
            cov.map_or(0.0, |c| c.trace() / d as f64)
        };
        let mut weights = Vec::new();
        let mut components = Vec::new();
        for (count, (mean, cov)) in class_sizes(groups, k)
            .into_iter()
            .zip(moments(x, rows, groups, k))
        {
            let Some(mut cov) = cov else { continue };
            let mut scale = cov.trace() / d as f64;
            if !(scale > 1e-300) {
                scale = fallback_scale;
            }
            if !(scale > 1e-300) {
                scale = 1.0;
            }
            // an unshrunk single-point group would be singular
            let ridge = if shrinkage > 0.0 { shrinkage } else { 1e-12 };
            for j in 0..d {
                cov[(j, j)] += ridge * scale;
            }
            weights.push(count as f64);
            components.push(Gaussian::new(mean, cov)?);
        }
        GaussianMixture::new(weights, components)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[Gaussian] {
        &self.components
    }
}

fn class_sizes(groups: &[usize], k: usize) -> Vec<usize> {
    let mut sizes = vec![0; k];
    for &g in groups {
        sizes[g] += 1;
    }
    sizes
}

/// Per-group mean and sample covariance (divisor `m − 1`, or 1 for a single point).
fn moments(x: &FeatureMatrix, rows: &[usize], groups: &[usize], k: usize) -> Vec<(Vec<f64>, Option<DMatrix<f64>>)> {
    let d = x.d();
    let sizes = class_sizes(groups, k);
    let mut means = vec![vec![0.0; d]; k];
    for (&i, &g) in rows.iter().zip(groups) {
        for (m, v) in means[g].iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    for (m, &s) in means.iter_mut().zip(&sizes) {
        if s > 0 {
            m.iter_mut().for_each(|v| *v /= s as f64);
        }
    }
    let mut covs: Vec<DMatrix<f64>> = vec![DMatrix::zeros(d, d); k];
    let mut centered = DVector::zeros(d);
    for (&i, &g) in rows.iter().zip(groups) {
        for (j, v) in x.row(i).iter().enumerate() {
            centered[j] = v - means[g][j];
        }
        covs[g].ger(1.0, &centered, &centered, 1.0);
    }
    means
        .into_iter()
        .zip(covs)
        .zip(sizes)
        .map(|((m, c), s)| {
            if s == 0 {
                (m, None)
            } else {
                (m, Some(c / (s.max(2) - 1) as f64))
            }
        })
        .collect()
}

fn log_sum_exp(terms: impl IntoIterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.into_iter().collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KlBounds {
    pub lower: f64,
    pub upper: f64,
}

impl KlBounds {
    pub fn approx(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Variational lower and upper bounds on `KL(f ‖ g)`.
///
/// With `ω` the weights of `f` and `υ` those of `g`, `t_ab = ∫ f_a g_b`:
///
/// - lower: `Σ_a ω_a ln(Σ_α ω_α e^{−KL(f_a‖f_α)} / Σ_b υ_b t_ab) − Σ_a ω_a H(f_a)`
/// - upper: `Σ_a ω_a ln(Σ_α ω_α t_aα / Σ_b υ_b e^{−KL(f_a‖g_b)}) + Σ_a ω_a H(f_a)`
pub fn kl_bounds(f: &GaussianMixture, g: &GaussianMixture) -> Result<KlBounds> {
    let mut lower = 0.0;
    let mut upper = 0.0;
    for (wa, fa) in f.weights.iter().zip(&f.components) {
        if fa.d() != g.components[0].d() {
            return Err(Error::DimensionMismatch {
                expected: fa.d(),
                found: g.components[0].d(),
            });
        }
        let self_kl = log_sum_exp(
            f.weights
                .iter()
                .zip(&f.components)
                .map(|(w, fb)| w.ln() - fa.kl(fb)),
        );
        let self_overlap = log_sum_exp(
            f.weights
                .iter()
                .zip(&f.components)
                .map(|(w, fb)| Ok(w.ln() + fa.log_overlap(fb)?))
                .collect::<Result<Vec<f64>>>()?,
        );
        let cross_kl = log_sum_exp(
            g.weights
                .iter()
                .zip(&g.components)
                .map(|(w, gb)| w.ln() - fa.kl(gb)),
        );
        let cross_overlap = log_sum_exp(
            g.weights
                .iter()
                .zip(&g.components)
                .map(|(w, gb)| Ok(w.ln() + fa.log_overlap(gb)?))
                .collect::<Result<Vec<f64>>>()?,
        );
        let h = fa.entropy();
        lower += wa * (self_kl - cross_overlap - h);
        upper += wa * (self_overlap - cross_kl + h);
    }
    Ok(KlBounds { lower, upper })
}

/// Midpoint of [`kl_bounds`].
pub fn gmm_kl_approx(f: &GaussianMixture, g: &GaussianMixture) -> Result<f64> {
    Ok(kl_bounds(f, g)?.approx())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1(mean: f64, var: f64) -> Gaussian {
        Gaussian::new(vec![mean], DMatrix::from_element(1, 1, var)).unwrap()
    }

    #[test]
    fn univariate_kl_matches_formula() {
        let (a, b) = (g1(0.3, 2.0), g1(-1.0, 0.5));
        let want = 0.5 * ((0.5f64 / 2.0).ln() + 2.0 / 0.5 + 1.3 * 1.3 / 0.5 - 1.0);
        assert!((a.kl(&b) - want).abs() < 1e-12);
        assert!(a.kl(&a).abs() < 1e-12);
    }

    #[test]
    fn overlap_is_a_density_at_the_difference() {
        // ∫ N(x;0,1) N(x;1,1) dx = N(1; 0, 2)
        let t = g1(0.0, 1.0).log_overlap(&g1(1.0, 1.0)).unwrap();
        let want = -0.25 - 0.5 * (4.0 * PI).ln();
        assert!((t - want).abs() < 1e-12);
    }

    #[test]
    fn identical_mixtures_have_zero_approximation() {
        let f = GaussianMixture::single(g1(0.0, 1.0));
        assert_eq!(gmm_kl_approx(&f, &f.clone()).unwrap(), 0.0);

        let two = GaussianMixture::new(vec![0.3, 0.7], vec![g1(0.0, 1.0), g1(2.0, 0.5)]).unwrap();
        let b = kl_bounds(&two, &two).unwrap();
        assert!(b.lower <= 1e-12 && b.upper >= -1e-12, "{b:?}");
        assert!(b.approx().abs() < 1e-12);
    }

    #[test]
    fn single_components_bracket_the_exact_value() {
        let (f, g) = (g1(0.0, 1.0), g1(1.0, 1.0));
        let exact = f.kl(&g);
        let b = kl_bounds(&GaussianMixture::single(f.clone()), &GaussianMixture::single(g.clone())).unwrap();
        assert!(b.lower <= exact && exact <= b.upper, "{b:?} vs {exact}");
        // the midpoint is (KL + ln t_ff − ln t_fg) / 2
        let want = 0.5 * (exact + f.log_overlap(&f).unwrap() - f.log_overlap(&g).unwrap());
        assert!((b.approx() - want).abs() < 1e-12);
        assert!((b.approx() - 0.375).abs() < 1e-12);
    }

    #[test]
    fn rejects_indefinite_covariance() {
        let bad = Gaussian::new(vec![0.0], DMatrix::from_element(1, 1, -1.0));
        assert!(matches!(bad, Err(Error::NonPositiveDefinite)));
    }
}
