use nalgebra::{DMatrix, DVector};

use crate::data::{class_counts, FeatureMatrix};
use crate::error::{Error, Result};

/// Linear discriminant analysis with a pooled, ridge-shrunk covariance.
///
/// Scores are `δ_k(x) = x'Σ⁻¹μ_k − ½ μ_k'Σ⁻¹μ_k + ln p_k`.
#[derive(Clone, Debug)]
pub struct Lda {
    /// `d × k`, column `k` is `Σ⁻¹ μ_k`.
    weights: DMatrix<f64>,
    offsets: Vec<f64>,
}

impl Lda {
    pub fn fit(x: &FeatureMatrix, y: &[usize], k: usize, shrinkage: f64) -> Result<Lda> {
        let (n, d) = (x.n(), x.d());
        let counts = class_counts(y, k);
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::DegenerateClass { class: empty + 1 });
        }

        let mut means = DMatrix::<f64>::zeros(d, k);
        for (row, &c) in x.rows().zip(y) {
            for (j, v) in row.iter().enumerate() {
                means[(j, c)] += v;
            }
        }
        for (c, &count) in counts.iter().enumerate() {
            means.column_mut(c).scale_mut(1.0 / count as f64);
        }

        let mut cov = DMatrix::<f64>::zeros(d, d);
        let mut centered = DVector::<f64>::zeros(d);
        for (row, &c) in x.rows().zip(y) {
            for j in 0..d {
                centered[j] = row[j] - means[(j, c)];
            }
            cov.ger(1.0, &centered, &centered, 1.0);
        }
        let dof = if n > k { n - k } else { n.max(1) };
        cov /= dof as f64;

        let mut scale = cov.trace() / d as f64;
        if !(scale > 1e-300) {
            scale = 1.0;
        }
        for j in 0..d {
            cov[(j, j)] += shrinkage * scale;
        }

        let chol = cov.cholesky().ok_or(Error::NonPositiveDefinite)?;
        let weights = chol.solve(&means);
        let offsets = (0..k)
            .map(|c| {
                let quad = means.column(c).dot(&weights.column(c));
                -0.5 * quad + (counts[c] as f64 / n as f64).ln()
            })
            .collect();
        Ok(Lda { weights, offsets })
    }

    pub fn k(&self) -> usize {
        self.offsets.len()
    }

    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        (0..self.k())
            .map(|c| {
                let w = self.weights.column(c);
                row.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<f64>() + self.offsets[c]
            })
            .collect()
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        super::argmax(&self.scores(row))
    }
}
