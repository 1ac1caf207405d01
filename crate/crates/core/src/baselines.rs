//! Clustering baselines: combine observed classes whose feature means cluster
//! together. Both need the number of combined classes up front.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{euclidean, Dataset};
use crate::error::{Error, Result};
use crate::partitions::Partition;
use crate::seeding;

/// Independent k-means++ restarts; the lowest within-cluster sum of squares wins.
pub const KMEANS_RESTARTS: usize = 10;
const LLOYD_ITERATIONS: usize = 300;

/// Per-class feature means, one row per observed class.
pub fn class_centers(ds: &Dataset) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; ds.d()]; ds.k0()];
    for (row, &y) in ds.features().rows().zip(ds.labels()) {
        for (s, v) in sums[y].iter_mut().zip(row) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&ds.class_counts()) {
        s.iter_mut().for_each(|v| *v /= c as f64);
    }
    sums
}

fn check_k_star(k0: usize, k_star: usize) -> Result<()> {
    if k_star == 0 || k_star > k0 {
        return Err(Error::InvalidConfig(format!("k_star must lie in 1..={k0}, got {k_star}")));
    }
    Ok(())
}

/// K-means on the class centers into `k_star` clusters.
pub fn kmeans_combine(ds: &Dataset, k_star: usize, seed: u64) -> Result<Partition> {
    kmeans_points(&class_centers(ds), k_star, seed)
}

/// K-means with k-means++ seeding on arbitrary points; point `i` is class `i`.
pub fn kmeans_points(points: &[Vec<f64>], k_star: usize, seed: u64) -> Result<Partition> {
    check_k_star(points.len(), k_star)?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..KMEANS_RESTARTS {
        let mut rng = seeding::rng(seeding::mix(seed, restart as u64));
        let (inertia, labels) = lloyd(points, plus_plus(points, k_star, &mut rng));
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    Partition::canonicalize(&best.expect("at least one restart").1)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn plus_plus<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut chosen = vec![rng.random_range(0..points.len())];
    while chosen.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .map(|p| chosen.iter().map(|&c| sq_dist(p, &points[c])).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = d2.iter().rposition(|&v| v > 0.0).expect("positive total");
            for (i, &v) in d2.iter().enumerate() {
                if v > 0.0 && u < v {
                    pick = i;
                    break;
                }
                u -= v;
            }
            pick
        } else {
            // Every point coincides with a chosen one.
            (0..points.len()).find(|i| !chosen.contains(i)).expect("k ≤ number of points")
        };
        chosen.push(next);
    }
    chosen.into_iter().map(|c| points[c].clone()).collect()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, mu) in centroids.iter().enumerate() {
        let d = sq_dist(p, mu);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

/// Lloyd iterations to a fixed point. An emptied cluster takes the point
/// farthest from its centroid among clusters with more than one member.
fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> (f64, Vec<usize>) {
    let k = centroids.len();
    let d = points[0].len();
    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
    for _ in 0..LLOYD_ITERATIONS {
        for c in 0..k {
            if labels.contains(&c) {
                continue;
            }
            let mut sizes = vec![0usize; k];
            labels.iter().for_each(|&l| sizes[l] += 1);
            let donor = (0..points.len())
                .filter(|&i| sizes[labels[i]] > 1)
                .max_by(|&a, &b| {
                    let da = sq_dist(&points[a], &centroids[labels[a]]);
                    let db = sq_dist(&points[b], &centroids[labels[b]]);
                    da.total_cmp(&db).then(b.cmp(&a))
                });
            if let Some(i) = donor {
                labels[i] = c;
            }
        }
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            sums[l].iter_mut().zip(p).for_each(|(s, v)| *s += v);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    let inertia = points.iter().zip(&labels).map(|(p, &l)| sq_dist(p, &centroids[l])).sum();
    (inertia, labels)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkageKind {
    Single,
    Complete,
    Average,
}

impl LinkageKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkageKind::Single => "single",
            LinkageKind::Complete => "complete",
            LinkageKind::Average => "average",
        }
    }
}

impl fmt::Display for LinkageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinkageKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<LinkageKind> {
        match s {
            "single" => Ok(LinkageKind::Single),
            "complete" => Ok(LinkageKind::Complete),
            "average" => Ok(LinkageKind::Average),
            other => Err(Error::InvalidConfig(format!("unknown linkage {other:?}"))),
        }
    }
}

/// Agglomerative clustering of the class centers, cut at `k_star` clusters.
pub fn hierarchical_combine(ds: &Dataset, k_star: usize, linkage: LinkageKind) -> Result<Partition> {
    hierarchical_points(&class_centers(ds), k_star, linkage)
}

/// Agglomerative clustering on arbitrary points with Euclidean distance.
/// Ties go to the pair of clusters whose smallest members come first.
pub fn hierarchical_points(points: &[Vec<f64>], k_star: usize, linkage: LinkageKind) -> Result<Partition> {
    check_k_star(points.len(), k_star)?;
    // Clusters kept sorted by smallest member, each member list ascending.
    let mut clusters: Vec<Vec<usize>> = (0..points.len()).map(|i| vec![i]).collect();
    while clusters.len() > k_star {
        let mut best = (0, 1);
        let mut best_d = f64::INFINITY;
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let d = linkage_distance(points, &clusters[a], &clusters[b], linkage);
                if d < best_d {
                    best = (a, b);
                    best_d = d;
                }
            }
        }
        let absorbed = clusters.remove(best.1);
        clusters[best.0].extend(absorbed);
        clusters[best.0].sort_unstable();
    }
    Partition::from_groups(points.len(), &clusters)
}

fn linkage_distance(points: &[Vec<f64>], a: &[usize], b: &[usize], linkage: LinkageKind) -> f64 {
    let pairs = a.iter().flat_map(|&i| b.iter().map(move |&j| euclidean(&points[i], &points[j])));
    match linkage {
        LinkageKind::Single => pairs.fold(f64::INFINITY, f64::min),
        LinkageKind::Complete => pairs.fold(0.0, f64::max),
        LinkageKind::Average => pairs.sum::<f64>() / (a.len() * b.len()) as f64,
    }
}
