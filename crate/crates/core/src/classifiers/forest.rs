use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::seeding;

#[derive(Clone, Debug, PartialEq)]
pub struct ForestParams {
    pub trees: usize,
    /// Features tried per split; `None` means `⌈√d⌉`.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> ForestParams {
        ForestParams {
            trees: 100,
            max_features: None,
            min_samples_split: 2,
            max_depth: None,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn with_trees(trees: usize) -> ForestParams {
        ForestParams {
            trees,
            ..ForestParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trees == 0 {
            return Err(Error::InvalidConfig("random forest needs at least one tree".into()));
        }
        if self.max_features == Some(0) {
            return Err(Error::InvalidConfig("max_features must be at least 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::InvalidConfig("min_samples_split must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf(usize),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(c) => return c,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }
}

/// Bagged CART trees with Gini impurity and per-split feature sampling.
#[derive(Clone, Debug)]
pub struct RandomForest {
    trees: Vec<Tree>,
    k: usize,
}

struct Grower<'a> {
    x: &'a FeatureMatrix,
    y: &'a [usize],
    k: usize,
    mtry: usize,
    params: &'a ForestParams,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    features: Vec<usize>,
}

impl RandomForest {
    pub fn fit(x: &FeatureMatrix, y: &[usize], k: usize, params: &ForestParams, seed: u64) -> Result<RandomForest> {
        params.validate()?;
        if x.n() == 0 {
            return Err(Error::InvalidDataset("no training rows".into()));
        }
        let d = x.d();
        let mtry = params
            .max_features
            .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
            .clamp(1, d.max(1));
        let mut trees = Vec::with_capacity(params.trees);
        for t in 0..params.trees {
            let mut rng = seeding::rng(seeding::mix(seed, t as u64));
            let sample: Vec<usize> = if params.bootstrap {
                (0..x.n()).map(|_| rng.random_range(0..x.n())).collect()
            } else {
                (0..x.n()).collect()
            };
            let mut grower = Grower {
                x,
                y,
                k,
                mtry,
                params,
                rng,
                nodes: Vec::new(),
                features: (0..d).collect(),
            };
            grower.grow(sample, 0);
            trees.push(Tree {
                nodes: grower.nodes,
            });
        }
        Ok(RandomForest { trees, k })
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = vec![0usize; self.k];
        for tree in &self.trees {
            votes[tree.predict(row)] += 1;
        }
        let mut best = 0;
        for (c, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = c;
            }
        }
        best
    }
}

impl Grower<'_> {
    /// Grows the subtree for `sample` and returns its node index.
    fn grow(&mut self, mut sample: Vec<usize>, depth: usize) -> usize {
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf(0));

        let mut counts = vec![0usize; self.k];
        for &i in &sample {
            counts[self.y[i]] += 1;
        }
        let majority = majority(&counts);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = self.params.max_depth.is_some_and(|m| depth >= m);
        if pure || depth_capped || sample.len() < self.params.min_samples_split {
            self.nodes[at] = Node::Leaf(majority);
            return at;
        }

        let Some((feature, threshold)) = self.best_split(&mut sample, &counts) else {
            self.nodes[at] = Node::Leaf(majority);
            return at;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = sample
            .iter()
            .partition(|&&i| self.x.row(i)[feature] <= threshold);
        let left = self.grow(left, depth + 1);
        let right = self.grow(right, depth + 1);
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }

    /// Lowest weighted Gini impurity over up to `mtry` non-constant features.
    fn best_split(&mut self, sample: &mut [usize], counts: &[usize]) -> Option<(usize, f64)> {
        let n = sample.len() as f64;
        self.features.shuffle(&mut self.rng);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut tried = 0;
        let mut left = vec![0usize; self.k];
        for fi in 0..self.features.len() {
            if tried >= self.mtry {
                break;
            }
            let feature = self.features[fi];
            let x = self.x;
            sample.sort_by(|&a, &b| x.row(a)[feature].total_cmp(&x.row(b)[feature]));
            let first = x.row(sample[0])[feature];
            let last = x.row(sample[sample.len() - 1])[feature];
            if first == last {
                continue;
            }
            tried += 1;

            left.iter_mut().for_each(|c| *c = 0);
            // Σ c² on each side, updated incrementally as points move left
            let mut left_sq = 0.0;
            let mut right_sq: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
            for pos in 0..sample.len() - 1 {
                let c = self.y[sample[pos]];
                let right_c = (counts[c] - left[c]) as f64;
                right_sq -= 2.0 * right_c - 1.0;
                left_sq += 2.0 * left[c] as f64 + 1.0;
                left[c] += 1;

                let here = x.row(sample[pos])[feature];
                let next = x.row(sample[pos + 1])[feature];
                if here == next {
                    continue;
                }
                let nl = (pos + 1) as f64;
                let nr = n - nl;
                // weighted impurity = n − Σc_l²/n_l − Σc_r²/n_r
                let impurity = n - left_sq / nl - right_sq / nr;
                if best.is_none_or(|(b, _, _)| impurity < b - 1e-12) {
                    let mut threshold = here + (next - here) / 2.0;
                    if threshold >= next {
                        threshold = here;
                    }
                    best = Some((impurity, feature, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &v) in counts.iter().enumerate() {
        if v > counts[best] {
            best = c;
        }
    }
    best
}
