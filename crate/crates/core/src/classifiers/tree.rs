//! CART-style binary classification tree grown best-first on Gini gain.

use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Scorer;

/// Gains at or below this are treated as no improvement.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Stop once the tree has this many leaves; unlimited when `None`.
    #[serde(default)]
    pub max_leaves: Option<usize>,
    /// Nodes with fewer samples are not split.
    #[serde(default = "default_min_split")]
    pub min_samples_split: usize,
}

fn default_min_split() -> usize {
    2
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_leaves: None,
            min_samples_split: default_min_split(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    /// Rows with `x[feature] <= threshold` go left.
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
    /// Parent Gini minus the size-weighted Gini of the children.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub positives: usize,
    pub total: usize,
    pub split: Option<Split>,
}

impl Node {
    pub fn positive_fraction(&self) -> f64 {
        self.positives as f64 / self.total as f64
    }

    pub fn gini(&self) -> f64 {
        gini(self.positives, self.total)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn gini(positives: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = positives as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

/// One comparison on a root-to-leaf path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    pub feature: usize,
    pub threshold: f64,
    /// `true` for the `<=` branch.
    pub left: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    dim: usize,
    /// Node 0 is the root.
    nodes: Vec<Node>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Feature subsampling for forests.
pub(crate) struct FeatureSampler<'a, R: Rng> {
    pub rng: &'a mut R,
    pub max_features: usize,
}

impl DecisionTree {
    pub fn fit(xs: &[Vec<f64>], ys: &[bool], params: &TreeParams) -> Self {
        Self::fit_rows::<rand_chacha::ChaCha8Rng>(xs, ys, (0..xs.len()).collect(), params, None)
    }

    /// Fits on the multiset of rows named by `rows` (repeats allowed).
    pub(crate) fn fit_rows<R: Rng>(
        xs: &[Vec<f64>],
        ys: &[bool],
        rows: Vec<usize>,
        params: &TreeParams,
        mut sampler: Option<FeatureSampler<'_, R>>,
    ) -> Self {
        let dim = xs[0].len();
        let mut grower = Grower {
            xs,
            ys,
            params,
            nodes: Vec::new(),
            pending: Vec::new(),
        };
        grower.add_node(rows, &mut sampler);
        let mut leaves = 1;
        while params.max_leaves.is_none_or(|m| leaves < m) {
            // Largest gain first; equal gains go to the older node.
            let Some(pos) = grower
                .pending
                .iter()
                .enumerate()
                .max_by(|a, b| a.1 .2.gain.total_cmp(&b.1 .2.gain).then(b.1 .0.cmp(&a.1 .0)))
                .map(|(i, _)| i)
            else {
                break;
            };
            let (node, rows, best) = grower.pending.swap_remove(pos);
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                rows.into_iter().partition(|&r| xs[r][best.feature] <= best.threshold);
            let left = grower.add_node(left_rows, &mut sampler);
            let right = grower.add_node(right_rows, &mut sampler);
            grower.nodes[node].split = Some(Split {
                feature: best.feature,
                threshold: best.threshold,
                left,
                right,
                gain: best.gain,
            });
            leaves += 1;
        }
        DecisionTree {
            dim,
            nodes: grower.nodes,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaf_for(&self, x: &[f64]) -> usize {
        let mut i = 0;
        while let Some(s) = &self.nodes[i].split {
            i = if x[s.feature] <= s.threshold { s.left } else { s.right };
        }
        i
    }

    /// Leaves left to right, each with its root-to-leaf path.
    pub fn leaf_paths(&self) -> Vec<(usize, Vec<PathStep>)> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![(0usize, Vec::new())];
        while let Some((i, path)) = stack.pop() {
            match &self.nodes[i].split {
                None => out.push((i, path)),
                Some(s) => {
                    let mut right = path.clone();
                    right.push(PathStep {
                        feature: s.feature,
                        threshold: s.threshold,
                        left: false,
                    });
                    let mut left = path;
                    left.push(PathStep {
                        feature: s.feature,
                        threshold: s.threshold,
                        left: true,
                    });
                    stack.push((s.right, right));
                    stack.push((s.left, left));
                }
            }
        }
        out
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.split.is_none()).count()
    }

    /// Adds `weight` times the exact interventional Shapley values of this
    /// tree for `x` against the single background row `b` into `phi`.
    ///
    /// Only splits where `x` and `b` disagree branch. Each reached leaf is a
    /// game that pays its value when every feature in `from_x` comes from `x`
    /// and every feature in `from_b` comes from `b`, which has a closed form.
    pub fn add_interventional_shapley(&self, x: &[f64], b: &[f64], weight: f64, phi: &mut [f64]) {
        let mut stack = alloc::vec![(0usize, 0u64, 0u64)];
        while let Some((i, from_x, from_b)) = stack.pop() {
            let node = &self.nodes[i];
            let Some(s) = &node.split else {
                let nx = from_x.count_ones() as usize;
                let nb = from_b.count_ones() as usize;
                if nx + nb > 0 {
                    let v = weight * node.positive_fraction() / factorial(nx + nb);
                    let gain = if nx > 0 { v * factorial(nx - 1) * factorial(nb) } else { 0.0 };
                    let loss = if nb > 0 { v * factorial(nx) * factorial(nb - 1) } else { 0.0 };
                    for (j, p) in phi.iter_mut().enumerate() {
                        if from_x >> j & 1 == 1 {
                            *p += gain;
                        } else if from_b >> j & 1 == 1 {
                            *p -= loss;
                        }
                    }
                }
                continue;
            };
            let bit = 1u64 << s.feature;
            let x_left = x[s.feature] <= s.threshold;
            let b_left = b[s.feature] <= s.threshold;
            let next = |left: bool| if left { s.left } else { s.right };
            if from_x & bit != 0 {
                stack.push((next(x_left), from_x, from_b));
            } else if from_b & bit != 0 || x_left == b_left {
                stack.push((next(b_left), from_x, from_b));
            } else {
                stack.push((next(x_left), from_x | bit, from_b));
                stack.push((next(b_left), from_x, from_b | bit));
            }
        }
    }

    /// Whether any split tests `feature`.
    pub fn uses_feature(&self, feature: usize) -> bool {
        self.nodes
            .iter()
            .any(|n| n.split.as_ref().is_some_and(|s| s.feature == feature))
    }
}

impl Scorer for DecisionTree {
    fn dim(&self) -> usize {
        self.dim
    }

    fn score(&self, x: &[f64]) -> f64 {
        self.nodes[self.leaf_for(x)].positive_fraction()
    }
}

struct Grower<'a> {
    xs: &'a [Vec<f64>],
    ys: &'a [bool],
    params: &'a TreeParams,
    nodes: Vec<Node>,
    /// Splittable leaves: (node id, its rows, best split).
    pending: Vec<(usize, Vec<usize>, Candidate)>,
}

impl Grower<'_> {
    fn add_node<R: Rng>(&mut self, rows: Vec<usize>, sampler: &mut Option<FeatureSampler<'_, R>>) -> usize {
        let positives = rows.iter().filter(|&&r| self.ys[r]).count();
        let id = self.nodes.len();
        self.nodes.push(Node {
            positives,
            total: rows.len(),
            split: None,
        });
        if rows.len() >= self.params.min_samples_split && positives != 0 && positives != rows.len() {
            if let Some(best) = self.best_split(&rows, positives, sampler) {
                self.pending.push((id, rows, best));
            }
        }
        id
    }

    fn best_split<R: Rng>(
        &self,
        rows: &[usize],
        positives: usize,
        sampler: &mut Option<FeatureSampler<'_, R>>,
    ) -> Option<Candidate> {
        let dim = self.xs[0].len();
        let features: Vec<usize> = match sampler {
            Some(s) if s.max_features < dim => {
                let mut f = sample(s.rng, dim, s.max_features).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..dim).collect(),
        };
        let n = rows.len();
        let parent = gini(positives, n);
        let mut best: Option<Candidate> = None;
        let mut column: Vec<(f64, bool)> = Vec::with_capacity(n);
        for feature in features {
            column.clear();
            column.extend(rows.iter().map(|&r| (self.xs[r][feature], self.ys[r])));
            column.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_pos = 0;
            for i in 0..n - 1 {
                left_pos += usize::from(column[i].1);
                let (lo, hi) = (column[i].0, column[i + 1].0);
                if lo == hi {
                    continue;
                }
                let nl = i + 1;
                let nr = n - nl;
                let weighted =
                    (nl as f64 * gini(left_pos, nl) + nr as f64 * gini(positives - left_pos, nr)) / n as f64;
                let gain = parent - weighted;
                if gain > MIN_GAIN && best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mid = lo + (hi - lo) / 2.0;
                    // Keep `lo` on the left even when the midpoint rounds up to `hi`.
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some(Candidate {
                        feature,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }
}
