//! Random forest of Gini-impurity decision trees over sparse features.
//!
//! Tree `i` draws its bootstrap sample and its per-node feature subsets from
//! a generator seeded with `seed + i`, so the forest is the same no matter
//! how trees are scheduled across threads. Candidate features are drawn
//! only from those that vary within the node, and the split with the lowest
//! weighted impurity is taken even when it does not improve on the parent
//! (an XOR pattern needs two levels before any gain shows). A node becomes a
//! leaf when it is pure, holds fewer than `2 * min_samples_leaf` samples, or
//! no candidate admits a split leaving `min_samples_leaf` on both sides.
//! Thresholds sit at midpoints between consecutive distinct values; samples
//! with `value <= threshold` go left.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_columns, check_fit_shape};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::sparse::{CsrMatrix, RowView};
use crate::star::{argmax_star, Star, N_CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// `ceil(sqrt(n_features))`
    Sqrt,
    All,
    Fixed(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => (n_features as f64).sqrt().ceil() as usize,
            MaxFeatures::All => n_features,
            MaxFeatures::Fixed(k) => k,
        };
        k.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfParams {
    pub n_trees: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for RfParams {
    fn default() -> Self {
        Self {
            n_trees: 500,
            min_samples_leaf: 10,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        counts: [u32; N_CLASSES],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Root at index 0.
    pub nodes: Vec<Node>,
}

fn row_value(row: RowView<'_>, feature: u32) -> f64 {
    match row.indices.binary_search(&feature) {
        Ok(i) => row.values[i],
        Err(_) => 0.0,
    }
}

impl Tree {
    pub fn leaf_counts(&self, row: RowView<'_>) -> &[u32; N_CLASSES] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row_value(row, *feature) <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = &[u32; N_CLASSES]> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { counts } => Some(counts),
            Node::Split { .. } => None,
        })
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize)),
            }
        }
        walk(&self.nodes, 0)
    }
}

pub fn gini(counts: &[u32; N_CLASSES]) -> f64 {
    let n: u32 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = f64::from(n);
    1.0 - counts.iter().map(|&c| (f64::from(c) / n).powi(2)).sum::<f64>()
}

/// Sum of squared counts over n; weighted impurity is `n - sq/n` up to scale.
fn weighted_impurity(counts: &[u32; N_CLASSES], n: u32) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let sq: f64 = counts.iter().map(|&c| f64::from(c) * f64::from(c)).sum();
    f64::from(n) - sq / f64::from(n)
}

struct Split {
    feature: u32,
    threshold: f64,
    impurity: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct FeatureStats {
    count: u32,
    min: f64,
    max: f64,
}

struct TreeBuilder<'a> {
    x: &'a CsrMatrix,
    y: &'a [Star],
    min_leaf: usize,
    n_candidates: usize,
    /// Scratch: candidate slot for each feature, `u32::MAX` when not drawn.
    slot_of: Vec<u32>,
    /// Scratch: per-feature nonzero count and range within the current node.
    stats: Vec<FeatureStats>,
    rng: SeededRng,
}

impl<'a> TreeBuilder<'a> {
    fn class_counts(&self, samples: &[u32]) -> [u32; N_CLASSES] {
        let mut counts = [0u32; N_CLASSES];
        for &s in samples {
            counts[self.y[s as usize].index()] += 1;
        }
        counts
    }

    /// Features that take more than one value among `samples`, ascending.
    fn varying_features(&mut self, samples: &[u32]) -> Vec<u32> {
        let mut touched = Vec::new();
        for &s in samples {
            for (c, v) in self.x.row(s as usize).iter() {
                let st = &mut self.stats[c];
                if st.count == 0 {
                    touched.push(c as u32);
                    st.min = v;
                    st.max = v;
                } else {
                    st.min = st.min.min(v);
                    st.max = st.max.max(v);
                }
                st.count += 1;
            }
        }
        let n = samples.len() as u32;
        let mut varying: Vec<u32> = touched
            .iter()
            .copied()
            .filter(|&f| {
                let st = &self.stats[f as usize];
                st.count < n || st.min != st.max
            })
            .collect();
        for &f in &touched {
            self.stats[f as usize] = FeatureStats::default();
        }
        varying.sort_unstable();
        varying
    }

    fn best_split(&mut self, samples: &[u32], counts: &[u32; N_CLASSES]) -> Option<Split> {
        let n = samples.len() as u32;
        let varying = self.varying_features(samples);
        if varying.is_empty() {
            return None;
        }
        let k = self.n_candidates.min(varying.len());
        let candidates: Vec<u32> = self
            .rng
            .sample_without_replacement(varying.len(), k)
            .into_iter()
            .map(|i| varying[i])
            .collect();
        for (slot, &f) in candidates.iter().enumerate() {
            self.slot_of[f as usize] = slot as u32;
        }
        // Nonzero (value, class) pairs per candidate feature.
        let mut buckets: Vec<Vec<(f64, u8)>> = vec![Vec::new(); candidates.len()];
        for &s in samples {
            let class = self.y[s as usize].index() as u8;
            for (c, v) in self.x.row(s as usize).iter() {
                let slot = self.slot_of[c];
                if slot != u32::MAX {
                    buckets[slot as usize].push((v, class));
                }
            }
        }
        for &f in &candidates {
            self.slot_of[f as usize] = u32::MAX;
        }

        let min_leaf = self.min_leaf as u32;
        let mut best: Option<Split> = None;
        for (mut values, &feature) in buckets.into_iter().zip(&candidates) {
            let mut zero_counts = *counts;
            for &(_, c) in &values {
                zero_counts[c as usize] -= 1;
            }
            let n_zero: u32 = zero_counts.iter().sum();
            values.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let split_at = values.partition_point(|&(v, _)| v < 0.0);

            // Walk the sorted sequence: negatives, the zero block, positives.
            let mut left = [0u32; N_CLASSES];
            let mut n_left = 0u32;
            let mut prev: Option<f64> = None;
            let consider = |left: &[u32; N_CLASSES], n_left: u32, lo: f64, hi: f64, best: &mut Option<Split>| {
                let n_right = n - n_left;
                if n_left < min_leaf || n_right < min_leaf {
                    return;
                }
                let mut right = *counts;
                for k in 0..N_CLASSES {
                    right[k] -= left[k];
                }
                let impurity = weighted_impurity(left, n_left) + weighted_impurity(&right, n_right);
                if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    *best = Some(Split {
                        feature,
                        threshold: lo + (hi - lo) / 2.0,
                        impurity,
                    });
                }
            };
            let mut feed = |value: f64, group: &[u32; N_CLASSES], size: u32, left: &mut [u32; N_CLASSES], n_left: &mut u32, best: &mut Option<Split>| {
                if let Some(p) = prev {
                    if value > p {
                        consider(left, *n_left, p, value, best);
                    }
                }
                for k in 0..N_CLASSES {
                    left[k] += group[k];
                }
                *n_left += size;
                prev = Some(value);
            };
            let single = |c: u8| {
                let mut g = [0u32; N_CLASSES];
                g[c as usize] = 1;
                g
            };
            for &(v, c) in &values[..split_at] {
                feed(v, &single(c), 1, &mut left, &mut n_left, &mut best);
            }
            if n_zero > 0 {
                feed(0.0, &zero_counts, n_zero, &mut left, &mut n_left, &mut best);
            }
            for &(v, c) in &values[split_at..] {
                feed(v, &single(c), 1, &mut left, &mut n_left, &mut best);
            }
        }
        best
    }

    fn build(mut self, samples: Vec<u32>) -> Tree {
        let mut nodes = vec![Node::Leaf { counts: [0; N_CLASSES] }];
        let mut stack = vec![(0usize, samples)];
        while let Some((id, samples)) = stack.pop() {
            let counts = self.class_counts(&samples);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let split = if pure || samples.len() < 2 * self.min_leaf {
                None
            } else {
                self.best_split(&samples, &counts)
            };
            let Some(split) = split else {
                nodes[id] = Node::Leaf { counts };
                continue;
            };
            let (left, right): (Vec<u32>, Vec<u32>) = samples
                .iter()
                .partition(|&&s| row_value(self.x.row(s as usize), split.feature) <= split.threshold);
            let (l, r) = (nodes.len(), nodes.len() + 1);
            nodes.push(Node::Leaf { counts: [0; N_CLASSES] });
            nodes.push(Node::Leaf { counts: [0; N_CLASSES] });
            nodes[id] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: l as u32,
                right: r as u32,
            };
            stack.push((r, right));
            stack.push((l, left));
        }
        Tree { nodes }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfModel {
    pub params: RfParams,
    pub n_features: usize,
    pub trees: Vec<Tree>,
}

impl RfModel {
    pub fn fit(x: &CsrMatrix, y: &[Star], params: &RfParams) -> Result<Self> {
        check_fit_shape(x, y)?;
        if params.n_trees == 0 || params.min_samples_leaf == 0 {
            return Err(Error::InvalidParameter("n_trees and min_samples_leaf must be at least 1".into()));
        }
        if x.n_cols() == 0 {
            return Err(Error::EmptyInput("no features".into()));
        }
        let n = x.n_rows();
        let n_candidates = params.max_features.resolve(x.n_cols());
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|i| {
                let mut rng = SeededRng::new(params.seed.wrapping_add(i as u64));
                let samples: Vec<u32> = if params.bootstrap {
                    (0..n).map(|_| rng.index(n) as u32).collect()
                } else {
                    (0..n as u32).collect()
                };
                TreeBuilder {
                    x,
                    y,
                    min_leaf: params.min_samples_leaf,
                    n_candidates,
                    slot_of: vec![u32::MAX; x.n_cols()],
                    stats: vec![FeatureStats::default(); x.n_cols()],
                    rng,
                }
                .build(samples)
            })
            .collect();
        Ok(Self {
            params: *params,
            n_features: x.n_cols(),
            trees,
        })
    }

    /// Mean over trees of each leaf's normalized class distribution.
    pub fn predict_proba(&self, x: &CsrMatrix) -> Result<Vec<[f64; N_CLASSES]>> {
        check_columns(self.n_features, x)?;
        let n_trees = self.trees.len() as f64;
        Ok(x.rows()
            .map(|row| {
                let mut acc = [0.0; N_CLASSES];
                for tree in &self.trees {
                    let counts = tree.leaf_counts(row);
                    let total = f64::from(counts.iter().sum::<u32>());
                    for k in 0..N_CLASSES {
                        acc[k] += f64::from(counts[k]) / total;
                    }
                }
                acc.map(|a| a / n_trees)
            })
            .collect())
    }

    pub fn predict(&self, x: &CsrMatrix) -> Result<Vec<Star>> {
        Ok(self.predict_proba(x)?.iter().map(|p| argmax_star(p)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: u8) -> Star {
        Star::new(v).unwrap()
    }

    #[test]
    fn gini_values() {
        assert!((gini(&[5, 5, 0, 0, 0]) - 0.5).abs() < 1e-15);
        assert_eq!(gini(&[10, 0, 0, 0, 0]), 0.0);
    }

    fn separated() -> (CsrMatrix, Vec<Star>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let class = i % 2;
            rows.push(vec![if class == 0 { 0.0 } else { 1.0 + (i % 3) as f64 }, (i % 5) as f64]);
            y.push(if class == 0 { s(2) } else { s(4) });
        }
        (CsrMatrix::from_dense(&rows, 2).unwrap(), y)
    }

    #[test]
    fn separating_feature_fits_perfectly() {
        let (x, y) = separated();
        let params = RfParams {
            n_trees: 5,
            min_samples_leaf: 1,
            max_features: MaxFeatures::All,
            seed: 4,
            ..RfParams::default()
        };
        let m = RfModel::fit(&x, &y, &params).unwrap();
        assert_eq!(m.predict(&x).unwrap(), y);
    }

    #[test]
    fn leaves_honor_min_samples() {
        let (x, y) = separated();
        let params = RfParams {
            n_trees: 3,
            min_samples_leaf: 7,
            max_features: MaxFeatures::All,
            seed: 1,
            ..RfParams::default()
        };
        let m = RfModel::fit(&x, &y, &params).unwrap();
        for t in &m.trees {
            for leaf in t.leaves() {
                assert!(leaf.iter().sum::<u32>() >= 7);
            }
        }
    }

    #[test]
    fn min_leaf_equal_to_n_gives_stumps() {
        let (x, mut y) = separated();
        y[0] = s(4);
        y[2] = s(4);
        let params = RfParams {
            n_trees: 4,
            min_samples_leaf: x.n_rows(),
            bootstrap: false,
            ..RfParams::default()
        };
        let m = RfModel::fit(&x, &y, &params).unwrap();
        assert!(m.trees.iter().all(|t| t.nodes.len() == 1));
        assert!(m.predict(&x).unwrap().iter().all(|&p| p == s(4)));
    }

    #[test]
    fn single_leaf_forest_and_tie_break() {
        let leaf = |counts| Tree {
            nodes: vec![Node::Leaf { counts }],
        };
        let x = CsrMatrix::from_dense(&[vec![0.3], vec![9.0]], 1).unwrap();
        let m = RfModel {
            params: RfParams::default(),
            n_features: 1,
            trees: vec![leaf([3, 1, 0, 0, 0])],
        };
        assert_eq!(m.predict(&x).unwrap(), vec![s(1), s(1)]);

        let m = RfModel {
            params: RfParams::default(),
            n_features: 1,
            trees: vec![leaf([4, 0, 0, 0, 0]), leaf([0, 2, 0, 0, 0])],
        };
        assert_eq!(m.predict(&x).unwrap(), vec![s(1), s(1)]);
    }

    #[test]
    fn negative_values_split_correctly() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![if i < 10 { -1.0 - i as f64 } else { i as f64 }]).collect();
        let y: Vec<Star> = (0..20).map(|i| if i < 10 { s(1) } else { s(5) }).collect();
        let x = CsrMatrix::from_dense(&rows, 1).unwrap();
        let params = RfParams {
            n_trees: 1,
            min_samples_leaf: 1,
            bootstrap: false,
            ..RfParams::default()
        };
        let m = RfModel::fit(&x, &y, &params).unwrap();
        assert_eq!(m.predict(&x).unwrap(), y);
        assert_eq!(m.trees[0].depth(), 1);
    }

    #[test]
    fn xor_grows_through_zero_gain_root() {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let y = vec![s(1), s(1), s(3), s(3)];
        let x = CsrMatrix::from_dense(&rows, 2).unwrap();
        let params = RfParams {
            n_trees: 1,
            min_samples_leaf: 1,
            bootstrap: false,
            ..RfParams::default()
        };
        let m = RfModel::fit(&x, &y, &params).unwrap();
        assert_eq!(m.predict(&x).unwrap(), y);
        assert_eq!(m.trees[0].depth(), 2);
    }

    #[test]
    fn dimension_and_parameter_errors() {
        let (x, y) = separated();
        assert!(RfModel::fit(&x, &y, &RfParams { n_trees: 0, ..RfParams::default() }).is_err());
        let m = RfModel::fit(&x, &y, &RfParams { n_trees: 2, ..RfParams::default() }).unwrap();
        assert!(m.predict(&CsrMatrix::from_dense(&[vec![1.0]], 1).unwrap()).is_err());
    }
}
