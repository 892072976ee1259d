//! Binary classification tree grown greedily on Gini impurity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CartConfig {
    pub min_split: usize,
    pub min_bucket: usize,
    pub complexity: f64,
    pub max_depth: usize,
}

impl Default for CartConfig {
    fn default() -> Self {
        CartConfig {
            min_split: 20,
            min_bucket: 7,
            complexity: 0.01,
            max_depth: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        positives: usize,
        negatives: usize,
    },
}

impl Node {
    fn leaf(positives: usize, negatives: usize) -> Node {
        Node::Leaf {
            positives,
            negatives,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartModel {
    root: Node,
    n_features: usize,
}

impl CartModel {
    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn n_leaves(&self) -> usize {
        fn count(n: &Node) -> usize {
            match n {
                Node::Leaf { .. } => 1,
                Node::Split { left, right, .. } => count(left) + count(right),
            }
        }
        count(&self.root)
    }

    /// `(positives, negatives)` of every leaf, left to right.
    pub fn leaf_counts(&self) -> Vec<(usize, usize)> {
        fn walk(n: &Node, out: &mut Vec<(usize, usize)>) {
            match n {
                Node::Leaf {
                    positives,
                    negatives,
                } => out.push((*positives, *negatives)),
                Node::Split { left, right, .. } => {
                    walk(left, out);
                    walk(right, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }
}

fn gini_mass(pos: usize, total: usize) -> f64 {
    // total · Gini impurity
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    total as f64 * 2.0 * p * (1.0 - p)
}

struct Grower<'a> {
    x: &'a Matrix,
    y: &'a [bool],
    cfg: &'a CartConfig,
    min_gain: f64,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl Grower<'_> {
    fn grow(&self, rows: &mut [usize], depth: usize) -> Node {
        let pos = rows.iter().filter(|&&i| self.y[i]).count();
        let n = rows.len();
        if n < self.cfg.min_split || depth >= self.cfg.max_depth || pos == 0 || pos == n {
            return Node::leaf(pos, n - pos);
        }
        let Some(best) = self.best_split(rows, pos) else {
            return Node::leaf(pos, n - pos);
        };
        if best.gain < self.min_gain || best.gain <= 0.0 {
            return Node::leaf(pos, n - pos);
        }
        let (left, right): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| self.x[(i, best.feature)] <= best.threshold);
        let (mut left, mut right) = (left, right);
        Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(self.grow(&mut left, depth + 1)),
            right: Box::new(self.grow(&mut right, depth + 1)),
        }
    }

    fn best_split(&self, rows: &mut [usize], pos: usize) -> Option<BestSplit> {
        let n = rows.len();
        let parent = gini_mass(pos, n);
        let mut best: Option<BestSplit> = None;
        for f in 0..self.x.n_cols() {
            rows.sort_by(|&a, &b| self.x[(a, f)].total_cmp(&self.x[(b, f)]));
            let mut left_pos = 0;
            for cut in 1..n {
                if self.y[rows[cut - 1]] {
                    left_pos += 1;
                }
                let lo = self.x[(rows[cut - 1], f)];
                let hi = self.x[(rows[cut], f)];
                if lo == hi || cut < self.cfg.min_bucket || n - cut < self.cfg.min_bucket {
                    continue;
                }
                let gain = parent - gini_mass(left_pos, cut) - gini_mass(pos - left_pos, n - cut);
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(BestSplit {
                        gain,
                        feature: f,
                        threshold: lo,
                    });
                }
            }
        }
        best
    }
}

/// Grows a tree. A node splits only if it has at least `min_split` rows,
/// both children keep at least `min_bucket`, depth is below `max_depth`, and
/// the impurity decrease is at least `complexity` times the root impurity
/// (all impurities weighted by row count). Thresholds are training values,
/// so predictions are unchanged by increasing feature transforms.
pub fn cart_fit(x: &Matrix, y: &[bool], cfg: &CartConfig) -> Result<CartModel> {
    if x.is_empty() {
        return Err(Error::EmptyData);
    }
    if y.len() != x.n_rows() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    let pos = y.iter().filter(|&&v| v).count();
    let grower = Grower {
        x,
        y,
        cfg,
        min_gain: cfg.complexity * gini_mass(pos, y.len()),
    };
    let mut rows: Vec<usize> = (0..x.n_rows()).collect();
    Ok(CartModel {
        root: grower.grow(&mut rows, 0),
        n_features: x.n_cols(),
    })
}

/// Positive proportion of the leaf `x` lands in.
pub fn cart_score(model: &CartModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.n_features {
        return Err(Error::DimensionMismatch {
            expected: model.n_features,
            got: x.len(),
        });
    }
    let mut node = &model.root;
    loop {
        match node {
            Node::Leaf {
                positives,
                negatives,
            } => return Ok(*positives as f64 / (positives + negatives).max(1) as f64),
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                node = if x[*feature] <= *threshold {
                    left
                } else {
                    right
                };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_root_is_single_leaf() {
        let x = Matrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let model = cart_fit(&x, &[true, true, true], &CartConfig::default()).unwrap();
        assert_eq!(model.n_leaves(), 1);
        assert_eq!(cart_score(&model, &[100.0]).unwrap(), 1.0);
    }

    #[test]
    fn separable_line() {
        let rows: Vec<[f64; 1]> = (0..200).map(|i| [i as f64 - 99.5]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<bool> = rows.iter().map(|r| r[0] > 0.0).collect();
        let model = cart_fit(&x, &y, &CartConfig::default()).unwrap();
        for (r, &label) in x.rows().zip(&y) {
            assert_eq!(cart_score(&model, r).unwrap() > 0.5, label);
        }
    }

    #[test]
    fn leaves_respect_min_bucket() {
        let rows: Vec<[f64; 2]> = (0..120)
            .map(|i| [((i * 37) % 101) as f64, ((i * 13) % 17) as f64])
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<bool> = (0..120).map(|i| (i * 7) % 5 < 2).collect();
        let cfg = CartConfig {
            complexity: 0.0,
            ..CartConfig::default()
        };
        let model = cart_fit(&x, &y, &cfg).unwrap();
        assert!(model.n_leaves() > 1);
        for (p, n) in model.leaf_counts() {
            assert!(p + n >= cfg.min_bucket);
        }
    }

    #[test]
    fn dimension_checked() {
        let x = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let model = cart_fit(&x, &[false], &CartConfig::default()).unwrap();
        assert!(cart_score(&model, &[1.0]).is_err());
        assert_eq!(
            cart_fit(&Matrix::with_cols(2), &[], &CartConfig::default()).unwrap_err(),
            Error::EmptyData
        );
    }
}
