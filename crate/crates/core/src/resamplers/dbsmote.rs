//! DBSMOTE: DBSCAN on the minority class, then interpolation along shortest
//! paths from each cluster's pseudo-centroid.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cluster::dbscan;
use super::interpolation::{interpolate, smote};
use super::neighbors::knn_within;
use super::{require_minority, Fallback, Oversampled, Provenance};
use crate::error::Result;
use crate::numcore::{euclidean, squared_euclidean, Matrix, RngStream};

/// How the DBSCAN radius is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EpsRule {
    /// Third quartile of every row's distance to its k-th nearest minority
    /// neighbor.
    ThirdQuartileOfKthNeighbor {
        k: usize,
    },
    Fixed(f64),
}

/// Type-7 (linear interpolation) third quartile of k-th neighbor distances.
pub fn third_quartile_knn_distance(x: &Matrix, k: usize) -> Result<f64> {
    let k = k.clamp(1, x.n_rows().saturating_sub(1).max(1));
    let nn = knn_within(x, k)?;
    let mut d: Vec<f64> = (0..nn.len()).map(|i| nn.distances(i)[k - 1]).collect();
    d.sort_by(f64::total_cmp);
    let h = (d.len() - 1) as f64 * 0.75;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(d.len() - 1);
    Ok(d[lo] + (h - lo as f64) * (d[hi] - d[lo]))
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path tree over the `eps`-graph of `members` (rows of `x`),
/// rooted at local index `root`. Returns each node's predecessor.
fn shortest_path_tree(x: &Matrix, members: &[usize], eps: f64, root: usize) -> Vec<Option<usize>> {
    let n = members.len();
    let eps2 = eps * eps;
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[root] = 0.0;
    heap.push(HeapEntry {
        dist: 0.0,
        node: root,
    });
    while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        let xu = x.row(members[u]);
        for v in 0..n {
            if v == u {
                continue;
            }
            let xv = x.row(members[v]);
            if squared_euclidean(xu, xv) > eps2 {
                continue;
            }
            let nd = d + euclidean(xu, xv);
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = Some(u);
                heap.push(HeapEntry { dist: nd, node: v });
            }
        }
    }
    pred
}

struct ClusterPaths {
    members: Vec<usize>,
    root: usize,
    pred: Vec<Option<usize>>,
}

impl ClusterPaths {
    /// Local node sequence from the root to `target`, if reachable.
    fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        let mut path = vec![target];
        let mut cur = target;
        while cur != self.root {
            cur = self.pred[cur]?;
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }
}

/// DBSMOTE. Each synthetic row picks a clustered, non-centroid minority row
/// uniformly, walks the shortest `eps`-graph path from its cluster's
/// pseudo-centroid (the member nearest the cluster mean), and interpolates
/// uniformly on a uniformly chosen edge of that path. Noise rows never seed
/// generation. Falls back to SMOTE (K=3) when DBSCAN finds no cluster.
pub fn dbsmote(
    x_min: &Matrix,
    min_pts: usize,
    eps_rule: EpsRule,
    n_synth: usize,
    rng: &mut RngStream,
) -> Result<Oversampled> {
    let mut out = Oversampled::empty(x_min.n_cols());
    if n_synth == 0 {
        return Ok(out);
    }
    require_minority(x_min, min_pts.max(2))?;
    let eps = match eps_rule {
        EpsRule::ThirdQuartileOfKthNeighbor { k } => third_quartile_knn_distance(x_min, k)?,
        EpsRule::Fixed(e) => e,
    };
    let clusters: Vec<ClusterPaths> = if eps > 0.0 {
        dbscan(x_min, eps, min_pts)?
            .members()
            .into_iter()
            .filter(|m| m.len() >= 2)
            .map(|members| {
                let local = x_min.select_rows(&members);
                let mean = local.column_means();
                let root = (0..members.len())
                    .min_by(|&a, &b| {
                        squared_euclidean(local.row(a), &mean)
                            .total_cmp(&squared_euclidean(local.row(b), &mean))
                    })
                    .expect("non-empty cluster");
                let pred = shortest_path_tree(x_min, &members, eps, root);
                ClusterPaths {
                    members,
                    root,
                    pred,
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    // (cluster, local target) pairs that have a non-empty path
    let targets: Vec<(usize, usize)> = clusters
        .iter()
        .enumerate()
        .flat_map(|(c, cp)| {
            (0..cp.members.len())
                .filter(move |&t| t != cp.root && cp.pred[t].is_some())
                .map(move |t| (c, t))
        })
        .collect();
    if targets.is_empty() {
        let mut fallback = smote(x_min, 3, n_synth, rng)?;
        fallback.fallback = Some(Fallback::NoClusters);
        return Ok(fallback);
    }
    for _ in 0..n_synth {
        let (c, t) = targets[rng.random_range(0..targets.len())];
        let cp = &clusters[c];
        let path = cp.path_to(t).expect("reachable target");
        let e = rng.random_range(0..path.len() - 1);
        let from = cp.members[path[e]];
        let to = cp.members[path[e + 1]];
        let gap: f64 = rng.random();
        out.rows.push_row(&interpolate(x_min, from, to, gap))?;
        out.provenance.push(Provenance::Segment { from, to, gap });
    }
    Ok(out)
}
