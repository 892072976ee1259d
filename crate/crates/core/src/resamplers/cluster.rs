use rand::Rng;

use crate::error::{Error, Result};
use crate::numcore::{squared_euclidean, Matrix, RngStream};

pub const NOISE: i64 = -1;

const KMEANS_MAX_ITER: usize = 10;
const KMEANS_MOVE_TOL: f64 = 1e-8;

/// Cluster labels (`-1` marks DBSCAN noise) and, for k-means, the centers.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<i64>,
    pub centers: Option<Matrix>,
}

impl ClusterAssignment {
    pub fn n_clusters(&self) -> usize {
        self.labels
            .iter()
            .copied()
            .max()
            .map_or(0, |m| (m + 1).max(0) as usize)
    }

    /// Row indices per cluster id.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_clusters()];
        for (i, &l) in self.labels.iter().enumerate() {
            if l >= 0 {
                out[l as usize].push(i);
            }
        }
        out
    }
}

/// k-means++ seeding: row indices of `k` initial centers.
pub fn kmeans_pp_seeds(x: &Matrix, k: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    let n = x.n_rows();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} for {n} rows")));
    }
    let mut seeds = Vec::with_capacity(k);
    seeds.push(rng.random_range(0..n));
    let mut d2: Vec<f64> = x
        .rows()
        .map(|r| squared_euclidean(r, x.row(seeds[0])))
        .collect();
    while seeds.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            let mut last_positive = 0;
            for (i, d) in d2.iter().enumerate() {
                if *d > 0.0 {
                    last_positive = i;
                }
                acc += d;
                if acc > target && *d > 0.0 {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or(last_positive)
        } else {
            // every remaining row coincides with a seed
            let free: Vec<usize> = (0..n).filter(|i| !seeds.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        seeds.push(next);
        for (d, r) in d2.iter_mut().zip(x.rows()) {
            *d = d.min(squared_euclidean(r, x.row(next)));
        }
    }
    Ok(seeds)
}

/// Lloyd's algorithm from k-means++ seeds, at most 10 iterations.
///
/// Clusters that end up empty are dropped and the labels compacted, so the
/// returned cluster count can be below `k` when rows coincide.
pub fn kmeans(x: &Matrix, k: usize, rng: &mut RngStream) -> Result<ClusterAssignment> {
    let n = x.n_rows();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} for {n} rows")));
    }
    let m = x.n_cols();
    let seeds = kmeans_pp_seeds(x, k, rng)?;
    let mut centers = x.select_rows(&seeds);
    let mut labels = vec![0usize; n];
    for _ in 0..KMEANS_MAX_ITER {
        for (i, r) in x.rows().enumerate() {
            labels[i] = nearest_center(r, &centers);
        }
        let mut sums = Matrix::zeros(k, m);
        let mut counts = vec![0usize; k];
        for (i, r) in x.rows().enumerate() {
            counts[labels[i]] += 1;
            for (s, v) in sums.row_mut(labels[i]).iter_mut().zip(r) {
                *s += v;
            }
        }
        let mut moved = 0.0_f64;
        for (c, &count) in counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let new: Vec<f64> = sums.row(c).iter().map(|s| s / count as f64).collect();
            moved = moved.max(squared_euclidean(&new, centers.row(c)).sqrt());
            centers.row_mut(c).copy_from_slice(&new);
        }
        if moved < KMEANS_MOVE_TOL {
            break;
        }
    }
    for (i, r) in x.rows().enumerate() {
        labels[i] = nearest_center(r, &centers);
    }
    // compact away empty clusters
    let mut used = vec![false; k];
    labels.iter().for_each(|&l| used[l] = true);
    let order: Vec<usize> = (0..k).filter(|&c| used[c]).collect();
    let mut remap = vec![None; k];
    for (new_id, &old) in order.iter().enumerate() {
        remap[old] = Some(new_id);
    }
    Ok(ClusterAssignment {
        labels: labels.iter().map(|&l| remap[l].unwrap() as i64).collect(),
        centers: Some(centers.select_rows(&order)),
    })
}

fn nearest_center(r: &[f64], centers: &Matrix) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.rows().enumerate() {
        let d = squared_euclidean(r, center);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

/// Classical DBSCAN. A point is core when its closed `eps`-ball (itself
/// included) holds at least `min_pts` points.
pub fn dbscan(x: &Matrix, eps: f64, min_pts: usize) -> Result<ClusterAssignment> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps = {eps} must be positive"
        )));
    }
    if min_pts == 0 {
        return Err(Error::InvalidArgument("min_pts must be >= 1".into()));
    }
    let n = x.n_rows();
    let eps2 = eps * eps;
    let neighborhoods: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| squared_euclidean(x.row(i), x.row(j)) <= eps2)
                .collect()
        })
        .collect();
    let is_core: Vec<bool> = neighborhoods.iter().map(|nb| nb.len() >= min_pts).collect();
    let mut labels = vec![NOISE; n];
    let mut next_id = 0i64;
    for start in 0..n {
        if labels[start] != NOISE || !is_core[start] {
            continue;
        }
        labels[start] = next_id;
        let mut stack = vec![start];
        while let Some(p) = stack.pop() {
            for &q in &neighborhoods[p] {
                if labels[q] == NOISE {
                    labels[q] = next_id;
                    if is_core[q] {
                        stack.push(q);
                    }
                }
            }
        }
        next_id += 1;
    }
    Ok(ClusterAssignment {
        labels,
        centers: None,
    })
}
