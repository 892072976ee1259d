//! Interpolating oversamplers: ROS, SMOTE, Borderline-SMOTE, Safe-level SMOTE
//! and Cluster-SMOTE.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cluster::kmeans;
use super::neighbors::{knn_index, knn_within, NeighborIndex, SelfMatch};
use super::{check_same_width, require_minority, Fallback, Oversampled, Provenance};
use crate::error::Result;
use crate::numcore::{Matrix, RngStream};

/// Uniform resampling with replacement.
pub fn ros(x_min: &Matrix, n_synth: usize, rng: &mut RngStream) -> Result<Oversampled> {
    let mut out = Oversampled::empty(x_min.n_cols());
    if n_synth == 0 {
        return Ok(out);
    }
    require_minority(x_min, 1)?;
    for _ in 0..n_synth {
        let source = rng.random_range(0..x_min.n_rows());
        out.rows.push_row(x_min.row(source))?;
        out.provenance.push(Provenance::Copy { source });
    }
    Ok(out)
}

pub(crate) fn interpolate(x_min: &Matrix, from: usize, to: usize, gap: f64) -> Vec<f64> {
    x_min
        .row(from)
        .iter()
        .zip(x_min.row(to))
        .map(|(a, b)| a + gap * (b - a))
        .collect()
}

fn push_segment(
    out: &mut Oversampled,
    x_min: &Matrix,
    from: usize,
    to: usize,
    gap: f64,
) -> Result<()> {
    out.rows.push_row(&interpolate(x_min, from, to, gap))?;
    out.provenance.push(Provenance::Segment { from, to, gap });
    Ok(())
}

/// Plain SMOTE draws from a uniformly chosen seed among `seeds`; `nn` holds
/// neighbor lists in the same local numbering and `global` maps local to
/// minority row index.
fn smote_from(
    x_min: &Matrix,
    seeds: &[usize],
    nn: &NeighborIndex,
    global: &[usize],
    n_synth: usize,
    rng: &mut RngStream,
    out: &mut Oversampled,
) -> Result<()> {
    for _ in 0..n_synth {
        let s = seeds[rng.random_range(0..seeds.len())];
        let neigh = nn.indices(s);
        let t = neigh[rng.random_range(0..neigh.len())];
        let gap: f64 = rng.random();
        push_segment(out, x_min, global[s], global[t], gap)?;
    }
    Ok(())
}

/// SMOTE: `x_i + u·(x̂ − x_i)` with `x̂` among the `k` nearest minority
/// neighbors of a uniformly drawn `x_i` and `u ~ U(0,1)`.
pub fn smote(x_min: &Matrix, k: usize, n_synth: usize, rng: &mut RngStream) -> Result<Oversampled> {
    let mut out = Oversampled::empty(x_min.n_cols());
    if n_synth == 0 {
        return Ok(out);
    }
    require_minority(x_min, 2)?;
    let k = k.clamp(1, x_min.n_rows() - 1);
    let nn = knn_within(x_min, k)?;
    let all: Vec<usize> = (0..x_min.n_rows()).collect();
    smote_from(x_min, &all, &nn, &all, n_synth, rng, &mut out)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BorderlineLabel {
    Noise,
    Danger,
    Safe,
}

/// Labels each minority row by the majority count `m'` among its `c`
/// nearest neighbors in the combined set: noise if `m' = c`, danger if
/// `c/2 ≤ m' < c`, safe otherwise.
pub fn borderline_labels(x_min: &Matrix, x_maj: &Matrix, c: usize) -> Result<Vec<BorderlineLabel>> {
    check_same_width(x_min, x_maj)?;
    let full = x_min.vstack(x_maj)?;
    let c = c.clamp(1, full.n_rows().saturating_sub(1).max(1));
    let nn = knn_index(x_min, &full, c, SelfMatch::Aligned { offset: 0 })?;
    let n_min = x_min.n_rows();
    Ok((0..n_min)
        .map(|i| {
            let majority = nn.indices(i).iter().filter(|&&j| j >= n_min).count();
            if majority == c {
                BorderlineLabel::Noise
            } else if 2 * majority >= c {
                BorderlineLabel::Danger
            } else {
                BorderlineLabel::Safe
            }
        })
        .collect())
}

/// Borderline-SMOTE: SMOTE seeded only from danger rows, interpolating
/// toward their `k` nearest minority neighbors. Falls back to plain SMOTE
/// when no row is in danger.
pub fn borderline_smote(
    x_min: &Matrix,
    x_maj: &Matrix,
    k: usize,
    c: usize,
    n_synth: usize,
    rng: &mut RngStream,
) -> Result<Oversampled> {
    let mut out = Oversampled::empty(x_min.n_cols());
    if n_synth == 0 {
        return Ok(out);
    }
    require_minority(x_min, 2)?;
    let labels = borderline_labels(x_min, x_maj, c)?;
    let danger: Vec<usize> = (0..labels.len())
        .filter(|&i| labels[i] == BorderlineLabel::Danger)
        .collect();
    if danger.is_empty() {
        let mut fallback = smote(x_min, k, n_synth, rng)?;
        fallback.fallback = Some(Fallback::NoDangerPoints);
        fallback.borderline_labels = Some(labels);
        return Ok(fallback);
    }
    let k = k.clamp(1, x_min.n_rows() - 1);
    let nn = knn_within(x_min, k)?;
    let all: Vec<usize> = (0..x_min.n_rows()).collect();
    smote_from(x_min, &danger, &nn, &all, n_synth, rng, &mut out)?;
    out.borderline_labels = Some(labels);
    Ok(out)
}

/// Safe level of each minority row: minority count among its `c` nearest
/// neighbors in the combined set.
pub fn safe_levels(x_min: &Matrix, x_maj: &Matrix, c: usize) -> Result<Vec<usize>> {
    check_same_width(x_min, x_maj)?;
    let full = x_min.vstack(x_maj)?;
    let c = c.clamp(1, full.n_rows().saturating_sub(1).max(1));
    let nn = knn_index(x_min, &full, c, SelfMatch::Aligned { offset: 0 })?;
    let n_min = x_min.n_rows();
    Ok((0..n_min)
        .map(|i| nn.indices(i).iter().filter(|&&j| j < n_min).count())
        .collect())
}

/// Interval the gap is drawn from, or `None` when both ends are unsafe.
fn safe_level_interval(sl_seed: usize, sl_neighbor: usize) -> Option<(f64, f64)> {
    match (sl_seed, sl_neighbor) {
        (0, 0) => None,
        (_, 0) => Some((0.0, 0.0)),
        (s, n) if s == n => Some((0.0, 1.0)),
        (s, n) => {
            let ratio = s as f64 / n as f64;
            if ratio > 1.0 {
                Some((0.0, 1.0 / ratio))
            } else {
                Some((1.0 - ratio, 1.0))
            }
        }
    }
}

/// Safe-level SMOTE: the gap toward the neighbor is restricted so synthetic
/// rows land nearer whichever end has the higher safe level. Pairs where
/// both ends have safe level zero are redrawn.
pub fn safe_level_smote(
    x_min: &Matrix,
    x_maj: &Matrix,
    k: usize,
    c: usize,
    n_synth: usize,
    rng: &mut RngStream,
) -> Result<Oversampled> {
    let mut out = Oversampled::empty(x_min.n_cols());
    if n_synth == 0 {
        return Ok(out);
    }
    require_minority(x_min, 2)?;
    let levels = safe_levels(x_min, x_maj, c)?;
    let k = k.clamp(1, x_min.n_rows() - 1);
    let nn = knn_within(x_min, k)?;
    let any_usable = (0..x_min.n_rows()).any(|i| {
        nn.indices(i)
            .iter()
            .any(|&j| levels[i] > 0 || levels[j] > 0)
    });
    if !any_usable {
        let mut fallback = smote(x_min, k, n_synth, rng)?;
        fallback.fallback = Some(Fallback::NoSafePairs);
        return Ok(fallback);
    }
    while out.len() < n_synth {
        let seed = rng.random_range(0..x_min.n_rows());
        let neigh = nn.indices(seed);
        let other = neigh[rng.random_range(0..neigh.len())];
        let Some((lo, hi)) = safe_level_interval(levels[seed], levels[other]) else {
            continue;
        };
        let gap = if hi > lo {
            lo + (hi - lo) * rng.random::<f64>()
        } else {
            lo
        };
        push_segment(&mut out, x_min, seed, other, gap)?;
    }
    Ok(out)
}

/// Splits `total` in proportion to `sizes` using largest remainders; ties
/// go to the lower index.
pub fn largest_remainder(sizes: &[usize], total: usize) -> Vec<usize> {
    let sum: usize = sizes.iter().sum();
    if sum == 0 {
        return vec![0; sizes.len()];
    }
    let mut quotas: Vec<usize> = sizes.iter().map(|&s| s * total / sum).collect();
    let assigned: usize = quotas.iter().sum();
    let mut remainders: Vec<(usize, usize)> = sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| ((s * total) % sum, i))
        .collect();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take(total - assigned) {
        quotas[i] += 1;
    }
    quotas
}

/// Cluster-SMOTE: k-means on the minority rows, then SMOTE inside each
/// cluster with a quota proportional to its size. Singleton clusters
/// contribute copies of their member.
pub fn cluster_smote(
    x_min: &Matrix,
    clusters: usize,
    k: usize,
    n_synth: usize,
    rng: &mut RngStream,
) -> Result<Oversampled> {
    let mut out = Oversampled::empty(x_min.n_cols());
    if n_synth == 0 {
        return Ok(out);
    }
    require_minority(x_min, 2)?;
    let assignment = kmeans(x_min, clusters.clamp(1, x_min.n_rows()), rng)?;
    let members = assignment.members();
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let quotas = largest_remainder(&sizes, n_synth);
    for (group, quota) in members.iter().zip(quotas) {
        if quota == 0 {
            continue;
        }
        if group.len() == 1 {
            for _ in 0..quota {
                out.rows.push_row(x_min.row(group[0]))?;
                out.provenance.push(Provenance::Copy { source: group[0] });
            }
            continue;
        }
        let local = x_min.select_rows(group);
        let nn = knn_within(&local, k.clamp(1, group.len() - 1))?;
        let seeds: Vec<usize> = (0..group.len()).collect();
        smote_from(x_min, &seeds, &nn, group, quota, rng, &mut out)?;
    }
    Ok(out)
}
