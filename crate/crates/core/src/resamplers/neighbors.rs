use crate::error::{Error, Result};
use crate::numcore::{squared_euclidean, Matrix};

/// How query rows relate to reference rows when building a [`NeighborIndex`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelfMatch {
    /// Query and reference are unrelated sets.
    None,
    /// Query row `i` is reference row `offset + i` and is excluded from its
    /// own neighbor list.
    Aligned { offset: usize },
}

/// Brute-force Euclidean k-nearest-neighbor table.
///
/// Rows of `indices`/`distances` are sorted by distance, ties by reference
/// index.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborIndex {
    k: usize,
    indices: Vec<Vec<usize>>,
    distances: Vec<Vec<f64>>,
}

impl NeighborIndex {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn indices(&self, i: usize) -> &[usize] {
        &self.indices[i]
    }

    pub fn distances(&self, i: usize) -> &[f64] {
        &self.distances[i]
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub fn knn_index(
    query: &Matrix,
    reference: &Matrix,
    k: usize,
    self_match: SelfMatch,
) -> Result<NeighborIndex> {
    let available = match self_match {
        SelfMatch::None => reference.n_rows(),
        SelfMatch::Aligned { .. } => reference.n_rows().saturating_sub(1),
    };
    if k > available {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds {available} candidate neighbors"
        )));
    }
    if !query.is_empty() && !reference.is_empty() && query.n_cols() != reference.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: reference.n_cols(),
            got: query.n_cols(),
        });
    }
    let mut indices = Vec::with_capacity(query.n_rows());
    let mut distances = Vec::with_capacity(query.n_rows());
    let mut scratch: Vec<(f64, usize)> = Vec::with_capacity(reference.n_rows());
    for (i, q) in query.rows().enumerate() {
        let skip = match self_match {
            SelfMatch::None => None,
            SelfMatch::Aligned { offset } => Some(offset + i),
        };
        scratch.clear();
        for (j, r) in reference.rows().enumerate() {
            if Some(j) != skip {
                scratch.push((squared_euclidean(q, r), j));
            }
        }
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < scratch.len() && k > 0 {
            scratch.select_nth_unstable_by(k - 1, by_dist);
            scratch.truncate(k);
        }
        scratch.truncate(k);
        scratch.sort_by(by_dist);
        indices.push(scratch.iter().map(|p| p.1).collect());
        distances.push(scratch.iter().map(|p| p.0.sqrt()).collect());
    }
    Ok(NeighborIndex {
        k,
        indices,
        distances,
    })
}

/// Neighbors of each row of `x` among the other rows of `x`.
pub fn knn_within(x: &Matrix, k: usize) -> Result<NeighborIndex> {
    knn_index(x, x, k, SelfMatch::Aligned { offset: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn excludes_self_and_sorts() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [3.0], [6.0]]).unwrap();
        let nn = knn_within(&x, 2).unwrap();
        assert_eq!(nn.indices(0), &[1, 2]);
        assert_eq!(nn.indices(2), &[1, 0]);
        assert_eq!(nn.distances(3), &[3.0, 5.0]);
        for i in 0..4 {
            assert!(nn.distances(i).windows(2).all(|w| w[0] <= w[1]));
            assert!(!nn.indices(i).contains(&i));
        }
    }

    #[test]
    fn aligned_offset_excludes_matching_row() {
        let q = Matrix::from_rows(&[[0.0], [5.0]]).unwrap();
        let reference = Matrix::from_rows(&[[9.0], [0.0], [5.0]]).unwrap();
        let nn = knn_index(&q, &reference, 1, SelfMatch::Aligned { offset: 1 }).unwrap();
        assert_eq!(nn.indices(0), &[2]);
        assert_eq!(nn.indices(1), &[0]);
    }

    #[test]
    fn too_many_neighbors() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        assert!(knn_within(&x, 2).is_err());
    }
}
