use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{check_same_width, require_minority, Oversampled, Provenance, RboParams};
use crate::error::{Error, Result};
use crate::numcore::{squared_euclidean, Matrix, RngStream};

fn class_potential(x: &[f64], class: &Matrix, gamma: f64) -> f64 {
    let g2 = gamma * gamma;
    class
        .rows()
        .map(|s| (-g2 * squared_euclidean(x, s)).exp())
        .sum()
}

/// `Φ_maj(x) − Φ_min(x)` with `Φ_S(x) = Σ_s exp(−γ²‖x−s‖²)`.
pub fn mutual_potential(x: &[f64], x_min: &Matrix, x_maj: &Matrix, gamma: f64) -> f64 {
    class_potential(x, x_maj, gamma) - class_potential(x, x_min, gamma)
}

/// Radial-based oversampling: every synthetic row starts at a uniformly
/// drawn minority row and takes `iterations` proposals of length `step` in
/// uniformly random directions, keeping each one that lowers the mutual
/// potential.
pub fn rbo(
    x_min: &Matrix,
    x_maj: &Matrix,
    params: &RboParams,
    n_synth: usize,
    rng: &mut RngStream,
) -> Result<Oversampled> {
    let mut out = Oversampled::empty(x_min.n_cols());
    if n_synth == 0 {
        return Ok(out);
    }
    require_minority(x_min, 1)?;
    check_same_width(x_min, x_maj)?;
    if !(params.step >= 0.0) || !params.gamma.is_finite() {
        return Err(Error::InvalidArgument(
            "RBO step and gamma must be finite".into(),
        ));
    }
    let m = x_min.n_cols();
    let mut direction = vec![0.0; m];
    let mut proposal = vec![0.0; m];
    for _ in 0..n_synth {
        let start = rng.random_range(0..x_min.n_rows());
        let mut point = x_min.row(start).to_vec();
        let start_potential = mutual_potential(&point, x_min, x_maj, params.gamma);
        let mut potential = start_potential;
        for _ in 0..params.iterations {
            let norm = loop {
                for d in direction.iter_mut() {
                    *d = StandardNormal.sample(rng);
                }
                let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    break norm;
                }
            };
            for ((p, x), d) in proposal.iter_mut().zip(&point).zip(&direction) {
                *p = x + params.step * d / norm;
            }
            let candidate = mutual_potential(&proposal, x_min, x_maj, params.gamma);
            if candidate < potential {
                point.copy_from_slice(&proposal);
                potential = candidate;
            }
        }
        out.rows.push_row(&point)?;
        out.provenance.push(Provenance::Walk {
            start,
            start_potential,
            end_potential: potential,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_iterations_returns_seeds() {
        let x_min = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let x_maj = Matrix::from_rows(&[[0.5, 0.5]]).unwrap();
        let params = RboParams {
            iterations: 0,
            ..RboParams::default()
        };
        let out = rbo(&x_min, &x_maj, &params, 6, &mut RngStream::new(0, "rbo")).unwrap();
        for (row, p) in out.rows.rows().zip(&out.provenance) {
            let Provenance::Walk { start, .. } = *p else {
                panic!()
            };
            assert_eq!(row, x_min.row(start));
        }
    }

    #[test]
    fn walks_never_raise_potential() {
        let x_min = Matrix::from_rows(&[[0.0, 0.0], [0.3, 0.1], [0.1, 0.4]]).unwrap();
        let x_maj = Matrix::from_rows(&[[0.2, 0.2], [0.6, 0.6], [-0.3, 0.2]]).unwrap();
        let out = rbo(
            &x_min,
            &x_maj,
            &RboParams::default(),
            30,
            &mut RngStream::new(1, "w"),
        )
        .unwrap();
        for (row, p) in out.rows.rows().zip(&out.provenance) {
            let Provenance::Walk {
                start_potential,
                end_potential,
                ..
            } = *p
            else {
                panic!()
            };
            assert!(end_potential <= start_potential);
            let recomputed = mutual_potential(row, &x_min, &x_maj, 1.0);
            assert!((recomputed - end_potential).abs() < 1e-12);
        }
    }
}
