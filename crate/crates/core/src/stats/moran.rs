//! Global Moran's I with the randomization-assumption variance.

use serde::Serialize;

use super::graph::NeighborGraph;
use super::normal::two_sided_p;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoranResult {
    /// Distance band the weights were built with, meters.
    pub distance: f64,
    pub moran_i: f64,
    pub expected_i: f64,
    pub variance: f64,
    pub z: f64,
    pub p_two_sided: f64,
}

/// Moran's I over binary fixed-band weights. `graph` must exclude self-loops.
pub fn morans_i(values: &[f64], graph: &NeighborGraph) -> Result<MoranResult> {
    if graph.include_self() {
        return Err(Error::InputMismatch("Moran's I needs a graph without self-neighbors".into()));
    }
    if graph.len() != values.len() {
        return Err(Error::InputMismatch(format!("{} values for {} graph nodes", values.len(), graph.len())));
    }
    let dev = deviations(values)?;
    let (degrees, lags): (Vec<usize>, Vec<f64>) = (0..graph.len())
        .map(|i| {
            let nb = graph.neighbors(i);
            (nb.len(), nb.iter().map(|&j| dev[j]).sum::<f64>())
        })
        .unzip();
    moran_from_lags(graph.band(), &dev, &degrees, &lags)
}

/// Mean-centred values; fails on fewer than 4 values or zero variance.
pub(crate) fn deviations(values: &[f64]) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 4 {
        return Err(Error::InsufficientPoints { got: n, need: 4 });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateValues("non-finite value".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = values.iter().map(|v| v - mean).collect();
    if dev.iter().all(|d| *d == 0.0) {
        return Err(Error::DegenerateValues("all values are identical (zero variance)".into()));
    }
    Ok(dev)
}

/// Moran's I from per-point neighbor counts and spatial lags `Σ_j w_ij z_j`.
///
/// Weights are symmetric and binary, so `S1 = 2·S0` and `S2 = Σ (2·deg_i)²`.
pub(crate) fn moran_from_lags(distance: f64, dev: &[f64], degrees: &[usize], lags: &[f64]) -> Result<MoranResult> {
    let n = dev.len() as f64;
    let s0: f64 = degrees.iter().sum::<usize>() as f64;
    if s0 == 0.0 {
        return Err(Error::NoNeighbors);
    }
    let s1 = 2.0 * s0;
    let s2: f64 = degrees.iter().map(|&d| (2.0 * d as f64).powi(2)).sum();

    let m2: f64 = dev.iter().map(|d| d * d).sum();
    let m4: f64 = dev.iter().map(|d| d.powi(4)).sum();
    let cross: f64 = dev.iter().zip(lags).map(|(d, l)| d * l).sum();

    let moran_i = (n / s0) * cross / m2;
    let expected_i = -1.0 / (n - 1.0);
    let b2 = n * m4 / (m2 * m2);
    let a = n * ((n * n - 3.0 * n + 3.0) * s1 - n * s2 + 3.0 * s0 * s0);
    let b = b2 * ((n * n - n) * s1 - 2.0 * n * s2 + 6.0 * s0 * s0);
    let variance = (a - b) / ((n - 1.0) * (n - 2.0) * (n - 3.0) * s0 * s0) - expected_i * expected_i;
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::DegenerateValues(format!("Moran variance {variance} is not positive")));
    }
    let z = (moran_i - expected_i) / variance.sqrt();
    Ok(MoranResult { distance, moran_i, expected_i, variance, z, p_two_sided: two_sided_p(z) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{PlanarPoint, SpatialIndex};
    use crate::stats::graph::build_graph;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(n: usize) -> SpatialIndex {
        SpatialIndex::new((0..n).map(|i| PlanarPoint::new(i as f64 * 10.0, 0.0)).collect(), 10.0).unwrap()
    }

    /// Dense-matrix evaluation of I and Var(I), written from the textbook
    /// definitions with general S1/S2 sums.
    fn dense_oracle(points: &[PlanarPoint], x: &[f64], band: f64) -> (f64, f64) {
        let n = x.len();
        let w: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let d = (points[i].x - points[j].x).hypot(points[i].y - points[j].y);
                        if i != j && d <= band {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let nf = n as f64;
        let mean = x.iter().sum::<f64>() / nf;
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        let mut num = 0.0;
        for i in 0..n {
            for j in 0..n {
                s0 += w[i][j];
                s1 += 0.5 * (w[i][j] + w[j][i]).powi(2);
                num += w[i][j] * (x[i] - mean) * (x[j] - mean);
            }
        }
        let s2: f64 = (0..n)
            .map(|i| {
                let row: f64 = w[i].iter().sum();
                let col: f64 = (0..n).map(|j| w[j][i]).sum();
                (row + col).powi(2)
            })
            .sum();
        let den: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        let i_stat = nf / s0 * num / den;
        let b2 = nf * x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / den.powi(2);
        let e = -1.0 / (nf - 1.0);
        let var = (nf * ((nf * nf - 3.0 * nf + 3.0) * s1 - nf * s2 + 3.0 * s0 * s0)
            - b2 * ((nf * nf - nf) * s1 - 2.0 * nf * s2 + 6.0 * s0 * s0))
            / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0) * s0 * s0)
            - e * e;
        (i_stat, var)
    }

    #[test]
    fn checkerboard_on_a_line_is_negative() {
        let idx = line(20);
        let g = build_graph(&idx, 10.0, false).unwrap();
        let x: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = morans_i(&x, &g).unwrap();
        assert!(r.moran_i < 0.0 && r.z < 0.0);
    }

    #[test]
    fn gradient_is_positive() {
        let idx = line(30);
        let g = build_graph(&idx, 25.0, false).unwrap();
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let r = morans_i(&x, &g).unwrap();
        assert!(r.moran_i > 0.0 && r.z > 3.0);
        assert_eq!(r.expected_i, -1.0 / 29.0);
    }

    #[test]
    fn error_paths() {
        let idx = line(10);
        let g = build_graph(&idx, 10.0, false).unwrap();
        assert!(matches!(morans_i(&[2.0; 10], &g), Err(Error::DegenerateValues(_))));
        let lonely = build_graph(&idx, 1.0, false).unwrap();
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(morans_i(&x, &lonely), Err(Error::NoNeighbors));
        let with_self = build_graph(&idx, 10.0, true).unwrap();
        assert!(matches!(morans_i(&x, &with_self), Err(Error::InputMismatch(_))));
        let small = build_graph(&line(3), 10.0, false).unwrap();
        assert!(matches!(morans_i(&[1.0, 2.0, 3.0], &small), Err(Error::InsufficientPoints { .. })));
        assert!(matches!(morans_i(&x[..9], &g), Err(Error::InputMismatch(_))));
    }

    #[test]
    fn matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let pts: Vec<PlanarPoint> = (0..50)
                .map(|_| PlanarPoint::new(rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0)))
                .collect();
            let x: Vec<f64> = pts.iter().map(|p| p.x / 500.0 + rng.random_range(-1.0..1.0)).collect();
            let band = rng.random_range(120.0..400.0);
            let g = build_graph(&SpatialIndex::with_auto_cell_size(pts.clone()).unwrap(), band, false).unwrap();
            let r = morans_i(&x, &g).unwrap();
            let (i_o, var_o) = dense_oracle(&pts, &x, band);
            assert!((r.moran_i - i_o).abs() < 1e-10);
            assert!((r.variance - var_o).abs() < 1e-10);
        }
    }

    #[test]
    fn randomization_moments_match_permutations() {
        // The randomization variance is the exact permutation variance of I.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<PlanarPoint> =
            (0..40).map(|_| PlanarPoint::new(rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0))).collect();
        let x: Vec<f64> = (0..40).map(|_| rng.random_range(1.0..5.0)).collect();
        let g = build_graph(&SpatialIndex::with_auto_cell_size(pts).unwrap(), 250.0, false).unwrap();
        let r = morans_i(&x, &g).unwrap();
        let n_perm = 20_000;
        let mut perm = x.clone();
        let samples: Vec<f64> = (0..n_perm)
            .map(|_| {
                perm.shuffle(&mut rng);
                morans_i(&perm, &g).unwrap().moran_i
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / n_perm as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n_perm - 1) as f64;
        let se_mean = (var / n_perm as f64).sqrt();
        assert!((mean - r.expected_i).abs() < 4.0 * se_mean, "mean {mean} vs {}", r.expected_i);
        assert!((var - r.variance).abs() / r.variance < 0.05, "var {var} vs {}", r.variance);
    }

    #[test]
    fn affine_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pts: Vec<PlanarPoint> =
            (0..60).map(|_| PlanarPoint::new(rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0))).collect();
        let x: Vec<f64> = pts.iter().map(|p| p.y / 300.0 + rng.random_range(-1.0..1.0)).collect();
        let g = build_graph(&SpatialIndex::with_auto_cell_size(pts).unwrap(), 200.0, false).unwrap();
        let base = morans_i(&x, &g).unwrap();
        for (a, b) in [(2.5, 10.0), (0.1, -3.0), (-4.0, 1.0)] {
            let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let r = morans_i(&y, &g).unwrap();
            assert!((r.moran_i - base.moran_i).abs() < 1e-10);
            assert!((r.z - base.z).abs() < 1e-9);
        }
    }
}
