//! Fleiss' kappa for free-text category labels assigned by several raters.

use serde::Serialize;

use crate::error::{Error, Result};

/// Item × category count matrix; `counts[i][c]` raters put item `i` into category `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingTable {
    counts: Vec<Vec<u32>>,
    n_raters: u32,
}

impl RatingTable {
    pub fn new(counts: Vec<Vec<u32>>) -> Result<Self> {
        let first = counts.first().ok_or_else(|| Error::InvalidRatingTable("no items".into()))?;
        let n_categories = first.len();
        let n_raters: u32 = first.iter().sum();
        for (i, row) in counts.iter().enumerate() {
            if row.len() != n_categories {
                return Err(Error::InvalidRatingTable(format!(
                    "row {i} has {} categories, expected {n_categories}",
                    row.len()
                )));
            }
            let s: u32 = row.iter().sum();
            if s != n_raters {
                return Err(Error::InvalidRatingTable(format!("row {i} sums to {s}, expected {n_raters}")));
            }
        }
        Ok(Self { counts, n_raters })
    }

    /// Builds the table from per-item label lists (one label index per rater).
    pub fn from_labels(labels: &[Vec<usize>], n_categories: usize) -> Result<Self> {
        let counts = labels
            .iter()
            .map(|item| {
                let mut row = vec![0u32; n_categories];
                for &c in item {
                    *row.get_mut(c).ok_or_else(|| {
                        Error::InvalidRatingTable(format!("label {c} >= {n_categories} categories"))
                    })? += 1;
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(counts)
    }

    pub fn n_items(&self) -> usize {
        self.counts.len()
    }

    pub fn n_categories(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    pub fn n_raters(&self) -> u32 {
        self.n_raters
    }

    pub fn counts(&self) -> &[Vec<u32>] {
        &self.counts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FleissKappa {
    pub kappa: f64,
    /// Category-wise kappa; `NaN` for categories nobody (or everybody) used.
    pub per_category: Vec<f64>,
}

pub fn fleiss_kappa(table: &RatingTable) -> Result<FleissKappa> {
    let n_items = table.n_items();
    let m = table.n_raters as f64;
    if n_items < 2 {
        return Err(Error::InvalidRatingTable(format!("need at least 2 items, got {n_items}")));
    }
    if table.n_raters < 2 {
        return Err(Error::InvalidRatingTable(format!("need at least 2 raters, got {}", table.n_raters)));
    }
    let k = table.n_categories();
    let total = n_items as u64 * table.n_raters as u64;

    let mut col_totals = vec![0u64; k];
    for row in &table.counts {
        for (t, &c) in col_totals.iter_mut().zip(row) {
            *t += c as u64;
        }
    }
    if col_totals.contains(&total) {
        return Err(Error::DegenerateMarginals);
    }

    let p_bar = table
        .counts
        .iter()
        .map(|row| {
            let sq: u64 = row.iter().map(|&c| c as u64 * c as u64).sum();
            (sq as f64 - m) / (m * (m - 1.0))
        })
        .sum::<f64>()
        / n_items as f64;
    let p: Vec<f64> = col_totals.iter().map(|&t| t as f64 / total as f64).collect();
    let p_e: f64 = p.iter().map(|pc| pc * pc).sum();
    let kappa = (p_bar - p_e) / (1.0 - p_e);

    let per_category = (0..k)
        .map(|c| {
            let pq = p[c] * (1.0 - p[c]);
            if pq == 0.0 {
                return f64::NAN;
            }
            let disagreement: f64 = table.counts.iter().map(|row| row[c] as f64 * (m - row[c] as f64)).sum();
            1.0 - disagreement / (n_items as f64 * m * (m - 1.0) * pq)
        })
        .collect();

    Ok(FleissKappa { kappa, per_category })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_table() -> RatingTable {
        RatingTable::new(vec![vec![3, 0, 0], vec![0, 3, 0], vec![1, 2, 0], vec![0, 1, 2]]).unwrap()
    }

    #[test]
    fn perfect_agreement_is_one() {
        let t = RatingTable::new(vec![vec![3, 0], vec![0, 3], vec![3, 0], vec![0, 3]]).unwrap();
        let k = fleiss_kappa(&t).unwrap();
        assert_eq!(k.kappa, 1.0);
        assert_eq!(k.per_category, vec![1.0, 1.0]);
    }

    #[test]
    fn small_table_matches_hand_evaluation() {
        // P-bar = 2/3, P_e = 7/18  =>  kappa = 5/11
        let k = fleiss_kappa(&small_table()).unwrap();
        assert!((k.kappa - 5.0 / 11.0).abs() < 1e-12);
        let expected = [5.0 / 8.0, 1.0 / 3.0, 0.4];
        for (got, want) in k.per_category.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn unused_category_gives_nan_per_category() {
        let t = RatingTable::new(vec![vec![2, 1, 0], vec![1, 2, 0], vec![3, 0, 0]]).unwrap();
        let k = fleiss_kappa(&t).unwrap();
        assert!(k.per_category[2].is_nan());
        assert!(k.kappa.is_finite());
    }

    #[test]
    fn degenerate_and_invalid_tables() {
        let t = RatingTable::new(vec![vec![3, 0], vec![3, 0]]).unwrap();
        assert_eq!(fleiss_kappa(&t), Err(Error::DegenerateMarginals));
        assert!(RatingTable::new(vec![vec![3, 0], vec![2, 0]]).is_err());
        assert!(RatingTable::new(vec![]).is_err());
        let one = RatingTable::new(vec![vec![2, 1]]).unwrap();
        assert!(matches!(fleiss_kappa(&one), Err(Error::InvalidRatingTable(_))));
        let single_rater = RatingTable::new(vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert!(matches!(fleiss_kappa(&single_rater), Err(Error::InvalidRatingTable(_))));
    }

    #[test]
    fn from_labels_counts_votes() {
        let t = RatingTable::from_labels(&[vec![0, 0, 0], vec![1, 1, 1], vec![0, 1, 1], vec![1, 2, 2]], 3).unwrap();
        assert_eq!(t, small_table());
        assert!(RatingTable::from_labels(&[vec![5]], 3).is_err());
    }

    #[test]
    fn random_ratings_are_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let labels: Vec<Vec<usize>> = (0..10_000).map(|_| (0..3).map(|_| rng.random_range(0..17)).collect()).collect();
        let k = fleiss_kappa(&RatingTable::from_labels(&labels, 17).unwrap()).unwrap();
        assert!(k.kappa.abs() < 0.05, "kappa {}", k.kappa);
    }

    proptest! {
        #[test]
        fn invariant_under_relabeling(seed in any::<u64>(), shift in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let labels: Vec<Vec<usize>> = (0..30).map(|_| (0..4).map(|_| rng.random_range(0..5)).collect()).collect();
            let Ok(base) = fleiss_kappa(&RatingTable::from_labels(&labels, 5).unwrap()) else { return Ok(()); };

            let relabeled: Vec<Vec<usize>> =
                labels.iter().rev().map(|it| it.iter().map(|c| (c + shift) % 5).collect()).collect();
            let other = fleiss_kappa(&RatingTable::from_labels(&relabeled, 5).unwrap()).unwrap();
            prop_assert!((base.kappa - other.kappa).abs() < 1e-12);
            for c in 0..5 {
                let (a, b) = (base.per_category[c], other.per_category[(c + shift) % 5]);
                prop_assert!((a.is_nan() && b.is_nan()) || (a - b).abs() < 1e-12);
            }
        }
    }
}
