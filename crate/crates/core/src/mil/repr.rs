use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Coordinate-wise statistic used to summarize a bag.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    Mean,
    Median,
}

impl Aggregation {
    pub fn name(self) -> &'static str {
        match self {
            Aggregation::Mean => "mean",
            Aggregation::Median => "median",
        }
    }
}

/// Summarizes a non-empty bag into one row.
pub fn aggregate(points: &[Vec<f64>], how: Aggregation) -> Vec<f64> {
    let dim = points[0].len();
    let n = points.len() as f64;
    (0..dim)
        .map(|j| match how {
            Aggregation::Mean => points.iter().map(|p| p[j]).sum::<f64>() / n,
            Aggregation::Median => {
                let mut column: Vec<f64> = points.iter().map(|p| p[j]).collect();
                column.sort_by(f64::total_cmp);
                let mid = column.len() / 2;
                if column.len() % 2 == 1 {
                    column[mid]
                } else {
                    (column[mid - 1] + column[mid]) / 2.0
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn single_instance_is_itself() {
        let p = vec![vec![0.25, -1.0, 3.0]];
        assert_eq!(aggregate(&p, Aggregation::Mean), p[0]);
        assert_eq!(aggregate(&p, Aggregation::Median), p[0]);
    }

    #[test]
    fn mean_of_two() {
        assert_eq!(aggregate(&[vec![2.0], vec![4.0]], Aggregation::Mean), vec![3.0]);
        assert_eq!(aggregate(&[vec![2.0], vec![4.0], vec![10.0]], Aggregation::Median), vec![4.0]);
    }

    proptest! {
        #[test]
        fn permutation_invariant(
            rows in proptest::collection::vec(proptest::collection::vec(-10i32..10, 3), 1..12),
            rotate in 0usize..12,
        ) {
            // Integer-valued rows keep every partial sum exact.
            let points: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
            let mut shuffled = points.clone();
            shuffled.reverse();
            let k = rotate % shuffled.len();
            shuffled.rotate_left(k);
            for how in [Aggregation::Mean, Aggregation::Median] {
                prop_assert_eq!(aggregate(&points, how), aggregate(&shuffled, how));
            }
        }
    }
}
