use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{BagPrediction, InstanceBag};
use crate::math::euclidean;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BagDistance {
    /// Smallest distance between any two instances.
    #[default]
    MinimalHausdorff,
    /// Symmetric Hausdorff: the larger of the two directed max-min distances.
    Hausdorff,
}

pub fn bag_distance(a: &[Vec<f64>], b: &[Vec<f64>], kind: BagDistance) -> f64 {
    match kind {
        BagDistance::MinimalHausdorff => a
            .iter()
            .flat_map(|x| b.iter().map(move |y| euclidean(x, y)))
            .fold(f64::INFINITY, f64::min),
        BagDistance::Hausdorff => directed(a, b).max(directed(b, a)),
    }
}

fn directed(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .map(|x| b.iter().map(|y| euclidean(x, y)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Symmetric matrix of pairwise bag distances.
pub fn distance_matrix(bags: &[InstanceBag], kind: BagDistance) -> Vec<Vec<f64>> {
    let n = bags.len();
    let mut d = alloc::vec![alloc::vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = bag_distance(&bags[i].points, &bags[j].points, kind);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

/// Citation-kNN: the query's `references` nearest training bags vote
/// together with every training bag that counts the query among its own
/// `citations` nearest bags. Each voting bag votes once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationKnn {
    references: usize,
    citations: usize,
    distance: BagDistance,
    bags: Vec<InstanceBag>,
    /// Pairwise training distances.
    distances: Vec<Vec<f64>>,
}

impl CitationKnn {
    pub(crate) fn fit(
        bags: &[InstanceBag],
        references: usize,
        citations: usize,
        distance: BagDistance,
    ) -> Result<Self> {
        if bags.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if references == 0 {
            return Err(Error::InvalidHyperparameter("references must be ≥ 1".into()));
        }
        if bags.len() < references {
            return Err(Error::TooFewSamples {
                needed: references,
                got: bags.len(),
            });
        }
        Ok(CitationKnn {
            references,
            citations,
            distance,
            distances: distance_matrix(bags, distance),
            bags: bags.to_vec(),
        })
    }

    pub(crate) fn dim(&self) -> usize {
        self.bags[0].points[0].len()
    }

    /// Indices of the voting training bags, references first.
    pub fn voters(&self, query: &[Vec<f64>]) -> Vec<usize> {
        let to_query: Vec<f64> = self
            .bags
            .iter()
            .map(|b| bag_distance(&b.points, query, self.distance))
            .collect();

        let mut order: Vec<usize> = (0..self.bags.len()).collect();
        order.sort_by(|&a, &b| to_query[a].total_cmp(&to_query[b]).then(a.cmp(&b)));
        let mut voters: Vec<usize> = order[..self.references].to_vec();

        // The query ranks behind any training bag at the same distance.
        for (b, row) in self.distances.iter().enumerate() {
            let closer = row
                .iter()
                .enumerate()
                .filter(|&(j, &d)| j != b && d <= to_query[b])
                .count();
            if closer < self.citations && !voters.contains(&b) {
                voters.push(b);
            }
        }
        voters
    }

    pub(crate) fn predict(&self, query: &[Vec<f64>]) -> BagPrediction {
        let voters = self.voters(query);
        let positive = voters.iter().filter(|&&i| self.bags[i].label).count();
        let negative = voters.len() - positive;
        let fraction = positive as f64 / voters.len() as f64;
        BagPrediction {
            label: positive > negative,
            confidence: fraction,
            score: fraction,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mil::MilSpec;
    use alloc::vec;

    fn bag(points: &[&[f64]], label: bool) -> InstanceBag {
        InstanceBag {
            points: points.iter().map(|p| p.to_vec()).collect(),
            label,
        }
    }

    #[test]
    fn identical_positive_bag_wins_with_one_reference() {
        let train = vec![bag(&[&[0.0, 0.0], &[1.0, 1.0]], true), bag(&[&[5.0, 5.0]], false)];
        let m = CitationKnn::fit(&train, 1, 0, BagDistance::MinimalHausdorff).unwrap();
        let p = m.predict(&train[0].points);
        assert!(p.label);
        assert_eq!(p.confidence, 1.0);
    }

    #[test]
    fn hand_computed_voters() {
        // 1-D bags. Minimal-Hausdorff distances:
        //   d(0,1) = |1 - 3| = 2, d(0,2) = |1 - 10| = 9, d(1,2) = |4 - 10| = 6.
        // Query {2.5}: d(q,0) = 1.5, d(q,1) = 0.5, d(q,2) = 7.5.
        let train = vec![
            bag(&[&[0.0], &[1.0]], true),
            bag(&[&[3.0], &[4.0]], false),
            bag(&[&[10.0]], true),
        ];
        let d = distance_matrix(&train, BagDistance::MinimalHausdorff);
        assert_eq!(d[0][1], 2.0);
        assert_eq!(d[0][2], 9.0);
        assert_eq!(d[1][2], 6.0);

        let m = CitationKnn::fit(&train, 1, 1, BagDistance::MinimalHausdorff).unwrap();
        let query = vec![vec![2.5]];
        // Reference: bag 1 (0.5). Citers with C = 1: bag 0 (query 1.5 < 2),
        // bag 1 (0.5 < 2), bag 2 (7.5 > 6, not a citer).
        assert_eq!(m.voters(&query), vec![1, 0]);
        let p = m.predict(&query);
        // One positive and one negative voter: ties go to failure.
        assert!(!p.label);
        assert_eq!(p.confidence, 0.5);
    }

    #[test]
    fn classic_hausdorff_is_available() {
        let a = vec![vec![0.0], vec![1.0]];
        let b = vec![vec![3.0], vec![4.0]];
        assert_eq!(bag_distance(&a, &b, BagDistance::Hausdorff), 3.0);
        assert_eq!(bag_distance(&a, &b, BagDistance::MinimalHausdorff), 2.0);
    }

    #[test]
    fn empty_training_set() {
        assert!(MilSpec::citation_knn().fit(&[]).is_err());
    }
}
