use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{BagPrediction, InstanceBag};
use crate::{Error, Result};

/// Axis-parallel rectangle discriminator.
///
/// Fitting starts from the bounding box of every positive-bag instance and
/// then repeatedly moves the single face (by `step`) that leaves the fewest
/// negative-bag instances inside, provided every positive bag keeps at least
/// one instance inside. It stops when no move lowers the negative count.
///
/// A bag is positive when at least `threshold` of its instances fall inside
/// the rectangle widened by `epsilon` on every side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Apr {
    lower: Vec<f64>,
    upper: Vec<f64>,
    threshold: f64,
    epsilon: f64,
}

fn inside(p: &[f64], lower: &[f64], upper: &[f64], margin: f64) -> bool {
    p.iter()
        .zip(lower.iter().zip(upper))
        .all(|(&v, (&lo, &hi))| v >= lo - margin && v <= hi + margin)
}

impl Apr {
    pub(crate) fn fit(bags: &[InstanceBag], threshold: f64, epsilon: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(epsilon >= 0.0) {
            return Err(Error::InvalidHyperparameter("APR step must be > 0 and epsilon ≥ 0".into()));
        }
        let positives: Vec<&InstanceBag> = bags.iter().filter(|b| b.label).collect();
        if positives.is_empty() {
            return Err(Error::NoPositiveBags);
        }
        let dim = positives[0].points[0].len();
        let mut lower = alloc::vec![f64::INFINITY; dim];
        let mut upper = alloc::vec![f64::NEG_INFINITY; dim];
        for p in positives.iter().flat_map(|b| &b.points) {
            for j in 0..dim {
                lower[j] = lower[j].min(p[j]);
                upper[j] = upper[j].max(p[j]);
            }
        }
        let negatives: Vec<&Vec<f64>> = bags.iter().filter(|b| !b.label).flat_map(|b| &b.points).collect();
        let negatives_inside =
            |lo: &[f64], hi: &[f64]| negatives.iter().filter(|p| inside(p, lo, hi, 0.0)).count();
        let covers_positives =
            |lo: &[f64], hi: &[f64]| positives.iter().all(|b| b.points.iter().any(|p| inside(p, lo, hi, 0.0)));

        let mut current = negatives_inside(&lower, &upper);
        while current > 0 {
            let mut best: Option<(usize, Vec<f64>, Vec<f64>)> = None;
            for j in 0..dim {
                for shrink_lower in [true, false] {
                    let (mut lo, mut hi) = (lower.clone(), upper.clone());
                    if shrink_lower {
                        lo[j] += step;
                    } else {
                        hi[j] -= step;
                    }
                    if lo[j] > hi[j] || !covers_positives(&lo, &hi) {
                        continue;
                    }
                    let count = negatives_inside(&lo, &hi);
                    if best.as_ref().map_or(count < current, |b| count < b.0) {
                        best = Some((count, lo, hi));
                    }
                }
            }
            match best {
                Some((count, lo, hi)) => {
                    current = count;
                    lower = lo;
                    upper = hi;
                }
                None => break,
            }
        }
        Ok(Apr {
            lower,
            upper,
            threshold,
            epsilon,
        })
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    pub(crate) fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Fraction of `bag` inside the widened rectangle.
    pub fn inside_fraction(&self, bag: &[Vec<f64>]) -> f64 {
        let n = bag
            .iter()
            .filter(|p| inside(p, &self.lower, &self.upper, self.epsilon))
            .count();
        n as f64 / bag.len() as f64
    }

    pub(crate) fn predict(&self, bag: &[Vec<f64>]) -> BagPrediction {
        let fraction = self.inside_fraction(bag);
        BagPrediction {
            label: fraction >= self.threshold,
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
    use proptest::prelude::*;

    fn bag(points: &[f64], label: bool) -> InstanceBag {
        InstanceBag {
            points: points.iter().map(|&p| vec![p]).collect(),
            label,
        }
    }

    #[test]
    fn lone_positive_bag_gives_its_bounding_box() {
        let train = vec![InstanceBag {
            points: vec![vec![0.0, 1.0], vec![2.0, -1.0]],
            label: true,
        }];
        let m = Apr::fit(&train, 0.5, 0.05, 1.0).unwrap();
        assert_eq!(m.bounds(), (&[0.0, -1.0][..], &[2.0, 1.0][..]));
        assert!(m.predict(&train[0].points).label);
    }

    #[test]
    fn one_dimensional_toy() {
        let train = vec![bag(&[1.0, 2.0], true), bag(&[5.0], false)];
        let m = Apr::fit(&train, 0.5, 0.05, 1.0).unwrap();
        assert_eq!(m.bounds(), (&[1.0][..], &[2.0][..]));
        assert!(m.predict(&[vec![1.5]]).label);
        assert!(!m.predict(&[vec![5.0]]).label);
        // Inside only thanks to the epsilon margin.
        assert!(m.predict(&[vec![2.04]]).label);
        assert!(!m.predict(&[vec![2.06]]).label);
    }

    #[test]
    fn half_inside_is_positive() {
        let train = vec![bag(&[0.0, 1.0], true)];
        let m = Apr::fit(&train, 0.5, 0.05, 1.0).unwrap();
        let p = m.predict(&[vec![0.5], vec![9.0]]);
        assert_eq!(p.confidence, 0.5);
        assert!(p.label);
    }

    #[test]
    fn shrinks_away_from_negatives() {
        // Start [0, 3] with negatives 0.5 and 2.5 inside. Raising the lower
        // face to 1 excludes 0.5; every further move would empty a positive bag.
        let train = vec![bag(&[0.0, 1.0], true), bag(&[3.0], true), bag(&[2.5, 0.5], false)];
        let m = Apr::fit(&train, 0.5, 0.0, 1.0).unwrap();
        let (lo, hi) = m.bounds();
        assert_eq!((lo[0], hi[0]), (1.0, 3.0));
    }

    #[test]
    fn needs_a_positive_bag() {
        assert_eq!(
            MilSpec::apr().fit(&[bag(&[1.0], false)]).unwrap_err(),
            Error::NoPositiveBags
        );
    }

    proptest! {
        #[test]
        fn every_positive_bag_keeps_an_instance(
            bags in proptest::collection::vec(
                (proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..5), any::<bool>()),
                1..12,
            )
        ) {
            let mut bags: Vec<InstanceBag> = bags
                .into_iter()
                .map(|(pts, label)| InstanceBag { points: pts.into_iter().map(|(a, b)| vec![a, b]).collect(), label })
                .collect();
            bags[0].label = true;
            let m = Apr::fit(&bags, 0.5, 0.05, 1.0).unwrap();
            let (lo, hi) = m.bounds();
            for b in bags.iter().filter(|b| b.label) {
                prop_assert!(b.points.iter().any(|p| inside(p, lo, hi, 0.0)));
            }
        }
    }
}
