//! Feature scaling fitted on training data.
//!
//! The four real-valued descriptors are scaled; the assignment indicator is
//! passed through unchanged.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{FeatureVector, ASSIGNMENT_FEATURE, FEATURE_NAMES, NUM_FEATURES};
use crate::{Error, Result};

const SCALED: usize = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMethod {
    /// `(x - mean) / sd`, population standard deviation.
    #[default]
    ZScore,
    /// `(x - min) / (max - min)`.
    MinMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub method: NormalizationMethod,
    pub features: Vec<String>,
    /// Mean (z-score) or minimum (min-max) per scaled feature.
    pub center: [f64; SCALED],
    /// Standard deviation (z-score) or range (min-max); always positive.
    pub scale: [f64; SCALED],
}

impl NormalizationStats {
    pub fn fit(train: &[FeatureVector], method: NormalizationMethod) -> Result<Self> {
        let points: Vec<[f64; NUM_FEATURES]> = train.iter().map(FeatureVector::to_point).collect();
        Self::fit_points(&points, method)
    }

    pub fn fit_points(train: &[[f64; NUM_FEATURES]], method: NormalizationMethod) -> Result<Self> {
        if train.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: train.len(),
            });
        }
        let n = train.len() as f64;
        let mut center = [0.0; SCALED];
        let mut scale = [0.0; SCALED];
        for j in 0..SCALED {
            let column = train.iter().map(|p| p[j]);
            let (c, s) = match method {
                NormalizationMethod::ZScore => {
                    let mean = column.clone().sum::<f64>() / n;
                    let var = column.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
                    (mean, libm::sqrt(var))
                }
                NormalizationMethod::MinMax => {
                    let min = column.clone().fold(f64::INFINITY, f64::min);
                    let max = column.fold(f64::NEG_INFINITY, f64::max);
                    (min, max - min)
                }
            };
            if !c.is_finite() || !s.is_finite() {
                return Err(Error::NonFinite);
            }
            if s <= 0.0 {
                return Err(Error::DegenerateFeature(FEATURE_NAMES[j]));
            }
            center[j] = c;
            scale[j] = s;
        }
        Ok(NormalizationStats {
            method,
            features: FEATURE_NAMES.iter().map(|f| f.to_string()).collect(),
            center,
            scale,
        })
    }

    pub fn apply(&self, v: &FeatureVector) -> [f64; NUM_FEATURES] {
        self.apply_point(&v.to_point())
    }

    pub fn apply_point(&self, raw: &[f64; NUM_FEATURES]) -> [f64; NUM_FEATURES] {
        let mut out = *raw;
        for j in 0..SCALED {
            out[j] = (raw[j] - self.center[j]) / self.scale[j];
        }
        debug_assert_eq!(out[ASSIGNMENT_FEATURE], raw[ASSIGNMENT_FEATURE]);
        out
    }
}
