use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::cv::EvaluationResult;
use super::wilcoxon::{signed_rank, Alternative};
use crate::{Error, Result};

pub const LEVEL_90: f64 = 0.10;
pub const LEVEL_95: f64 = 0.05;

/// Pairwise one-sided signed-rank tests on per-fold AUCs.
///
/// `p_values[i][j]` tests whether model `i` beats model `j`; it is `None` on
/// the diagonal and wherever the test is undefined (too few differing folds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMatrix {
    pub models: Vec<String>,
    pub p_values: Vec<Vec<Option<f64>>>,
}

impl ComparisonMatrix {
    pub fn significant(&self, i: usize, j: usize, level: f64) -> bool {
        self.p_values[i][j].is_some_and(|p| p < level)
    }
}

pub fn comparison_matrix(results: &[EvaluationResult]) -> Result<ComparisonMatrix> {
    if let Some(first) = results.first() {
        let shared = results.iter().all(|r| {
            r.fold_count == first.fold_count && r.fold_seed == first.fold_seed && r.fold_aucs.len() == first.fold_aucs.len()
        });
        if !shared {
            return Err(Error::FoldMismatch);
        }
    }
    let n = results.len();
    let mut p_values = alloc::vec![alloc::vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            // Folds excluded from either model are dropped pairwise.
            let (a, b): (Vec<f64>, Vec<f64>) = results[i]
                .fold_aucs
                .iter()
                .zip(&results[j].fold_aucs)
                .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
                .unzip();
            p_values[i][j] = signed_rank(&a, &b, Alternative::Greater).ok();
        }
    }
    Ok(ComparisonMatrix {
        models: results.iter().map(|r| r.model.clone()).collect(),
        p_values,
    })
}
