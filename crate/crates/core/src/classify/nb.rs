//! Gaussian Naive Bayes: per-class priors and a per-feature normal fit,
//! with a variance floor against degenerate columns.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbConfig {
    /// Lower bound applied to every fitted variance (post-standardization).
    pub variance_floor: f64,
}

impl Default for NbConfig {
    fn default() -> Self {
        NbConfig {
            variance_floor: 1e-9,
        }
    }
}

impl NbConfig {
    pub fn validate(&self) -> Result<()> {
        if self.variance_floor < 0.0 {
            return Err(Error::Config(format!(
                "variance floor must be non-negative, got {}",
                self.variance_floor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub priors: Vec<f64>,
    /// [class][feature]
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

impl NbModel {
    pub fn fit(
        rows: &[Vec<f64>],
        class_idx: &[usize],
        n_classes: usize,
        cfg: &NbConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let n_features = rows.first().map_or(0, |r| r.len());
        let mut priors = vec![0.0; n_classes];
        let mut means = vec![vec![0.0; n_features]; n_classes];
        let mut variances = vec![vec![0.0; n_features]; n_classes];

        for c in 0..n_classes {
            let members: Vec<&Vec<f64>> = rows
                .iter()
                .zip(class_idx)
                .filter(|(_, ci)| **ci == c)
                .map(|(r, _)| r)
                .collect();
            if members.is_empty() {
                return Err(Error::Training(format!(
                    "class index {c} has no training rows"
                )));
            }
            priors[c] = members.len() as f64 / rows.len() as f64;
            let m = members.len() as f64;
            for f in 0..n_features {
                let mean = members.iter().map(|r| r[f]).sum::<f64>() / m;
                let var = members.iter().map(|r| (r[f] - mean).powi(2)).sum::<f64>() / m;
                means[c][f] = mean;
                variances[c][f] = var.max(cfg.variance_floor);
            }
        }
        Ok(NbModel {
            priors,
            means,
            variances,
        })
    }

    fn log_joint(&self, class: usize, row: &[f64]) -> f64 {
        let mut lp = self.priors[class].ln();
        for (f, x) in row.iter().enumerate() {
            let var = self.variances[class][f];
            let d = x - self.means[class][f];
            lp += -0.5 * ((std::f64::consts::TAU * var).ln() + d * d / var);
        }
        lp
    }

    /// (winning class index, normalized posteriors). Ties pick the lowest
    /// class index.
    pub fn predict(&self, row: &[f64]) -> (usize, Vec<f64>) {
        let log_joints: Vec<f64> = (0..self.priors.len())
            .map(|c| self.log_joint(c, row))
            .collect();
        let max = log_joints.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let unnorm: Vec<f64> = log_joints.iter().map(|lp| (lp - max).exp()).collect();
        let total: f64 = unnorm.iter().sum();
        let posteriors: Vec<f64> = unnorm.iter().map(|p| p / total).collect();
        let mut winner = 0;
        for (c, p) in posteriors.iter().enumerate() {
            if *p > posteriors[winner] {
                winner = c;
            }
        }
        (winner, posteriors)
    }
}
