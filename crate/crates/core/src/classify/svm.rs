//! Soft-margin SVM with RBF kernel trained by sequential minimal
//! optimization on the dual. Multiclass problems run one-vs-one with a
//! majority vote.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// RBF width: k(x, y) = exp(-gamma * ||x - y||^2).
    pub gamma: f64,
    /// Box constraint on the dual variables.
    pub c: f64,
    /// KKT tolerance SMO optimizes to.
    pub tolerance: f64,
    /// Consecutive full no-progress passes before SMO stops.
    pub max_passes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            gamma: 0.01,
            c: 10.0,
            tolerance: 1e-3,
            max_passes: 10,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !(self.c > 0.0) {
            return Err(Error::Config(format!(
                "SVM needs gamma > 0 and C > 0, got gamma {} C {}",
                self.gamma, self.c
            )));
        }
        if !(self.tolerance > 0.0) || self.max_passes == 0 {
            return Err(Error::Config(
                "SVM tolerance must be positive and max_passes at least 1".into(),
            ));
        }
        Ok(())
    }
}

pub fn rbf_kernel(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * sq).exp()
}

/// One binary machine: support vectors with their signed multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub gamma: f64,
    pub support_vectors: Vec<Vec<f64>>,
    /// alpha_i * y_i per support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
}

impl BinarySvm {
    /// f(x) = sum_i alpha_i y_i k(x_i, x) + b.
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, c)| c * rbf_kernel(self.gamma, sv, x))
            .sum::<f64>()
            + self.bias
    }
}

/// Full SMO state during training of one binary problem.
struct Smo<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    kernel: Vec<f64>,
    alpha: Vec<f64>,
    b: f64,
    cfg: &'a SvmConfig,
}

impl<'a> Smo<'a> {
    fn new(x: &'a [Vec<f64>], y: &'a [f64], cfg: &'a SvmConfig) -> Self {
        let n = x.len();
        let mut kernel = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let k = rbf_kernel(cfg.gamma, &x[i], &x[j]);
                kernel[i * n + j] = k;
                kernel[j * n + i] = k;
            }
        }
        Smo {
            x,
            y,
            kernel,
            alpha: vec![0.0; n],
            b: 0.0,
            cfg,
        }
    }

    fn k(&self, i: usize, j: usize) -> f64 {
        self.kernel[i * self.x.len() + j]
    }

    fn decision(&self, i: usize) -> f64 {
        let n = self.x.len();
        let mut f = self.b;
        for j in 0..n {
            if self.alpha[j] != 0.0 {
                f += self.alpha[j] * self.y[j] * self.k(j, i);
            }
        }
        f
    }

    fn error(&self, i: usize) -> f64 {
        self.decision(i) - self.y[i]
    }

    fn violates_kkt(&self, i: usize) -> bool {
        let r = self.error(i) * self.y[i];
        let tol = self.cfg.tolerance;
        (r < -tol && self.alpha[i] < self.cfg.c) || (r > tol && self.alpha[i] > 0.0)
    }

    /// Try the classic two-variable update on (i, j); true if alpha moved.
    fn step(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (ei, ej) = (self.error(i), self.error(j));
        let (yi, yj) = (self.y[i], self.y[j]);
        let (ai_old, aj_old) = (self.alpha[i], self.alpha[j]);
        let c = self.cfg.c;

        let (low, high) = if yi != yj {
            let d = aj_old - ai_old;
            (d.max(0.0), (c + d).min(c))
        } else {
            let s = ai_old + aj_old;
            ((s - c).max(0.0), s.min(c))
        };
        if low >= high {
            return false;
        }

        let eta = 2.0 * self.k(i, j) - self.k(i, i) - self.k(j, j);
        if eta >= 0.0 {
            return false;
        }

        let mut aj = aj_old - yj * (ei - ej) / eta;
        aj = aj.clamp(low, high);
        if (aj - aj_old).abs() < 1e-7 {
            return false;
        }
        // the equality constraint keeps ai in [0, C] analytically; clamp the
        // floating-point residue
        let ai = (ai_old + yi * yj * (aj_old - aj)).clamp(0.0, c);

        self.alpha[i] = ai;
        self.alpha[j] = aj;

        let b1 = self.b - ei - yi * (ai - ai_old) * self.k(i, i) - yj * (aj - aj_old) * self.k(i, j);
        let b2 = self.b - ej - yi * (ai - ai_old) * self.k(i, j) - yj * (aj - aj_old) * self.k(j, j);
        self.b = if ai > 0.0 && ai < c {
            b1
        } else if aj > 0.0 && aj < c {
            b2
        } else {
            0.5 * (b1 + b2)
        };
        true
    }

    /// Deterministic second-choice: largest |E_i - E_j| first, then scan in
    /// index order until some pair makes progress.
    fn examine(&mut self, i: usize) -> bool {
        if !self.violates_kkt(i) {
            return false;
        }
        let n = self.x.len();
        let ei = self.error(i);
        let mut best_j = None;
        let mut best_gap = -1.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let gap = (ei - self.error(j)).abs();
            if gap > best_gap {
                best_gap = gap;
                best_j = Some(j);
            }
        }
        if let Some(j) = best_j {
            if self.step(i, j) {
                return true;
            }
        }
        for j in 0..n {
            if j != i && self.step(i, j) {
                return true;
            }
        }
        false
    }

    fn run(&mut self) {
        let n = self.x.len();
        let mut quiet_passes = 0;
        // Hard cap keeps adversarial inputs from cycling; in practice SMO on
        // cohort-sized problems terminates in a handful of passes.
        let mut budget = 200 * n.max(10);
        while quiet_passes < self.cfg.max_passes && budget > 0 {
            let mut changed = 0;
            for i in 0..n {
                if self.examine(i) {
                    changed += 1;
                }
                budget = budget.saturating_sub(1);
            }
            if changed == 0 {
                quiet_passes += 1;
            } else {
                quiet_passes = 0;
            }
        }
        // Snap numerical residue to the bounds: an alpha of ~1e-9 is a
        // non-support-vector, not an interior point whose margin must be 1.
        let snap = 1e-8 * self.cfg.c;
        for a in self.alpha.iter_mut() {
            if *a < snap {
                *a = 0.0;
            } else if *a > self.cfg.c - snap {
                *a = self.cfg.c;
            }
        }
        self.recompute_bias();
    }

    /// Canonical bias from the converged alphas: the mean over free support
    /// vectors of y_i - f_raw(x_i), or the midpoint of the KKT-feasible
    /// interval when every alpha sits at a bound. SMO's running bias is path
    /// dependent; this one is a function of the solution alone.
    fn recompute_bias(&mut self) {
        let n = self.x.len();
        let raw: Vec<f64> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|j| self.alpha[*j] != 0.0)
                    .map(|j| self.alpha[j] * self.y[j] * self.k(j, i))
                    .sum()
            })
            .collect();
        let free: Vec<usize> = (0..n)
            .filter(|&i| self.alpha[i] > 0.0 && self.alpha[i] < self.cfg.c)
            .collect();
        if !free.is_empty() {
            self.b = free.iter().map(|&i| self.y[i] - raw[i]).sum::<f64>() / free.len() as f64;
            return;
        }
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for i in 0..n {
            let bound = if self.y[i] > 0.0 { 1.0 - raw[i] } else { -1.0 - raw[i] };
            let at_zero = self.alpha[i] == 0.0;
            // y=+1: alpha=0 wants b >= 1-raw, alpha=C wants b <= 1-raw;
            // y=-1: alpha=0 wants b <= -1-raw, alpha=C wants b >= -1-raw.
            if (self.y[i] > 0.0) == at_zero {
                lo = lo.max(bound);
            } else {
                hi = hi.min(bound);
            }
        }
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            self.b = 0.5 * (lo + hi);
        } else if lo.is_finite() && hi.is_infinite() {
            self.b = lo;
        } else if hi.is_finite() && lo.is_infinite() {
            self.b = hi;
        }
        // infeasible interval (tolerance residue): keep SMO's running bias
    }
}

/// Train one binary machine on rows labeled ±1.
pub fn train_binary(x: &[Vec<f64>], y: &[f64], cfg: &SvmConfig) -> Result<BinarySvm> {
    cfg.validate()?;
    if x.len() < 2 {
        return Err(Error::Training(format!(
            "SVM needs at least 2 training rows, got {}",
            x.len()
        )));
    }
    let mut smo = Smo::new(x, y, cfg);
    smo.run();

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for (i, &a) in smo.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(x[i].clone());
            coefficients.push(a * y[i]);
        }
    }
    Ok(BinarySvm {
        gamma: cfg.gamma,
        support_vectors,
        coefficients,
        bias: smo.b,
    })
}

/// Raw dual variables for one trained problem; used by the KKT diagnostics.
pub fn train_binary_with_alphas(
    x: &[Vec<f64>],
    y: &[f64],
    cfg: &SvmConfig,
) -> Result<(BinarySvm, Vec<f64>)> {
    cfg.validate()?;
    if x.len() < 2 {
        return Err(Error::Training("SVM needs at least 2 training rows".into()));
    }
    let mut smo = Smo::new(x, y, cfg);
    smo.run();
    let alphas = smo.alpha.clone();
    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for (i, &a) in smo.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(x[i].clone());
            coefficients.push(a * y[i]);
        }
    }
    Ok((
        BinarySvm {
            gamma: cfg.gamma,
            support_vectors,
            coefficients,
            bias: smo.b,
        },
        alphas,
    ))
}

/// Largest KKT violation of a solution over its training set:
/// alpha = 0 wants y f >= 1, interior alphas want y f = 1, alpha = C wants
/// y f <= 1. Returns max(0, violation).
pub fn kkt_violation(
    svm: &BinarySvm,
    x: &[Vec<f64>],
    y: &[f64],
    alphas: &[f64],
    c: f64,
) -> f64 {
    let mut worst = 0.0f64;
    for ((xi, &yi), &a) in x.iter().zip(y).zip(alphas) {
        let margin = yi * svm.decision(xi);
        let v = if a <= 0.0 {
            1.0 - margin // want margin >= 1
        } else if a >= c {
            margin - 1.0 // want margin <= 1
        } else {
            (margin - 1.0).abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// One-vs-one multiclass ensemble over class indices 0..k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub n_classes: usize,
    /// (negative class index, positive class index, machine); pairs ordered
    /// (a, b) with a < b, a voting on f <= 0 and b on f > 0.
    pub machines: Vec<(usize, usize, BinarySvm)>,
}

impl SvmModel {
    pub fn fit(rows: &[Vec<f64>], class_idx: &[usize], n_classes: usize, cfg: &SvmConfig) -> Result<Self> {
        let mut machines = Vec::new();
        for a in 0..n_classes {
            for b in a + 1..n_classes {
                let mut x = Vec::new();
                let mut y = Vec::new();
                for (row, &ci) in rows.iter().zip(class_idx) {
                    if ci == a {
                        x.push(row.clone());
                        y.push(-1.0);
                    } else if ci == b {
                        x.push(row.clone());
                        y.push(1.0);
                    }
                }
                if x.iter().zip(&y).all(|(_, v)| *v == y[0]) {
                    return Err(Error::Training(format!(
                        "class pair ({a}, {b}) has a single class in training data"
                    )));
                }
                machines.push((a, b, train_binary(&x, &y, cfg)?));
            }
        }
        Ok(SvmModel {
            n_classes,
            machines,
        })
    }

    /// (winning class index, per-class scores). Binary problems report the
    /// signed decision value for each side; ensembles report votes. Ties go
    /// to the lower class index.
    pub fn predict(&self, row: &[f64]) -> (usize, Vec<f64>) {
        if self.machines.len() == 1 {
            let (a, b, svm) = &self.machines[0];
            let f = svm.decision(row);
            let mut scores = vec![0.0; self.n_classes];
            scores[*a] = -f;
            scores[*b] = f;
            let winner = if f > 0.0 { *b } else { *a };
            return (winner, scores);
        }
        let mut votes = vec![0.0; self.n_classes];
        for (a, b, svm) in &self.machines {
            let f = svm.decision(row);
            if f > 0.0 {
                votes[*b] += 1.0;
            } else {
                votes[*a] += 1.0;
            }
        }
        let mut winner = 0;
        for (c, v) in votes.iter().enumerate() {
            if *v > votes[winner] {
                winner = c;
            }
        }
        (winner, votes)
    }
}
