//! Ordinary least squares with intercept and LMG relative importance.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Exact LMG enumerates `p!` orderings; beyond this it is refused.
pub const MAX_LMG_PREDICTORS: usize = 8;

const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub intercept: f64,
    /// In predictor order.
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    /// Percent of R² attributed to each predictor, in predictor order.
    pub relative_importance: Vec<(String, f64)>,
    pub n: usize,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn importance(&self, name: &str) -> Option<f64> {
        self.relative_importance
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

fn design(n: usize, columns: &[&[f64]]) -> DMatrix<f64> {
    DMatrix::from_fn(n, columns.len() + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            columns[j - 1][i]
        }
    })
}

struct Fit {
    beta: DVector<f64>,
    xtx_inv: DMatrix<f64>,
    rss: f64,
}

fn least_squares(y: &DVector<f64>, x: DMatrix<f64>) -> Result<Fit> {
    let svd = x.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    let min_sv = svd.singular_values.min();
    if max_sv == 0.0 || min_sv / max_sv < RANK_TOLERANCE {
        return Err(Error::Numeric("design matrix is rank deficient".into()));
    }
    let beta = svd
        .solve(y, 0.0)
        .map_err(|e| Error::Numeric(format!("least squares failed: {e}")))?;
    let v = svd.v_t.as_ref().expect("requested V^T").transpose();
    let inv_sq = DMatrix::from_diagonal(&svd.singular_values.map(|s| 1.0 / (s * s)));
    let xtx_inv = &v * inv_sq * v.transpose();
    let resid = y - &x * &beta;
    Ok(Fit {
        beta,
        xtx_inv,
        rss: resid.norm_squared(),
    })
}

fn total_ss(y: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    y.iter().map(|v| (v - mean).powi(2)).sum()
}

/// R² of the model using the predictors selected by `mask`.
fn subset_r_squared(y: &[f64], columns: &[&[f64]], mask: usize, tss: f64) -> Result<f64> {
    if mask == 0 {
        return Ok(0.0);
    }
    let chosen: Vec<&[f64]> = columns
        .iter()
        .enumerate()
        .filter(|(j, _)| mask & (1 << j) != 0)
        .map(|(_, c)| *c)
        .collect();
    let fit = least_squares(&DVector::from_column_slice(y), design(y.len(), &chosen))?;
    Ok(1.0 - fit.rss / tss)
}

fn permutations(p: usize) -> Vec<Vec<usize>> {
    if p == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(p - 1) {
        for pos in 0..=rest.len() {
            let mut perm = rest.clone();
            perm.insert(pos, p - 1);
            out.push(perm);
        }
    }
    out
}

/// LMG shares: the mean over all predictor orderings of each predictor's
/// sequential R² increment. Shares sum to the full-model R².
pub fn lmg(y: &[f64], columns: &[&[f64]]) -> Result<Vec<f64>> {
    let p = columns.len();
    if p > MAX_LMG_PREDICTORS {
        return Err(Error::InvalidInput(format!(
            "LMG enumeration supports at most {MAX_LMG_PREDICTORS} predictors, got {p}"
        )));
    }
    let tss = total_ss(y);
    let r2: HashMap<usize, f64> = (0..(1usize << p))
        .into_par_iter()
        .map(|mask| subset_r_squared(y, columns, mask, tss).map(|r| (mask, r)))
        .collect::<Result<_>>()?;
    let orderings = permutations(p);
    let mut shares = vec![0.0; p];
    for order in &orderings {
        let mut mask = 0usize;
        for &j in order {
            let next = mask | (1 << j);
            shares[j] += r2[&next] - r2[&mask];
            mask = next;
        }
    }
    let count = orderings.len() as f64;
    Ok(shares.into_iter().map(|s| s / count).collect())
}

/// OLS of `y` on the named predictors, with an intercept.
pub fn ols_regression(y: &[f64], predictors: &[(&str, &[f64])]) -> Result<RegressionResult> {
    let n = y.len();
    let p = predictors.len();
    if p == 0 {
        return Err(Error::InvalidInput(
            "regression needs at least one predictor".into(),
        ));
    }
    if n <= p + 1 {
        return Err(Error::InvalidInput(format!(
            "regression with {p} predictors needs more than {} observations",
            p + 1
        )));
    }
    for (name, column) in predictors {
        if column.len() != n {
            return Err(Error::InvalidInput(format!(
                "predictor `{name}` has {} values, expected {n}",
                column.len()
            )));
        }
    }
    if y.iter()
        .chain(predictors.iter().flat_map(|(_, c)| c.iter()))
        .any(|v| !v.is_finite())
    {
        return Err(Error::InvalidInput(
            "non-finite value in regression input".into(),
        ));
    }
    let tss = total_ss(y);
    if tss == 0.0 {
        return Err(Error::Degenerate("regression target is constant".into()));
    }

    let columns: Vec<&[f64]> = predictors.iter().map(|(_, c)| *c).collect();
    let fit = least_squares(&DVector::from_column_slice(y), design(n, &columns))?;
    let dof = (n - p - 1) as f64;
    let sigma2 = fit.rss / dof;
    let t_dist = StudentsT::new(0.0, 1.0, dof).expect("positive degrees of freedom");
    let coefficients = predictors
        .iter()
        .enumerate()
        .map(|(j, (name, _))| {
            let estimate = fit.beta[j + 1];
            let std_error = (sigma2 * fit.xtx_inv[(j + 1, j + 1)]).sqrt();
            let t_value = estimate / std_error;
            let p_value = if std_error == 0.0 {
                0.0
            } else {
                (2.0 * t_dist.cdf(-t_value.abs())).clamp(0.0, 1.0)
            };
            Coefficient {
                name: name.to_string(),
                estimate,
                std_error,
                t_value,
                p_value,
            }
        })
        .collect();

    let r_squared = (1.0 - fit.rss / tss).clamp(0.0, 1.0);
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / dof;
    let shares = lmg(y, &columns)?;
    let share_total: f64 = shares.iter().sum();
    let relative_importance = predictors
        .iter()
        .zip(&shares)
        .map(|((name, _), s)| {
            let pct = if share_total > 0.0 {
                100.0 * s / share_total
            } else {
                f64::NAN
            };
            (name.to_string(), pct)
        })
        .collect();

    Ok(RegressionResult {
        intercept: fit.beta[0],
        coefficients,
        r_squared,
        adj_r_squared,
        relative_importance,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        let r = ols_regression(&y, &[("x", &x)]).unwrap();
        assert!((r.adj_r_squared - 1.0).abs() < 1e-12);
        assert!((r.intercept - 3.0).abs() < 1e-10);
        assert!((r.coefficient("x").unwrap().estimate - 2.0).abs() < 1e-10);
        assert!((r.importance("x").unwrap() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn orthogonal_equal_predictors_split_evenly() {
        let a = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        let b = [1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0];
        let noise = [0.1, -0.1, -0.1, 0.1, -0.1, 0.1, 0.1, -0.1];
        let y: Vec<f64> = (0..8).map(|i| a[i] + b[i] + noise[i]).collect();
        let r = ols_regression(&y, &[("a", &a), ("b", &b)]).unwrap();
        assert!((r.importance("a").unwrap() - 50.0).abs() < 0.1);
        assert!((r.importance("b").unwrap() - 50.0).abs() < 0.1);
    }

    #[test]
    fn collinear_predictors_are_rejected() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
        let y = [1.0, 3.0, 2.0, 5.0, 4.0, 6.0];
        assert!(matches!(
            ols_regression(&y, &[("a", &a), ("b", &b)]),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 24);
    }
}
