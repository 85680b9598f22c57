//! Spearman and partial Spearman correlation with the usual inferential
//! summary (Fisher-z CI, t-test p-value, post-hoc power).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

/// Below this size Spearman p-values come from exact permutation
/// enumeration.
pub const EXACT_PERMUTATION_LIMIT: usize = 10;

const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub n: usize,
    pub ci95: (f64, f64),
    pub rho_squared: f64,
    pub adj_rho_squared: f64,
    pub p_value: f64,
    pub power: f64,
    pub covariates: Vec<String>,
}

/// Average ranks, 1-based; ties share the mean of the ranks they span.
pub fn rank(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation; `None` when either vector is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn check_inputs(x: &[f64], y: &[f64], min_n: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "vectors differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < min_n {
        return Err(Error::InvalidInput(format!(
            "need at least {min_n} observations, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in input".into()));
    }
    Ok(())
}

/// Two-sided p-value of `r` under a Student t with `dof` degrees of freedom.
fn t_test_p(r: f64, dof: f64) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (dof / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, dof).expect("positive degrees of freedom");
    (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0)
}

/// Fisher-z 95% interval with standard error `1 / sqrt(n_eff - 3)`.
fn fisher_ci(r: f64, n_eff: f64) -> (f64, f64) {
    let z = r.atanh();
    let half = Normal::standard().inverse_cdf(1.0 - ALPHA / 2.0) / (n_eff - 3.0).sqrt();
    let low = (z - half).tanh().min(r);
    let high = (z + half).tanh().max(r);
    (low, high)
}

/// Post-hoc two-sided power of a correlation test at alpha 0.05.
///
/// The critical correlation comes from the t distribution with `n - 2`
/// degrees of freedom; both it and the bias-corrected effect are mapped
/// through Fisher's z with standard error `1 / sqrt(n - 3)`.
pub fn correlation_power(r: f64, n: f64) -> f64 {
    if n <= 3.0 {
        return f64::NAN;
    }
    let r = r.abs();
    if r >= 1.0 {
        return 1.0;
    }
    let dof = n - 2.0;
    let t_crit = StudentsT::new(0.0, 1.0, dof)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - ALPHA / 2.0);
    let r_crit = (t_crit * t_crit / (t_crit * t_crit + dof)).sqrt();
    let z_effect = r.atanh() + r / (2.0 * (n - 1.0));
    let z_crit = r_crit.atanh();
    let scale = (n - 3.0).sqrt();
    let normal = Normal::standard();
    (normal.cdf((z_effect - z_crit) * scale) + normal.cdf((-z_effect - z_crit) * scale))
        .clamp(0.0, 1.0)
}

fn summarize(
    rho: f64,
    n: usize,
    k: usize,
    p_value: f64,
    covariates: Vec<String>,
) -> CorrelationResult {
    let nf = n as f64;
    let kf = k as f64;
    let rho_squared = rho * rho;
    CorrelationResult {
        rho,
        n,
        ci95: fisher_ci(rho, nf - kf),
        rho_squared,
        adj_rho_squared: 1.0 - (1.0 - rho_squared) * (nf - 1.0) / (nf - kf - 2.0),
        p_value,
        power: correlation_power(rho, nf - kf),
        covariates,
    }
}

/// Share of rank permutations whose |rho| reaches the observed one.
fn exact_permutation_p(rx: &[f64], ry: &[f64], observed: f64) -> f64 {
    let n = ry.len();
    let mut perm: Vec<f64> = ry.to_vec();
    let mut c = vec![0usize; n];
    let threshold = observed.abs() - 1e-12;
    let count_if = |p: &[f64]| pearson(rx, p).is_some_and(|r| r.abs() >= threshold) as u64;
    let mut hits = count_if(&perm);
    let mut total = 1u64;
    // Heap's algorithm.
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            hits += count_if(&perm);
            total += 1;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    hits as f64 / total as f64
}

/// Spearman's rank correlation.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    check_inputs(x, y, 4)?;
    let rx = rank(x);
    let ry = rank(y);
    let rho = pearson(&rx, &ry)
        .ok_or_else(|| Error::Degenerate("Spearman correlation of a constant vector".into()))?;
    let n = x.len();
    let p_value = if n < EXACT_PERMUTATION_LIMIT {
        exact_permutation_p(&rx, &ry, rho)
    } else {
        t_test_p(rho, n as f64 - 2.0)
    };
    Ok(summarize(rho, n, 0, p_value, Vec::new()))
}

/// Spearman correlation of `x` and `y` with the rank-linear influence of
/// the covariates removed.
pub fn partial_spearman(
    x: &[f64],
    y: &[f64],
    covariates: &[(&str, &[f64])],
) -> Result<CorrelationResult> {
    if covariates.is_empty() {
        return spearman(x, y);
    }
    check_inputs(x, y, 4)?;
    let n = x.len();
    let k = covariates.len();
    for (name, z) in covariates {
        if z.len() != n {
            return Err(Error::InvalidInput(format!(
                "covariate `{name}` has {} values, expected {n}",
                z.len()
            )));
        }
    }
    if n <= k + 3 {
        return Err(Error::InvalidInput(format!(
            "partial correlation with {k} covariates needs more than {} observations",
            k + 3
        )));
    }

    let mut columns = vec![rank(x), rank(y)];
    columns.extend(covariates.iter().map(|(_, z)| rank(z)));
    let dim = columns.len();
    let mut corr = DMatrix::<f64>::identity(dim, dim);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let r = pearson(&columns[i], &columns[j]).ok_or_else(|| {
                Error::Degenerate("constant vector in partial correlation".into())
            })?;
            corr[(i, j)] = r;
            corr[(j, i)] = r;
        }
    }

    let zz = corr.view((2, 2), (k, k)).into_owned();
    let eigen = zz.clone().symmetric_eigen();
    if eigen.eigenvalues.iter().any(|&e| e < 1e-10) {
        return Err(Error::Numeric(
            "singular covariate correlation matrix".into(),
        ));
    }
    let zz_inv = zz
        .try_inverse()
        .ok_or_else(|| Error::Numeric("singular covariate correlation matrix".into()))?;
    let az = corr.view((0, 2), (2, k)).into_owned();
    let conditional = corr.view((0, 0), (2, 2)).into_owned() - &az * zz_inv * az.transpose();
    let (cxx, cyy, cxy) = (
        conditional[(0, 0)],
        conditional[(1, 1)],
        conditional[(0, 1)],
    );
    // A variable fully explained by the covariates has no partial association.
    let rho = if cxx <= 1e-12 || cyy <= 1e-12 {
        0.0
    } else {
        (cxy / (cxx * cyy).sqrt()).clamp(-1.0, 1.0)
    };
    let p_value = t_test_p(rho, (n - 2 - k) as f64);
    let names = covariates
        .iter()
        .map(|(name, _)| name.to_string())
        .collect();
    Ok(summarize(rho, n, k, p_value, names))
}
