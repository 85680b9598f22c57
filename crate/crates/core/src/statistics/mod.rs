//! Correlation, normality, regression and distribution fitting routines
//! used by the analysis pipeline.

mod background;
mod correlation;
mod regression;
mod shapiro;
mod skewnorm;

pub use background::{background_removal, FitFamily, StageFit};
pub use correlation::{
    correlation_power, partial_spearman, pearson, rank, spearman, CorrelationResult,
    EXACT_PERMUTATION_LIMIT,
};
pub use regression::{lmg, ols_regression, Coefficient, RegressionResult, MAX_LMG_PREDICTORS};
pub use shapiro::{shapiro_wilk, NormalityResult};
pub use skewnorm::{chi2_p_value, owens_t, skew_normal_fit, SkewNormal, SkewNormalFit};

/// Arithmetic mean; NaN for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Standard deviation with `ddof` delta degrees of freedom.
pub fn std_dev(values: &[f64], ddof: usize) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    (ss / (values.len() - ddof) as f64).sqrt()
}
