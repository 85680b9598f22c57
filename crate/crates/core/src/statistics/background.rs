//! Sequential background removal: fit the target against a covariate and
//! divide by the prediction, one stage at a time.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitFamily {
    /// `y = slope * ln(x) + intercept`; the covariate must be positive.
    LogLinear,
    /// `y = slope * x + intercept`.
    Linear,
}

impl FromStr for FitFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log_linear" | "log-linear" => Ok(FitFamily::LogLinear),
            "linear" => Ok(FitFamily::Linear),
            other => Err(Error::InvalidInput(format!("unknown fit family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFit {
    pub family: FitFamily,
    pub slope: f64,
    pub intercept: f64,
}

impl StageFit {
    pub fn predict(&self, x: f64) -> f64 {
        match self.family {
            FitFamily::LogLinear => self.slope * x.ln() + self.intercept,
            FitFamily::Linear => self.slope * x + self.intercept,
        }
    }
}

/// Least-squares line; slope 0 when `x` is constant.
pub(crate) fn simple_linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    (slope, my - slope * mx)
}

/// Apply each `(covariate, family)` stage in order and return the final
/// normalized target together with the fitted parameters of every stage.
pub fn background_removal(
    target: &[f64],
    stages: &[(&[f64], FitFamily)],
) -> Result<(Vec<f64>, Vec<StageFit>)> {
    if target.len() < 2 {
        return Err(Error::InvalidInput(
            "background removal needs at least two samples".into(),
        ));
    }
    let mut current = target.to_vec();
    let mut fits = Vec::with_capacity(stages.len());
    for (stage, (covariate, family)) in stages.iter().enumerate() {
        if covariate.len() != current.len() {
            return Err(Error::InvalidInput(format!(
                "stage {stage}: covariate has {} values, target has {}",
                covariate.len(),
                current.len()
            )));
        }
        let x: Vec<f64> = match family {
            FitFamily::LogLinear => {
                if let Some(i) = covariate.iter().position(|&v| v <= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "stage {stage}: log-linear covariate is not positive at sample {i}"
                    )));
                }
                covariate.iter().map(|v| v.ln()).collect()
            }
            FitFamily::Linear => covariate.to_vec(),
        };
        let (slope, intercept) = simple_linear_fit(&x, &current);
        let fit = StageFit {
            family: *family,
            slope,
            intercept,
        };
        for (i, (value, &xi)) in current.iter_mut().zip(covariate.iter()).enumerate() {
            let predicted = fit.predict(xi);
            if predicted.is_nan() || predicted <= 0.0 {
                return Err(Error::Numeric(format!(
                    "stage {stage}: fit predicts {predicted} at sample {i}"
                )));
            }
            *value /= predicted;
        }
        fits.push(fit);
    }
    Ok((current, fits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_log_fit_gives_ones() {
        let x: Vec<f64> = (1..=20).map(|i| f64::from(i) * 1000.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v.ln() + 2.0).collect();
        let (norm, fits) = background_removal(&y, &[(&x, FitFamily::LogLinear)]).unwrap();
        assert!(norm.iter().all(|v| (v - 1.0).abs() < 1e-9));
        assert!((fits[0].slope - 0.5).abs() < 1e-9);
    }

    #[test]
    fn zero_slope_divides_by_mean() {
        let y = [2.0, 4.0, 6.0, 4.0];
        let x = [1.0, 1.0, 1.0, 1.0];
        let (norm, _) = background_removal(&y, &[(&x, FitFamily::Linear)]).unwrap();
        assert_eq!(norm, vec![0.5, 1.0, 1.5, 1.0]);
    }

    #[test]
    fn non_positive_prediction_names_the_sample() {
        let y = [1.0, 0.5, -3.0];
        let x = [1.0, 2.0, 3.0];
        let err = background_removal(&y, &[(&x, FitFamily::Linear)]).unwrap_err();
        assert!(err.to_string().contains("sample 1"), "{err}");
    }
}
