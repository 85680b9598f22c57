//! Skew-normal fit of a sample histogram with a chi-squared goodness of fit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Shapes beyond this magnitude are indistinguishable from a half-normal
/// and only slow the optimizer down.
const MAX_SHAPE: f64 = 50.0;
const MAX_ITERATIONS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewNormalFit {
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
    pub fitted_mean: f64,
    pub fitted_sd: f64,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
    pub sample_mean: f64,
    pub sample_sd: f64,
    pub bins_used: usize,
}

/// Owen's T function by quadrature over `x = tan(theta)`, which maps the
/// integrand onto a bounded, smooth interval.
pub fn owens_t(h: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    if a < 0.0 {
        return -owens_t(h, -a);
    }
    let upper = a.atan();
    let steps = 400;
    let step = upper / steps as f64;
    let f = |theta: f64| {
        let c = theta.cos();
        (-0.5 * h * h / (c * c)).exp()
    };
    let mut sum = f(0.0) + f(upper);
    for i in 1..steps {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += weight * f(i as f64 * step);
    }
    sum * step / 3.0 / (2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewNormal {
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
}

impl SkewNormal {
    fn z(&self, x: f64) -> f64 {
        (x - self.location) / self.scale
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let n = Normal::standard();
        let z = self.z(x);
        2.0 / self.scale * n.pdf(z) * n.cdf(self.shape * z)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = self.z(x);
        (Normal::standard().cdf(z) - 2.0 * owens_t(z, self.shape)).clamp(0.0, 1.0)
    }

    fn delta(&self) -> f64 {
        self.shape / (1.0 + self.shape * self.shape).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.location + self.scale * self.delta() * (2.0 / PI).sqrt()
    }

    pub fn sd(&self) -> f64 {
        let d = self.delta();
        self.scale * (1.0 - 2.0 * d * d / PI).sqrt()
    }
}

struct Minimum {
    x: Vec<f64>,
    value: f64,
}

/// Nelder-Mead simplex minimization with standard coefficients.
fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, start: &[f64], step: &[f64]) -> Result<Minimum> {
    let dim = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += step[i];
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    for _ in 0..MAX_ITERATIONS {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[dim] - values[0];
        let diameter = simplex[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= 1e-14 * (1.0 + values[0].abs()) && diameter <= 1e-9 {
            return Ok(Minimum {
                x: simplex[0].clone(),
                value: values[0],
            });
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|p| p[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let reflected = along(-1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
        } else if fr < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
        } else {
            let (candidate, fc) = if fr < values[dim] {
                let c = along(-0.5);
                let fc = f(&c);
                (c, fc)
            } else {
                let c = along(0.5);
                let fc = f(&c);
                (c, fc)
            };
            if fc < values[dim].min(fr) {
                simplex[dim] = candidate;
                values[dim] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=dim {
                    simplex[i] = best
                        .iter()
                        .zip(&simplex[i])
                        .map(|(b, p)| b + 0.5 * (p - b))
                        .collect();
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Err(Error::Numeric(format!(
        "skew-normal fit did not converge after {MAX_ITERATIONS} iterations \
         (best objective {:.6e} at {:?}, simplex spread {:.3e})",
        values[best],
        simplex[best],
        values.iter().cloned().fold(f64::MIN, f64::max) - values[best]
    )))
}

fn mean_sd(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Least-squares fit of the skew-normal density to the normalized
/// `n_bins`-bin histogram of `samples`, followed by a chi-squared test on
/// the bins whose expected count is at least 1.
pub fn skew_normal_fit(samples: &[f64], n_bins: usize) -> Result<SkewNormalFit> {
    if samples.len() < 20 {
        return Err(Error::InvalidInput(format!(
            "skew-normal fit needs at least 20 samples, got {}",
            samples.len()
        )));
    }
    if n_bins < 4 {
        return Err(Error::InvalidInput(
            "skew-normal fit needs at least 4 bins".into(),
        ));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in sample".into()));
    }
    let (sample_mean, sample_sd) = mean_sd(samples);
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if sample_sd.is_nan() || sample_sd <= 1e-12 * (1.0 + sample_mean.abs()) || hi - lo <= 0.0 {
        return Err(Error::Degenerate("sample has (almost) no spread".into()));
    }

    let n = samples.len() as f64;
    let width = (hi - lo) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &v in samples {
        let idx = (((v - lo) / width) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    let centers: Vec<f64> = (0..n_bins).map(|i| lo + (i as f64 + 0.5) * width).collect();
    let density: Vec<f64> = counts.iter().map(|&c| c as f64 / (n * width)).collect();

    let objective = |p: &[f64]| -> f64 {
        if p[2].abs() > MAX_SHAPE {
            return f64::MAX;
        }
        let model = SkewNormal {
            location: p[0],
            scale: p[1].exp(),
            shape: p[2],
        };
        centers
            .iter()
            .zip(&density)
            .map(|(&c, &d)| (d - model.pdf(c)).powi(2))
            .sum()
    };

    let mut best: Option<Minimum> = None;
    let mut last_error = None;
    for shape0 in [-3.0, 0.0, 3.0] {
        let probe = SkewNormal {
            location: 0.0,
            scale: 1.0,
            shape: shape0,
        };
        let scale0 = sample_sd / probe.sd();
        let loc0 = sample_mean - scale0 * probe.mean();
        let start = [loc0, scale0.ln(), shape0];
        let step = [0.25 * sample_sd, 0.25, 0.5];
        match nelder_mead(objective, &start, &step) {
            Ok(m) if best.as_ref().is_none_or(|b| m.value < b.value) => best = Some(m),
            Ok(_) => {}
            Err(e) => last_error = Some(e),
        }
    }
    let best = match (best, last_error) {
        (Some(b), _) => b,
        (None, Some(e)) => return Err(e),
        (None, None) => unreachable!("at least one start is attempted"),
    };

    let model = SkewNormal {
        location: best.x[0],
        scale: best.x[1].exp(),
        shape: best.x[2],
    };
    let mut chi2 = 0.0;
    let mut bins_used = 0;
    for (i, &observed) in counts.iter().enumerate() {
        let a = lo + i as f64 * width;
        let expected = n * (model.cdf(a + width) - model.cdf(a));
        if expected >= 1.0 {
            chi2 += (observed as f64 - expected).powi(2) / expected;
            bins_used += 1;
        }
    }
    if bins_used <= 3 {
        return Err(Error::Numeric(format!(
            "only {bins_used} bins have an expected count of at least 1; chi-squared needs 4 or more"
        )));
    }
    let dof = bins_used - 3;
    let p_value = chi2_p_value(chi2, dof);

    Ok(SkewNormalFit {
        location: model.location,
        scale: model.scale,
        shape: model.shape,
        fitted_mean: model.mean(),
        fitted_sd: model.sd(),
        chi2,
        dof,
        p_value,
        sample_mean,
        sample_sd,
        bins_used,
    })
}

/// Upper-tail chi-squared probability.
pub fn chi2_p_value(chi2: f64, dof: usize) -> f64 {
    1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(chi2)
}
