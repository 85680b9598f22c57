//! Independent reference implementations used by the oracle tests and the
//! acceptance suite.

use edvkit::displacement::DiscreteDistribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_distribution(rng: &mut ChaCha8Rng, max_width: usize) -> DiscreteDistribution {
    let width = rng.random_range(1..=max_width);
    let min = rng.random_range(-30..=30 - width as i64 + 1);
    let mut mass: Vec<f64> = (0..width)
        .map(|_| {
            if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random::<f64>()
            }
        })
        .collect();
    if mass.iter().all(|&m| m == 0.0) {
        mass[0] = 1.0;
    }
    let total: f64 = mass.iter().sum();
    mass.iter_mut().for_each(|m| *m /= total);
    DiscreteDistribution::from_mass(min, mass).unwrap()
}

/// `integral_0^1 |F^-1(u) - G^-1(u)| du`, walking both quantile functions.
pub fn quantile_w1(p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
    let atoms = |d: &DiscreteDistribution| -> Vec<(f64, f64)> {
        d.mass
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(i, &m)| ((d.support_min + i as i64) as f64, m))
            .collect()
    };
    let (a, b) = (atoms(p), atoms(q));
    let (mut i, mut j) = (0, 0);
    let (mut left_a, mut left_b) = (a[0].1, b[0].1);
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        let step = left_a.min(left_b);
        total += step * (a[i].0 - b[j].0).abs();
        left_a -= step;
        left_b -= step;
        if left_a <= 1e-15 {
            i += 1;
            if i < a.len() {
                left_a = a[i].1;
            }
        }
        if left_b <= 1e-15 {
            j += 1;
            if j < b.len() {
                left_b = b[j].1;
            }
        }
    }
    total
}

/// Dual LP: max over 1-Lipschitz f of sum f (p - q). Vertices of the
/// feasible set have unit increments, so enumerating sign vectors solves it.
pub fn dual_vertex_w1(p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
    let min = p.support_min.min(q.support_min);
    let max = p.support_max.max(q.support_max);
    let diff: Vec<f64> = (min..=max)
        .map(|k| p.probability(k) - q.probability(k))
        .collect();
    let steps = diff.len() - 1;
    let mut best = f64::NEG_INFINITY;
    for signs in 0u32..(1 << steps) {
        let mut f = 0.0;
        let mut value = 0.0;
        for (k, d) in diff.iter().enumerate() {
            if k > 0 {
                f += if signs >> (k - 1) & 1 == 1 { 1.0 } else { -1.0 };
            }
            value += f * d;
        }
        best = best.max(value);
    }
    best
}

pub fn normal_sample(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    // Box-Muller keeps the oracle free of the library's own numerics.
    (0..n)
        .map(|_| {
            let (u, v): (f64, f64) = (rng.random(), rng.random());
            (-2.0 * (1.0 - u).ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
        })
        .collect()
}

/// Ranks by counting: rank = #less + (#equal + 1) / 2.
pub fn brute_rank(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let less = x.iter().filter(|&&w| w < v).count() as f64;
            let equal = x.iter().filter(|&&w| w == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn brute_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Residuals of `y` after least squares on `columns` plus an intercept,
/// by Gram-Schmidt.
pub fn residuals(y: &[f64], columns: &[Vec<f64>]) -> Vec<f64> {
    let n = y.len();
    let mut basis: Vec<Vec<f64>> = vec![vec![1.0 / (n as f64).sqrt(); n]];
    for c in columns {
        let mut v = c.clone();
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(b).for_each(|(a, b)| *a -= d * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        basis.push(v.into_iter().map(|a| a / norm).collect());
    }
    let mut r = y.to_vec();
    for b in &basis {
        let d: f64 = r.iter().zip(b).map(|(a, b)| a * b).sum();
        r.iter_mut().zip(b).for_each(|(a, b)| *a -= d * b);
    }
    r
}

pub fn r_squared(y: &[f64], columns: &[Vec<f64>]) -> f64 {
    let n = y.len() as f64;
    let m = y.iter().sum::<f64>() / n;
    let tss: f64 = y.iter().map(|v| (v - m).powi(2)).sum();
    let rss: f64 = residuals(y, columns).iter().map(|v| v * v).sum();
    1.0 - rss / tss
}
