//! Vaserstein-1 (earth mover's) distance between discrete distributions on
//! the integer grid, and the EDV/SLV measures built on it.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::conllu::{Sentence, Split, Treebank};
use crate::displacement::{
    displacement_distribution, length_distribution, DiscreteDistribution, Support,
};
use crate::error::{Error, Result};

const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// How two distributions are compared when computing EDV and SLV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdvConvention {
    /// W1 over the integer support with unit spacing.
    #[default]
    Grid,
    /// W1 between the two multisets of per-bin probability masses, each bin
    /// weighted equally. Values are orders of magnitude smaller than
    /// [`EdvConvention::Grid`]; this is the scale of the EDV figures found in
    /// the published UD tables.
    MassValues,
}

impl EdvConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            EdvConvention::Grid => "grid",
            EdvConvention::MassValues => "mass-values",
        }
    }
}

impl FromStr for EdvConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(EdvConvention::Grid),
            "mass-values" => Ok(EdvConvention::MassValues),
            other => Err(Error::InvalidInput(format!(
                "unknown EDV convention `{other}`"
            ))),
        }
    }
}

fn check_normalized(d: &DiscreteDistribution, which: &str) -> Result<()> {
    let total = d.total_mass();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidInput(format!(
            "{which} distribution is not normalized (total mass {total})"
        )));
    }
    Ok(())
}

/// Both distributions padded with zeros onto the union of their supports.
pub fn align(p: &DiscreteDistribution, q: &DiscreteDistribution) -> (i64, Vec<f64>, Vec<f64>) {
    let min = p.support_min.min(q.support_min);
    let max = p.support_max.max(q.support_max);
    (min, p.padded(min, max), q.padded(min, max))
}

/// W1 by the closed form `sum_k |CDF_p(k) - CDF_q(k)|`.
pub fn vaserstein(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_normalized(p, "first")?;
    check_normalized(q, "second")?;
    let (_, a, b) = align(p, q);
    let mut cdf_a = 0.0;
    let mut cdf_b = 0.0;
    let mut total = 0.0;
    // The final CDF difference is zero up to rounding and spans no interval.
    for (ma, mb) in a.iter().zip(&b).take(a.len() - 1) {
        cdf_a += ma;
        cdf_b += mb;
        total += (cdf_a - cdf_b).abs();
    }
    Ok(total)
}

/// W1 between the sorted per-bin masses of the aligned distributions.
pub fn mass_value_distance(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_normalized(p, "first")?;
    check_normalized(q, "second")?;
    let (_, mut a, mut b) = align(p, q);
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let n = a.len() as f64;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / n)
}

pub fn distance(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    convention: EdvConvention,
) -> Result<f64> {
    match convention {
        EdvConvention::Grid => vaserstein(p, q),
        EdvConvention::MassValues => mass_value_distance(p, q),
    }
}

/// A coupling of two distributions: `(source_index, target_index, mass)`
/// entries over the aligned support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub support_min: i64,
    pub entries: Vec<(usize, usize, f64)>,
    pub cost: f64,
}

impl TransportPlan {
    pub fn row_sums(&self, len: usize) -> Vec<f64> {
        let mut sums = vec![0.0; len];
        for &(i, _, m) in &self.entries {
            sums[i] += m;
        }
        sums
    }

    pub fn column_sums(&self, len: usize) -> Vec<f64> {
        let mut sums = vec![0.0; len];
        for &(_, j, m) in &self.entries {
            sums[j] += m;
        }
        sums
    }
}

/// Optimal transport plan by monotone (north-west corner) matching, which is
/// optimal for the absolute-distance cost on a line.
pub fn transport_oracle(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
) -> Result<TransportPlan> {
    check_normalized(p, "first")?;
    check_normalized(q, "second")?;
    let (support_min, a, b) = align(p, q);
    let mut supply = a.clone();
    let mut demand = b.clone();
    let mut entries = Vec::new();
    let mut cost = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < supply.len() && j < demand.len() {
        if supply[i] <= 0.0 {
            i += 1;
            continue;
        }
        if demand[j] <= 0.0 {
            j += 1;
            continue;
        }
        let moved = supply[i].min(demand[j]);
        entries.push((i, j, moved));
        cost += moved * (i as f64 - j as f64).abs();
        supply[i] -= moved;
        demand[j] -= moved;
        if supply[i] <= demand[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    Ok(TransportPlan {
        support_min,
        entries,
        cost,
    })
}

fn split_pair(treebank: &Treebank) -> Result<(&[Sentence], &[Sentence])> {
    Ok((
        treebank.require(Split::Train)?,
        treebank.require(Split::Test)?,
    ))
}

/// EDV between two sentence samples.
pub fn edv_between(
    train: &[Sentence],
    test: &[Sentence],
    support: Support,
    convention: EdvConvention,
) -> Result<f64> {
    let p = displacement_distribution(train, support)?;
    let q = displacement_distribution(test, support)?;
    distance(&p, &q, convention)
}

/// SLV between two sentence samples.
pub fn slv_between(
    train: &[Sentence],
    test: &[Sentence],
    convention: EdvConvention,
) -> Result<f64> {
    let p = length_distribution(train)?;
    let q = length_distribution(test)?;
    distance(&p, &q, convention)
}

/// Train/test EDV over the default `[-30, 30]` window.
pub fn edv(treebank: &Treebank) -> Result<f64> {
    edv_with(treebank, Support::default(), EdvConvention::Grid)
}

pub fn edv_with(treebank: &Treebank, support: Support, convention: EdvConvention) -> Result<f64> {
    let (train, test) = split_pair(treebank)?;
    edv_between(train, test, support, convention)
}

/// Train/test SLV.
pub fn slv(treebank: &Treebank) -> Result<f64> {
    slv_with(treebank, EdvConvention::Grid)
}

pub fn slv_with(treebank: &Treebank, convention: EdvConvention) -> Result<f64> {
    let (train, test) = split_pair(treebank)?;
    slv_between(train, test, convention)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(min: i64, mass: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::from_mass(min, mass.to_vec()).unwrap()
    }

    #[test]
    fn identical_distributions_are_at_distance_zero() {
        let p = dist(-2, &[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(vaserstein(&p, &p).unwrap(), 0.0);
        assert_eq!(mass_value_distance(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn opposite_point_masses() {
        let p = DiscreteDistribution::point_mass(-1);
        let q = DiscreteDistribution::point_mass(1);
        assert_eq!(vaserstein(&p, &q).unwrap(), 2.0);
        assert_eq!(transport_oracle(&p, &q).unwrap().cost, 2.0);
    }

    #[test]
    fn half_mass_moves_one_step() {
        let p = dist(0, &[0.5, 0.5]);
        let q = DiscreteDistribution::point_mass(1);
        assert_eq!(vaserstein(&p, &q).unwrap(), 0.5);
        assert_eq!(transport_oracle(&p, &q).unwrap().cost, 0.5);
    }

    #[test]
    fn identical_point_masses_have_zero_cost_plan() {
        let p = DiscreteDistribution::point_mass(3);
        let plan = transport_oracle(&p, &p).unwrap();
        assert_eq!(plan.cost, 0.0);
        assert!(plan.entries.iter().all(|&(i, j, _)| i == j));
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let p = dist(0, &[0.5, 0.6]);
        let q = DiscreteDistribution::point_mass(0);
        assert!(vaserstein(&p, &q).is_err());
        assert!(transport_oracle(&q, &p).is_err());
    }

    #[test]
    fn mass_values_ignore_positions() {
        // Same multiset of masses, mirrored: zero under mass-values, not under grid.
        let p = dist(0, &[0.7, 0.2, 0.1]);
        let q = dist(0, &[0.1, 0.2, 0.7]);
        assert_eq!(mass_value_distance(&p, &q).unwrap(), 0.0);
        assert!((vaserstein(&p, &q).unwrap() - 1.2).abs() < 1e-12);
    }

    #[test]
    fn slv_of_shifted_point_masses() {
        let ten = Sentence::from_heads(&[0, 1, 1, 1, 1, 1, 1, 1, 1, 1]).unwrap();
        let twelve = Sentence::from_heads(&[0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1]).unwrap();
        let tb = Treebank::new("t")
            .with_split(Split::Train, vec![ten; 3])
            .with_split(Split::Test, vec![twelve; 2]);
        assert!((slv(&tb).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn edv_of_reused_split_is_zero() {
        let s = vec![
            Sentence::from_heads(&[3, 3, 4, 0, 6, 4, 4]).unwrap(),
            Sentence::from_heads(&[0, 1, 2]).unwrap(),
        ];
        let tb = Treebank::new("t")
            .with_split(Split::Train, s.clone())
            .with_split(Split::Test, s);
        assert_eq!(edv(&tb).unwrap(), 0.0);
        assert_eq!(slv(&tb).unwrap(), 0.0);
    }

    #[test]
    fn missing_split_is_an_error() {
        let tb = Treebank::new("t")
            .with_split(Split::Train, vec![Sentence::from_heads(&[0, 1]).unwrap()]);
        assert!(matches!(edv(&tb), Err(Error::MissingSplit { .. })));
    }
}
