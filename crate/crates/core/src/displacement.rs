//! Edge displacements, mean edge displacement (MED) and the discrete
//! distributions built from them.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conllu::Sentence;
use crate::error::{Error, Result};

/// Inclusive integer window of displacements kept in a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Support {
    pub min: i64,
    pub max: i64,
}

impl Support {
    pub const fn new(min: i64, max: i64) -> Self {
        Support { min, max }
    }

    pub fn contains(&self, value: i64) -> bool {
        (self.min..=self.max).contains(&value)
    }

    pub fn width(&self) -> usize {
        (self.max - self.min + 1) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.min < self.max {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "support [{}, {}] must satisfy min < max",
                self.min, self.max
            )))
        }
    }
}

impl Default for Support {
    fn default() -> Self {
        Support::new(-30, 30)
    }
}

/// Probability mass over the integers `support_min..=support_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    pub support_min: i64,
    pub support_max: i64,
    pub mass: Vec<f64>,
    /// Raw counts behind `mass`; empty when built directly from masses.
    pub counts: Vec<u64>,
    /// Number of observations inside the support.
    pub total_count: u64,
    /// Observations that fell outside the support and were dropped.
    pub excluded_count: u64,
}

impl DiscreteDistribution {
    /// Distribution from explicit masses. Masses must be finite and
    /// non-negative; normalization is checked by the distance functions.
    pub fn from_mass(support_min: i64, mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::InvalidInput(
                "distribution needs a non-empty support".into(),
            ));
        }
        if let Some(bad) = mass.iter().find(|m| !m.is_finite() || **m < 0.0) {
            return Err(Error::InvalidInput(format!(
                "invalid probability mass {bad}"
            )));
        }
        Ok(DiscreteDistribution {
            support_min,
            support_max: support_min + mass.len() as i64 - 1,
            mass,
            counts: Vec::new(),
            total_count: 0,
            excluded_count: 0,
        })
    }

    /// Normalized distribution from counts.
    pub fn from_counts(support_min: i64, counts: Vec<u64>, excluded_count: u64) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Degenerate(
                "no observations inside the support".into(),
            ));
        }
        if counts.is_empty() {
            return Err(Error::InvalidInput(
                "distribution needs a non-empty support".into(),
            ));
        }
        let mass = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Ok(DiscreteDistribution {
            support_min,
            support_max: support_min + counts.len() as i64 - 1,
            mass,
            counts,
            total_count: total,
            excluded_count,
        })
    }

    pub fn point_mass(at: i64) -> Self {
        DiscreteDistribution::from_counts(at, vec![1], 0).expect("single count")
    }

    pub fn probability(&self, value: i64) -> f64 {
        if value < self.support_min || value > self.support_max {
            0.0
        } else {
            self.mass[(value - self.support_min) as usize]
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Fraction of observations that fell inside the support.
    pub fn coverage(&self) -> f64 {
        let all = self.total_count + self.excluded_count;
        if all == 0 {
            0.0
        } else {
            self.total_count as f64 / all as f64
        }
    }

    /// Masses re-indexed onto `[min, max]`, zero outside the own support.
    pub fn padded(&self, min: i64, max: i64) -> Vec<f64> {
        (min..=max).map(|k| self.probability(k)).collect()
    }

    pub fn mean(&self) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .map(|(i, m)| (self.support_min + i as i64) as f64 * m)
            .sum::<f64>()
            / self.total_mass()
    }

    /// CSV with columns `displacement,probability,count`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(w);
        writer.write_record(["displacement", "probability", "count"])?;
        for (i, m) in self.mass.iter().enumerate() {
            let count = self.counts.get(i).copied().unwrap_or(0);
            writer.write_record([
                (self.support_min + i as i64).to_string(),
                m.to_string(),
                count.to_string(),
            ])?;
        }
        writer.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// MED of one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedValue {
    pub value: f64,
    pub edge_count: usize,
}

/// `id - head` for every non-root token, in token order.
pub fn edge_displacements(sentence: &Sentence) -> Vec<i64> {
    sentence
        .tokens()
        .iter()
        .filter(|t| t.head != 0)
        .map(|t| t.id as i64 - t.head as i64)
        .collect()
}

/// Mean displacement over the `n - 1` non-root edges.
pub fn med(sentence: &Sentence) -> Result<MedValue> {
    let displacements = edge_displacements(sentence);
    if displacements.is_empty() {
        return Err(Error::Degenerate(
            "MED is undefined for a single-token sentence".into(),
        ));
    }
    let sum: i64 = displacements.iter().sum();
    Ok(MedValue {
        value: sum as f64 / displacements.len() as f64,
        edge_count: displacements.len(),
    })
}

#[derive(Debug, Clone)]
struct WindowCounts {
    counts: Vec<u64>,
    excluded: u64,
}

impl WindowCounts {
    fn new(width: usize) -> Self {
        WindowCounts {
            counts: vec![0; width],
            excluded: 0,
        }
    }

    fn merge(mut self, other: WindowCounts) -> WindowCounts {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.excluded += other.excluded;
        self
    }
}

/// Normalized distribution of displacements inside `support`. Edges outside
/// the window are dropped before normalizing and reported via
/// [`DiscreteDistribution::coverage`].
pub fn displacement_distribution(
    sentences: &[Sentence],
    support: Support,
) -> Result<DiscreteDistribution> {
    support.validate()?;
    if sentences.is_empty() {
        return Err(Error::InvalidInput("no sentences".into()));
    }
    let width = support.width();
    let counts = sentences
        .par_iter()
        .fold(
            || WindowCounts::new(width),
            |mut acc, sentence| {
                for d in edge_displacements(sentence) {
                    if support.contains(d) {
                        acc.counts[(d - support.min) as usize] += 1;
                    } else {
                        acc.excluded += 1;
                    }
                }
                acc
            },
        )
        .reduce(|| WindowCounts::new(width), WindowCounts::merge);
    DiscreteDistribution::from_counts(support.min, counts.counts, counts.excluded)
        .map_err(|_| Error::Degenerate("no edge displacement falls inside the support".into()))
}

/// Distribution of sentence lengths over `[1, max observed length]`.
pub fn length_distribution(sentences: &[Sentence]) -> Result<DiscreteDistribution> {
    let max = sentences
        .iter()
        .map(Sentence::len)
        .max()
        .ok_or_else(|| Error::InvalidInput("no sentences".into()))?;
    let mut counts = vec![0u64; max];
    for s in sentences {
        counts[s.len() - 1] += 1;
    }
    DiscreteDistribution::from_counts(1, counts, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> Sentence {
        Sentence::from_heads(&[3, 3, 4, 0, 6, 4, 4]).unwrap()
    }

    #[test]
    fn fig1_displacements() {
        let d = edge_displacements(&fig1());
        assert_eq!(d, vec![-2, -1, -1, -1, 2, 3]);
        // "der" (id 2) and "Fliegen" (id 7).
        assert_eq!(d[1], -1);
        assert_eq!(d[5], 3);
    }

    #[test]
    fn fig1_med_is_zero() {
        let m = med(&fig1()).unwrap();
        assert_eq!(m.value, 0.0);
        assert_eq!(m.edge_count, 6);
    }

    #[test]
    fn root_only_sentence() {
        let s = Sentence::from_heads(&[0]).unwrap();
        assert!(edge_displacements(&s).is_empty());
        assert!(med(&s).is_err());
    }

    #[test]
    fn two_token_med() {
        let s = Sentence::from_heads(&[0, 1]).unwrap();
        assert_eq!(med(&s).unwrap().value, 1.0);
    }

    #[test]
    fn point_mass_for_identical_sentences() {
        let s = Sentence::from_heads(&[0, 1]).unwrap();
        let dist = displacement_distribution(&vec![s; 5], Support::default()).unwrap();
        assert_eq!(dist.probability(1), 1.0);
        assert_eq!(dist.total_count, 5);
        assert_eq!(dist.coverage(), 1.0);
    }

    #[test]
    fn out_of_range_edges_are_excluded() {
        // Token 36 attached to token 1: displacement +35.
        let mut heads = vec![0usize];
        heads.extend(1..35);
        heads.push(1);
        let s = Sentence::from_heads(&heads).unwrap();
        let dist = displacement_distribution(&[s], Support::default()).unwrap();
        assert_eq!(dist.total_count, 34);
        assert_eq!(dist.excluded_count, 1);
        assert_eq!(dist.probability(1), 1.0);
        assert!((dist.coverage() - 34.0 / 35.0).abs() < 1e-15);
    }

    #[test]
    fn zero_in_range_edges_is_an_error() {
        let s = Sentence::from_heads(&[0, 1]).unwrap();
        assert!(displacement_distribution(&[s], Support::new(5, 10)).is_err());
    }

    #[test]
    fn length_distribution_masses() {
        let a = Sentence::from_heads(&[0, 1, 1]).unwrap();
        let b = Sentence::from_heads(&[0, 1, 1, 1, 1, 1, 1]).unwrap();
        let dist = length_distribution(&[a, b]).unwrap();
        assert_eq!((dist.support_min, dist.support_max), (1, 7));
        assert_eq!(dist.probability(3), 0.5);
        assert_eq!(dist.probability(7), 0.5);
        let five = Sentence::from_heads(&[0, 1, 1, 1, 1]).unwrap();
        assert_eq!(
            length_distribution(&vec![five; 3]).unwrap().probability(5),
            1.0
        );
    }

    #[test]
    fn csv_export_has_one_row_per_support_point() {
        let dist = displacement_distribution(&[fig1()], Support::new(-3, 3)).unwrap();
        let mut buf = Vec::new();
        dist.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 8);
        assert!(text.contains("-1,0.5,3"));
    }
}
