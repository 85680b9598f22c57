//! Tree-level structural measures (edge crossings) and sentence-length
//! binned EDV / LAS series.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::conllu::{las_counts, LabelGranularity, Sentence, Split, Treebank};
use crate::displacement::Support;
use crate::divergence::{edv_between, EdvConvention};
use crate::error::{Error, Result};

/// What counts as a potentially crossing pair of edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairConvention {
    /// Pairs of edges sharing no vertex.
    #[default]
    VertexDisjoint,
    /// Every unordered pair of edges.
    AllPairs,
}

/// Non-root edges as `(left, right)` position pairs.
fn edges(sentence: &Sentence) -> Vec<(usize, usize)> {
    sentence
        .tokens()
        .iter()
        .filter(|t| t.head != 0)
        .map(|t| (t.id.min(t.head), t.id.max(t.head)))
        .collect()
}

fn cross((a, b): (usize, usize), (c, d): (usize, usize)) -> bool {
    (a < c && c < b && b < d) || (c < a && a < d && d < b)
}

/// Crossing count `C` and number of potentially crossing pairs `|Q|`.
pub fn crossing_counts(sentence: &Sentence, convention: PairConvention) -> (u64, u64) {
    let edges = edges(sentence);
    let mut crossings = 0u64;
    for (i, &e) in edges.iter().enumerate() {
        for &f in &edges[i + 1..] {
            if cross(e, f) {
                crossings += 1;
            }
        }
    }
    let m = edges.len() as u64;
    let all_pairs = m * m.saturating_sub(1) / 2;
    let q = match convention {
        PairConvention::AllPairs => all_pairs,
        PairConvention::VertexDisjoint => {
            let mut degree = vec![0u64; sentence.len() + 1];
            for &(a, b) in &edges {
                degree[a] += 1;
                degree[b] += 1;
            }
            let adjacent: u64 = degree.iter().map(|&d| d * d.saturating_sub(1) / 2).sum();
            all_pairs - adjacent
        }
    };
    (crossings, q)
}

/// `C / |Q|`, or 0 when no pair of edges could cross.
pub fn crossings_normalized(sentence: &Sentence, convention: PairConvention) -> f64 {
    let (c, q) = crossing_counts(sentence, convention);
    if q == 0 {
        0.0
    } else {
        c as f64 / q as f64
    }
}

/// Pair-weighted crossing rate of a sample: `sum C / sum |Q|`.
pub fn treebank_crossings(sentences: &[Sentence], convention: PairConvention) -> f64 {
    let (c, q) = sentences
        .iter()
        .map(|s| crossing_counts(s, convention))
        .fold((0u64, 0u64), |(c, q), (ci, qi)| (c + ci, q + qi));
    if q == 0 {
        0.0
    } else {
        c as f64 / q as f64
    }
}

/// Inclusive range of exact sentence lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthBins {
    pub min: usize,
    pub max: usize,
}

impl Default for LengthBins {
    fn default() -> Self {
        LengthBins { min: 3, max: 30 }
    }
}

impl LengthBins {
    pub fn lengths(&self) -> std::ops::RangeInclusive<usize> {
        self.min..=self.max
    }
}

/// One value per exact sentence length. Lengths missing from `values` had no
/// data on at least one side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSeries {
    pub metric: String,
    pub bin_lengths: Vec<usize>,
    pub values: BTreeMap<usize, f64>,
    pub counts: BTreeMap<usize, usize>,
}

impl BinSeries {
    fn new(metric: &str, bins: LengthBins) -> Self {
        BinSeries {
            metric: metric.to_string(),
            bin_lengths: bins.lengths().collect(),
            values: BTreeMap::new(),
            counts: BTreeMap::new(),
        }
    }

    pub fn missing(&self) -> Vec<usize> {
        self.bin_lengths
            .iter()
            .copied()
            .filter(|l| !self.values.contains_key(l))
            .collect()
    }

    /// Tidy CSV rows `treebank,length,metric,value,count`; writes a header
    /// when `header` is set.
    pub fn write_csv<W: Write>(
        &self,
        treebank: &str,
        w: &mut csv::Writer<W>,
        header: bool,
    ) -> Result<()> {
        if header {
            w.write_record(["treebank", "length", "metric", "value", "count"])?;
        }
        for (len, value) in &self.values {
            w.write_record([
                treebank.to_string(),
                len.to_string(),
                self.metric.clone(),
                value.to_string(),
                self.counts.get(len).copied().unwrap_or(0).to_string(),
            ])?;
        }
        Ok(())
    }
}

fn by_length(sentences: &[Sentence], bins: LengthBins) -> BTreeMap<usize, Vec<Sentence>> {
    let mut map: BTreeMap<usize, Vec<Sentence>> = BTreeMap::new();
    for s in sentences {
        if bins.lengths().contains(&s.len()) {
            map.entry(s.len()).or_default().push(s.clone());
        }
    }
    map
}

/// EDV between the length-`l` training and test sub-samples for every `l`
/// in `bins`. `counts` holds the number of test sentences per bin.
pub fn binned_edv(
    treebank: &Treebank,
    bins: LengthBins,
    support: Support,
    convention: EdvConvention,
) -> Result<BinSeries> {
    let train = by_length(treebank.require(Split::Train)?, bins);
    let test = by_length(treebank.require(Split::Test)?, bins);
    let mut series = BinSeries::new("edv", bins);
    for (len, test_sents) in &test {
        let Some(train_sents) = train.get(len) else {
            continue;
        };
        match edv_between(train_sents, test_sents, support, convention) {
            Ok(v) => {
                series.values.insert(*len, v);
                series.counts.insert(*len, test_sents.len());
            }
            Err(Error::Degenerate(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(series)
}

/// LAS restricted to test sentences of each exact length.
pub fn binned_las(
    gold: &[Sentence],
    predicted: &[Sentence],
    bins: LengthBins,
    granularity: LabelGranularity,
) -> Result<BinSeries> {
    // Whole-file alignment is checked first so errors name the real index.
    las_counts(gold, predicted, granularity)?;
    let mut series = BinSeries::new("las", bins);
    let mut grouped: BTreeMap<usize, (Vec<Sentence>, Vec<Sentence>)> = BTreeMap::new();
    for (g, p) in gold.iter().zip(predicted) {
        if bins.lengths().contains(&g.len()) {
            let entry = grouped.entry(g.len()).or_default();
            entry.0.push(g.clone());
            entry.1.push(p.clone());
        }
    }
    for (len, (g, p)) in grouped {
        let (correct, total) = las_counts(&g, &p, granularity)?;
        series.values.insert(len, correct as f64 / total as f64);
        series.counts.insert(len, g.len());
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(heads: &[usize]) -> Sentence {
        Sentence::from_heads(heads).unwrap()
    }

    #[test]
    fn projective_chain_has_no_crossings() {
        let chain = s(&[0, 1, 2, 3, 4, 5]);
        assert_eq!(
            crossings_normalized(&chain, PairConvention::VertexDisjoint),
            0.0
        );
    }

    #[test]
    fn single_crossing_fixture() {
        let t = s(&[3, 4, 0, 3]);
        assert_eq!(crossing_counts(&t, PairConvention::VertexDisjoint), (1, 1));
        assert_eq!(crossing_counts(&t, PairConvention::AllPairs), (1, 3));
        assert_eq!(
            crossings_normalized(&t, PairConvention::VertexDisjoint),
            1.0
        );
    }

    #[test]
    fn fig1_is_projective() {
        let t = s(&[3, 3, 4, 0, 6, 4, 4]);
        let (c, q) = crossing_counts(&t, PairConvention::VertexDisjoint);
        assert_eq!(c, 0);
        // 6 edges -> 15 pairs; degrees 1,1,3,3,1,2,1 -> 3 + 3 + 1 adjacent pairs.
        assert_eq!(q, 8);
    }

    #[test]
    fn tiny_trees_have_no_candidate_pairs() {
        assert_eq!(
            crossing_counts(&s(&[0, 1]), PairConvention::VertexDisjoint),
            (0, 0)
        );
        assert_eq!(
            crossings_normalized(&s(&[0, 1]), PairConvention::VertexDisjoint),
            0.0
        );
    }

    #[test]
    fn treebank_rate_is_pair_weighted() {
        let crossing = s(&[3, 4, 0, 3]);
        let fig1 = s(&[3, 3, 4, 0, 6, 4, 4]);
        let rate = treebank_crossings(&[crossing.clone(), fig1], PairConvention::VertexDisjoint);
        assert!((rate - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(
            treebank_crossings(
                std::slice::from_ref(&crossing),
                PairConvention::VertexDisjoint
            ),
            crossings_normalized(&crossing, PairConvention::VertexDisjoint)
        );
    }

    #[test]
    fn binned_edv_identical_sides_is_zero() {
        let sents = vec![s(&[0, 1, 1]), s(&[2, 0, 2, 3]), s(&[0, 1, 2, 3, 4])];
        let tb = Treebank::new("t")
            .with_split(Split::Train, sents.clone())
            .with_split(Split::Test, sents);
        let series = binned_edv(
            &tb,
            LengthBins::default(),
            Support::default(),
            EdvConvention::Grid,
        )
        .unwrap();
        assert_eq!(series.values.len(), 3);
        assert!(series.values.values().all(|&v| v == 0.0));
        assert_eq!(series.missing().len(), 28 - 3);
    }

    #[test]
    fn binned_las_perfect_and_missing() {
        let gold = vec![s(&[0, 1, 1]), s(&[0, 1, 1, 1]), s(&[0, 1])];
        let series =
            binned_las(&gold, &gold, LengthBins::default(), LabelGranularity::Full).unwrap();
        assert_eq!(series.values, BTreeMap::from([(3, 1.0), (4, 1.0)]));
        assert!(series.missing().contains(&5));
    }
}
