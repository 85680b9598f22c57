//! MED-guided 60|20|20 split sampling, split deltas and the sample-size
//! variance experiment.
//!
//! A split is grown in rounds. Each round picks a sentence length at random,
//! adds four training sentences close to the running training MED, then one
//! test sentence whose MED is either close to (min mode) or far from (max
//! mode) the running training MED. Dev is carved from train afterwards.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conllu::{write_file, Sentence, Split, Treebank};
use crate::displacement::{med, Support};
use crate::divergence::{edv_between, slv_between, EdvConvention};
use crate::error::{Error, Result};
use crate::statistics::{
    self, partial_spearman, skew_normal_fit, spearman, CorrelationResult, SkewNormalFit,
};

/// Identifier of the generator behind every seeded draw in this module.
pub const RNG_ALGORITHM: &str = "chacha8-rand_chacha-0.9";
pub const MANIFEST_SCHEMA_VERSION: &str = "1.0.0";
pub const MIN_POOL_SIZE: usize = 10;
/// Sentences with this many tokens or fewer never enter a pool.
pub const MAX_EXCLUDED_LENGTH: usize = 2;

const TRAIN_PER_ROUND: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    MinEdv,
    MaxEdv,
}

impl SplitMode {
    pub const BOTH: [SplitMode; 2] = [SplitMode::MinEdv, SplitMode::MaxEdv];

    /// Short tag used in file names: `edvmin` / `edvmax`.
    pub fn file_tag(self) -> &'static str {
        match self {
            SplitMode::MinEdv => "edvmin",
            SplitMode::MaxEdv => "edvmax",
        }
    }
}

impl fmt::Display for SplitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitMode::MinEdv => "min",
            SplitMode::MaxEdv => "max",
        })
    }
}

impl FromStr for SplitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" | "min_edv" | "edvmin" => Ok(SplitMode::MinEdv),
            "max" | "max_edv" | "edvmax" => Ok(SplitMode::MaxEdv),
            other => Err(Error::InvalidInput(format!("unknown split mode `{other}`"))),
        }
    }
}

/// All sentences of all splits (train, dev, test order) longer than two
/// tokens.
pub fn pool_treebank(treebank: &Treebank) -> Result<Vec<Sentence>> {
    if treebank.splits.is_empty() {
        return Err(Error::InvalidInput(format!(
            "treebank {} has no splits",
            treebank.name
        )));
    }
    let pool: Vec<Sentence> = Split::ALL
        .iter()
        .filter_map(|&s| treebank.split(s))
        .flatten()
        .filter(|s| s.len() > MAX_EXCLUDED_LENGTH)
        .cloned()
        .collect();
    if pool.is_empty() {
        return Err(Error::InvalidInput(format!(
            "treebank {} has no sentence longer than {MAX_EXCLUDED_LENGTH} tokens",
            treebank.name
        )));
    }
    Ok(pool)
}

/// Per-length lists of `(MED, pool index)` sorted by MED then index.
/// Entries are removed as they are consumed.
#[derive(Debug, Clone)]
pub struct MedIndex {
    by_length: BTreeMap<usize, Vec<(f64, usize)>>,
    remaining: usize,
}

impl MedIndex {
    /// `entries` are `(length, MED)` per pool index.
    pub fn new(entries: &[(usize, f64)]) -> Self {
        let mut by_length: BTreeMap<usize, Vec<(f64, usize)>> = BTreeMap::new();
        for (idx, &(len, m)) in entries.iter().enumerate() {
            by_length.entry(len).or_default().push((m, idx));
        }
        for list in by_length.values_mut() {
            list.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        MedIndex {
            by_length,
            remaining: entries.len(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }

    pub fn is_empty(&self) -> bool {
        self.remaining == 0
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.by_length.keys().copied().collect()
    }

    pub fn entries(&self, length: usize) -> &[(f64, usize)] {
        self.by_length
            .get(&length)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Lists sorted by MED are also sorted by `(MED, index)`, so the first
    /// entry of a run of equal MEDs has the smallest pool index.
    fn nearest_in(list: &[(f64, usize)], target: f64) -> Option<(f64, usize)> {
        if list.is_empty() {
            return None;
        }
        let above = list.partition_point(|e| e.0 < target);
        let mut best: Option<(f64, usize)> = None;
        let mut consider = |pos: usize| {
            let (m, idx) = list[pos];
            let key = ((m - target).abs(), idx);
            if best.is_none_or(|b| key.0 < b.0 || (key.0 == b.0 && key.1 < b.1)) {
                best = Some(key);
            }
        };
        if above < list.len() {
            consider(above);
        }
        if above > 0 {
            let below_med = list[above - 1].0;
            consider(list.partition_point(|e| e.0 < below_med));
        }
        best
    }

    fn farthest_in(list: &[(f64, usize)], target: f64) -> Option<(f64, usize)> {
        let first = *list.first()?;
        let last_med = list.last()?.0;
        let last = list[list.partition_point(|e| e.0 < last_med)];
        let a = ((first.0 - target).abs(), first.1);
        let b = ((last.0 - target).abs(), last.1);
        Some(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        })
    }

    /// Lengths ordered by distance to `length`, shorter first on ties.
    fn lengths_by_distance(&self, length: usize) -> Vec<usize> {
        let mut lengths = self.lengths();
        lengths.sort_by_key(|&l| (l.abs_diff(length), l));
        lengths
    }

    /// Closest entry by `(|length difference|, |MED difference|, index)`.
    pub fn nearest(&self, length: usize, target: f64) -> Option<usize> {
        let mut best: Option<(usize, f64, usize)> = None;
        for l in self.lengths_by_distance(length) {
            let dl = l.abs_diff(length);
            if best.is_some_and(|b| dl > b.0) {
                break;
            }
            if let Some((dm, idx)) = Self::nearest_in(self.entries(l), target) {
                let key = (dl, dm, idx);
                if best.is_none_or(|b| key.1 < b.1 || (key.1 == b.1 && key.2 < b.2)) {
                    best = Some(key);
                }
            }
        }
        best.map(|b| b.2)
    }

    /// Entry of `length` whose MED is farthest from `target`; when that
    /// length is exhausted the nearest non-empty length is used instead.
    pub fn farthest(&self, length: usize, target: f64) -> Option<usize> {
        let l = *self.lengths_by_distance(length).first()?;
        Self::farthest_in(self.entries(l), target).map(|(_, idx)| idx)
    }

    /// Length of the `n`-th remaining entry in (length, MED) order.
    pub fn length_of_nth(&self, mut n: usize) -> usize {
        for (&len, list) in &self.by_length {
            if n < list.len() {
                return len;
            }
            n -= list.len();
        }
        panic!("entry {n} is beyond the remaining entries");
    }

    /// Entry of `length` at `position` in MED order.
    pub fn at(&self, length: usize, position: usize) -> Option<usize> {
        self.entries(length).get(position).map(|e| e.1)
    }

    /// Removes pool index `idx` of sentence length `length`.
    pub fn remove(&mut self, length: usize, idx: usize) -> bool {
        let Some(list) = self.by_length.get_mut(&length) else {
            return false;
        };
        let Some(pos) = list.iter().position(|e| e.1 == idx) else {
            return false;
        };
        list.remove(pos);
        if list.is_empty() {
            self.by_length.remove(&length);
        }
        self.remaining -= 1;
        true
    }

    /// Every remaining pool index, by length then MED.
    pub fn drain(&mut self) -> Vec<usize> {
        let out: Vec<usize> = self.by_length.values().flatten().map(|e| e.1).collect();
        self.by_length.clear();
        self.remaining = 0;
        out
    }
}

/// MED that each round's test pick is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestReference {
    /// Mean MED of all training sentences so far.
    #[default]
    RunningMean,
    /// MED of the sentence that anchored the current round.
    RoundAnchor,
}

/// How each round's sentence length is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthDraw {
    /// Uniform over the lengths that still have sentences.
    #[default]
    UniformLength,
    /// The length of a uniformly drawn remaining sentence, so lengths are
    /// drawn in proportion to how many sentences they hold.
    UniformSentence,
}

/// Sampler variant and how the achieved divergences are measured.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SplitOptions {
    pub support: Support,
    pub convention: EdvConvention,
    pub test_reference: TestReference,
    pub length_draw: LengthDraw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub mode: SplitMode,
    pub seed: u64,
    pub rng_algorithm: String,
    pub train: Vec<Sentence>,
    pub dev: Vec<Sentence>,
    pub test: Vec<Sentence>,
    /// Pool indices of each part, in the order sentences were assigned.
    pub train_indices: Vec<usize>,
    pub dev_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub achieved_edv: f64,
    pub achieved_slv: f64,
    pub edv_convention: EdvConvention,
    pub sentence_counts: (usize, usize, usize),
}

struct Sampler<'a> {
    lengths: &'a [usize],
    meds: &'a [f64],
    index: MedIndex,
    train: Vec<usize>,
    test: Vec<usize>,
    train_med_sum: f64,
}

impl Sampler<'_> {
    fn take_train(&mut self, idx: usize) {
        self.index.remove(self.lengths[idx], idx);
        self.train.push(idx);
        self.train_med_sum += self.meds[idx];
    }

    fn take_test(&mut self, idx: usize) {
        self.index.remove(self.lengths[idx], idx);
        self.test.push(idx);
    }

    fn train_mean(&self) -> f64 {
        self.train_med_sum / self.train.len() as f64
    }
}

/// Target number of sentences for each of dev and test.
fn fifth(n: usize) -> usize {
    (n as f64 * 0.2).round() as usize
}

pub fn generate_split(pool: &[Sentence], mode: SplitMode, seed: u64) -> Result<SplitResult> {
    generate_split_with(pool, mode, seed, SplitOptions::default())
}

pub fn generate_split_with(
    pool: &[Sentence],
    mode: SplitMode,
    seed: u64,
    options: SplitOptions,
) -> Result<SplitResult> {
    let n = pool.len();
    if n < MIN_POOL_SIZE {
        return Err(Error::InvalidInput(format!(
            "split pool has {n} sentences, at least {MIN_POOL_SIZE} are needed"
        )));
    }
    if let Some(i) = pool.iter().position(|s| s.len() <= MAX_EXCLUDED_LENGTH) {
        return Err(Error::InvalidInput(format!(
            "pool sentence {i} has {} tokens; pools exclude sentences of {MAX_EXCLUDED_LENGTH} tokens or fewer",
            pool[i].len()
        )));
    }
    let lengths: Vec<usize> = pool.iter().map(Sentence::len).collect();
    let meds: Vec<f64> = pool
        .iter()
        .map(|s| med(s).map(|m| m.value))
        .collect::<Result<_>>()?;
    let entries: Vec<(usize, f64)> = lengths.iter().copied().zip(meds.iter().copied()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Sampler {
        lengths: &lengths,
        meds: &meds,
        index: MedIndex::new(&entries),
        train: Vec::with_capacity(n),
        test: Vec::with_capacity(fifth(n)),
        train_med_sum: 0.0,
    };
    let test_target = fifth(n);

    while s.test.len() < test_target && !s.index.is_empty() {
        let length = match options.length_draw {
            LengthDraw::UniformLength => {
                let available = s.index.lengths();
                available[rng.random_range(0..available.len())]
            }
            LengthDraw::UniformSentence => s
                .index
                .length_of_nth(rng.random_range(0..s.index.remaining())),
        };
        // Always keep one sentence back for this round's test pick.
        let train_quota = TRAIN_PER_ROUND.min(s.index.remaining() - 1);
        let mut round_anchor = None;
        if train_quota > 0 {
            let anchor = if s.train.is_empty() {
                let pos = rng.random_range(0..s.index.entries(length).len());
                s.index.at(length, pos).expect("position within list")
            } else {
                s.index
                    .nearest(length, s.train_mean())
                    .expect("length is non-empty")
            };
            s.take_train(anchor);
            round_anchor = Some(meds[anchor]);
            for _ in 1..train_quota {
                let next = s
                    .index
                    .nearest(length, meds[anchor])
                    .expect("sentences remain");
                s.take_train(next);
            }
        }
        let reference = match (options.test_reference, round_anchor) {
            (TestReference::RoundAnchor, Some(m)) => m,
            _ if !s.train.is_empty() => s.train_mean(),
            _ => meds[s.index.at(length, 0).unwrap_or(0)],
        };
        let pick = match mode {
            SplitMode::MinEdv => s.index.nearest(length, reference),
            SplitMode::MaxEdv => s.index.farthest(length, reference),
        }
        .expect("sentences remain");
        s.take_test(pick);
    }
    let leftovers = s.index.drain();
    s.train.extend(leftovers);

    // Every fourth training sentence moves to dev, then the tail if short.
    let dev_target = fifth(n);
    let mut dev_indices = Vec::with_capacity(dev_target);
    let mut keep = Vec::with_capacity(s.train.len());
    for (i, &idx) in s.train.iter().enumerate() {
        if i % 4 == 3 && dev_indices.len() < dev_target {
            dev_indices.push(idx);
        } else {
            keep.push(idx);
        }
    }
    while dev_indices.len() < dev_target {
        match keep.pop() {
            Some(idx) => dev_indices.push(idx),
            None => break,
        }
    }
    let train_indices = keep;
    let test_indices = s.test;

    let gather = |ids: &[usize]| ids.iter().map(|&i| pool[i].clone()).collect::<Vec<_>>();
    let train = gather(&train_indices);
    let dev = gather(&dev_indices);
    let test = gather(&test_indices);
    let achieved_edv = edv_between(&train, &test, options.support, options.convention)?;
    let achieved_slv = slv_between(&train, &test, options.convention)?;
    Ok(SplitResult {
        mode,
        seed,
        rng_algorithm: RNG_ALGORITHM.to_string(),
        sentence_counts: (train.len(), dev.len(), test.len()),
        train,
        dev,
        test,
        train_indices,
        dev_indices,
        test_indices,
        achieved_edv,
        achieved_slv,
        edv_convention: options.convention,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
}

/// JSON sidecar describing one generated split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub schema_version: String,
    pub treebank: String,
    pub mode: SplitMode,
    pub seed: u64,
    pub rng_algorithm: String,
    pub pool_size: usize,
    pub counts: SplitCounts,
    pub achieved_edv: f64,
    pub achieved_slv: f64,
    pub edv_convention: EdvConvention,
    pub files: Vec<String>,
}

/// Writes `<name>-edv{min,max}-{train,dev,test}.conllu` and
/// `<name>-edv{min,max}-manifest.json` into `dir`; returns the manifest path.
pub fn write_split(result: &SplitResult, treebank: &str, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = format!("{treebank}-{}", result.mode.file_tag());
    let mut files = Vec::new();
    for (part, sentences) in [
        ("train", &result.train),
        ("dev", &result.dev),
        ("test", &result.test),
    ] {
        let name = format!("{stem}-{part}.conllu");
        write_file(sentences, dir.join(&name))?;
        files.push(name);
    }
    let (train, dev, test) = result.sentence_counts;
    let manifest = SplitManifest {
        schema_version: MANIFEST_SCHEMA_VERSION.to_string(),
        treebank: treebank.to_string(),
        mode: result.mode,
        seed: result.seed,
        rng_algorithm: result.rng_algorithm.clone(),
        pool_size: train + dev + test,
        counts: SplitCounts { train, dev, test },
        achieved_edv: result.achieved_edv,
        achieved_slv: result.achieved_slv,
        edv_convention: result.edv_convention,
        files,
    };
    let path = dir.join(format!("{stem}-manifest.json"));
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Measurements of one treebank under one split mode. LAS comes from an
/// externally trained parser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub treebank: String,
    pub las: f64,
    pub edv: f64,
    pub slv: f64,
    pub train_tokens: f64,
    pub mean_test_length: f64,
}

/// Max-mode value minus min-mode value, plus the mean of both splits for the
/// quantities used as levels rather than differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub treebank: String,
    pub delta_las: f64,
    pub delta_edv: f64,
    pub delta_slv: f64,
    pub delta_train_tokens: f64,
    pub delta_mean_test_length: f64,
    pub mean_train_tokens: f64,
    pub mean_test_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaCorrelation {
    pub variable: String,
    pub target: String,
    pub covariate: Option<String>,
    pub result: CorrelationResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub rows: Vec<DeltaRow>,
    pub mean_delta_las: f64,
    pub sd_delta_las: f64,
    pub mean_abs_delta_train_tokens: f64,
    pub mean_abs_delta_mean_test_length: f64,
    pub correlations: Vec<DeltaCorrelation>,
    /// Skew-normal fit of the ΔLAS distribution; `None` with fewer than 20
    /// treebanks.
    pub delta_las_fit: Option<SkewNormalFit>,
}

/// Bins used for the ΔLAS histogram fit.
pub const DELTA_LAS_BINS: usize = 10;

/// Pairs min and max records by treebank and runs the correlation battery
/// against ΔLAS and ΔEDV.
pub fn delta_statistics(
    results_min: &[SplitRecord],
    results_max: &[SplitRecord],
) -> Result<DeltaReport> {
    let max_by_name: BTreeMap<&str, &SplitRecord> = results_max
        .iter()
        .map(|r| (r.treebank.as_str(), r))
        .collect();
    let min_names: HashSet<&str> = results_min.iter().map(|r| r.treebank.as_str()).collect();
    let mut unpaired: Vec<&str> = results_min
        .iter()
        .map(|r| r.treebank.as_str())
        .filter(|n| !max_by_name.contains_key(n))
        .chain(
            max_by_name
                .keys()
                .copied()
                .filter(|n| !min_names.contains(n)),
        )
        .collect();
    if !unpaired.is_empty() {
        unpaired.sort_unstable();
        return Err(Error::InvalidInput(format!(
            "unpaired treebank rows: {}",
            unpaired.join(", ")
        )));
    }
    let mut rows: Vec<DeltaRow> = results_min
        .iter()
        .map(|lo| {
            let hi = max_by_name[lo.treebank.as_str()];
            DeltaRow {
                treebank: lo.treebank.clone(),
                delta_las: hi.las - lo.las,
                delta_edv: hi.edv - lo.edv,
                delta_slv: hi.slv - lo.slv,
                delta_train_tokens: hi.train_tokens - lo.train_tokens,
                delta_mean_test_length: hi.mean_test_length - lo.mean_test_length,
                mean_train_tokens: 0.5 * (hi.train_tokens + lo.train_tokens),
                mean_test_length: 0.5 * (hi.mean_test_length + lo.mean_test_length),
            }
        })
        .collect();
    rows.sort_by(|a, b| a.treebank.cmp(&b.treebank));

    let column = |f: fn(&DeltaRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let las = column(|r| r.delta_las);
    let edv = column(|r| r.delta_edv);
    let slv = column(|r| r.delta_slv);
    let d_tokens = column(|r| r.delta_train_tokens);
    let d_len = column(|r| r.delta_mean_test_length);
    let tokens = column(|r| r.mean_train_tokens);
    let len = column(|r| r.mean_test_length);

    let mut correlations = Vec::new();
    // Constant columns (e.g. identical min/max results) have no correlation.
    let mut add = |variable: &str,
                   x: &[f64],
                   target: &str,
                   y: &[f64],
                   cov: Option<(&str, &[f64])>|
     -> Result<()> {
        let result = match cov {
            None => spearman(x, y),
            Some(c) => partial_spearman(x, y, &[c]),
        };
        match result {
            Ok(result) => {
                correlations.push(DeltaCorrelation {
                    variable: variable.to_string(),
                    target: target.to_string(),
                    covariate: cov.map(|c| c.0.to_string()),
                    result,
                });
                Ok(())
            }
            Err(Error::Degenerate(_)) | Err(Error::Numeric(_)) => Ok(()),
            Err(e) => Err(e),
        }
    };
    add("train_tokens", &tokens, "delta_las", &las, None)?;
    add("mean_test_length", &len, "delta_las", &las, None)?;
    add("delta_train_tokens", &d_tokens, "delta_las", &las, None)?;
    add("delta_mean_test_length", &d_len, "delta_las", &las, None)?;
    add("delta_slv", &slv, "delta_las", &las, None)?;
    add("delta_edv", &edv, "delta_las", &las, None)?;
    add("mean_test_length", &len, "delta_edv", &edv, None)?;
    add("delta_slv", &slv, "delta_edv", &edv, None)?;
    add(
        "delta_edv",
        &edv,
        "delta_las",
        &las,
        Some(("mean_test_length", &len)),
    )?;
    add(
        "delta_edv",
        &edv,
        "delta_las",
        &las,
        Some(("delta_slv", &slv)),
    )?;

    let delta_las_fit = match skew_normal_fit(&las, DELTA_LAS_BINS) {
        Ok(fit) => Some(fit),
        Err(Error::InvalidInput(_)) | Err(Error::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };
    let sd = if las.len() > 1 {
        statistics::std_dev(&las, 1)
    } else {
        0.0
    };
    let abs_mean = |v: &[f64]| statistics::mean(&v.iter().map(|x| x.abs()).collect::<Vec<_>>());
    Ok(DeltaReport {
        mean_delta_las: statistics::mean(&las),
        sd_delta_las: sd,
        mean_abs_delta_train_tokens: abs_mean(&d_tokens),
        mean_abs_delta_mean_test_length: abs_mean(&d_len),
        rows,
        correlations,
        delta_las_fit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub size: usize,
    pub mean_edv: f64,
    /// Population standard deviation (ddof = 0) over the repeats.
    pub std_edv: f64,
    pub edvs: Vec<f64>,
}

pub const DEFAULT_VARIANCE_SIZES: [usize; 4] = [2000, 4000, 6000, 8000];
pub const DEFAULT_VARIANCE_REPEATS: usize = 20;

const MAX_REDRAWS: usize = 1000;

/// For each size, draws `repeats` distinct training subsets without
/// replacement and measures their EDV against the full test split.
pub fn variance_experiment(
    treebank: &Treebank,
    sizes: &[usize],
    repeats: usize,
    seed: u64,
    options: SplitOptions,
) -> Result<Vec<VarianceRow>> {
    let train = treebank.require(Split::Train)?;
    let test = treebank.require(Split::Test)?;
    if repeats == 0 {
        return Err(Error::InvalidInput(
            "variance experiment needs at least one repeat".into(),
        ));
    }
    if let Some(&too_big) = sizes.iter().find(|&&s| s > train.len() || s == 0) {
        return Err(Error::InvalidInput(format!(
            "subset size {too_big} is not available from {} training sentences",
            train.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut subsets = Vec::with_capacity(repeats);
        let mut redraws = 0;
        while subsets.len() < repeats {
            let mut ids = sample(&mut rng, train.len(), size).into_vec();
            ids.sort_unstable();
            // The full set admits only one subset; repeats are then identical.
            if size == train.len() || seen.insert(ids.clone()) {
                subsets.push(ids);
            } else {
                redraws += 1;
                if redraws > MAX_REDRAWS {
                    return Err(Error::InvalidInput(format!(
                        "could not draw {repeats} distinct subsets of size {size}"
                    )));
                }
            }
        }
        let edvs: Vec<f64> = subsets
            .par_iter()
            .map(|ids| {
                let subset: Vec<Sentence> = ids.iter().map(|&i| train[i].clone()).collect();
                edv_between(&subset, test, options.support, options.convention)
            })
            .collect::<Result<_>>()?;
        rows.push(VarianceRow {
            size,
            mean_edv: statistics::mean(&edvs),
            std_edv: statistics::std_dev(&edvs, 0),
            edvs,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(heads: &[usize]) -> Sentence {
        Sentence::from_heads(heads).unwrap()
    }

    #[test]
    fn pool_drops_short_sentences() {
        let mut train: Vec<Sentence> = (0..9).map(|_| s(&[0, 1, 1])).collect();
        train.push(s(&[0, 1]));
        let tb = Treebank::new("t").with_split(Split::Train, train);
        assert_eq!(pool_treebank(&tb).unwrap().len(), 9);
        let short = Treebank::new("t").with_split(Split::Train, vec![s(&[0, 1]), s(&[0])]);
        assert!(pool_treebank(&short).is_err());
    }

    #[test]
    fn index_nearest_prefers_length_then_med_then_position() {
        let index = MedIndex::new(&[(5, 0.5), (5, -0.5), (6, 0.0), (5, 0.5), (4, 0.0)]);
        // MEDs 0.5 and -0.5 tie on distance; the earlier pool index wins.
        assert_eq!(index.nearest(5, 0.0), Some(0));
        assert_eq!(index.nearest(5, -0.4), Some(1));
        assert_eq!(index.nearest(5, 0.6), Some(0));
        assert_eq!(index.nearest(7, 0.0), Some(2));
        // Lengths 4 and 6 are equally far from 5 and both hold MED 0.
        let index = MedIndex::new(&[(6, 0.0), (4, 0.0)]);
        assert_eq!(index.nearest(5, 0.0), Some(0));
    }

    #[test]
    fn index_farthest_falls_back_to_nearest_length() {
        let mut index = MedIndex::new(&[(5, 0.5), (5, -2.0), (8, 3.0), (3, 1.0)]);
        assert_eq!(index.farthest(5, 0.0), Some(1));
        index.remove(5, 0);
        index.remove(5, 1);
        assert_eq!(index.farthest(5, 0.0), Some(3));
        assert_eq!(index.remaining(), 2);
    }

    #[test]
    fn identical_pool_has_zero_edv() {
        let pool = vec![s(&[0, 1, 2, 2]); 40];
        for mode in SplitMode::BOTH {
            let r = generate_split(&pool, mode, 7).unwrap();
            assert_eq!(r.achieved_edv, 0.0);
            assert_eq!(r.sentence_counts, (24, 8, 8));
        }
    }

    #[test]
    fn small_pool_is_rejected() {
        assert!(generate_split(&vec![s(&[0, 1, 1]); 9], SplitMode::MinEdv, 1).is_err());
    }

    #[test]
    fn identical_modes_give_zero_deltas() {
        let rec = |name: &str, x: f64| SplitRecord {
            treebank: name.into(),
            las: 70.0 + x,
            edv: 0.001 * x,
            slv: 0.1,
            train_tokens: 1000.0 * x,
            mean_test_length: 10.0 + x,
        };
        let recs: Vec<SplitRecord> = (0..5).map(|i| rec(&format!("tb{i}"), i as f64)).collect();
        let report = delta_statistics(&recs, &recs).unwrap();
        assert!(report
            .rows
            .iter()
            .all(|r| r.delta_las == 0.0 && r.delta_edv == 0.0));
        assert_eq!(report.mean_delta_las, 0.0);
        assert!(report.delta_las_fit.is_none());
        let err = delta_statistics(&recs, &recs[..4]).unwrap_err();
        assert!(err.to_string().contains("tb4"));
    }

    #[test]
    fn full_size_subsets_have_no_spread() {
        let train: Vec<Sentence> = (0..30)
            .map(|i| s(&[0, 1, if i % 2 == 0 { 1 } else { 2 }]))
            .collect();
        let tb = Treebank::new("t")
            .with_split(Split::Train, train)
            .with_split(Split::Test, vec![s(&[2, 0, 2])]);
        let rows = variance_experiment(&tb, &[30], 5, 3, SplitOptions::default()).unwrap();
        assert_eq!(rows[0].std_edv, 0.0);
        assert!(variance_experiment(&tb, &[31], 5, 3, SplitOptions::default()).is_err());
    }
}
