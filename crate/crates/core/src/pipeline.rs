//! Orchestration behind the `edvkit` commands: configuration, per-treebank
//! measurement, the correlation/regression analysis, split generation, the
//! variance experiment and LAS evaluation, plus report emission.
//!
//! CSV reports print floats in scientific notation with four significant
//! digits; JSON reports keep full precision and carry a schema version.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conllu::{
    discover_treebank_sources, las_counts, parse_file, LabelGranularity, Sentence, Split,
    Strictness, Treebank, TreebankSource,
};
use crate::displacement::{displacement_distribution, Support};
use crate::divergence::{distance, slv_between, EdvConvention};
use crate::error::{Error, Result};
use crate::morphology::{score_sentences, CaseHandling};
use crate::splitter::{
    generate_split_with, pool_treebank, variance_experiment, write_split, SplitMode, SplitOptions,
    SplitResult, VarianceRow,
};
use crate::statistics::{
    background_removal, ols_regression, partial_spearman, shapiro_wilk, spearman,
    CorrelationResult, FitFamily, NormalityResult, RegressionResult, StageFit,
};
use crate::treebank_stats::{
    binned_edv, binned_las, treebank_crossings, BinSeries, LengthBins, PairConvention,
};

/// Environment variable consulted when no UD root is given explicitly.
pub const UD_ROOT_ENV: &str = "EDVKIT_UD_ROOT";
pub const REPORT_SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidInput(format!(
                "unknown output format `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub ud_root: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub support: Support,
    pub bins: LengthBins,
    pub seed: u64,
    pub format: OutputFormat,
    /// CSV with `treebank` and `las` columns.
    pub las_table: Option<PathBuf>,
    /// Previously written measurement report (CSV or JSON) to analyze
    /// instead of measuring `ud_root` again.
    pub measurements: Option<PathBuf>,
    pub label_granularity: LabelGranularity,
    /// Background-removal family per covariate column; unlisted covariates
    /// use [`default_fit_family`].
    pub fit_families: BTreeMap<String, FitFamily>,
    pub edv_convention: EdvConvention,
    pub pair_convention: PairConvention,
    /// One treebank name per line; `#` starts a comment.
    pub filter: Option<PathBuf>,
    pub strictness: Strictness,
    pub case: CaseHandling,
    pub min_train_sentences: usize,
    /// Worker threads; `None` uses all cores.
    pub jobs: Option<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            ud_root: None,
            output_dir: PathBuf::from("edvkit-out"),
            support: Support::default(),
            bins: LengthBins::default(),
            seed: 0,
            format: OutputFormat::Csv,
            las_table: None,
            measurements: None,
            label_granularity: LabelGranularity::default(),
            fit_families: BTreeMap::new(),
            edv_convention: EdvConvention::default(),
            pair_convention: PairConvention::default(),
            filter: None,
            strictness: Strictness::default(),
            case: CaseHandling::default(),
            min_train_sentences: 0,
            jobs: None,
        }
    }
}

/// Token counts grow roughly logarithmically with their effect; everything
/// else is fitted linearly.
pub fn default_fit_family(covariate: &str) -> FitFamily {
    if covariate.ends_with("tokens") {
        FitFamily::LogLinear
    } else {
        FitFamily::Linear
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        self.support.validate()?;
        if self.bins.min == 0 || self.bins.min > self.bins.max {
            return Err(Error::InvalidInput(format!(
                "length bins [{}, {}] must satisfy 1 <= min <= max",
                self.bins.min, self.bins.max
            )));
        }
        let reach = self.support.max.max(-self.support.min).max(0) as usize + 1;
        if self.bins.max > reach {
            return Err(Error::InvalidInput(format!(
                "length bins up to {} exceed the displacement support [{}, {}]",
                self.bins.max, self.support.min, self.support.max
            )));
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidInput("--jobs must be at least 1".into()));
        }
        Ok(())
    }

    /// Explicit root, else the environment variable.
    pub fn resolved_ud_root(&self) -> Result<PathBuf> {
        self.ud_root
            .clone()
            .or_else(|| std::env::var_os(UD_ROOT_ENV).map(PathBuf::from))
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "no UD root given (use --ud-root or set {UD_ROOT_ENV})"
                ))
            })
    }

    pub fn fit_family(&self, covariate: &str) -> FitFamily {
        self.fit_families
            .get(covariate)
            .copied()
            .unwrap_or_else(|| default_fit_family(covariate))
    }

    fn prepare_output_dir(&self) -> Result<()> {
        let dir = &self.output_dir;
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let probe = dir.join(".edvkit-write-test");
        fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
        fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
    }

    fn split_options(&self) -> SplitOptions {
        SplitOptions {
            support: self.support,
            convention: self.edv_convention,
            ..Default::default()
        }
    }

    fn run<T: Send>(&self, work: impl FnOnce() -> T + Send) -> Result<T> {
        match self.jobs {
            None => Ok(work()),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map(|pool| pool.install(work))
                .map_err(|e| Error::InvalidInput(format!("cannot start {n} worker threads: {e}"))),
        }
    }
}

/// Name used to join treebanks across tables: `UD_Ancient_Greek-PROIEL`,
/// `Ancient Greek-PROIEL` and `ancient greek-proiel` all agree.
pub fn join_key(name: &str) -> String {
    name.trim()
        .trim_start_matches("UD_")
        .replace('_', " ")
        .to_lowercase()
}

/// Treebank names from a filter file.
pub fn read_filter(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(join_key)
        .collect())
}

/// Four significant digits in scientific notation.
pub fn sci(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.3e}")
    } else {
        x.to_string()
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(Error::from)
}

// ---------------------------------------------------------------------------
// measure

/// One treebank's measurements. Morphology, crossings and TTR describe the
/// training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    pub treebank: String,
    pub edv: f64,
    pub slv: f64,
    pub train_tokens: u64,
    pub test_tokens: u64,
    pub train_sentences: u64,
    pub test_sentences: u64,
    pub mean_train_length: f64,
    pub mean_test_length: f64,
    pub coverage: f64,
    pub crossings: f64,
    pub ttr: f64,
    pub mc: f64,
    pub h_word_norm: f64,
    pub f_l_norm: f64,
    pub f_il_norm: f64,
    pub hpe_norm: f64,
    pub complex: bool,
}

pub const MEASURE_COLUMNS: [&str; 18] = [
    "treebank",
    "edv",
    "slv",
    "train_tokens",
    "test_tokens",
    "train_sentences",
    "test_sentences",
    "mean_train_length",
    "mean_test_length",
    "coverage",
    "crossings",
    "ttr",
    "mc",
    "h_word_norm",
    "f_l_norm",
    "f_il_norm",
    "hpe_norm",
    "complex",
];

impl MeasureRow {
    fn csv_record(&self) -> Vec<String> {
        vec![
            self.treebank.clone(),
            sci(self.edv),
            sci(self.slv),
            self.train_tokens.to_string(),
            self.test_tokens.to_string(),
            self.train_sentences.to_string(),
            self.test_sentences.to_string(),
            sci(self.mean_train_length),
            sci(self.mean_test_length),
            sci(self.coverage),
            sci(self.crossings),
            sci(self.ttr),
            sci(self.mc),
            sci(self.h_word_norm),
            sci(self.f_l_norm),
            sci(self.f_il_norm),
            sci(self.hpe_norm),
            self.complex.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub schema_version: String,
    pub edv_convention: EdvConvention,
    pub support: Support,
    pub rows: Vec<MeasureRow>,
    /// Per-length EDV series keyed by treebank.
    pub binned_edv: BTreeMap<String, BinSeries>,
    /// Treebanks that were found but not measured, with the reason.
    pub skipped: BTreeMap<String, String>,
}

fn token_count(sentences: &[Sentence]) -> u64 {
    sentences.iter().map(|s| s.len() as u64).sum()
}

/// Measurements of a single treebank; `complex` is left `false` because it
/// depends on the whole set.
pub fn measure_treebank(treebank: &Treebank, config: &AnalysisConfig) -> Result<MeasureRow> {
    let train = treebank.require(Split::Train)?;
    let test = treebank.require(Split::Test)?;
    let p = displacement_distribution(train, config.support)?;
    let q = displacement_distribution(test, config.support)?;
    let edv = distance(&p, &q, config.edv_convention)?;
    let slv = slv_between(train, test, config.edv_convention)?;
    let inside = p.total_count + q.total_count;
    let coverage = inside as f64 / (inside + p.excluded_count + q.excluded_count) as f64;
    let morph = score_sentences(train, config.case)?;
    let train_tokens = token_count(train);
    let test_tokens = token_count(test);
    Ok(MeasureRow {
        treebank: treebank.name.clone(),
        edv,
        slv,
        train_tokens,
        test_tokens,
        train_sentences: train.len() as u64,
        test_sentences: test.len() as u64,
        mean_train_length: train_tokens as f64 / train.len() as f64,
        mean_test_length: test_tokens as f64 / test.len() as f64,
        coverage,
        crossings: treebank_crossings(train, config.pair_convention),
        ttr: morph.ttr,
        mc: morph.mc,
        h_word_norm: morph.h_word_norm,
        f_l_norm: morph.f_l_norm,
        f_il_norm: morph.f_il_norm,
        hpe_norm: morph.hpe_norm,
        complex: false,
    })
}

/// Marks rows whose MC is strictly above the mean MC of `rows`.
pub fn mark_complex(rows: &mut [MeasureRow]) {
    if rows.is_empty() {
        return;
    }
    let mean = rows.iter().map(|r| r.mc).sum::<f64>() / rows.len() as f64;
    for r in rows {
        r.complex = r.mc > mean;
    }
}

fn selected_sources(config: &AnalysisConfig) -> Result<Vec<TreebankSource>> {
    let root = config.resolved_ud_root()?;
    let mut sources = discover_treebank_sources(&root)?;
    if let Some(filter) = &config.filter {
        let keep = read_filter(filter)?;
        sources.retain(|s| keep.contains(&join_key(&s.name)));
        let found: BTreeSet<String> = sources.iter().map(|s| join_key(&s.name)).collect();
        for missing in keep.difference(&found) {
            warn!(
                "filter entry `{missing}` matches no treebank under {}",
                root.display()
            );
        }
    }
    if sources.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no treebanks found under {}",
            root.display()
        )));
    }
    Ok(sources)
}

/// Measures treebanks already in memory. Treebanks that cannot be measured
/// (missing split, too small, degenerate) are reported in `skipped`.
pub fn measure_treebanks(treebanks: &[Treebank], config: &AnalysisConfig) -> Result<MeasureReport> {
    config.validate()?;
    let outcomes: Vec<(String, Result<(MeasureRow, BinSeries)>)> = config.run(|| {
        treebanks
            .par_iter()
            .map(|tb| {
                let outcome = (|| {
                    let train = tb.require(Split::Train)?;
                    if train.len() < config.min_train_sentences {
                        return Err(Error::InvalidInput(format!(
                            "{} training sentences, fewer than the required {}",
                            train.len(),
                            config.min_train_sentences
                        )));
                    }
                    let row = measure_treebank(tb, config)?;
                    let series =
                        binned_edv(tb, config.bins, config.support, config.edv_convention)?;
                    Ok((row, series))
                })();
                (tb.name.clone(), outcome)
            })
            .collect()
    })?;
    let mut rows = Vec::new();
    let mut binned = BTreeMap::new();
    let mut skipped = BTreeMap::new();
    for (name, outcome) in outcomes {
        match outcome {
            Ok((row, series)) => {
                binned.insert(name, series);
                rows.push(row);
            }
            Err(e @ (Error::Io { .. } | Error::Numeric(_))) => return Err(e),
            Err(e) => {
                warn!("skipping {name}: {e}");
                skipped.insert(name, e.to_string());
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("no treebank could be measured".into()));
    }
    rows.sort_by(|a, b| a.treebank.cmp(&b.treebank));
    mark_complex(&mut rows);
    Ok(MeasureReport {
        schema_version: REPORT_SCHEMA_VERSION.to_string(),
        edv_convention: config.edv_convention,
        support: config.support,
        rows,
        binned_edv: binned,
        skipped,
    })
}

/// Discovers, loads and measures every (filtered) treebank under the UD root.
pub fn measure(config: &AnalysisConfig) -> Result<MeasureReport> {
    config.validate()?;
    let sources = selected_sources(config)?;
    info!("loading {} treebanks", sources.len());
    let loaded: Vec<Treebank> = config.run(|| {
        sources
            .par_iter()
            .map(|s| s.load(config.strictness))
            .collect::<Result<Vec<_>>>()
    })??;
    measure_treebanks(&loaded, config)
}

/// Writes `measurements.{csv,json}` and `binned_edv.csv` (CSV mode).
pub fn write_measure_report(
    report: &MeasureReport,
    config: &AnalysisConfig,
) -> Result<Vec<PathBuf>> {
    config.prepare_output_dir()?;
    let dir = &config.output_dir;
    match config.format {
        OutputFormat::Json => {
            let path = dir.join("measurements.json");
            write_json(&path, report)?;
            Ok(vec![path])
        }
        OutputFormat::Csv => {
            let path = dir.join("measurements.csv");
            let mut w = csv_writer(&path)?;
            w.write_record(MEASURE_COLUMNS)?;
            for row in &report.rows {
                w.write_record(row.csv_record())?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;

            let binned_path = dir.join("binned_edv.csv");
            let mut w = csv_writer(&binned_path)?;
            w.write_record(["treebank", "length", "metric", "value", "count"])?;
            for (name, series) in &report.binned_edv {
                for (len, value) in &series.values {
                    w.write_record([
                        name.clone(),
                        len.to_string(),
                        series.metric.clone(),
                        sci(*value),
                        series.counts.get(len).copied().unwrap_or(0).to_string(),
                    ])?;
                }
            }
            w.flush().map_err(|e| Error::io(&binned_path, e))?;
            Ok(vec![path, binned_path])
        }
    }
}

/// Reads a measurement report written by [`write_measure_report`]. For CSV
/// input a sibling `binned_edv.csv` is picked up when present.
pub fn read_measure_report(path: impl AsRef<Path>) -> Result<MeasureReport> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e == "json") {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        return Ok(serde_json::from_str(&text)?);
    }
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows: Vec<MeasureRow> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()?;
    rows.sort_by(|a, b| a.treebank.cmp(&b.treebank));
    let mut binned_edv: BTreeMap<String, BinSeries> = BTreeMap::new();
    let binned_path = path.with_file_name("binned_edv.csv");
    if binned_path.exists() {
        #[derive(Deserialize)]
        struct BinRow {
            treebank: String,
            length: usize,
            value: f64,
            count: usize,
        }
        let mut reader = csv::Reader::from_path(&binned_path)?;
        for row in reader.deserialize::<BinRow>() {
            let row = row?;
            let series = binned_edv.entry(row.treebank).or_insert_with(|| BinSeries {
                metric: "edv".into(),
                bin_lengths: Vec::new(),
                values: BTreeMap::new(),
                counts: BTreeMap::new(),
            });
            series.bin_lengths.push(row.length);
            series.values.insert(row.length, row.value);
            series.counts.insert(row.length, row.count);
        }
    }
    Ok(MeasureReport {
        schema_version: REPORT_SCHEMA_VERSION.to_string(),
        edv_convention: EdvConvention::default(),
        support: Support::default(),
        rows,
        binned_edv,
        skipped: BTreeMap::new(),
    })
}

// ---------------------------------------------------------------------------
// analyze

/// `treebank -> LAS` from a CSV with `treebank` and `las` columns (header
/// names are case-insensitive; other columns are ignored).
pub fn read_las_table(path: impl AsRef<Path>) -> Result<BTreeMap<String, f64>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                Error::InvalidInput(format!("{}: missing `{name}` column", path.display()))
            })
    };
    let (name_col, las_col) = (column("treebank")?, column("las")?);
    let mut table = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let name = record.get(name_col).unwrap_or("").trim().to_string();
        let raw = record.get(las_col).unwrap_or("").trim();
        let las: f64 = raw.parse().map_err(|_| Error::Parse {
            line: i + 2,
            message: format!("{}: LAS `{raw}` is not a number", path.display()),
        })?;
        table.insert(name, las);
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityRow {
    pub variable: String,
    pub result: NormalityResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    /// `full`, `complex` or `not`.
    pub subset: String,
    pub variable: String,
    pub target: String,
    pub result: CorrelationResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionRow {
    pub predictors: Vec<String>,
    pub result: RegressionResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundAnalysis {
    pub name: String,
    pub target: String,
    pub stages: Vec<(String, StageFit)>,
    pub probe: String,
    /// `(treebank, probe value, normalized target)`.
    pub series: Vec<(String, f64, f64)>,
    /// `None` when the normalized target is constant.
    pub correlation: Option<CorrelationResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedPartialRow {
    pub length: usize,
    pub n: usize,
    pub rho: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: String,
    pub n: usize,
    pub treebanks: Vec<String>,
    /// Treebanks present in only one of the measurement and LAS tables.
    pub unmatched_measurements: Vec<String>,
    pub unmatched_las: Vec<String>,
    pub normality: Vec<NormalityRow>,
    pub correlations: Vec<CorrelationRow>,
    pub partial_correlations: Vec<CorrelationRow>,
    pub regressions: Vec<RegressionRow>,
    pub background: Vec<BackgroundAnalysis>,
    pub binned_partial: Vec<BinnedPartialRow>,
}

/// Joined measurement + LAS table, one column per variable.
#[derive(Debug, Clone)]
pub struct AnalysisTable {
    pub treebanks: Vec<String>,
    pub columns: BTreeMap<String, Vec<f64>>,
    pub complex: Vec<bool>,
}

impl AnalysisTable {
    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.columns
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidInput(format!("unknown variable `{name}`")))
    }

    fn subset(&self, keep: impl Fn(usize) -> bool) -> AnalysisTable {
        let idx: Vec<usize> = (0..self.treebanks.len()).filter(|&i| keep(i)).collect();
        AnalysisTable {
            treebanks: idx.iter().map(|&i| self.treebanks[i].clone()).collect(),
            columns: self
                .columns
                .iter()
                .map(|(k, v)| (k.clone(), idx.iter().map(|&i| v[i]).collect()))
                .collect(),
            complex: idx.iter().map(|&i| self.complex[i]).collect(),
        }
    }
}

/// Inner join on [`join_key`]; returns the table and the names left
/// unmatched on each side.
pub fn join_tables(
    rows: &[MeasureRow],
    las: &BTreeMap<String, f64>,
) -> (AnalysisTable, Vec<String>, Vec<String>) {
    let las_by_key: BTreeMap<String, (&String, f64)> =
        las.iter().map(|(k, v)| (join_key(k), (k, *v))).collect();
    let mut matched_keys = BTreeSet::new();
    let mut unmatched_measurements = Vec::new();
    let mut joined: Vec<(&MeasureRow, f64)> = Vec::new();
    for row in rows {
        let key = join_key(&row.treebank);
        match las_by_key.get(&key) {
            Some(&(_, value)) => {
                matched_keys.insert(key);
                joined.push((row, value));
            }
            None => unmatched_measurements.push(row.treebank.clone()),
        }
    }
    let unmatched_las = las_by_key
        .iter()
        .filter(|(k, _)| !matched_keys.contains(*k))
        .map(|(_, (name, _))| (*name).clone())
        .collect();
    joined.sort_by(|a, b| a.0.treebank.cmp(&b.0.treebank));

    let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut push = |name: &str, v: f64| columns.entry(name.to_string()).or_default().push(v);
    for (r, las) in &joined {
        push("las", *las);
        push("edv", r.edv);
        push("slv", r.slv);
        push("train_tokens", r.train_tokens as f64);
        push("log_train_tokens", (r.train_tokens as f64).ln());
        push("test_tokens", r.test_tokens as f64);
        push("train_sentences", r.train_sentences as f64);
        push("test_sentences", r.test_sentences as f64);
        push("mean_train_length", r.mean_train_length);
        push("mean_test_length", r.mean_test_length);
        push("crossings", r.crossings);
        push("ttr", r.ttr);
        push("mc", r.mc);
    }
    let treebanks: Vec<String> = joined.iter().map(|(r, _)| r.treebank.clone()).collect();
    // Complexity is relative to the analysed set, not the measured one.
    let mc: Vec<f64> = joined.iter().map(|(r, _)| r.mc).collect();
    let mean_mc = mc.iter().sum::<f64>() / mc.len().max(1) as f64;
    let complex = mc.iter().map(|&m| m > mean_mc).collect();
    (
        AnalysisTable {
            treebanks,
            columns,
            complex,
        },
        unmatched_measurements,
        unmatched_las,
    )
}

pub const NORMALITY_VARIABLES: [&str; 6] = [
    "las",
    "train_tokens",
    "edv",
    "mean_test_length",
    "slv",
    "test_tokens",
];

pub const LAS_CORRELATES: [&str; 8] = [
    "train_tokens",
    "train_sentences",
    "mean_train_length",
    "test_tokens",
    "test_sentences",
    "mean_test_length",
    "slv",
    "edv",
];

pub const VARIABLE_PAIRS: [(&str, &str); 9] = [
    ("train_tokens", "edv"),
    ("mean_test_length", "edv"),
    ("mean_train_length", "edv"),
    ("test_tokens", "edv"),
    ("slv", "edv"),
    ("test_tokens", "train_tokens"),
    ("mean_test_length", "train_tokens"),
    ("crossings", "edv"),
    ("ttr", "edv"),
];

pub const PARTIAL_COVARIATE_SETS: [&[&str]; 3] = [
    &[],
    &["train_tokens"],
    &["train_tokens", "mean_test_length"],
];

pub const REGRESSION_MODELS: [&[&str]; 4] = [
    &["log_train_tokens"],
    &["log_train_tokens", "mean_test_length"],
    &["log_train_tokens", "edv"],
    &["log_train_tokens", "mean_test_length", "edv"],
];

/// Degenerate inputs (constant columns, tiny subsets) drop a row instead of
/// failing the whole analysis.
fn tolerate<T>(what: &str, r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ (Error::Degenerate(_) | Error::InvalidInput(_) | Error::Numeric(_))) => {
            warn!("{what}: {e}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn partial_row(
    table: &AnalysisTable,
    subset: &str,
    covariates: &[&str],
) -> Result<Option<CorrelationRow>> {
    let cov: Vec<(&str, &[f64])> = covariates
        .iter()
        .map(|c| table.column(c).map(|v| (*c, v)))
        .collect::<Result<_>>()?;
    let r = partial_spearman(table.column("edv")?, table.column("las")?, &cov);
    Ok(
        tolerate(&format!("partial edv~las [{subset}]"), r)?.map(|result| CorrelationRow {
            subset: subset.to_string(),
            variable: "edv".into(),
            target: "las".into(),
            result,
        }),
    )
}

fn background(
    table: &AnalysisTable,
    config: &AnalysisConfig,
    name: &str,
    stages: &[&str],
    probe: &str,
) -> Result<Option<BackgroundAnalysis>> {
    let stage_inputs: Vec<(&[f64], FitFamily)> = stages
        .iter()
        .map(|s| table.column(s).map(|c| (c, config.fit_family(s))))
        .collect::<Result<_>>()?;
    let Some((normalized, fits)) = tolerate(
        name,
        background_removal(table.column("las")?, &stage_inputs),
    )?
    else {
        return Ok(None);
    };
    let probe_values = table.column(probe)?;
    let correlation = tolerate(name, spearman(probe_values, &normalized))?;
    Ok(Some(BackgroundAnalysis {
        name: name.to_string(),
        target: "las".into(),
        stages: stages.iter().map(|s| s.to_string()).zip(fits).collect(),
        probe: probe.to_string(),
        series: table
            .treebanks
            .iter()
            .zip(probe_values)
            .zip(&normalized)
            .map(|((t, p), v)| (t.clone(), *p, *v))
            .collect(),
        correlation,
    }))
}

/// Runs the full battery on an already joined table.
pub fn analyze_table(
    table: &AnalysisTable,
    binned: &BTreeMap<String, BinSeries>,
    config: &AnalysisConfig,
) -> Result<AnalysisReport> {
    let n = table.treebanks.len();
    if n < 4 {
        return Err(Error::InvalidInput(format!(
            "analysis needs at least 4 treebanks with LAS, got {n}"
        )));
    }
    let mut normality = Vec::new();
    for v in NORMALITY_VARIABLES {
        if let Some(result) = tolerate(&format!("normality {v}"), shapiro_wilk(table.column(v)?))? {
            normality.push(NormalityRow {
                variable: v.into(),
                result,
            });
        }
    }

    let mut correlations = Vec::new();
    let pairs = LAS_CORRELATES
        .iter()
        .map(|v| (*v, "las"))
        .chain(VARIABLE_PAIRS);
    for (variable, target) in pairs {
        let r = spearman(table.column(variable)?, table.column(target)?);
        if let Some(result) = tolerate(&format!("{variable}~{target}"), r)? {
            correlations.push(CorrelationRow {
                subset: "full".into(),
                variable: variable.into(),
                target: target.into(),
                result,
            });
        }
    }

    let complex = table.subset(|i| table.complex[i]);
    let simple = table.subset(|i| !table.complex[i]);
    let mut partial_correlations = Vec::new();
    for covariates in PARTIAL_COVARIATE_SETS {
        for (subset, t) in [("full", table), ("complex", &complex), ("not", &simple)] {
            // The two-covariate model is only reported for the full set.
            if covariates.len() > 1 && subset != "full" {
                continue;
            }
            partial_correlations.extend(partial_row(t, subset, covariates)?);
        }
    }

    let mut regressions = Vec::new();
    for model in REGRESSION_MODELS {
        let predictors: Vec<(&str, &[f64])> = model
            .iter()
            .map(|p| table.column(p).map(|c| (*p, c)))
            .collect::<Result<_>>()?;
        let r = ols_regression(table.column("las")?, &predictors);
        if let Some(result) = tolerate("regression", r)? {
            regressions.push(RegressionRow {
                predictors: model.iter().map(|p| p.to_string()).collect(),
                result,
            });
        }
    }

    let background = [
        background(
            table,
            config,
            "test_tokens_after_train_tokens",
            &["train_tokens"],
            "test_tokens",
        )?,
        background(
            table,
            config,
            "edv_after_train_tokens_and_test_length",
            &["train_tokens", "mean_test_length"],
            "edv",
        )?,
    ]
    .into_iter()
    .flatten()
    .collect();

    let mut binned_partial = Vec::new();
    for length in config.bins.lengths() {
        let mut edv = Vec::new();
        let mut las = Vec::new();
        let mut tokens = Vec::new();
        for (i, name) in table.treebanks.iter().enumerate() {
            if let Some(v) = binned.get(name).and_then(|s| s.values.get(&length)) {
                edv.push(*v);
                las.push(table.columns["las"][i]);
                tokens.push(table.columns["train_tokens"][i]);
            }
        }
        if edv.len() < 5 {
            continue;
        }
        let r = partial_spearman(&edv, &las, &[("train_tokens", &tokens)]);
        if let Some(result) = tolerate(&format!("binned partial l={length}"), r)? {
            binned_partial.push(BinnedPartialRow {
                length,
                n: result.n,
                rho: result.rho,
                p_value: result.p_value,
            });
        }
    }

    Ok(AnalysisReport {
        schema_version: REPORT_SCHEMA_VERSION.to_string(),
        n,
        treebanks: table.treebanks.clone(),
        unmatched_measurements: Vec::new(),
        unmatched_las: Vec::new(),
        normality,
        correlations,
        partial_correlations,
        regressions,
        background,
        binned_partial,
    })
}

/// Joins measurements (from `config.measurements` or a fresh measurement
/// of the UD root) with the LAS table and runs the analysis.
pub fn analyze(config: &AnalysisConfig) -> Result<AnalysisReport> {
    config.validate()?;
    let las_path = config
        .las_table
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("analysis needs a LAS table (--las-table)".into()))?;
    let las = read_las_table(las_path)?;
    let measurements = match &config.measurements {
        Some(path) => read_measure_report(path)?,
        None => measure(config)?,
    };
    let (table, unmatched_measurements, unmatched_las) = join_tables(&measurements.rows, &las);
    for name in &unmatched_measurements {
        warn!("no LAS for measured treebank {name}");
    }
    for name in &unmatched_las {
        warn!("LAS row {name} matches no measured treebank");
    }
    let mut report = analyze_table(&table, &measurements.binned_edv, config)?;
    report.unmatched_measurements = unmatched_measurements;
    report.unmatched_las = unmatched_las;
    Ok(report)
}

fn correlation_record(kind: &str, row: &CorrelationRow) -> Vec<String> {
    let r = &row.result;
    vec![
        kind.to_string(),
        row.subset.clone(),
        row.variable.clone(),
        row.target.clone(),
        if r.covariates.is_empty() {
            "none".into()
        } else {
            r.covariates.join("+")
        },
        r.n.to_string(),
        sci(r.rho),
        sci(r.ci95.0),
        sci(r.ci95.1),
        sci(r.rho_squared),
        sci(r.adj_rho_squared),
        sci(r.p_value),
        sci(r.power),
    ]
}

/// Writes `analysis.json`, or in CSV mode `normality.csv`,
/// `correlations.csv`, `regression.csv`, `background.csv`,
/// `binned_partial.csv` and `unmatched.csv`.
pub fn write_analysis_report(
    report: &AnalysisReport,
    config: &AnalysisConfig,
) -> Result<Vec<PathBuf>> {
    config.prepare_output_dir()?;
    let dir = &config.output_dir;
    if config.format == OutputFormat::Json {
        let path = dir.join("analysis.json");
        write_json(&path, report)?;
        return Ok(vec![path]);
    }
    let mut written = Vec::new();
    let mut open = |name: &str, header: &[&str]| -> Result<(PathBuf, csv::Writer<fs::File>)> {
        let path = dir.join(name);
        let mut w = csv_writer(&path)?;
        w.write_record(header)?;
        written.push(path.clone());
        Ok((path, w))
    };
    let finish =
        |(path, mut w): (PathBuf, csv::Writer<fs::File>)| w.flush().map_err(|e| Error::io(path, e));

    let mut f = open("normality.csv", &["variable", "w", "p_value", "normal"])?;
    for row in &report.normality {
        f.1.write_record([
            row.variable.clone(),
            sci(row.result.w),
            sci(row.result.p_value),
            row.result.normal_at_005.to_string(),
        ])?;
    }
    finish(f)?;

    let mut f = open(
        "correlations.csv",
        &[
            "kind",
            "subset",
            "variable",
            "target",
            "covariates",
            "n",
            "rho",
            "ci_low",
            "ci_high",
            "rho_squared",
            "adj_rho_squared",
            "p_value",
            "power",
        ],
    )?;
    for row in &report.correlations {
        f.1.write_record(correlation_record("spearman", row))?;
    }
    for row in &report.partial_correlations {
        f.1.write_record(correlation_record("partial", row))?;
    }
    finish(f)?;

    let mut f = open(
        "regression.csv",
        &[
            "model",
            "predictor",
            "estimate",
            "p_value",
            "importance",
            "r_squared",
            "adj_r_squared",
            "n",
        ],
    )?;
    for row in &report.regressions {
        let model = row.predictors.join("+");
        for c in &row.result.coefficients {
            f.1.write_record([
                model.clone(),
                c.name.clone(),
                sci(c.estimate),
                sci(c.p_value),
                sci(row.result.importance(&c.name).unwrap_or(f64::NAN)),
                sci(row.result.r_squared),
                sci(row.result.adj_r_squared),
                row.result.n.to_string(),
            ])?;
        }
    }
    finish(f)?;

    let mut f = open(
        "background.csv",
        &[
            "analysis",
            "treebank",
            "probe",
            "probe_value",
            "normalized_las",
        ],
    )?;
    for b in &report.background {
        for (t, p, v) in &b.series {
            f.1.write_record([b.name.clone(), t.clone(), b.probe.clone(), sci(*p), sci(*v)])?;
        }
    }
    finish(f)?;

    let mut f = open("binned_partial.csv", &["length", "n", "rho", "p_value"])?;
    for row in &report.binned_partial {
        f.1.write_record([
            row.length.to_string(),
            row.n.to_string(),
            sci(row.rho),
            sci(row.p_value),
        ])?;
    }
    finish(f)?;

    let mut f = open("unmatched.csv", &["source", "treebank"])?;
    for name in &report.unmatched_measurements {
        f.1.write_record(["measurements", name])?;
    }
    for name in &report.unmatched_las {
        f.1.write_record(["las_table", name])?;
    }
    finish(f)?;
    Ok(written)
}

// ---------------------------------------------------------------------------
// split / variance / eval-las

/// A treebank given either as a directory path or as a name under the UD
/// root.
pub fn resolve_treebank(config: &AnalysisConfig, treebank: &str) -> Result<Treebank> {
    let as_path = Path::new(treebank);
    if as_path.is_dir() {
        if let Some(source) = TreebankSource::from_dir(as_path)? {
            return source.load(config.strictness);
        }
    }
    let root = config.resolved_ud_root()?;
    let key = join_key(treebank);
    discover_treebank_sources(&root)?
        .into_iter()
        .find(|s| join_key(&s.name) == key)
        .ok_or_else(|| {
            Error::InvalidInput(format!(
                "treebank `{treebank}` not found under {}",
                root.display()
            ))
        })?
        .load(config.strictness)
}

/// Generates the requested split modes and writes files plus manifests.
pub fn split(
    config: &AnalysisConfig,
    treebank: &Treebank,
    modes: &[SplitMode],
) -> Result<Vec<(SplitResult, PathBuf)>> {
    config.validate()?;
    config.prepare_output_dir()?;
    let pool = pool_treebank(treebank)?;
    let results: Vec<SplitResult> = config.run(|| {
        modes
            .par_iter()
            .map(|&mode| generate_split_with(&pool, mode, config.seed, config.split_options()))
            .collect::<Result<Vec<_>>>()
    })??;
    results
        .into_iter()
        .map(|r| {
            let manifest = write_split(&r, &treebank.name, &config.output_dir)?;
            Ok((r, manifest))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub schema_version: String,
    pub treebank: String,
    pub seed: u64,
    pub repeats: usize,
    pub rng_algorithm: String,
    pub edv_convention: EdvConvention,
    pub rows: Vec<VarianceRow>,
}

pub fn variance(
    config: &AnalysisConfig,
    treebank: &Treebank,
    sizes: &[usize],
    repeats: usize,
) -> Result<VarianceReport> {
    config.validate()?;
    let rows = config.run(|| {
        variance_experiment(
            treebank,
            sizes,
            repeats,
            config.seed,
            config.split_options(),
        )
    })??;
    Ok(VarianceReport {
        schema_version: REPORT_SCHEMA_VERSION.to_string(),
        treebank: treebank.name.clone(),
        seed: config.seed,
        repeats,
        rng_algorithm: crate::splitter::RNG_ALGORITHM.to_string(),
        edv_convention: config.edv_convention,
        rows,
    })
}

/// Writes `<treebank>-variance.json`, or in CSV mode
/// `<treebank>-variance.csv` (summary) and `<treebank>-variance-runs.csv`.
pub fn write_variance_report(
    report: &VarianceReport,
    config: &AnalysisConfig,
) -> Result<Vec<PathBuf>> {
    config.prepare_output_dir()?;
    let dir = &config.output_dir;
    if config.format == OutputFormat::Json {
        let path = dir.join(format!("{}-variance.json", report.treebank));
        write_json(&path, report)?;
        return Ok(vec![path]);
    }
    let summary = dir.join(format!("{}-variance.csv", report.treebank));
    let mut w = csv_writer(&summary)?;
    w.write_record(["size", "repeats", "mean_edv", "std_edv", "relative_std"])?;
    for row in &report.rows {
        w.write_record([
            row.size.to_string(),
            row.edvs.len().to_string(),
            sci(row.mean_edv),
            sci(row.std_edv),
            sci(row.std_edv / row.mean_edv),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&summary, e))?;
    let runs = dir.join(format!("{}-variance-runs.csv", report.treebank));
    let mut w = csv_writer(&runs)?;
    w.write_record(["size", "repeat", "edv"])?;
    for row in &report.rows {
        for (i, v) in row.edvs.iter().enumerate() {
            w.write_record([row.size.to_string(), i.to_string(), sci(*v)])?;
        }
    }
    w.flush().map_err(|e| Error::io(&runs, e))?;
    Ok(vec![summary, runs])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LasReport {
    pub correct: usize,
    pub total: usize,
    pub las: f64,
    pub binned: BinSeries,
}

/// LAS of a predicted file against gold, overall and per sentence length.
pub fn eval_las(config: &AnalysisConfig, gold: &Path, predicted: &Path) -> Result<LasReport> {
    config.validate()?;
    let gold = parse_file(gold, Strictness::Strict)?;
    let predicted = parse_file(predicted, Strictness::Strict)?;
    let (correct, total) = las_counts(&gold, &predicted, config.label_granularity)?;
    if total == 0 {
        return Err(Error::InvalidInput("no tokens to evaluate".into()));
    }
    let binned = binned_las(&gold, &predicted, config.bins, config.label_granularity)?;
    Ok(LasReport {
        correct,
        total,
        las: correct as f64 / total as f64,
        binned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn join_keys_agree() {
        assert_eq!(
            join_key("UD_Ancient_Greek-PROIEL"),
            join_key("Ancient Greek-PROIEL")
        );
        assert_eq!(join_key(" czech-pdt "), join_key("UD_Czech-PDT"));
    }

    #[test]
    fn sci_has_four_significant_digits() {
        assert_eq!(sci(0.0014), "1.400e-3");
        assert_eq!(sci(-4.26), "-4.260e0");
        assert_eq!(sci(123456.0), "1.235e5");
    }

    #[test]
    fn config_validation() {
        let mut c = AnalysisConfig::default();
        assert!(c.validate().is_ok());
        c.support = Support::new(3, 3);
        assert!(c.validate().is_err());
        let mut c = AnalysisConfig {
            bins: LengthBins { min: 3, max: 40 },
            ..AnalysisConfig::default()
        };
        assert!(c.validate().is_err());
        c.bins = LengthBins { min: 5, max: 4 };
        assert!(c.validate().is_err());
    }

    #[test]
    fn default_families() {
        let c = AnalysisConfig::default();
        assert_eq!(c.fit_family("train_tokens"), FitFamily::LogLinear);
        assert_eq!(c.fit_family("mean_test_length"), FitFamily::Linear);
    }
}
