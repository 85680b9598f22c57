//! Reading, validating and writing CoNLL-U treebanks.
//!
//! Only syntactic words are kept: multiword-token ranges (`1-2`) and empty
//! nodes (`1.1`) are dropped while parsing, so token ids always run `1..=n`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How to react to malformed sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    /// Abort on the first malformed sentence.
    Strict,
    /// Skip malformed sentences with a logged warning.
    #[default]
    Lenient,
}

/// Dependency label comparison used by [`evaluate_las`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelGranularity {
    /// Compare complete labels, including subtypes (`nsubj:pass`).
    Full,
    /// Compare only the universal part before the first `:`.
    #[default]
    Universal,
}

impl FromStr for LabelGranularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(LabelGranularity::Full),
            "universal" => Ok(LabelGranularity::Universal),
            other => Err(Error::InvalidInput(format!(
                "unknown label granularity `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub id: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    /// Morphological features in file order.
    pub feats: Vec<(String, String)>,
    /// Position of the head, 0 for the root.
    pub head: usize,
    pub deprel: String,
    pub deps: String,
    pub misc: String,
}

impl Token {
    /// A token with placeholder lexical columns.
    pub fn new(id: usize, form: impl Into<String>, head: usize, deprel: impl Into<String>) -> Self {
        let form = form.into();
        Token {
            id,
            lemma: form.clone(),
            form,
            upos: "X".to_string(),
            xpos: "_".to_string(),
            feats: Vec::new(),
            head,
            deprel: deprel.into(),
            deps: "_".to_string(),
            misc: "_".to_string(),
        }
    }

    /// Features as sorted `key=value` pairs joined by `|`, or `_` when empty.
    pub fn canonical_feats(&self) -> String {
        if self.feats.is_empty() {
            return "_".to_string();
        }
        let mut pairs: Vec<String> = self.feats.iter().map(|(k, v)| format!("{k}={v}")).collect();
        pairs.sort();
        pairs.join("|")
    }

    fn feats_column(&self) -> String {
        if self.feats.is_empty() {
            "_".to_string()
        } else {
            self.feats
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join("|")
        }
    }
}

/// One dependency tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    tokens: Vec<Token>,
    sent_id: Option<String>,
    raw_comments: Vec<String>,
}

impl Sentence {
    /// Builds a sentence and checks the tree invariants.
    pub fn new(tokens: Vec<Token>, raw_comments: Vec<String>) -> Result<Self> {
        let sent_id = raw_comments.iter().find_map(|c| parse_sent_id(c));
        let sentence = Sentence {
            tokens,
            sent_id,
            raw_comments,
        };
        sentence.validate()?;
        Ok(sentence)
    }

    /// Sentence with generated forms from a head vector (`heads[i]` is the
    /// head of token `i + 1`).
    pub fn from_heads(heads: &[usize]) -> Result<Self> {
        let tokens = heads
            .iter()
            .enumerate()
            .map(|(i, &h)| {
                let deprel = if h == 0 { "root" } else { "dep" };
                Token::new(i + 1, format!("w{}", i + 1), h, deprel)
            })
            .collect();
        Sentence::new(tokens, Vec::new())
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn sent_id(&self) -> Option<&str> {
        self.sent_id.as_deref()
    }

    pub fn raw_comments(&self) -> &[String] {
        &self.raw_comments
    }

    pub fn heads(&self) -> Vec<usize> {
        self.tokens.iter().map(|t| t.head).collect()
    }

    /// The same sentence with the word order reversed and heads remapped.
    pub fn reversed(&self) -> Sentence {
        let n = self.tokens.len();
        let remap = |p: usize| if p == 0 { 0 } else { n + 1 - p };
        let tokens = self
            .tokens
            .iter()
            .rev()
            .map(|t| Token {
                id: remap(t.id),
                head: remap(t.head),
                ..t.clone()
            })
            .collect();
        Sentence {
            tokens,
            sent_id: self.sent_id.clone(),
            raw_comments: self.raw_comments.clone(),
        }
    }

    fn invalid(&self, message: impl Into<String>) -> Error {
        Error::InvalidSentence {
            sent_id: self.sent_id.clone(),
            message: message.into(),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.tokens.len();
        if n == 0 {
            return Err(self.invalid("sentence has no tokens"));
        }
        let mut roots = 0;
        for (i, t) in self.tokens.iter().enumerate() {
            if t.id != i + 1 {
                return Err(self.invalid(format!("expected token id {}, found {}", i + 1, t.id)));
            }
            if t.head > n {
                return Err(self.invalid(format!(
                    "token {} has head {} outside 0..={n}",
                    t.id, t.head
                )));
            }
            if t.head == t.id {
                return Err(self.invalid(format!("token {} is its own head", t.id)));
            }
            if t.deprel.is_empty() || t.deprel == "_" {
                return Err(self.invalid(format!("token {} has no dependency relation", t.id)));
            }
            if t.head == 0 {
                roots += 1;
            }
        }
        if roots != 1 {
            return Err(self.invalid(format!("expected exactly one root, found {roots}")));
        }
        // Every walk towards the root must terminate within n steps.
        for t in &self.tokens {
            let mut current = t.id;
            let mut steps = 0;
            while current != 0 {
                current = self.tokens[current - 1].head;
                steps += 1;
                if steps > n {
                    return Err(self.invalid(format!("cycle through token {}", t.id)));
                }
            }
        }
        Ok(())
    }
}

fn parse_sent_id(comment: &str) -> Option<String> {
    let body = comment.trim_start_matches('#').trim();
    let (key, value) = body.split_once('=')?;
    (key.trim() == "sent_id").then(|| value.trim().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Treebank {
    pub name: String,
    pub splits: BTreeMap<Split, Vec<Sentence>>,
    pub source_paths: BTreeMap<Split, PathBuf>,
}

impl Treebank {
    pub fn new(name: impl Into<String>) -> Self {
        Treebank {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn with_split(mut self, split: Split, sentences: Vec<Sentence>) -> Self {
        self.splits.insert(split, sentences);
        self
    }

    pub fn split(&self, split: Split) -> Option<&[Sentence]> {
        self.splits.get(&split).map(Vec::as_slice)
    }

    /// Like [`Treebank::split`] but an absent split is an error.
    pub fn require(&self, split: Split) -> Result<&[Sentence]> {
        self.split(split).ok_or_else(|| Error::MissingSplit {
            treebank: self.name.clone(),
            split: split.to_string(),
        })
    }

    /// Human-readable name: `UD_Ancient_Greek-PROIEL` becomes
    /// `Ancient Greek-PROIEL`.
    pub fn display_name(&self) -> String {
        display_name(&self.name)
    }
}

pub fn display_name(dir_name: &str) -> String {
    dir_name.trim_start_matches("UD_").replace('_', " ")
}

/// Parses CoNLL-U text.
pub fn parse_str(text: &str, strictness: Strictness) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    let mut block: Vec<(usize, &str)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !block.is_empty() {
                push_block(&block, strictness, &mut sentences)?;
                block.clear();
            }
        } else {
            block.push((idx + 1, line));
        }
    }
    if !block.is_empty() {
        push_block(&block, strictness, &mut sentences)?;
    }
    Ok(sentences)
}

fn push_block(
    block: &[(usize, &str)],
    strictness: Strictness,
    out: &mut Vec<Sentence>,
) -> Result<()> {
    match parse_block(block) {
        Ok(sentence) => out.push(sentence),
        Err(err) => match strictness {
            Strictness::Strict => return Err(err),
            Strictness::Lenient => {
                warn!("skipping sentence starting at line {}: {err}", block[0].0)
            }
        },
    }
    Ok(())
}

fn parse_block(block: &[(usize, &str)]) -> Result<Sentence> {
    let mut comments = Vec::new();
    let mut tokens = Vec::new();
    for &(line_no, line) in block {
        if line.starts_with('#') {
            comments.push(line.to_string());
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let id = cols[0]
            .parse::<usize>()
            .map_err(|_| parse_err(format!("invalid token id `{}`", cols[0])))?;
        let head = cols[6]
            .parse::<usize>()
            .map_err(|_| parse_err(format!("invalid head `{}`", cols[6])))?;
        tokens.push(Token {
            id,
            form: cols[1].to_string(),
            lemma: cols[2].to_string(),
            upos: cols[3].to_string(),
            xpos: cols[4].to_string(),
            feats: parse_feats(cols[5]).map_err(parse_err)?,
            head,
            deprel: cols[7].to_string(),
            deps: cols[8].to_string(),
            misc: cols[9].to_string(),
        });
    }
    Sentence::new(tokens, comments)
}

fn parse_feats(col: &str) -> std::result::Result<Vec<(String, String)>, String> {
    if col == "_" || col.is_empty() {
        return Ok(Vec::new());
    }
    col.split('|')
        .map(|pair| {
            pair.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| format!("malformed feature `{pair}`"))
        })
        .collect()
}

pub fn parse_file(path: impl AsRef<Path>, strictness: Strictness) -> Result<Vec<Sentence>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_str(&text, strictness)
}

pub fn write_sentences<W: Write>(mut w: W, sentences: &[Sentence]) -> std::io::Result<()> {
    for sentence in sentences {
        for comment in &sentence.raw_comments {
            writeln!(w, "{comment}")?;
        }
        if let Some(id) = &sentence.sent_id {
            if !sentence
                .raw_comments
                .iter()
                .any(|c| parse_sent_id(c).is_some())
            {
                writeln!(w, "# sent_id = {id}")?;
            }
        }
        for t in &sentence.tokens {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                t.id,
                t.form,
                t.lemma,
                t.upos,
                t.xpos,
                t.feats_column(),
                t.head,
                t.deprel,
                t.deps,
                t.misc
            )?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_file(sentences: &[Sentence], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_sentences(&mut w, sentences).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// A treebank directory found on disk, not yet parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreebankSource {
    pub name: String,
    pub dir: PathBuf,
    pub files: BTreeMap<Split, PathBuf>,
}

impl TreebankSource {
    pub fn has(&self, split: Split) -> bool {
        self.files.contains_key(&split)
    }

    pub fn load(&self, strictness: Strictness) -> Result<Treebank> {
        let mut treebank = Treebank::new(self.name.clone());
        for (&split, path) in &self.files {
            let sentences = parse_file(path, strictness)?;
            if sentences.is_empty() {
                warn!("{}: {} split is empty, ignoring it", self.name, split);
                continue;
            }
            treebank.splits.insert(split, sentences);
            treebank.source_paths.insert(split, path.clone());
        }
        Ok(treebank)
    }
}

fn split_of_file(file_name: &str) -> Option<Split> {
    Split::ALL
        .into_iter()
        .find(|s| file_name.ends_with(&format!("-ud-{}.conllu", s.as_str())))
}

impl TreebankSource {
    /// The `*-ud-{train,dev,test}.conllu` files of one directory; `None`
    /// when it holds none.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Option<TreebankSource>> {
        let dir = dir.as_ref();
        let mut files = BTreeMap::new();
        for file in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let file = file.map_err(|e| Error::io(dir, e))?.path();
            if let Some(split) = file
                .file_name()
                .and_then(|f| f.to_str())
                .and_then(split_of_file)
            {
                files.insert(split, file);
            }
        }
        if files.is_empty() {
            return Ok(None);
        }
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string());
        Ok(Some(TreebankSource {
            name,
            dir: dir.to_path_buf(),
            files,
        }))
    }
}

/// Lists every sub-directory of `root` holding `*-ud-{train,dev,test}.conllu`
/// files, sorted by directory name.
pub fn discover_treebank_sources(root: impl AsRef<Path>) -> Result<Vec<TreebankSource>> {
    let root = root.as_ref();
    let entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut sources = Vec::new();
    for entry in entries {
        let dir = entry.map_err(|e| Error::io(root, e))?.path();
        if dir.is_dir() {
            sources.extend(TreebankSource::from_dir(&dir)?);
        }
    }
    sources.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(sources)
}

/// Discovers and parses every treebank under `root`. Treebanks left without
/// any non-empty split are dropped.
pub fn discover_treebanks(root: impl AsRef<Path>, strictness: Strictness) -> Result<Vec<Treebank>> {
    let sources = discover_treebank_sources(root)?;
    let loaded: Vec<Treebank> = sources
        .par_iter()
        .map(|s| s.load(strictness))
        .collect::<Result<_>>()?;
    Ok(loaded
        .into_iter()
        .filter(|t| !t.splits.is_empty())
        .collect())
}

fn labels_match(gold: &str, predicted: &str, granularity: LabelGranularity) -> bool {
    match granularity {
        LabelGranularity::Full => gold == predicted,
        LabelGranularity::Universal => {
            let universal = |l: &str| l.split(':').next().unwrap_or("").to_string();
            universal(gold) == universal(predicted)
        }
    }
}

/// Correct and total token counts for labeled attachment.
pub fn las_counts(
    gold: &[Sentence],
    predicted: &[Sentence],
    granularity: LabelGranularity,
) -> Result<(usize, usize)> {
    if gold.len() != predicted.len() {
        return Err(Error::Alignment {
            index: gold.len().min(predicted.len()),
            message: format!(
                "{} gold sentences vs {} predicted",
                gold.len(),
                predicted.len()
            ),
        });
    }
    let mut correct = 0;
    let mut total = 0;
    for (index, (g, p)) in gold.iter().zip(predicted).enumerate() {
        if g.len() != p.len() {
            return Err(Error::Alignment {
                index,
                message: format!("{} gold tokens vs {} predicted", g.len(), p.len()),
            });
        }
        for (gt, pt) in g.tokens().iter().zip(p.tokens()) {
            if gt.form != pt.form {
                return Err(Error::Alignment {
                    index,
                    message: format!("token {}: form `{}` vs `{}`", gt.id, gt.form, pt.form),
                });
            }
            if gt.head == pt.head && labels_match(&gt.deprel, &pt.deprel, granularity) {
                correct += 1;
            }
        }
        total += g.len();
    }
    Ok((correct, total))
}

/// Labeled attachment score as a fraction in `[0, 1]`.
pub fn evaluate_las(
    gold: &[Sentence],
    predicted: &[Sentence],
    granularity: LabelGranularity,
) -> Result<f64> {
    let (correct, total) = las_counts(gold, predicted, granularity)?;
    if total == 0 {
        return Err(Error::InvalidInput("no tokens to evaluate".into()));
    }
    Ok(correct as f64 / total as f64)
}
