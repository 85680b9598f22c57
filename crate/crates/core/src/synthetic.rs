//! Seeded random dependency trees with a tunable head-direction bias, for
//! examples and tests that cannot ship real treebanks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conllu::{Sentence, Split, Token, Treebank};
use crate::error::Result;

const UPOS: [&str; 5] = ["NOUN", "VERB", "ADJ", "ADV", "DET"];
const SUFFIXES: [(&str, &str); 4] = [("", "Sing"), ("s", "Plur"), ("en", "Plur"), ("e", "Sing")];

/// How the head-direction bias varies between sentences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MedProfile {
    /// Every sentence uses the same probability of a head lying to the right.
    Fixed(f64),
    /// Each sentence picks one of the two probabilities with equal chance,
    /// giving a bimodal MED distribution.
    Bimodal(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub sentences: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub profile: MedProfile,
    /// Number of distinct lemmas.
    pub lemmas: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            sentences: 200,
            min_len: 3,
            max_len: 25,
            profile: MedProfile::Fixed(0.5),
            lemmas: 300,
            seed: 0,
        }
    }
}

/// Random tree over `n` tokens. Tokens are attached in random order to an
/// already attached token, to the right with probability `right_bias` when
/// possible, preferring close heads.
pub fn random_heads<R: Rng>(rng: &mut R, n: usize, right_bias: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut heads = vec![0usize; n];
    let mut attached = vec![order[0]];
    for &tok in &order[1..] {
        let (right, left): (Vec<usize>, Vec<usize>) = attached.iter().partition(|&&h| h > tok);
        let side = if left.is_empty() || (!right.is_empty() && rng.random_bool(right_bias)) {
            right
        } else {
            left
        };
        let weights: Vec<f64> = side.iter().map(|&h| 1.0 / h.abs_diff(tok) as f64).collect();
        let mut pick = rng.random_range(0.0..weights.iter().sum::<f64>());
        let mut head = side[side.len() - 1];
        for (&h, w) in side.iter().zip(&weights) {
            if pick < *w {
                head = h;
                break;
            }
            pick -= w;
        }
        heads[tok - 1] = head;
        attached.push(tok);
    }
    heads
}

fn sentence<R: Rng>(
    rng: &mut R,
    n: usize,
    right_bias: f64,
    lemmas: usize,
    sent_id: String,
) -> Result<Sentence> {
    let heads = random_heads(rng, n, right_bias);
    let tokens = heads
        .iter()
        .enumerate()
        .map(|(i, &head)| {
            // Squaring a uniform draw skews lemma frequencies toward low ids.
            let u: f64 = rng.random();
            let lemma_id = ((u * u) * lemmas as f64) as usize;
            let (suffix, number) = SUFFIXES[rng.random_range(0..SUFFIXES.len())];
            let lemma = format!("w{lemma_id}");
            let mut t = Token::new(
                i + 1,
                format!("{lemma}{suffix}"),
                head,
                if head == 0 { "root" } else { "dep" },
            );
            t.lemma = lemma;
            t.upos = UPOS[lemma_id % UPOS.len()].to_string();
            t.feats = vec![("Number".to_string(), number.to_string())];
            t
        })
        .collect();
    Sentence::new(tokens, vec![format!("# sent_id = {sent_id}")])
}

pub fn synthetic_sentences(spec: &SyntheticSpec) -> Result<Vec<Sentence>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.sentences)
        .map(|i| {
            let n = rng.random_range(spec.min_len..=spec.max_len);
            let bias = match spec.profile {
                MedProfile::Fixed(p) => p,
                MedProfile::Bimodal(a, b) => {
                    if rng.random_bool(0.5) {
                        a
                    } else {
                        b
                    }
                }
            };
            sentence(
                &mut rng,
                n,
                bias,
                spec.lemmas,
                format!("s{}-{i}", spec.seed),
            )
        })
        .collect()
}

/// Treebank whose train and test splits come from separate specs; dev is
/// drawn from the train spec with a derived seed.
pub fn synthetic_treebank(
    name: &str,
    train: &SyntheticSpec,
    test: &SyntheticSpec,
) -> Result<Treebank> {
    let dev = SyntheticSpec {
        sentences: (train.sentences / 8).max(1),
        seed: train.seed ^ 0x5eed,
        ..*train
    };
    Ok(Treebank::new(name)
        .with_split(Split::Train, synthetic_sentences(train)?)
        .with_split(Split::Dev, synthetic_sentences(&dev)?)
        .with_split(Split::Test, synthetic_sentences(test)?))
}
