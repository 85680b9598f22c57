#![allow(dead_code)]

pub mod oracles;

use std::fs;
use std::path::{Path, PathBuf};

use edvkit::conllu::{write_file, Split, Treebank};
use edvkit::synthetic::{synthetic_treebank, MedProfile, SyntheticSpec};

/// Writes `treebank` as `<root>/<name>/xx_name-ud-{split}.conllu`.
pub fn write_treebank(root: &Path, treebank: &Treebank) -> PathBuf {
    let dir = root.join(&treebank.name);
    fs::create_dir_all(&dir).unwrap();
    let stem = treebank
        .name
        .trim_start_matches("UD_")
        .to_lowercase()
        .replace(['-', ' '], "_");
    for (split, sentences) in &treebank.splits {
        write_file(
            sentences,
            dir.join(format!("xx_{stem}-ud-{}.conllu", split.as_str())),
        )
        .unwrap();
    }
    dir
}

/// Three small treebanks with different train/test head-direction mixes.
pub fn fixture_treebanks() -> Vec<Treebank> {
    let spec = |sentences, profile, seed| SyntheticSpec {
        sentences,
        profile,
        seed,
        ..Default::default()
    };
    vec![
        synthetic_treebank(
            "UD_Alpha-Same",
            &spec(240, MedProfile::Fixed(0.5), 1),
            &spec(80, MedProfile::Fixed(0.5), 2),
        )
        .unwrap(),
        synthetic_treebank(
            "UD_Beta-Shifted",
            &spec(200, MedProfile::Fixed(0.3), 3),
            &spec(60, MedProfile::Fixed(0.7), 4),
        )
        .unwrap(),
        synthetic_treebank(
            "UD_Gamma-Mixed",
            &spec(300, MedProfile::Bimodal(0.2, 0.8), 5),
            &spec(70, MedProfile::Fixed(0.8), 6),
        )
        .unwrap(),
    ]
}

pub fn write_ud_root(root: &Path, treebanks: &[Treebank]) {
    for tb in treebanks {
        write_treebank(root, tb);
    }
}

/// Pool of `sentences` sentences whose MED values fall in two clusters.
pub fn bimodal_pool(sentences: usize, seed: u64) -> Vec<edvkit::conllu::Sentence> {
    edvkit::synthetic::synthetic_sentences(&SyntheticSpec {
        sentences,
        min_len: 3,
        max_len: 30,
        profile: MedProfile::Bimodal(0.2, 0.8),
        seed,
        ..Default::default()
    })
    .unwrap()
}

pub fn train_test(
    treebank: &Treebank,
) -> (&[edvkit::conllu::Sentence], &[edvkit::conllu::Sentence]) {
    (
        treebank.require(Split::Train).unwrap(),
        treebank.require(Split::Test).unwrap(),
    )
}
