//! Normalized crossing counts under both pair conventions, plus TTR, for
//! projective and non-projective toy trees and a synthetic treebank.

use edvkit::conllu::Sentence;
use edvkit::morphology::{type_token_ratio, CaseHandling, VocabProfile};
use edvkit::synthetic::{synthetic_sentences, SyntheticSpec};
use edvkit::treebank_stats::{crossing_counts, treebank_crossings, PairConvention};

fn main() -> edvkit::error::Result<()> {
    let projective = Sentence::from_heads(&[2, 0, 2, 3])?;
    // 1 -> 3 and 2 -> 4 cross.
    let crossing = Sentence::from_heads(&[3, 4, 0, 3])?;
    for (name, s) in [("projective", &projective), ("crossing", &crossing)] {
        for convention in [PairConvention::VertexDisjoint, PairConvention::AllPairs] {
            let (c, q) = crossing_counts(s, convention);
            println!("{name:<10} {convention:?}: C = {c}, |Q| = {q}");
        }
    }
    let sentences = synthetic_sentences(&SyntheticSpec {
        sentences: 400,
        ..Default::default()
    })?;
    println!(
        "synthetic treebank: C/|Q| = {:.4}, TTR = {:.4}",
        treebank_crossings(&sentences, PairConvention::VertexDisjoint),
        type_token_ratio(&VocabProfile::from_sentences(
            &sentences,
            CaseHandling::Exact
        ))?
    );
    Ok(())
}
