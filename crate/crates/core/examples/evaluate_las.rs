//! LAS of predicted CoNLL-U against gold, overall and per sentence length.
//! Without arguments, scores a corrupted copy of a synthetic gold file.
//!
//! cargo run --example evaluate_las -- [GOLD PREDICTED]

use edvkit::conllu::{evaluate_las, parse_file, LabelGranularity, Sentence, Strictness};
use edvkit::synthetic::{synthetic_sentences, SyntheticSpec};
use edvkit::treebank_stats::{binned_las, LengthBins};

fn main() -> edvkit::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let (gold, predicted) = match (args.next(), args.next()) {
        (Some(g), Some(p)) => (
            parse_file(g, Strictness::Strict)?,
            parse_file(p, Strictness::Strict)?,
        ),
        _ => {
            let gold = synthetic_sentences(&SyntheticSpec::default())?;
            // Relabel every fifth token and reattach nothing: LAS drops, UAS would not.
            let predicted = gold
                .iter()
                .map(|s| {
                    let mut tokens = s.tokens().to_vec();
                    for t in tokens.iter_mut().filter(|t| t.id % 5 == 0) {
                        t.deprel = "wrong".into();
                    }
                    Sentence::new(tokens, s.raw_comments().to_vec())
                })
                .collect::<edvkit::error::Result<Vec<_>>>()?;
            (gold, predicted)
        }
    };
    for granularity in [LabelGranularity::Full, LabelGranularity::Universal] {
        println!(
            "LAS ({granularity:?}): {:.4}",
            evaluate_las(&gold, &predicted, granularity)?
        );
    }
    let bins = LengthBins { min: 3, max: 12 };
    let series = binned_las(&gold, &predicted, bins, LabelGranularity::Universal)?;
    for (len, las) in &series.values {
        println!(
            "  length {len:>2}: {las:.3} over {} sentences",
            series.counts[len]
        );
    }
    Ok(())
}
