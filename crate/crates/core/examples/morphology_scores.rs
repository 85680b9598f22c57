//! Morphological complexity of a few synthetic treebanks with different
//! vocabulary sizes, and the complex / not-complex split at the mean MC.

use std::collections::BTreeMap;

use edvkit::morphology::{complexity_split, score_sentences, CaseHandling};
use edvkit::synthetic::{synthetic_sentences, SyntheticSpec};

fn main() -> edvkit::error::Result<()> {
    let mut mc = BTreeMap::new();
    println!(
        "{:<10} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}",
        "lemmas", "H", "TTR", "F/L", "F/iL", "HPE", "MC"
    );
    for lemmas in [20, 100, 400, 2000] {
        let sentences = synthetic_sentences(&SyntheticSpec {
            sentences: 600,
            lemmas,
            seed: lemmas as u64,
            ..Default::default()
        })?;
        let s = score_sentences(&sentences, CaseHandling::Exact)?;
        println!(
            "{lemmas:<10} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>6.3}",
            s.h_word_norm, s.ttr, s.f_l_norm, s.f_il_norm, s.hpe_norm, s.mc
        );
        mc.insert(format!("lemmas-{lemmas}"), s.mc);
    }
    let (complex, not_complex) = complexity_split(&mc)?;
    println!("complex: {complex:?}");
    println!("not complex: {not_complex:?}");
    Ok(())
}
