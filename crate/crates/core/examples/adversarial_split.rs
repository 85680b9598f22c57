//! Minimum- and maximum-EDV resplits of a pooled treebank, written as
//! CoNLL-U files plus JSON manifests.
//!
//! cargo run --release --example adversarial_split -- [TREEBANK_DIR] [OUT_DIR]

use edvkit::conllu::{Strictness, TreebankSource};
use edvkit::error::{Error, Result};
use edvkit::splitter::{generate_split, pool_treebank, write_split, SplitMode};
use edvkit::synthetic::{synthetic_treebank, MedProfile, SyntheticSpec};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let treebank = match args.next() {
        Some(dir) => TreebankSource::from_dir(&dir)?
            .ok_or_else(|| Error::InvalidInput(format!("no CoNLL-U splits in {dir}")))?
            .load(Strictness::Lenient)?,
        None => {
            let spec = SyntheticSpec {
                sentences: 2000,
                profile: MedProfile::Bimodal(0.2, 0.8),
                ..Default::default()
            };
            synthetic_treebank(
                "UD_Synthetic-Bimodal",
                &spec,
                &SyntheticSpec { seed: 1, ..spec },
            )?
        }
    };
    let out = args.next().unwrap_or_else(|| "splits".into());
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let pool = pool_treebank(&treebank)?;
    println!("{}: pool of {} sentences", treebank.name, pool.len());
    for mode in SplitMode::BOTH {
        let result = generate_split(&pool, mode, 42)?;
        let manifest = write_split(&result, &treebank.name, &out)?;
        let (train, dev, test) = result.sentence_counts;
        println!(
            "  {mode}: EDV {:.3e}, SLV {:.3e}, {train}/{dev}/{test} sentences -> {}",
            result.achieved_edv,
            result.achieved_slv,
            manifest.display()
        );
    }
    Ok(())
}
