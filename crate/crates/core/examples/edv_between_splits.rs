//! EDV and SLV of a treebank directory (`*-ud-{train,test}.conllu`), under
//! both EDV conventions.
//!
//! cargo run --example edv_between_splits -- path/to/UD_Treebank

use edvkit::conllu::{Strictness, TreebankSource};
use edvkit::displacement::Support;
use edvkit::divergence::{edv_with, slv_with, EdvConvention};
use edvkit::error::{Error, Result};
use edvkit::synthetic::{synthetic_treebank, MedProfile, SyntheticSpec};

fn main() -> Result<()> {
    let treebank = match std::env::args().nth(1) {
        Some(dir) => TreebankSource::from_dir(&dir)?
            .ok_or_else(|| Error::InvalidInput(format!("no CoNLL-U splits in {dir}")))?
            .load(Strictness::Lenient)?,
        None => {
            println!("no directory given, using a synthetic treebank");
            let train = SyntheticSpec {
                sentences: 800,
                ..Default::default()
            };
            let test = SyntheticSpec {
                sentences: 200,
                profile: MedProfile::Fixed(0.6),
                seed: 1,
                ..Default::default()
            };
            synthetic_treebank("UD_Synthetic-Example", &train, &test)?
        }
    };
    println!("{}", treebank.display_name());
    for convention in [EdvConvention::Grid, EdvConvention::MassValues] {
        println!(
            "  {:<11} EDV {:.3e}  SLV {:.3e}",
            convention.as_str(),
            edv_with(&treebank, Support::default(), convention)?,
            slv_with(&treebank, convention)?
        );
    }
    Ok(())
}
