//! Writes a small UD-style directory tree of synthetic treebanks, handy for
//! trying the `edvkit` commands without a UD release.
//!
//! cargo run --example synthetic_ud_root -- OUT_DIR

use edvkit::conllu::write_file;
use edvkit::error::{Error, Result};
use edvkit::synthetic::{synthetic_treebank, MedProfile, SyntheticSpec};

fn main() -> Result<()> {
    let root = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "synthetic-ud".into());
    let profiles = [
        (
            "UD_Synthetic-Even",
            MedProfile::Fixed(0.5),
            MedProfile::Fixed(0.5),
            300,
        ),
        (
            "UD_Synthetic-Left",
            MedProfile::Fixed(0.3),
            MedProfile::Fixed(0.35),
            150,
        ),
        (
            "UD_Synthetic-Right",
            MedProfile::Fixed(0.7),
            MedProfile::Fixed(0.6),
            1200,
        ),
        (
            "UD_Synthetic-Mixed",
            MedProfile::Bimodal(0.2, 0.8),
            MedProfile::Fixed(0.8),
            80,
        ),
        (
            "UD_Synthetic-Rich",
            MedProfile::Fixed(0.45),
            MedProfile::Fixed(0.5),
            3000,
        ),
    ];
    for (i, (name, train, test, lemmas)) in profiles.into_iter().enumerate() {
        let spec = |profile, sentences, seed| SyntheticSpec {
            sentences,
            profile,
            lemmas,
            seed,
            ..Default::default()
        };
        let tb = synthetic_treebank(
            name,
            &spec(train, 600 + 200 * i, 2 * i as u64),
            &spec(test, 150, 2 * i as u64 + 1),
        )?;
        let dir = std::path::Path::new(&root).join(name);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let stem = name.trim_start_matches("UD_Synthetic-").to_lowercase();
        for (split, sentences) in &tb.splits {
            write_file(
                sentences,
                dir.join(format!("xx_{stem}-ud-{}.conllu", split.as_str())),
            )?;
        }
    }
    println!("wrote {} treebanks under {root}", profiles.len());
    Ok(())
}
