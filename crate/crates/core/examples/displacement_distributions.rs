//! Train/test displacement distributions of two synthetic treebanks: one
//! whose splits share a head-direction profile and one whose splits do not.
//!
//! cargo run --example displacement_distributions [OUT_DIR]

use std::fs::File;

use edvkit::conllu::Split;
use edvkit::displacement::{displacement_distribution, med, Support};
use edvkit::divergence::{vaserstein, EdvConvention};
use edvkit::synthetic::{synthetic_treebank, MedProfile, SyntheticSpec};

fn main() -> edvkit::error::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| ".".into());
    let spec = |profile, seed| SyntheticSpec {
        sentences: 500,
        profile,
        seed,
        ..Default::default()
    };
    let cases = [
        (
            "matched",
            spec(MedProfile::Fixed(0.5), 1),
            spec(MedProfile::Fixed(0.5), 2),
        ),
        (
            "shifted",
            spec(MedProfile::Fixed(0.35), 3),
            spec(MedProfile::Fixed(0.65), 4),
        ),
    ];
    for (name, train_spec, test_spec) in cases {
        let tb = synthetic_treebank(name, &train_spec, &test_spec)?;
        let support = Support::default();
        let train = displacement_distribution(tb.require(Split::Train)?, support)?;
        let test = displacement_distribution(tb.require(Split::Test)?, support)?;
        let mean_med = |split| -> edvkit::error::Result<f64> {
            let s = tb.require(split)?;
            Ok(s.iter()
                .map(|s| med(s).map(|m| m.value))
                .sum::<edvkit::error::Result<f64>>()?
                / s.len() as f64)
        };
        println!(
            "{name}: EDV {:.3e} (mass-values {:.3e}), mean MED train {:+.3} test {:+.3}, coverage {:.4}",
            vaserstein(&train, &test)?,
            edvkit::divergence::distance(&train, &test, EdvConvention::MassValues)?,
            mean_med(Split::Train)?,
            mean_med(Split::Test)?,
            train.coverage()
        );
        for (split, dist) in [("train", &train), ("test", &test)] {
            let path = format!("{out}/{name}-{split}-displacements.csv");
            dist.write_csv(File::create(&path).map_err(|e| edvkit::error::Error::io(&path, e))?)?;
        }
    }
    println!("distributions written to {out}");
    Ok(())
}
