//! EDV per sentence length, written as CSV to stdout.

use edvkit::displacement::Support;
use edvkit::divergence::EdvConvention;
use edvkit::synthetic::{synthetic_treebank, MedProfile, SyntheticSpec};
use edvkit::treebank_stats::{binned_edv, LengthBins};

fn main() -> edvkit::error::Result<()> {
    let train = SyntheticSpec {
        sentences: 3000,
        max_len: 30,
        ..Default::default()
    };
    let test = SyntheticSpec {
        sentences: 800,
        max_len: 30,
        profile: MedProfile::Fixed(0.6),
        seed: 9,
        ..Default::default()
    };
    let tb = synthetic_treebank("UD_Synthetic-Binned", &train, &test)?;
    let series = binned_edv(
        &tb,
        LengthBins::default(),
        Support::default(),
        EdvConvention::Grid,
    )?;
    let mut w = csv::Writer::from_writer(std::io::stdout());
    series.write_csv(&tb.name, &mut w, true)?;
    w.flush()
        .map_err(|e| edvkit::error::Error::io("<stdout>", e))?;
    eprintln!("lengths without both splits: {:?}", series.missing());
    Ok(())
}
