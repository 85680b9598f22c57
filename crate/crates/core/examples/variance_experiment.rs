//! EDV of random training subsets of several sizes against a fixed test
//! split; the spread shows how stable EDV is under resampling.

use edvkit::splitter::{variance_experiment, SplitOptions};
use edvkit::synthetic::{synthetic_treebank, SyntheticSpec};

fn main() -> edvkit::error::Result<()> {
    let train = SyntheticSpec {
        sentences: 5000,
        ..Default::default()
    };
    let test = SyntheticSpec {
        sentences: 800,
        seed: 1,
        ..Default::default()
    };
    let tb = synthetic_treebank("UD_Synthetic-Large", &train, &test)?;
    let rows = variance_experiment(
        &tb,
        &[500, 1000, 2000, 4000],
        20,
        7,
        SplitOptions::default(),
    )?;
    println!(
        "{:>6} {:>10} {:>10} {:>8}",
        "size", "mean EDV", "std", "std/mean"
    );
    for r in rows {
        println!(
            "{:>6} {:>10.3e} {:>10.3e} {:>7.1}%",
            r.size,
            r.mean_edv,
            r.std_edv,
            100.0 * r.std_edv / r.mean_edv
        );
    }
    Ok(())
}
