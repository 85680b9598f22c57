//! Removes the training-size trend from LAS (log-linear), then the test
//! length trend (linear), and checks what is left against EDV.

use edvkit::pipeline::{join_tables, read_las_table, read_measure_report};
use edvkit::statistics::{background_removal, spearman, FitFamily};

fn main() -> edvkit::error::Result<()> {
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");
    let report = read_measure_report(format!("{fixtures}/measurements.csv"))?;
    let (table, _, _) = join_tables(
        &report.rows,
        &read_las_table(format!("{fixtures}/las.csv"))?,
    );
    let (normalized, fits) = background_removal(
        table.column("las")?,
        &[
            (table.column("train_tokens")?, FitFamily::LogLinear),
            (table.column("mean_test_length")?, FitFamily::Linear),
        ],
    )?;
    for (stage, fit) in ["train_tokens", "mean_test_length"].iter().zip(&fits) {
        println!(
            "{stage:<18} {:?}: slope {:+.4} intercept {:+.3}",
            fit.family, fit.slope, fit.intercept
        );
    }
    let r = spearman(table.column("edv")?, &normalized)?;
    println!(
        "normalized LAS ~ EDV: rho {:+.3}, p {:.2e}",
        r.rho, r.p_value
    );
    Ok(())
}
