//! Normality checks, Spearman and partial Spearman correlations on the
//! bundled measurement + LAS fixture.
//!
//! cargo run --example correlation_battery [MEASUREMENTS_CSV LAS_CSV]

use edvkit::pipeline::{join_tables, read_las_table, read_measure_report};
use edvkit::statistics::{partial_spearman, shapiro_wilk, spearman, CorrelationResult};

fn show(label: &str, r: &CorrelationResult) {
    println!(
        "{label:<40} rho {:+.3}  CI95 [{:+.2}, {:+.2}]  adj rho2 {:.3}  p {:.2e}  power {:.3}",
        r.rho, r.ci95.0, r.ci95.1, r.adj_rho_squared, r.p_value, r.power
    );
}

fn main() -> edvkit::error::Result<()> {
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");
    let mut args = std::env::args().skip(1);
    let measurements = args
        .next()
        .unwrap_or_else(|| format!("{fixtures}/measurements.csv"));
    let las = args.next().unwrap_or_else(|| format!("{fixtures}/las.csv"));

    let report = read_measure_report(&measurements)?;
    let (table, _, unmatched) = join_tables(&report.rows, &read_las_table(&las)?);
    println!(
        "{} treebanks joined, unmatched LAS rows: {unmatched:?}\n",
        table.treebanks.len()
    );
    let col = |name: &str| table.column(name);

    for v in ["las", "train_tokens", "edv", "mean_test_length"] {
        let r = shapiro_wilk(col(v)?)?;
        println!(
            "Shapiro-Wilk {v:<18} W {:.3}  p {:.2e}  normal: {}",
            r.w, r.p_value, r.normal_at_005
        );
    }
    println!();
    for v in ["train_tokens", "mean_test_length", "edv", "slv"] {
        show(&format!("{v} ~ las"), &spearman(col(v)?, col("las")?)?);
    }
    show(
        "edv ~ las | train_tokens",
        &partial_spearman(
            col("edv")?,
            col("las")?,
            &[("train_tokens", col("train_tokens")?)],
        )?,
    );
    show(
        "edv ~ las | train_tokens, mean_test_length",
        &partial_spearman(
            col("edv")?,
            col("las")?,
            &[
                ("train_tokens", col("train_tokens")?),
                ("mean_test_length", col("mean_test_length")?),
            ],
        )?,
    );
    Ok(())
}
