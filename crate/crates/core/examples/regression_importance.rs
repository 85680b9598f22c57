//! OLS regressions of LAS with LMG relative importance on the bundled
//! fixture, and a prediction from the fitted model.

use edvkit::pipeline::{join_tables, read_las_table, read_measure_report, REGRESSION_MODELS};
use edvkit::statistics::ols_regression;

fn main() -> edvkit::error::Result<()> {
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");
    let report = read_measure_report(format!("{fixtures}/measurements.csv"))?;
    let (table, _, _) = join_tables(
        &report.rows,
        &read_las_table(format!("{fixtures}/las.csv"))?,
    );
    let las = table.column("las")?;
    for model in REGRESSION_MODELS {
        let predictors: Vec<(&str, &[f64])> = model
            .iter()
            .map(|p| table.column(p).map(|c| (*p, c)))
            .collect::<edvkit::error::Result<_>>()?;
        let r = ols_regression(las, &predictors)?;
        println!(
            "LAS ~ {}  (R2 {:.3}, adj R2 {:.3}, n {})",
            model.join(" + "),
            r.r_squared,
            r.adj_r_squared,
            r.n
        );
        for c in &r.coefficients {
            println!(
                "    {:<18} {:>+10.3}  p {:.2e}  importance {:>5.1}%",
                c.name,
                c.estimate,
                c.p_value,
                r.importance(&c.name).unwrap_or(f64::NAN)
            );
        }
        if model.len() == 3 {
            // 50K training tokens, 18-token test sentences, EDV 1e-3.
            let x = [50_000f64.ln(), 18.0, 1e-3];
            let y = r.intercept
                + r.coefficients
                    .iter()
                    .zip(x)
                    .map(|(c, v)| c.estimate * v)
                    .sum::<f64>();
            println!("    predicted LAS for a new treebank: {y:.2}");
        }
    }
    Ok(())
}
