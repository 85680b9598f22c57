//! The `measure` + `analyze` pipeline as a library call: measure a UD root,
//! join a LAS table, run the battery and write CSV reports.
//!
//! cargo run --example analysis_pipeline -- UD_ROOT LAS_CSV [OUT_DIR]
//!
//! Without arguments the bundled measurement fixture is analysed instead.

use std::path::PathBuf;

use edvkit::pipeline::{
    analyze, measure, write_analysis_report, write_measure_report, AnalysisConfig,
};

fn main() -> edvkit::error::Result<()> {
    let fixtures = PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures"));
    let mut args = std::env::args().skip(1);
    let mut config = AnalysisConfig {
        output_dir: PathBuf::from("analysis-out"),
        ..Default::default()
    };
    match (args.next(), args.next()) {
        (Some(root), Some(las)) => {
            config.ud_root = Some(root.into());
            config.las_table = Some(las.into());
            if let Some(out) = args.next() {
                config.output_dir = out.into();
            }
            let measurements = measure(&config)?;
            write_measure_report(&measurements, &config)?;
        }
        _ => {
            config.measurements = Some(fixtures.join("measurements.csv"));
            config.las_table = Some(fixtures.join("las.csv"));
        }
    }
    let report = analyze(&config)?;
    for c in report.partial_correlations.iter() {
        println!(
            "edv ~ las [{:<7}] covariates {:<32} rho {:+.3} p {:.2e} n {}",
            c.subset,
            format!("{:?}", c.result.covariates),
            c.result.rho,
            c.result.p_value,
            c.result.n
        );
    }
    for path in write_analysis_report(&report, &config)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
