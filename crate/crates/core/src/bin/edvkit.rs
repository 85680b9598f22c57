//! `edvkit measure|analyze|split|variance|eval-las`
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use edvkit::conllu::{LabelGranularity, Strictness};
use edvkit::displacement::Support;
use edvkit::divergence::EdvConvention;
use edvkit::error::Result;
use edvkit::morphology::CaseHandling;
use edvkit::pipeline::{self, AnalysisConfig, OutputFormat, UD_ROOT_ENV};
use edvkit::splitter::{SplitMode, DEFAULT_VARIANCE_REPEATS, DEFAULT_VARIANCE_SIZES};
use edvkit::statistics::FitFamily;
use edvkit::treebank_stats::{LengthBins, PairConvention};

#[derive(Parser)]
#[command(
    name = "edvkit",
    version,
    about = "Edge displacement divergence for dependency treebanks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-treebank EDV, SLV, size, crossing and morphology measurements.
    Measure(Common),
    /// Normality, correlation, regression and background-removal analysis against LAS.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// CSV with `treebank` and `las` columns.
        #[arg(long)]
        las_table: PathBuf,
        /// Reuse a measurement report instead of measuring the UD root.
        #[arg(long)]
        measurements: Option<PathBuf>,
    },
    /// Minimum/maximum-EDV resplit of one treebank.
    Split {
        #[command(flatten)]
        common: Common,
        /// Treebank directory or name under the UD root.
        treebank: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
    },
    /// EDV spread of random train/test subsets at several sample sizes.
    Variance {
        #[command(flatten)]
        common: Common,
        treebank: String,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_VARIANCE_SIZES)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_VARIANCE_REPEATS)]
        repeats: usize,
    },
    /// Labelled attachment score of predicted CoNLL-U against gold.
    EvalLas {
        #[command(flatten)]
        common: Common,
        gold: PathBuf,
        predicted: PathBuf,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Root of an extracted UD release.
    #[arg(long, env = UD_ROOT_ENV)]
    ud_root: Option<PathBuf>,
    #[arg(short, long, default_value = "edvkit-out")]
    output_dir: PathBuf,
    #[arg(long, default_value_t = -30, allow_hyphen_values = true)]
    support_min: i64,
    #[arg(long, default_value_t = 30)]
    support_max: i64,
    #[arg(long, default_value_t = 3)]
    bins_min: usize,
    #[arg(long, default_value_t = 30)]
    bins_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long, value_enum, default_value_t = LabelArg::Universal)]
    labels: LabelArg,
    /// Background-removal family for a covariate, e.g. `train_tokens=log_linear`.
    #[arg(long = "fit-family", value_parser = parse_fit_family)]
    fit_families: Vec<(String, FitFamily)>,
    #[arg(long, value_enum, default_value_t = ConventionArg::Grid)]
    edv_convention: ConventionArg,
    #[arg(long, value_enum, default_value_t = PairsArg::VertexDisjoint)]
    crossing_pairs: PairsArg,
    /// File listing treebank names to keep, one per line.
    #[arg(long)]
    filter: Option<PathBuf>,
    /// Fail on the first malformed sentence instead of skipping it.
    #[arg(long)]
    strict: bool,
    /// Lowercase forms and lemmas before morphology counts.
    #[arg(long)]
    lowercase: bool,
    #[arg(long, default_value_t = 0)]
    min_train_sentences: usize,
    /// Worker threads (default: all cores).
    #[arg(short, long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum LabelArg {
    Full,
    Universal,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Grid,
    MassValues,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairsArg {
    VertexDisjoint,
    AllPairs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Min,
    Max,
    Both,
}

fn parse_fit_family(s: &str) -> std::result::Result<(String, FitFamily), String> {
    let (name, family) = s.split_once('=').ok_or("expected COVARIATE=FAMILY")?;
    let family = family.parse::<FitFamily>().map_err(|e| e.to_string())?;
    Ok((name.trim().to_string(), family))
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Measure(c) => c,
            Command::Analyze { common, .. }
            | Command::Split { common, .. }
            | Command::Variance { common, .. }
            | Command::EvalLas { common, .. } => common,
        }
    }
}

impl Common {
    fn clone_config(&self) -> AnalysisConfig {
        self.clone().into_config()
    }

    fn into_config(self) -> AnalysisConfig {
        AnalysisConfig {
            ud_root: self.ud_root,
            output_dir: self.output_dir,
            support: Support::new(self.support_min, self.support_max),
            bins: LengthBins {
                min: self.bins_min,
                max: self.bins_max,
            },
            seed: self.seed,
            format: match self.format {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
            },
            las_table: None,
            measurements: None,
            label_granularity: match self.labels {
                LabelArg::Full => LabelGranularity::Full,
                LabelArg::Universal => LabelGranularity::Universal,
            },
            fit_families: self.fit_families.into_iter().collect::<BTreeMap<_, _>>(),
            edv_convention: match self.edv_convention {
                ConventionArg::Grid => EdvConvention::Grid,
                ConventionArg::MassValues => EdvConvention::MassValues,
            },
            pair_convention: match self.crossing_pairs {
                PairsArg::VertexDisjoint => PairConvention::VertexDisjoint,
                PairsArg::AllPairs => PairConvention::AllPairs,
            },
            filter: self.filter,
            strictness: if self.strict {
                Strictness::Strict
            } else {
                Strictness::Lenient
            },
            case: if self.lowercase {
                CaseHandling::Lowercase
            } else {
                CaseHandling::Exact
            },
            min_train_sentences: self.min_train_sentences,
            jobs: self.jobs,
        }
    }
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Measure(common) => {
            let config = common.into_config();
            let report = pipeline::measure(&config)?;
            for (name, reason) in &report.skipped {
                eprintln!("skipped {name}: {reason}");
            }
            crate::report(&pipeline::write_measure_report(&report, &config)?);
        }
        Command::Analyze {
            common,
            las_table,
            measurements,
        } => {
            let mut config = common.into_config();
            config.las_table = Some(las_table);
            config.measurements = measurements;
            let report = pipeline::analyze(&config)?;
            for name in &report.unmatched_measurements {
                eprintln!("no LAS for {name}");
            }
            for name in &report.unmatched_las {
                eprintln!("LAS row without measurements: {name}");
            }
            crate::report(&pipeline::write_analysis_report(&report, &config)?);
        }
        Command::Split {
            common,
            treebank,
            mode,
        } => {
            let config = common.into_config();
            let tb = pipeline::resolve_treebank(&config, &treebank)?;
            let modes: &[SplitMode] = match mode {
                ModeArg::Min => &[SplitMode::MinEdv],
                ModeArg::Max => &[SplitMode::MaxEdv],
                ModeArg::Both => &SplitMode::BOTH,
            };
            for (result, manifest) in pipeline::split(&config, &tb, modes)? {
                eprintln!(
                    "{} {}: EDV {}",
                    tb.name,
                    result.mode,
                    pipeline::sci(result.achieved_edv)
                );
                println!("{}", manifest.display());
            }
        }
        Command::Variance {
            common,
            treebank,
            sizes,
            repeats,
        } => {
            let config = common.into_config();
            let tb = pipeline::resolve_treebank(&config, &treebank)?;
            let report = pipeline::variance(&config, &tb, &sizes, repeats)?;
            for row in &report.rows {
                eprintln!(
                    "{}: {} ({})",
                    row.size,
                    pipeline::sci(row.mean_edv),
                    pipeline::sci(row.std_edv)
                );
            }
            crate::report(&pipeline::write_variance_report(&report, &config)?);
        }
        Command::EvalLas {
            common,
            gold,
            predicted,
        } => {
            let config = common.into_config();
            let las = pipeline::eval_las(&config, &gold, &predicted)?;
            println!("LAS {:.4} ({}/{})", las.las, las.correct, las.total);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(e) = cli.command.common().clone_config().validate() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
