use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use ptx_core::kpi::read_decision_matrix;
use ptx_core::market::{generate_synthetic, write_dataset, SyntheticParams};
use ptx_core::mcdm::{
    rank, rankings_csv, weights_csv, EntropyBasis, McdmSettings, PreferenceKind, StudyRanking,
    TopsisNormalization, WeightScheme, DEFAULT_LINEAR_THRESHOLD, DEFAULT_VIKOR_V,
};
use ptx_core::study::{
    kpi_table_csv, load_report_data, markdown_report, run_experiment, run_study, sha256_hex,
    write_experiment, Provenance, StudyConfig, TOOL_VERSION,
};

#[derive(Parser)]
#[command(
    name = "ptx",
    version,
    about = "Hydrogen site simulation and multi-criteria ranking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic hourly dataset (spot, CO2, PV, wind, tariffs).
    GenData {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 2024)]
        year: i32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a single experiment from a study config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Experiment id such as 1.2 (tier.strategy).
        #[arg(long)]
        experiment: String,
    },
    /// Run every experiment of a study config and rank them.
    Study {
        #[arg(long)]
        config: PathBuf,
    },
    /// Rank the alternatives of a decision-matrix CSV.
    Rank {
        #[arg(long)]
        matrix: PathBuf,
        /// VIKOR strategy weight in [0, 1].
        #[arg(long, default_value_t = DEFAULT_VIKOR_V)]
        v: f64,
        #[arg(long, value_enum, default_value_t = Preference::Usual)]
        preference: Preference,
        /// Linear preference threshold on normalized differences.
        #[arg(long, default_value_t = DEFAULT_LINEAR_THRESHOLD)]
        threshold: f64,
        #[arg(long, value_enum, default_value_t = Weights::Hybrid)]
        weights: Weights,
        #[arg(long, value_enum, default_value_t = Basis::Raw)]
        entropy_basis: Basis,
        #[arg(long, value_enum, default_value_t = TopsisNorm::MinMax)]
        topsis_normalization: TopsisNorm,
        /// Directory for rankings.csv and weights.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Re-render the report of a finished study.
    Report {
        #[arg(long)]
        study: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preference {
    Usual,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum Weights {
    Equal,
    Entropy,
    Hybrid,
}

#[derive(Clone, Copy, ValueEnum)]
enum Basis {
    Raw,
    Normalized,
}

#[derive(Clone, Copy, ValueEnum)]
enum TopsisNorm {
    MinMax,
    Vector,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Md,
    Csv,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn gen_data(seed: u64, year: i32, out: &Path) -> Result<()> {
    let dataset = generate_synthetic(seed, year, &SyntheticParams::default());
    let header = vec![
        format!("tool=ptx {TOOL_VERSION}"),
        format!("synthetic seed={seed} year={year}"),
    ];
    let paths = write_dataset(&dataset, out, &header)?;
    println!(
        "wrote {} hours for {year} to {}",
        dataset.hours(),
        out.display()
    );
    println!("dataset_sha256={}", dataset.fingerprint());
    for p in [
        &paths.spot,
        &paths.co2,
        &paths.pv_cf,
        &paths.wind_cf,
        &paths.tariffs,
    ] {
        println!("  {}", p.display());
    }
    Ok(())
}

fn simulate(config_path: &Path, id: &str) -> Result<()> {
    let config = StudyConfig::load(config_path)?;
    let experiment = config.experiment(id)?;
    let dataset = config.load_dataset()?;
    let run = run_experiment(&experiment, &dataset)?;
    fs::create_dir_all(&config.output_dir)
        .with_context(|| format!("creating {}", config.output_dir.display()))?;
    let header = Provenance::new(&config, &dataset).lines();
    let files = write_experiment(&run, &config.output_dir, &header)?;
    let s = run.trace.summary();
    println!("experiment {id}: {} hours", s.hours);
    println!("  hydrogen produced   {:.1} kg", s.h2_produced_kg);
    println!("  hydrogen delivered  {:.1} kg", s.h2_delivered_kg);
    println!("  grid purchased      {:.1} MWh", s.grid_purchased_mwh);
    println!("  renewables sold     {:.1} MWh", s.re_sold_mwh);
    println!("  unserved demand     {:.1} kg", s.unserved_demand_kg);
    for f in files {
        println!("  wrote {}", f.display());
    }
    Ok(())
}

fn study(config_path: &Path) -> Result<()> {
    let config = StudyConfig::load(config_path)?;
    let report = run_study(&config)?;
    print_ranking(&report.outcome.ranking);
    println!(
        "wrote {} experiments to {}",
        report.runs.len(),
        config.output_dir.display()
    );
    Ok(())
}

fn print_ranking(ranking: &StudyRanking) {
    print!("{:<12}", "alternative");
    for m in &ranking.methods {
        print!(" {:>12}", m.method.label());
    }
    println!(" {:>9} {:>8}", "aggregate", "position");
    for i in ranking.order() {
        print!("{:<12}", ranking.alternatives[i]);
        for m in &ranking.methods {
            print!(" {:>12}", m.ranks[i]);
        }
        println!(
            " {:>9.2} {:>8}",
            ranking.aggregate_scores[i], ranking.final_positions[i]
        );
    }
}

#[allow(clippy::too_many_arguments)]
fn rank_matrix(
    matrix_path: &Path,
    v: f64,
    preference: Preference,
    threshold: f64,
    weights: Weights,
    basis: Basis,
    topsis_norm: TopsisNorm,
    out: &Path,
) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        bail!("--v {v} outside [0, 1]");
    }
    let bytes =
        fs::read(matrix_path).with_context(|| format!("reading {}", matrix_path.display()))?;
    let matrix = read_decision_matrix(matrix_path)?;
    let settings = McdmSettings {
        weights: match weights {
            Weights::Equal => WeightScheme::Equal,
            Weights::Entropy => WeightScheme::Entropy,
            Weights::Hybrid => WeightScheme::Hybrid,
        },
        entropy_basis: match basis {
            Basis::Raw => EntropyBasis::Raw,
            Basis::Normalized => EntropyBasis::Normalized,
        },
        preference: match preference {
            Preference::Usual => PreferenceKind::Usual,
            Preference::Linear => PreferenceKind::Linear,
        },
        linear_threshold: threshold,
        vikor_v: v,
        topsis_normalization: match topsis_norm {
            TopsisNorm::MinMax => TopsisNormalization::MinMax,
            TopsisNorm::Vector => TopsisNormalization::Vector,
        },
    };
    let outcome = rank(&matrix, &settings)?;
    let header = vec![
        format!("tool=ptx {TOOL_VERSION}"),
        format!("matrix_sha256={}", sha256_hex(&bytes)),
    ];
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_file(
        &out.join("rankings.csv"),
        &rankings_csv(&outcome.ranking, &header),
    )?;
    write_file(
        &out.join("weights.csv"),
        &weights_csv(outcome.normalized.criteria(), &outcome.weight_set, &header),
    )?;
    print_ranking(&outcome.ranking);
    Ok(())
}

fn report(dir: &Path, format: Format, out: Option<&Path>) -> Result<()> {
    let data = load_report_data(dir)?;
    let text = match format {
        Format::Md => markdown_report(&data),
        Format::Csv => kpi_table_csv(&data),
    };
    match out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenData { seed, year, out } => gen_data(seed, year, &out),
        Command::Simulate { config, experiment } => simulate(&config, &experiment),
        Command::Study { config } => study(&config),
        Command::Rank {
            matrix,
            v,
            preference,
            threshold,
            weights,
            entropy_basis,
            topsis_normalization,
            out,
        } => rank_matrix(
            &matrix,
            v,
            preference,
            threshold,
            weights,
            entropy_basis,
            topsis_normalization,
            &out,
        ),
        Command::Report { study, format, out } => report(&study, format, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
