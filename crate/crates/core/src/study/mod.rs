//! End-to-end study: data, simulation, KPIs, decision matrix, ranking, report.

mod config;
mod report;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

pub use config::{
    DatasetSource, GridSpec, SiteParams, StudyConfig, TierOverride, DEFAULT_SEED, DEFAULT_YEAR,
};
pub use report::{
    kpi_table_csv, load_report_data, markdown_report, RankingRow, ReportData, ReportExperiment,
    SummaryFile,
};

use crate::dispatch::{simulate, trace_csv, SimulationTrace};
use crate::error::{Error, Result};
use crate::kpi::{
    build_decision_matrix, compute_kpis, decision_matrix_csv, kpi_csv, DecisionMatrix, KpiReport,
};
use crate::market::MarketDataset;
use crate::mcdm::{rank, rankings_csv, weights_csv, McdmSettings, RankingOutcome};
use crate::site::ExperimentConfig;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Identifies what produced an output: tool version, config and data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub tool_version: String,
    pub config_sha256: String,
    pub dataset_sha256: String,
}

impl Provenance {
    pub fn new(config: &StudyConfig, dataset: &MarketDataset) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            config_sha256: config.content_hash(),
            dataset_sha256: dataset.fingerprint(),
        }
    }

    pub fn lines(&self) -> Vec<String> {
        vec![
            format!("tool=ptx {}", self.tool_version),
            format!("config_sha256={}", self.config_sha256),
            format!("dataset_sha256={}", self.dataset_sha256),
        ]
    }
}

pub struct ExperimentRun {
    pub config: ExperimentConfig,
    pub trace: SimulationTrace,
    pub kpis: KpiReport,
}

/// Simulates one experiment and reduces it to KPIs. Errors name the
/// experiment and the failing step.
pub fn run_experiment(config: &ExperimentConfig, dataset: &MarketDataset) -> Result<ExperimentRun> {
    let trace = simulate(config, dataset).map_err(|e| e.in_step(&config.id, "simulate"))?;
    let kpis = compute_kpis(&trace, config).map_err(|e| e.in_step(&config.id, "kpi"))?;
    Ok(ExperimentRun {
        config: config.clone(),
        trace,
        kpis,
    })
}

pub struct StudyReport {
    pub provenance: Provenance,
    pub runs: Vec<ExperimentRun>,
    pub matrix: DecisionMatrix,
    pub mcdm: McdmSettings,
    pub outcome: RankingOutcome,
}

impl StudyReport {
    pub fn run(&self, id: &str) -> Option<&ExperimentRun> {
        self.runs.iter().find(|r| r.config.id == id)
    }

    pub fn report_data(&self) -> ReportData {
        let experiments = self
            .runs
            .iter()
            .map(|r| ReportExperiment {
                id: r.config.id.clone(),
                capacity_mw: r.config.electrolyzer.capacity(),
                strategy: r.config.strategy,
                kpis: r.kpis.clone(),
            })
            .collect();
        ReportData::new(self.provenance.lines(), experiments, &self.outcome.ranking)
    }

    pub fn markdown(&self) -> String {
        markdown_report(&self.report_data())
    }
}

/// Runs every experiment of the grid (in parallel) and ranks them.
/// Nothing is written to disk.
pub fn execute_study(config: &StudyConfig, dataset: &MarketDataset) -> Result<StudyReport> {
    let experiments = config.experiments()?;
    let runs = experiments
        .par_iter()
        .map(|e| run_experiment(e, dataset))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<String> = runs.iter().map(|r| r.config.id.clone()).collect();
    let reports: Vec<KpiReport> = runs.iter().map(|r| r.kpis.clone()).collect();
    let matrix = build_decision_matrix(&labels, &reports, &config.orientation_config()?)
        .map_err(|e| e.in_step("study", "decision matrix"))?;
    let outcome = rank(&matrix, &config.mcdm).map_err(|e| e.in_step("study", "ranking"))?;
    Ok(StudyReport {
        provenance: Provenance::new(config, dataset),
        runs,
        matrix,
        mcdm: config.mcdm.clone(),
        outcome,
    })
}

fn write(path: PathBuf, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Per-experiment trace, summary and KPI files.
pub fn write_experiment(
    run: &ExperimentRun,
    dir: &Path,
    provenance: &[String],
) -> Result<Vec<PathBuf>> {
    let id = &run.config.id;
    let mut header = provenance.to_vec();
    header.push(format!("experiment={id}"));
    let summary = SummaryFile {
        provenance: header.clone(),
        config: run.config.clone(),
        summary: run.trace.summary(),
    };
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    Ok(vec![
        write(
            dir.join(format!("trace_{id}.csv")),
            trace_csv(&run.trace, &header),
        )?,
        write(dir.join(format!("summary_{id}.json")), json)?,
        write(
            dir.join(format!("kpis_{id}.csv")),
            kpi_csv(&run.kpis, &header),
        )?,
    ])
}

/// Writes the full output tree. Files are written one at a time in a fixed order.
pub fn write_study(report: &StudyReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let header = report.provenance.lines();
    let mut written = Vec::new();
    for run in &report.runs {
        written.extend(
            write_experiment(run, dir, &header).map_err(|e| e.in_step(&run.config.id, "write"))?,
        );
    }
    let step = |e: Error| e.in_step("study", "write");
    written.push(
        write(
            dir.join("decision_matrix.csv"),
            decision_matrix_csv(&report.matrix, &header),
        )
        .map_err(step)?,
    );
    written.push(
        write(
            dir.join("weights.csv"),
            weights_csv(
                report.outcome.normalized.criteria(),
                &report.outcome.weight_set,
                &header,
            ),
        )
        .map_err(step)?,
    );
    written.push(
        write(
            dir.join("rankings.csv"),
            rankings_csv(&report.outcome.ranking, &header),
        )
        .map_err(step)?,
    );
    written.push(write(dir.join("report.md"), report.markdown()).map_err(step)?);
    Ok(written)
}

/// Loads the dataset, runs the study and writes it to `config.output_dir`.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport> {
    config.validate()?;
    let dataset = config
        .load_dataset()
        .map_err(|e| e.in_step("study", "data"))?;
    let report = execute_study(config, &dataset)?;
    write_study(&report, &config.output_dir)?;
    Ok(report)
}
