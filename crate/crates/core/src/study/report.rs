//! Markdown and CSV renderings of a study, rebuildable from its output directory.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kpi::{read_kpi_csv, Kpi, KpiReport};
use crate::market::comment_block;
use crate::mcdm::{Method, StudyRanking};
use crate::site::{parse_experiment_id, ExperimentConfig, Strategy};

/// Per-experiment inputs of the tier tables.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportExperiment {
    pub id: String,
    pub capacity_mw: f64,
    pub strategy: Strategy,
    pub kpis: KpiReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankingRow {
    pub alternative: String,
    /// `(method name, score, rank)` in column order.
    pub methods: Vec<(String, f64, usize)>,
    pub aggregate_score: f64,
    pub final_position: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportData {
    pub provenance: Vec<String>,
    pub experiments: Vec<ReportExperiment>,
    pub ranking: Vec<RankingRow>,
}

impl ReportData {
    pub fn new(
        provenance: Vec<String>,
        experiments: Vec<ReportExperiment>,
        ranking: &StudyRanking,
    ) -> Self {
        let rows = ranking
            .alternatives
            .iter()
            .enumerate()
            .map(|(i, alt)| RankingRow {
                alternative: alt.clone(),
                methods: ranking
                    .methods
                    .iter()
                    .map(|m| (m.method.name().to_string(), m.scores[i], m.ranks[i]))
                    .collect(),
                aggregate_score: ranking.aggregate_scores[i],
                final_position: ranking.final_positions[i],
            })
            .collect();
        Self {
            provenance,
            experiments,
            ranking: rows,
        }
    }
}

/// Summary file written next to each trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub provenance: Vec<String>,
    pub config: ExperimentConfig,
    pub summary: crate::dispatch::TraceSummary,
}

/// Whole-number rendering as used in the tier tables, without "-0".
fn whole(x: f64) -> String {
    let r = x.round();
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r:.0}")
    }
}

fn cell(kpi: Kpi, value: Option<f64>) -> String {
    match value {
        None => "n/a".into(),
        Some(v) => match kpi {
            Kpi::StorageUtilization | Kpi::TruckUtilization => whole(v * 100.0),
            _ => whole(v),
        },
    }
}

fn method_label(name: &str) -> &str {
    [Method::Topsis, Method::Promethee2, Method::Vikor]
        .into_iter()
        .find(|m| m.name() == name)
        .map_or(name, |m| m.label())
}

fn format_capacity(mw: f64) -> String {
    format!("{mw} MW")
}

pub fn markdown_report(data: &ReportData) -> String {
    let mut out = String::from("# Hydrogen production study\n\n## Provenance\n\n");
    for line in &data.provenance {
        out.push_str(&format!("- {line}\n"));
    }

    // Tiers in order of first appearance.
    let mut tiers: Vec<u8> = Vec::new();
    for e in &data.experiments {
        if let Some((t, _)) = parse_experiment_id(&e.id) {
            if !tiers.contains(&t) {
                tiers.push(t);
            }
        }
    }
    for t in tiers {
        let cols: Vec<&ReportExperiment> = data
            .experiments
            .iter()
            .filter(|e| parse_experiment_id(&e.id).map(|(x, _)| x) == Some(t))
            .collect();
        out.push_str(&format!(
            "\n## Tier {t}: {} electrolyzer\n\n| Metric |",
            format_capacity(cols[0].capacity_mw)
        ));
        for e in &cols {
            out.push_str(&format!(" {} ({}) |", e.strategy, e.id));
        }
        out.push_str("\n|---|");
        out.push_str(&"---:|".repeat(cols.len()));
        out.push('\n');
        for kpi in Kpi::ALL {
            out.push_str(&format!("| {} |", kpi.label()));
            for e in &cols {
                out.push_str(&format!(" {} |", cell(kpi, e.kpis.get(kpi))));
            }
            out.push('\n');
        }
    }

    out.push_str("\n## Ranking\n\n| Experiment | Strategy | Electrolyzer capacity |");
    let methods: Vec<String> = data
        .ranking
        .first()
        .map(|r| r.methods.iter().map(|m| m.0.clone()).collect())
        .unwrap_or_default();
    for m in &methods {
        out.push_str(&format!(" {} rank |", method_label(m)));
    }
    out.push_str(" Average score |\n|---|---|---|");
    out.push_str(&"---:|".repeat(methods.len() + 1));
    out.push('\n');
    let mut rows: Vec<&RankingRow> = data.ranking.iter().collect();
    rows.sort_by_key(|r| r.final_position);
    for r in rows {
        let exp = data.experiments.iter().find(|e| e.id == r.alternative);
        let strategy = exp.map_or("".into(), |e| e.strategy.to_string());
        let capacity = exp.map_or("".into(), |e| format_capacity(e.capacity_mw));
        out.push_str(&format!("| {} | {strategy} | {capacity} |", r.alternative));
        for m in &r.methods {
            out.push_str(&format!(" {} |", m.2));
        }
        out.push_str(&format!(" {:.2} |\n", r.aggregate_score));
    }
    out
}

/// All experiments' KPIs as one table, full precision.
pub fn kpi_table_csv(data: &ReportData) -> String {
    let mut out = comment_block(&data.provenance);
    out.push_str("experiment,");
    out.push_str(&Kpi::ALL.map(Kpi::name).join(","));
    out.push('\n');
    for e in &data.experiments {
        out.push_str(&e.id);
        for kpi in Kpi::ALL {
            out.push(',');
            match e.kpis.get(kpi) {
                Some(v) => out.push_str(&v.to_string()),
                None => out.push_str("NA"),
            }
        }
        out.push('\n');
    }
    out
}

fn comment_lines(text: &str) -> Vec<String> {
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.trim_start_matches('#').trim().to_string())
        .collect()
}

fn parse_rankings(text: &str, file: &str) -> Result<Vec<RankingRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let n = headers.len();
    if n < 3
        || &headers[0] != "alternative"
        || &headers[n - 2] != "aggregate_score"
        || &headers[n - 1] != "final_position"
    {
        return Err(Error::Parse {
            file: file.into(),
            row: 1,
            column: "header".into(),
            message: "expected alternative, <method>_score, <method>_rank, ..., aggregate_score, final_position".into(),
        });
    }
    let methods: Vec<String> = (1..n - 2)
        .step_by(2)
        .map(|i| headers[i].trim_end_matches("_score").to_string())
        .collect();
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record?;
        let row = k as u64 + 2;
        let num = |i: usize| -> Result<f64> {
            record[i].parse::<f64>().map_err(|e| Error::Parse {
                file: file.into(),
                row,
                column: headers[i].to_string(),
                message: e.to_string(),
            })
        };
        let rank = |i: usize| -> Result<usize> {
            record[i].parse::<usize>().map_err(|e| Error::Parse {
                file: file.into(),
                row,
                column: headers[i].to_string(),
                message: e.to_string(),
            })
        };
        rows.push(RankingRow {
            alternative: record[0].to_string(),
            methods: methods
                .iter()
                .enumerate()
                .map(|(m, name)| Ok((name.clone(), num(1 + 2 * m)?, rank(2 + 2 * m)?)))
                .collect::<Result<_>>()?,
            aggregate_score: num(n - 2)?,
            final_position: rank(n - 1)?,
        });
    }
    Ok(rows)
}

/// Rebuilds the report inputs from a study output directory.
pub fn load_report_data(dir: impl AsRef<Path>) -> Result<ReportData> {
    let dir = dir.as_ref();
    let rankings_path = dir.join("rankings.csv");
    let text = fs::read_to_string(&rankings_path).map_err(|e| Error::io(&rankings_path, e))?;
    let provenance = comment_lines(&text);
    let ranking = parse_rankings(&text, &rankings_path.display().to_string())?;

    let matrix_path = dir.join("decision_matrix.csv");
    let matrix = crate::kpi::read_decision_matrix(&matrix_path)?;
    let mut experiments = Vec::new();
    for id in matrix.alternatives() {
        let summary_path = dir.join(format!("summary_{id}.json"));
        let s = fs::read_to_string(&summary_path).map_err(|e| Error::io(&summary_path, e))?;
        let summary: SummaryFile = serde_json::from_str(&s)?;
        let kpis = read_kpi_csv(dir.join(format!("kpis_{id}.csv")))?;
        experiments.push(ReportExperiment {
            id: id.clone(),
            capacity_mw: summary.config.electrolyzer.capacity(),
            strategy: summary.config.strategy,
            kpis,
        });
    }
    Ok(ReportData {
        provenance,
        experiments,
        ranking,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_number_cells() {
        assert_eq!(whole(-0.2), "0");
        assert_eq!(whole(868.4), "868");
        assert_eq!(whole(4986.5), "4987");
        assert_eq!(cell(Kpi::TruckUtilization, Some(0.556)), "56");
        assert_eq!(cell(Kpi::H2Cost, None), "n/a");
    }

    #[test]
    fn rankings_parse() {
        let text = "# a=1\nalternative,topsis_score,topsis_rank,aggregate_score,final_position\nx,0.5,1,2,1\ny,0.25,2,1,2\n";
        assert_eq!(comment_lines(text), vec!["a=1"]);
        let rows = parse_rankings(text, "r.csv").unwrap();
        assert_eq!(rows[1].methods, vec![("topsis".to_string(), 0.25, 2)]);
        assert!(parse_rankings("alternative,x\n", "r.csv").is_err());
        let err = parse_rankings(
            "alternative,topsis_score,topsis_rank,aggregate_score,final_position\nx,oops,1,2,1\n",
            "r.csv",
        )
        .unwrap_err()
        .to_string();
        assert!(
            err.contains("topsis_score") && err.contains("row 2"),
            "{err}"
        );
    }
}
