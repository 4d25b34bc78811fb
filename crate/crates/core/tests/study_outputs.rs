use std::fs;

use ptx_core::dispatch::read_trace_csv;
use ptx_core::kpi::{compute_kpis, read_decision_matrix, read_kpi_csv};
use ptx_core::market::{generate_synthetic, write_dataset, SyntheticParams};
use ptx_core::site::Strategy;
use ptx_core::study::{
    execute_study, load_report_data, markdown_report, run_experiment, run_study, DatasetSource,
    GridSpec, StudyConfig,
};
use ptx_core::Error;

fn single_tier(dir: &std::path::Path) -> StudyConfig {
    StudyConfig {
        grid: GridSpec {
            tiers: vec![1],
            strategies: Strategy::ALL.to_vec(),
        },
        output_dir: dir.to_path_buf(),
        ..StudyConfig::default()
    }
}

#[test]
fn grid_filter_limits_experiments() {
    let tmp = tempfile::tempdir().unwrap();
    let config = single_tier(tmp.path());
    let report = run_study(&config).unwrap();
    assert_eq!(report.runs.len(), 3);
    assert_eq!(report.matrix.n_alternatives(), 3);
    assert_eq!(report.matrix.n_criteria(), 13);
    let traces = fs::read_dir(tmp.path())
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .starts_with("trace_")
        })
        .count();
    assert_eq!(traces, 3);
}

#[test]
fn full_grid_writes_every_experiment() {
    let tmp = tempfile::tempdir().unwrap();
    let config = StudyConfig {
        output_dir: tmp.path().to_path_buf(),
        ..StudyConfig::default()
    };
    let report = run_study(&config).unwrap();
    let ids: Vec<&str> = report.runs.iter().map(|r| r.config.id.as_str()).collect();
    assert_eq!(
        ids,
        ["1.1", "1.2", "1.3", "2.1", "2.2", "2.3", "3.1", "3.2", "3.3"]
    );
    for id in ids {
        for prefix in ["trace", "summary", "kpis"] {
            let ext = if prefix == "summary" { "json" } else { "csv" };
            assert!(
                tmp.path().join(format!("{prefix}_{id}.{ext}")).exists(),
                "{prefix}_{id}"
            );
        }
    }
    for f in [
        "decision_matrix.csv",
        "weights.csv",
        "rankings.csv",
        "report.md",
    ] {
        let text = fs::read_to_string(tmp.path().join(f)).unwrap();
        if f != "report.md" {
            assert!(text.starts_with("# tool=ptx "), "{f}");
            assert!(
                text.contains(&format!("# config_sha256={}", config.content_hash())),
                "{f}"
            );
        }
    }
}

#[test]
fn report_rebuilds_from_disk() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run_study(&single_tier(tmp.path())).unwrap();
    let data = load_report_data(tmp.path()).unwrap();
    let written = fs::read_to_string(tmp.path().join("report.md")).unwrap();
    assert_eq!(markdown_report(&data), written);
    assert_eq!(report.markdown(), written);
    assert!(written.contains("## Tier 1: 10 MW electrolyzer"));
    assert!(written.contains("## Ranking"));
}

#[test]
fn trace_round_trip_reproduces_kpis() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run_study(&single_tier(tmp.path())).unwrap();
    for run in &report.runs {
        let id = &run.config.id;
        let trace = read_trace_csv(tmp.path().join(format!("trace_{id}.csv"))).unwrap();
        assert_eq!(trace.records, run.trace.records, "{id}");
        let kpis = compute_kpis(&trace, &run.config).unwrap();
        assert_eq!(kpis, run.kpis, "{id}");
        assert_eq!(
            read_kpi_csv(tmp.path().join(format!("kpis_{id}.csv"))).unwrap(),
            run.kpis
        );
    }
    let matrix = read_decision_matrix(tmp.path().join("decision_matrix.csv")).unwrap();
    assert_eq!(matrix, report.matrix);
}

#[test]
fn files_source_matches_synthetic() {
    let tmp = tempfile::tempdir().unwrap();
    let data_dir = tmp.path().join("data");
    let dataset = generate_synthetic(42, 2024, &SyntheticParams::default());
    write_dataset(&dataset, &data_dir, &[]).unwrap();

    let synthetic = single_tier(&tmp.path().join("a"));
    let files = StudyConfig {
        dataset: DatasetSource::Files { dir: data_dir },
        ..single_tier(&tmp.path().join("b"))
    };
    let a = execute_study(&synthetic, &synthetic.load_dataset().unwrap()).unwrap();
    let b = execute_study(&files, &files.load_dataset().unwrap()).unwrap();
    assert_eq!(a.provenance.dataset_sha256, b.provenance.dataset_sha256);
    assert_eq!(a.matrix, b.matrix);
}

#[test]
fn config_hash_ignores_output_location() {
    let a = single_tier(std::path::Path::new("x"));
    let b = single_tier(std::path::Path::new("y"));
    assert_eq!(a.content_hash(), b.content_hash());
    let c = StudyConfig {
        base_variable_cost: 5.0,
        ..a.clone()
    };
    assert_ne!(a.content_hash(), c.content_hash());
}

#[test]
fn errors_name_experiment_and_step() {
    let config = StudyConfig::default();
    let mut experiment = config.experiment("2.3").unwrap();
    experiment.storage.capacity = 0.0;
    let dataset = config.load_dataset().unwrap();
    let err = run_experiment(&experiment, &dataset).err().unwrap();
    assert!(matches!(err, Error::Step { .. }));
    let msg = err.to_string();
    assert!(
        msg.contains("experiment 2.3") && msg.contains("simulate"),
        "{msg}"
    );

    let unknown = config.experiment("4.1").unwrap_err().to_string();
    assert!(unknown.contains("4.1"), "{unknown}");
}

#[test]
fn config_toml_round_trip() {
    let config = single_tier(std::path::Path::new("out"));
    let text = config.to_toml().unwrap();
    assert_eq!(StudyConfig::from_toml(&text, "study.toml").unwrap(), config);
    let err = StudyConfig::from_toml("bogus_key = 1\n", "study.toml")
        .unwrap_err()
        .to_string();
    assert!(err.contains("bogus_key"), "{err}");
}

#[test]
fn sample_config_spells_out_the_defaults() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/study.toml");
    let config = StudyConfig::load(&path).unwrap();
    assert!(config.output_dir.ends_with("study_output"));
    let defaults = StudyConfig {
        output_dir: config.output_dir.clone(),
        ..StudyConfig::default()
    };
    assert_eq!(config, defaults);
}
