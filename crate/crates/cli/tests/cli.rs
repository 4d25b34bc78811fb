use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ptx(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptx"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/reference_kpis.csv")
}

fn write_config(dir: &Path, output_dir: &str, extra: &str) -> PathBuf {
    let path = dir.join("study.toml");
    fs::write(
        &path,
        format!(
            "output_dir = \"{output_dir}\"\n{extra}\n[dataset]\nsource = \"synthetic\"\nseed = 42\nyear = 2024\n"
        ),
    )
    .unwrap();
    path
}

#[test]
fn rank_reference_matrix() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ranked");
    let o = ptx(
        &[
            "rank",
            "--matrix",
            fixture().to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let first = stdout(&o).lines().nth(1).unwrap().to_string();
    assert!(first.starts_with("1.2"), "{first}");
    assert!(stdout(&o).lines().last().unwrap().starts_with("3.1"));

    let rankings = fs::read_to_string(out.join("rankings.csv")).unwrap();
    assert!(rankings.contains("# matrix_sha256="));
    assert!(rankings.contains("alternative,topsis_score,topsis_rank,promethee_score,promethee_rank,vikor_score,vikor_rank,aggregate_score,final_position"));
    assert!(fs::read_to_string(out.join("weights.csv"))
        .unwrap()
        .contains("hybrid"));
}

#[test]
fn rank_rejects_bad_options() {
    let tmp = tempfile::tempdir().unwrap();
    let m = fixture();
    let o = ptx(
        &["rank", "--matrix", m.to_str().unwrap(), "--v", "1.5"],
        tmp.path(),
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("--v"), "{}", stderr(&o));

    let o = ptx(&["rank", "--matrix", "missing.csv"], tmp.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("missing.csv"));
}

#[test]
fn rank_linear_preference_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ptx(
        &[
            "rank",
            "--matrix",
            fixture().to_str().unwrap(),
            "--preference",
            "linear",
            "--threshold",
            "0.3",
            "--weights",
            "entropy",
            "--entropy-basis",
            "normalized",
            "--topsis-normalization",
            "vector",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(tmp.path().join("rankings.csv").exists());
}

#[test]
fn simulate_unknown_experiment_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "out", "");
    let o = ptx(
        &[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--experiment",
            "7.4",
        ],
        tmp.path(),
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("7.4"), "{}", stderr(&o));
}

#[test]
fn simulate_writes_experiment_files() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "out", "");
    let o = ptx(
        &[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--experiment",
            "1.3",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("experiment 1.3: 8784 hours"));
    for f in ["trace_1.3.csv", "summary_1.3.json", "kpis_1.3.csv"] {
        assert!(tmp.path().join("out").join(f).exists(), "{f}");
    }
}

#[test]
fn study_is_deterministic_and_reportable() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        fs::create_dir_all(&dir).unwrap();
        let config = write_config(&dir, "out", "[grid]\ntiers = [1, 2]\n");
        let o = ptx(&["study", "--config", config.to_str().unwrap()], tmp.path());
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(dir.join("out"));
    }
    let mut names: Vec<_> = fs::read_dir(&outputs[0])
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 6 * 3 + 4);
    for name in &names {
        assert_eq!(
            fs::read(outputs[0].join(name)).unwrap(),
            fs::read(outputs[1].join(name)).unwrap(),
            "{name:?}"
        );
    }

    let o = ptx(
        &["report", "--study", outputs[0].to_str().unwrap()],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        fs::read_to_string(outputs[0].join("report.md")).unwrap()
    );

    let csv_path = tmp.path().join("kpis.csv");
    let o = ptx(
        &[
            "report",
            "--study",
            outputs[0].to_str().unwrap(),
            "--format",
            "csv",
            "--out",
            csv_path.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(csv_path).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 6);
}

#[test]
fn study_rejects_unknown_config_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "out", "electrolyser_mw = 5\n");
    let o = ptx(&["study", "--config", config.to_str().unwrap()], tmp.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("electrolyser_mw"), "{}", stderr(&o));
}

#[test]
fn gen_data_writes_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ptx(
        &["gen-data", "--seed", "5", "--year", "2023", "--out", "data"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("wrote 8760 hours"));
    for f in [
        "spot.csv",
        "co2.csv",
        "pv_cf.csv",
        "wind_cf.csv",
        "tariffs.csv",
    ] {
        assert!(tmp.path().join("data").join(f).exists(), "{f}");
    }

    // The generated files feed a study through the files source.
    let config = tmp.path().join("files.toml");
    fs::write(&config, "output_dir = \"out\"\n[grid]\ntiers = [1]\n[dataset]\nsource = \"files\"\ndir = \"data\"\n").unwrap();
    let o = ptx(&["study", "--config", config.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
}
