use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gsvp::metrics::ClassificationReport;
use gsvp::model_io;

fn dataset() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/breast_cancer.csv")
}

fn gsvp(args: &[&str], out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gsvp"));
    for (key, _) in std::env::vars() {
        if key.starts_with("GSVP_") {
            cmd.env_remove(key);
        }
    }
    cmd.args(args)
        .arg("--out")
        .arg(out)
        .arg("--dataset")
        .arg(dataset())
        .output()
        .unwrap()
}

fn ok(args: &[&str], out: &Path) -> String {
    let o = gsvp(args, out);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn split_is_deterministic_and_matches_counts() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&["split"], dir.path());
    assert!(stdout.contains("249"));
    let summary = read(dir.path().join("split/summary.csv"));
    assert_eq!(
        summary,
        "class,total,train,validation,test\n0,357,249,64,44\n1,212,148,38,26\n"
    );
    let first = read(dir.path().join("split/test.txt"));
    ok(&["split"], dir.path());
    assert_eq!(read(dir.path().join("split/test.txt")), first);
    assert_eq!(first.lines().count(), 70);

    let other = tempfile::tempdir().unwrap();
    ok(&["split", "--seed", "7"], other.path());
    assert_ne!(read(other.path().join("split/test.txt")), first);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    let missing = Command::new(env!("CARGO_BIN_EXE_gsvp"))
        .args(["split", "--dataset", "/no/such/file.csv", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/no/such/file.csv"));

    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "colour = \"blue\"\n").unwrap();
    let bad = gsvp(&["fit", "--config", config.to_str().unwrap()], dir.path());
    assert_eq!(bad.status.code(), Some(2));

    let plot = gsvp(&["plot"], &dir.path().join("empty"));
    assert_eq!(plot.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&plot.stderr).contains("model.txt"));

    let diverge = gsvp(&["fit", "--alpha", "1e6", "--maxiter", "50"], dir.path());
    assert_eq!(
        diverge.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&diverge.stderr)
    );
}

#[test]
fn environment_overrides_config_and_flags_override_environment() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "maxiter = 30\nseed = 1\n").unwrap();
    let run = |extra: &[&str], env_seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_gsvp"));
        cmd.args(["fit", "--config", config.to_str().unwrap(), "--dataset"])
            .arg(dataset())
            .arg("--out")
            .arg(dir.path())
            .args(extra)
            .env_remove("GSVP_SEED");
        if let Some(seed) = env_seed {
            cmd.env("GSVP_SEED", seed);
        }
        assert!(cmd.output().unwrap().status.success());
        let model = read(dir.path().join("model.txt"));
        let seed = model.lines().find(|l| l.starts_with("seed = ")).unwrap().to_string();
        let maxiter = model.lines().find(|l| l.starts_with("maxiter = ")).unwrap().to_string();
        (seed, maxiter)
    };
    assert_eq!(run(&[], None), ("seed = 1".into(), "maxiter = 30".into()));
    assert_eq!(run(&[], Some("5")).0, "seed = 5");
    assert_eq!(run(&["--seed", "9"], Some("5")).0, "seed = 9");
}

#[test]
fn fit_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&["fit", "--maxiter", "2000"], dir.path());
    assert!(stdout.contains("Bal. Acc."));

    for split in ["validation", "test"] {
        let text = read(dir.path().join(format!("report_{split}.csv")));
        let row = text.lines().nth(1).unwrap();
        let (name, parsed) = ClassificationReport::parse_csv_row(row).unwrap();
        assert_eq!(name, split);
        assert_eq!(parsed.csv_row(split), row);
    }

    let saved = model_io::load(dir.path().join("model.txt")).unwrap();
    let selection = read(dir.path().join("selection.csv"));
    assert_eq!(
        selection.lines().count() - 1,
        saved.model.selection.selected_union.len()
    );
    for &f in &saved.model.selection.selected_union {
        assert!(selection.contains(&saved.feature_names[f]));
    }

    ok(&["plot"], dir.path());
    let plots = dir.path().join("plots");
    for (tag, side) in [("1", &saved.model.selection.side1), ("2", &saved.model.selection.side2)] {
        let csv = read(plots.join(format!("sorted_weights_{tag}.csv")));
        assert_eq!(csv.lines().count() - 1, side.sorted_magnitudes.len());
        let svg = read(plots.join(format!("sorted_weights_{tag}.svg")));
        let elbow = side.elbow.map_or("none".to_string(), |e| e.x.to_string());
        assert!(svg.contains(&format!("data-elbow-x=\"{elbow}\"")));
    }
    for plane in ["0", "1"] {
        let trace = read(dir.path().join(format!("trace_{plane}.csv")));
        let last_objective = trace.lines().last().unwrap().split(',').nth(1).unwrap().to_string();
        let csv = read(plots.join(format!("objective_{plane}.csv")));
        assert_eq!(csv.lines().count(), trace.lines().count());
        assert_eq!(csv.lines().last().unwrap().split(',').nth(1).unwrap(), last_objective);
        assert!(plots.join(format!("objective_{plane}.svg")).is_file());
    }
    assert!(!plots.join("features_vs_q.csv").exists());
}

#[test]
fn stability_extremes() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("same.toml");
    std::fs::write(&config, "q_list = [0.5, 0.5]\nmaxiter = 300\n").unwrap();
    let stdout = ok(&["stability", "--config", config.to_str().unwrap()], dir.path());
    assert!(stdout.contains("Avg. JSI over 2 values of q: 1.0000"), "{stdout}");

    let single = dir.path().join("single.toml");
    std::fs::write(&single, "q_list = [0.5]\n").unwrap();
    let o = gsvp(&["stability", "--config", single.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stability_feeds_the_q_plot() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("q.toml");
    std::fs::write(&config, "q_list = [0.1, 0.5, 1.0]\nmaxiter = 300\n").unwrap();
    let cfg = config.to_str().unwrap();
    ok(&["fit", "--config", cfg], dir.path());
    ok(&["stability", "--config", cfg], dir.path());
    let matrix = read(dir.path().join("stability/jsi_matrix.csv"));
    assert_eq!(matrix.lines().count(), 4);
    assert!(matrix.lines().nth(1).unwrap().starts_with("0.1,1.0000,"));
    ok(&["plot", "--config", cfg], dir.path());
    let bars = read(dir.path().join("plots/features_vs_q.csv"));
    assert_eq!(bars.lines().count(), 4);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let defaults = gsvp_cli::RunConfig::load(&dir.join("breast_l1.toml")).unwrap();
    assert_eq!(defaults, gsvp_cli::RunConfig::default());
    for name in ["breast_l01.toml", "ovarian_l01.toml", "ovarian_l1.toml"] {
        let cfg = gsvp_cli::RunConfig::load(&dir.join(name)).unwrap();
        cfg.pgd_config().unwrap();
        cfg.penalty_kind().unwrap();
    }
}
