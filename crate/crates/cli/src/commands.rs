//! The subcommands. Each writes its files under `cfg.out` and returns a
//! short human-readable summary.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gsvp::classifier::{fit_with, FitOptions, FitOutcome};
use gsvp::data::{load_csv, standardize, stratified_split, DatasetSplit, LabeledDataset, Standardizer};
use gsvp::metrics::{
    avg_jaccard, confusion, format_table, jaccard_matrix, report, ClassificationReport, REPORT_HEADER,
};
use gsvp::model_io::{self, SavedModel};
use gsvp::solver::penalty_for;
use gsvp::tuning::{best_trial, grid_search, trials_csv};
use gsvp::{PenaltyKind, SolveTrace};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::plot::{bar_chart, line_chart};

pub const SPLIT_DIR: &str = "split";
pub const MODEL_FILE: &str = "model.txt";
pub const TRACE_FILES: [&str; 2] = ["trace_0.csv", "trace_1.csv"];
pub const STABILITY_DIR: &str = "stability";
pub const PLOT_DIR: &str = "plots";

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::artifact(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::artifact(path, e))
}

/// Quotes a CSV field when it needs it.
fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn read_artifact(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::artifact(path, e))
}

/// The split as loaded, and as handed to the solver (scaled when enabled).
pub struct Prepared {
    pub dataset: LabeledDataset,
    pub split: DatasetSplit,
    pub standardizer: Option<Standardizer>,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, CliError> {
    let dataset = load_csv(&cfg.dataset, &cfg.csv_options())?;
    let mut split = stratified_split(&dataset, &cfg.split_spec()?)?;
    let standardizer = if cfg.standardize {
        let (train, mut others, scaler) = standardize(&split.train, &[&split.validation, &split.test])?;
        split.train = train;
        split.test = others.pop().expect("two datasets");
        split.validation = others.pop().expect("two datasets");
        Some(scaler)
    } else {
        None
    };
    Ok(Prepared {
        dataset,
        split,
        standardizer,
    })
}

fn write_split(cfg: &RunConfig, p: &Prepared) -> Result<String, CliError> {
    let dir = cfg.out.join(SPLIT_DIR);
    let parts = [
        ("train", &p.split.train),
        ("validation", &p.split.validation),
        ("test", &p.split.test),
    ];
    for (name, part) in parts {
        let body: String = part.row_ids.iter().map(|i| format!("{i}\n")).collect();
        write_file(&dir.join(format!("{name}.txt")), &body)?;
    }
    let mut csv = String::from("class,total,train,validation,test\n");
    let mut table = format!(
        "{:<16} {:>6} {:>6} {:>11} {:>6}\n",
        "Class", "Total", "Train", "Validation", "Test"
    );
    for class in [0u8, 1] {
        let counts: Vec<usize> = parts.iter().map(|(_, d)| d.class_count(class)).collect();
        let total = p.dataset.class_count(class);
        let _ = writeln!(csv, "{class},{total},{},{},{}", counts[0], counts[1], counts[2]);
        let name = if class == 1 {
            format!("1 ({})", cfg.positive_label)
        } else {
            "0".to_string()
        };
        let _ = writeln!(
            table,
            "{name:<16} {total:>6} {:>6} {:>11} {:>6}",
            counts[0], counts[1], counts[2]
        );
    }
    write_file(&dir.join("summary.csv"), &csv)?;
    Ok(table)
}

pub fn cmd_split(cfg: &RunConfig) -> Result<String, CliError> {
    let p = prepare(cfg)?;
    let table = write_split(cfg, &p)?;
    Ok(format!(
        "{table}split manifests written to {}\n",
        cfg.out.join(SPLIT_DIR).display()
    ))
}

fn evaluate(outcome: &FitOutcome, data: &LabeledDataset) -> Result<ClassificationReport, CliError> {
    let predicted = outcome.model.predict_batch(&data.x)?;
    Ok(report(confusion(&data.y, &predicted)?)?)
}

fn fit_split(cfg: &RunConfig, p: &Prepared, kind: PenaltyKind, q: f64) -> Result<FitOutcome, CliError> {
    let pgd = gsvp::PgdConfig { q, ..cfg.pgd_config()? };
    let penalty = penalty_for(kind, &pgd)?;
    let (c1, c2) = p.split.train.class_blocks();
    let opts = FitOptions {
        mask: cfg.mask,
        ..FitOptions::default()
    };
    Ok(fit_with(&c1, &c2, &pgd, penalty.as_ref(), opts)?)
}

fn trace_csv(trace: &SolveTrace) -> String {
    let mut out = String::from("iteration,objective,relative_change\n");
    for (k, h) in trace.objective_history.iter().enumerate() {
        let change = match k {
            0 => "NA".to_string(),
            _ => trace.relative_change_history[k - 1].to_string(),
        };
        let _ = writeln!(out, "{k},{h},{change}");
    }
    out
}

fn selection_files(outcome: &FitOutcome, names: &[String]) -> (String, String) {
    let sel = &outcome.model.selection;
    let rank = |ranks: &[usize], feature: usize| ranks.iter().position(|&i| i == feature).unwrap() + 1;
    let mut csv = String::from("feature,name,side,rank_1,rank_2,abs_w0,abs_w1\n");
    for &f in &sel.selected_union {
        let side = match (sel.side1.selected.contains(&f), sel.side2.selected.contains(&f)) {
            (true, true) => "both",
            (true, false) => "1",
            _ => "2",
        };
        let _ = writeln!(
            csv,
            "{f},{},{side},{},{},{},{}",
            field(&names[f]),
            rank(&sel.side1.rank_indices, f),
            rank(&sel.side2.rank_indices, f),
            outcome.raw_w0[f].abs(),
            outcome.raw_w1[f].abs()
        );
    }
    let mut text = String::new();
    for (tag, side) in [("1", &sel.side1), ("2", &sel.side2)] {
        let elbow = side
            .elbow
            .map_or("none (degenerate curve)".to_string(), |e| e.x.to_string());
        let list: Vec<&str> = side.selected.iter().map(|&i| names[i].as_str()).collect();
        let _ = writeln!(
            text,
            "w{tag}: elbow {elbow}, {} selected: {}",
            side.selected.len(),
            list.join(", ")
        );
    }
    let _ = writeln!(text, "unique features selected: {}", sel.selected_union.len());
    (csv, text)
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<String, CliError> {
    let p = prepare(cfg)?;
    write_split(cfg, &p)?;
    let kind = cfg.penalty_kind()?;
    let outcome = fit_split(cfg, &p, kind, cfg.q)?;
    let names = &p.dataset.feature_names;

    let rows = vec![
        ("validation".to_string(), evaluate(&outcome, &p.split.validation)?),
        ("test".to_string(), evaluate(&outcome, &p.split.test)?),
    ];
    for (split, r) in &rows {
        write_file(
            &cfg.out.join(format!("report_{split}.csv")),
            &format!("{REPORT_HEADER}\n{}\n", r.csv_row(split)),
        )?;
    }
    let table = format_table(&rows);
    write_file(&cfg.out.join("report.txt"), &table)?;

    let (csv, text) = selection_files(&outcome, names);
    write_file(&cfg.out.join("selection.csv"), &csv)?;
    write_file(&cfg.out.join("selection.txt"), &text)?;
    write_file(&cfg.out.join(TRACE_FILES[0]), &trace_csv(&outcome.trace0))?;
    write_file(&cfg.out.join(TRACE_FILES[1]), &trace_csv(&outcome.trace1))?;

    let saved = SavedModel {
        model: outcome.model.clone(),
        feature_names: names.clone(),
        standardizer: p.standardizer.clone(),
    };
    let model_path = cfg.out.join(MODEL_FILE);
    write_file(&model_path, &model_io::write_model(&saved)?)?;

    let mut summary = format!("{}-PGD-GSVPSVM\n{table}\n{text}", kind.name());
    let _ = writeln!(
        summary,
        "iterations: {} / {} (converged: {} / {})",
        outcome.trace0.iterations_run,
        outcome.trace1.iterations_run,
        outcome.trace0.converged,
        outcome.trace1.converged
    );
    if outcome.model.non_discriminative {
        summary.push_str("warning: both quotients equal 1; the planes do not separate the classes\n");
    }
    let _ = writeln!(summary, "model written to {}", model_path.display());
    Ok(summary)
}

pub fn cmd_tune(cfg: &RunConfig) -> Result<String, CliError> {
    let p = prepare(cfg)?;
    write_split(cfg, &p)?;
    let grid = cfg.grid_spec()?;
    let (best, records) = grid_search(&p.split.train, &p.split.validation, &grid, cfg.penalty_kind()?)?;
    let dir = cfg.out.join("tune");
    write_file(&dir.join("trials.csv"), &trials_csv(&records))?;
    write_file(
        &dir.join("best.toml"),
        &format!(
            "# Best validation point; paste into a config file to fit with it.\ndelta1 = {}\ndelta2 = {}\nalpha = {}\n",
            best.delta1, best.delta2, best.alpha
        ),
    )?;
    let failed = records.iter().filter(|r| r.outcome.is_err()).count();
    let winner = records[best_trial(&records).expect("a best trial exists")]
        .outcome
        .as_ref()
        .expect("best trial succeeded");
    Ok(format!(
        "{} grid points, {failed} failed\nbest: delta1 = {}, delta2 = {}, alpha = {}\nvalidation balanced accuracy {:.2}% with {} features\ntrials written to {}\n",
        records.len(),
        best.delta1,
        best.delta2,
        best.alpha,
        100.0 * winner.report.balanced_accuracy,
        winner.union,
        dir.display()
    ))
}

pub fn cmd_stability(cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.q_list.len() < 2 {
        return Err(CliError::Input(format!(
            "stability needs at least 2 values in q_list, got {}",
            cfg.q_list.len()
        )));
    }
    let p = prepare(cfg)?;
    write_split(cfg, &p)?;
    let names = &p.dataset.feature_names;
    let mut sets = Vec::with_capacity(cfg.q_list.len());
    let mut csv = String::from("q,count,features,names\n");
    for &q in &cfg.q_list {
        let outcome = fit_split(cfg, &p, PenaltyKind::Lq, q)?;
        let set: BTreeSet<usize> = outcome.model.selection.selected_union.iter().copied().collect();
        let indices: Vec<String> = set.iter().map(ToString::to_string).collect();
        let labels: Vec<&str> = set.iter().map(|&i| names[i].as_str()).collect();
        let _ = writeln!(
            csv,
            "{q},{},{},{}",
            set.len(),
            indices.join(" "),
            field(&labels.join(";"))
        );
        sets.push(set);
    }
    let avg = avg_jaccard(&sets)?;
    let matrix = jaccard_matrix(&sets);
    let mut m_csv = String::from("q");
    for q in &cfg.q_list {
        let _ = write!(m_csv, ",{q}");
    }
    m_csv.push('\n');
    for (q, row) in cfg.q_list.iter().zip(&matrix) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
        let _ = writeln!(m_csv, "{q},{}", cells.join(","));
    }
    let dir = cfg.out.join(STABILITY_DIR);
    write_file(&dir.join("sets.csv"), &csv)?;
    write_file(&dir.join("jsi_matrix.csv"), &m_csv)?;
    let summary = format!("Avg. JSI over {} values of q: {avg:.4}\n", cfg.q_list.len());
    write_file(&dir.join("summary.txt"), &summary)?;
    let mut text = String::new();
    for (q, set) in cfg.q_list.iter().zip(&sets) {
        let _ = writeln!(text, "q = {q}: {} features", set.len());
    }
    Ok(format!("{text}{summary}"))
}

/// Column `column` of a CSV written by this crate, header skipped.
fn csv_column(path: &Path, column: usize) -> Result<Vec<String>, CliError> {
    read_artifact(path)?
        .lines()
        .skip(1)
        .map(|line| {
            line.split(',')
                .nth(column)
                .map(str::to_string)
                .ok_or_else(|| CliError::artifact(path, format!("short row `{line}`")))
        })
        .collect()
}

pub fn cmd_plot(cfg: &RunConfig) -> Result<String, CliError> {
    let model_path = cfg.out.join(MODEL_FILE);
    if !model_path.is_file() {
        return Err(CliError::artifact(&model_path, "missing; run `fit` first"));
    }
    let saved = model_io::load(&model_path)?;
    let dir = cfg.out.join(PLOT_DIR);
    let mut written: Vec<PathBuf> = Vec::new();
    let mut emit = |name: &str, svg: String, csv: String| -> Result<(), CliError> {
        for (ext, body) in [("svg", svg), ("csv", csv)] {
            let path = dir.join(format!("{name}.{ext}"));
            write_file(&path, &body)?;
            written.push(path);
        }
        Ok(())
    };

    let sel = &saved.model.selection;
    for (tag, side) in [("1", &sel.side1), ("2", &sel.side2)] {
        let mut csv = String::from("rank,magnitude,feature,name\n");
        for (r, (m, &f)) in side.sorted_magnitudes.iter().zip(&side.rank_indices).enumerate() {
            let _ = writeln!(csv, "{},{m},{f},{}", r + 1, field(&saved.feature_names[f]));
        }
        let points: Vec<(f64, f64)> = side
            .sorted_magnitudes
            .iter()
            .enumerate()
            .map(|(r, &m)| ((r + 1) as f64, m))
            .collect();
        let elbow = side.elbow.map_or("none".to_string(), |e| e.x.to_string());
        let svg = line_chart(
            &format!("Sorted |w{tag}|"),
            "rank",
            "magnitude",
            &points,
            side.elbow.map(|e| (e.x as f64, e.y)),
            &[("elbow-x", elbow), ("selected", side.selected.len().to_string())],
        );
        emit(&format!("sorted_weights_{tag}"), svg, csv)?;
    }

    for (plane, file) in TRACE_FILES.iter().enumerate() {
        let path = cfg.out.join(file);
        let values = csv_column(&path, 1)?;
        let mut points = Vec::with_capacity(values.len());
        let mut csv = String::from("iteration,objective\n");
        for (k, v) in values.iter().enumerate() {
            let h: f64 = v
                .parse()
                .map_err(|_| CliError::artifact(&path, format!("bad objective `{v}`")))?;
            points.push((k as f64, h));
            let _ = writeln!(csv, "{k},{v}");
        }
        let svg = line_chart(
            &format!("Objective, plane {plane}"),
            "iteration",
            "objective",
            &points,
            None,
            &[("iterations", (points.len().saturating_sub(1)).to_string())],
        );
        emit(&format!("objective_{plane}"), svg, csv)?;
    }

    let sets = cfg.out.join(STABILITY_DIR).join("sets.csv");
    if sets.is_file() {
        let qs = csv_column(&sets, 0)?;
        let counts = csv_column(&sets, 1)?;
        let mut csv = String::from("q,features\n");
        let mut bars = Vec::with_capacity(qs.len());
        for (q, n) in qs.iter().zip(&counts) {
            let value: f64 = n
                .parse()
                .map_err(|_| CliError::artifact(&sets, format!("bad count `{n}`")))?;
            let _ = writeln!(csv, "{q},{n}");
            bars.push((q.clone(), value));
        }
        emit(
            "features_vs_q",
            bar_chart("Features selected vs q", "q", "features", &bars),
            csv,
        )?;
    }

    let mut summary = String::new();
    for path in &written {
        let _ = writeln!(summary, "wrote {}", path.display());
    }
    Ok(summary)
}
