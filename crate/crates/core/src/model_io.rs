//! Plain-text model files.
//!
//! One `key = value` pair per line after a `gsvp-model` magic line. Vectors
//! are space separated, feature names tab separated, floats are written in
//! shortest round-trip form, so a saved model parses back bit for bit.
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt::{Display, Write as _};
use std::path::Path;
use std::str::FromStr;

use crate::classifier::{GsvpSvmModel, Hyperplane};
use crate::data::Standardizer;
use crate::error::{Error, Result};
use crate::penalty::PenaltyKind;
use crate::select::{ElbowPoint, SelectionResult, SideSelection};
use crate::solver::{InitMode, PgdConfig};

pub const MAGIC: &str = "gsvp-model";
pub const FORMAT_VERSION: u32 = 1;

/// A fitted model together with what is needed to apply it to raw rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub model: GsvpSvmModel,
    pub feature_names: Vec<String>,
    /// Training-set scaling applied before fitting, if any.
    pub standardizer: Option<Standardizer>,
}

fn join<T: Display>(values: &[T]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn elbow_field(e: &Option<ElbowPoint>) -> String {
    match e {
        Some(p) => format!("{} {}", p.x, p.y),
        None => "none".into(),
    }
}

pub fn write_model(saved: &SavedModel) -> Result<String> {
    let m = &saved.model;
    let dim = m.features();
    if saved.feature_names.len() != dim {
        return Err(Error::shape("write_model", dim, saved.feature_names.len()));
    }
    if let Some(name) = saved
        .feature_names
        .iter()
        .find(|n| n.is_empty() || n.contains(['\t', '\n', '\r']))
    {
        return Err(Error::Input(format!("feature name {name:?} cannot be stored")));
    }
    let c = &m.config;
    let mut out = String::new();
    let mut kv = |key: &str, value: String| {
        let _ = writeln!(out, "{key} = {value}");
    };
    kv("format_version", FORMAT_VERSION.to_string());
    kv("penalty", m.penalty.name().to_string());
    kv("q", c.q.to_string());
    kv("epsilon", c.epsilon.to_string());
    kv("alpha", c.alpha.to_string());
    kv("delta1", c.delta1.to_string());
    kv("delta2", c.delta2.to_string());
    kv("maxiter", c.maxiter.to_string());
    kv("tol", c.tol.to_string());
    kv("init", c.init.name().to_string());
    kv("seed", c.seed.to_string());
    kv("non_discriminative", m.non_discriminative.to_string());
    kv("features", dim.to_string());
    kv("feature_names", saved.feature_names.join("\t"));
    kv("w0", join(&m.plane0.w));
    kv("b0", m.plane0.b.to_string());
    kv("w1", join(&m.plane1.w));
    kv("b1", m.plane1.b.to_string());
    for (tag, side) in [("1", &m.selection.side1), ("2", &m.selection.side2)] {
        kv(&format!("sorted_magnitudes_{tag}"), join(&side.sorted_magnitudes));
        kv(&format!("rank_indices_{tag}"), join(&side.rank_indices));
        kv(&format!("elbow_{tag}"), elbow_field(&side.elbow));
        kv(&format!("selected_{tag}"), join(&side.selected));
    }
    kv("selected_union", join(&m.selection.selected_union));
    kv("common", join(&m.selection.common));
    match &saved.standardizer {
        Some(s) => {
            kv("standardizer", "true".into());
            kv("mean", join(&s.mean));
            kv("scale", join(&s.scale));
        }
        None => kv("standardizer", "false".into()),
    }
    Ok(format!("{MAGIC}\n{out}"))
}

struct Fields<'a> {
    map: BTreeMap<&'a str, (usize, &'a str)>,
    last_line: usize,
}

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::ModelFormat {
        line,
        message: message.into(),
    }
}

impl<'a> Fields<'a> {
    fn raw(&mut self, key: &str) -> Result<(usize, &'a str)> {
        self.map
            .remove(key)
            .ok_or_else(|| format_err(self.last_line, format!("missing field `{key}`")))
    }

    fn parse<T: FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        let (line, value) = self.raw(key)?;
        value
            .parse()
            .map_err(|e| format_err(line, format!("`{key}`: cannot parse `{value}`: {e}")))
    }

    fn list<T: FromStr>(&mut self, key: &str, len: usize) -> Result<Vec<T>>
    where
        T::Err: Display,
    {
        let (line, value) = self.raw(key)?;
        let items = value
            .split_whitespace()
            .map(|v| {
                v.parse()
                    .map_err(|e| format_err(line, format!("`{key}`: cannot parse `{v}`: {e}")))
            })
            .collect::<Result<Vec<T>>>()?;
        if len != usize::MAX && items.len() != len {
            return Err(format_err(
                line,
                format!("`{key}` has {} entries, expected {len}", items.len()),
            ));
        }
        Ok(items)
    }

    fn indices(&mut self, key: &str, dim: usize) -> Result<Vec<usize>> {
        let line = self.map.get(key).map_or(self.last_line, |(l, _)| *l);
        let items: Vec<usize> = self.list(key, usize::MAX)?;
        if let Some(bad) = items.iter().find(|&&i| i >= dim) {
            return Err(format_err(
                line,
                format!("`{key}`: index {bad} out of range for {dim} features"),
            ));
        }
        Ok(items)
    }

    fn elbow(&mut self, key: &str) -> Result<Option<ElbowPoint>> {
        let (line, value) = self.raw(key)?;
        if value == "none" {
            return Ok(None);
        }
        let bad = || format_err(line, format!("`{key}`: expected `none` or `<x> <y>`, got `{value}`"));
        let (x, y) = value.split_once(' ').ok_or_else(bad)?;
        Ok(Some(ElbowPoint {
            x: x.parse().map_err(|_| bad())?,
            y: y.parse().map_err(|_| bad())?,
        }))
    }
}

pub fn parse_model(text: &str) -> Result<SavedModel> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, MAGIC)) => {}
        Some((line, other)) => return Err(format_err(line, format!("expected `{MAGIC}`, found `{other}`"))),
        None => return Err(format_err(1, "empty model file")),
    }
    let mut map = BTreeMap::new();
    let mut last_line = 1;
    for (line, content) in lines {
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| format_err(line, format!("expected `key = value`, found `{content}`")))?;
        let key = key.trim();
        let value = value.strip_prefix(' ').unwrap_or(value);
        if map.insert(key, (line, value)).is_some() {
            return Err(format_err(line, format!("duplicate field `{key}`")));
        }
        last_line = line;
    }
    let mut f = Fields { map, last_line };

    let version: u32 = f.parse("format_version")?;
    if version != FORMAT_VERSION {
        return Err(format_err(1, format!("unsupported format_version {version}")));
    }
    let penalty: PenaltyKind = f.parse("penalty")?;
    let config = PgdConfig {
        q: f.parse("q")?,
        epsilon: f.parse("epsilon")?,
        alpha: f.parse("alpha")?,
        delta1: f.parse("delta1")?,
        delta2: f.parse("delta2")?,
        maxiter: f.parse("maxiter")?,
        tol: f.parse("tol")?,
        init: f.parse::<InitMode>("init")?,
        seed: f.parse("seed")?,
    };
    config.validate()?;
    let non_discriminative = f.parse("non_discriminative")?;
    let dim: usize = f.parse("features")?;

    let (names_line, names) = f.raw("feature_names")?;
    let feature_names: Vec<String> = names.split('\t').map(str::to_string).collect();
    if feature_names.len() != dim {
        return Err(format_err(
            names_line,
            format!("{} feature names for {dim} features", feature_names.len()),
        ));
    }
    let plane0 = Hyperplane {
        w: f.list("w0", dim)?,
        b: f.parse("b0")?,
    };
    let plane1 = Hyperplane {
        w: f.list("w1", dim)?,
        b: f.parse("b1")?,
    };
    let mut sides = Vec::with_capacity(2);
    for tag in ["1", "2"] {
        let sorted_magnitudes = f.list(&format!("sorted_magnitudes_{tag}"), dim)?;
        let rank_indices = f.indices(&format!("rank_indices_{tag}"), dim)?;
        let elbow = f.elbow(&format!("elbow_{tag}"))?;
        let selected = f.indices(&format!("selected_{tag}"), dim)?;
        if rank_indices.len() != dim || selected.len() > dim || rank_indices[..selected.len()] != selected[..] {
            return Err(format_err(
                f.last_line,
                format!("selection {tag} is not a prefix of a full ranking"),
            ));
        }
        sides.push(SideSelection {
            sorted_magnitudes,
            rank_indices,
            elbow,
            selected,
        });
    }
    let side2 = sides.pop().expect("two sides");
    let side1 = sides.pop().expect("two sides");
    let selection = SelectionResult::from_sides(side1, side2, dim);
    for (key, expected) in [
        ("selected_union", &selection.selected_union),
        ("common", &selection.common),
    ] {
        let line = f.map.get(key).map_or(f.last_line, |(l, _)| *l);
        if &f.indices(key, dim)? != expected {
            return Err(format_err(
                line,
                format!("`{key}` disagrees with the per-side selections"),
            ));
        }
    }
    let standardizer = if f.parse::<bool>("standardizer")? {
        Some(Standardizer {
            mean: f.list("mean", dim)?,
            scale: f.list("scale", dim)?,
        })
    } else {
        None
    };
    if let Some((key, (line, _))) = f.map.iter().next() {
        return Err(format_err(*line, format!("unknown field `{key}`")));
    }
    Ok(SavedModel {
        model: GsvpSvmModel {
            plane0,
            plane1,
            selection,
            config,
            penalty,
            non_discriminative,
        },
        feature_names,
        standardizer,
    })
}

pub fn save(saved: &SavedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_model(saved)?).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load(path: impl AsRef<Path>) -> Result<SavedModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_model(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{assemble, FitOptions};
    use crate::solver::SolveTrace;
    use proptest::prelude::*;

    fn trace() -> SolveTrace {
        SolveTrace {
            objective_history: vec![1.0],
            relative_change_history: vec![],
            iterations_run: 1,
            converged: true,
            final_ratio: 0.5,
        }
    }

    fn saved(w0: Vec<f64>, w1: Vec<f64>, standardize: bool) -> SavedModel {
        let dim = w0.len() - 1;
        let out = assemble(
            (w0, trace()),
            (w1, trace()),
            &PgdConfig::default(),
            PenaltyKind::Lq,
            FitOptions::default(),
        )
        .unwrap();
        SavedModel {
            model: out.model,
            feature_names: (0..dim).map(|i| format!("mean radius {i}")).collect(),
            standardizer: standardize.then(|| Standardizer {
                mean: (0..dim).map(|i| i as f64 * 0.1).collect(),
                scale: vec![1.5; dim],
            }),
        }
    }

    #[test]
    fn round_trip_example() {
        let s = saved(vec![9.0, 0.1, 0.1, 0.05, 0.3], vec![0.1, 7.0, 0.0, 0.2, -1.0], true);
        let text = write_model(&s).unwrap();
        assert!(text.starts_with("gsvp-model\nformat_version = 1\npenalty = lq\n"));
        assert!(text.contains("\nselected_1 = 0 1\n"));
        assert_eq!(parse_model(&text).unwrap(), s);
        assert_eq!(write_model(&parse_model(&text).unwrap()).unwrap(), text);
    }

    #[test]
    fn comments_and_crlf_are_tolerated() {
        let s = saved(vec![1.0, 2.0, 3.0, 0.0], vec![3.0, 2.0, 1.0, 0.0], false);
        let text = write_model(&s).unwrap().replace('\n', "\r\n");
        let text = format!("# exported\r\n\r\n{text}");
        assert_eq!(parse_model(&text).unwrap(), s);
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        let s = saved(vec![1.0, -2.0, 0.5, 1.0], vec![0.2, 2.0, 1.0, -1.0], true);
        save(&s, &path).unwrap();
        assert_eq!(load(&path).unwrap(), s);
        assert!(matches!(load(dir.path().join("nope.txt")), Err(Error::Io { .. })));
    }

    fn line_of(err: Error) -> usize {
        match err {
            Error::ModelFormat { line, .. } => line,
            other => panic!("expected a format error, got {other}"),
        }
    }

    #[test]
    fn malformed_files_report_the_line() {
        let s = saved(vec![1.0, 2.0, 3.0, 0.0], vec![3.0, 2.0, 1.0, 0.0], false);
        let text = write_model(&s).unwrap();

        assert_eq!(line_of(parse_model("not-a-model\n").unwrap_err()), 1);
        assert_eq!(line_of(parse_model("").unwrap_err()), 1);

        let bad_float = text.replace("b0 = ", "b0 = x");
        let expected = bad_float.lines().position(|l| l.starts_with("b0")).unwrap() + 1;
        assert_eq!(line_of(parse_model(&bad_float).unwrap_err()), expected);

        let short: String = text
            .lines()
            .map(|l| {
                if l.starts_with("w1 ") {
                    "w1 = 1 2\n".to_string()
                } else {
                    format!("{l}\n")
                }
            })
            .collect();
        assert!(matches!(parse_model(&short), Err(Error::ModelFormat { .. })));

        let missing: String = text
            .lines()
            .filter(|l| !l.starts_with("tol"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(parse_model(&missing)
            .unwrap_err()
            .to_string()
            .contains("missing field `tol`"));

        let extra = format!("{text}colour = blue\n");
        assert!(parse_model(&extra).unwrap_err().to_string().contains("unknown field"));

        let dup = format!("{text}seed = 1\n");
        assert!(parse_model(&dup).unwrap_err().to_string().contains("duplicate"));

        let version = text.replace("format_version = 1", "format_version = 9");
        assert!(parse_model(&version).unwrap_err().to_string().contains("unsupported"));

        let out_of_range = text.replace("\nselected_union = ", "\nselected_union = 99 ");
        assert!(matches!(parse_model(&out_of_range), Err(Error::ModelFormat { .. })));
    }

    #[test]
    fn unstorable_names_are_rejected() {
        let mut s = saved(vec![1.0, 2.0, 3.0, 0.0], vec![3.0, 2.0, 1.0, 0.0], false);
        s.feature_names[1] = "a\tb".into();
        assert!(write_model(&s).is_err());
        s.feature_names.pop();
        assert!(write_model(&s).is_err());
    }

    proptest! {
        #[test]
        fn arbitrary_models_round_trip(
            pair in (3usize..12).prop_flat_map(|d| (
                prop::collection::vec(-1e3f64..1e3, d + 1),
                prop::collection::vec(-1e3f64..1e3, d + 1),
            )),
            standardize in any::<bool>(),
        ) {
            let (w0, w1) = pair;
            prop_assume!(w0[..w0.len() - 1].iter().any(|v| *v != 0.0));
            prop_assume!(w1[..w1.len() - 1].iter().any(|v| *v != 0.0));
            let s = saved(w0, w1, standardize);
            let parsed = parse_model(&write_model(&s).unwrap()).unwrap();
            prop_assert_eq!(parsed, s);
        }
    }
}
