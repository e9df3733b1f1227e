//! Tabular datasets: schema, CSV ingestion/egress and the seeded simulations.
//!
//! Feature cells are stored row-major as `f64`. Categorical cells hold the
//! level index (`0.0`, `1.0`, ...) into the column's level list, which keeps
//! every downstream consumer (trees, grids, permutations) on one code path.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureKind {
    Numeric,
    Categorical { levels: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub name: String,
    pub kind: FeatureKind,
}

impl FeatureSchema {
    pub fn numeric(name: impl Into<String>) -> Self {
        FeatureSchema {
            name: name.into(),
            kind: FeatureKind::Numeric,
        }
    }

    pub fn categorical(name: impl Into<String>, levels: Vec<String>) -> Self {
        FeatureSchema {
            name: name.into(),
            kind: FeatureKind::Categorical { levels },
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self.kind, FeatureKind::Categorical { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskKind {
    Regression,
    Classification,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Regression => "regression",
            TaskKind::Classification => "classification",
        }
    }
}

impl std::str::FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regression" => Ok(TaskKind::Regression),
            "classification" => Ok(TaskKind::Classification),
            other => Err(Error::InvalidArgument(format!("unknown task kind `{other}`"))),
        }
    }
}

/// Labels together with the task they define.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Target {
    Regression(Vec<f64>),
    /// `labels[i]` indexes into `classes`.
    Classification {
        classes: Vec<String>,
        labels: Vec<usize>,
    },
}

impl Target {
    pub fn len(&self) -> usize {
        match self {
            Target::Regression(y) => y.len(),
            Target::Classification { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> TaskKind {
        match self {
            Target::Regression(_) => TaskKind::Regression,
            Target::Classification { .. } => TaskKind::Classification,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<FeatureSchema>,
    cells: Vec<f64>,
    label_name: String,
    target: Target,
    ids: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from row-major cells, checking every invariant.
    pub fn new(
        schema: Vec<FeatureSchema>,
        cells: Vec<f64>,
        label_name: impl Into<String>,
        target: Target,
        ids: Vec<String>,
    ) -> Result<Self> {
        let label_name = label_name.into();
        let p = schema.len();
        let n = target.len();
        if p == 0 {
            return Err(Error::InvalidDataset("at least one feature is required".into()));
        }
        if n == 0 {
            return Err(Error::InvalidDataset("at least one row is required".into()));
        }
        if cells.len() != n * p {
            return Err(Error::InvalidDataset(format!(
                "expected {} cells for {n} rows x {p} features, got {}",
                n * p,
                cells.len()
            )));
        }
        if ids.len() != n {
            return Err(Error::InvalidDataset(format!("{} ids for {n} rows", ids.len())));
        }
        let mut names = HashSet::new();
        for f in &schema {
            if !names.insert(f.name.as_str()) {
                return Err(Error::InvalidDataset(format!("duplicate feature name `{}`", f.name)));
            }
            if let FeatureKind::Categorical { levels } = &f.kind {
                if levels.is_empty() {
                    return Err(Error::InvalidDataset(format!("feature `{}` has no levels", f.name)));
                }
                let distinct: HashSet<_> = levels.iter().collect();
                if distinct.len() != levels.len() {
                    return Err(Error::InvalidDataset(format!(
                        "feature `{}` has duplicate levels",
                        f.name
                    )));
                }
            }
        }
        if names.contains(label_name.as_str()) {
            return Err(Error::InvalidDataset(format!(
                "label `{label_name}` clashes with a feature name"
            )));
        }
        for (i, row) in cells.chunks_exact(p).enumerate() {
            for (j, (&v, f)) in row.iter().zip(&schema).enumerate() {
                let ok = match &f.kind {
                    FeatureKind::Numeric => v.is_finite(),
                    FeatureKind::Categorical { levels } => {
                        v >= 0.0 && v.fract() == 0.0 && (v as usize) < levels.len()
                    }
                };
                if !ok {
                    return Err(Error::InvalidDataset(format!("invalid cell {v} at row {i}, feature {j}")));
                }
            }
        }
        match &target {
            Target::Regression(y) => {
                if let Some(i) = y.iter().position(|v| !v.is_finite()) {
                    return Err(Error::InvalidDataset(format!("non-finite label at row {i}")));
                }
            }
            Target::Classification { classes, labels } => {
                if classes.is_empty() {
                    return Err(Error::InvalidDataset("no classes".into()));
                }
                let distinct: HashSet<_> = classes.iter().collect();
                if distinct.len() != classes.len() {
                    return Err(Error::InvalidDataset("duplicate class names".into()));
                }
                if let Some(i) = labels.iter().position(|&c| c >= classes.len()) {
                    return Err(Error::InvalidDataset(format!("label out of range at row {i}")));
                }
            }
        }
        Ok(Dataset {
            schema,
            cells,
            label_name,
            target,
            ids,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn schema(&self) -> &[FeatureSchema] {
        &self.schema
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.schema.iter().map(|f| f.name.clone()).collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|f| f.name == name)
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn task(&self) -> TaskKind {
        self.target.kind()
    }

    /// Class names for classification, empty for regression.
    pub fn classes(&self) -> &[String] {
        match &self.target {
            Target::Classification { classes, .. } => classes,
            Target::Regression(_) => &[],
        }
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_features();
        &self.cells[i * p..(i + 1) * p]
    }

    pub fn cell(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.n_features() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.cells
            .chunks_exact(self.n_features())
            .map(|row| row[j])
            .collect()
    }

    /// Label of row `i` as it would appear in a CSV file.
    pub fn label_string(&self, i: usize) -> String {
        match &self.target {
            Target::Regression(y) => format_f64(y[i]),
            Target::Classification { classes, labels } => classes[labels[i]].clone(),
        }
    }

    /// Cell `(i, j)` as it would appear in a CSV file.
    pub fn cell_string(&self, i: usize, j: usize) -> String {
        let v = self.cell(i, j);
        match &self.schema[j].kind {
            FeatureKind::Numeric => format_f64(v),
            FeatureKind::Categorical { levels } => levels[v as usize].clone(),
        }
    }

    /// Fraction of rows in each class, in class order. Empty for regression.
    pub fn class_balance(&self) -> Vec<f64> {
        match &self.target {
            Target::Regression(_) => Vec::new(),
            Target::Classification { classes, labels } => {
                let mut counts = vec![0usize; classes.len()];
                for &c in labels {
                    counts[c] += 1;
                }
                counts
                    .into_iter()
                    .map(|c| c as f64 / labels.len() as f64)
                    .collect()
            }
        }
    }
}

/// Shortest representation that parses back to the same `f64`.
pub(crate) fn format_f64(v: f64) -> String {
    format!("{v}")
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn is_missing(s: &str) -> bool {
    s.is_empty() || s.eq_ignore_ascii_case("na") || s.eq_ignore_ascii_case("nan")
}

/// Reads a CSV with a header row. Classification classes are taken in order of
/// first appearance.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str, task: TaskKind) -> Result<Dataset> {
    read_csv(path.as_ref(), label_column, task, None)
}

/// Like [`load_csv`] for classification, but with a fixed class order. Every
/// label must be one of `classes`.
pub fn load_csv_with_classes(
    path: impl AsRef<Path>,
    label_column: &str,
    classes: &[String],
) -> Result<Dataset> {
    read_csv(path.as_ref(), label_column, TaskKind::Classification, Some(classes))
}

fn read_csv(
    path: &Path,
    label_column: &str,
    task: TaskKind,
    fixed_classes: Option<&[String]>,
) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(Error::EmptyFile { path: path.into() }),
        Some(r) => r?,
    };
    let header: Vec<String> = header.iter().map(str::to_string).collect();
    if header.iter().all(String::is_empty) {
        return Err(Error::EmptyFile { path: path.into() });
    }
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingLabelColumn {
            path: path.into(),
            column: label_column.to_string(),
        })?;
    let width = header.len();

    let mut raw: Vec<Vec<String>> = Vec::new();
    for (r, record) in records.enumerate() {
        let record = record?;
        let line = r + 2;
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != width {
            return Err(Error::RaggedRow {
                path: path.into(),
                row: line,
                expected: width,
                found: record.len(),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            if is_missing(cell) {
                return Err(Error::BadCell {
                    path: path.into(),
                    row: line,
                    column: header[c].clone(),
                    message: "missing value".into(),
                });
            }
        }
        raw.push(record.iter().map(str::to_string).collect());
    }
    if raw.is_empty() {
        return Err(Error::NoRows { path: path.into() });
    }
    let n = raw.len();

    let feature_cols: Vec<usize> = (0..width).filter(|&c| c != label_idx).collect();
    let p = feature_cols.len();
    if p == 0 {
        return Err(Error::InvalidDataset(format!("{}: no feature columns", path.display())));
    }
    let mut schema = Vec::with_capacity(p);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(p);
    for &c in &feature_cols {
        let parsed: Option<Vec<f64>> = raw.iter().map(|row| parse_number(&row[c])).collect();
        match parsed {
            Some(values) => {
                schema.push(FeatureSchema::numeric(header[c].clone()));
                columns.push(values);
            }
            None => {
                let mut levels: Vec<String> = Vec::new();
                let mut index: HashMap<String, usize> = HashMap::new();
                let values = raw
                    .iter()
                    .map(|row| {
                        let s = &row[c];
                        let next = levels.len();
                        let k = *index.entry(s.clone()).or_insert_with(|| {
                            levels.push(s.clone());
                            next
                        });
                        k as f64
                    })
                    .collect();
                schema.push(FeatureSchema::categorical(header[c].clone(), levels));
                columns.push(values);
            }
        }
    }
    let mut cells = Vec::with_capacity(n * p);
    for i in 0..n {
        cells.extend(columns.iter().map(|col| col[i]));
    }

    let target = match task {
        TaskKind::Regression => {
            let mut y = Vec::with_capacity(n);
            for (i, row) in raw.iter().enumerate() {
                let v = parse_number(&row[label_idx]).ok_or_else(|| Error::BadCell {
                    path: path.into(),
                    row: i + 2,
                    column: label_column.to_string(),
                    message: format!("regression label `{}` is not a number", row[label_idx]),
                })?;
                y.push(v);
            }
            Target::Regression(y)
        }
        TaskKind::Classification => {
            let mut classes: Vec<String> = fixed_classes.map(<[String]>::to_vec).unwrap_or_default();
            let mut index: HashMap<String, usize> = classes
                .iter()
                .enumerate()
                .map(|(k, c)| (c.clone(), k))
                .collect();
            let mut labels = Vec::with_capacity(n);
            for (i, row) in raw.iter().enumerate() {
                let s = &row[label_idx];
                let k = match index.get(s) {
                    Some(&k) => k,
                    None if fixed_classes.is_some() => {
                        return Err(Error::BadCell {
                            path: path.into(),
                            row: i + 2,
                            column: label_column.to_string(),
                            message: format!("label `{s}` is not one of the given classes"),
                        })
                    }
                    None => {
                        classes.push(s.clone());
                        index.insert(s.clone(), classes.len() - 1);
                        classes.len() - 1
                    }
                };
                labels.push(k);
            }
            Target::Classification { classes, labels }
        }
    };

    let ids = (1..=n).map(|i| i.to_string()).collect();
    Dataset::new(schema, cells, header[label_idx].clone(), target, ids)
}

/// Writes features then the label column. Row ids are implicit (row order).
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let mut header = dataset.feature_names();
    header.push(dataset.label_name().to_string());
    w.write_record(&header)?;
    let p = dataset.n_features();
    let mut record = Vec::with_capacity(p + 1);
    for i in 0..dataset.n_rows() {
        record.clear();
        record.extend((0..p).map(|j| dataset.cell_string(i, j)));
        record.push(dataset.label_string(i));
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimKind {
    /// `y = 1` iff `v1 > -1/3` and `v2 > -1/3`; `v3` is noise.
    AndGate,
    /// `y = 1` iff `v1 > 0` and `|v2| > 1/4`; `v3` is noise.
    Corners,
    /// `y = v1` if `v3 > 0`, else `v2`; `v4` is noise.
    RegInteraction,
    /// Three classes from bands of `v1` cut at `-1/3` and `1/3`; `v2`, `v3` are noise.
    ThreeBands,
}

impl SimKind {
    pub const ALL: [SimKind; 4] = [
        SimKind::AndGate,
        SimKind::Corners,
        SimKind::RegInteraction,
        SimKind::ThreeBands,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SimKind::AndGate => "and_gate",
            SimKind::Corners => "corners",
            SimKind::RegInteraction => "reg_interaction",
            SimKind::ThreeBands => "three_bands",
        }
    }

    pub fn n_features(self) -> usize {
        match self {
            SimKind::AndGate | SimKind::Corners | SimKind::ThreeBands => 3,
            SimKind::RegInteraction => 4,
        }
    }

    pub fn task(self) -> TaskKind {
        match self {
            SimKind::RegInteraction => TaskKind::Regression,
            _ => TaskKind::Classification,
        }
    }

    fn classes(self) -> Vec<String> {
        match self {
            SimKind::ThreeBands => vec!["0".into(), "1".into(), "2".into()],
            _ => vec!["0".into(), "1".into()],
        }
    }
}

impl std::str::FromStr for SimKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SimKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown simulation kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimSpec {
    pub kind: SimKind,
    pub n: usize,
    pub seed: u64,
}

pub fn and_gate_label(v1: f64, v2: f64) -> usize {
    let cut = -1.0 / 3.0;
    usize::from(v1 > cut && v2 > cut)
}

pub fn corners_label(v1: f64, v2: f64) -> usize {
    usize::from(v1 > 0.0 && v2.abs() > 0.25)
}

pub fn reg_interaction_response(v1: f64, v2: f64, v3: f64) -> f64 {
    if v3 > 0.0 {
        v1
    } else {
        v2
    }
}

pub fn three_bands_label(v1: f64) -> usize {
    if v1 < -1.0 / 3.0 {
        0
    } else if v1 < 1.0 / 3.0 {
        1
    } else {
        2
    }
}

/// Generates a simulation dataset. Features are iid U(-1, 1), drawn row-major
/// from a single seeded stream.
pub fn simulate(spec: SimSpec) -> Result<Dataset> {
    if spec.n == 0 {
        return Err(Error::InvalidArgument("simulation needs n >= 1".into()));
    }
    let p = spec.kind.n_features();
    let mut rng = rng::stream(spec.seed, &[rng::TAG_SIMULATE, spec.kind as u64]);
    let cells: Vec<f64> = (0..spec.n * p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let rows = cells.chunks_exact(p);
    let target = match spec.kind {
        SimKind::AndGate => Target::Classification {
            classes: spec.kind.classes(),
            labels: rows.map(|r| and_gate_label(r[0], r[1])).collect(),
        },
        SimKind::Corners => Target::Classification {
            classes: spec.kind.classes(),
            labels: rows.map(|r| corners_label(r[0], r[1])).collect(),
        },
        SimKind::ThreeBands => Target::Classification {
            classes: spec.kind.classes(),
            labels: rows.map(|r| three_bands_label(r[0])).collect(),
        },
        SimKind::RegInteraction => {
            Target::Regression(rows.map(|r| reg_interaction_response(r[0], r[1], r[2])).collect())
        }
    };
    let schema = (1..=p).map(|j| FeatureSchema::numeric(format!("v{j}"))).collect();
    let ids = (1..=spec.n).map(|i| i.to_string()).collect();
    Dataset::new(schema, cells, "y", target, ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_small_classification_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "d.csv", "a,b,y\n1,2,0\n3,4,1\n5,6,0\n");
        let ds = load_csv(&path, "y", TaskKind::Classification).unwrap();
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.classes(), ["0", "1"]);
        assert_eq!(ds.row(1), [3.0, 4.0]);
    }

    #[test]
    fn missing_label_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "d.csv", "a,b,y\n1,2,0\n3,4,1\n5,6,0\n");
        let err = load_csv(&path, "z", TaskKind::Classification).unwrap_err();
        assert!(matches!(err, Error::MissingLabelColumn { .. }));
        assert!(err.to_string().contains("label column not found"));
    }

    #[test]
    fn infers_categorical_levels_in_first_appearance_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "d.csv", "c,x,y\nlo,1,1.5\nhi,2,2.5\nlo,3,3.5\n");
        let ds = load_csv(&path, "y", TaskKind::Regression).unwrap();
        assert_eq!(
            ds.schema()[0].kind,
            FeatureKind::Categorical {
                levels: vec!["lo".into(), "hi".into()]
            }
        );
        assert_eq!(ds.column(0), [0.0, 1.0, 0.0]);
        assert_eq!(ds.schema()[1].kind, FeatureKind::Numeric);
    }

    #[test]
    fn load_errors_carry_positions() {
        let dir = tempfile::tempdir().unwrap();
        let ragged = write_file(&dir, "r.csv", "a,b,y\n1,2,0\n3,1\n");
        match load_csv(&ragged, "y", TaskKind::Classification).unwrap_err() {
            Error::RaggedRow { row, expected, found, .. } => {
                assert_eq!((row, expected, found), (3, 3, 2));
            }
            e => panic!("unexpected {e}"),
        }
        let empty = write_file(&dir, "e.csv", "");
        assert!(matches!(
            load_csv(&empty, "y", TaskKind::Classification).unwrap_err(),
            Error::EmptyFile { .. }
        ));
        let missing = write_file(&dir, "m.csv", "a,y\n1,0\n,1\n");
        match load_csv(&missing, "y", TaskKind::Classification).unwrap_err() {
            Error::BadCell { row, column, .. } => assert_eq!((row, column.as_str()), (3, "a")),
            e => panic!("unexpected {e}"),
        }
        let nofile = dir.path().join("nope.csv");
        assert!(matches!(
            load_csv(&nofile, "y", TaskKind::Classification).unwrap_err(),
            Error::Io { .. }
        ));
        let bad_reg = write_file(&dir, "b.csv", "a,y\n1,x\n");
        assert!(matches!(
            load_csv(&bad_reg, "y", TaskKind::Regression).unwrap_err(),
            Error::BadCell { .. }
        ));
    }

    #[test]
    fn fixed_class_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "d.csv", "a,y\n1,b\n2,a\n");
        let classes = vec!["a".to_string(), "b".to_string()];
        let ds = load_csv_with_classes(&path, "y", &classes).unwrap();
        assert_eq!(ds.classes(), ["a", "b"]);
        assert_eq!(ds.label_string(0), "b");
        let only_a = vec!["a".to_string()];
        assert!(load_csv_with_classes(&path, "y", &only_a).is_err());
    }

    #[test]
    fn simulation_label_rules() {
        assert_eq!(and_gate_label(0.5, 0.5), 1);
        assert_eq!(and_gate_label(0.5, -0.9), 0);
        assert_eq!(corners_label(0.5, 0.5), 1);
        assert_eq!(corners_label(-0.5, 0.5), 0);
        assert_eq!(corners_label(0.5, 0.1), 0);
        assert_eq!(reg_interaction_response(0.3, -0.8, 0.2), 0.3);
        assert_eq!(reg_interaction_response(0.3, -0.8, -0.2), -0.8);
        assert_eq!(three_bands_label(-0.9), 0);
        assert_eq!(three_bands_label(0.0), 1);
        assert_eq!(three_bands_label(0.9), 2);
    }

    #[test]
    fn simulate_shapes_and_consistency() {
        for kind in SimKind::ALL {
            let ds = simulate(SimSpec { kind, n: 50, seed: 3 }).unwrap();
            assert_eq!(ds.n_rows(), 50);
            assert_eq!(ds.n_features(), kind.n_features());
            assert_eq!(ds.task(), kind.task());
            assert!(ds.cells().iter().all(|v| (-1.0..1.0).contains(v)));
            for i in 0..ds.n_rows() {
                let r = ds.row(i);
                let ok = match (kind, ds.target()) {
                    (SimKind::AndGate, Target::Classification { labels, .. }) => {
                        labels[i] == and_gate_label(r[0], r[1])
                    }
                    (SimKind::Corners, Target::Classification { labels, .. }) => {
                        labels[i] == corners_label(r[0], r[1])
                    }
                    (SimKind::ThreeBands, Target::Classification { labels, .. }) => {
                        labels[i] == three_bands_label(r[0])
                    }
                    (SimKind::RegInteraction, Target::Regression(y)) => {
                        y[i] == reg_interaction_response(r[0], r[1], r[2])
                    }
                    _ => false,
                };
                assert!(ok, "row {i} of {}", kind.as_str());
            }
        }
        assert!(simulate(SimSpec { kind: SimKind::AndGate, n: 0, seed: 1 }).is_err());
    }

    #[test]
    fn simulate_is_pure() {
        let spec = SimSpec { kind: SimKind::Corners, n: 100, seed: 42 };
        let a = simulate(spec).unwrap();
        let b = simulate(spec).unwrap();
        assert_eq!(a, b);
        let c = simulate(SimSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a.cells(), c.cells());
    }

    #[test]
    fn label_means_match_region_probabilities() {
        let ag = simulate(SimSpec { kind: SimKind::AndGate, n: 100_000, seed: 11 }).unwrap();
        let mean = ag.class_balance()[1];
        assert!((mean - 4.0 / 9.0).abs() < 0.01, "and_gate mean {mean}");
        let co = simulate(SimSpec { kind: SimKind::Corners, n: 100_000, seed: 11 }).unwrap();
        let mean = co.class_balance()[1];
        assert!((mean - 0.375).abs() < 0.01, "corners mean {mean}");
    }

    #[test]
    fn write_to_directory_path_fails() {
        let dir = tempfile::tempdir().unwrap();
        let ds = simulate(SimSpec { kind: SimKind::AndGate, n: 10, seed: 1 }).unwrap();
        assert!(matches!(write_csv(&ds, dir.path()).unwrap_err(), Error::Io { .. }));
    }

    #[test]
    fn dataset_invariants_are_checked() {
        let schema = vec![FeatureSchema::categorical("c", vec!["a".into()])];
        let target = Target::Regression(vec![1.0]);
        assert!(Dataset::new(schema.clone(), vec![1.0], "y", target.clone(), vec!["1".into()]).is_err());
        assert!(Dataset::new(schema.clone(), vec![0.0], "c", target.clone(), vec!["1".into()]).is_err());
        assert!(Dataset::new(schema, vec![0.0], "y", target, vec!["1".into()]).is_ok());
        let dup = vec![FeatureSchema::numeric("a"), FeatureSchema::numeric("a")];
        assert!(Dataset::new(dup, vec![0.0, 0.0], "y", Target::Regression(vec![0.0]), vec!["1".into()]).is_err());
    }
}
