//! Local variable importance by quantile-grid replacement (CLIQUE) and by
//! column permutation (CLIP), plus global permutation importance and partial
//! dependence.
//!
//! Both local methods score row `i`, feature `j` as the average change in the
//! row's out-of-fold loss when `x[i][j]` is replaced by `M` alternative values:
//!
//! ```text
//! V[i][j] = (1/M) * sum_m L(f(x_i with x_ij := alt_m), y_i) - L(f(x_i), y_i)
//! ```
//!
//! The sum is accumulated as `sum_m (L_m - L_0) / M`, which is algebraically
//! the same and is exactly zero whenever every altered loss equals the
//! baseline.

use std::fs::File;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cv::{check_ensemble, cv_errors, CvEnsemble};
use crate::data::{Dataset, FeatureKind, Target, TaskKind};
use crate::error::{Error, Result};
use crate::models::{Prediction, Predictor};
use crate::quantile;
use crate::rng;

/// Default number of replacement values per feature.
pub const DEFAULT_M: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossSpec {
    /// `(prediction - y)^2`; regression only.
    SquaredError,
    /// 1 when the predicted class differs from the true class.
    ZeroOne,
    /// `sum_c (p_c - 1{y = c})^2` over the vote-share vector.
    Brier,
}

impl LossSpec {
    pub fn default_for(task: TaskKind) -> Self {
        match task {
            TaskKind::Regression => LossSpec::SquaredError,
            TaskKind::Classification => LossSpec::ZeroOne,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LossSpec::SquaredError => "squared_error",
            LossSpec::ZeroOne => "zero_one",
            LossSpec::Brier => "brier",
        }
    }

    pub fn check(self, task: TaskKind) -> Result<()> {
        let ok = matches!(
            (self, task),
            (LossSpec::SquaredError, TaskKind::Regression)
                | (LossSpec::ZeroOne | LossSpec::Brier, TaskKind::Classification)
        );
        if ok {
            Ok(())
        } else {
            Err(Error::LossTaskMismatch {
                loss: self.as_str(),
                task: task.as_str(),
            })
        }
    }

    /// Loss of `prediction` against row `i` of `target`. Assumes [`check`](Self::check) passed.
    pub fn eval(self, prediction: &Prediction, target: &Target, i: usize) -> f64 {
        match (self, prediction, target) {
            (LossSpec::SquaredError, Prediction::Value(v), Target::Regression(y)) => {
                let d = v - y[i];
                d * d
            }
            (LossSpec::ZeroOne, Prediction::Class { label, .. }, Target::Classification { labels, .. }) => {
                if *label == labels[i] {
                    0.0
                } else {
                    1.0
                }
            }
            (LossSpec::Brier, Prediction::Class { probs, .. }, Target::Classification { labels, .. }) => probs
                .iter()
                .enumerate()
                .map(|(c, p)| {
                    let d = p - if c == labels[i] { 1.0 } else { 0.0 };
                    d * d
                })
                .sum(),
            _ => unreachable!("loss/task compatibility is checked up front"),
        }
    }

    pub(crate) fn eval_row(self, model: &Predictor, row: &[f64], target: &Target, i: usize) -> f64 {
        match (self, target) {
            (LossSpec::ZeroOne, Target::Classification { labels, .. }) => {
                if model.predict_label(row) == labels[i] {
                    0.0
                } else {
                    1.0
                }
            }
            _ => self.eval(&model.predict_unchecked(row), target, i),
        }
    }
}

impl std::str::FromStr for LossSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared_error" => Ok(LossSpec::SquaredError),
            "zero_one" => Ok(LossSpec::ZeroOne),
            "brier" => Ok(LossSpec::Brier),
            other => Err(Error::InvalidArgument(format!("unknown loss `{other}`"))),
        }
    }
}

/// Replacement values for one feature.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileGrid {
    pub feature: usize,
    /// Numeric values (nondecreasing) or categorical level indices.
    pub values: Vec<f64>,
    /// Quantile probabilities for numeric grids; uniform weights `1/L` for
    /// categorical grids.
    pub probs: Vec<f64>,
}

impl QuantileGrid {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `M` type-7 quantiles of column `j` at probabilities `(m - 1) / (M - 1)`,
/// `m = 1..M`; `M = 1` gives the median. Categorical columns yield every
/// observed level instead, whatever `M` is.
pub fn quantile_grid(dataset: &Dataset, j: usize, m: usize) -> Result<QuantileGrid> {
    if j >= dataset.n_features() {
        return Err(Error::InvalidArgument(format!(
            "feature index {j} out of range for {} features",
            dataset.n_features()
        )));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("grid size M must be at least 1".into()));
    }
    let column = dataset.column(j);
    match &dataset.schema()[j].kind {
        FeatureKind::Numeric => {
            let sorted = quantile::sorted_copy(&column);
            let (values, probs) = if m == 1 {
                (vec![quantile::type7_rational(&sorted, 1, 2).expect("non-empty")], vec![0.5])
            } else {
                (0..m)
                    .map(|k| {
                        let v = quantile::type7_rational(&sorted, k, m - 1).expect("non-empty");
                        (v, k as f64 / (m - 1) as f64)
                    })
                    .unzip()
            };
            Ok(QuantileGrid { feature: j, values, probs })
        }
        FeatureKind::Categorical { levels } => {
            let mut seen = vec![false; levels.len()];
            for v in &column {
                seen[*v as usize] = true;
            }
            let values: Vec<f64> = (0..levels.len()).filter(|&l| seen[l]).map(|l| l as f64).collect();
            let w = 1.0 / values.len() as f64;
            Ok(QuantileGrid {
                feature: j,
                probs: vec![w; values.len()],
                values,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Clique,
    Clip,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Clique => "clique",
            Method::Clip => "clip",
        }
    }
}

/// `n x p` local importances with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceMatrix {
    values: Vec<f64>,
    n: usize,
    p: usize,
    pub method: Method,
    pub m: usize,
    pub loss: LossSpec,
    /// Permutation seed (CLIP only).
    pub seed: Option<u64>,
    pub baseline: Vec<f64>,
    pub ids: Vec<String>,
    pub feature_names: Vec<String>,
}

impl ImportanceMatrix {
    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_features(&self) -> usize {
        self.p
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn column_mean(&self, j: usize) -> f64 {
        crate::cv::mean(&self.column(j))
    }

    /// Provenance fields for the metadata sidecar.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("method".to_string(), self.method.as_str().to_string()),
            ("M".to_string(), self.m.to_string()),
            ("loss".to_string(), self.loss.as_str().to_string()),
            (
                "permutation_seed".to_string(),
                self.seed.map_or_else(|| "NA".to_string(), |s| s.to_string()),
            ),
            ("n".to_string(), self.n.to_string()),
            ("p".to_string(), self.p.to_string()),
        ];
        kv.push(("cv_error".to_string(), format!("{:.16e}", crate::cv::mean(&self.baseline))));
        kv
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        ImportanceTable {
            ids: self.ids.clone(),
            feature_names: self.feature_names.clone(),
            values: self.values.clone(),
        }
        .write_csv(path)
    }
}

/// Importance CSV contents without provenance: `id,<features...>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceTable {
    pub ids: Vec<String>,
    pub feature_names: Vec<String>,
    /// Row-major, `ids.len() x feature_names.len()`.
    pub values: Vec<f64>,
}

impl ImportanceTable {
    pub fn column(&self, j: usize) -> Vec<f64> {
        let p = self.feature_names.len();
        (0..self.ids.len()).map(|i| self.values[i * p + j]).collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    /// Values are written with 17 significant digits, which round-trips `f64`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        let mut header = vec!["id".to_string()];
        header.extend(self.feature_names.iter().cloned());
        w.write_record(&header)?;
        let p = self.feature_names.len();
        for (i, id) in self.ids.iter().enumerate() {
            let mut rec = vec![id.clone()];
            rec.extend(self.values[i * p..(i + 1) * p].iter().map(|v| format!("{v:.16e}")));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(file);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.first().map(String::as_str) != Some("id") || header.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "{}: importance file must start with an `id` column and one feature",
                path.display()
            )));
        }
        let mut ids = Vec::new();
        let mut values = Vec::new();
        for (r, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != header.len() {
                return Err(Error::RaggedRow {
                    path: path.into(),
                    row: r + 2,
                    expected: header.len(),
                    found: rec.len(),
                });
            }
            ids.push(rec[0].to_string());
            for (c, cell) in rec.iter().enumerate().skip(1) {
                let v: f64 = cell.trim().parse().map_err(|_| Error::BadCell {
                    path: path.into(),
                    row: r + 2,
                    column: header[c].clone(),
                    message: format!("`{cell}` is not a number"),
                })?;
                values.push(v);
            }
        }
        Ok(ImportanceTable {
            ids,
            feature_names: header[1..].to_vec(),
            values,
        })
    }
}

/// Out-of-fold losses of every row with feature `j` set to each of `values`,
/// one vector per value: `out[m][i]`.
pub fn grid_losses(
    ens: &CvEnsemble,
    dataset: &Dataset,
    loss: LossSpec,
    j: usize,
    values: &[f64],
) -> Result<Vec<Vec<f64>>> {
    loss.check(dataset.task())?;
    check_ensemble(ens, dataset)?;
    Ok(values
        .par_iter()
        .map(|&v| replaced_losses(ens, dataset, loss, j, |_| v))
        .collect())
}

fn replaced_losses(
    ens: &CvEnsemble,
    dataset: &Dataset,
    loss: LossSpec,
    j: usize,
    replacement: impl Fn(usize) -> f64,
) -> Vec<f64> {
    let mut buf = vec![0.0; dataset.n_features()];
    (0..dataset.n_rows())
        .map(|i| {
            buf.copy_from_slice(dataset.row(i));
            buf[j] = replacement(i);
            loss.eval_row(ens.model_for(i), &buf, dataset.target(), i)
        })
        .collect()
}

/// `sum_m (altered[m][i] - baseline[i]) / M`, summed in `m` order.
fn average_increase(altered: &[Vec<f64>], baseline: &[f64]) -> Vec<f64> {
    let m = altered.len() as f64;
    baseline
        .iter()
        .enumerate()
        .map(|(i, &base)| altered.iter().map(|l| l[i] - base).sum::<f64>() / m)
        .collect()
}

fn assemble(
    dataset: &Dataset,
    columns: Vec<Vec<f64>>,
    method: Method,
    m: usize,
    loss: LossSpec,
    seed: Option<u64>,
    baseline: Vec<f64>,
) -> ImportanceMatrix {
    let (n, p) = (dataset.n_rows(), dataset.n_features());
    let mut values = vec![0.0; n * p];
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            values[i * p + j] = *v;
        }
    }
    ImportanceMatrix {
        values,
        n,
        p,
        method,
        m,
        loss,
        seed,
        baseline,
        ids: dataset.ids().to_vec(),
        feature_names: dataset.feature_names(),
    }
}

/// Quantile-grid local importance. Categorical features use every observed
/// level as the grid, so their effective `M` is the level count.
pub fn clique(ens: &CvEnsemble, dataset: &Dataset, loss: LossSpec, m: usize) -> Result<ImportanceMatrix> {
    let baseline = cv_errors(ens, dataset, loss)?;
    let grids = (0..dataset.n_features())
        .map(|j| quantile_grid(dataset, j, m))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, f64)> = grids
        .iter()
        .flat_map(|g| g.values.iter().map(move |&v| (g.feature, v)))
        .collect();
    let losses: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(j, v)| replaced_losses(ens, dataset, loss, j, |_| v))
        .collect();
    let mut offset = 0;
    let columns = grids
        .iter()
        .map(|g| {
            let col = average_increase(&losses[offset..offset + g.len()], &baseline);
            offset += g.len();
            col
        })
        .collect();
    Ok(assemble(dataset, columns, Method::Clique, m, loss, None, baseline))
}

/// Permutation of `0..n` for feature `j`, repetition `rep`.
pub fn permutation(seed: u64, j: usize, rep: usize, n: usize) -> Vec<usize> {
    let mut rng = rng::stream(seed, &[rng::TAG_PERMUTE, j as u64, rep as u64]);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    perm
}

/// Per-row losses under each of `reps` permutations of each column:
/// `out[j][rep][i]`.
fn permuted_losses(
    ens: &CvEnsemble,
    dataset: &Dataset,
    loss: LossSpec,
    reps: usize,
    seed: u64,
) -> Vec<Vec<Vec<f64>>> {
    let (n, p) = (dataset.n_rows(), dataset.n_features());
    let jobs: Vec<(usize, usize)> = (0..p).flat_map(|j| (0..reps).map(move |r| (j, r))).collect();
    let flat: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(j, r)| {
            let perm = permutation(seed, j, r, n);
            replaced_losses(ens, dataset, loss, j, |i| dataset.cell(perm[i], j))
        })
        .collect();
    let mut it = flat.into_iter();
    (0..p).map(|_| it.by_ref().take(reps).collect()).collect()
}

/// Permutation-based local importance: `M` seeded permutations per feature.
pub fn clip(ens: &CvEnsemble, dataset: &Dataset, loss: LossSpec, m: usize, seed: u64) -> Result<ImportanceMatrix> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be at least 1".into()));
    }
    let baseline = cv_errors(ens, dataset, loss)?;
    let columns = permuted_losses(ens, dataset, loss, m, seed)
        .iter()
        .map(|per_rep| average_increase(per_rep, &baseline))
        .collect();
    Ok(assemble(dataset, columns, Method::Clip, m, loss, Some(seed), baseline))
}

/// Global permutation importance: for each feature, the mean over `reps`
/// permutations of (CV error with the column permuted - baseline CV error).
/// Uses the same permutation streams as [`clip`].
pub fn global_permutation_importance(
    ens: &CvEnsemble,
    dataset: &Dataset,
    loss: LossSpec,
    reps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    let baseline = cv_errors(ens, dataset, loss)?;
    let base = crate::cv::mean(&baseline);
    Ok(permuted_losses(ens, dataset, loss, reps, seed)
        .iter()
        .map(|per_rep| per_rep.iter().map(|l| crate::cv::mean(l) - base).sum::<f64>() / reps as f64)
        .collect())
}

/// Mean prediction over all rows with feature `j` set to each grid value.
/// Classification reports the vote share of `class` (default: last class).
pub fn partial_dependence(
    predictor: &Predictor,
    dataset: &Dataset,
    j: usize,
    m: usize,
    class: Option<usize>,
) -> Result<Vec<(f64, f64)>> {
    if m < 2 {
        return Err(Error::InvalidArgument("partial dependence needs M >= 2".into()));
    }
    if !predictor.matches(dataset) {
        return Err(Error::InvalidArgument("model was fitted on a different schema".into()));
    }
    let class = match predictor.task() {
        TaskKind::Classification => {
            let k = predictor.classes().len();
            let c = class.unwrap_or(k - 1);
            if c >= k {
                return Err(Error::InvalidArgument(format!("class index {c} out of range")));
            }
            c
        }
        TaskKind::Regression => 0,
    };
    let grid = quantile_grid(dataset, j, m)?;
    let n = dataset.n_rows() as f64;
    Ok(grid
        .values
        .par_iter()
        .map(|&v| {
            let mut buf = vec![0.0; dataset.n_features()];
            let total: f64 = (0..dataset.n_rows())
                .map(|i| {
                    buf.copy_from_slice(dataset.row(i));
                    buf[j] = v;
                    match predictor.predict_unchecked(&buf) {
                        Prediction::Value(y) => y,
                        Prediction::Class { probs, .. } => probs[class],
                    }
                })
                .sum();
            (v, total / n)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cv::{assign_folds, fit_cv};
    use crate::data::{simulate, FeatureSchema, SimKind, SimSpec};
    use crate::models::{fit_tree, Hyperparams};

    fn column_dataset(xs: &[f64]) -> Dataset {
        let n = xs.len();
        Dataset::new(
            vec![FeatureSchema::numeric("x")],
            xs.to_vec(),
            "y",
            Target::Regression(xs.to_vec()),
            (1..=n).map(|i| i.to_string()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn grids_from_order_statistics() {
        let d = column_dataset(&[3.0, 1.0, 5.0, 2.0, 4.0]);
        assert_eq!(quantile_grid(&d, 0, 5).unwrap().values, [1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(quantile_grid(&d, 0, 2).unwrap().values, [1.0, 5.0]);
        assert_eq!(quantile_grid(&d, 0, 1).unwrap().values, [3.0]);
        let g = quantile_grid(&column_dataset(&[10.0, 0.0]), 0, 3).unwrap();
        assert_eq!(g.values, [0.0, 5.0, 10.0]);
        assert_eq!(g.probs, [0.0, 0.5, 1.0]);
        assert!(quantile_grid(&d, 1, 5).is_err());
        assert!(quantile_grid(&d, 0, 0).is_err());
    }

    #[test]
    fn categorical_grid_uses_observed_levels() {
        let d = Dataset::new(
            vec![FeatureSchema::categorical("c", vec!["a".into(), "b".into(), "z".into()])],
            vec![2.0, 0.0, 2.0],
            "y",
            Target::Regression(vec![1.0, 2.0, 3.0]),
            vec!["1".into(), "2".into(), "3".into()],
        )
        .unwrap();
        let g = quantile_grid(&d, 0, 25).unwrap();
        assert_eq!(g.values, [0.0, 2.0]);
        assert_eq!(g.probs, [0.5, 0.5]);
    }

    #[test]
    fn loss_values() {
        let reg = Target::Regression(vec![5.0]);
        assert_eq!(LossSpec::SquaredError.eval(&Prediction::Value(3.0), &reg, 0), 4.0);
        let cls = Target::Classification {
            classes: vec!["a".into(), "b".into()],
            labels: vec![1],
        };
        let pred = Prediction::Class { label: 0, probs: vec![0.75, 0.25] };
        assert_eq!(LossSpec::ZeroOne.eval(&pred, &cls, 0), 1.0);
        assert_eq!(LossSpec::Brier.eval(&pred, &cls, 0), 0.75 * 0.75 + 0.75 * 0.75);
        assert!(LossSpec::SquaredError.check(TaskKind::Classification).is_err());
        assert!(LossSpec::Brier.check(TaskKind::Regression).is_err());
        assert!(LossSpec::ZeroOne.check(TaskKind::Classification).is_ok());
    }

    #[test]
    fn average_increase_arithmetic() {
        // one row, baseline correct, 7 of 25 replacements wrong
        let altered: Vec<Vec<f64>> = (0..25).map(|m| vec![if m < 7 { 1.0 } else { 0.0 }]).collect();
        assert_eq!(average_increase(&altered, &[0.0]), [7.0 / 25.0]);
        assert_eq!(average_increase(&altered, &[0.0])[0], 0.28);
        // constant altered loss equal to the baseline cancels exactly
        let same: Vec<Vec<f64>> = vec![vec![0.1]; 3];
        assert_eq!(average_increase(&same, &[0.1]), [0.0]);
    }

    #[test]
    fn permutations_are_seeded_and_complete() {
        assert_eq!(permutation(5, 0, 0, 1), [0]);
        let a = permutation(5, 2, 3, 50);
        assert_eq!(a, permutation(5, 2, 3, 50));
        assert_ne!(a, permutation(5, 2, 4, 50));
        let mut sorted = a.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn pdp_of_step_tree() {
        let xs = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let d = Dataset::new(
            vec![FeatureSchema::numeric("x")],
            xs.to_vec(),
            "y",
            Target::Classification {
                classes: vec!["0".into(), "1".into()],
                labels: xs.iter().map(|&x| usize::from(x > 0.0)).collect(),
            },
            (1..=5).map(|i| i.to_string()).collect(),
        )
        .unwrap();
        let tree = fit_tree(&d, &Hyperparams::default(), &[0, 1, 2, 3, 4]).unwrap();
        let pd = partial_dependence(&tree, &d, 0, 3, None).unwrap();
        assert_eq!(pd, [(-1.0, 0.0), (0.0, 0.0), (1.0, 1.0)]);
        assert!(partial_dependence(&tree, &d, 0, 1, None).is_err());
        assert!(partial_dependence(&tree, &d, 3, 3, None).is_err());
    }

    #[test]
    fn importance_table_round_trip() {
        let d = simulate(SimSpec { kind: SimKind::AndGate, n: 40, seed: 3 }).unwrap();
        let folds = assign_folds(&d, 4, true, 1).unwrap();
        let ens = fit_cv(&d, &Hyperparams { n_trees: 10, ..Hyperparams::default() }, &folds).unwrap();
        let v = clique(&ens, &d, LossSpec::Brier, 7).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        v.write_csv(&path).unwrap();
        let t = ImportanceTable::read_csv(&path).unwrap();
        assert_eq!(t.ids, v.ids);
        assert_eq!(t.feature_names, ["v1", "v2", "v3"]);
        assert_eq!(t.values, v.values());
        assert!(v.values().iter().all(|x| (-2.0..=2.0).contains(x)));
    }
}
