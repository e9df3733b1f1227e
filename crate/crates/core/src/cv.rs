//! K-fold cross-validation: one model per fold, each observation scored by the
//! model that never saw it.

use std::fs::File;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::data::{Dataset, Target};
use crate::error::{Error, Result};
use crate::importance::LossSpec;
use crate::models::{fit_forest_on, Hyperparams, Prediction, Predictor};
use crate::rng;

pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    k: usize,
    fold_of: Vec<usize>,
    seed: u64,
}

impl FoldAssignment {
    /// Wraps an explicit assignment. Every fold in `0..k` must be non-empty.
    pub fn from_vec(k: usize, fold_of: Vec<usize>, seed: u64) -> Result<Self> {
        if k < 2 || k > fold_of.len() {
            return Err(Error::InvalidArgument(format!(
                "fold count {k} must be in 2..={}",
                fold_of.len()
            )));
        }
        let mut sizes = vec![0usize; k];
        for &f in &fold_of {
            if f >= k {
                return Err(Error::InvalidArgument(format!("fold index {f} >= k = {k}")));
            }
            sizes[f] += 1;
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidArgument("every fold must be non-empty".into()));
        }
        Ok(FoldAssignment { k, fold_of, seed })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fold_of(&self) -> &[usize] {
        &self.fold_of
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }

    /// Rows outside fold `f`, ascending.
    pub fn training_rows(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != f).collect()
    }

    /// Writes `id,fold` rows.
    pub fn write_csv(&self, dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["id", "fold"])?;
        for (id, f) in dataset.ids().iter().zip(&self.fold_of) {
            w.write_record([id.as_str(), &f.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Random balanced partition into `k` folds.
///
/// Rows are shuffled (per class when stratifying, classes taken in order) and
/// dealt round-robin, so fold sizes differ by at most one overall and, when
/// stratified, within each class.
pub fn assign_folds(dataset: &Dataset, k: usize, stratify: bool, seed: u64) -> Result<FoldAssignment> {
    let n = dataset.n_rows();
    if k < 2 || k > n {
        return Err(Error::InvalidArgument(format!("fold count {k} must be in 2..={n}")));
    }
    let mut rng = rng::stream(seed, &[rng::TAG_FOLDS]);
    let order: Vec<usize> = match (stratify, dataset.target()) {
        (true, Target::Classification { classes, labels }) => {
            let mut order = Vec::with_capacity(n);
            for c in 0..classes.len() {
                let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
                members.shuffle(&mut rng);
                order.extend(members);
            }
            order
        }
        _ => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            order
        }
    };
    let mut fold_of = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % k;
    }
    FoldAssignment::from_vec(k, fold_of, seed)
}

/// Fold models plus the routing needed to score each row out-of-fold.
#[derive(Debug, Clone)]
pub struct CvEnsemble {
    folds: FoldAssignment,
    models: Vec<Predictor>,
    training: Vec<Vec<usize>>,
    hp: Hyperparams,
}

impl CvEnsemble {
    pub fn folds(&self) -> &FoldAssignment {
        &self.folds
    }

    pub fn models(&self) -> &[Predictor] {
        &self.models
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hp
    }

    /// Rows the model for fold `f` was trained on.
    pub fn training_rows(&self, f: usize) -> &[usize] {
        &self.training[f]
    }

    /// The model that excluded row `i`.
    pub fn model_for(&self, i: usize) -> &Predictor {
        &self.models[self.folds.fold_of[i]]
    }

    /// Out-of-fold prediction for row `i` evaluated at `row` (which may be an
    /// altered copy of the original features).
    pub fn predict_as(&self, i: usize, row: &[f64]) -> Result<Prediction> {
        self.model_for(i).predict(row)
    }

    pub fn cv_predict(&self, dataset: &Dataset, i: usize) -> Result<Prediction> {
        self.predict_as(i, dataset.row(i))
    }
}

/// Fits one forest per fold. Every fold model uses the same hyperparameters,
/// seed included, so the result depends only on each model's training set.
pub fn fit_cv(dataset: &Dataset, hp: &Hyperparams, folds: &FoldAssignment) -> Result<CvEnsemble> {
    if folds.fold_of.len() != dataset.n_rows() {
        return Err(Error::InvalidArgument(format!(
            "fold assignment covers {} rows, dataset has {}",
            folds.fold_of.len(),
            dataset.n_rows()
        )));
    }
    let training: Vec<Vec<usize>> = (0..folds.k).map(|f| folds.training_rows(f)).collect();
    let models = training
        .par_iter()
        .map(|rows| fit_forest_on(dataset, hp, rows))
        .collect::<Result<Vec<_>>>()?;
    Ok(CvEnsemble {
        folds: folds.clone(),
        models,
        training,
        hp: hp.clone(),
    })
}

/// Per-row out-of-fold loss.
pub fn cv_errors(ens: &CvEnsemble, dataset: &Dataset, loss: LossSpec) -> Result<Vec<f64>> {
    loss.check(dataset.task())?;
    check_ensemble(ens, dataset)?;
    Ok((0..dataset.n_rows())
        .into_par_iter()
        .map(|i| loss.eval_row(ens.model_for(i), dataset.row(i), dataset.target(), i))
        .collect())
}

pub(crate) fn check_ensemble(ens: &CvEnsemble, dataset: &Dataset) -> Result<()> {
    if ens.folds.fold_of.len() != dataset.n_rows() || !ens.models.iter().all(|m| m.matches(dataset)) {
        return Err(Error::InvalidArgument(
            "cross-validation ensemble was fitted on a different dataset".into(),
        ));
    }
    Ok(())
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
