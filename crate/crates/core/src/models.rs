//! CART trees and random forests behind one [`Predictor`] type.
//!
//! Numeric splits send `x <= threshold` left, thresholds being midpoints
//! between consecutive distinct values. Categorical splits are one level
//! against the rest. Classification uses Gini impurity, regression uses
//! variance reduction.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureSchema, Target, TaskKind};
use crate::error::{Error, Result};
use crate::rng;

/// Forest hyperparameters. `None` fields take task-dependent defaults when
/// resolved against a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub n_trees: usize,
    /// Features tried per split: default `floor(sqrt(p))` for classification,
    /// `floor(p / 3)` for regression, at least 1.
    pub mtry: Option<usize>,
    /// Minimum rows per leaf: default 1 for classification, 5 for regression.
    pub min_node_size: Option<usize>,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            n_trees: 500,
            mtry: None,
            min_node_size: None,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

/// Hyperparameters with every default filled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolvedParams {
    pub n_trees: usize,
    pub mtry: usize,
    pub min_node_size: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Hyperparams {
    pub fn resolve(&self, task: TaskKind, p: usize) -> Result<ResolvedParams> {
        let mtry = self.mtry.unwrap_or_else(|| {
            let d = match task {
                TaskKind::Classification => (p as f64).sqrt().floor() as usize,
                TaskKind::Regression => p / 3,
            };
            d.max(1)
        });
        let min_node_size = self.min_node_size.unwrap_or(match task {
            TaskKind::Classification => 1,
            TaskKind::Regression => 5,
        });
        if self.n_trees == 0 {
            return Err(Error::InvalidArgument("n_trees must be at least 1".into()));
        }
        if mtry == 0 || mtry > p {
            return Err(Error::InvalidArgument(format!("mtry must be in 1..={p}, got {mtry}")));
        }
        if min_node_size == 0 {
            return Err(Error::InvalidArgument("min_node_size must be at least 1".into()));
        }
        Ok(ResolvedParams {
            n_trees: self.n_trees,
            mtry,
            min_node_size,
            max_depth: self.max_depth,
            bootstrap: self.bootstrap,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SplitRule {
    /// Left when `x <= threshold`.
    Threshold(f64),
    /// Left when the categorical cell equals this level index.
    Level(f64),
}

impl SplitRule {
    #[inline]
    fn goes_left(self, x: f64) -> bool {
        match self {
            SplitRule::Threshold(t) => x <= t,
            SplitRule::Level(l) => x == l,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Leaf {
    /// Majority class (ties to the earliest class) and per-class row counts.
    Class { class: usize, counts: Vec<u32> },
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        rule: SplitRule,
        left: usize,
        right: usize,
    },
    Leaf(Leaf),
}

/// A fitted CART tree stored as a flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaf(&self, row: &[f64]) -> &Leaf {
        let mut k = 0;
        loop {
            match &self.nodes[k] {
                Node::Split {
                    feature,
                    rule,
                    left,
                    right,
                } => k = if rule.goes_left(row[*feature]) { *left } else { *right },
                Node::Leaf(leaf) => return leaf,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], k: usize) -> usize {
            match &nodes[k] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    fn split_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf(_) => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    /// Predicted class index and per-class probabilities (vote shares).
    Class { label: usize, probs: Vec<f64> },
    Value(f64),
}

impl Prediction {
    pub fn value(&self) -> Option<f64> {
        match self {
            Prediction::Value(v) => Some(*v),
            Prediction::Class { .. } => None,
        }
    }

    pub fn label(&self) -> Option<usize> {
        match self {
            Prediction::Class { label, .. } => Some(*label),
            Prediction::Value(_) => None,
        }
    }
}

const MODEL_FORMAT: &str = "clique-forest";
const MODEL_VERSION: u32 = 1;

/// A fitted tree ensemble. A single tree is an ensemble of one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictor {
    format: String,
    version: u32,
    task: TaskKind,
    classes: Vec<String>,
    schema: Vec<FeatureSchema>,
    schema_fingerprint: u64,
    trees: Vec<Tree>,
}

fn fingerprint(schema: &[FeatureSchema]) -> u64 {
    // FNV-1a over the JSON form of the schema.
    let bytes = serde_json::to_vec(schema).expect("schema serializes");
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

impl Predictor {
    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn schema_fingerprint(&self) -> u64 {
        self.schema_fingerprint
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Features used by at least one split anywhere in the ensemble.
    pub fn split_features(&self) -> BTreeSet<usize> {
        self.trees.iter().flat_map(Tree::split_features).collect()
    }

    /// True when `dataset` has the schema this model was fitted on.
    pub fn matches(&self, dataset: &Dataset) -> bool {
        fingerprint(dataset.schema()) == self.schema_fingerprint
    }

    pub fn predict(&self, row: &[f64]) -> Result<Prediction> {
        if row.len() != self.n_features() {
            return Err(Error::SchemaMismatch {
                expected: self.n_features(),
                found: row.len(),
            });
        }
        Ok(self.predict_unchecked(row))
    }

    pub(crate) fn predict_unchecked(&self, row: &[f64]) -> Prediction {
        match self.task {
            TaskKind::Classification => {
                let probs = self.vote_shares(row);
                Prediction::Class {
                    label: argmax_first(&probs),
                    probs,
                }
            }
            TaskKind::Regression => Prediction::Value(self.mean_value(row)),
        }
    }

    /// Majority-vote class only, without building the probability vector.
    pub(crate) fn predict_label(&self, row: &[f64]) -> usize {
        let mut votes = vec![0u32; self.classes.len()];
        for t in &self.trees {
            if let Leaf::Class { class, .. } = t.leaf(row) {
                votes[*class] += 1;
            }
        }
        argmax_first(&votes)
    }

    fn vote_shares(&self, row: &[f64]) -> Vec<f64> {
        let mut votes = vec![0u32; self.classes.len()];
        for t in &self.trees {
            if let Leaf::Class { class, .. } = t.leaf(row) {
                votes[*class] += 1;
            }
        }
        let total = self.trees.len() as f64;
        votes.into_iter().map(|v| f64::from(v) / total).collect()
    }

    fn mean_value(&self, row: &[f64]) -> f64 {
        let (mut sum, mut lo, mut hi) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
        for t in &self.trees {
            if let Leaf::Value(v) = t.leaf(row) {
                sum += v;
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
        }
        (sum / self.trees.len() as f64).clamp(lo, hi)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::ModelFormat(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Predictor = serde_json::from_str(s).map_err(|e| Error::ModelFormat(e.to_string()))?;
        p.check_header()?;
        Ok(p)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(BufWriter::new(f), self).map_err(|e| Error::ModelFormat(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let p: Predictor = serde_json::from_reader(BufReader::new(f))
            .map_err(|e| Error::ModelFormat(e.to_string()))?;
        p.check_header()?;
        Ok(p)
    }

    fn check_header(&self) -> Result<()> {
        if self.format != MODEL_FORMAT || self.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported format {} v{}",
                self.format, self.version
            )));
        }
        if self.schema_fingerprint != fingerprint(&self.schema) {
            return Err(Error::ModelFormat("schema fingerprint mismatch".into()));
        }
        Ok(())
    }
}

fn argmax_first<T: PartialOrd + Copy>(xs: &[T]) -> usize {
    let mut best = 0;
    for (k, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = k;
        }
    }
    best
}

/// Fits one CART tree on `rows` (no resampling). Uses the same random stream
/// as tree 0 of a forest with the same seed.
pub fn fit_tree(dataset: &Dataset, hp: &Hyperparams, rows: &[usize]) -> Result<Predictor> {
    let params = hp.resolve(dataset.task(), dataset.n_features())?;
    check_rows(dataset, rows)?;
    let mut rng = rng::stream(params.seed, &[rng::TAG_TREE, 0]);
    let tree = grow(dataset, &params, rows.to_vec(), &mut rng);
    Ok(wrap(dataset, vec![tree]))
}

pub fn fit_forest(dataset: &Dataset, hp: &Hyperparams) -> Result<Predictor> {
    let rows: Vec<usize> = (0..dataset.n_rows()).collect();
    fit_forest_on(dataset, hp, &rows)
}

/// Fits a forest on a subset of rows. Tree `t` draws its bootstrap sample and
/// split candidates from its own stream keyed by `(seed, t)`.
pub fn fit_forest_on(dataset: &Dataset, hp: &Hyperparams, rows: &[usize]) -> Result<Predictor> {
    let params = hp.resolve(dataset.task(), dataset.n_features())?;
    check_rows(dataset, rows)?;
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(params.seed, &[rng::TAG_TREE, t as u64]);
            let sample = if params.bootstrap {
                (0..rows.len())
                    .map(|_| rows[rng.gen_range(0..rows.len())])
                    .collect()
            } else {
                rows.to_vec()
            };
            grow(dataset, &params, sample, &mut rng)
        })
        .collect();
    Ok(wrap(dataset, trees))
}

fn check_rows(dataset: &Dataset, rows: &[usize]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptySubset);
    }
    if let Some(&bad) = rows.iter().find(|&&i| i >= dataset.n_rows()) {
        return Err(Error::InvalidArgument(format!(
            "row index {bad} out of range for {} rows",
            dataset.n_rows()
        )));
    }
    Ok(())
}

fn wrap(dataset: &Dataset, trees: Vec<Tree>) -> Predictor {
    Predictor {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        task: dataset.task(),
        classes: dataset.classes().to_vec(),
        schema: dataset.schema().to_vec(),
        schema_fingerprint: fingerprint(dataset.schema()),
        trees,
    }
}

/// Label view used while growing: class indices or regression values.
enum Labels<'a> {
    Class { labels: &'a [usize], n_classes: usize },
    Value(&'a [f64]),
}

struct Candidate {
    feature: usize,
    rule: SplitRule,
    score: f64,
}

fn grow(dataset: &Dataset, params: &ResolvedParams, rows: Vec<usize>, rng: &mut ChaCha8Rng) -> Tree {
    let labels = match dataset.target() {
        Target::Classification { classes, labels } => Labels::Class {
            labels,
            n_classes: classes.len(),
        },
        Target::Regression(y) => Labels::Value(y),
    };
    let mut nodes: Vec<Node> = Vec::new();
    // (node slot, rows, depth); processed depth-first, left child first.
    let mut stack = vec![(0usize, rows, 0usize)];
    nodes.push(Node::Leaf(Leaf::Value(0.0)));
    while let Some((slot, rows, depth)) = stack.pop() {
        let can_split = rows.len() >= 2 * params.min_node_size
            && params.max_depth.is_none_or(|d| depth < d)
            && !is_pure(&labels, &rows);
        let best = if can_split {
            best_split(dataset, params, &labels, &rows, rng)
        } else {
            None
        };
        match best {
            None => nodes[slot] = Node::Leaf(make_leaf(&labels, &rows)),
            Some(c) => {
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                    .iter()
                    .partition(|&&i| c.rule.goes_left(dataset.cell(i, c.feature)));
                let left = nodes.len();
                let right = left + 1;
                nodes.push(Node::Leaf(Leaf::Value(0.0)));
                nodes.push(Node::Leaf(Leaf::Value(0.0)));
                nodes[slot] = Node::Split {
                    feature: c.feature,
                    rule: c.rule,
                    left,
                    right,
                };
                stack.push((right, right_rows, depth + 1));
                stack.push((left, left_rows, depth + 1));
            }
        }
    }
    Tree { nodes }
}

fn is_pure(labels: &Labels, rows: &[usize]) -> bool {
    match labels {
        Labels::Class { labels, .. } => rows.iter().all(|&i| labels[i] == labels[rows[0]]),
        Labels::Value(y) => rows.iter().all(|&i| y[i] == y[rows[0]]),
    }
}

fn make_leaf(labels: &Labels, rows: &[usize]) -> Leaf {
    match labels {
        Labels::Class { labels, n_classes } => {
            let mut counts = vec![0u32; *n_classes];
            for &i in rows {
                counts[labels[i]] += 1;
            }
            Leaf::Class {
                class: argmax_first(&counts),
                counts,
            }
        }
        Labels::Value(y) => Leaf::Value(rows.iter().map(|&i| y[i]).sum::<f64>() / rows.len() as f64),
    }
}

/// Running statistics of one side of a split. The split score is
/// `sum_c count_c^2 / n` (Gini) or `sum^2 / n` (variance); larger is better.
#[derive(Clone)]
enum Side {
    Class { counts: Vec<f64>, n: f64 },
    Value { sum: f64, n: f64 },
}

impl Side {
    fn empty(labels: &Labels) -> Self {
        match labels {
            Labels::Class { n_classes, .. } => Side::Class {
                counts: vec![0.0; *n_classes],
                n: 0.0,
            },
            Labels::Value(_) => Side::Value { sum: 0.0, n: 0.0 },
        }
    }

    fn add(&mut self, labels: &Labels, i: usize, sign: f64) {
        match (self, labels) {
            (Side::Class { counts, n }, Labels::Class { labels, .. }) => {
                counts[labels[i]] += sign;
                *n += sign;
            }
            (Side::Value { sum, n }, Labels::Value(y)) => {
                *sum += sign * y[i];
                *n += sign;
            }
            _ => unreachable!("side and labels disagree on task"),
        }
    }

    fn score(&self) -> f64 {
        match self {
            Side::Class { counts, n } => counts.iter().map(|c| c * c).sum::<f64>() / n,
            Side::Value { sum, n } => sum * sum / n,
        }
    }
}

fn best_split(
    dataset: &Dataset,
    params: &ResolvedParams,
    labels: &Labels,
    rows: &[usize],
    rng: &mut ChaCha8Rng,
) -> Option<Candidate> {
    let p = dataset.n_features();
    let mut features = index::sample(rng, p, params.mtry).into_vec();
    features.sort_unstable();

    let mut total = Side::empty(labels);
    for &i in rows {
        total.add(labels, i, 1.0);
    }
    let parent = total.score();
    let min_leaf = params.min_node_size;
    let mut best: Option<Candidate> = None;
    let consider = |best: &mut Option<Candidate>, feature, rule, score: f64| {
        if best.as_ref().is_none_or(|b| score > b.score) {
            *best = Some(Candidate { feature, rule, score });
        }
    };

    for &j in &features {
        if dataset.schema()[j].is_categorical() {
            let mut levels: Vec<f64> = rows.iter().map(|&i| dataset.cell(i, j)).collect();
            levels.sort_by(f64::total_cmp);
            levels.dedup();
            if levels.len() < 2 {
                continue;
            }
            for &level in &levels {
                let mut left = Side::empty(labels);
                let mut right = total.clone();
                let mut n_left = 0;
                for &i in rows {
                    if dataset.cell(i, j) == level {
                        left.add(labels, i, 1.0);
                        right.add(labels, i, -1.0);
                        n_left += 1;
                    }
                }
                if n_left < min_leaf || rows.len() - n_left < min_leaf {
                    continue;
                }
                consider(&mut best, j, SplitRule::Level(level), left.score() + right.score());
            }
        } else {
            let mut order: Vec<(f64, usize)> = rows.iter().map(|&i| (dataset.cell(i, j), i)).collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = Side::empty(labels);
            let mut right = total.clone();
            for k in 1..order.len() {
                let (prev, i) = order[k - 1];
                left.add(labels, i, 1.0);
                right.add(labels, i, -1.0);
                let next = order[k].0;
                if prev == next || k < min_leaf || order.len() - k < min_leaf {
                    continue;
                }
                let mut threshold = prev + (next - prev) / 2.0;
                if threshold >= next {
                    threshold = prev;
                }
                consider(&mut best, j, SplitRule::Threshold(threshold), left.score() + right.score());
            }
        }
    }
    let tol = 1e-12 * parent.abs().max(f64::MIN_POSITIVE);
    best.filter(|b| b.score - parent > tol)
}
