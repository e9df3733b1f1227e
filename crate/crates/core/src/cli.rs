//! Command-line front end. [`run`] takes the full argument vector so the
//! binary and the integration tests share one entry point.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cv::{self, assign_folds, cv_errors, fit_cv, FoldAssignment};
use crate::data::{self, Dataset, SimKind, SimSpec, TaskKind};
use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentConfig};
use crate::importance::{self, ImportanceTable, LossSpec, DEFAULT_M};
use crate::kv;
use crate::models::{fit_forest, Hyperparams};
use crate::region::Region;
use crate::rng::RNG_ALGORITHM;
use crate::stats::{self, Summary};
use crate::svg;

#[derive(Debug, Parser)]
#[command(name = "clique", version, about = "Local variable importance with cross-validated random forests")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a simulation dataset as CSV.
    Simulate(SimulateArgs),
    /// Fit a forest on the full data and report its CV error.
    Fit(FitArgs),
    /// Compute importances (clique, clip, global, pdp).
    Importance(ImportanceArgs),
    /// Region-split statistics of one importance column.
    Summarize(SummarizeArgs),
    /// Scatter or box plot of an importance column as SVG.
    Plot(PlotArgs),
    /// Run a seeded simulation study and check its acceptance rules.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SimKindArg {
    #[value(name = "and_gate", alias = "and-gate")]
    AndGate,
    Corners,
    #[value(name = "reg_interaction", alias = "reg-interaction")]
    RegInteraction,
    #[value(name = "three_bands", alias = "three-bands")]
    ThreeBands,
}

impl From<SimKindArg> for SimKind {
    fn from(k: SimKindArg) -> Self {
        match k {
            SimKindArg::AndGate => SimKind::AndGate,
            SimKindArg::Corners => SimKind::Corners,
            SimKindArg::RegInteraction => SimKind::RegInteraction,
            SimKindArg::ThreeBands => SimKind::ThreeBands,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TaskArg {
    Regression,
    Classification,
}

impl From<TaskArg> for TaskKind {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Regression => TaskKind::Regression,
            TaskArg::Classification => TaskKind::Classification,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Clique,
    Clip,
    Global,
    Pdp,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LossArg {
    #[value(name = "squared_error", alias = "squared-error")]
    SquaredError,
    #[value(name = "zero_one", alias = "zero-one")]
    ZeroOne,
    Brier,
}

impl From<LossArg> for LossSpec {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::SquaredError => LossSpec::SquaredError,
            LossArg::ZeroOne => LossSpec::ZeroOne,
            LossArg::Brier => LossSpec::Brier,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Scatter,
    Box,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub kind: SimKindArg,
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset CSV with a header row.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub label: String,
    #[arg(long, value_enum)]
    pub task: TaskArg,
    /// Comma-separated class order (classification); default is first appearance.
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<String>>,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        match (&self.classes, TaskKind::from(self.task)) {
            (Some(classes), TaskKind::Classification) => {
                data::load_csv_with_classes(&self.input, &self.label, classes)
            }
            (Some(_), TaskKind::Regression) => {
                Err(Error::InvalidArgument("--classes only applies to classification".into()))
            }
            (None, task) => data::load_csv(&self.input, &self.label, task),
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 500)]
    pub n_trees: usize,
    #[arg(long)]
    pub mtry: Option<usize>,
    #[arg(long)]
    pub min_node_size: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub no_bootstrap: bool,
}

impl ModelArgs {
    fn hyperparams(&self, seed: u64) -> Hyperparams {
        Hyperparams {
            n_trees: self.n_trees,
            mtry: self.mtry,
            min_node_size: self.min_node_size,
            max_depth: self.max_depth,
            bootstrap: !self.no_bootstrap,
            seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = cv::DEFAULT_FOLDS)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub loss: Option<LossArg>,
    /// Write the full-data model as JSON.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// Write the fold assignment as `id,fold` CSV.
    #[arg(long)]
    pub folds_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "clique")]
    pub method: MethodArg,
    /// Replacement values per feature (grid size or permutation count).
    #[arg(long = "m", default_value_t = DEFAULT_M)]
    pub m: usize,
    #[arg(long, default_value_t = cv::DEFAULT_FOLDS)]
    pub k: usize,
    #[arg(long, value_enum)]
    pub loss: Option<LossArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Feature for `--method pdp`.
    #[arg(long)]
    pub feature: Option<String>,
    /// Class whose probability the PDP reports (default: last class).
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Metadata sidecar path (default: `<out>.meta`).
    #[arg(long)]
    pub meta: Option<PathBuf>,
    #[arg(long)]
    pub folds_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    /// Importance CSV (`id,<features...>`).
    #[arg(long)]
    pub importance: PathBuf,
    /// Dataset CSV the importances were computed on.
    #[arg(long)]
    pub data: PathBuf,
    /// Region expression over dataset columns, e.g. `v2 > -0.333333`.
    #[arg(long)]
    pub region: String,
    /// Importance column to summarize.
    #[arg(long)]
    pub feature: String,
    /// Also write the statistics as key=value.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(value_enum)]
    pub kind: PlotKind,
    #[arg(long)]
    pub importance: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Importance column on the y axis; its dataset column is the x axis.
    #[arg(long)]
    pub feature: String,
    /// Dataset column for the x axis (scatter; default: `--feature`).
    #[arg(long)]
    pub x: Option<String>,
    /// Region expression used to color (scatter) or group (box) rows.
    #[arg(long)]
    pub region: Option<String>,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub kind: SimKindArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    #[arg(long = "m", default_value_t = DEFAULT_M)]
    pub m: usize,
    #[arg(long, default_value_t = cv::DEFAULT_FOLDS)]
    pub k: usize,
    #[arg(long, default_value_t = 500)]
    pub n_trees: usize,
    /// Write data, importances and the key=value report here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Outcome of a command: text for stdout and whether acceptance checks passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub success: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, success: true }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> std::result::Result<Output, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(CliError::Usage)?;
    execute(cli).map_err(CliError::Run)
}

#[derive(Debug)]
pub enum CliError {
    Usage(clap::Error),
    Run(Error),
}

impl CliError {
    /// 0 for help/version, 1 for validation problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) if !e.use_stderr() => 0,
            CliError::Usage(_) => 1,
            CliError::Run(e) if e.is_validation() => 1,
            CliError::Run(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "{e}"),
            CliError::Run(e) => write!(f, "error: {e}"),
        }
    }
}

pub fn execute(cli: Cli) -> Result<Output> {
    match cli.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            pool.install(|| dispatch(cli.command))
        }
        None => dispatch(cli.command),
    }
}

fn dispatch(command: Command) -> Result<Output> {
    match command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Importance(a) => cmd_importance(&a),
        Command::Summarize(a) => cmd_summarize(&a),
        Command::Plot(a) => cmd_plot(&a),
        Command::Experiment(a) => cmd_experiment(&a),
    }
}

/// Attaches the pipeline stage to an error message.
fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("{name}: {m}")),
        other => other,
    })
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<Output> {
    let ds = data::simulate(SimSpec {
        kind: a.kind.into(),
        n: a.n,
        seed: a.seed,
    })?;
    data::write_csv(&ds, &a.out)?;
    let mut text = format!("wrote {}: n={} p={}", a.out.display(), ds.n_rows(), ds.n_features());
    let balance = ds.class_balance();
    if !balance.is_empty() {
        let parts: Vec<String> = ds
            .classes()
            .iter()
            .zip(&balance)
            .map(|(c, b)| format!("{c}:{b:.3}"))
            .collect();
        let _ = write!(text, " label balance {}", parts.join(" "));
    }
    text.push('\n');
    Ok(Output::ok(text))
}

fn resolve_loss(loss: Option<LossArg>, task: TaskKind) -> Result<LossSpec> {
    let loss = loss.map_or_else(|| LossSpec::default_for(task), LossSpec::from);
    loss.check(task)?;
    Ok(loss)
}

fn folds_for(ds: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    stage("folds", assign_folds(ds, k, ds.task() == TaskKind::Classification, seed))
}

pub fn cmd_fit(a: &FitArgs) -> Result<Output> {
    let ds = stage("load", a.data.load())?;
    let loss = resolve_loss(a.loss, ds.task())?;
    let hp = a.model.hyperparams(a.seed);
    let full = stage("fit", fit_forest(&ds, &hp))?;
    let folds = folds_for(&ds, a.k, a.seed)?;
    let ens = stage("cv", fit_cv(&ds, &hp, &folds))?;
    let errors = cv_errors(&ens, &ds, loss)?;
    let train: Vec<f64> = (0..ds.n_rows())
        .map(|i| loss.eval(&full.predict(ds.row(i)).expect("schema"), ds.target(), i))
        .collect();
    if let Some(path) = &a.model_out {
        full.save(path)?;
    }
    if let Some(path) = &a.folds_out {
        folds.write_csv(&ds, path)?;
    }
    Ok(Output::ok(format!(
        "n={} p={} trees={} loss={} full_model_train_error={:.6} cv_error={:.6}\n",
        ds.n_rows(),
        ds.n_features(),
        hp.n_trees,
        loss.as_str(),
        cv::mean(&train),
        cv::mean(&errors)
    )))
}

fn metadata_common(a: &ImportanceArgs, ds: &Dataset, loss: LossSpec, hp: &Hyperparams) -> Vec<(String, String)> {
    let resolved = hp.resolve(ds.task(), ds.n_features()).ok();
    let opt = |v: Option<usize>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
    vec![
        ("method".into(), format!("{:?}", a.method).to_lowercase()),
        ("M".into(), a.m.to_string()),
        ("k".into(), a.k.to_string()),
        ("seed".into(), a.seed.to_string()),
        ("loss".into(), loss.as_str().into()),
        ("task".into(), ds.task().as_str().into()),
        ("n".into(), ds.n_rows().to_string()),
        ("p".into(), ds.n_features().to_string()),
        ("n_trees".into(), hp.n_trees.to_string()),
        ("mtry".into(), opt(resolved.map(|r| r.mtry))),
        ("min_node_size".into(), opt(resolved.map(|r| r.min_node_size))),
        ("max_depth".into(), opt(hp.max_depth)),
        ("bootstrap".into(), hp.bootstrap.to_string()),
        ("rng".into(), RNG_ALGORITHM.into()),
        ("input".into(), a.data.input.display().to_string()),
        ("label".into(), a.data.label.clone()),
    ]
}

fn sidecar_path(a: &ImportanceArgs) -> PathBuf {
    a.meta.clone().unwrap_or_else(|| {
        let mut s = a.out.clone().into_os_string();
        s.push(".meta");
        PathBuf::from(s)
    })
}

pub fn cmd_importance(a: &ImportanceArgs) -> Result<Output> {
    let ds = stage("load", a.data.load())?;
    let loss = stage("config", resolve_loss(a.loss, ds.task()))?;
    if a.m == 0 {
        return Err(Error::InvalidArgument("config: --m must be at least 1".into()));
    }
    let hp = a.model.hyperparams(a.seed);
    stage("config", hp.resolve(ds.task(), ds.n_features()))?;
    let mut meta = metadata_common(a, &ds, loss, &hp);

    if ds.n_rows() < 2 {
        if a.method != MethodArg::Clip {
            return Err(Error::InvalidArgument(
                "cv: cross-validation needs at least 2 rows".into(),
            ));
        }
        // a single row only admits the identity permutation
        let table = ImportanceTable {
            ids: ds.ids().to_vec(),
            feature_names: ds.feature_names(),
            values: vec![0.0; ds.n_features()],
        };
        table.write_csv(&a.out)?;
        meta.push(("cv_error".into(), "NA".into()));
        kv::write(sidecar_path(a), &meta)?;
        return Ok(Output::ok(format!(
            "wrote {}: single row, all importances are 0\n",
            a.out.display()
        )));
    }

    let folds = folds_for(&ds, a.k, a.seed)?;
    if let Some(path) = &a.folds_out {
        folds.write_csv(&ds, path)?;
    }
    let ens = stage("cv", fit_cv(&ds, &hp, &folds))?;
    let baseline = cv_errors(&ens, &ds, loss)?;
    let cv_error = cv::mean(&baseline);
    meta.push(("cv_error".into(), format!("{cv_error:.16e}")));

    let text = match a.method {
        MethodArg::Clique | MethodArg::Clip => {
            let v = if a.method == MethodArg::Clique {
                stage("clique", importance::clique(&ens, &ds, loss, a.m))?
            } else {
                stage("clip", importance::clip(&ens, &ds, loss, a.m, a.seed))?
            };
            v.write_csv(&a.out)?;
            let means: Vec<String> = (0..v.n_features())
                .map(|j| format!("{}={:.4}", v.feature_names[j], v.column_mean(j)))
                .collect();
            format!(
                "wrote {}: {}x{} {} importances (M={}, loss={}), cv_error={:.6}; column means {}\n",
                a.out.display(),
                v.n_rows(),
                v.n_features(),
                v.method.as_str(),
                a.m,
                loss.as_str(),
                cv_error,
                means.join(" ")
            )
        }
        MethodArg::Global => {
            let g = stage(
                "global",
                importance::global_permutation_importance(&ens, &ds, loss, a.m, a.seed),
            )?;
            write_rows(
                &a.out,
                &["feature", "importance"],
                ds.feature_names().into_iter().zip(&g).map(|(f, v)| vec![f, format!("{v:.16e}")]),
            )?;
            let parts: Vec<String> = ds
                .feature_names()
                .iter()
                .zip(&g)
                .map(|(f, v)| format!("{f}={v:.4}"))
                .collect();
            format!("wrote {}: global importance {}\n", a.out.display(), parts.join(" "))
        }
        MethodArg::Pdp => {
            let name = a
                .feature
                .as_deref()
                .ok_or_else(|| Error::InvalidArgument("config: --method pdp needs --feature".into()))?;
            let j = ds
                .feature_index(name)
                .ok_or_else(|| Error::InvalidArgument(format!("config: no feature `{name}`")))?;
            let class = match &a.class {
                Some(c) => Some(
                    ds.classes()
                        .iter()
                        .position(|x| x == c)
                        .ok_or_else(|| Error::InvalidArgument(format!("config: no class `{c}`")))?,
                ),
                None => None,
            };
            let full = stage("fit", fit_forest(&ds, &hp))?;
            let curve = stage("pdp", importance::partial_dependence(&full, &ds, j, a.m, class))?;
            write_rows(
                &a.out,
                &[name, "mean_prediction"],
                curve
                    .iter()
                    .map(|(x, y)| vec![format!("{x}"), format!("{y:.16e}")]),
            )?;
            format!("wrote {}: partial dependence of {name} on {} grid points\n", a.out.display(), curve.len())
        }
    };
    kv::write(sidecar_path(a), &meta)?;
    Ok(Output::ok(text))
}

fn write_rows(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// A dataset CSV read as numeric columns for region masks and plot axes.
/// Non-numeric columns are kept with `NaN` cells, so comparisons on them are
/// false.
struct RawTable {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    ids: Vec<String>,
}

impl RawTable {
    fn read(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
        let names: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut columns = vec![Vec::new(); names.len()];
        for rec in r.records() {
            let rec = rec?;
            for (c, cell) in rec.iter().enumerate() {
                columns[c].push(cell.parse().unwrap_or(f64::NAN));
            }
        }
        let n = columns.first().map_or(0, Vec::len);
        Ok(RawTable {
            names,
            columns,
            ids: (1..=n).map(|i| i.to_string()).collect(),
        })
    }

    fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.columns[k].as_slice())
            .ok_or_else(|| Error::InvalidArgument(format!("dataset has no column `{name}`")))
    }

    /// Dataset row index for each importance row, matched by id.
    fn align(&self, table: &ImportanceTable) -> Result<Vec<usize>> {
        if table.ids.len() != self.ids.len() {
            return Err(Error::InvalidArgument(format!(
                "row id mismatch: importance file has {} rows, dataset has {}",
                table.ids.len(),
                self.ids.len()
            )));
        }
        let index: HashMap<&str, usize> = self.ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        table
            .ids
            .iter()
            .map(|id| {
                index
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| Error::InvalidArgument(format!("row id mismatch: `{id}` not in dataset")))
            })
            .collect()
    }

    fn mask(&self, region: &Region, rows: &[usize]) -> Result<Vec<bool>> {
        let aligned: Vec<Vec<f64>> = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&i| c[i]).collect())
            .collect();
        region.mask(&self.names, &aligned)
    }
}

fn load_aligned(importance: &Path, data: &Path, feature: &str) -> Result<(ImportanceTable, RawTable, Vec<usize>, Vec<f64>)> {
    let table = ImportanceTable::read_csv(importance)?;
    let raw = RawTable::read(data)?;
    let rows = raw.align(&table)?;
    let j = table
        .feature_index(feature)
        .ok_or_else(|| Error::InvalidArgument(format!("importance file has no column `{feature}`")))?;
    let values = table.column(j);
    Ok((table, raw, rows, values))
}

fn fmt_stat(v: Option<f64>) -> String {
    match v {
        Some(v) if v.is_finite() => format!("{v:.16e}"),
        _ => "NA".into(),
    }
}

const STAT_NAMES: [&str; 8] = ["mean", "mean_abs", "median", "variance", "min", "q1", "q3", "max"];

pub fn cmd_summarize(a: &SummarizeArgs) -> Result<Output> {
    let region = Region::parse(&a.region)?;
    let (_, raw, rows, values) = load_aligned(&a.importance, &a.data, &a.feature)?;
    let mask = raw.mask(&region, &rows)?;
    let inverse: Vec<bool> = mask.iter().map(|m| !m).collect();
    let inside = Summary::of(&stats::select(&values, &mask));
    let outside = Summary::of(&stats::select(&values, &inverse));

    let mut pairs: Vec<(String, String)> = vec![
        ("feature".into(), a.feature.clone()),
        ("region".into(), a.region.clone()),
    ];
    let mut text = format!("{} by region [{}]\n", a.feature, a.region);
    for (name, s) in [("region", inside), ("complement", outside)] {
        pairs.push((format!("{name}.count"), s.map_or(0, |s| s.count).to_string()));
        let _ = write!(text, "  {name:<10} n={:<6}", s.map_or(0, |s| s.count));
        for (k, stat) in STAT_NAMES.iter().enumerate() {
            let v = s.map(|s| s.fields()[k].1);
            pairs.push((format!("{name}.{stat}"), fmt_stat(v)));
            let _ = write!(text, " {stat}={}", v.map_or("NA".to_string(), |v| format!("{v:.4}")));
        }
        text.push('\n');
    }
    let ratio = match (inside, outside) {
        (Some(i), Some(o)) => stats::ratio(i.mean, o.mean),
        _ => None,
    };
    pairs.push(("ratio".into(), fmt_stat(ratio)));
    let _ = writeln!(
        text,
        "  ratio of means (region / complement) = {}",
        ratio.map_or("NA".to_string(), |r| format!("{r:.4}"))
    );
    if let Some(out) = &a.out {
        kv::write(out, &pairs)?;
    }
    text.push_str(&kv::render(&pairs));
    Ok(Output::ok(text))
}

pub fn cmd_plot(a: &PlotArgs) -> Result<Output> {
    let region = a.region.as_deref().map(Region::parse).transpose()?;
    let (_, raw, rows, values) = load_aligned(&a.importance, &a.data, &a.feature)?;
    if values.is_empty() {
        return Err(Error::InvalidArgument("empty selection: no rows to plot".into()));
    }
    let mask = match &region {
        Some(r) => Some(raw.mask(r, &rows)?),
        None => None,
    };
    let title = a.title.clone().unwrap_or_else(|| format!("{} importance", a.feature));
    let svg = match a.kind {
        PlotKind::Scatter => {
            let x_name = a.x.as_deref().unwrap_or(&a.feature);
            let xs = raw.column(x_name)?;
            let point = |k: usize| (xs[rows[k]], values[k]);
            let series = match (&mask, &a.region) {
                (Some(m), Some(expr)) => vec![
                    svg::Series {
                        label: expr.clone(),
                        points: (0..values.len()).filter(|&k| m[k]).map(point).collect(),
                    },
                    svg::Series {
                        label: format!("not ({expr})"),
                        points: (0..values.len()).filter(|&k| !m[k]).map(point).collect(),
                    },
                ],
                _ => vec![svg::Series {
                    label: "all rows".into(),
                    points: (0..values.len()).map(point).collect(),
                }],
            };
            svg::scatter(&title, x_name, &a.feature, &series)
        }
        PlotKind::Box => {
            let groups = match (&mask, &a.region) {
                (Some(m), Some(expr)) => vec![
                    (expr.clone(), stats::select(&values, m)),
                    (format!("not ({expr})"), stats::select(&values, &m.iter().map(|b| !b).collect::<Vec<_>>())),
                ],
                _ => vec![("all rows".to_string(), values.clone())],
            };
            svg::boxplot(&title, &a.feature, &groups)
        }
    };
    fs::write(&a.out, &svg).map_err(|e| Error::io(&a.out, e))?;
    Ok(Output::ok(format!("wrote {}\n", a.out.display())))
}

pub fn cmd_experiment(a: &ExperimentArgs) -> Result<Output> {
    let mut config = ExperimentConfig::standard(a.kind.into(), a.seed);
    config.n = a.n;
    config.m = a.m;
    config.k = a.k;
    config.hp.n_trees = a.n_trees;
    let outcome = experiments::run(&config)?;
    if let Some(dir) = &a.out_dir {
        outcome.export(dir)?;
    }
    Ok(Output {
        text: outcome.report.to_text(),
        success: outcome.report.passed(),
    })
}
