//! Seeded reproductions of the three simulation studies (plus a three-class
//! band task), each reduced to region-contrast statistics and pass/fail rules.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use crate::cv::{assign_folds, fit_cv};
use crate::data::{simulate, write_csv, Dataset, SimKind, SimSpec};
use crate::error::{Error, Result};
use crate::importance::{clip, clique, ImportanceMatrix, LossSpec, Method};
use crate::kv;
use crate::models::Hyperparams;
use crate::region::Region;
use crate::stats::{correlation, select, Summary};

/// Acceptance thresholds, calibrated on seeds 1..=5 of the default protocol.
pub mod thresholds {
    /// |mean importance| allowed where a feature should not matter.
    pub const NEAR_ZERO: f64 = 0.02;
    /// Minimum mean importance where a feature matters.
    pub const ACTIVE_FLOOR: f64 = 0.05;
    /// Minimum active mean / |inactive mean|.
    pub const CONTRAST_RATIO: f64 = 10.0;
    /// Maximum mean |importance| of a pure-noise feature (classification).
    pub const NOISE_ABS: f64 = 0.02;
    /// Regression: inactive mean |V1| as a fraction of the active mean.
    pub const REG_INACTIVE_FRACTION: f64 = 0.10;
    /// Regression: minimum corr(V1, v1^2) in the active region.
    pub const REG_QUADRATIC_CORR: f64 = 0.5;
    /// Regression: noise mean |V4| as a fraction of the active mean of V1.
    pub const REG_NOISE_FRACTION: f64 = 0.05;
    /// Three bands: signal mean over each noise feature's mean |importance|.
    pub const BANDS_SIGNAL_RATIO: f64 = 10.0;
    /// Fraction of seeds a protocol must pass.
    pub const SEED_PASS_FRACTION: f64 = 0.8;
    /// Fraction of replicates in which CLIP's active-region variance must be
    /// at least CLIQUE's.
    pub const CLIP_DOMINANCE_FRACTION: f64 = 0.8;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: SimKind,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub hp: Hyperparams,
    pub seed: u64,
}

impl ExperimentConfig {
    /// 400 rows, M = 25, 10 folds, 500-tree forests. `seed` drives the data,
    /// the folds, the forests and the permutations.
    ///
    /// The regression-interaction forest tries every feature at each split:
    /// with the `floor(p / 3) = 1` default its CV MSE is about ten times worse
    /// (0.08 vs 0.008 on seeds 1..=5) and the forced splits on `v1` inside
    /// `v3 < 0` leak into the importances.
    pub fn standard(kind: SimKind, seed: u64) -> Self {
        let mtry = match kind {
            SimKind::RegInteraction => Some(kind.n_features()),
            _ => None,
        };
        ExperimentConfig {
            kind,
            n: 400,
            m: 25,
            k: 10,
            hp: Hyperparams {
                n_trees: 500,
                mtry,
                seed,
                ..Hyperparams::default()
            },
            seed,
        }
    }
}

/// Importance statistics of one feature split by a region mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Contrast {
    pub method: Method,
    pub feature: String,
    /// Region where the feature is expected to matter.
    pub region: String,
    pub active: Option<Summary>,
    pub inactive: Option<Summary>,
}

impl Contrast {
    pub fn active_mean(&self) -> f64 {
        self.active.map_or(f64::NAN, |s| s.mean)
    }

    pub fn inactive_mean(&self) -> f64 {
        self.inactive.map_or(f64::NAN, |s| s.mean)
    }

    /// Active mean over |inactive mean|; infinite when the inactive mean is 0.
    pub fn ratio(&self) -> f64 {
        let den = self.inactive_mean().abs();
        if den == 0.0 {
            if self.active_mean() > 0.0 {
                f64::INFINITY
            } else {
                f64::NAN
            }
        } else {
            self.active_mean() / den
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub name: String,
    pub value: f64,
    pub op: &'static str,
    pub threshold: f64,
    pub pass: bool,
}

impl Rule {
    fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Rule {
            name: name.into(),
            value,
            op: "<=",
            threshold,
            pass: value <= threshold,
        }
    }

    fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Rule {
            name: name.into(),
            value,
            op: ">=",
            threshold,
            pass: value >= threshold,
        }
    }

    fn greater(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Rule {
            name: name.into(),
            value,
            op: ">",
            threshold,
            pass: value > threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub contrasts: Vec<Contrast>,
    /// `(method, feature, mean |V|)` for noise features.
    pub noise: Vec<(Method, String, f64)>,
    /// Regression only: `(method, corr(V1, v1^2))` over the active region.
    pub quadratic: Vec<(Method, f64)>,
    pub cv_error: f64,
    pub rules: Vec<Rule>,
    pub runtime: Duration,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.rules.iter().all(|r| r.pass)
    }

    pub fn contrast(&self, method: Method, feature: &str) -> Option<&Contrast> {
        self.contrasts
            .iter()
            .find(|c| c.method == method && c.feature == feature)
    }

    pub fn noise_abs(&self, method: Method, feature: &str) -> Option<f64> {
        self.noise
            .iter()
            .find(|(m, f, _)| *m == method && f == feature)
            .map(|t| t.2)
    }

    /// Machine-readable form. Excludes the runtime unless `with_runtime`.
    pub fn to_kv(&self, with_runtime: bool) -> Vec<(String, String)> {
        let c = &self.config;
        let mut out: Vec<(String, String)> = vec![
            ("kind".into(), c.kind.as_str().into()),
            ("n".into(), c.n.to_string()),
            ("M".into(), c.m.to_string()),
            ("k".into(), c.k.to_string()),
            ("n_trees".into(), c.hp.n_trees.to_string()),
            ("seed".into(), c.seed.to_string()),
            ("rng".into(), crate::rng::RNG_ALGORITHM.into()),
            ("cv_error".into(), fmt(self.cv_error)),
        ];
        for con in &self.contrasts {
            let prefix = format!("{}.{}", con.method.as_str(), con.feature);
            out.push((format!("{prefix}.region"), con.region.clone()));
            for (side, s) in [("active", con.active), ("inactive", con.inactive)] {
                match s {
                    Some(s) => {
                        for (name, v) in s.fields() {
                            out.push((format!("{prefix}.{side}.{name}"), fmt(v)));
                        }
                    }
                    None => out.push((format!("{prefix}.{side}.count"), "0".into())),
                }
            }
            out.push((format!("{prefix}.ratio"), fmt(con.ratio())));
        }
        for (m, f, v) in &self.noise {
            out.push((format!("{}.{f}.noise_mean_abs", m.as_str()), fmt(*v)));
        }
        for (m, r) in &self.quadratic {
            out.push((format!("{}.V1.quadratic_corr", m.as_str()), fmt(*r)));
            out.push((format!("{}.V1.quadratic_r2", m.as_str()), fmt(r * r)));
        }
        for r in &self.rules {
            out.push((
                format!("rule.{}", r.name),
                format!("{} ({} {} {})", if r.pass { "pass" } else { "fail" }, fmt(r.value), r.op, fmt(r.threshold)),
            ));
        }
        out.push(("passed".into(), self.passed().to_string()));
        if with_runtime {
            out.push(("runtime_s".into(), format!("{:.3}", self.runtime.as_secs_f64())));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "experiment {}: n={} M={} k={} trees={} seed={}",
            c.kind.as_str(),
            c.n,
            c.m,
            c.k,
            c.hp.n_trees,
            c.seed
        );
        let _ = writeln!(s, "cv error: {:.4}", self.cv_error);
        for con in &self.contrasts {
            let _ = writeln!(
                s,
                "  {:<6} {:<3} [{}]  active: n={} mean={:.4} var={:.5}  inactive: n={} mean={:.4} var={:.5}  ratio={:.2}",
                con.method.as_str(),
                con.feature,
                con.region,
                con.active.map_or(0, |a| a.count),
                con.active_mean(),
                con.active.map_or(f64::NAN, |a| a.variance),
                con.inactive.map_or(0, |a| a.count),
                con.inactive_mean(),
                con.inactive.map_or(f64::NAN, |a| a.variance),
                con.ratio()
            );
        }
        for (m, f, v) in &self.noise {
            let _ = writeln!(s, "  {:<6} {:<3} noise mean |V| = {:.4}", m.as_str(), f, v);
        }
        for (m, r) in &self.quadratic {
            let _ = writeln!(s, "  {:<6} V1 corr with v1^2 (active) = {:.4}", m.as_str(), r);
        }
        for r in &self.rules {
            let _ = writeln!(
                s,
                "  [{}] {}: {:.4} {} {}",
                if r.pass { "PASS" } else { "FAIL" },
                r.name,
                r.value,
                r.op,
                r.threshold
            );
        }
        let _ = writeln!(s, "runtime: {:.2}s", self.runtime.as_secs_f64());
        s
    }
}

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Everything an experiment produced, for export and auditing.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    pub dataset: Dataset,
    pub clique: ImportanceMatrix,
    pub clip: ImportanceMatrix,
}

impl ExperimentOutcome {
    /// Writes `data.csv`, `clique.csv`, `clip.csv` and `report.txt` into `dir`.
    /// The report omits the runtime so reruns export identical files.
    pub fn export(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_csv(&self.dataset, dir.join("data.csv"))?;
        self.clique.write_csv(dir.join("clique.csv"))?;
        self.clip.write_csv(dir.join("clip.csv"))?;
        kv::write(dir.join("report.txt"), &self.report.to_kv(false))
    }
}

/// Region where each feature is expected to matter, as region expressions.
pub fn active_regions(kind: SimKind) -> Vec<(&'static str, String)> {
    let third = format!("{}", -1.0f64 / 3.0);
    match kind {
        SimKind::AndGate => vec![("v1", format!("v2 > {third}")), ("v2", format!("v1 > {third}"))],
        SimKind::Corners => vec![("v1", "abs(v2) > 0.25".into()), ("v2", "v1 > 0".into())],
        SimKind::RegInteraction => vec![("v1", "v3 > 0".into()), ("v2", "v3 < 0".into())],
        SimKind::ThreeBands => vec![],
    }
}

pub fn noise_features(kind: SimKind) -> &'static [&'static str] {
    match kind {
        SimKind::AndGate | SimKind::Corners => &["v3"],
        SimKind::RegInteraction => &["v4"],
        SimKind::ThreeBands => &["v2", "v3"],
    }
}

pub fn contrast(
    dataset: &Dataset,
    v: &ImportanceMatrix,
    feature: &str,
    region: &str,
) -> Result<Contrast> {
    let j = dataset
        .feature_index(feature)
        .ok_or_else(|| Error::InvalidArgument(format!("no feature `{feature}`")))?;
    let columns: Vec<Vec<f64>> = (0..dataset.n_features()).map(|k| dataset.column(k)).collect();
    let mask = Region::parse(region)?.mask(&dataset.feature_names(), &columns)?;
    let inverse: Vec<bool> = mask.iter().map(|m| !m).collect();
    let col = v.column(j);
    Ok(Contrast {
        method: v.method,
        feature: format!("V{}", j + 1),
        region: region.to_string(),
        active: Summary::of(&select(&col, &mask)),
        inactive: Summary::of(&select(&col, &inverse)),
    })
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let start = Instant::now();
    let dataset = simulate(SimSpec {
        kind: config.kind,
        n: config.n,
        seed: config.seed,
    })?;
    let loss = LossSpec::default_for(dataset.task());
    let folds = assign_folds(&dataset, config.k, true, config.seed)?;
    let ens = fit_cv(&dataset, &config.hp, &folds)?;
    let v_clique = clique(&ens, &dataset, loss, config.m)?;
    let v_clip = clip(&ens, &dataset, loss, config.m, config.seed)?;

    let mut contrasts = Vec::new();
    for v in [&v_clique, &v_clip] {
        for (feature, region) in active_regions(config.kind) {
            contrasts.push(contrast(&dataset, v, feature, &region)?);
        }
    }
    let mut noise = Vec::new();
    for v in [&v_clique, &v_clip] {
        for f in noise_features(config.kind) {
            let j = dataset.feature_index(f).expect("simulation feature");
            noise.push((v.method, format!("V{}", j + 1), Summary::of(&v.column(j)).expect("n >= 1").mean_abs));
        }
    }
    let mut quadratic = Vec::new();
    if config.kind == SimKind::RegInteraction {
        let mask: Vec<bool> = dataset.column(2).iter().map(|&x| x > 0.0).collect();
        let v1_sq: Vec<f64> = dataset.column(0).iter().map(|x| x * x).collect();
        for v in [&v_clique, &v_clip] {
            let r = correlation(&select(&v.column(0), &mask), &select(&v1_sq, &mask)).unwrap_or(f64::NAN);
            quadratic.push((v.method, r));
        }
    }

    let mut report = ExperimentReport {
        config: config.clone(),
        contrasts,
        noise,
        quadratic,
        cv_error: crate::cv::mean(&v_clique.baseline),
        rules: Vec::new(),
        runtime: Duration::ZERO,
    };
    report.rules = rules(&report, &v_clique);
    report.runtime = start.elapsed();
    Ok(ExperimentOutcome {
        report,
        dataset,
        clique: v_clique,
        clip: v_clip,
    })
}

/// Acceptance rules, evaluated on the CLIQUE importances.
fn rules(report: &ExperimentReport, v: &ImportanceMatrix) -> Vec<Rule> {
    use thresholds::*;
    let get = |f: &str| report.contrast(Method::Clique, f).expect("contrast present");
    let noise = |f: &str| report.noise_abs(Method::Clique, f).expect("noise present");
    match report.config.kind {
        SimKind::AndGate => {
            let c = get("V1");
            vec![
                Rule::at_most("V1_inactive_abs_mean", c.inactive_mean().abs(), NEAR_ZERO),
                Rule::at_least("V1_active_mean", c.active_mean(), ACTIVE_FLOOR),
                Rule::at_least("V1_contrast_ratio", c.ratio(), CONTRAST_RATIO),
                Rule::at_most("V3_mean_abs", noise("V3"), NOISE_ABS),
            ]
        }
        SimKind::Corners => {
            let (c1, c2) = (get("V1"), get("V2"));
            vec![
                Rule::at_most("V1_inactive_abs_mean", c1.inactive_mean().abs(), NEAR_ZERO),
                Rule::at_least("V1_active_mean", c1.active_mean(), ACTIVE_FLOOR),
                Rule::at_most("V2_inactive_abs_mean", c2.inactive_mean().abs(), NEAR_ZERO),
                Rule::at_least("V2_active_mean", c2.active_mean(), ACTIVE_FLOOR),
            ]
        }
        SimKind::RegInteraction => {
            let c = get("V1");
            let active = c.active_mean();
            let inactive_abs = c.inactive.map_or(f64::NAN, |s| s.mean_abs);
            let corr = report
                .quadratic
                .iter()
                .find(|(m, _)| *m == Method::Clique)
                .map_or(f64::NAN, |q| q.1);
            vec![
                Rule::at_most("V1_inactive_mean_abs_fraction", inactive_abs / active, REG_INACTIVE_FRACTION),
                Rule::greater("V1_active_quadratic_corr", corr, REG_QUADRATIC_CORR),
                Rule::at_most("V4_mean_abs_fraction", noise("V4") / active, REG_NOISE_FRACTION),
            ]
        }
        SimKind::ThreeBands => {
            let signal = v.column_mean(0);
            ["V2", "V3"]
                .iter()
                .map(|f| Rule::at_least(format!("V1_over_{f}_mean_abs"), signal / noise(f), BANDS_SIGNAL_RATIO))
                .collect()
        }
    }
}

pub fn run_and_gate(n: usize, m: usize, seed: u64) -> Result<ExperimentReport> {
    run(&ExperimentConfig {
        n,
        m,
        ..ExperimentConfig::standard(SimKind::AndGate, seed)
    })
    .map(|o| o.report)
}

pub fn run_corners(n: usize, m: usize, seed: u64) -> Result<ExperimentReport> {
    run(&ExperimentConfig {
        n,
        m,
        ..ExperimentConfig::standard(SimKind::Corners, seed)
    })
    .map(|o| o.report)
}

pub fn run_reg_interaction(n: usize, m: usize, seed: u64) -> Result<ExperimentReport> {
    run(&ExperimentConfig {
        n,
        m,
        ..ExperimentConfig::standard(SimKind::RegInteraction, seed)
    })
    .map(|o| o.report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: SimKind) -> ExperimentConfig {
        ExperimentConfig {
            n: 120,
            m: 9,
            k: 4,
            hp: Hyperparams {
                n_trees: 40,
                seed: 3,
                ..Hyperparams::default()
            },
            ..ExperimentConfig::standard(kind, 3)
        }
    }

    #[test]
    fn regions_partition_rows() {
        let out = run(&small(SimKind::AndGate)).unwrap();
        for c in &out.report.contrasts {
            let total = c.active.map_or(0, |s| s.count) + c.inactive.map_or(0, |s| s.count);
            assert_eq!(total, 120);
        }
        assert_eq!(out.report.contrasts.len(), 4);
        assert_eq!(out.report.rules.len(), 4);
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run(&small(SimKind::Corners)).unwrap().report;
        let b = run(&small(SimKind::Corners)).unwrap().report;
        assert_eq!(a.to_kv(false), b.to_kv(false));
    }

    #[test]
    fn regression_report_has_quadratic_fit() {
        let r = run(&small(SimKind::RegInteraction)).unwrap().report;
        assert_eq!(r.quadratic.len(), 2);
        assert_eq!(r.rules.len(), 3);
        let kv = r.to_kv(true);
        assert!(kv::get(&kv, "clique.V1.quadratic_r2").is_some());
        assert!(kv::get(&kv, "runtime_s").is_some());
    }

    #[test]
    fn third_is_written_exactly() {
        let regions = active_regions(SimKind::AndGate);
        let lit = regions[0].1.trim_start_matches("v2 > ");
        assert_eq!(lit.parse::<f64>().unwrap(), -1.0 / 3.0);
    }

    #[test]
    fn ratio_edge_cases() {
        let s = Summary::of(&[0.0]).unwrap();
        let mut c = Contrast {
            method: Method::Clique,
            feature: "V1".into(),
            region: "v2 > 0".into(),
            active: Summary::of(&[0.5]),
            inactive: Some(s),
        };
        assert_eq!(c.ratio(), f64::INFINITY);
        c.inactive = Summary::of(&[-0.01]);
        assert!((c.ratio() - 50.0).abs() < 1e-9);
    }
}
