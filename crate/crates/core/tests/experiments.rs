use std::fs;

use clique::data::{load_csv, SimKind, TaskKind};
use clique::experiments::{run, ExperimentConfig};
use clique::importance::{ImportanceTable, Method};
use clique::kv;

fn small(kind: SimKind, n: usize, seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::standard(kind, seed);
    c.n = n;
    c.hp.n_trees = 100;
    c
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

#[test]
fn report_statistics_match_the_exported_files() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run(&small(SimKind::Corners, 200, 21)).unwrap();
    outcome.export(dir.path()).unwrap();

    let ds = load_csv(dir.path().join("data.csv"), "y", TaskKind::Classification).unwrap();
    let report = kv::read(dir.path().join("report.txt")).unwrap();
    let num = |key: &str| -> f64 { kv::get(&report, key).unwrap_or_else(|| panic!("{key}")).parse().unwrap() };
    let v1 = ds.column(0);
    let v2 = ds.column(1);
    // V1 matters where |v2| > 1/4, V2 where v1 > 0
    let masks: [(&str, Vec<bool>); 2] = [
        ("V1", v2.iter().map(|x| x.abs() > 0.25).collect()),
        ("V2", v1.iter().map(|&x| x > 0.0).collect()),
    ];
    for method in ["clique", "clip"] {
        let table = ImportanceTable::read_csv(dir.path().join(format!("{method}.csv"))).unwrap();
        for (j, (feature, mask)) in masks.iter().enumerate() {
            let col = table.column(j);
            let active: Vec<f64> = col.iter().zip(mask).filter(|p| *p.1).map(|p| *p.0).collect();
            let inactive: Vec<f64> = col.iter().zip(mask).filter(|p| !*p.1).map(|p| *p.0).collect();
            assert_eq!(active.len() + inactive.len(), ds.n_rows());
            for (side, xs) in [("active", &active), ("inactive", &inactive)] {
                let prefix = format!("{method}.{feature}.{side}");
                assert_eq!(num(&format!("{prefix}.count")), xs.len() as f64);
                assert!(close(num(&format!("{prefix}.mean")), mean(xs)), "{prefix}.mean");
                assert!(close(num(&format!("{prefix}.median")), median(xs)), "{prefix}.median");
                assert!(close(num(&format!("{prefix}.variance")), sample_variance(xs)), "{prefix}.variance");
            }
        }
        let noise: Vec<f64> = table.column(2).iter().map(|x| x.abs()).collect();
        assert!(close(num(&format!("{method}.V3.noise_mean_abs")), mean(&noise)));
    }
    assert_eq!(kv::get(&report, "passed"), Some(outcome.report.passed().to_string().as_str()));
    assert!(kv::get(&report, "runtime_s").is_none());
}

#[test]
fn reports_are_deterministic() {
    let a = run(&small(SimKind::AndGate, 150, 4)).unwrap();
    let b = run(&small(SimKind::AndGate, 150, 4)).unwrap();
    assert_eq!(kv::render(&a.report.to_kv(false)), kv::render(&b.report.to_kv(false)));
    assert_eq!(a.clique.values(), b.clique.values());
    assert_eq!(a.clip.values(), b.clip.values());
}

#[test]
fn regression_report_includes_quadratic_fit() {
    let outcome = run(&small(SimKind::RegInteraction, 200, 2)).unwrap();
    let r = &outcome.report;
    let corr = r.quadratic.iter().find(|q| q.0 == Method::Clique).unwrap().1;
    assert!(corr > 0.5, "{corr}");
    let text = kv::render(&r.to_kv(false));
    assert!(text.contains("clique.V1.quadratic_r2="));
    assert!(r.contrast(Method::Clique, "V2").is_some());
}

#[test]
fn contrast_does_not_shrink_with_more_data() {
    let ratio = |n: usize| {
        let out = run(&small(SimKind::AndGate, n, 1)).unwrap();
        let c = out.report.contrast(Method::Clique, "V1").unwrap().clone();
        (c.active_mean(), c.inactive_mean().abs(), c.ratio())
    };
    let (a400, i400, r400) = ratio(400);
    let (a4000, i4000, r4000) = ratio(4000);
    assert!(r400.is_finite() && r400 > 1.0, "n=400 ratio {r400}");
    assert!(r4000 >= r400, "n=400: {a400}/{i400} = {r400}; n=4000: {a4000}/{i4000} = {r4000}");
}

#[test]
fn export_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    run(&small(SimKind::ThreeBands, 90, 3)).unwrap().export(dir.path().join("nested")).unwrap();
    let mut names: Vec<String> = fs::read_dir(dir.path().join("nested"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["clip.csv", "clique.csv", "data.csv", "report.txt"]);
}
