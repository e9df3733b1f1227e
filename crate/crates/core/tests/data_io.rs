use std::fs;
use std::path::Path;

use clique::data::{
    load_csv, load_csv_with_classes, simulate, write_csv, Dataset, FeatureKind, FeatureSchema, SimKind, SimSpec,
    Target, TaskKind,
};
use clique::Error;
use proptest::prelude::*;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn reload(ds: &Dataset, path: &Path) -> Dataset {
    write_csv(ds, path).unwrap();
    match ds.task() {
        TaskKind::Classification => load_csv_with_classes(path, ds.label_name(), ds.classes()).unwrap(),
        TaskKind::Regression => load_csv(path, ds.label_name(), TaskKind::Regression).unwrap(),
    }
}

#[test]
fn three_row_classification_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "d.csv", "a,b,y\n1,2,0\n3,4,1\n5,6,0\n");
    let ds = load_csv(&path, "y", TaskKind::Classification).unwrap();
    assert_eq!((ds.n_rows(), ds.n_features()), (3, 2));
    assert_eq!(ds.classes(), ["0", "1"]);
    assert_eq!(ds.row(1), [3.0, 4.0]);
    assert_eq!(ds.ids(), ["1", "2", "3"]);

    let err = load_csv(&path, "z", TaskKind::Classification).unwrap_err();
    assert!(err.to_string().contains("label column not found"), "{err}");
    assert!(err.is_validation());
}

#[test]
fn string_columns_become_categorical() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "d.csv", "g,x,y\nlo,1.5,2\nhi,2.5,3\nlo,0,4\n");
    let ds = load_csv(&path, "y", TaskKind::Regression).unwrap();
    match &ds.schema()[0].kind {
        FeatureKind::Categorical { levels } => assert_eq!(levels, &["lo", "hi"]),
        other => panic!("expected categorical, got {other:?}"),
    }
    assert!(!ds.schema()[1].is_categorical());
    assert_eq!(ds.column(0), [0.0, 1.0, 0.0]);
}

#[test]
fn fixed_class_order_rejects_unknown_labels() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "d.csv", "a,y\n1,b\n2,a\n");
    let ds = load_csv_with_classes(&path, "y", &["a".into(), "b".into()]).unwrap();
    assert_eq!(ds.classes(), ["a", "b"]);
    assert_eq!(ds.label_string(0), "b");
    assert!(load_csv_with_classes(&path, "y", &["a".into()]).is_err());
}

#[test]
fn simulated_datasets_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for kind in SimKind::ALL {
        let ds = simulate(SimSpec { kind, n: 10, seed: 1 }).unwrap();
        let path = dir.path().join(format!("{}.csv", kind.as_str()));
        assert_eq!(reload(&ds, &path), ds, "{}", kind.as_str());
        // first-appearance classes still give the same label strings
        let plain = load_csv(&path, "y", kind.task()).unwrap();
        for i in 0..ds.n_rows() {
            assert_eq!(plain.label_string(i), ds.label_string(i));
            assert_eq!(plain.row(i), ds.row(i));
        }
    }
}

#[test]
fn writing_into_a_missing_directory_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let ds = simulate(SimSpec { kind: SimKind::AndGate, n: 3, seed: 1 }).unwrap();
    let err = write_csv(&ds, dir.path().join("no/such/dir/d.csv")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
}

#[test]
fn categorical_round_trip_keeps_level_order() {
    let dir = tempfile::tempdir().unwrap();
    let levels: Vec<String> = ["zeta", "alpha", "mid"].iter().map(|s| s.to_string()).collect();
    let ds = Dataset::new(
        vec![FeatureSchema::categorical("g", levels.clone()), FeatureSchema::numeric("x")],
        vec![0.0, 1.0, 1.0, -2.5, 2.0, 0.125, 0.0, 3.0],
        "y",
        Target::Classification {
            classes: vec!["no".into(), "yes".into()],
            labels: vec![1, 0, 1, 1],
        },
        (1..=4).map(|i| i.to_string()).collect(),
    )
    .unwrap();
    let back = reload(&ds, &dir.path().join("c.csv"));
    assert_eq!(back, ds);
    assert_eq!(back.schema()[0].kind, FeatureKind::Categorical { levels });
}

#[test]
fn simulation_is_a_pure_function_of_its_spec() {
    let spec = SimSpec { kind: SimKind::Corners, n: 50, seed: 9 };
    let a = simulate(spec).unwrap();
    let b = simulate(spec).unwrap();
    assert!(a.cells().iter().zip(b.cells()).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_eq!(a, b);
    assert_ne!(a, simulate(SimSpec { seed: 10, ..spec }).unwrap());
}

fn level_name(k: usize) -> String {
    ["red", "green", "blue", "cyan"][k].to_string()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn arbitrary_numeric_regression_round_trips(
        rows in prop::collection::vec(prop::collection::vec(-1e12f64..1e12, 3), 1..20),
        labels in prop::collection::vec(-1e6f64..1e6, 20),
    ) {
        let n = rows.len();
        let ds = Dataset::new(
            (1..=3).map(|j| FeatureSchema::numeric(format!("f{j}"))).collect(),
            rows.concat(),
            "target",
            Target::Regression(labels[..n].to_vec()),
            (1..=n).map(|i| i.to_string()).collect(),
        ).unwrap();
        let dir = tempfile::tempdir().unwrap();
        prop_assert_eq!(reload(&ds, &dir.path().join("d.csv")), ds);
    }

    #[test]
    fn arbitrary_mixed_classification_round_trips(
        codes in prop::collection::vec((0usize..4, -100f64..100.0, 0usize..3), 1..25),
    ) {
        // levels and classes in first-appearance order, as the loader infers them
        let mut levels: Vec<String> = Vec::new();
        let mut classes: Vec<String> = Vec::new();
        let mut cells = Vec::new();
        let mut labels = Vec::new();
        for &(g, x, c) in &codes {
            let name = level_name(g);
            let idx = levels.iter().position(|l| *l == name).unwrap_or_else(|| { levels.push(name); levels.len() - 1 });
            cells.extend([idx as f64, x]);
            let class = format!("c{c}");
            let ci = classes.iter().position(|l| *l == class).unwrap_or_else(|| { classes.push(class); classes.len() - 1 });
            labels.push(ci);
        }
        let n = codes.len();
        let ds = Dataset::new(
            vec![FeatureSchema::categorical("colour", levels), FeatureSchema::numeric("x")],
            cells,
            "label",
            Target::Classification { classes, labels },
            (1..=n).map(|i| i.to_string()).collect(),
        ).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_csv(&ds, &path).unwrap();
        prop_assert_eq!(load_csv(&path, "label", TaskKind::Classification).unwrap(), ds);
    }
}
