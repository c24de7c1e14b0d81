use mmm_core::error::Error;
use mmm_core::harness::{run_experiment, ExperimentConfig, Grid, LemmaId, LemmaParams};

#[test]
fn single_point_setup_a() {
    let config = ExperimentConfig::new(vec![LemmaId::FraMat], LemmaParams::default(), Grid::default());
    let table = run_experiment(&config).unwrap();
    assert_eq!(table.rows.len(), 1);
    let row = &table.rows[0];
    assert_eq!((row.lemma.as_str(), row.num_vars, row.num_colors), ("fra-mat", 3, 2));
    assert_eq!(row.verdict, "pass");
    assert!(table.all_pass());
}

#[test]
fn colors_by_vars_grid() {
    let grid = Grid {
        num_colors: vec![2, 3, 4],
        num_vars: vec![3, 6],
        ..Grid::default()
    };
    let config = ExperimentConfig::new(vec![LemmaId::FraMat], LemmaParams::default(), grid);
    let table = run_experiment(&config).unwrap();
    assert_eq!(table.rows.len(), 6);
    assert!(table.all_pass());
    let order: Vec<(usize, usize)> = table.rows.iter().map(|r| (r.num_vars, r.num_colors)).collect();
    assert_eq!(order, [(3, 2), (3, 3), (3, 4), (6, 2), (6, 3), (6, 4)]);
}

#[test]
fn empty_selection_gives_header_only() {
    let config = ExperimentConfig::new(vec![], LemmaParams::default(), Grid::default());
    let table = run_experiment(&config).unwrap();
    assert!(table.rows.is_empty());
    assert!(!table.any_fail());
    let csv = table.to_csv();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("lemma,num_vars,"));
}

#[test]
fn csv_is_identical_across_thread_counts() {
    let grid = Grid {
        seeds: vec![1, 2, 3, 4],
        size: vec![6, 8],
        ..Grid::default()
    };
    let mut config = ExperimentConfig::new(vec![LemmaId::BipCover, LemmaId::TotalVc], LemmaParams::default(), grid);
    config.threads = 1;
    let serial = run_experiment(&config).unwrap().to_csv();
    config.threads = 4;
    assert_eq!(run_experiment(&config).unwrap().to_csv(), serial);
    assert_eq!(serial.lines().count(), 1 + 16);
}

#[test]
fn config_parses_from_json() {
    let text = r#"{
        "schema": "mmm/experiment",
        "version": 1,
        "lemmas": ["kr07-yes", "wei-yes"],
        "params": {"epsilon": "1/8"},
        "grid": {"xi": ["0/1", "1/4"], "num_vars": [4]}
    }"#;
    let config = ExperimentConfig::from_json(text).unwrap();
    let points = config.points();
    assert_eq!(points.len(), 4);
    assert!(points.iter().all(|(_, p)| p.num_vars == 4));
    let table = run_experiment(&config).unwrap();
    assert!(table.all_pass(), "{}", table.to_csv());
}

#[test]
fn config_errors() {
    let unknown = r#"{"schema": "mmm/experiment", "version": 1, "lemmas": ["no-such"]}"#;
    assert!(matches!(ExperimentConfig::from_json(unknown), Err(Error::Schema { .. })));
    let wrong = r#"{"schema": "mmm/graph", "version": 1, "lemmas": []}"#;
    match ExperimentConfig::from_json(wrong) {
        Err(Error::Schema { location, .. }) => assert_eq!(location, "schema"),
        other => panic!("{other:?}"),
    }
}
