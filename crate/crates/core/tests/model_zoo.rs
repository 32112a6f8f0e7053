mod common;

use std::io::Write as _;

use common::brute_joint;
use shapcredit::model::{
    attach_loss_node, attach_model_node, load_dataset, Column, ColumnKind, Dataset, LossKind, LossSpec, ModelHandle,
    OutputType,
};
use shapcredit::prelude::*;

/// The data nodes of the smoking network, without model or loss.
fn smoking_base() -> Network {
    Network::builder()
        .variable(Variable::new("Smoker", &["0", "1"]))
        .variable(Variable::new("Cancer", &["0", "1"]))
        .variable(Variable::new("XRay", &["0", "1"]))
        .variable(Variable::new("Dyspnoea", &["0", "1"]).with_role(Role::Target))
        .cpt("Smoker", &[], vec![vec![0.7, 0.3]])
        .cpt("Cancer", &["Smoker"], vec![vec![0.997, 0.003], vec![0.968, 0.032]])
        .cpt("XRay", &["Cancer"], vec![vec![0.8, 0.2], vec![0.1, 0.9]])
        .cpt("Dyspnoea", &["Cancer"], vec![vec![0.7, 0.3], vec![0.35, 0.65]])
        .build()
        .unwrap()
}

fn and_model() -> ModelHandle {
    ModelHandle::table(
        vec!["Smoker".into(), "Cancer".into()],
        vec![vec![0.0, 1.0], vec![0.0, 1.0]],
        vec![0.0, 0.0, 0.0, 1.0],
        OutputType::Discrete(vec![0.0, 1.0]),
    )
    .unwrap()
}

#[test]
fn attaching_the_and_model_rebuilds_the_bundled_network() {
    let net = attach_model_node(&smoking_base(), &and_model()).unwrap();
    let net = attach_loss_node(&net, &LossSpec::new(LossKind::ZeroOne)).unwrap();
    let bundled = bundled::smoking_fig4();
    assert_eq!(net.variables(), bundled.variables());
    assert_eq!(net.cpts(), bundled.cpts());
    // and back again
    let model = ModelHandle::from_network(&bundled).unwrap();
    for (x, want) in [([0.0, 0.0], 0.0), ([0.0, 1.0], 0.0), ([1.0, 0.0], 0.0), ([1.0, 1.0], 1.0)] {
        assert_eq!(model.evaluate(&x).unwrap(), want);
    }
}

#[test]
fn attached_model_marginal_matches_monte_carlo() {
    let base = smoking_base();
    let net = attach_model_node(&base, &and_model()).unwrap();
    let exact = net.condition(&Assignment::new(), net.model_node().unwrap()).unwrap().weights()[1];
    let n = 200_000;
    let model = and_model();
    let hits: f64 = base
        .forward_sample(n, 3)
        .iter()
        .map(|a| model.evaluate_assignment(&base, a).unwrap())
        .sum();
    let freq = hits / n as f64;
    let sigma = (exact * (1.0 - exact) / n as f64).sqrt();
    assert!((freq - exact).abs() <= 3.0 * sigma, "{freq} vs {exact} ± {sigma}");
}

#[test]
fn expected_zero_one_loss_is_the_error_rate() {
    for net in [bundled::smoking_fig4(), bundled::smoking_fig5()] {
        let (g, y) = (net.model_node().unwrap(), net.target_node().unwrap());
        let p_wrong: f64 = brute_joint(&net)
            .iter()
            .filter(|(s, _)| s[g.index()] != s[y.index()])
            .map(|(_, p)| p)
            .sum();
        let loss = net.condition(&Assignment::new(), net.loss_node().unwrap()).unwrap();
        assert!((Measure::expected_value().apply(&loss).unwrap() - p_wrong).abs() < 1e-12);
    }
}

#[test]
fn expected_squared_error_matches_oracle() {
    let model = ModelHandle::table(
        vec!["Smoker".into(), "XRay".into()],
        vec![vec![0.0, 1.0], vec![0.0, 1.0]],
        vec![0.1, 0.4, 0.3, 0.9],
        OutputType::Numeric,
    )
    .unwrap();
    let net = attach_model_node(&smoking_base(), &model).unwrap();
    let net = attach_loss_node(&net, &LossSpec::new(LossKind::SquaredError)).unwrap();
    let (s, x, y) = (net.id("Smoker").unwrap(), net.id("XRay").unwrap(), net.target_node().unwrap());
    let want: f64 = brute_joint(&net)
        .iter()
        .map(|(st, p)| {
            let g = model.evaluate(&[st[s.index()] as f64, st[x.index()] as f64]).unwrap();
            p * (st[y.index()] as f64 - g).powi(2)
        })
        .sum();
    let loss = net.condition(&Assignment::new(), net.loss_node().unwrap()).unwrap();
    assert!((Measure::expected_value().apply(&loss).unwrap() - want).abs() < 1e-12);
}

#[test]
fn attaching_rejects_bad_models() {
    let err = attach_model_node(&bundled::smoking_fig4(), &and_model()).unwrap_err();
    assert!(matches!(err, Error::InvalidNetwork(_)));
    let ghost = ModelHandle::linear(vec!["Ghost".into()], vec![1.0], 0.0).unwrap();
    assert!(matches!(attach_model_node(&smoking_base(), &ghost), Err(Error::MissingInput(_))));
    let net = attach_model_node(&smoking_base(), &and_model()).unwrap();
    assert!(matches!(
        attach_loss_node(&net, &LossSpec::new(LossKind::CrossEntropy)),
        Err(Error::IncompatibleLossKind(_))
    ));
}

fn numeric(name: &str) -> Column {
    Column {
        name: name.into(),
        kind: ColumnKind::Numeric,
    }
}

#[test]
fn knn_model() {
    let columns = vec![
        numeric("a"),
        Column {
            name: "c".into(),
            kind: ColumnKind::Categorical(vec!["u".into(), "v".into()]),
        },
        numeric("y"),
    ];
    let rows = vec![
        vec![0.0, 0.0, 1.0],
        vec![1.0, 1.0, 2.0],
        vec![10.0, 0.0, 3.0],
        vec![0.0, 0.0, 4.0],
    ];
    let data = Dataset::new(columns, rows, Some("y")).unwrap();
    let inputs = vec!["a".to_string(), "c".to_string()];
    let y = data.target_values().unwrap();
    let one = ModelHandle::knn(&data, &inputs, &y, 1, OutputType::Numeric).unwrap();
    assert_eq!(one.evaluate(&[1.0, 1.0]).unwrap(), 2.0);
    assert_eq!(one.evaluate(&[10.0, 0.0]).unwrap(), 3.0);
    // rows 0 and 3 tie at distance zero: the lower index wins
    assert_eq!(one.evaluate(&[0.0, 0.0]).unwrap(), 1.0);
    let two = ModelHandle::knn(&data, &inputs, &y, 2, OutputType::Numeric).unwrap();
    assert_eq!(two.evaluate(&[0.0, 0.0]).unwrap(), 2.5);
    assert!(matches!(one.evaluate(&[f64::NAN, 0.0]), Err(Error::MissingInput(_))));
    // numeric inputs cannot become network parents
    assert!(matches!(
        attach_model_node(&smoking_base(), &ModelHandle::knn(&data, &inputs[..1], &y, 1, OutputType::Numeric).unwrap()),
        Err(Error::ContinuousInputUnsupported(_)) | Err(Error::MissingInput(_))
    ));
}

#[test]
fn probability_models_and_cross_entropy() {
    let model = ModelHandle::probability_table(
        vec!["a".into()],
        vec![vec![0.0, 1.0]],
        vec![vec![0.8, 0.2], vec![0.3, 0.7]],
        vec![0.0, 1.0],
    )
    .unwrap();
    assert_eq!(model.evaluate(&[1.0]).unwrap(), 1.0);
    let probs = model.probabilities(&[0.0]).unwrap();
    let ce = LossKind::CrossEntropy.of_probabilities(1.0, &probs, &[0.0, 1.0]).unwrap();
    assert!((ce + 0.2f64.ln()).abs() < 1e-15);
}

#[test]
fn dataset_loading() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    std::fs::File::create(&path)
        .unwrap()
        .write_all(b"x,colour,y\n1.5,red,0\n2,blue,1\n-1,red,1\n")
        .unwrap();
    let data = load_dataset(&path).unwrap();
    assert_eq!(data.n_rows(), 3);
    assert_eq!(data.columns()[1].kind, ColumnKind::Categorical(vec!["blue".into(), "red".into()]));
    assert_eq!(data.target_values().unwrap(), vec![0.0, 1.0, 1.0]);

    // a written dataset keeps its schema through the sidecar file
    let out = dir.path().join("copy.csv");
    data.write(&out).unwrap();
    let back = load_dataset(&out).unwrap();
    assert_eq!(back.rows(), data.rows());
    assert_eq!(back.schema(), data.schema());

    std::fs::write(&path, "x,y\n1,2\nabc,3\n").unwrap();
    let schema_path = shapcredit::model::schema_path(&path);
    std::fs::write(
        &schema_path,
        r#"{"columns": [{"name": "x", "kind": "numeric"}, {"name": "y", "kind": "numeric"}], "target": "y"}"#,
    )
    .unwrap();
    match load_dataset(&path) {
        Err(Error::Parse { row, column, .. }) => {
            assert_eq!(row, 2);
            assert_eq!(column, "x");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
    std::fs::write(&path, "a,y\n1,2\n").unwrap();
    assert!(matches!(load_dataset(&path), Err(Error::SchemaMismatch(_))));
}

#[test]
fn bundled_synthetic_dataset() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/synthetic6.csv");
    let data = load_dataset(path).unwrap();
    assert_eq!(data.n_rows(), 1000);
    assert_eq!(data.feature_names(), ["x1", "x2", "x3", "x4", "x5", "x6"]);
    let regenerated = shapcredit::harness::synthetic::six_feature(1000, 0).unwrap();
    assert_eq!(data.rows(), regenerated.rows());
}

#[test]
fn model_documents() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(
        &path,
        r#"{"kind": "table", "inputs": ["Smoker", "Cancer"], "levels": [[0, 1], [0, 1]],
            "outputs": [0, 0, 0, 1], "output_type": {"discrete": [0, 1]}}"#,
    )
    .unwrap();
    let model = ModelHandle::from_path(&path).unwrap();
    assert_eq!(model.evaluate(&[1.0, 1.0]).unwrap(), 1.0);
    std::fs::write(&path, r#"{"kind": "linear", "inputs": ["a", "b"], "weights": [2, -1], "bias": 0.5}"#).unwrap();
    assert_eq!(ModelHandle::from_path(&path).unwrap().evaluate(&[1.0, 3.0]).unwrap(), -0.5);
    std::fs::write(&path, r#"{"kind": "table", "inputs": ["a"], "levels": [[0, 1]], "outputs": [1]}"#).unwrap();
    assert!(matches!(ModelHandle::from_path(&path), Err(Error::InvalidModel(_))));
}
