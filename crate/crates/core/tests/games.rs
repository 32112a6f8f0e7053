mod common;

use common::{brute_joint, entropy, law, random_labelled};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shapcredit::model::{attach_model_node, Column, ColumnKind, Dataset, LossKind, ModelHandle};
use shapcredit::prelude::*;

const NATURES: [Nature; 3] = [Nature::Observational, Nature::ModelSpecific, Nature::Causal];

fn z(net: &Network) -> Assignment {
    net.assignment(&[("Smoker", "1"), ("Cancer", "1"), ("XRay", "1"), ("Dyspnoea", "0")])
        .unwrap()
}

#[test]
fn xray_is_a_null_player_outside_observation() {
    let net = bundled::smoking_fig4();
    for nature in [Nature::ModelSpecific, Nature::Causal] {
        let game = NetworkGame::model_output(&net, &z(&net), nature, Measure::expected_value()).unwrap();
        for mask in 0..8u64 {
            if mask & 4 == 0 {
                let mc = marginal_contribution(&game, 2, Coalition(mask)).unwrap();
                assert!(mc.abs() < 1e-12, "{nature}: {mc}");
            }
        }
        assert!(shapley_exact(&game).unwrap().phi[2].abs() < 1e-12);
    }
}

#[test]
fn grand_coalition_recovers_the_point_value() {
    for net in [bundled::smoking_fig4(), bundled::smoking_fig5()] {
        let point = z(&net);
        let model = ModelHandle::from_network(&net).unwrap();
        let g = model.evaluate_assignment(&net, &point).unwrap();
        let loss = if g == 0.0 { 0.0 } else { 1.0 };
        for nature in NATURES {
            let out = NetworkGame::model_output(&net, &point, nature, Measure::expected_value()).unwrap();
            let mean_g = out.baseline();
            assert!((out.value(Coalition::full(3)).unwrap() - (g - mean_g)).abs() < 1e-12);
            let lg = NetworkGame::loss_game(&net, &point, nature, Measure::expected_value()).unwrap();
            assert!((lg.value(Coalition::full(4)).unwrap() - (loss - lg.baseline())).abs() < 1e-12);
            let report = shapley_exact(&lg).unwrap();
            assert!((report.grand_value - (loss - lg.baseline())).abs() < 1e-12);
        }
    }
}

/// Independent root features, a label depending on them and a model of
/// them: pinning and intervening agree on the model output.
#[test]
fn causal_equals_model_specific_with_independent_features() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let mut b = Network::builder();
        for i in 0..3 {
            let p = rng.gen_range(0.1..0.9);
            b = b.variable(Variable::new(format!("F{i}"), &["0", "1"])).cpt(&format!("F{i}"), &[], vec![vec![1.0 - p, p]]);
        }
        let y_rows = (0..8)
            .map(|_| {
                let p = rng.gen_range(0.05..0.95);
                vec![1.0 - p, p]
            })
            .collect();
        let net = b
            .variable(Variable::new("Y", &["0", "1"]).with_role(Role::Target))
            .cpt("Y", &["F0", "F1", "F2"], y_rows)
            .build()
            .unwrap();
        let outputs: Vec<f64> = (0..8).map(|_| f64::from(rng.gen_range(0..3u8))).collect();
        let model = ModelHandle::table(
            vec!["F0".into(), "F1".into(), "F2".into()],
            vec![vec![0.0, 1.0]; 3],
            outputs,
            shapcredit::model::OutputType::Numeric,
        )
        .unwrap();
        let net = attach_model_node(&net, &model).unwrap();
        let point = net.assignment(&[("F0", "1"), ("F1", "0"), ("F2", "1")]).unwrap();
        for measure in [Measure::expected_value(), Measure::variance(), Measure::shannon_entropy()] {
            let spec = NetworkGame::model_output(&net, &point, Nature::ModelSpecific, measure).unwrap();
            let causal = NetworkGame::model_output(&net, &point, Nature::Causal, measure).unwrap();
            let obs = NetworkGame::model_output(&net, &point, Nature::Observational, measure).unwrap();
            for mask in 0..8u64 {
                let s = spec.value(Coalition(mask)).unwrap();
                assert!((s - causal.value(Coalition(mask)).unwrap()).abs() < 1e-12);
                // independent inputs: conditioning is pinning as well
                assert!((s - obs.value(Coalition(mask)).unwrap()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn linear_model_of_independent_features_splits_variance_by_weight() {
    let values: [&[f64]; 3] = [&[0.0, 1.0, 2.0], &[-1.0, 1.0], &[0.0, 0.5, 3.0]];
    let probs: [&[f64]; 3] = [&[0.2, 0.5, 0.3], &[0.6, 0.4], &[0.1, 0.1, 0.8]];
    let weights = [1.5, -2.0, 0.7];
    let mut b = Network::builder();
    for (i, (vals, ps)) in values.iter().zip(probs).enumerate() {
        let labels: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
        let name = format!("X{i}");
        b = b.variable(Variable::from_states(&name, labels)).cpt(&name, &[], vec![ps.to_vec()]);
    }
    let net = b.build().unwrap();
    let names: Vec<String> = (0..3).map(|i| format!("X{i}")).collect();
    let model = ModelHandle::linear(names, weights.to_vec(), 0.25).unwrap();
    let net = attach_model_node(&net, &model).unwrap();
    for nature in NATURES {
        let game = NetworkGame::global(&net, TargetKind::ModelOutput, nature, Measure::variance()).unwrap();
        let phi = shapley_exact(&game).unwrap().phi;
        for i in 0..3 {
            let (_, var) = common::mean_var(values[i], probs[i]);
            let want = weights[i] * weights[i] * var;
            assert!((phi[i] - want).abs() < 1e-6, "{nature} φ{i} = {} vs {want}", phi[i]);
        }
    }
}

fn information_oracle(net: &Network, players: &[VarId], y: VarId, mask: u64) -> f64 {
    let joint = brute_joint(net);
    let members: Vec<VarId> = players
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, v)| *v)
        .collect();
    let h_y = entropy(&law(&joint, y, 2, |_| true));
    let mut cells: Vec<Vec<usize>> = Vec::new();
    for (s, _) in &joint {
        let key: Vec<usize> = members.iter().map(|v| s[v.index()]).collect();
        if !cells.contains(&key) {
            cells.push(key);
        }
    }
    let matches = |s: &[usize], key: &[usize]| members.iter().zip(key).all(|(v, k)| s[v.index()] == *k);
    let h_cond: f64 = cells
        .iter()
        .map(|key| {
            let mass: f64 = joint.iter().filter(|(s, _)| matches(s, key)).map(|(_, p)| p).sum();
            mass * entropy(&law(&joint, y, 2, |s| matches(s, key)))
        })
        .sum();
    h_y - h_cond
}

#[test]
fn entropy_game_on_the_label_is_mutual_information() {
    let mut nets = vec![bundled::smoking_fig4()];
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    nets.extend((0..20).map(|i| random_labelled(&mut rng, 3 + i % 4)));
    for net in &nets {
        let y = net.target_node().unwrap();
        let game = NetworkGame::global(net, TargetKind::TargetY, Nature::Observational, Measure::shannon_entropy()).unwrap();
        let players = game.players().to_vec();
        for mask in 0..1u64 << players.len() {
            let got = game.value(Coalition(mask)).unwrap();
            let want = information_oracle(net, &players, y, mask);
            assert!((got - want).abs() < 1e-9, "S = {mask:b}: {got} vs {want}");
        }
    }
}

#[test]
fn global_value_of_an_irrelevant_feature_is_zero() {
    // XRay carries no information about the second model's output once
    // Cancer is known, and the output is a function of Cancer alone
    let net = bundled::smoking_fig5();
    for measure in [Measure::variance(), Measure::shannon_entropy(), Measure::cumulative_paired_entropy()] {
        let game = NetworkGame::global(&net, TargetKind::ModelOutput, Nature::Observational, measure).unwrap();
        let with_cancer = Coalition::from_players(&[1]);
        assert!(marginal_contribution(&game, 2, with_cancer).unwrap().abs() < 1e-12);
        assert!(marginal_contribution(&game, 0, with_cancer).unwrap().abs() < 1e-12);
    }
}

#[test]
fn local_sage_values_against_hand_oracle() {
    let net = bundled::smoking_fig4();
    let point = z(&net);
    let game = SageLocalGame::new(&net, &point, Nature::Observational, LossKind::SquaredError).unwrap();
    let joint = brute_joint(&net);
    let g = net.model_node().unwrap();
    let features: Vec<VarId> = net.features();
    let mean_g = |mask: u64| {
        law(&joint, g, 2, |s| {
            features
                .iter()
                .enumerate()
                .all(|(i, f)| mask >> i & 1 == 0 || s[f.index()] == point.get(*f).unwrap())
        })[1]
    };
    let y = 0.0;
    let base = (y - mean_g(0)).powi(2);
    for mask in 0..8u64 {
        let want = (y - mean_g(mask)).powi(2) - base;
        let got = game.value(Coalition(mask)).unwrap();
        assert!((got - want).abs() < 1e-12, "S = {mask:b}: {got} vs {want}");
    }
    assert!(matches!(
        SageLocalGame::new(&net, &point, Nature::Observational, LossKind::ZeroOne),
        Err(Error::IncompatibleLossKind(_))
    ));
}

#[test]
fn game_construction_errors() {
    let net = bundled::smoking_fig4();
    assert!(matches!(
        NetworkGame::global(&net, TargetKind::ModelOutput, Nature::Observational, Measure::expected_value()),
        Err(Error::ExpectedValueGlobalRejected)
    ));
    let partial = net.assignment(&[("Smoker", "1")]).unwrap();
    assert!(matches!(
        NetworkGame::model_output(&net, &partial, Nature::Causal, Measure::expected_value()),
        Err(Error::UnboundVariable(_))
    ));
    let colours = Network::builder()
        .variable(Variable::new("A", &["0", "1"]))
        .variable(Variable::new("Y", &["red", "blue"]).with_role(Role::Target))
        .cpt("A", &[], vec![vec![0.5, 0.5]])
        .cpt("Y", &["A"], vec![vec![0.9, 0.1], vec![0.2, 0.8]])
        .build()
        .unwrap();
    assert!(matches!(
        NetworkGame::global(&colours, TargetKind::TargetY, Nature::Observational, Measure::variance()),
        Err(Error::NonNumericSupport(_))
    ));
    // entropy only needs labels
    let game = NetworkGame::global(&colours, TargetKind::TargetY, Nature::Observational, Measure::shannon_entropy()).unwrap();
    assert!(shapley_exact(&game).unwrap().phi[0] > 0.0);
    assert!(matches!(
        NetworkGame::global(&colours, TargetKind::ModelOutput, Nature::Observational, Measure::variance()),
        Err(Error::ModelNodeMissing)
    ));
}

#[test]
fn empirical_linear_game_has_closed_form_attributions() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let columns = (0..4)
        .map(|i| Column {
            name: format!("x{i}"),
            kind: ColumnKind::Numeric,
        })
        .collect();
    let rows: Vec<Vec<f64>> = (0..50).map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let background = Dataset::new(columns, rows.clone(), None).unwrap();
    let weights = vec![2.0, -1.0, 0.5, 0.0];
    let names: Vec<String> = (0..4).map(|i| format!("x{i}")).collect();
    let model = ModelHandle::linear(names, weights.clone(), 1.0).unwrap();
    let point = [0.3, -0.7, 0.9, 0.1];
    let game = EmpiricalGame::model_output(&model, &background, &point, Measure::expected_value()).unwrap();
    let phi = shapley_exact(&game).unwrap().phi;
    for i in 0..4 {
        let mean = rows.iter().map(|r| r[i]).sum::<f64>() / rows.len() as f64;
        assert!((phi[i] - weights[i] * (point[i] - mean)).abs() < 1e-9);
    }
    let empty = Dataset::new(vec![], vec![], None).unwrap();
    assert!(matches!(
        EmpiricalGame::model_output(&model, &empty, &point, Measure::expected_value()),
        Err(Error::EmptyBackground)
    ));
}
