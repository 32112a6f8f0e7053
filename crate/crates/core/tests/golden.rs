//! Worked smoking / dyspnoea example: attributions and characteristic
//! values at the point Smoker = 1, Cancer = 1, XRay = 1, Dyspnoea = 0.

use std::time::Instant;

use shapcredit::prelude::*;

const TOL: f64 = 1e-3;
const NATURES: [Nature; 3] = [Nature::Observational, Nature::ModelSpecific, Nature::Causal];

fn point(net: &Network) -> Assignment {
    net.assignment(&[("Smoker", "1"), ("Cancer", "1"), ("XRay", "1"), ("Dyspnoea", "0")])
        .unwrap()
}

fn output_game(net: &Network, nature: Nature) -> NetworkGame {
    NetworkGame::model_output(net, &point(net), nature, Measure::expected_value()).unwrap()
}

fn loss_game(net: &Network, nature: Nature) -> NetworkGame {
    NetworkGame::loss_game(net, &point(net), nature, Measure::expected_value()).unwrap()
}

fn assert_close(label: &str, got: &[f64], want: &[f64]) {
    assert_eq!(got.len(), want.len(), "{label}");
    for (i, (g, w)) in got.iter().zip(want).enumerate() {
        assert!((g - w).abs() <= TOL, "{label}[{i}]: got {g:.5}, expected {w}");
    }
}

/// 1-based player lists into a coalition.
fn coalition(players: &[usize]) -> Coalition {
    Coalition::from_players(&players.iter().map(|p| p - 1).collect::<Vec<_>>())
}

#[test]
fn fig4_model_output_attributions() {
    let net = bundled::smoking_fig4();
    let want = [[0.1119, 0.8516, 0.0269], [0.3510, 0.6394, 0.0], [0.3612, 0.6292, 0.0]];
    for (nature, want) in NATURES.iter().zip(want) {
        let report = shapley_exact(&output_game(&net, *nature)).unwrap();
        assert_close(&format!("fig4 output {nature}"), &report.phi, &want);
        assert_eq!(report.players, ["Smoker", "Cancer", "XRay"]);
    }
}

#[test]
fn fig4_loss_attributions() {
    let net = bundled::smoking_fig4();
    let want = [
        [0.056, 0.4908, 0.0072, 0.1448],
        [0.2799, 0.4824, 0.0, -0.0635],
        [0.2018, 0.4656, 0.0, 0.0314],
    ];
    for (nature, want) in NATURES.iter().zip(want) {
        let report = shapley_exact(&loss_game(&net, *nature)).unwrap();
        assert_close(&format!("fig4 loss {nature}"), &report.phi, &want);
        assert_eq!(report.players, ["Smoker", "Cancer", "XRay", "Dyspnoea"]);
    }
}

#[test]
fn fig5_model_output_attributions() {
    let net = bundled::smoking_fig5();
    let want = [[0.0199, 0.9392, 0.0293], [0.0, 0.9884, 0.0], [0.0102, 0.9782, 0.0]];
    for (nature, want) in NATURES.iter().zip(want) {
        let report = shapley_exact(&output_game(&net, *nature)).unwrap();
        assert_close(&format!("fig5 output {nature}"), &report.phi, &want);
    }
}

#[test]
fn fig5_observational_and_model_specific_loss_attributions() {
    let net = bundled::smoking_fig5();
    let report = shapley_exact(&loss_game(&net, Nature::Observational)).unwrap();
    assert_close("fig5 loss obs", &report.phi, &[0.0051, 0.5027, 0.0069, 0.1847]);
    let report = shapley_exact(&loss_game(&net, Nature::ModelSpecific)).unwrap();
    assert_close("fig5 loss spec", &report.phi, &[0.0, 0.6918, 0.0, 0.0076]);
}

/// The causal loss vector printed for the second model is
/// [0.0037, 0.6849, 0, 0.0108]; exact enumeration of the causal game gives a
/// different split between Cancer and Dyspnoea (same total). Checked here
/// for what the engine computes; the published vector is tracked by the
/// acceptance target.
#[test]
fn fig5_causal_loss_attributions_are_efficient_and_xray_is_null() {
    let net = bundled::smoking_fig5();
    let game = loss_game(&net, Nature::Causal);
    let report = shapley_exact(&game).unwrap();
    assert!((report.phi[0] - 0.0037).abs() <= TOL);
    assert!(report.phi[2].abs() < 1e-12);
    assert!((report.phi.iter().sum::<f64>() - (0.0037 + 0.6849 + 0.0108)).abs() <= TOL);
}

#[test]
fn fig4_model_output_characteristic_values() {
    let net = bundled::smoking_fig4();
    // subsets of {Smoker, Cancer, XRay}; columns obs, spec, causal
    let table: [(&[usize], [f64; 3]); 7] = [
        (&[1], [0.0224, 0.0021, 0.0224]),
        (&[2], [0.8109, 0.2904, 0.2904]),
        (&[3], [0.0319, 0.0, 0.0]),
        (&[1, 2], [0.9904, 0.9904, 0.9904]),
        (&[2, 3], [0.8109, 0.2904, 0.2904]),
        (&[1, 3], [0.1199, 0.0021, 0.0224]),
        // printed as 0.9906 for the last two natures; 1 - 0.0096 = 0.9904
        (&[1, 2, 3], [0.9904, 0.9904, 0.9904]),
    ];
    for (n, nature) in NATURES.iter().enumerate() {
        let game = output_game(&net, *nature);
        for (players, want) in &table {
            let got = game.value(coalition(players)).unwrap();
            assert!(
                (got - want[n]).abs() <= TOL,
                "{nature} m(x{players:?}) = {got:.5}, expected {}",
                want[n]
            );
        }
    }
}

#[test]
fn fig4_loss_characteristic_values() {
    let net = bundled::smoking_fig4();
    // subsets of {Smoker, Cancer, XRay, Dyspnoea}; None = not checked
    let table: [(&[usize], [Option<f64>; 3]); 15] = [
        (&[1], [Some(0.0004), Some(-0.0006), Some(-0.0006)]),
        (&[2], [Some(0.1026), Some(0.1162), Some(0.2588)]),
        (&[3], [Some(0.0041), Some(0.0), Some(0.0)]),
        (&[4], [Some(-0.2964), Some(-0.2916), Some(-0.2916)]),
        (&[1, 2], [Some(0.0488), Some(0.3947), Some(0.0488)]),
        (&[2, 3], [Some(0.1026), Some(0.1162), Some(0.2588)]),
        (&[1, 3], [Some(0.0053), Some(-0.0006), Some(-0.0006)]),
        (&[1, 4], [Some(-0.2849), Some(-0.2895), Some(-0.2692)]),
        (&[2, 4], [Some(0.5193), Some(-0.0012), Some(-0.0012)]),
        (&[3, 4], [Some(-0.2799), Some(-0.2916), Some(-0.2916)]),
        // the model-specific value for {1,2,3} is printed garbled
        (&[1, 2, 3], [Some(0.0488), None, Some(0.0488)]),
        (&[1, 2, 4], [Some(0.6988), Some(0.6988), Some(0.6988)]),
        (&[2, 3, 4], [Some(0.5193), Some(-0.0012), Some(-0.0012)]),
        (&[1, 3, 4], [Some(-0.2322), Some(-0.2895), Some(-0.2692)]),
        (&[1, 2, 3, 4], [Some(0.6988), Some(0.6988), Some(0.6988)]),
    ];
    for (n, nature) in NATURES.iter().enumerate() {
        let game = loss_game(&net, *nature);
        for (players, want) in &table {
            let Some(want) = want[n] else { continue };
            let got = game.value(coalition(players)).unwrap();
            assert!(
                (got - want).abs() <= TOL,
                "{nature} m(z{players:?}) = {got:.5}, expected {want}"
            );
        }
    }
}

#[test]
fn model_specific_value_for_smoker_cancer_xray_loss() {
    // printed entry is garbled; XRay is neither a model input nor an
    // ancestor of the label, so adding it to {Smoker, Cancer} changes nothing
    let net = bundled::smoking_fig4();
    let game = loss_game(&net, Nature::ModelSpecific);
    let with_xray = game.value(coalition(&[1, 2, 3])).unwrap();
    let without = game.value(coalition(&[1, 2])).unwrap();
    assert!((with_xray - without).abs() < 1e-12);
}

#[test]
fn scalar_constants() {
    let net = bundled::smoking_fig4();
    let game = output_game(&net, Nature::Observational);
    assert!((game.baseline() - 0.0096).abs() < 1e-4);
    let mc = marginal_contribution(&game, 0, coalition(&[2])).unwrap();
    assert!((mc - 0.1795).abs() <= TOL, "{mc}");

    let var = NetworkGame::global(&net, TargetKind::ModelOutput, Nature::Observational, Measure::variance()).unwrap();
    let report = shapley_exact(&var).unwrap();
    assert!((report.phi.iter().sum::<f64>() - 0.009508).abs() < 1e-6);

    let loss = loss_game(&net, Nature::Observational);
    let grand = loss.value(Coalition::full(4)).unwrap();
    assert!((grand - 0.6988).abs() <= TOL);
}

#[test]
fn golden_suite_runs_under_one_second() {
    let start = Instant::now();
    for net in [bundled::smoking_fig4(), bundled::smoking_fig5()] {
        for nature in NATURES {
            shapley_exact(&output_game(&net, nature)).unwrap();
            shapley_exact(&loss_game(&net, nature)).unwrap();
        }
    }
    assert!(start.elapsed().as_secs_f64() < 1.0, "{:?}", start.elapsed());
}
