//! Random networks and brute-force oracles shared by the integration tests.
//! The oracles only read CPT entries; they never call the inference code.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use shapcredit::prelude::*;

pub fn labels(card: usize) -> Vec<String> {
    (0..card).map(|s| s.to_string()).collect()
}

fn random_row(rng: &mut ChaCha8Rng, card: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..card).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// Random DAG over `V0..V{n-1}` (declaration order is topological), each
/// node with at most three earlier parents and 2 or `max_card` states.
pub fn random_dag(rng: &mut ChaCha8Rng, n: usize, max_card: usize) -> Network {
    let cards: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=max_card.max(2))).collect();
    let mut builder = Network::builder();
    for (i, &c) in cards.iter().enumerate() {
        builder = builder.variable(Variable::from_states(format!("V{i}"), labels(c)));
    }
    for i in 0..n {
        let parents: Vec<usize> = (0..i).filter(|_| rng.gen_bool(0.5)).take(3).collect();
        let rows: usize = parents.iter().map(|p| cards[*p]).product();
        let table = (0..rows).map(|_| random_row(rng, cards[i])).collect();
        let names: Vec<String> = parents.iter().map(|p| format!("V{p}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        builder = builder.cpt(&format!("V{i}"), &refs, table);
    }
    builder.build().unwrap()
}

/// Random DAG whose last node is the label `Y`.
pub fn random_labelled(rng: &mut ChaCha8Rng, n: usize) -> Network {
    let net = random_dag(rng, n, 2);
    let y = net.id(&format!("V{}", n - 1)).unwrap();
    net.set_role(y, Role::Target)
}

/// Binary features, a binary label, a deterministic binary model of a
/// random subset of the features and a zero-one loss.
pub fn random_model_net(rng: &mut ChaCha8Rng, n_features: usize) -> Network {
    let mut net = random_dag(rng, n_features + 1, 2);
    let y = net.id(&format!("V{n_features}")).unwrap();
    net = net.set_role(y, Role::Target);
    let mut inputs: Vec<VarId> = (0..n_features)
        .filter(|_| rng.gen_bool(0.6))
        .map(|i| net.id(&format!("V{i}")).unwrap())
        .collect();
    if inputs.is_empty() {
        inputs.push(net.id("V0").unwrap());
    }
    let rows: Vec<Vec<f64>> = (0..1usize << inputs.len())
        .map(|_| if rng.gen_bool(0.5) { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
        .collect();
    let net = net
        .with_node(Variable::new("Model", &["0", "1"]).with_role(Role::Model), inputs, rows)
        .unwrap();
    let model = net.id("Model").unwrap();
    let zero_one = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
    net.with_node(Variable::new("Loss", &["0", "1"]).with_role(Role::Loss), vec![y, model], zero_one)
        .unwrap()
}

/// Every full state with its probability, from the product of CPT entries.
pub fn brute_joint(net: &Network) -> Vec<(Vec<usize>, f64)> {
    let cards: Vec<usize> = net.variables().iter().map(|v| v.cardinality()).collect();
    let total: usize = cards.iter().product();
    (0..total)
        .map(|mut code| {
            let mut states = vec![0; cards.len()];
            for i in (0..cards.len()).rev() {
                states[i] = code % cards[i];
                code /= cards[i];
            }
            let p = net
                .cpts()
                .iter()
                .map(|cpt| {
                    let row = cpt
                        .parents()
                        .iter()
                        .fold(0, |acc, p| acc * cards[p.index()] + states[p.index()]);
                    cpt.rows()[row][states[cpt.child().index()]]
                })
                .product();
            (states, p)
        })
        .collect()
}

/// Normalized law of `var` among the states accepted by `keep`.
pub fn law(joint: &[(Vec<usize>, f64)], var: VarId, card: usize, keep: impl Fn(&[usize]) -> bool) -> Vec<f64> {
    let mut w = vec![0.0; card];
    for (s, p) in joint {
        if keep(s) {
            w[s[var.index()]] += p;
        }
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

pub fn entropy(probs: &[f64]) -> f64 {
    -probs.iter().filter(|p| **p > 0.0).map(|p| p * p.ln()).sum::<f64>()
}

pub fn mean_var(values: &[f64], probs: &[f64]) -> (f64, f64) {
    let m: f64 = values.iter().zip(probs).map(|(v, p)| v * p).sum();
    let v = values.iter().zip(probs).map(|(x, p)| p * (x - m).powi(2)).sum();
    (m, v)
}

/// Cumulative paired entropy of a law on sorted support points.
pub fn cpe(values: &[f64], probs: &[f64]) -> f64 {
    let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(probs.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut f = 0.0;
    let mut total = 0.0;
    for w in pairs.windows(2) {
        f += w[0].1;
        let h = |q: f64| if q <= 0.0 || q >= 1.0 { 0.0 } else { -q * q.ln() };
        total += (h(f) + h(1.0 - f)) * (w[1].0 - w[0].0);
    }
    total
}

/// Shapley values by averaging marginal contributions over every ordering.
pub fn permutation_shapley(n: usize, v: impl Fn(u64) -> f64) -> Vec<f64> {
    let mut phi = vec![0.0; n];
    let mut perm: Vec<usize> = (0..n).collect();
    let mut count = 0usize;
    permute(&mut perm, 0, &mut |order| {
        let mut mask = 0u64;
        for &i in order {
            let before = v(mask);
            mask |= 1 << i;
            phi[i] += v(mask) - before;
        }
        count += 1;
    });
    phi.iter().map(|x| x / count as f64).collect()
}

fn permute(perm: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, visit);
        perm.swap(k, i);
    }
}
