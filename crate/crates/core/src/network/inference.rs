//! Exact inference by enumeration, graph mutilation and ancestral sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{mixed_radix_index, Assignment, Network, VarId};
use crate::distribution::Distribution;
use crate::error::{Error, Result};

/// How a set of coordinates is fixed before reading off a law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    /// Probabilistic conditioning, `P(q | X_S = x_S)`.
    Condition,
    /// Marginal pinning: `X_S = x_S` seen by model/loss nodes only, the
    /// remaining data coordinates keep their unconditioned joint law.
    Pin,
    /// Pearl intervention, `P(q | do(X_S = x_S))`.
    Do,
}

impl Network {
    /// Product of CPT entries of a full assignment.
    pub fn joint_probability(&self, full: &Assignment) -> Result<f64> {
        self.check_assignment(full)?;
        let states = self.full_states(full)?;
        Ok(self.order.iter().map(|&v| self.local_probability(v, &states)).product())
    }

    fn full_states(&self, full: &Assignment) -> Result<Vec<usize>> {
        self.ids()
            .map(|v| full.get(v).ok_or_else(|| Error::UnboundVariable(self.name(v).to_string())))
            .collect()
    }

    fn local_probability(&self, v: VarId, states: &[usize]) -> f64 {
        let cpt = self.cpt(v);
        let row = self.row_index(v, |p| states[p.index()]);
        cpt.table[row][states[v.index()]]
    }

    fn row_index(&self, v: VarId, state_of: impl Fn(VarId) -> usize) -> usize {
        let parents = &self.cpt(v).parents;
        let digits: Vec<usize> = parents.iter().map(|p| state_of(*p)).collect();
        let radix = self.radix(parents);
        mixed_radix_index(&digits, &radix)
    }

    fn relevant_order(&self, mark: &[bool]) -> Vec<VarId> {
        self.order.iter().copied().filter(|v| mark[v.index()]).collect()
    }

    fn check_cap(&self, vars: impl Iterator<Item = VarId>) -> Result<()> {
        let states = vars.fold(1u128, |acc, v| {
            acc.saturating_mul(self.variable(v).cardinality() as u128)
        });
        if states > self.cap {
            return Err(Error::TooLarge { states, cap: self.cap });
        }
        Ok(())
    }

    /// Visit every joint state of the `order` variables consistent with
    /// `fixed`, with its probability. Fixed variables contribute their CPT
    /// entry, so the visited mass is `P(fixed)`.
    fn enumerate(&self, order: &[VarId], fixed: &Assignment, visit: &mut dyn FnMut(&[usize], f64)) -> Result<()> {
        self.check_cap(order.iter().copied().filter(|v| !fixed.contains(*v)))?;
        let mut states = vec![0usize; self.len()];
        self.enumerate_from(order, 0, fixed, &mut states, 1.0, visit);
        Ok(())
    }

    fn enumerate_from(
        &self,
        order: &[VarId],
        depth: usize,
        fixed: &Assignment,
        states: &mut Vec<usize>,
        mass: f64,
        visit: &mut dyn FnMut(&[usize], f64),
    ) {
        let Some(&v) = order.get(depth) else {
            visit(states, mass);
            return;
        };
        let row = &self.cpt(v).table[self.row_index(v, |p| states[p.index()])];
        match fixed.get(v) {
            Some(s) => {
                let p = row[s];
                if p > 0.0 {
                    states[v.index()] = s;
                    self.enumerate_from(order, depth + 1, fixed, states, mass * p, visit);
                }
            }
            None => {
                for (s, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        states[v.index()] = s;
                        self.enumerate_from(order, depth + 1, fixed, states, mass * p, visit);
                    }
                }
            }
        }
    }

    /// Posterior law of `query` given `evidence`.
    pub fn condition(&self, evidence: &Assignment, query: VarId) -> Result<Distribution> {
        self.check_assignment(evidence)?;
        self.check_var(query)?;
        let mark = self.ancestral_set(evidence.vars().chain([query]));
        let order = self.relevant_order(&mark);
        let mut weights = vec![0.0; self.variable(query).cardinality()];
        self.enumerate(&order, evidence, &mut |states, p| weights[states[query.index()]] += p)?;
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroProbabilityEvidence);
        }
        weights.iter_mut().for_each(|w| *w /= total);
        self.variable(query).law(weights)
    }

    /// Posterior joint table of `vars` given `evidence`: pairs of state
    /// tuples (ordered like `vars`) and probabilities, zero entries dropped,
    /// in mixed-radix order.
    pub fn joint_table(&self, evidence: &Assignment, vars: &[VarId]) -> Result<Vec<(Vec<usize>, f64)>> {
        self.check_assignment(evidence)?;
        for v in vars {
            self.check_var(*v)?;
        }
        let mark = self.ancestral_set(evidence.vars().chain(vars.iter().copied()));
        let order = self.relevant_order(&mark);
        let radix = self.radix(vars);
        let cells: usize = radix.iter().product();
        let mut table = vec![0.0; cells];
        self.enumerate(&order, evidence, &mut |states, p| {
            let digits: Vec<usize> = vars.iter().map(|v| states[v.index()]).collect();
            table[mixed_radix_index(&digits, &radix)] += p;
        })?;
        let total: f64 = table.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroProbabilityEvidence);
        }
        Ok(super::mixed_radix_tuples(&radix)
            .into_iter()
            .zip(table)
            .filter(|(_, p)| *p > 0.0)
            .map(|(t, p)| (t, p / total))
            .collect())
    }

    /// Mutilated network: every intervened variable loses its parents and
    /// becomes a point mass at the forced state.
    pub fn intervene(&self, forced: &Assignment) -> Result<Network> {
        self.check_assignment(forced)?;
        let mut net = self.clone();
        for (v, s) in forced.iter() {
            let k = self.variable(v).cardinality();
            let mut row = vec![0.0; k];
            row[s] = 1.0;
            let cpt = &mut net.cpts[v.index()];
            cpt.parents.clear();
            cpt.table = vec![row];
        }
        net.children = vec![Vec::new(); net.len()];
        for cpt in &net.cpts {
            for p in &cpt.parents {
                net.children[p.index()].push(cpt.child);
            }
        }
        // dropping edges keeps the declaration-order tie break valid
        let parents: Vec<Vec<VarId>> = net.cpts.iter().map(|c| c.parents.clone()).collect();
        net.order = super::topological_sort(&parents).expect("subgraph of a DAG is acyclic");
        Ok(net)
    }

    /// Law of `query` when the data coordinates in `pinned` are held fixed
    /// for the model and loss nodes while every data coordinate (feature or
    /// target) keeps its unconditioned joint law. Equivalent to intervening
    /// on duplicated copies of the data nodes that feed the derived nodes.
    pub fn pin_marginal(&self, pinned: &Assignment, query: VarId) -> Result<Distribution> {
        self.check_assignment(pinned)?;
        self.check_var(query)?;
        let mark = self.ancestral_set([query]);
        let order = self.relevant_order(&mark);
        self.check_cap(order.iter().copied())?;
        let mut weights = vec![0.0; self.variable(query).cardinality()];
        let mut actual = vec![0usize; self.len()];
        let mut effective = vec![0usize; self.len()];
        self.pin_from(&order, 0, pinned, &mut actual, &mut effective, 1.0, &mut |eff, p| {
            weights[eff[query.index()]] += p;
        });
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        self.variable(query).law(weights)
    }

    #[allow(clippy::too_many_arguments)]
    fn pin_from(
        &self,
        order: &[VarId],
        depth: usize,
        pinned: &Assignment,
        actual: &mut Vec<usize>,
        effective: &mut Vec<usize>,
        mass: f64,
        visit: &mut dyn FnMut(&[usize], f64),
    ) {
        let Some(&v) = order.get(depth) else {
            visit(effective, mass);
            return;
        };
        let derived = self.variable(v).role().is_derived();
        // data nodes evolve on their own values, derived nodes read the pinned view
        let row_idx = if derived {
            self.row_index(v, |p| effective[p.index()])
        } else {
            self.row_index(v, |p| actual[p.index()])
        };
        let row = &self.cpt(v).table[row_idx];
        for (s, &p) in row.iter().enumerate() {
            if p > 0.0 {
                actual[v.index()] = s;
                effective[v.index()] = match pinned.get(v) {
                    Some(forced) if !derived => forced,
                    _ => s,
                };
                self.pin_from(order, depth + 1, pinned, actual, effective, mass * p, visit);
            }
        }
    }

    /// Law of `query` under the given mode of fixing `given`.
    pub fn query(&self, mode: QueryMode, given: &Assignment, query: VarId) -> Result<Distribution> {
        match mode {
            QueryMode::Condition => self.condition(given, query),
            QueryMode::Pin => self.pin_marginal(given, query),
            QueryMode::Do => self.intervene(given)?.condition(&Assignment::new(), query),
        }
    }

    /// Ancestral sampling in topological order; deterministic given `seed`.
    pub fn forward_sample(&self, n: usize, seed: u64) -> Vec<Assignment> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut states = vec![0usize; self.len()];
        (0..n)
            .map(|_| {
                for &v in &self.order {
                    let row = &self.cpt(v).table[self.row_index(v, |p| states[p.index()])];
                    states[v.index()] = sample_index(row, rng.gen::<f64>());
                }
                self.ids().map(|v| (v, states[v.index()])).collect()
            })
            .collect()
    }

    fn check_var(&self, v: VarId) -> Result<()> {
        if v.index() < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownVariable(v.to_string()))
        }
    }
}

fn sample_index(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Role, Variable};

    fn chain() -> Network {
        Network::builder()
            .variable(Variable::new("A", &["0", "1"]))
            .variable(Variable::new("B", &["0", "1"]))
            .variable(Variable::new("C", &["0", "1", "2"]))
            .cpt("A", &[], vec![vec![0.6, 0.4]])
            .cpt("B", &["A"], vec![vec![0.9, 0.1], vec![0.2, 0.8]])
            .cpt("C", &["B"], vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.1, 0.8]])
            .build()
            .unwrap()
    }

    #[test]
    fn joint_needs_every_variable() {
        let net = chain();
        let partial = Assignment::new().with(VarId(0), 1);
        assert!(matches!(net.joint_probability(&partial), Err(Error::UnboundVariable(_))));
        let full = Assignment::new().with(VarId(0), 1).with(VarId(1), 1).with(VarId(2), 2);
        assert!((net.joint_probability(&full).unwrap() - 0.4 * 0.8 * 0.8).abs() < 1e-15);
    }

    #[test]
    fn chain_posterior_matches_bayes_table() {
        let net = chain();
        // P(A | C = 2) by hand from the full joint
        let mut num = [0.0; 2];
        for a in 0..2 {
            for b in 0..2 {
                let full = Assignment::new().with(VarId(0), a).with(VarId(1), b).with(VarId(2), 2);
                num[a] += net.joint_probability(&full).unwrap();
            }
        }
        let z = num[0] + num[1];
        let post = net.condition(&Assignment::new().with(VarId(2), 2), VarId(0)).unwrap();
        assert!((post.weights()[0] - num[0] / z).abs() < 1e-12);
        assert!((post.weights()[1] - num[1] / z).abs() < 1e-12);
    }

    #[test]
    fn conditioning_on_parents_reads_the_cpt_row() {
        let net = chain();
        let d = net.condition(&Assignment::new().with(VarId(1), 1), VarId(2)).unwrap();
        assert_eq!(d.weights(), &[0.1, 0.1, 0.8]);
    }

    #[test]
    fn impossible_evidence_is_an_error() {
        let net = Network::builder()
            .variable(Variable::new("A", &["0", "1"]))
            .variable(Variable::new("B", &["0", "1"]))
            .cpt("A", &[], vec![vec![1.0, 0.0]])
            .cpt("B", &["A"], vec![vec![0.5, 0.5], vec![0.5, 0.5]])
            .build()
            .unwrap();
        let err = net.condition(&Assignment::new().with(VarId(0), 1), VarId(1)).unwrap_err();
        assert!(matches!(err, Error::ZeroProbabilityEvidence));
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let net = chain().with_enumeration_cap(4);
        let err = net.condition(&Assignment::new(), VarId(2)).unwrap_err();
        assert!(matches!(err, Error::TooLarge { states: 12, cap: 4 }));
        // evidence shrinks the unbound space
        assert!(net.condition(&Assignment::new().with(VarId(2), 0), VarId(0)).is_ok());
    }

    #[test]
    fn empty_intervention_is_identity() {
        let net = chain();
        assert_eq!(net.intervene(&Assignment::new()).unwrap(), net);
    }

    #[test]
    fn intervention_cuts_incoming_edges() {
        let net = chain();
        let cut = net.intervene(&Assignment::new().with(VarId(1), 0)).unwrap();
        assert!(cut.parents(VarId(1)).is_empty());
        assert!(cut.children(VarId(0)).is_empty());
        let a = cut.condition(&Assignment::new(), VarId(0)).unwrap();
        assert_eq!(a.weights(), &[0.6, 0.4]);
        let c = cut.condition(&Assignment::new(), VarId(2)).unwrap();
        assert_eq!(c.weights(), &[0.5, 0.3, 0.2]);
    }

    #[test]
    fn pinning_a_plain_network_gives_marginals() {
        let net = chain();
        // no derived nodes: pinning B leaves the law of C untouched
        let pinned = net.pin_marginal(&Assignment::new().with(VarId(1), 1), VarId(2)).unwrap();
        let marginal = net.condition(&Assignment::new(), VarId(2)).unwrap();
        for (a, b) in pinned.weights().iter().zip(marginal.weights()) {
            assert!((a - b).abs() < 1e-12);
        }
        // a pinned data query is a point mass at its pinned state
        let q = net.pin_marginal(&Assignment::new().with(VarId(0), 1), VarId(0)).unwrap();
        assert_eq!(q.weights(), &[0.0, 1.0]);
    }

    #[test]
    fn pinning_all_model_inputs_gives_point_mass() {
        let net = Network::builder()
            .variable(Variable::new("A", &["0", "1"]))
            .variable(Variable::new("B", &["0", "1"]))
            .variable(Variable::new("g", &["0", "1"]).with_role(Role::Model))
            .cpt("A", &[], vec![vec![0.6, 0.4]])
            .cpt("B", &["A"], vec![vec![0.9, 0.1], vec![0.2, 0.8]])
            .cpt("g", &["A", "B"], vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]])
            .build()
            .unwrap();
        let pinned = Assignment::new().with(VarId(0), 1).with(VarId(1), 0);
        let d = net.pin_marginal(&pinned, VarId(2)).unwrap();
        assert_eq!(d.weights(), &[0.0, 1.0]);
    }

    #[test]
    fn sampling_is_deterministic() {
        let net = chain();
        assert_eq!(net.forward_sample(50, 9), net.forward_sample(50, 9));
        assert_ne!(net.forward_sample(50, 9), net.forward_sample(50, 10));
    }

    #[test]
    fn sampling_a_deterministic_net() {
        let net = Network::builder()
            .variable(Variable::new("A", &["0", "1"]))
            .variable(Variable::new("B", &["0", "1"]))
            .cpt("A", &[], vec![vec![0.0, 1.0]])
            .cpt("B", &["A"], vec![vec![1.0, 0.0], vec![1.0, 0.0]])
            .build()
            .unwrap();
        let s = net.forward_sample(1, 0);
        assert_eq!(s, vec![Assignment::new().with(VarId(0), 1).with(VarId(1), 0)]);
    }
}
