//! Discrete causal Bayesian networks.
//!
//! A [`Network`] is an immutable DAG of discrete [`Variable`]s, one
//! conditional probability table per variable. Model and loss nodes are
//! ordinary variables whose CPT rows are 0/1, tagged with a [`Role`] so that
//! model-specific queries know which nodes read the (possibly pinned)
//! feature coordinates.

mod file;
mod inference;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distribution::{Distribution, RENORMALIZE_TOLERANCE, WEIGHT_TOLERANCE};
use crate::error::{Error, Result};

pub use inference::QueryMode;

/// Default cap on the number of joint states visited by exact enumeration.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// What a node stands for in an explanation problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    #[default]
    Feature,
    Target,
    Model,
    Loss,
}

impl Role {
    /// Model and loss nodes are functions of the data coordinates.
    pub fn is_derived(self) -> bool {
        matches!(self, Role::Model | Role::Loss)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    name: String,
    states: Vec<String>,
    values: Option<Vec<f64>>,
    role: Role,
}

impl Variable {
    pub fn new(name: impl Into<String>, states: &[&str]) -> Self {
        Variable {
            name: name.into(),
            states: states.iter().map(|s| s.to_string()).collect(),
            values: None,
            role: Role::Feature,
        }
    }

    pub fn from_states(name: impl Into<String>, states: Vec<String>) -> Self {
        Variable {
            name: name.into(),
            states,
            values: None,
            role: Role::Feature,
        }
    }

    /// Attach explicit numeric values to the states.
    pub fn with_values(mut self, values: Vec<f64>) -> Self {
        self.values = Some(values);
        self
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn explicit_values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    /// Numeric value of a state: the explicit value if one was declared,
    /// otherwise the state label parsed as a number.
    pub fn numeric_value(&self, state: usize) -> Option<f64> {
        match &self.values {
            Some(v) => v.get(state).copied(),
            None => self.states.get(state)?.trim().parse::<f64>().ok().filter(|x| x.is_finite()),
        }
    }

    pub fn numeric_values(&self) -> Option<Vec<f64>> {
        (0..self.cardinality()).map(|s| self.numeric_value(s)).collect()
    }

    pub fn is_numeric(&self) -> bool {
        self.numeric_values().is_some()
    }

    /// Value a model sees for a state: its numeric value, or the state
    /// index for categorical variables.
    pub fn encoded_value(&self, state: usize) -> f64 {
        self.numeric_value(state).unwrap_or(state as f64)
    }

    /// Inverse of [`Variable::encoded_value`].
    pub fn state_for_value(&self, value: f64) -> Option<usize> {
        (0..self.cardinality()).find(|&s| self.encoded_value(s) == value)
    }

    pub fn state_index(&self, label: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownState {
                variable: self.name.clone(),
                state: label.to_string(),
            })
    }

    /// Law of this variable given per-state weights.
    pub fn law(&self, weights: Vec<f64>) -> Result<Distribution> {
        match self.numeric_values() {
            Some(values) => Distribution::numeric(values, weights),
            None => Distribution::labels(self.states.clone(), weights),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidNetwork(format!("variable `{}`: {reason}", self.name));
        if self.name.is_empty() {
            return Err(Error::InvalidNetwork("empty variable name".into()));
        }
        if self.states.is_empty() {
            return Err(bad("support is empty".into()));
        }
        for (i, s) in self.states.iter().enumerate() {
            if s.contains(',') {
                return Err(bad(format!("state `{s}` contains a comma")));
            }
            if self.states[..i].contains(s) {
                return Err(bad(format!("duplicate state `{s}`")));
            }
        }
        if let Some(values) = &self.values {
            if values.len() != self.states.len() {
                return Err(bad(format!(
                    "{} values for {} states",
                    values.len(),
                    self.states.len()
                )));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(bad("non-finite state value".into()));
            }
        }
        Ok(())
    }
}

/// Conditional probability table. Rows are stored in mixed-radix order of
/// the parent states with the first parent most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    child: VarId,
    parents: Vec<VarId>,
    table: Vec<Vec<f64>>,
}

impl Cpt {
    pub fn child(&self) -> VarId {
        self.child
    }

    pub fn parents(&self) -> &[VarId] {
        &self.parents
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.table
    }

    pub fn row(&self, parent_states: &[usize], radix: &[usize]) -> &[f64] {
        &self.table[mixed_radix_index(parent_states, radix)]
    }
}

/// Position of a tuple in mixed-radix order (first digit most significant).
pub fn mixed_radix_index(digits: &[usize], radix: &[usize]) -> usize {
    digits
        .iter()
        .zip(radix)
        .fold(0, |acc, (&d, &r)| acc * r + d)
}

/// All tuples in mixed-radix order.
pub fn mixed_radix_tuples(radix: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = radix.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; radix.len()];
    for _ in 0..total {
        out.push(digits.clone());
        for pos in (0..radix.len()).rev() {
            digits[pos] += 1;
            if digits[pos] < radix[pos] {
                break;
            }
            digits[pos] = 0;
        }
    }
    out
}

/// Partial map from variable to state index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Assignment(BTreeMap<VarId, usize>);

impl Assignment {
    pub fn new() -> Self {
        Assignment(BTreeMap::new())
    }

    pub fn with(mut self, var: VarId, state: usize) -> Self {
        self.0.insert(var, state);
        self
    }

    pub fn bind(&mut self, var: VarId, state: usize) {
        self.0.insert(var, state);
    }

    pub fn get(&self, var: VarId) -> Option<usize> {
        self.0.get(&var).copied()
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.0.contains_key(&var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.0.iter().map(|(v, s)| (*v, *s))
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.keys().copied()
    }

    /// Keep only the bindings for `vars`.
    pub fn restrict(&self, vars: &[VarId]) -> Assignment {
        Assignment(
            self.0
                .iter()
                .filter(|(v, _)| vars.contains(v))
                .map(|(v, s)| (*v, *s))
                .collect(),
        )
    }
}

impl FromIterator<(VarId, usize)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (VarId, usize)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone)]
pub struct Network {
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
    order: Vec<VarId>,
    children: Vec<Vec<VarId>>,
    index: HashMap<String, VarId>,
    cap: u128,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables && self.cpts == other.cpts
    }
}

impl Network {
    /// Build a network from variables and `(child, parents, rows)` tables
    /// given in variable-id space. Rows are validated and renormalized when
    /// they drift by less than 1e-6.
    pub fn new(variables: Vec<Variable>, tables: Vec<(VarId, Vec<VarId>, Vec<Vec<f64>>)>) -> Result<Self> {
        let n = variables.len();
        let mut index = HashMap::with_capacity(n);
        for (i, v) in variables.iter().enumerate() {
            v.validate()?;
            if index.insert(v.name.clone(), VarId(i)).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate variable `{}`", v.name)));
            }
        }
        let mut slots: Vec<Option<Cpt>> = vec![None; n];
        for (child, parents, table) in tables {
            let c = child.index();
            if c >= n {
                return Err(Error::InvalidNetwork(format!("CPT for unknown variable {child}")));
            }
            if slots[c].is_some() {
                return Err(Error::InvalidNetwork(format!(
                    "more than one CPT for `{}`",
                    variables[c].name
                )));
            }
            let cpt = validate_cpt(&variables, child, parents, table)?;
            slots[c] = Some(cpt);
        }
        let cpts = slots
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                c.ok_or_else(|| Error::InvalidNetwork(format!("missing CPT for `{}`", variables[i].name)))
            })
            .collect::<Result<Vec<_>>>()?;
        let parents: Vec<Vec<VarId>> = cpts.iter().map(|c| c.parents.clone()).collect();
        let order = topological_sort(&parents).map_err(|cycle| {
            let names: Vec<&str> = cycle.iter().map(|v| variables[v.index()].name.as_str()).collect();
            Error::CycleDetected(names.join(", "))
        })?;
        let mut children = vec![Vec::new(); n];
        for cpt in &cpts {
            for p in &cpt.parents {
                children[p.index()].push(cpt.child);
            }
        }
        Ok(Network {
            variables,
            cpts,
            order,
            children,
            index,
            cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    pub fn builder() -> NetworkBuilder {
        NetworkBuilder::default()
    }

    /// Replace the enumeration cap used by exact queries.
    pub fn with_enumeration_cap(mut self, cap: u128) -> Self {
        self.cap = cap.max(1);
        self
    }

    pub fn enumeration_cap(&self) -> u128 {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.index()]
    }

    pub fn cpt(&self, id: VarId) -> &Cpt {
        &self.cpts[id.index()]
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.variables.len()).map(VarId)
    }

    pub fn id(&self, name: &str) -> Result<VarId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.variables[id.index()].name
    }

    pub fn parents(&self, id: VarId) -> &[VarId] {
        &self.cpts[id.index()].parents
    }

    pub fn children(&self, id: VarId) -> &[VarId] {
        &self.children[id.index()]
    }

    /// Parent-to-child pairs in CPT order.
    pub fn edges(&self) -> Vec<(VarId, VarId)> {
        self.cpts
            .iter()
            .flat_map(|c| c.parents.iter().map(move |p| (*p, c.child)))
            .collect()
    }

    /// Topological order; ties are broken by declaration order.
    pub fn topological_order(&self) -> &[VarId] {
        &self.order
    }

    /// Retag a variable, e.g. to mark the label of a user-supplied network.
    pub fn set_role(mut self, id: VarId, role: Role) -> Self {
        self.variables[id.index()].role = role;
        self
    }

    pub fn with_role(&self, role: Role) -> Vec<VarId> {
        self.ids().filter(|v| self.variable(*v).role == role).collect()
    }

    fn unique_role(&self, role: Role, missing: Error) -> Result<VarId> {
        match self.with_role(role).as_slice() {
            [v] => Ok(*v),
            [] => Err(missing),
            many => Err(Error::InvalidNetwork(format!(
                "{} variables carry role {role:?}",
                many.len()
            ))),
        }
    }

    pub fn model_node(&self) -> Result<VarId> {
        self.unique_role(Role::Model, Error::ModelNodeMissing)
    }

    pub fn loss_node(&self) -> Result<VarId> {
        self.unique_role(Role::Loss, Error::LossNodeMissing)
    }

    pub fn target_node(&self) -> Result<VarId> {
        self.unique_role(Role::Target, Error::TargetNodeMissing)
    }

    /// Feature variables in declaration order.
    pub fn features(&self) -> Vec<VarId> {
        self.with_role(Role::Feature)
    }

    /// Build an assignment from `(variable, state label)` pairs.
    pub fn assignment(&self, pairs: &[(&str, &str)]) -> Result<Assignment> {
        pairs
            .iter()
            .map(|(name, state)| {
                let id = self.id(name)?;
                Ok((id, self.variable(id).state_index(state)?))
            })
            .collect()
    }

    pub fn check_assignment(&self, a: &Assignment) -> Result<()> {
        for (v, s) in a.iter() {
            let var = self
                .variables
                .get(v.index())
                .ok_or_else(|| Error::UnknownVariable(v.to_string()))?;
            if s >= var.cardinality() {
                return Err(Error::StateOutOfRange {
                    variable: var.name.clone(),
                    index: s,
                });
            }
        }
        Ok(())
    }

    /// Return a new network with one extra variable appended.
    pub fn with_node(&self, variable: Variable, parents: Vec<VarId>, table: Vec<Vec<f64>>) -> Result<Network> {
        let id = VarId(self.variables.len());
        let mut variables = self.variables.clone();
        variables.push(variable);
        let mut tables: Vec<_> = self
            .cpts
            .iter()
            .map(|c| (c.child, c.parents.clone(), c.table.clone()))
            .collect();
        tables.push((id, parents, table));
        Ok(Network::new(variables, tables)?.with_enumeration_cap(self.cap))
    }

    /// Radix (cardinalities) of a list of variables.
    pub fn radix(&self, vars: &[VarId]) -> Vec<usize> {
        vars.iter().map(|v| self.variable(*v).cardinality()).collect()
    }

    /// All ancestors of `targets`, including the targets themselves.
    pub fn ancestral_set(&self, targets: impl IntoIterator<Item = VarId>) -> Vec<bool> {
        let mut mark = vec![false; self.len()];
        let mut stack: Vec<VarId> = targets.into_iter().collect();
        while let Some(v) = stack.pop() {
            if !mark[v.index()] {
                mark[v.index()] = true;
                stack.extend(self.parents(v).iter().copied());
            }
        }
        mark
    }

    /// Is there a directed path from `from` to `to` (length ≥ 0)?
    pub fn has_directed_path(&self, from: VarId, to: VarId) -> bool {
        self.ancestral_set([to])[from.index()]
    }
}

fn validate_cpt(variables: &[Variable], child: VarId, parents: Vec<VarId>, mut table: Vec<Vec<f64>>) -> Result<Cpt> {
    let var = &variables[child.index()];
    let bad = |reason: String| Error::InvalidCpt {
        child: var.name.clone(),
        reason,
    };
    for (i, p) in parents.iter().enumerate() {
        if p.index() >= variables.len() {
            return Err(bad(format!("unknown parent {p}")));
        }
        if parents[..i].contains(p) {
            return Err(bad(format!("duplicate parent `{}`", variables[p.index()].name)));
        }
    }
    let rows: usize = parents.iter().map(|p| variables[p.index()].cardinality()).product();
    if table.len() != rows {
        return Err(bad(format!("{} rows, expected {rows}", table.len())));
    }
    for (r, row) in table.iter_mut().enumerate() {
        if row.len() != var.cardinality() {
            return Err(bad(format!(
                "row {r} has {} entries, expected {}",
                row.len(),
                var.cardinality()
            )));
        }
        if row.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
            return Err(bad(format!("row {r} has an entry outside [0, 1]")));
        }
        let total: f64 = row.iter().sum();
        let gap = (total - 1.0).abs();
        if gap > RENORMALIZE_TOLERANCE {
            return Err(bad(format!("row {r} sums to {total}")));
        }
        if gap > WEIGHT_TOLERANCE {
            row.iter_mut().for_each(|p| *p /= total);
        }
    }
    Ok(Cpt { child, parents, table })
}

/// Kahn's algorithm, always releasing the lowest-numbered ready node.
/// On failure returns the nodes left on a cycle.
pub fn topological_sort(parents: &[Vec<VarId>]) -> std::result::Result<Vec<VarId>, Vec<VarId>> {
    let n = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(|p| p.len()).collect();
    let mut children = vec![Vec::new(); n];
    for (c, ps) in parents.iter().enumerate() {
        for p in ps {
            children[p.index()].push(c);
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(VarId(v));
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).filter(|&i| indegree[i] > 0).map(VarId).collect())
    }
}

/// Name-based builder, convenient for hand-written and generated networks.
#[derive(Debug, Default)]
pub struct NetworkBuilder {
    variables: Vec<Variable>,
    tables: Vec<(String, Vec<String>, Vec<Vec<f64>>)>,
}

impl NetworkBuilder {
    pub fn variable(mut self, variable: Variable) -> Self {
        self.variables.push(variable);
        self
    }

    pub fn cpt(mut self, child: &str, parents: &[&str], rows: Vec<Vec<f64>>) -> Self {
        self.tables.push((
            child.to_string(),
            parents.iter().map(|p| p.to_string()).collect(),
            rows,
        ));
        self
    }

    pub fn build(self) -> Result<Network> {
        let lookup = |name: &str| {
            self.variables
                .iter()
                .position(|v| v.name == name)
                .map(VarId)
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))
        };
        let tables = self
            .tables
            .iter()
            .map(|(child, parents, rows)| {
                Ok((
                    lookup(child)?,
                    parents.iter().map(|p| lookup(p)).collect::<Result<Vec<_>>>()?,
                    rows.clone(),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Network::new(self.variables, tables)
    }
}
