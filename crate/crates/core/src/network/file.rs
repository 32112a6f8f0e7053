//! JSON network documents.
//!
//! ```json
//! {
//!   "variables": [{"name": "Smoker", "states": ["0", "1"]}, ...],
//!   "edges": [["Smoker", "Cancer"], ...],
//!   "cpts": [{"child": "Cancer", "parents": ["Smoker"],
//!             "rows": {"0": [0.997, 0.003], "1": [0.968, 0.032]}}, ...]
//! }
//! ```
//!
//! Row keys are the parent states joined by `,` (the empty string for a
//! root). Variables may also carry `values` (numeric value per state) and a
//! `role` (`feature`, `target`, `model`, `loss`).

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{mixed_radix_tuples, Network, Role, VarId, Variable};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    variables: Vec<VariableDoc>,
    #[serde(default)]
    edges: Vec<(String, String)>,
    cpts: Vec<CptDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariableDoc {
    name: String,
    states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "is_feature")]
    role: Role,
}

fn is_feature(role: &Role) -> bool {
    *role == Role::Feature
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CptDoc {
    child: String,
    #[serde(default)]
    parents: Vec<String>,
    rows: Map<String, Value>,
}

impl Network {
    pub fn from_json_str(text: &str) -> Result<Network> {
        let doc: NetworkDoc = serde_json::from_str(text)?;
        from_doc(doc)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Network> {
        let text = std::fs::read_to_string(path)?;
        Network::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("network documents always serialize")
    }

    fn to_doc(&self) -> NetworkDoc {
        let variables = self
            .variables
            .iter()
            .map(|v| VariableDoc {
                name: v.name.clone(),
                states: v.states.clone(),
                values: v.values.clone(),
                role: v.role,
            })
            .collect();
        let edges = self
            .edges()
            .into_iter()
            .map(|(p, c)| (self.name(p).to_string(), self.name(c).to_string()))
            .collect();
        let cpts = self
            .cpts
            .iter()
            .map(|cpt| {
                let radix = self.radix(&cpt.parents);
                let mut rows = Map::new();
                for (tuple, row) in mixed_radix_tuples(&radix).iter().zip(&cpt.table) {
                    let key: Vec<&str> = tuple
                        .iter()
                        .zip(&cpt.parents)
                        .map(|(s, p)| self.variable(*p).states[*s].as_str())
                        .collect();
                    rows.insert(key.join(","), serde_json::json!(row));
                }
                CptDoc {
                    child: self.name(cpt.child).to_string(),
                    parents: cpt.parents.iter().map(|p| self.name(*p).to_string()).collect(),
                    rows,
                }
            })
            .collect();
        NetworkDoc {
            variables,
            edges,
            cpts,
        }
    }
}

fn from_doc(doc: NetworkDoc) -> Result<Network> {
    let variables: Vec<Variable> = doc
        .variables
        .into_iter()
        .map(|v| Variable {
            name: v.name,
            states: v.states,
            values: v.values,
            role: v.role,
        })
        .collect();
    let index: HashMap<&str, VarId> = variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), VarId(i)))
        .collect();
    let lookup = |name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    };

    let mut declared_edges = BTreeSet::new();
    for (p, c) in &doc.edges {
        declared_edges.insert((lookup(p)?, lookup(c)?));
    }

    let mut tables = Vec::with_capacity(doc.cpts.len());
    let mut cpt_edges = BTreeSet::new();
    for cpt in &doc.cpts {
        let child = lookup(&cpt.child)?;
        let parents = cpt.parents.iter().map(|p| lookup(p)).collect::<Result<Vec<_>>>()?;
        for p in &parents {
            cpt_edges.insert((*p, child));
        }
        let radix: Vec<usize> = parents.iter().map(|p| variables[p.index()].cardinality()).collect();
        let bad = |reason: String| Error::InvalidCpt {
            child: cpt.child.clone(),
            reason,
        };
        let expected = radix.iter().product::<usize>();
        if cpt.rows.len() != expected {
            return Err(bad(format!("{} rows, expected {expected}", cpt.rows.len())));
        }
        let mut table = Vec::with_capacity(expected);
        for tuple in mixed_radix_tuples(&radix) {
            let key: Vec<&str> = tuple
                .iter()
                .zip(&parents)
                .map(|(s, p)| variables[p.index()].states[*s].as_str())
                .collect();
            let key = key.join(",");
            let row = cpt
                .rows
                .get(&key)
                .ok_or_else(|| bad(format!("missing row for parent states `{key}`")))?;
            let row: Vec<f64> = serde_json::from_value(row.clone())
                .map_err(|e| bad(format!("row `{key}`: {e}")))?;
            table.push(row);
        }
        tables.push((child, parents, table));
    }
    if (!doc.edges.is_empty() || !cpt_edges.is_empty()) && declared_edges != cpt_edges {
        let names = |set: &BTreeSet<(VarId, VarId)>| -> Vec<String> {
            set.iter()
                .map(|(p, c)| format!("{}->{}", variables[p.index()].name, variables[c.index()].name))
                .collect()
        };
        let missing: Vec<_> = names(&cpt_edges.difference(&declared_edges).copied().collect());
        let extra: Vec<_> = names(&declared_edges.difference(&cpt_edges).copied().collect());
        return Err(Error::InvalidNetwork(format!(
            "edges do not match CPT parents (undeclared: [{}], without CPT: [{}])",
            missing.join(", "),
            extra.join(", ")
        )));
    }
    Network::new(variables, tables)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = r#"{
        "variables": [{"name": "A", "states": ["0", "1"]}, {"name": "B", "states": ["lo", "hi"], "values": [-1, 1]}],
        "edges": [["A", "B"]],
        "cpts": [
            {"child": "A", "parents": [], "rows": {"": [0.25, 0.75]}},
            {"child": "B", "parents": ["A"], "rows": {"1": [0.5, 0.5], "0": [0.1, 0.9]}}
        ]
    }"#;

    #[test]
    fn parses_rows_by_key() {
        let net = Network::from_json_str(TWO).unwrap();
        let b = net.id("B").unwrap();
        assert_eq!(net.cpt(b).rows(), &[vec![0.1, 0.9], vec![0.5, 0.5]]);
        assert_eq!(net.variable(b).numeric_values(), Some(vec![-1.0, 1.0]));
    }

    #[test]
    fn roundtrips_through_json() {
        let net = Network::from_json_str(TWO).unwrap();
        let again = Network::from_json_str(&net.to_json_string()).unwrap();
        assert_eq!(net, again);
    }

    #[test]
    fn edges_must_match_parents() {
        let text = TWO.replace(r#""edges": [["A", "B"]]"#, r#""edges": [["B", "A"]]"#);
        assert!(matches!(Network::from_json_str(&text), Err(Error::InvalidNetwork(_))));
    }

    #[test]
    fn missing_row_is_reported() {
        let text = TWO.replace(r#""1": [0.5, 0.5], "#, "");
        assert!(matches!(Network::from_json_str(&text), Err(Error::InvalidCpt { .. })));
    }

    #[test]
    fn cycle_in_file() {
        let text = r#"{
            "variables": [{"name": "A", "states": ["0", "1"]}, {"name": "B", "states": ["0", "1"]}],
            "edges": [["A", "B"], ["B", "A"]],
            "cpts": [
                {"child": "A", "parents": ["B"], "rows": {"0": [0.5, 0.5], "1": [0.5, 0.5]}},
                {"child": "B", "parents": ["A"], "rows": {"0": [0.5, 0.5], "1": [0.5, 0.5]}}
            ]
        }"#;
        assert!(matches!(Network::from_json_str(text), Err(Error::CycleDetected(_))));
    }
}
