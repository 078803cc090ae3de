use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DecoratedStratum, Decoration};
use crate::error::{Error, Result};
use crate::graphs::{GraphJson, StableGraph};

/// Decoration part of the external stratum JSON; only nonzero ψ entries are listed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecorationJson {
    pub kappa: Vec<Vec<u32>>,
    pub psi_half_edges: BTreeMap<String, u32>,
    pub psi_legs: BTreeMap<String, u32>,
}

/// External JSON form of a decorated stratum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumJson {
    #[serde(flatten)]
    pub graph: GraphJson,
    #[serde(flatten)]
    pub deco: DecorationJson,
}

impl From<&DecoratedStratum> for StratumJson {
    fn from(s: &DecoratedStratum) -> Self {
        let nz = |v: &[u32], shift: usize| -> BTreeMap<String, u32> {
            v.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| ((i + shift).to_string(), e)).collect()
        };
        StratumJson {
            graph: GraphJson::from(&s.graph),
            deco: DecorationJson {
                kappa: s.deco.kappa.clone(),
                psi_half_edges: nz(&s.deco.psi_half_edges, 0),
                psi_legs: nz(&s.deco.psi_legs, 1),
            },
        }
    }
}

impl StratumJson {
    pub fn to_stratum(&self) -> Result<DecoratedStratum> {
        let graph: StableGraph = self.graph.to_graph()?;
        let mut deco = Decoration::trivial(&graph);
        if self.deco.kappa.len() != graph.num_vertices() {
            return Err(Error::Parse("kappa list must have one entry per vertex".into()));
        }
        deco.kappa = self.deco.kappa.iter().map(|k| {
            let mut k = k.clone();
            k.sort_unstable();
            k
        }).collect();
        let parse = |k: &str, shift: usize, len: usize| -> Result<usize> {
            let i: usize = k.parse().map_err(|_| Error::Parse(format!("bad index {k:?}")))?;
            if i < shift || i - shift >= len {
                return Err(Error::Parse(format!("index {k} out of range")));
            }
            Ok(i - shift)
        };
        for (k, &e) in &self.deco.psi_legs {
            deco.psi_legs[parse(k, 1, graph.num_legs())?] = e;
        }
        for (k, &e) in &self.deco.psi_half_edges {
            deco.psi_half_edges[parse(k, 0, graph.num_half_edges())?] = e;
        }
        DecoratedStratum::new(graph, deco)
    }
}

impl DecoratedStratum {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(StratumJson::from(self)).expect("stratum json")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: StratumJson = serde_json::from_value(v.clone())?;
        j.to_stratum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stratum_json_roundtrip() {
        let g = StableGraph::new(vec![1, 0], vec![1], vec![(0, 1), (1, 1)]).unwrap();
        let mut d = Decoration::trivial(&g);
        d.kappa[0] = vec![1];
        d.psi_half_edges[2] = 1;
        let s = DecoratedStratum::new(g, d).unwrap();
        let v = s.to_json();
        assert_eq!(v["psi_half_edges"]["2"], 1);
        assert_eq!(DecoratedStratum::from_json(&v).unwrap(), s);
    }
}
