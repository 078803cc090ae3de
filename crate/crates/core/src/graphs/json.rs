use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::StableGraph;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexJson {
    pub genus: u32,
}

/// External JSON form of a graph; legs are keyed by 1-based marking.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<VertexJson>,
    pub legs: BTreeMap<String, usize>,
    pub edges: Vec<[usize; 2]>,
}

impl From<&StableGraph> for GraphJson {
    fn from(g: &StableGraph) -> Self {
        GraphJson {
            vertices: g.genera.iter().map(|&genus| VertexJson { genus }).collect(),
            legs: g.legs.iter().enumerate().map(|(i, &v)| ((i + 1).to_string(), v)).collect(),
            edges: g.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

impl GraphJson {
    /// Converts back, checking that legs are exactly `1..=n`.
    pub fn to_graph(&self) -> Result<StableGraph> {
        let n = self.legs.len();
        let mut legs = vec![usize::MAX; n];
        for (k, &v) in &self.legs {
            let i: usize = k.parse().map_err(|_| Error::Parse(format!("bad leg label {k:?}")))?;
            if i == 0 || i > n || legs[i - 1] != usize::MAX {
                return Err(Error::Parse(format!("legs must be labelled 1..={n}")));
            }
            legs[i - 1] = v;
        }
        let g = StableGraph {
            genera: self.vertices.iter().map(|v| v.genus).collect(),
            legs,
            edges: self.edges.iter().map(|e| (e[0], e[1])).collect(),
        };
        g.validate()?;
        Ok(g)
    }
}

impl StableGraph {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(GraphJson::from(self)).expect("graph json")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: GraphJson = serde_json::from_value(v.clone())?;
        j.to_graph()
    }
}
