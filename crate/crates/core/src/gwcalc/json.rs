//! JSON form of correlator expressions.
//!
//! ```json
//! {"genus": 2, "insertions": 1, "terms": [
//!   {"coeff": "1/1152", "text": "<<W g^a g_a g^b g_b>>_0", "key": "..",
//!    "factors": [{"genus": 0, "slots": [{"insertion": "W", "t": 0}, {"index": 0, "up": true, "t": 0}]}]}
//! ]}
//! ```
//!
//! Reading uses `genus`, `insertions` and each term's `key` and `coeff`.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{format_term, CorrelatorExpr};
use crate::error::{Error, Result};
use crate::graphs::Point;
use crate::strata::{DecoratedStratum, StratumKey};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SlotJson {
    Insertion { insertion: String, t: u32 },
    Index { index: usize, up: bool, t: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorJson {
    pub genus: u32,
    pub slots: Vec<SlotJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    #[serde(default)]
    pub text: String,
    pub key: String,
    #[serde(default)]
    pub factors: Vec<FactorJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExprJson {
    pub genus: u32,
    pub insertions: usize,
    pub terms: Vec<TermJson>,
}

fn factors(t: &DecoratedStratum) -> Vec<FactorJson> {
    let g = &t.graph;
    (0..g.num_vertices())
        .map(|v| FactorJson {
            genus: g.genera[v],
            slots: g
                .points_at(v)
                .into_iter()
                .map(|p| match p {
                    Point::Leg(i) => SlotJson::Insertion {
                        insertion: if i == 0 { "W".into() } else { format!("V{i}") },
                        t: t.deco.psi_legs[i],
                    },
                    Point::Half(h) => SlotJson::Index { index: h / 2, up: h % 2 == 0, t: t.deco.psi_half_edges[h] },
                })
                .collect(),
        })
        .collect()
}

pub fn expr_to_json(e: &CorrelatorExpr) -> Result<serde_json::Value> {
    let mut terms = Vec::with_capacity(e.len());
    for (k, c) in e.iter() {
        let t = k.decode()?;
        terms.push(TermJson { coeff: c.to_string(), text: format_term(c, &t), key: k.to_hex(), factors: factors(&t) });
    }
    let doc = ExprJson { genus: e.genus(), insertions: e.legs(), terms };
    Ok(serde_json::to_value(doc)?)
}

pub fn expr_from_json(v: &serde_json::Value) -> Result<CorrelatorExpr> {
    let doc: ExprJson = serde_json::from_value(v.clone())?;
    let mut e = CorrelatorExpr::zero(doc.genus, doc.insertions);
    for t in doc.terms {
        let key = StratumKey::from_hex(&t.key)?;
        let s = key.decode()?;
        if s.graph.genus() != doc.genus || s.graph.num_legs() != doc.insertions {
            return Err(Error::invalid(format!("term {} does not match the declared genus and insertions", t.key)));
        }
        let c: BigRational = t.coeff.parse().map_err(|_| Error::Parse(format!("bad coefficient {:?}", t.coeff)))?;
        e.add_term(key, c);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::super::{parse_expr, DeltaReading};
    use super::*;

    #[test]
    fn roundtrip() {
        let e = parse_expr("7/10 <<g^a>>_1 <<{g_a o W}>>_1 - 1/252 <<W T(g^a)>>_1 <<g_a>>_1", DeltaReading::Alt).unwrap();
        let j = expr_to_json(&e).unwrap();
        assert_eq!(expr_from_json(&j).unwrap(), e);
        assert_eq!(j["terms"].as_array().unwrap().len(), 2);
    }
}
