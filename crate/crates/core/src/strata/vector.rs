use std::collections::BTreeMap;

use num_rational::BigRational;

use super::StratumKey;
use crate::error::{Error, Result};
use crate::scalar::{format_scalar, parse_rational, Scalar};

/// Sparse linear combination of decorated strata on a fixed (g, n).
#[derive(Clone, Debug, PartialEq)]
pub struct StrataVector<S> {
    pub g: u32,
    pub n: usize,
    terms: BTreeMap<StratumKey, S>,
}

impl<S: Scalar> StrataVector<S> {
    pub fn zero(g: u32, n: usize) -> Self {
        StrataVector { g, n, terms: BTreeMap::new() }
    }

    pub fn single(g: u32, n: usize, key: StratumKey, coeff: S) -> Self {
        let mut v = Self::zero(g, n);
        v.add_term(key, coeff);
        v
    }

    /// Adds `coeff * key`, dropping the entry if it cancels.
    pub fn add_term(&mut self, key: StratumKey, coeff: S) {
        if coeff.is_negligible() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_negligible() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &StrataVector<S>, c: &S) {
        for (k, v) in &other.terms {
            self.add_term(k.clone(), v.clone() * c.clone());
        }
    }

    pub fn scaled(&self, c: &S) -> Self {
        let mut out = Self::zero(self.g, self.n);
        out.add_scaled(self, c);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, key: &StratumKey) -> Option<&S> {
        self.terms.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StratumKey, &S)> {
        self.terms.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &StratumKey> {
        self.terms.keys()
    }

    /// Degree of the (homogeneous) vector, or `None` when zero.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next().map(|k| k.degree())
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> StrataVector<T> {
        let mut out = StrataVector::zero(self.g, self.n);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), f(v));
        }
        out
    }

    /// `[[code, "p/q"], ...]`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|(k, v)| serde_json::json!([k.to_hex(), format_scalar(v)]))
                .collect(),
        )
    }
}

impl StrataVector<BigRational> {
    pub fn from_json(g: u32, n: usize, v: &serde_json::Value) -> Result<Self> {
        let arr = v.as_array().ok_or_else(|| Error::Parse("strata vector must be an array".into()))?;
        let mut out = Self::zero(g, n);
        for item in arr {
            let pair = item.as_array().filter(|p| p.len() == 2);
            let (code, coeff) = match pair.map(|p| (p[0].as_str(), p[1].as_str())) {
                Some((Some(c), Some(q))) => (c, q),
                _ => return Err(Error::Parse("entries must be [code, \"p/q\"]".into())),
            };
            out.add_term(StratumKey::from_hex(code)?, parse_rational(coeff)?);
        }
        Ok(out)
    }
}

impl<S: Scalar> std::ops::Add for StrataVector<S> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.add_scaled(&rhs, &S::one());
        self
    }
}

impl<S: Scalar> std::ops::Sub for StrataVector<S> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.add_scaled(&rhs, &-S::one());
        self
    }
}

impl<S: Scalar> FromIterator<(StratumKey, S)> for StrataVector<S> {
    /// Collects terms; (g, n) is read from the first key (or (0, 3) when empty).
    fn from_iter<I: IntoIterator<Item = (StratumKey, S)>>(iter: I) -> Self {
        let mut out: Option<Self> = None;
        for (k, c) in iter {
            let v = out.get_or_insert_with(|| {
                let s = k.decode().expect("valid key");
                StrataVector::zero(s.graph.genus(), s.graph.num_legs())
            });
            v.add_term(k, c);
        }
        out.unwrap_or_else(|| StrataVector::zero(0, 3))
    }
}
