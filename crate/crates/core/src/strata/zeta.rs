use std::collections::HashMap;

use crate::scalar::Scalar;

/// T^t · Π ψ_i^{psi[i]} · Π_v κ-monomial(v) · ζ-word.
///
/// The ζ-word is a bitmask over the vertex list (ζ_v² = 1).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub t: u32,
    pub psi: Vec<u32>,
    pub kappa: Vec<Vec<u32>>,
    pub zeta: u64,
}

impl Monomial {
    pub fn one(n_psi: usize, n_vertices: usize) -> Self {
        Monomial { t: 0, psi: vec![0; n_psi], kappa: vec![Vec::new(); n_vertices], zeta: 0 }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let psi = self.psi.iter().zip(&other.psi).map(|(a, b)| a + b).collect();
        let kappa = self
            .kappa
            .iter()
            .zip(&other.kappa)
            .map(|(a, b)| {
                if b.is_empty() {
                    a.clone()
                } else if a.is_empty() {
                    b.clone()
                } else {
                    let mut k: Vec<u32> = a.iter().chain(b).copied().collect();
                    k.sort_unstable();
                    k
                }
            })
            .collect();
        Monomial { t: self.t + other.t, psi, kappa, zeta: self.zeta ^ other.zeta }
    }
}

/// Polynomial in T, ψ-symbols, per-vertex κ classes and ζ-variables,
/// truncated above T-degree `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZetaPoly<S> {
    pub order: u32,
    pub n_psi: usize,
    pub n_vertices: usize,
    terms: HashMap<Monomial, S>,
}

impl<S: Scalar> ZetaPoly<S> {
    pub fn zero(order: u32, n_psi: usize, n_vertices: usize) -> Self {
        ZetaPoly { order, n_psi, n_vertices, terms: HashMap::new() }
    }

    pub fn one(order: u32, n_psi: usize, n_vertices: usize) -> Self {
        Self::constant(order, n_psi, n_vertices, S::one())
    }

    pub fn constant(order: u32, n_psi: usize, n_vertices: usize, c: S) -> Self {
        let mut p = Self::zero(order, n_psi, n_vertices);
        p.add_term(Monomial::one(n_psi, n_vertices), c);
        p
    }

    /// Adds a term, dropping it above the truncation order or when it cancels.
    pub fn add_term(&mut self, m: Monomial, c: S) {
        debug_assert_eq!(m.psi.len(), self.n_psi);
        debug_assert_eq!(m.kappa.len(), self.n_vertices);
        if m.t > self.order || c.is_negligible() {
            return;
        }
        use std::collections::hash_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_negligible() {
                    e.remove();
                }
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &S)> {
        self.terms.iter()
    }

    /// Terms sorted by monomial (deterministic order).
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &S)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> S {
        self.terms.get(m).cloned().unwrap_or_else(S::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.order = self.order.min(other.order);
        out.terms.retain(|m, _| m.t <= out.order);
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.order, self.n_psi, self.n_vertices);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_filtered(other, |_| true)
    }

    /// Product keeping only monomials accepted by `keep`; `keep` must be
    /// monotone (rejecting m rejects every multiple of m) for the result to
    /// equal the filtered full product.
    pub fn mul_filtered(&self, other: &Self, keep: impl Fn(&Monomial) -> bool) -> Self {
        let order = self.order.min(other.order);
        let mut out = Self::zero(order, self.n_psi, self.n_vertices);
        for (ma, ca) in &self.terms {
            if ma.t > order {
                continue;
            }
            for (mb, cb) in &other.terms {
                if ma.t + mb.t > order {
                    continue;
                }
                let m = ma.mul(mb);
                if keep(&m) {
                    out.add_term(m, ca.clone() * cb.clone());
                }
            }
        }
        out
    }

    /// Terms of T-degree `t` and ζ-word `zeta`.
    pub fn extract(&self, t: u32, zeta: u64) -> Vec<(Monomial, S)> {
        let mut v: Vec<_> = self
            .terms
            .iter()
            .filter(|(m, _)| m.t == t && m.zeta == zeta)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }
}
