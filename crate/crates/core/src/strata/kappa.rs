use std::collections::{BTreeMap, HashMap};
use std::sync::{OnceLock, RwLock};

use num_rational::BigRational;

use super::series::{a_coeff, b_coeff};
use super::zeta::{Monomial, ZetaPoly};
use crate::error::{Error, Result};
use crate::graphs::StableGraph;
use crate::scalar::Scalar;

/// K_{e,a}: T-power `e` and ζ-parity `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KappaSymbol {
    pub e: u32,
    pub a: u8,
}

/// How κ̂ distributes κ classes over the vertices of a graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum KappaVariant {
    /// Each cycle factor sums κ over all vertices.
    #[default]
    Printed,
    /// Every vertex receives its own copy of the whole κ-series.
    PerVertex,
}

impl std::str::FromStr for KappaVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(KappaVariant::Printed),
            "per-vertex" => Ok(KappaVariant::PerVertex),
            _ => Err(Error::invalid(format!("unknown kappa variant {s:?}"))),
        }
    }
}

impl std::fmt::Display for KappaVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KappaVariant::Printed => "printed",
            KappaVariant::PerVertex => "per-vertex",
        })
    }
}

/// Polynomial in the symbols K_{e,a}; the T-degree of a monomial is Σ e.
#[derive(Clone, Debug, PartialEq)]
pub struct KPoly<S> {
    pub order: u32,
    terms: BTreeMap<Vec<KappaSymbol>, S>,
}

impl<S: Scalar> KPoly<S> {
    pub fn zero(order: u32) -> Self {
        KPoly { order, terms: BTreeMap::new() }
    }

    pub fn one(order: u32) -> Self {
        let mut p = Self::zero(order);
        p.add_term(Vec::new(), S::one());
        p
    }

    pub fn add_term(&mut self, mut m: Vec<KappaSymbol>, c: S) {
        if m.iter().map(|k| k.e).sum::<u32>() > self.order || c.is_negligible() {
            return;
        }
        m.sort_unstable();
        use std::collections::btree_map::Entry;
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

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<KappaSymbol>, &S)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.order.min(other.order));
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let mut m = a.clone();
                m.extend_from_slice(b);
                out.add_term(m, ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.order);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, v) in &other.terms {
            out.add_term(m.clone(), v.clone());
        }
        out
    }
}

/// exp(x) truncated at x's order; `x` must have no T-degree-0 part.
pub fn exp_truncated<S: Scalar>(x: &KPoly<S>) -> KPoly<S> {
    let order = x.order;
    let mut total = KPoly::one(order);
    let mut power = KPoly::one(order);
    for k in 1..=order {
        power = power.mul(x).scale(&S::from_i64(k as i64).inv());
        if power.is_empty() {
            break;
        }
        total = total.add(&power);
    }
    total
}

/// {1 - Ĉ_0} = -Σ_{n≥1} A_n K_{n, n mod 2}.
pub fn brace_one_minus_c0<S: Scalar>(order: u32) -> KPoly<S> {
    let mut p = KPoly::zero(order);
    for n in 1..=order {
        p.add_term(vec![KappaSymbol { e: n, a: (n % 2) as u8 }], -S::from_rational(&a_coeff(n)));
    }
    p
}

/// {Ĉ_a} for a part `a` of σ.
pub fn brace_c<S: Scalar>(a: u32, order: u32) -> Result<KPoly<S>> {
    let i = a / 3;
    let mut p = KPoly::zero(order);
    for n in 0..=order.saturating_sub(i) {
        match a % 3 {
            0 => p.add_term(vec![KappaSymbol { e: n + i, a: (n % 2) as u8 }], S::from_rational(&a_coeff(n))),
            1 => p.add_term(vec![KappaSymbol { e: n + i, a: ((n + 1) % 2) as u8 }], S::from_rational(&b_coeff(n))),
            _ => return Err(Error::invalid(format!("part {a} of sigma is 2 mod 3"))),
        }
    }
    Ok(p)
}

type VertexData = Vec<(u32, usize)>;

/// Σ_v κ^{(v)}_e ζ_v^a, with κ_0 replaced by 2g(v) - 2 + n(v).
fn cycle_factor(e: u32, a: u32, vertices: &VertexData) -> ZetaPoly<BigRational> {
    let nv = vertices.len();
    let mut lin = ZetaPoly::zero(e, 0, nv);
    for (v, &(g, n)) in vertices.iter().enumerate() {
        let mut m = Monomial::one(0, nv);
        m.zeta = if a % 2 == 1 { 1 << v } else { 0 };
        if e == 0 {
            lin.add_term(m, BigRational::from_i64(2 * g as i64 - 2 + n as i64));
        } else {
            m.t = e;
            m.kappa[v] = vec![e];
            lin.add_term(m, BigRational::from_i64(1));
        }
    }
    lin
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// Printed κ̂ on a multiset of symbols (sorted `(symbol, multiplicity)` list).
///
/// Sums over permutations by cycle type: the cycle through one copy of the
/// first symbol picks a sub-multiset of the rest, contributing |S|! orderings.
fn kappa_hat_printed(symbols: &[(KappaSymbol, u32)], vertices: &VertexData) -> ZetaPoly<BigRational> {
    type Memo = HashMap<(Vec<(KappaSymbol, u32)>, VertexData), ZetaPoly<BigRational>>;
    static CACHE: OnceLock<RwLock<Memo>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    let key = (symbols.to_vec(), vertices.clone());
    if let Some(p) = cache.read().unwrap().get(&key) {
        return p.clone();
    }
    let nv = vertices.len();
    let order: u32 = symbols.iter().map(|(s, m)| s.e * m).sum();
    let result = if symbols.is_empty() {
        ZetaPoly::one(0, 0, nv)
    } else {
        let first = symbols[0].0;
        let mut rest: Vec<(KappaSymbol, u32)> = symbols.to_vec();
        rest[0].1 -= 1;
        let mut total = ZetaPoly::zero(order, 0, nv);
        let mut counts = vec![0u32; rest.len()];
        loop {
            let mut ways = BigRational::from_i64(1);
            let mut size = 0u32;
            let (mut e, mut a) = (first.e, first.a as u32);
            let mut remaining = Vec::new();
            for (j, &(sym, m)) in rest.iter().enumerate() {
                let c = counts[j];
                ways *= BigRational::from_i64(binomial(m, c));
                size += c;
                e += sym.e * c;
                a += sym.a as u32 * c;
                if m > c {
                    remaining.push((sym, m - c));
                }
            }
            for k in 1..=size {
                ways *= BigRational::from_i64(k as i64);
            }
            let mut cycle = cycle_factor(e, a, vertices);
            cycle.order = order;
            let mut tail = kappa_hat_printed(&remaining, vertices);
            tail.order = order;
            total = total.add(&cycle.mul(&tail).scale(&ways));
            // next sub-multiset
            let mut j = 0;
            while j < rest.len() {
                if counts[j] < rest[j].1 {
                    counts[j] += 1;
                    break;
                }
                counts[j] = 0;
                j += 1;
            }
            if j == rest.len() {
                break;
            }
        }
        total
    };
    cache.write().unwrap().insert(key, result.clone());
    result
}

fn grouped(symbols: &[KappaSymbol]) -> Vec<(KappaSymbol, u32)> {
    let mut out: Vec<(KappaSymbol, u32)> = Vec::new();
    let mut sorted = symbols.to_vec();
    sorted.sort_unstable();
    for s in sorted {
        match out.last_mut() {
            Some((t, m)) if *t == s => *m += 1,
            _ => out.push((s, 1)),
        }
    }
    out
}

fn widen<S: Scalar>(p: &ZetaPoly<BigRational>, order: u32, n_psi: usize, n_vertices: usize, offset: usize) -> ZetaPoly<S> {
    let mut out = ZetaPoly::zero(order, n_psi, n_vertices);
    for (m, c) in p.iter() {
        let mut w = Monomial::one(n_psi, n_vertices);
        w.t = m.t;
        for (v, k) in m.kappa.iter().enumerate() {
            w.kappa[v + offset] = k.clone();
        }
        w.zeta = m.zeta << offset;
        out.add_term(w, S::from_rational(c));
    }
    out
}

fn vertex_data(graph: &StableGraph) -> VertexData {
    (0..graph.num_vertices()).map(|v| (graph.genera[v], graph.valence(v))).collect()
}

/// κ̂_Γ applied to a K-polynomial, producing per-vertex κ monomials and
/// ζ-words (truncated above T-degree `order`, with `n_psi` unused ψ slots).
pub fn kappa_hat<S: Scalar>(
    poly: &KPoly<S>,
    graph: &StableGraph,
    variant: KappaVariant,
    order: u32,
    n_psi: usize,
) -> ZetaPoly<S> {
    let data = vertex_data(graph);
    let nv = data.len();
    match variant {
        KappaVariant::Printed => {
            let mut out = ZetaPoly::zero(order, n_psi, nv);
            for (m, c) in poly.iter() {
                let image: ZetaPoly<S> = widen(&kappa_hat_printed(&grouped(m), &data), order, n_psi, nv, 0);
                out = out.add(&image.scale(c));
            }
            out
        }
        KappaVariant::PerVertex => {
            let mut out = ZetaPoly::one(order, n_psi, nv);
            for (v, &d) in data.iter().enumerate() {
                let mut local = ZetaPoly::zero(order, n_psi, nv);
                for (m, c) in poly.iter() {
                    let image: ZetaPoly<S> = widen(&kappa_hat_printed(&grouped(m), &vec![d]), order, n_psi, nv, v);
                    local = local.add(&image.scale(c));
                }
                out = out.mul(&local);
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = BigRational;

    fn single(symbols: Vec<KappaSymbol>) -> KPoly<Q> {
        let order = symbols.iter().map(|s| s.e).sum();
        let mut p = KPoly::zero(order);
        p.add_term(symbols, Q::from_i64(1));
        p
    }

    #[test]
    fn empty_symbol_list_is_one() {
        let g = StableGraph::smooth(1, 1);
        let r = kappa_hat(&single(vec![]), &g, KappaVariant::Printed, 3, 1);
        assert_eq!(r, ZetaPoly::one(3, 1, 1));
    }

    #[test]
    fn single_symbol_on_smooth_graph() {
        let g = StableGraph::smooth(1, 1);
        let r = kappa_hat(&single(vec![KappaSymbol { e: 1, a: 0 }]), &g, KappaVariant::Printed, 3, 1);
        let mut m = Monomial::one(1, 1);
        m.t = 1;
        m.kappa = vec![vec![1]];
        assert_eq!(r.len(), 1);
        assert_eq!(r.coeff(&m), Q::from_i64(1));
    }

    #[test]
    fn two_symbols_match_cycle_expansion() {
        // S_2 oracle: identity gives κ1·κ1, the transposition gives κ2
        let g = StableGraph::smooth(2, 1);
        let k = KappaSymbol { e: 1, a: 0 };
        let r = kappa_hat(&single(vec![k, k]), &g, KappaVariant::Printed, 4, 1);
        let mut sq = Monomial::one(1, 1);
        sq.t = 2;
        sq.kappa = vec![vec![1, 1]];
        let mut k2 = Monomial::one(1, 1);
        k2.t = 2;
        k2.kappa = vec![vec![2]];
        assert_eq!(r.len(), 2);
        assert_eq!(r.coeff(&sq), Q::from_i64(1));
        assert_eq!(r.coeff(&k2), Q::from_i64(1));
    }

    #[test]
    fn kappa_zero_is_euler_characteristic() {
        let g = StableGraph::smooth(2, 1);
        let r = kappa_hat(&single(vec![KappaSymbol { e: 0, a: 1 }]), &g, KappaVariant::Printed, 2, 1);
        let mut m = Monomial::one(1, 1);
        m.zeta = 1;
        assert_eq!(r.coeff(&m), Q::from_i64(3));
    }

    #[test]
    fn variants_agree_on_exponential_part() {
        let g = StableGraph::new(vec![1, 0], vec![1], vec![(0, 1), (1, 1)]).unwrap();
        let e = exp_truncated(&brace_one_minus_c0::<Q>(3));
        let a = kappa_hat(&e, &g, KappaVariant::Printed, 3, 0);
        let b = kappa_hat(&e, &g, KappaVariant::PerVertex, 3, 0);
        assert_eq!(a, b);
    }
}
