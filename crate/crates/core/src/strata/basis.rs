use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use super::{DecoratedStratum, Decoration, StratumKey};
use crate::error::{Error, Result};
use crate::graphs::{check_stable_pair, enumerate_stable_graphs, Point, StableGraph};

/// Partitions of `n` into positive parts, each list sorted ascending.
pub fn partitions(n: u32) -> Vec<Vec<u32>> {
    fn rec(n: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            let mut p = cur.clone();
            p.reverse();
            out.push(p);
            return;
        }
        for part in (1..=max.min(n)).rev() {
            cur.push(part);
            rec(n - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Ordered ways of writing `total` as a sum of `parts` nonnegative integers.
pub fn weak_compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in weak_compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Local decorations of a vertex: (κ multiset, ψ exponents on its points).
fn vertex_options(points: usize, budget: u32, allow_kappa: bool) -> Vec<(Vec<u32>, Vec<u32>)> {
    let mut out = Vec::new();
    let max_k = if allow_kappa { budget } else { 0 };
    for k in 0..=max_k {
        let parts = if k == 0 { vec![vec![]] } else { partitions(k) };
        for kappa in parts {
            for psi in weak_compositions(budget - k, points) {
                out.push((kappa.clone(), psi));
            }
        }
    }
    out
}

/// All decorations extending `base` by classes of total degree `total` placed
/// on `vertices` (κ on those vertices, ψ on their points), respecting each
/// vertex's dimension bound.
pub fn decorations(
    graph: &StableGraph,
    base: &Decoration,
    vertices: &[usize],
    total: u32,
    allow_kappa: bool,
) -> Vec<Decoration> {
    let mut out = Vec::new();
    let info: Vec<(usize, Vec<Point>, u32)> = vertices
        .iter()
        .map(|&v| {
            let dim = graph.vertex_dim(v).unwrap_or(0) as u32;
            let used = base.vertex_degree(graph, v);
            (v, graph.points_at(v), dim.saturating_sub(used))
        })
        .collect();
    fn rec(
        info: &[(usize, Vec<Point>, u32)],
        idx: usize,
        left: u32,
        allow_kappa: bool,
        cur: &mut Decoration,
        out: &mut Vec<Decoration>,
    ) {
        if idx == info.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let capacity: u32 = info[idx..].iter().map(|x| x.2).sum();
        if capacity < left {
            return;
        }
        let (v, ref points, room) = info[idx];
        for b in 0..=room.min(left) {
            for (kappa, psi) in vertex_options(points.len(), b, allow_kappa) {
                let saved = cur.clone();
                let mut k = cur.kappa[v].clone();
                k.extend(kappa);
                k.sort_unstable();
                cur.kappa[v] = k;
                for (p, e) in points.iter().zip(psi) {
                    match *p {
                        Point::Leg(i) => cur.psi_legs[i] += e,
                        Point::Half(h) => cur.psi_half_edges[h] += e,
                    }
                }
                rec(info, idx + 1, left - b, allow_kappa, cur, out);
                *cur = saved;
            }
        }
    }
    let mut cur = base.clone();
    rec(&info, 0, total, allow_kappa, &mut cur, &mut out);
    out
}

/// Ordered basis of degree-`r` decorated strata on (g, n): κ-decorated strata
/// first, then κ-free ones, each block sorted by key.
#[derive(Clone, Debug)]
pub struct Basis {
    pub g: u32,
    pub n: usize,
    pub r: u32,
    pub keys: Vec<StratumKey>,
    /// Number of κ-decorated elements (they occupy indices `0..kappa_count`).
    pub kappa_count: usize,
    index: HashMap<StratumKey, usize>,
}

impl Basis {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn index_of(&self, key: &StratumKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn strata(&self) -> Vec<DecoratedStratum> {
        self.keys.iter().map(|k| k.decode().expect("basis keys decode")).collect()
    }

    fn from_keys(g: u32, n: usize, r: u32, all: BTreeSet<StratumKey>) -> Self {
        let (kappa, free): (Vec<_>, Vec<_>) = all.into_iter().partition(|k| k.has_kappa());
        let kappa_count = kappa.len();
        let keys: Vec<StratumKey> = kappa.into_iter().chain(free).collect();
        let index = keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        Basis { g, n, r, keys, kappa_count, index }
    }
}

fn compute_basis(g: u32, n: usize, r: u32) -> Result<Basis> {
    use rayon::prelude::*;
    let graphs = enumerate_stable_graphs(g, n)?;
    let sets: Vec<BTreeSet<StratumKey>> = graphs
        .par_iter()
        .filter(|gr| gr.num_edges() as u32 <= r)
        .map(|gr| {
            let all: Vec<usize> = (0..gr.num_vertices()).collect();
            decorations(gr, &Decoration::trivial(gr), &all, r - gr.num_edges() as u32, true)
                .into_iter()
                .filter_map(|d| DecoratedStratum { graph: gr.clone(), deco: d }.key())
                .collect()
        })
        .collect();
    Ok(Basis::from_keys(g, n, r, sets.into_iter().flatten().collect()))
}

/// The decorated-strata basis of degree `r` on (g, n) (memoized).
pub fn basis(g: u32, n: usize, r: u32) -> Result<Arc<Basis>> {
    check_stable_pair(g, n)?;
    let dim = 3 * g as i64 - 3 + n as i64;
    if r as i64 > dim {
        return Err(Error::invalid(format!("degree {r} exceeds dimension {dim} of M({g},{n})")));
    }
    static CACHE: OnceLock<RwLock<HashMap<(u32, usize, u32), Arc<Basis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(b) = cache.read().unwrap().get(&(g, n, r)) {
        return Ok(b.clone());
    }
    let b = Arc::new(compute_basis(g, n, r)?);
    Ok(cache.write().unwrap().entry((g, n, r)).or_insert(b).clone())
}
