//! Normal form of the genus-0, T-free parts modulo WDVV.
//!
//! Connected sets of genus-0 vertices without T on any of their points
//! ("clusters") form tree-level parts that satisfy WDVV. A term is cut into
//! its skeleton (each cluster contracted to a labelled vertex that remembers
//! its loop count and edge count) and the cluster realizations. For a fixed
//! skeleton, the realizations span a finite space; the relations are the
//! four-point splittings `D(ab|cd) = D(ac|bd)` at every vertex of every
//! cluster with one edge fewer. Reducing against the RREF of these relations
//! (columns ordered by key) gives a unique representative.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use num_rational::BigRational;
use num_traits::Zero;

use super::CorrelatorExpr;
use crate::error::Result;
use crate::graphs::{genus_zero_graphs, split_vertex, Point, StableGraph};
use crate::linalg::{rref_filtered, Echelon, SparseVec};
use crate::strata::{substitute, DecoratedStratum, Decoration, StratumKey};

const CLUSTER: u32 = 128;

/// Skeleton of a term: clusters become vertices labelled
/// `128 + 16 * loops + edges`, placed after the other vertices.
fn skeleton(t: &DecoratedStratum) -> Option<DecoratedStratum> {
    let g = &t.graph;
    let nv = g.num_vertices();
    let in_cluster: Vec<bool> = (0..nv)
        .map(|v| {
            g.genera[v] == 0
                && g.points_at(v).iter().all(|p| match *p {
                    Point::Leg(i) => t.deco.psi_legs[i] == 0,
                    Point::Half(h) => t.deco.psi_half_edges[h] == 0,
                })
        })
        .collect();
    if !in_cluster.iter().any(|&b| b) {
        return None;
    }
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let internal: Vec<bool> = g.edges.iter().map(|&(a, b)| in_cluster[a] && in_cluster[b]).collect();
    for (e, &(a, b)) in g.edges.iter().enumerate() {
        if internal[e] {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
    }
    let mut map = vec![usize::MAX; nv];
    let mut comp = vec![None; nv];
    let mut genera = Vec::new();
    for v in (0..nv).filter(|&v| !in_cluster[v]) {
        if g.genera[v] >= CLUSTER {
            return None;
        }
        map[v] = genera.len();
        genera.push(g.genera[v]);
    }
    let mut comp_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut stats: Vec<(usize, usize)> = Vec::new(); // (vertices, internal edges)
    for v in (0..nv).filter(|&v| in_cluster[v]) {
        let r = find(&mut parent, v);
        let c = *comp_of_root.entry(r).or_insert_with(|| {
            stats.push((0, 0));
            stats.len() - 1
        });
        stats[c].0 += 1;
        comp[v] = Some(c);
    }
    for (e, &(a, _)) in g.edges.iter().enumerate() {
        if let (true, Some(c)) = (internal[e], comp[a]) {
            stats[c].1 += 1;
        }
    }
    let base = genera.len();
    for &(verts, edges) in &stats {
        let h = edges + 1 - verts;
        if h >= 8 || edges >= 16 {
            return None;
        }
        genera.push(CLUSTER + 16 * h as u32 + edges as u32);
    }
    let target = |v: usize| comp[v].map_or(map[v], |c| base + c);
    let legs = g.legs.iter().map(|&v| target(v)).collect();
    let mut edges = Vec::new();
    let mut psi_half_edges = Vec::new();
    for (e, &(a, b)) in g.edges.iter().enumerate() {
        if !internal[e] {
            edges.push((target(a), target(b)));
            psi_half_edges.extend([t.deco.psi_half_edges[2 * e], t.deco.psi_half_edges[2 * e + 1]]);
        }
    }
    let graph = StableGraph { genera, legs, edges };
    let deco = Decoration { kappa: vec![Vec::new(); graph.num_vertices()], psi_legs: t.deco.psi_legs.clone(), psi_half_edges };
    Some(DecoratedStratum { graph, deco })
}

fn cluster_shape(label: u32) -> (u32, usize) {
    let x = label - CLUSTER;
    (x / 16, (x % 16) as usize)
}

/// Inserts one realization per cluster vertex; `choice[j]` realizes the j-th
/// cluster (clusters in increasing vertex order).
fn realize(s: &DecoratedStratum, clusters: &[usize], choice: &[&StableGraph]) -> StratumKey {
    let mut graph = s.graph.clone();
    let mut deco = s.deco.clone();
    for (&v, q) in clusters.iter().zip(choice).rev() {
        let (g2, d2) = substitute(&graph, &deco, v, q, &Decoration::trivial(q));
        graph = g2;
        deco = d2;
    }
    DecoratedStratum { graph, deco }.key_unchecked()
}

/// Realizations of a cluster with `loops` loops, `edges` edges and `n` points.
fn realizations(loops: u32, edges: usize, n: usize) -> Result<Vec<StableGraph>> {
    Ok(genus_zero_graphs(loops, n)?.iter().filter(|q| q.num_edges() == edges).cloned().collect())
}

/// Sums over splittings of vertex `w` of `q` that put `left` on `w` and
/// `right` on the new vertex.
fn splittings(q: &StableGraph, w: usize, left: [Point; 2], right: [Point; 2]) -> Vec<StableGraph> {
    let pts = q.points_at(w);
    let rest: Vec<usize> = (0..pts.len()).filter(|&i| !left.contains(&pts[i]) && !right.contains(&pts[i])).collect();
    let mut out = Vec::with_capacity(1 << rest.len());
    for mask in 0u32..(1 << rest.len()) {
        let mut side = vec![false; pts.len()];
        for (i, p) in pts.iter().enumerate() {
            if right.contains(p) {
                side[i] = true;
            }
        }
        for (b, &i) in rest.iter().enumerate() {
            side[i] = mask >> b & 1 == 1;
        }
        out.push(split_vertex(q, w, 0, &pts, &side));
    }
    out
}

/// Four-point relations on the clusters of size `(loops, edges)` with `n`
/// points, as pairs of sums of realizations.
fn cluster_relations(loops: u32, edges: usize, n: usize) -> Result<Vec<Vec<(StableGraph, i32)>>> {
    if edges <= loops as usize {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for p in realizations(loops, edges - 1, n)? {
        for w in 0..p.num_vertices() {
            let pts = p.points_at(w);
            let m = pts.len();
            if m < 4 {
                continue;
            }
            for a in 0..m {
                for b in a + 1..m {
                    for c in b + 1..m {
                        for d in c + 1..m {
                            let (pa, pb, pc, pd) = (pts[a], pts[b], pts[c], pts[d]);
                            let base = splittings(&p, w, [pa, pb], [pc, pd]);
                            for other in [splittings(&p, w, [pa, pc], [pb, pd]), splittings(&p, w, [pa, pd], [pb, pc])] {
                                let mut row: Vec<(StableGraph, i32)> = base.iter().map(|q| (q.clone(), 1)).collect();
                                row.extend(other.into_iter().map(|q| (q, -1)));
                                out.push(row);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Reduction data for one skeleton.
struct Space {
    index: HashMap<StratumKey, usize>,
    keys: Vec<StratumKey>,
    echelon: Echelon<BigRational>,
}

fn space(s: &DecoratedStratum, skey: &StratumKey) -> Result<Arc<Space>> {
    static CACHE: OnceLock<RwLock<HashMap<StratumKey, Arc<Space>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(sp) = cache.read().unwrap().get(skey) {
        return Ok(sp.clone());
    }
    let g = &s.graph;
    let clusters: Vec<usize> = (0..g.num_vertices()).filter(|&v| g.genera[v] >= CLUSTER).collect();
    let shapes: Vec<(u32, usize, usize)> = clusters
        .iter()
        .map(|&v| {
            let (h, e) = cluster_shape(g.genera[v]);
            (h, e, g.points_at(v).len())
        })
        .collect();
    let reals: Vec<Vec<StableGraph>> = shapes.iter().map(|&(h, e, n)| realizations(h, e, n)).collect::<Result<_>>()?;

    let mut cols: BTreeMap<StratumKey, ()> = BTreeMap::new();
    for_each_choice(&reals, &mut |choice| {
        cols.insert(realize(s, &clusters, choice), ());
    });
    let keys: Vec<StratumKey> = cols.into_keys().collect();
    let index: HashMap<StratumKey, usize> = keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();

    let mut rows: Vec<SparseVec<BigRational>> = Vec::new();
    for (j, &(h, e, n)) in shapes.iter().enumerate() {
        let rels = cluster_relations(h, e, n)?;
        if rels.is_empty() {
            continue;
        }
        let mut others = reals.clone();
        others[j] = vec![StableGraph { genera: vec![], legs: vec![], edges: vec![] }];
        for_each_choice(&others, &mut |choice| {
            for rel in &rels {
                let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
                for (q, sign) in rel {
                    let mut ch: Vec<&StableGraph> = choice.to_vec();
                    ch[j] = q;
                    let k = realize(s, &clusters, &ch);
                    *acc.entry(index[&k]).or_insert(0) += *sign as i64;
                }
                let row: SparseVec<BigRational> =
                    acc.into_iter().filter(|(_, x)| *x != 0).map(|(c, x)| (c, BigRational::from_integer(x.into()))).collect();
                if !row.is_empty() {
                    rows.push(row);
                }
            }
        });
    }
    let echelon = if rows.is_empty() {
        Echelon::new(keys.len())
    } else {
        let (rref, _) = rref_filtered(&rows, keys.len());
        rref.to_echelon()
    };
    let sp = Arc::new(Space { index, keys, echelon });
    Ok(cache.write().unwrap().entry(skey.clone()).or_insert(sp).clone())
}

fn for_each_choice<'a>(options: &'a [Vec<StableGraph>], f: &mut dyn FnMut(&[&'a StableGraph])) {
    fn go<'a>(options: &'a [Vec<StableGraph>], acc: &mut Vec<&'a StableGraph>, f: &mut dyn FnMut(&[&'a StableGraph])) {
        if acc.len() == options.len() {
            f(acc);
            return;
        }
        for q in &options[acc.len()] {
            acc.push(q);
            go(options, acc, f);
            acc.pop();
        }
    }
    go(options, &mut Vec::with_capacity(options.len()), f);
}

/// Brings every tree-level part to its WDVV normal form.
pub fn wdvv_normalize(expr: &CorrelatorExpr) -> Result<CorrelatorExpr> {
    let mut groups: BTreeMap<StratumKey, (DecoratedStratum, Vec<(StratumKey, BigRational)>)> = BTreeMap::new();
    let mut out = CorrelatorExpr::zero(expr.genus(), expr.legs());
    for (k, c) in expr.iter() {
        let t = k.decode()?;
        match skeleton(&t) {
            Some(s) => {
                let sk = s.key_unchecked();
                groups.entry(sk).or_insert_with(|| (s, Vec::new())).1.push((k.clone(), c.clone()));
            }
            None => out.add_term(k.clone(), c.clone()),
        }
    }
    for (sk, (s, terms)) in groups {
        // the decoded skeleton is in canonical order, like every other key
        let s = sk.decode().unwrap_or(s);
        let sp = space(&s, &sk)?;
        let mut row: BTreeMap<usize, BigRational> = BTreeMap::new();
        for (k, c) in terms {
            match sp.index.get(&k) {
                Some(&i) => *row.entry(i).or_insert_with(BigRational::zero) += c,
                None => out.add_term(k, c),
            }
        }
        let row: SparseVec<BigRational> = row.into_iter().filter(|(_, x)| !x.is_zero()).collect();
        for (i, c) in sp.echelon.reduce(&row) {
            out.add_term(sp.keys[i].clone(), c);
        }
    }
    Ok(out)
}
