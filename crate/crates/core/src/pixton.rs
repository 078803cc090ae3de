//! Pixton's relations R(g, n, r; σ, a) and the full relation set on (g, n).

use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graphs::{automorphism_count, automorphisms, enumerate_stable_graphs, StableGraph};
use crate::strata::{
    basis, brace_c, brace_one_minus_c0, chat, decorations, edge_factor, exp_truncated, kappa_hat, partitions,
    pushforward, Basis, DecoratedStratum, Decoration, KPoly, KappaVariant, Monomial, StrataVector, ZetaPoly,
};
use crate::scalar::{format_scalar, Scalar};

/// Parameters of one Pixton relation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PixtonInput {
    pub g: u32,
    pub n: usize,
    pub r: u32,
    pub sigma: Vec<u32>,
    pub a: Vec<u32>,
}

impl PixtonInput {
    /// Validates and normalizes (σ sorted descending).
    pub fn new(g: u32, n: usize, r: u32, mut sigma: Vec<u32>, a: Vec<u32>) -> Result<Self> {
        crate::graphs::check_stable_pair(g, n)?;
        if a.len() != n {
            return Err(Error::invalid(format!("expected {n} insertion indices, got {}", a.len())));
        }
        if sigma.iter().any(|&s| s == 0) {
            return Err(Error::invalid("sigma must have positive parts"));
        }
        if let Some(x) = sigma.iter().chain(&a).find(|&&x| x % 3 == 2) {
            return Err(Error::invalid(format!("entry {x} is 2 mod 3")));
        }
        let budget = 3 * r as i64 - g as i64 - 1;
        let used = sigma.iter().chain(&a).map(|&x| x as i64).sum::<i64>();
        if used > budget {
            return Err(Error::invalid(format!("|sigma| + sum(a) = {used} exceeds 3r - g - 1 = {budget}")));
        }
        if (budget - used) % 2 != 0 {
            return Err(Error::invalid(format!("|sigma| + sum(a) = {used} has the wrong parity (3r - g - 1 = {budget})")));
        }
        sigma.sort_unstable_by(|x, y| y.cmp(x));
        Ok(PixtonInput { g, n, r, sigma, a })
    }

    /// All valid inputs on (g, n) in codimension r, in a fixed order.
    pub fn all(g: u32, n: usize, r: u32) -> Vec<PixtonInput> {
        let budget = 3 * r as i64 - g as i64 - 1;
        if budget < 0 || 2 * g as i64 - 2 + n as i64 <= 0 {
            return Vec::new();
        }
        let budget = budget as u32;
        let allowed = |x: u32| x % 3 != 2;
        let mut out = Vec::new();
        for s in 0..=budget {
            let sigmas: Vec<Vec<u32>> = if s == 0 {
                vec![vec![]]
            } else {
                partitions(s).into_iter().filter(|p| p.iter().all(|&x| allowed(x))).collect()
            };
            for sigma in sigmas {
                let rest = budget - s;
                for t in (rest % 2..=rest).step_by(2) {
                    for a in crate::strata::weak_compositions(t, n) {
                        if a.iter().all(|&x| allowed(x)) {
                            let mut sg = sigma.clone();
                            sg.reverse();
                            out.push(PixtonInput { g, n, r, sigma: sg, a });
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }
}

fn k_series<S: Scalar>(sigma: &[u32], order: u32) -> Result<KPoly<S>> {
    let mut p = exp_truncated(&brace_one_minus_c0::<S>(order));
    for &s in sigma {
        p = p.mul(&brace_c(s, order)?);
    }
    Ok(p)
}

/// Contribution of a single graph to the relation.
fn graph_term<S: Scalar>(
    input: &PixtonInput,
    graph: &StableGraph,
    kseries: &KPoly<S>,
    variant: KappaVariant,
) -> Result<Vec<(DecoratedStratum, S)>> {
    let d = input.r - graph.num_edges() as u32;
    let n = graph.num_legs();
    let nv = graph.num_vertices();
    let n_psi = n + graph.num_half_edges();
    let sym_vertex: Vec<usize> = (0..n).map(|i| graph.legs[i]).chain((0..graph.num_half_edges()).map(|h| graph.half_edge_vertex(h))).collect();
    let dims: Vec<u32> = (0..nv).map(|v| graph.vertex_dim(v).unwrap_or(0) as u32).collect();
    let keep = |m: &Monomial| {
        let mut deg = vec![0u32; nv];
        for (v, k) in m.kappa.iter().enumerate() {
            deg[v] += k.iter().sum::<u32>();
        }
        for (i, &e) in m.psi.iter().enumerate() {
            deg[sym_vertex[i]] += e;
        }
        deg.iter().zip(&dims).all(|(a, b)| a <= b)
    };
    let mut prod: ZetaPoly<S> = ZetaPoly::one(d, n_psi, nv);
    for (i, &a) in input.a.iter().enumerate() {
        prod = prod.mul_filtered(&chat(a, i, graph.legs[i], d, n_psi, nv)?, &keep);
    }
    for (e, &(u, v)) in graph.edges.iter().enumerate() {
        prod = prod.mul_filtered(&edge_factor(n + 2 * e, n + 2 * e + 1, u, v, d, n_psi, nv)?, &keep);
    }
    if prod.is_empty() {
        return Ok(Vec::new());
    }
    let kpart = kappa_hat(kseries, graph, variant, d, n_psi);
    let total = prod.mul_filtered(&kpart, &keep);
    let target: u64 = (0..nv).filter(|&v| graph.genera[v] % 2 == 0).map(|v| 1u64 << v).sum();
    let scale = S::one() / (S::from_i64(1i64 << graph.h1()) * S::from_i64(automorphism_count(graph) as i64));
    Ok(total
        .extract(d, target)
        .into_iter()
        .map(|(m, c)| {
            let deco = Decoration {
                kappa: m.kappa,
                psi_legs: m.psi[..n].to_vec(),
                psi_half_edges: m.psi[n..].to_vec(),
            };
            (DecoratedStratum { graph: graph.clone(), deco }, c * scale.clone())
        })
        .collect())
}

/// The relation R(g, n, r; σ, a) as a vector of decorated strata.
pub fn pixton_relation<S: Scalar>(input: &PixtonInput, variant: KappaVariant) -> Result<StrataVector<S>> {
    let input = PixtonInput::new(input.g, input.n, input.r, input.sigma.clone(), input.a.clone())?;
    let graphs = enumerate_stable_graphs(input.g, input.n)?;
    let mut series: HashMap<u32, KPoly<S>> = HashMap::new();
    let mut out = StrataVector::zero(input.g, input.n);
    for graph in graphs.iter().filter(|gr| gr.num_edges() as u32 <= input.r) {
        let d = input.r - graph.num_edges() as u32;
        if !series.contains_key(&d) {
            series.insert(d, k_series(&input.sigma, d)?);
        }
        for (s, c) in graph_term(&input, graph, &series[&d], variant)? {
            if let Some(k) = s.key() {
                out.add_term(k, c);
            }
        }
    }
    Ok(out)
}

/// One unit of relation generation: a Pixton relation on vertex `vertex` of `graph`.
#[derive(Clone, Debug)]
pub struct RelationTask {
    pub graph: StableGraph,
    pub vertex: usize,
    pub input: PixtonInput,
}

/// Representatives of the vertex orbits of `graph` under its automorphisms.
fn vertex_orbit_representatives(graph: &StableGraph) -> Vec<usize> {
    let auts = automorphisms(graph);
    (0..graph.num_vertices()).filter(|&v| auts.iter().all(|a| a.vertex[v] >= v)).collect()
}

/// Tasks generating every row of the relation set, in emission order.
pub fn relation_tasks(g: u32, n: usize, r: u32) -> Result<Vec<RelationTask>> {
    let b = basis(g, n, r)?;
    drop(b);
    let mut tasks = Vec::new();
    for graph in enumerate_stable_graphs(g, n)?.iter().filter(|gr| gr.num_edges() as u32 <= r) {
        let room = r - graph.num_edges() as u32;
        for v in vertex_orbit_representatives(graph) {
            let (gv, nv) = (graph.genera[v], graph.valence(v));
            let dim = graph.vertex_dim(v).unwrap_or(0) as u32;
            for d in 0..=room.min(dim) {
                for input in PixtonInput::all(gv, nv, d) {
                    tasks.push(RelationTask { graph: graph.clone(), vertex: v, input });
                }
            }
        }
    }
    Ok(tasks)
}

type RelationCache<S> = Mutex<HashMap<(PixtonInput, bool), Arc<StrataVector<S>>>>;

fn cached_relation<S: Scalar>(input: &PixtonInput, variant: KappaVariant, cache: &RelationCache<S>) -> Result<Arc<StrataVector<S>>> {
    let key = (input.clone(), variant == KappaVariant::Printed);
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let v = Arc::new(pixton_relation(input, variant)?);
    cache.lock().unwrap().insert(key, v.clone());
    Ok(v)
}

/// Rows produced by one task (before normalization and deduplication).
fn task_rows<S: Scalar>(
    task: &RelationTask,
    r: u32,
    variant: KappaVariant,
    cache: &RelationCache<S>,
) -> Result<Vec<StrataVector<S>>> {
    let rel = cached_relation(&task.input, variant, cache)?;
    if rel.is_zero() {
        return Ok(Vec::new());
    }
    let graph = &task.graph;
    let others: Vec<usize> = (0..graph.num_vertices()).filter(|&w| w != task.vertex).collect();
    let rest = r - graph.num_edges() as u32 - task.input.r;
    let mut rows = Vec::new();
    for deco in decorations(graph, &Decoration::trivial(graph), &others, rest, true) {
        let row = pushforward(&rel, graph, task.vertex, &deco)?;
        if !row.is_zero() {
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Scales `row` so that its entry in the leftmost basis column is 1.
pub fn normalize_row<S: Scalar>(row: &StrataVector<S>, basis: &Basis) -> Result<StrataVector<S>> {
    let lead = row
        .iter()
        .map(|(k, c)| basis.index_of(k).map(|i| (i, c)).ok_or_else(|| Error::inconsistent(format!("row key {k:?} not in basis"))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min_by_key(|(i, _)| *i);
    Ok(match lead {
        Some((_, c)) => row.scaled(&c.inv()),
        None => row.clone(),
    })
}

fn fingerprint<S: Scalar>(row: &StrataVector<S>) -> Vec<(Vec<u8>, String)> {
    row.iter().map(|(k, c)| (k.as_bytes().to_vec(), format_scalar(c))).collect()
}

/// Every relation row of codimension `r` on (g, n): Pixton relations on a
/// vertex of each boundary graph times all decorations of the other vertices,
/// normalized (leading coefficient 1) and deduplicated in emission order.
pub fn relation_set<S: Scalar>(g: u32, n: usize, r: u32, variant: KappaVariant) -> Result<Vec<StrataVector<S>>> {
    let mut out = Vec::new();
    for_each_row(g, n, r, variant, 0, &mut |_, row| {
        out.push(row);
        Ok(())
    })?;
    Ok(out)
}

/// Streams deduplicated rows with their index, skipping the first `start` rows.
pub fn for_each_row<S: Scalar>(
    g: u32,
    n: usize,
    r: u32,
    variant: KappaVariant,
    start: usize,
    f: &mut dyn FnMut(usize, StrataVector<S>) -> Result<()>,
) -> Result<usize> {
    let mut seen: HashSet<Vec<(Vec<u8>, String)>> = HashSet::new();
    let mut index = 0usize;
    for_each_task(g, n, r, variant, 0, &mut |_, batch| {
        for row in batch {
            if seen.insert(fingerprint(&row)) {
                if index >= start {
                    f(index, row)?;
                }
                index += 1;
            }
        }
        Ok(())
    })?;
    Ok(index)
}

/// Streams the normalized rows of each task of [`relation_tasks`], starting at
/// task `start`. Rows are not deduplicated across tasks. Returns the task count.
pub fn for_each_task<S: Scalar>(
    g: u32,
    n: usize,
    r: u32,
    variant: KappaVariant,
    start: usize,
    f: &mut dyn FnMut(usize, Vec<StrataVector<S>>) -> Result<()>,
) -> Result<usize> {
    let b = basis(g, n, r)?;
    let tasks = relation_tasks(g, n, r)?;
    if start > tasks.len() {
        return Err(Error::invalid(format!("start task {start} beyond the {} tasks", tasks.len())));
    }
    let cache: RelationCache<S> = Mutex::new(HashMap::new());
    for (c, chunk) in tasks[start..].chunks(256).enumerate() {
        let rows: Vec<Result<Vec<StrataVector<S>>>> = chunk
            .par_iter()
            .map(|t| task_rows(t, r, variant, &cache)?.iter().map(|row| normalize_row(row, &b)).collect())
            .collect();
        for (i, batch) in rows.into_iter().enumerate() {
            f(start + 256 * c + i, batch?)?;
        }
    }
    Ok(tasks.len())
}

/// Writes rows as `index [[code,"p/q"],...]` lines.
pub fn write_row_stream<S: Scalar, W: Write>(rows: &[StrataVector<S>], out: &mut W) -> Result<()> {
    for (i, row) in rows.iter().enumerate() {
        writeln!(out, "{i} {}", row.to_json())?;
    }
    Ok(())
}

/// Parses one line of a row stream.
pub fn parse_row_line(g: u32, n: usize, line: &str) -> Result<(usize, StrataVector<crate::Rational>)> {
    let (idx, json) = line
        .trim()
        .split_once(char::is_whitespace)
        .ok_or_else(|| Error::Parse("row line must be `index json`".into()))?;
    let idx: usize = idx.parse().map_err(|_| Error::Parse(format!("bad row index {idx:?}")))?;
    let v: serde_json::Value = serde_json::from_str(json)?;
    Ok((idx, StrataVector::from_json(g, n, &v)?))
}
