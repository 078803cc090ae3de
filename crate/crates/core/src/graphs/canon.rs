use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use super::StableGraph;
use crate::error::{Error, Result};

/// Isomorphism-class identifier of a graph (legs labelled, vertices and edges not).
///
/// The bytes are `[V, n, E, labels.., leg vertices.., edge endpoints..]` for the
/// lexicographically smallest relabelling, so a code decodes back to its
/// canonical representative.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode(Vec<u8>);

impl CanonicalCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        CanonicalCode(bytes)
    }

    pub fn to_hex(&self) -> String {
        to_hex(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        Ok(CanonicalCode(from_hex(s)?))
    }

    /// Length in bytes of the code of a graph with the given sizes.
    pub fn encoded_len(nv: usize, nl: usize, ne: usize) -> usize {
        3 + nv + nl + 2 * ne
    }

    /// Reads a code prefix off `bytes`, returning the graph and bytes consumed.
    pub fn decode_prefix(bytes: &[u8]) -> Result<(StableGraph, usize)> {
        if bytes.len() < 3 {
            return Err(Error::Parse("truncated graph code".into()));
        }
        let (nv, nl, ne) = (bytes[0] as usize, bytes[1] as usize, bytes[2] as usize);
        let len = Self::encoded_len(nv, nl, ne);
        if bytes.len() < len {
            return Err(Error::Parse("truncated graph code".into()));
        }
        let mut i = 3;
        let genera = bytes[i..i + nv].iter().map(|&b| b as u32).collect();
        i += nv;
        let legs = bytes[i..i + nl].iter().map(|&b| b as usize).collect();
        i += nl;
        let edges = (0..ne).map(|k| (bytes[i + 2 * k] as usize, bytes[i + 2 * k + 1] as usize)).collect();
        let g = StableGraph { genera, legs, edges };
        g.validate_shape()?;
        Ok((g, len))
    }

    pub fn decode(&self) -> Result<StableGraph> {
        let (g, len) = Self::decode_prefix(&self.0)?;
        if len != self.0.len() {
            return Err(Error::Parse("trailing bytes after graph code".into()));
        }
        Ok(g)
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalCode({})", self.to_hex())
    }
}

pub(crate) fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn from_hex(s: &str) -> Result<Vec<u8>> {
    if s.len() % 2 != 0 {
        return Err(Error::Parse(format!("odd-length hex string {s:?}")));
    }
    (0..s.len() / 2)
        .map(|i| u8::from_str_radix(&s[2 * i..2 * i + 2], 16).map_err(|_| Error::Parse(format!("bad hex {s:?}"))))
        .collect()
}

/// A graph in canonical form, with the relabelling that produced it.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub graph: StableGraph,
    pub code: CanonicalCode,
    /// Old vertex index to canonical vertex index.
    pub vertex_map: Vec<usize>,
    /// Old half-edge index to canonical half-edge index.
    pub half_edge_map: Vec<usize>,
}

/// Vertex and half-edge permutation preserving the graph (legs fixed).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automorphism {
    pub vertex: Vec<usize>,
    pub half_edge: Vec<usize>,
}

fn refine_colors(g: &StableGraph) -> Vec<usize> {
    let nv = g.num_vertices();
    let mut legs_at: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (i, &v) in g.legs.iter().enumerate() {
        legs_at[v].push(i);
    }
    let mut loops = vec![0usize; nv];
    let mut degree = vec![0usize; nv];
    for &(a, b) in &g.edges {
        if a == b {
            loops[a] += 1;
        } else {
            degree[a] += 1;
            degree[b] += 1;
        }
    }
    let keys: Vec<_> = (0..nv).map(|v| (g.genera[v], legs_at[v].clone(), loops[v], degree[v])).collect();
    let mut colors = rank(&keys);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for &(a, b) in &g.edges {
        if a != b {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut ncolors = count_distinct(&colors);
    loop {
        let keys: Vec<_> = (0..nv)
            .map(|v| {
                let mut nb: Vec<usize> = adj[v].iter().map(|&u| colors[u]).collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        let next = rank(&keys);
        let n = count_distinct(&next);
        colors = next;
        if n == ncolors {
            break;
        }
        ncolors = n;
    }
    colors
}

fn rank<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(k).unwrap()).collect()
}

fn count_distinct(c: &[usize]) -> usize {
    let mut v = c.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

fn cells(colors: &[usize]) -> Vec<Vec<usize>> {
    let ncol = colors.iter().max().map_or(0, |m| m + 1);
    let mut cells = vec![Vec::new(); ncol];
    for (v, &c) in colors.iter().enumerate() {
        cells[c].push(v);
    }
    cells.retain(|c| !c.is_empty());
    cells
}

/// Calls `f(order)` for every vertex order (position -> vertex) that lists
/// cells in sequence and permutes vertices freely within each cell.
fn for_each_order(cells: &[Vec<usize>], f: &mut dyn FnMut(&[usize])) {
    fn rec(cells: &[Vec<usize>], idx: usize, prefix: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if idx == cells.len() {
            f(prefix);
            return;
        }
        let mut cell = cells[idx].clone();
        permute(&mut cell, 0, &mut |perm| {
            let base = prefix.len();
            prefix.extend_from_slice(perm);
            rec(cells, idx + 1, prefix, f);
            prefix.truncate(base);
        });
    }
    let mut prefix = Vec::new();
    rec(cells, 0, &mut prefix, f);
}

fn permute(items: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k + 1 >= items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, f);
        items.swap(k, i);
    }
}

/// Code of `g` relabelled by `pos` (old vertex -> new position).
fn encode(g: &StableGraph, pos: &[usize], out: &mut Vec<u8>) {
    out.clear();
    let nv = g.num_vertices();
    out.extend_from_slice(&[nv as u8, g.legs.len() as u8, g.edges.len() as u8]);
    let base = out.len();
    out.resize(base + nv, 0);
    for v in 0..nv {
        out[base + pos[v]] = g.genera[v] as u8;
    }
    out.extend(g.legs.iter().map(|&v| pos[v] as u8));
    let mut pairs: Vec<(u8, u8)> = g
        .edges
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (pos[a] as u8, pos[b] as u8);
            (x.min(y), x.max(y))
        })
        .collect();
    pairs.sort_unstable();
    for (x, y) in pairs {
        out.push(x);
        out.push(y);
    }
}

fn compute_canonical(g: &StableGraph) -> Canonical {
    assert!(g.genera.iter().all(|&l| l < 256), "vertex label too large for canonical code");
    let colors = refine_colors(g);
    let cells = cells(&colors);
    let nv = g.num_vertices();
    let mut best: Option<(Vec<u8>, Vec<usize>)> = None;
    let mut buf = Vec::new();
    let mut pos = vec![0usize; nv];
    for_each_order(&cells, &mut |order| {
        for (p, &v) in order.iter().enumerate() {
            pos[v] = p;
        }
        encode(g, &pos, &mut buf);
        if best.as_ref().map_or(true, |(b, _)| buf < *b) {
            best = Some((buf.clone(), pos.clone()));
        }
    });
    let (code, pos) = best.expect("at least one vertex order");
    let mut mapped: Vec<((usize, usize), usize, bool)> = g
        .edges
        .iter()
        .enumerate()
        .map(|(e, &(a, b))| {
            let (x, y) = (pos[a], pos[b]);
            if x <= y {
                ((x, y), e, false)
            } else {
                ((y, x), e, true)
            }
        })
        .collect();
    mapped.sort();
    let mut half_edge_map = vec![0usize; 2 * g.edges.len()];
    for (k, &(_, e, flipped)) in mapped.iter().enumerate() {
        half_edge_map[2 * e] = 2 * k + flipped as usize;
        half_edge_map[2 * e + 1] = 2 * k + (!flipped) as usize;
    }
    let mut genera = vec![0u32; nv];
    for v in 0..nv {
        genera[pos[v]] = g.genera[v];
    }
    let graph = StableGraph {
        genera,
        legs: g.legs.iter().map(|&v| pos[v]).collect(),
        edges: mapped.iter().map(|&(p, _, _)| p).collect(),
    };
    Canonical { graph, code: CanonicalCode(code), vertex_map: pos, half_edge_map }
}

type Cache<V> = RwLock<HashMap<StableGraph, Arc<V>>>;

fn cached<V>(cache: &'static OnceLock<Cache<V>>, g: &StableGraph, make: impl FnOnce() -> V) -> Arc<V> {
    let cache = cache.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(v) = cache.read().unwrap().get(g) {
        return v.clone();
    }
    let v = Arc::new(make());
    cache.write().unwrap().entry(g.clone()).or_insert(v).clone()
}

/// Canonical relabelling of `g` (memoized).
pub fn canonical_form(g: &StableGraph) -> Arc<Canonical> {
    static CACHE: OnceLock<Cache<Canonical>> = OnceLock::new();
    cached(&CACHE, g, || compute_canonical(g))
}

pub fn canonical_code(g: &StableGraph) -> CanonicalCode {
    canonical_form(g).code.clone()
}

fn vertex_automorphisms(g: &StableGraph) -> Vec<Vec<usize>> {
    let colors = refine_colors(g);
    let cells = cells(&colors);
    let nv = g.num_vertices();
    let identity: Vec<usize> = (0..nv).collect();
    let mut reference = Vec::new();
    encode(g, &identity, &mut reference);
    let mut out = Vec::new();
    let mut buf = Vec::new();
    let mut pos = vec![0usize; nv];
    for_each_order(&cells, &mut |order| {
        for (p, &v) in order.iter().enumerate() {
            pos[v] = p;
        }
        // cells keep vertices inside their colour class, so pos maps each cell to itself
        encode(g, &pos, &mut buf);
        if buf == reference {
            out.push(pos.clone());
        }
    });
    out.sort();
    out
}

/// Edge classes: edges grouped by unordered endpoint pair.
fn edge_classes(g: &StableGraph) -> HashMap<(usize, usize), Vec<usize>> {
    let mut classes: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (e, &(a, b)) in g.edges.iter().enumerate() {
        classes.entry((a.min(b), a.max(b))).or_default().push(e);
    }
    classes
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

fn compute_automorphisms(g: &StableGraph) -> Vec<Automorphism> {
    let classes = edge_classes(g);
    let mut keys: Vec<_> = classes.keys().copied().collect();
    keys.sort();
    let mut out = Vec::new();
    for vmap in vertex_automorphisms(g) {
        let mut partial: Vec<Vec<usize>> = vec![vec![usize::MAX; g.num_half_edges()]];
        for &(u, v) in &keys {
            let src = &classes[&(u, v)];
            let (x, y) = (vmap[u], vmap[v]);
            let dst = &classes[&(x.min(y), x.max(y))];
            let is_loop = u == v;
            let mut perm: Vec<usize> = (0..dst.len()).collect();
            let mut options: Vec<Vec<(usize, usize)>> = Vec::new();
            permute(&mut perm, 0, &mut |p| {
                let flips = if is_loop { 1usize << src.len() } else { 1 };
                for mask in 0..flips {
                    let mut pairs = Vec::with_capacity(2 * src.len());
                    for (i, &e) in src.iter().enumerate() {
                        let f = dst[p[i]];
                        let flip = if is_loop {
                            mask >> i & 1 == 1
                        } else {
                            vmap[g.edges[e].0] != g.edges[f].0
                        };
                        let (h0, h1) = if flip { (2 * f + 1, 2 * f) } else { (2 * f, 2 * f + 1) };
                        pairs.push((2 * e, h0));
                        pairs.push((2 * e + 1, h1));
                    }
                    options.push(pairs);
                }
            });
            let mut next = Vec::with_capacity(partial.len() * options.len());
            for base in &partial {
                for opt in &options {
                    let mut m = base.clone();
                    for &(a, b) in opt {
                        m[a] = b;
                    }
                    next.push(m);
                }
            }
            partial = next;
        }
        out.extend(partial.into_iter().map(|half_edge| Automorphism { vertex: vmap.clone(), half_edge }));
    }
    out
}

/// All automorphisms of `g` as explicit vertex and half-edge permutations (memoized).
pub fn automorphisms(g: &StableGraph) -> Arc<Vec<Automorphism>> {
    static CACHE: OnceLock<Cache<Vec<Automorphism>>> = OnceLock::new();
    cached(&CACHE, g, || {
        // the search below needs vertices in canonical order; conjugate otherwise
        let c = canonical_form(g);
        if c.graph == *g {
            return compute_automorphisms(g);
        }
        let inv = |m: &[usize]| {
            let mut out = vec![0; m.len()];
            for (i, &j) in m.iter().enumerate() {
                out[j] = i;
            }
            out
        };
        let (vi, hi) = (inv(&c.vertex_map), inv(&c.half_edge_map));
        automorphisms(&c.graph)
            .iter()
            .map(|a| Automorphism {
                vertex: c.vertex_map.iter().map(|&x| vi[a.vertex[x]]).collect(),
                half_edge: c.half_edge_map.iter().map(|&x| hi[a.half_edge[x]]).collect(),
            })
            .collect()
    })
}

/// Order of the automorphism group, counting half-edge swaps on loops.
pub fn automorphism_count(g: &StableGraph) -> u64 {
    let c = canonical_form(g);
    let g = &c.graph;
    let per_vertex_map: u64 = edge_classes(g)
        .iter()
        .map(|(&(u, v), es)| factorial(es.len()) * if u == v { 1u64 << es.len() } else { 1 })
        .product();
    vertex_automorphisms(g).len() as u64 * per_vertex_map
}
