use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use super::{canonical_form, check_stable_pair, CanonicalCode, Point, StableGraph};
use crate::error::Result;

/// Splits vertex `v` into `v` (genus `g1`, points where `side` is false) and a
/// new vertex (the rest), joined by a new edge.
pub(crate) fn split_vertex(graph: &StableGraph, v: usize, g1: u32, points: &[Point], side: &[bool]) -> StableGraph {
    let mut out = graph.clone();
    let w = out.genera.len();
    out.genera[v] = g1;
    out.genera.push(graph.genera[v] - g1);
    for (p, &to_new) in points.iter().zip(side) {
        if !to_new {
            continue;
        }
        match *p {
            Point::Leg(i) => out.legs[i] = w,
            Point::Half(h) => {
                let e = &mut out.edges[h / 2];
                if h % 2 == 0 {
                    e.0 = w;
                } else {
                    e.1 = w;
                }
            }
        }
    }
    out.edges.push((v, w));
    out
}

fn degenerations(graph: &StableGraph, genus_zero_only: bool) -> Vec<StableGraph> {
    let mut found: BTreeMap<CanonicalCode, StableGraph> = BTreeMap::new();
    let mut add = |g: StableGraph| {
        if g.is_stable() {
            let c = canonical_form(&g);
            found.entry(c.code.clone()).or_insert_with(|| c.graph.clone());
        }
    };
    for v in 0..graph.num_vertices() {
        let gv = graph.genera[v];
        if genus_zero_only && gv > 0 {
            continue;
        }
        if gv >= 1 {
            let mut g = graph.clone();
            g.genera[v] -= 1;
            g.edges.push((v, v));
            add(g);
        }
        let points = graph.points_at(v);
        let k = points.len();
        // the first point stays on v; the complementary assignment is the same split
        for mask in 0u64..(1u64 << k.saturating_sub(1)) {
            let side: Vec<bool> = (0..k).map(|i| i > 0 && (mask >> (i - 1)) & 1 == 1).collect();
            for g1 in 0..=gv {
                add(split_vertex(graph, v, g1, &points, &side));
            }
        }
    }
    found.into_values().collect()
}

/// All stable graphs obtained from `graph` by one vertex split or one loop
/// insertion, deduplicated and sorted by canonical code.
pub fn one_step_degenerations(graph: &StableGraph) -> Vec<StableGraph> {
    degenerations(graph, false)
}

/// One-step splits of genus-0 vertices into two genus-0 vertices.
pub fn genus_zero_degenerations(graph: &StableGraph) -> Vec<StableGraph> {
    degenerations(graph, true)
}

fn closure(seed: StableGraph, step: impl Fn(&StableGraph) -> Vec<StableGraph> + Sync) -> Vec<StableGraph> {
    let start = canonical_form(&seed);
    let mut seen: BTreeMap<CanonicalCode, StableGraph> = BTreeMap::new();
    seen.insert(start.code.clone(), start.graph.clone());
    let mut frontier = vec![start.graph.clone()];
    while !frontier.is_empty() {
        use rayon::prelude::*;
        let next: Vec<Vec<StableGraph>> = frontier.par_iter().map(&step).collect();
        frontier = Vec::new();
        for g in next.into_iter().flatten() {
            let code = canonical_form(&g).code.clone();
            if let std::collections::btree_map::Entry::Vacant(e) = seen.entry(code) {
                e.insert(g.clone());
                frontier.push(g);
            }
        }
    }
    seen.into_values().collect()
}

/// All stable graphs of type (g, n), one per isomorphism class, sorted by code.
pub fn enumerate_stable_graphs(g: u32, n: usize) -> Result<Arc<Vec<StableGraph>>> {
    check_stable_pair(g, n)?;
    static CACHE: OnceLock<RwLock<HashMap<(u32, usize), Arc<Vec<StableGraph>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(v) = cache.read().unwrap().get(&(g, n)) {
        return Ok(v.clone());
    }
    let graphs = Arc::new(closure(StableGraph::smooth(g, n), one_step_degenerations));
    Ok(cache.write().unwrap().entry((g, n)).or_insert(graphs).clone())
}

/// All-genus-0 stable graphs with `h1` loops' worth of cycles and `n` legs.
pub fn genus_zero_graphs(h1: u32, n: usize) -> Result<Arc<Vec<StableGraph>>> {
    check_stable_pair(h1, n)?;
    static CACHE: OnceLock<RwLock<HashMap<(u32, usize), Arc<Vec<StableGraph>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(v) = cache.read().unwrap().get(&(h1, n)) {
        return Ok(v.clone());
    }
    let seed = StableGraph { genera: vec![0], legs: vec![0; n], edges: vec![(0, 0); h1 as usize] };
    let graphs = Arc::new(closure(seed, genus_zero_degenerations));
    Ok(cache.write().unwrap().entry((h1, n)).or_insert(graphs).clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_stable_graphs(0, 3).unwrap().len(), 1);
        assert_eq!(enumerate_stable_graphs(1, 1).unwrap().len(), 2);
        assert_eq!(enumerate_stable_graphs(2, 0).unwrap().len(), 7);
        assert_eq!(enumerate_stable_graphs(0, 4).unwrap().len(), 4);
        assert!(enumerate_stable_graphs(1, 0).is_err());
    }

    #[test]
    fn smooth_11_degenerates_to_loop_only() {
        let d = one_step_degenerations(&StableGraph::smooth(1, 1));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].edges, vec![(0, 0)]);
        assert!(one_step_degenerations(&StableGraph::smooth(0, 3)).is_empty());
    }

    #[test]
    fn enumeration_is_sorted_and_closed() {
        let all = enumerate_stable_graphs(2, 1).unwrap();
        let codes: Vec<_> = all.iter().map(|g| canonical_form(g).code.clone()).collect();
        assert!(codes.windows(2).all(|w| w[0] < w[1]));
        for g in all.iter() {
            for d in one_step_degenerations(g) {
                assert!(codes.binary_search(&canonical_form(&d).code).is_ok());
            }
        }
    }

    #[test]
    fn genus_zero_graphs_match_filtered_enumeration() {
        for (h, n) in [(0u32, 5usize), (1, 2), (2, 1), (1, 3)] {
            let all = enumerate_stable_graphs(h, n).unwrap();
            let expect = all.iter().filter(|g| g.genera.iter().all(|&x| x == 0)).count();
            assert_eq!(genus_zero_graphs(h, n).unwrap().len(), expect, "({h},{n})");
        }
    }
}
