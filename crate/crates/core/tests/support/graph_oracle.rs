//! Brute-force stable graph counting, independent of the library's canonical forms.

use std::collections::HashSet;

type Key = (Vec<u32>, Vec<usize>, Vec<(usize, usize)>);

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn brute_key(genera: &[u32], legs: &[usize], edges: &[(usize, usize)], perms: &[Vec<usize>]) -> Key {
    perms
        .iter()
        .map(|p| {
            let mut gen = vec![0; genera.len()];
            for (v, &x) in genera.iter().enumerate() {
                gen[p[v]] = x;
            }
            let l: Vec<usize> = legs.iter().map(|&v| p[v]).collect();
            let mut e: Vec<(usize, usize)> = edges
                .iter()
                .map(|&(a, b)| (p[a].min(p[b]), p[a].max(p[b])))
                .collect();
            e.sort();
            (gen, l, e)
        })
        .min()
        .unwrap()
}

fn connected(nv: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; nv];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Restricted-growth leg assignments: vertices carrying legs come first, in
/// order of their first leg.
fn leg_assignments(n: usize, nv: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn rec(n: usize, nv: usize, cur: &mut Vec<usize>, used: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..(used + 1).min(nv) {
            cur.push(v);
            rec(n, nv, cur, used.max(v + 1), out);
            cur.pop();
        }
    }
    rec(n, nv, &mut Vec::new(), 0, &mut out);
    out
}

fn genus_vectors(nv: usize, total: u32) -> Vec<Vec<u32>> {
    if nv == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in genus_vectors(nv - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Number of isomorphism classes of stable graphs of type (g, n).
pub fn count_stable_graphs(g: u32, n: usize) -> usize {
    let max_v = (2 * g as usize + n).saturating_sub(2).max(1);
    let max_e = (3 * g as usize + n).saturating_sub(3);
    let mut classes: HashSet<Key> = HashSet::new();
    for nv in 1..=max_v {
        let perms = permutations(nv);
        let pairs: Vec<(usize, usize)> = (0..nv).flat_map(|a| (a..nv).map(move |b| (a, b))).collect();
        for h1 in 0..=g as usize {
            let ne = nv - 1 + h1;
            if ne > max_e {
                continue;
            }
            for genera in genus_vectors(nv, g - h1 as u32) {
                for legs in leg_assignments(n, nv) {
                    let mut need: Vec<i64> = (0..nv)
                        .map(|v| {
                            let have = legs.iter().filter(|&&w| w == v).count() as i64;
                            (3 - 2 * genera[v] as i64 - have).max(0)
                        })
                        .collect();
                    let mut edges = Vec::new();
                    choose_edges(&pairs, 0, ne, &mut edges, &mut need, &mut |edges| {
                        if connected(nv, edges) {
                            classes.insert(brute_key(&genera, &legs, edges, &perms));
                        }
                    });
                }
            }
        }
    }
    classes.len()
}

fn choose_edges(
    pairs: &[(usize, usize)],
    start: usize,
    remaining: usize,
    cur: &mut Vec<(usize, usize)>,
    need: &mut Vec<i64>,
    f: &mut dyn FnMut(&[(usize, usize)]),
) {
    let deficit: i64 = need.iter().map(|&x| x.max(0)).sum();
    if deficit > 2 * remaining as i64 {
        return;
    }
    if remaining == 0 {
        f(cur);
        return;
    }
    for i in start..pairs.len() {
        let (a, b) = pairs[i];
        need[a] -= 1;
        need[b] -= 1;
        cur.push((a, b));
        choose_edges(pairs, i, remaining - 1, cur, need, f);
        cur.pop();
        need[a] += 1;
        need[b] += 1;
    }
}
