use super::{DecoratedStratum, Decoration, StrataVector};
use crate::error::{Error, Result};
use crate::graphs::{Point, StableGraph};
use crate::scalar::Scalar;

/// Glues `inner` into vertex `slot` of `outer`.
///
/// Inner leg `i` is matched with the `i`-th point of `outer.points_at(slot)`
/// (legs by marking, then half-edges by id). ψ exponents of matched points
/// add; κ of the slot vertex is discarded (it must be empty).
pub fn substitute(
    outer: &StableGraph,
    outer_deco: &Decoration,
    slot: usize,
    inner: &StableGraph,
    inner_deco: &Decoration,
) -> (StableGraph, Decoration) {
    let points = outer.points_at(slot);
    debug_assert_eq!(points.len(), inner.num_legs());
    let nv_out = outer.num_vertices();
    let offset = nv_out - 1;
    let remap = |v: usize| if v < slot { v } else { v - 1 };
    let mut genera: Vec<u32> = (0..nv_out).filter(|&v| v != slot).map(|v| outer.genera[v]).collect();
    genera.extend_from_slice(&inner.genera);
    let mut kappa: Vec<Vec<u32>> = (0..nv_out).filter(|&v| v != slot).map(|v| outer_deco.kappa[v].clone()).collect();
    kappa.extend(inner_deco.kappa.iter().cloned());

    let mut legs = Vec::with_capacity(outer.num_legs());
    let mut psi_legs = Vec::with_capacity(outer.num_legs());
    let mut edges = Vec::with_capacity(outer.num_edges() + inner.num_edges());
    let mut psi_half_edges = Vec::with_capacity(2 * (outer.num_edges() + inner.num_edges()));
    let target = |p: Point| -> (usize, u32) {
        let i = points.iter().position(|&q| q == p).expect("point at slot");
        (inner.legs[i] + offset, inner_deco.psi_legs[i])
    };
    for (j, &v) in outer.legs.iter().enumerate() {
        if v == slot {
            let (w, extra) = target(Point::Leg(j));
            legs.push(w);
            psi_legs.push(outer_deco.psi_legs[j] + extra);
        } else {
            legs.push(remap(v));
            psi_legs.push(outer_deco.psi_legs[j]);
        }
    }
    for (e, &(a, b)) in outer.edges.iter().enumerate() {
        let mut ends = [(a, 2 * e), (b, 2 * e + 1)].map(|(v, h)| {
            if v == slot {
                let (w, extra) = target(Point::Half(h));
                (w, outer_deco.psi_half_edges[h] + extra)
            } else {
                (remap(v), outer_deco.psi_half_edges[h])
            }
        });
        edges.push((ends[0].0, ends[1].0));
        psi_half_edges.push(std::mem::take(&mut ends[0].1));
        psi_half_edges.push(ends[1].1);
    }
    for (e, &(a, b)) in inner.edges.iter().enumerate() {
        edges.push((a + offset, b + offset));
        psi_half_edges.push(inner_deco.psi_half_edges[2 * e]);
        psi_half_edges.push(inner_deco.psi_half_edges[2 * e + 1]);
    }
    (StableGraph { genera, legs, edges }, Decoration { kappa, psi_legs, psi_half_edges })
}

/// Pushforward of classes on M(g′, n′) along the gluing map of `outer` at
/// vertex `slot`, multiplied by `outer_deco` on the rest of the graph.
///
/// The fundamental class maps to the boundary stratum of `outer` with
/// coefficient 1.
pub fn pushforward<S: Scalar>(
    inner: &StrataVector<S>,
    outer: &StableGraph,
    slot: usize,
    outer_deco: &Decoration,
) -> Result<StrataVector<S>> {
    outer_deco.check_shape(outer)?;
    if slot >= outer.num_vertices() {
        return Err(Error::invalid("slot vertex out of range"));
    }
    if inner.g != outer.genera[slot] || inner.n != outer.valence(slot) {
        return Err(Error::invalid(format!(
            "slot has type ({}, {}) but classes live on ({}, {})",
            outer.genera[slot],
            outer.valence(slot),
            inner.g,
            inner.n
        )));
    }
    if !outer_deco.kappa[slot].is_empty() {
        return Err(Error::invalid("outer decoration carries kappa at the slot"));
    }
    let mut out = StrataVector::zero(outer.genus(), outer.num_legs());
    for (key, c) in inner.iter() {
        let s = key.decode()?;
        let (graph, deco) = substitute(outer, outer_deco, slot, &s.graph, &s.deco);
        if let Some(k) = (DecoratedStratum { graph, deco }).key() {
            out.add_term(k, c.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn two_vertex_20() -> StableGraph {
        StableGraph::new(vec![1, 1], vec![], vec![(0, 1)]).unwrap()
    }

    #[test]
    fn fundamental_class_normalization() {
        let outer = two_vertex_20();
        let smooth = DecoratedStratum::undecorated(StableGraph::smooth(1, 1)).key().unwrap();
        let inner = StrataVector::single(1, 1, smooth, Q::from_i64(1));
        let out = pushforward(&inner, &outer, 0, &Decoration::trivial(&outer)).unwrap();
        let expect = DecoratedStratum::undecorated(outer).key().unwrap();
        assert_eq!(out, StrataVector::single(2, 0, expect, Q::from_i64(1)));
    }

    #[test]
    fn psi_transports_to_half_edge() {
        let outer = two_vertex_20();
        let inner = StrataVector::single(1, 1, DecoratedStratum::psi_power(1, 1, 1).key().unwrap(), Q::from_i64(1));
        let out = pushforward(&inner, &outer, 1, &Decoration::trivial(&outer)).unwrap();
        let mut deco = Decoration::trivial(&outer);
        deco.psi_half_edges[1] = 1;
        let expect = DecoratedStratum { graph: outer, deco }.key().unwrap();
        assert_eq!(out, StrataVector::single(2, 0, expect, Q::from_i64(1)));
    }

    #[test]
    fn slot_type_mismatch_rejected() {
        let outer = two_vertex_20();
        let inner = StrataVector::<Q>::zero(1, 2);
        assert!(pushforward(&inner, &outer, 0, &Decoration::trivial(&outer)).is_err());
    }
}
