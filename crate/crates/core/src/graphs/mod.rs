//! Stable graphs: validation, canonical labels, automorphisms and enumeration.

mod canon;
mod enumerate;
mod json;

use std::fmt;

pub(crate) use canon::{from_hex as from_hex_bytes, to_hex as to_hex_bytes};
pub use canon::{
    automorphism_count, automorphisms, canonical_code, canonical_form, Automorphism, Canonical,
    CanonicalCode,
};
pub(crate) use enumerate::split_vertex;
pub use enumerate::{
    enumerate_stable_graphs, genus_zero_degenerations, genus_zero_graphs, one_step_degenerations,
};
pub use json::GraphJson;

use crate::error::{Error, Result};

/// A marked point on a vertex: either a leg (0-based marking) or a half-edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Leg(usize),
    Half(usize),
}

/// Dual graph of a boundary stratum.
///
/// Vertex genera are stored in `genera`; `legs[i]` is the vertex carrying
/// marking `i + 1`; edge `e` owns half-edges `2e` (at `edges[e].0`) and
/// `2e + 1` (at `edges[e].1`).
///
/// The canonical-labelling code only treats `genera` as opaque labels, so the
/// same type also describes the generalized graphs used by the correlator
/// calculus, which may be unstable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StableGraph {
    pub genera: Vec<u32>,
    pub legs: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl StableGraph {
    /// Builds and validates a stable graph.
    pub fn new(genera: Vec<u32>, legs: Vec<usize>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let g = StableGraph { genera, legs, edges };
        g.validate()?;
        Ok(g)
    }

    /// The one-vertex graph of type (g, n).
    pub fn smooth(g: u32, n: usize) -> Self {
        StableGraph { genera: vec![g], legs: vec![0; n], edges: Vec::new() }
    }

    pub fn num_vertices(&self) -> usize {
        self.genera.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_legs(&self) -> usize {
        self.legs.len()
    }

    pub fn num_half_edges(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn half_edge_vertex(&self, h: usize) -> usize {
        let (a, b) = self.edges[h / 2];
        if h % 2 == 0 {
            a
        } else {
            b
        }
    }

    pub fn point_vertex(&self, p: Point) -> usize {
        match p {
            Point::Leg(i) => self.legs[i],
            Point::Half(h) => self.half_edge_vertex(h),
        }
    }

    /// Points at `v`: legs by marking, then half-edges by id.
    pub fn points_at(&self, v: usize) -> Vec<Point> {
        let mut pts: Vec<Point> = (0..self.legs.len())
            .filter(|&i| self.legs[i] == v)
            .map(Point::Leg)
            .collect();
        pts.extend((0..self.num_half_edges()).filter(|&h| self.half_edge_vertex(h) == v).map(Point::Half));
        pts
    }

    /// n(v): legs plus half-edges at `v`.
    pub fn valence(&self, v: usize) -> usize {
        let legs = self.legs.iter().filter(|&&w| w == v).count();
        let halves = self.edges.iter().map(|&(a, b)| (a == v) as usize + (b == v) as usize).sum::<usize>();
        legs + halves
    }

    /// 3g(v) - 3 + n(v), or `None` when the vertex is unstable.
    pub fn vertex_dim(&self, v: usize) -> Option<usize> {
        let d = 3 * self.genera[v] as i64 - 3 + self.valence(v) as i64;
        (d >= 0 && self.is_vertex_stable(v)).then_some(d as usize)
    }

    pub fn is_vertex_stable(&self, v: usize) -> bool {
        2 * self.genera[v] as i64 - 2 + self.valence(v) as i64 > 0
    }

    pub fn h1(&self) -> usize {
        self.edges.len() + 1 - self.genera.len()
    }

    pub fn genus(&self) -> u32 {
        self.genera.iter().sum::<u32>() + self.h1() as u32
    }

    pub fn is_loop(&self, e: usize) -> bool {
        self.edges[e].0 == self.edges[e].1
    }

    pub fn is_connected(&self) -> bool {
        let n = self.genera.len();
        if n == 0 {
            return false;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        let root = find(&mut parent, 0);
        (0..n).all(|v| find(&mut parent, v) == root)
    }

    pub fn is_stable(&self) -> bool {
        (0..self.num_vertices()).all(|v| self.is_vertex_stable(v))
    }

    /// Checks index ranges, connectivity and stability.
    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        if let Some(v) = (0..self.num_vertices()).find(|&v| !self.is_vertex_stable(v)) {
            return Err(Error::invalid(format!("vertex {v} is unstable")));
        }
        Ok(())
    }

    /// Index ranges and connectivity only; used for generalized graphs.
    pub fn validate_shape(&self) -> Result<()> {
        let nv = self.num_vertices();
        if nv == 0 {
            return Err(Error::invalid("graph has no vertices"));
        }
        if nv > 255 || self.legs.len() > 255 || self.edges.len() > 255 {
            return Err(Error::invalid("graph too large"));
        }
        if self.legs.iter().any(|&v| v >= nv) || self.edges.iter().any(|&(a, b)| a >= nv || b >= nv) {
            return Err(Error::invalid("vertex index out of range"));
        }
        if !self.is_connected() {
            return Err(Error::invalid("graph is not connected"));
        }
        Ok(())
    }
}

impl fmt::Display for StableGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "genera={:?} legs={:?} edges={:?}", self.genera, self.legs, self.edges)
    }
}

/// Rejects (g, n) with 2g - 2 + n <= 0.
pub fn check_stable_pair(g: u32, n: usize) -> Result<()> {
    if 2 * g as i64 - 2 + n as i64 <= 0 {
        return Err(Error::invalid(format!("(g, n) = ({g}, {n}) is not stable")));
    }
    Ok(())
}
