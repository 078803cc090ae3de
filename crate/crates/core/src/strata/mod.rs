//! The strata algebra: decorated strata, their canonical keys, the basis of a
//! given degree, pushforward along gluing maps, and the series toolkit used to
//! expand Pixton's classes.

mod basis;
mod json;
mod kappa;
mod pushforward;
mod series;
mod vector;
mod zeta;

use std::fmt;

pub use basis::{basis, decorations, partitions, weak_compositions, Basis};
pub use json::{DecorationJson, StratumJson};
pub use kappa::{brace_c, brace_one_minus_c0, exp_truncated, kappa_hat, KPoly, KappaSymbol, KappaVariant};
pub use pushforward::{pushforward, substitute};
pub use series::{a_coeff, ab_identity_coefficients, b_coeff, chat, edge_factor, series_a, series_b};
pub use vector::StrataVector;
pub use zeta::{Monomial, ZetaPoly};

use crate::error::{Error, Result};
use crate::graphs::{automorphisms, canonical_form, to_hex_bytes, CanonicalCode, StableGraph};

/// κ-monomials per vertex and ψ exponents per leg and half-edge.
///
/// κ multisets are kept sorted; index 0 never appears.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Decoration {
    pub kappa: Vec<Vec<u32>>,
    pub psi_legs: Vec<u32>,
    pub psi_half_edges: Vec<u32>,
}

impl Decoration {
    /// The empty decoration on `graph`.
    pub fn trivial(graph: &StableGraph) -> Self {
        Decoration {
            kappa: vec![Vec::new(); graph.num_vertices()],
            psi_legs: vec![0; graph.num_legs()],
            psi_half_edges: vec![0; graph.num_half_edges()],
        }
    }

    pub fn degree(&self) -> u32 {
        self.kappa.iter().flatten().sum::<u32>()
            + self.psi_legs.iter().sum::<u32>()
            + self.psi_half_edges.iter().sum::<u32>()
    }

    /// Degree carried by vertex `v` (its κ plus ψ on its points).
    pub fn vertex_degree(&self, graph: &StableGraph, v: usize) -> u32 {
        let k: u32 = self.kappa[v].iter().sum();
        let l: u32 = (0..graph.num_legs()).filter(|&i| graph.legs[i] == v).map(|i| self.psi_legs[i]).sum();
        let h: u32 = (0..graph.num_half_edges())
            .filter(|&h| graph.half_edge_vertex(h) == v)
            .map(|h| self.psi_half_edges[h])
            .sum();
        k + l + h
    }

    pub fn has_kappa(&self) -> bool {
        self.kappa.iter().any(|k| !k.is_empty())
    }

    pub fn check_shape(&self, graph: &StableGraph) -> Result<()> {
        if self.kappa.len() != graph.num_vertices()
            || self.psi_legs.len() != graph.num_legs()
            || self.psi_half_edges.len() != graph.num_half_edges()
        {
            return Err(Error::invalid("decoration does not match graph shape"));
        }
        if self.kappa.iter().flatten().any(|&k| k == 0) {
            return Err(Error::invalid("kappa index 0 is not stored"));
        }
        Ok(())
    }

    fn encode(&self, out: &mut Vec<u8>) {
        for k in &self.kappa {
            out.push(k.len() as u8);
            out.extend(k.iter().map(|&x| x as u8));
        }
        out.extend(self.psi_legs.iter().map(|&x| x as u8));
        out.extend(self.psi_half_edges.iter().map(|&x| x as u8));
    }

    fn decode(graph: &StableGraph, bytes: &[u8]) -> Result<Self> {
        let err = || Error::Parse("truncated decoration".into());
        let mut i = 0;
        let mut kappa = Vec::with_capacity(graph.num_vertices());
        for _ in 0..graph.num_vertices() {
            let len = *bytes.get(i).ok_or_else(err)? as usize;
            let k = bytes.get(i + 1..i + 1 + len).ok_or_else(err)?;
            kappa.push(k.iter().map(|&x| x as u32).collect());
            i += 1 + len;
        }
        let nl = graph.num_legs();
        let nh = graph.num_half_edges();
        let psi = bytes.get(i..i + nl + nh).ok_or_else(err)?;
        if i + nl + nh != bytes.len() {
            return Err(Error::Parse("trailing bytes in decoration".into()));
        }
        Ok(Decoration {
            kappa,
            psi_legs: psi[..nl].iter().map(|&x| x as u32).collect(),
            psi_half_edges: psi[nl..].iter().map(|&x| x as u32).collect(),
        })
    }

    /// Relabels along a vertex map and half-edge map (old index -> new index).
    pub fn transport(&self, vertex_map: &[usize], half_edge_map: &[usize]) -> Decoration {
        let mut kappa = vec![Vec::new(); self.kappa.len()];
        for (v, k) in self.kappa.iter().enumerate() {
            kappa[vertex_map[v]] = k.clone();
        }
        let mut psi_half_edges = vec![0; self.psi_half_edges.len()];
        for (h, &p) in self.psi_half_edges.iter().enumerate() {
            psi_half_edges[half_edge_map[h]] = p;
        }
        Decoration { kappa, psi_legs: self.psi_legs.clone(), psi_half_edges }
    }
}

/// Canonical identifier of a decorated stratum: the graph code followed by
/// the decoration, minimised over automorphisms. Keys decode back to strata.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StratumKey(Box<[u8]>);

impl StratumKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        StratumKey(bytes.into_boxed_slice())
    }

    pub fn to_hex(&self) -> String {
        to_hex_bytes(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let key = StratumKey(crate::graphs::from_hex_bytes(s)?.into_boxed_slice());
        key.decode()?;
        Ok(key)
    }

    pub fn decode(&self) -> Result<DecoratedStratum> {
        let (graph, len) = CanonicalCode::decode_prefix(&self.0)?;
        let deco = Decoration::decode(&graph, &self.0[len..])?;
        Ok(DecoratedStratum { graph, deco })
    }

    pub fn graph_code(&self) -> CanonicalCode {
        let (nv, nl, ne) = (self.0[0] as usize, self.0[1] as usize, self.0[2] as usize);
        CanonicalCode::from_bytes(self.0[..CanonicalCode::encoded_len(nv, nl, ne)].to_vec())
    }

    pub fn has_kappa(&self) -> bool {
        self.decode().map(|s| s.deco.has_kappa()).unwrap_or(false)
    }

    pub fn degree(&self) -> u32 {
        self.decode().map(|s| s.degree()).unwrap_or(0)
    }
}

impl fmt::Display for StratumKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for StratumKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.decode() {
            Ok(s) => write!(f, "[{s}]"),
            Err(_) => write!(f, "StratumKey({})", self.to_hex()),
        }
    }
}

/// A stable graph together with a decoration.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DecoratedStratum {
    pub graph: StableGraph,
    pub deco: Decoration,
}

impl DecoratedStratum {
    pub fn new(graph: StableGraph, deco: Decoration) -> Result<Self> {
        deco.check_shape(&graph)?;
        Ok(DecoratedStratum { graph, deco })
    }

    pub fn undecorated(graph: StableGraph) -> Self {
        let deco = Decoration::trivial(&graph);
        DecoratedStratum { graph, deco }
    }

    /// ψ_1^k on the smooth graph of type (g, n).
    pub fn psi_power(g: u32, n: usize, k: u32) -> Self {
        let mut s = DecoratedStratum::undecorated(StableGraph::smooth(g, n));
        s.deco.psi_legs[0] = k;
        s
    }

    pub fn degree(&self) -> u32 {
        self.graph.num_edges() as u32 + self.deco.degree()
    }

    /// Whether every vertex respects 3g(v) - 3 + n(v) >= its degree.
    pub fn within_dimension(&self) -> bool {
        (0..self.graph.num_vertices()).all(|v| match self.graph.vertex_dim(v) {
            Some(d) => self.deco.vertex_degree(&self.graph, v) as usize <= d,
            None => false,
        })
    }

    /// Canonical key, or `None` when a vertex exceeds its dimension.
    pub fn key(&self) -> Option<StratumKey> {
        if !self.within_dimension() {
            return None;
        }
        Some(self.key_unchecked())
    }

    /// Canonical key without dimension checks (used for generalized graphs).
    pub fn key_unchecked(&self) -> StratumKey {
        let canon = canonical_form(&self.graph);
        let deco = self.deco.transport(&canon.vertex_map, &canon.half_edge_map);
        let mut prefix = canon.code.as_bytes().to_vec();
        let base = prefix.len();
        deco.encode(&mut prefix);
        let auts = automorphisms(&canon.graph);
        if auts.len() > 1 {
            let mut buf = Vec::with_capacity(prefix.len());
            for a in auts.iter() {
                buf.clear();
                buf.extend_from_slice(&prefix[..base]);
                deco.transport(&a.vertex, &a.half_edge).encode(&mut buf);
                if buf[base..] < prefix[base..] {
                    prefix.truncate(base);
                    prefix.extend_from_slice(&buf[base..]);
                }
            }
        }
        StratumKey(prefix.into_boxed_slice())
    }

    /// Number of ψ units on legs and half-edges.
    pub fn psi_degree(&self) -> u32 {
        self.deco.psi_legs.iter().sum::<u32>() + self.deco.psi_half_edges.iter().sum::<u32>()
    }
}

impl fmt::Display for DecoratedStratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.graph)?;
        if self.deco.has_kappa() {
            write!(f, " kappa={:?}", self.deco.kappa)?;
        }
        if self.deco.psi_legs.iter().any(|&x| x > 0) {
            write!(f, " psi_legs={:?}", self.deco.psi_legs)?;
        }
        if self.deco.psi_half_edges.iter().any(|&x| x > 0) {
            write!(f, " psi_half_edges={:?}", self.deco.psi_half_edges)?;
        }
        Ok(())
    }
}
