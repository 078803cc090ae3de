//! Exact sparse row reduction, κ-elimination and row-space membership.
//!
//! Reduction is streaming Gauss-Jordan: every absorbed row is fully reduced
//! against the current pivot rows, normalized to a leading 1, and then used to
//! clear its pivot column from the existing rows. The result is the reduced
//! row echelon form, which is unique, so it does not depend on arrival order
//! or thread count.

mod checkpoint;
mod modular;

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use rayon::prelude::*;

pub use modular::rref_multimodular;
pub use checkpoint::{read_checkpoint, write_checkpoint, CheckpointHeader, CHECKPOINT_VERSION};

use crate::error::{Error, Result};
use crate::scalar::{Fp, Scalar};
use crate::strata::{Basis, StrataVector, StratumKey};

/// Sparse row: strictly increasing column indices, no stored zeros.
pub type SparseVec<S> = Vec<(usize, S)>;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<S> {
    pub ncols: usize,
    pub rows: Vec<SparseVec<S>>,
}

impl<S: Scalar> SparseMatrix<S> {
    pub fn new(ncols: usize) -> Self {
        SparseMatrix { ncols, rows: Vec::new() }
    }

    /// Builds from dense rows, dropping zeros.
    pub fn from_dense(rows: &[Vec<S>]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        SparseMatrix {
            ncols,
            rows: rows
                .iter()
                .map(|r| r.iter().enumerate().filter(|(_, x)| !x.is_negligible()).map(|(i, x)| (i, x.clone())).collect())
                .collect(),
        }
    }

    pub fn push(&mut self, row: SparseVec<S>) -> Result<()> {
        check_row(&row, self.ncols)?;
        self.rows.push(row);
        Ok(())
    }
}

fn check_row<S>(row: &SparseVec<S>, ncols: usize) -> Result<()> {
    if row.windows(2).any(|w| w[0].0 >= w[1].0) || row.last().is_some_and(|(c, _)| *c >= ncols) {
        return Err(Error::invalid(format!("row is not a sorted sparse vector with columns < {ncols}")));
    }
    Ok(())
}

/// Reduced row echelon form.
#[derive(Clone, Debug, PartialEq)]
pub struct Rref<S> {
    pub ncols: usize,
    /// Rows sorted by pivot; each starts with a 1 at its pivot.
    pub rows: Vec<SparseVec<S>>,
    pub pivots: Vec<usize>,
}

impl<S: Scalar> Rref<S> {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Rebuilds the streaming state from a finished form.
    pub fn to_echelon(&self) -> Echelon<S> {
        Echelon { ncols: self.ncols, rows: self.pivots.iter().copied().zip(self.rows.iter().cloned()).collect() }
    }

    /// Whether `row` lies in the row space.
    pub fn contains(&self, row: &SparseVec<S>) -> Result<bool> {
        check_row(row, self.ncols)?;
        Ok(self.to_echelon().reduce(row).is_empty())
    }
}

/// Growing set of fully reduced pivot rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Echelon<S> {
    pub ncols: usize,
    rows: BTreeMap<usize, SparseVec<S>>,
}

impl<S: Scalar> Echelon<S> {
    pub fn new(ncols: usize) -> Self {
        Echelon { ncols, rows: BTreeMap::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    /// Reduces `row` against the current pivot rows.
    pub fn reduce(&self, row: &SparseVec<S>) -> SparseVec<S> {
        let hits: Vec<(&SparseVec<S>, &S)> =
            row.iter().filter_map(|(c, x)| self.rows.get(c).map(|p| (p, x))).collect();
        if hits.is_empty() {
            return row.clone();
        }
        let mut acc: BTreeMap<usize, S> = row.iter().cloned().collect();
        for (p, x) in hits {
            for (j, y) in p {
                let e = acc.entry(*j).or_insert_with(S::zero);
                *e -= x.clone() * y.clone();
            }
        }
        acc.into_iter().filter(|(_, x)| !x.is_negligible()).collect()
    }

    /// Absorbs a row that is already reduced against the current pivots.
    fn absorb_reduced(&mut self, mut r: SparseVec<S>) -> bool {
        if r.is_empty() {
            return false;
        }
        let pivot = r[0].0;
        let inv = r[0].1.inv();
        for e in r.iter_mut() {
            e.1 = e.1.clone() * inv.clone();
        }
        r[0].1 = S::one();
        let pivot_row = r;
        for row in self.rows.values_mut() {
            if let Ok(i) = row.binary_search_by_key(&pivot, |e| e.0) {
                let x = row[i].1.clone();
                *row = axpy(row, &pivot_row, &x);
            }
        }
        self.rows.insert(pivot, pivot_row);
        true
    }

    /// Adds a row; returns whether it was independent of the rows so far.
    pub fn insert(&mut self, row: &SparseVec<S>) -> bool {
        let r = self.reduce(row);
        self.absorb_reduced(r)
    }

    /// Adds a batch, reducing against the frozen state in parallel first.
    /// Returns the independence flag of each row.
    pub fn insert_batch(&mut self, rows: &[SparseVec<S>]) -> Vec<bool> {
        let pre: Vec<SparseVec<S>> = rows.par_iter().map(|r| self.reduce(r)).collect();
        pre.into_iter().map(|r| {
            let r = self.reduce(&r);
            self.absorb_reduced(r)
        }).collect()
    }

    pub fn into_rref(self) -> Rref<S> {
        let (pivots, rows): (Vec<usize>, Vec<SparseVec<S>>) = self.rows.into_iter().unzip();
        Rref { ncols: self.ncols, rows, pivots }
    }

    pub fn rows(&self) -> impl Iterator<Item = &SparseVec<S>> {
        self.rows.values()
    }
}

/// `row - x * pivot_row`.
fn axpy<S: Scalar>(row: &SparseVec<S>, pivot_row: &SparseVec<S>, x: &S) -> SparseVec<S> {
    let mut out = Vec::with_capacity(row.len() + pivot_row.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot_row.len() {
        let ci = row.get(i).map_or(usize::MAX, |e| e.0);
        let cj = pivot_row.get(j).map_or(usize::MAX, |e| e.0);
        if ci < cj {
            out.push(row[i].clone());
            i += 1;
        } else if cj < ci {
            out.push((cj, -(x.clone() * pivot_row[j].1.clone())));
            j += 1;
        } else {
            let v = row[i].1.clone() - x.clone() * pivot_row[j].1.clone();
            if !v.is_negligible() {
                out.push((ci, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Exact reduced row echelon form.
pub fn rref<S: Scalar>(m: &SparseMatrix<S>) -> Rref<S> {
    let mut e = Echelon::new(m.ncols);
    for chunk in m.rows.chunks(64) {
        e.insert_batch(chunk);
    }
    e.into_rref()
}

/// Indices of rows independent of their predecessors, computed modulo a prime.
pub fn modular_independent_rows(rows: &[SparseVec<BigRational>], ncols: usize) -> Vec<usize> {
    let mut e: Echelon<Fp> = Echelon::new(ncols);
    let mut keep = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let r: SparseVec<Fp> = row.iter().map(|(c, x)| (*c, Fp::from_rational(x))).filter(|(_, x)| !x.is_negligible()).collect();
        if e.insert(&r) {
            keep.push(i);
        }
    }
    keep
}

/// Statistics of a modular-filtered reduction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReductionStats {
    pub rows: usize,
    pub modular_rank: usize,
    /// Rows skipped by the modular pass that turned out independent over Q.
    pub replay_corrections: usize,
}

/// Exact RREF. Tries multi-modular lifting first and otherwise falls back to
/// [`rref_replay`].
pub fn rref_filtered(rows: &[SparseVec<BigRational>], ncols: usize) -> (Rref<BigRational>, ReductionStats) {
    match rref_multimodular(rows, ncols, MAX_PRIMES) {
        Some(r) => {
            let stats = ReductionStats { rows: rows.len(), modular_rank: r.rank(), replay_corrections: 0 };
            (r, stats)
        }
        None => rref_replay(rows, ncols),
    }
}

const MAX_PRIMES: usize = 2048;

/// Exact RREF using modular pivot prediction followed by exact replay.
///
/// Rows found independent modulo the prime are reduced exactly; every other
/// row is then checked exactly against the result, so the output is the exact
/// RREF of all rows regardless of the prime.
pub fn rref_replay(rows: &[SparseVec<BigRational>], ncols: usize) -> (Rref<BigRational>, ReductionStats) {
    let keep = modular_independent_rows(rows, ncols);
    let mut e: Echelon<BigRational> = Echelon::new(ncols);
    let selected: Vec<SparseVec<BigRational>> = keep.iter().map(|&i| rows[i].clone()).collect();
    for chunk in selected.chunks(64) {
        e.insert_batch(chunk);
    }
    let mut stats = ReductionStats { rows: rows.len(), modular_rank: keep.len(), replay_corrections: 0 };
    let kept: BTreeSet<usize> = keep.into_iter().collect();
    let skipped: Vec<usize> = (0..rows.len()).filter(|i| !kept.contains(i)).collect();
    let residues: Vec<SparseVec<BigRational>> = skipped.par_iter().map(|&i| e.reduce(&rows[i])).collect();
    for r in residues.into_iter().filter(|r| !r.is_empty()) {
        if e.insert(&r) {
            stats.replay_corrections += 1;
        }
    }
    (e.into_rref(), stats)
}

/// Sparse row of a strata vector in `basis` column order.
pub fn to_sparse<S: Scalar>(v: &StrataVector<S>, basis: &Basis) -> Result<SparseVec<S>> {
    let mut row: SparseVec<S> = v
        .iter()
        .map(|(k, c)| {
            basis
                .index_of(k)
                .map(|i| (i, c.clone()))
                .ok_or_else(|| Error::invalid(format!("stratum {k:?} is not in the degree-{} basis of ({}, {})", basis.r, basis.g, basis.n)))
        })
        .collect::<Result<_>>()?;
    row.sort_by_key(|e| e.0);
    Ok(row)
}

pub fn from_sparse<S: Scalar>(row: &SparseVec<S>, basis: &Basis) -> StrataVector<S> {
    let mut v = StrataVector::zero(basis.g, basis.n);
    for (i, c) in row {
        v.add_term(basis.keys[*i].clone(), c.clone());
    }
    v
}

/// RREF rows supported in the κ-free block (pivot at or after `kappa_count`).
pub fn kappa_free_relations<S: Scalar>(rref: &Rref<S>, basis: &Basis) -> Vec<StrataVector<S>> {
    rref.rows
        .iter()
        .zip(&rref.pivots)
        .filter(|(_, &p)| p >= basis.kappa_count)
        .map(|(row, _)| from_sparse(row, basis))
        .collect()
}

/// Whether `candidate` lies in the row space of `rref` (columns in `basis` order).
pub fn membership<S: Scalar>(candidate: &StrataVector<S>, rref: &Rref<S>, basis: &Basis) -> Result<bool> {
    if candidate.g != basis.g || candidate.n != basis.n {
        return Err(Error::invalid("candidate lives on a different moduli space"));
    }
    if let Some(d) = candidate.degree() {
        if d != basis.r {
            return Err(Error::invalid(format!("candidate has degree {d}, expected {}", basis.r)));
        }
    }
    rref.contains(&to_sparse(candidate, basis)?)
}

/// Outcome of expressing a target stratum through relations.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution<S> {
    /// A relation with coefficient 1 on the target and no other avoided strata.
    pub relation: StrataVector<S>,
    /// Whether the expression is the only one with the allowed support.
    pub unique: bool,
}

/// Expresses `target` through `relations` using only strata in `allowed`.
///
/// Columns are ordered [disallowed][target][allowed in the given order]; the
/// RREF row pivoting on the target is the answer. Later allowed strata are
/// preferred as free terms.
pub fn solve_within<S: Scalar>(
    target: &StratumKey,
    relations: &[StrataVector<S>],
    allowed: &[StratumKey],
) -> Option<Solution<S>> {
    solve_with(target, relations, allowed, |m| rref(m))
}

/// [`solve_within`] over the rationals, using the multi-modular RREF.
pub fn solve_within_rational(
    target: &StratumKey,
    relations: &[StrataVector<BigRational>],
    allowed: &[StratumKey],
) -> Option<Solution<BigRational>> {
    solve_with(target, relations, allowed, |m| rref_filtered(&m.rows, m.ncols).0)
}

fn solve_with<S: Scalar>(
    target: &StratumKey,
    relations: &[StrataVector<S>],
    allowed: &[StratumKey],
    reduce: impl Fn(&SparseMatrix<S>) -> Rref<S>,
) -> Option<Solution<S>> {
    let (g, n) = relations.first().map(|r| (r.g, r.n))?;
    let allowed_set: BTreeSet<&StratumKey> = allowed.iter().collect();
    let mut avoid: BTreeSet<StratumKey> = BTreeSet::new();
    for r in relations {
        for k in r.keys() {
            if k != target && !allowed_set.contains(k) {
                avoid.insert(k.clone());
            }
        }
    }
    let cols: Vec<StratumKey> = avoid.into_iter().chain(std::iter::once(target.clone())).chain(allowed.iter().cloned()).collect();
    let t = cols.len() - allowed.len() - 1;
    let index: std::collections::HashMap<&StratumKey, usize> = cols.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut m = SparseMatrix::new(cols.len());
    for r in relations {
        let mut row: SparseVec<S> = r.iter().map(|(k, c)| (index[k], c.clone())).collect();
        row.sort_by_key(|e| e.0);
        m.rows.push(row);
    }
    let red = reduce(&m);
    let pos = red.pivots.iter().position(|&p| p == t)?;
    let mut relation = StrataVector::zero(g, n);
    for (c, x) in &red.rows[pos] {
        relation.add_term(cols[*c].clone(), x.clone());
    }
    let unique = !red.pivots.iter().any(|&p| p > t);
    Some(Solution { relation, unique })
}

/// Expresses `target` (coefficient 1) through the other strata of `relations`,
/// preferring free terms with fewer ψ classes. `None` if the target is not
/// determined by the relations.
pub fn solve_for<S: Scalar>(target: &StratumKey, relations: &[StrataVector<S>]) -> Option<StrataVector<S>> {
    let mut others: BTreeSet<StratumKey> = BTreeSet::new();
    for r in relations {
        others.extend(r.keys().filter(|k| *k != target).cloned());
    }
    let mut allowed: Vec<StratumKey> = others.into_iter().collect();
    allowed.sort_by_key(|k| {
        let s = k.decode().expect("valid key");
        (std::cmp::Reverse(s.psi_degree()), s.graph.num_edges(), k.clone())
    });
    solve_within(target, relations, &allowed).map(|s| s.relation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type Q = BigRational;

    fn q(n: i64) -> Q {
        Q::from_i64(n)
    }

    #[test]
    fn identity_block_is_fixed() {
        let m = SparseMatrix::from_dense(&[vec![q(1), q(0)], vec![q(0), q(1)]]);
        let r = rref(&m);
        assert_eq!(r.rank(), 2);
        assert_eq!(r.rows, m.rows);
    }

    #[test]
    fn dependent_rows_collapse() {
        let m = SparseMatrix::from_dense(&[vec![q(1), q(2)], vec![q(2), q(4)]]);
        let r = rref(&m);
        assert_eq!(r.rank(), 1);
        assert_eq!(r.rows[0], vec![(0, q(1)), (1, q(2))]);
    }

    #[test]
    fn modular_filter_matches_plain() {
        let m = SparseMatrix::from_dense(&[
            vec![q(1), q(2), q(3)],
            vec![q(2), q(4), q(6)],
            vec![q(0), q(1), Q::frac(1, 3)],
            vec![q(1), q(3), Q::frac(10, 3)],
        ]);
        assert_eq!(rref_filtered(&m.rows, 3).0, rref(&m));
        let (r, stats) = rref_replay(&m.rows, 3);
        assert_eq!(r, rref(&m));
        assert_eq!(stats.modular_rank, 2);
        assert_eq!(stats.replay_corrections, 0);
    }

    fn arb_matrix() -> impl Strategy<Value = Vec<Vec<Q>>> {
        prop::collection::vec(prop::collection::vec((-3i64..4, 1i64..4), 6), 1..7)
            .prop_map(|rows| rows.into_iter().map(|r| r.into_iter().map(|(a, b)| Q::frac(a, b)).collect()).collect())
    }

    proptest! {
        #[test]
        fn rref_idempotent_and_spans(rows in arb_matrix()) {
            let m = SparseMatrix::from_dense(&rows);
            let r = rref(&m);
            let again = rref(&SparseMatrix { ncols: m.ncols, rows: r.rows.clone() });
            prop_assert_eq!(&again, &r);
            for row in &m.rows {
                prop_assert!(r.contains(row).unwrap());
            }
            let mut rev = m.clone();
            rev.rows.reverse();
            prop_assert_eq!(rref(&rev), r);
        }

        #[test]
        fn exact_paths_agree(rows in arb_matrix()) {
            let m = SparseMatrix::from_dense(&rows);
            let r = rref(&m);
            prop_assert_eq!(rref_multimodular(&m.rows, m.ncols, 64), Some(r.clone()));
            prop_assert_eq!(rref_replay(&m.rows, m.ncols).0, r);
        }
    }
}
