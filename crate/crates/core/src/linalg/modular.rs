//! Multi-modular RREF with rational reconstruction and exact certification.
//!
//! The RREF is computed modulo a sequence of word-size primes, lifted by CRT
//! and rational reconstruction, and accepted only once every input row is
//! checked, exactly, to be the combination of the lifted rows given by its
//! pivot entries. Since the lifted rows are in reduced echelon form and their
//! count equals a modular rank (a lower bound for the rational rank), passing
//! the check proves the lift is the rational RREF.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Rref, SparseVec};

/// Primes just below 2^31, descending.
fn primes() -> impl Iterator<Item = u64> {
    (1u64 << 20..(1u64 << 31)).rev().filter(|&p| p % 2 == 1 && is_prime(p))
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    true
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn residue(x: &BigInt, p: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(p));
    r.to_u64().expect("residue below p")
}

/// Residue of a rational, or `None` if p divides its denominator.
fn rational_residue(q: &BigRational, p: u64) -> Option<u64> {
    let d = residue(q.denom(), p);
    if d == 0 {
        return None;
    }
    Some(residue(q.numer(), p) * pow_mod(d, p - 2, p) % p)
}

/// RREF modulo p: pivot columns and dense pivot rows.
struct ModRref {
    pivots: Vec<usize>,
    rows: Vec<Vec<u64>>,
}

fn rref_mod(rows: &[SparseVec<BigRational>], ncols: usize, p: u64) -> Option<(ModRref, Vec<usize>)> {
    // pivot column -> position in `dense`
    let mut slot: Vec<Option<usize>> = vec![None; ncols];
    let mut dense: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut independent = Vec::new();
    for (idx, row) in rows.iter().enumerate() {
        let mut v = vec![0u64; ncols];
        for (c, x) in row {
            v[*c] = rational_residue(x, p)?;
        }
        // Pivot rows are zero on other pivot columns, so the original entries
        // at pivot columns are the elimination multipliers.
        let hits: Vec<(usize, u64)> =
            row.iter().filter_map(|(c, _)| slot[*c].map(|s| (s, v[*c]))).filter(|(_, x)| *x != 0).collect();
        for (s, x) in hits {
            let m = p - x;
            let pr = &dense[s].1;
            for (a, b) in v.iter_mut().zip(pr) {
                if *b != 0 {
                    *a = (*a + m * b) % p;
                }
            }
        }
        let Some(lead) = v.iter().position(|x| *x != 0) else { continue };
        let inv = pow_mod(v[lead], p - 2, p);
        for a in v.iter_mut() {
            *a = *a * inv % p;
        }
        for (_, pr) in dense.iter_mut() {
            let x = pr[lead];
            if x != 0 {
                let m = p - x;
                for (a, b) in pr.iter_mut().zip(&v) {
                    if *b != 0 {
                        *a = (*a + m * b) % p;
                    }
                }
            }
        }
        slot[lead] = Some(dense.len());
        dense.push((lead, v));
        independent.push(idx);
    }
    dense.sort_by_key(|(c, _)| *c);
    let (pivots, rows) = dense.into_iter().unzip();
    Some((ModRref { pivots, rows }, independent))
}

/// Rational with |num|, den ≤ sqrt(m/2) congruent to `a` mod `m`.
fn reconstruct(a: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    Some(BigRational::new(r1, t1))
}

/// Checks that every row equals the combination of `rref` rows given by its
/// own entries at the pivot columns.
fn certify(rows: &[SparseVec<BigRational>], rref: &Rref<BigRational>) -> bool {
    let mut pos = vec![usize::MAX; rref.ncols];
    for (i, &c) in rref.pivots.iter().enumerate() {
        pos[c] = i;
    }
    rows.iter().all(|row| {
        let mut acc: std::collections::BTreeMap<usize, BigRational> = std::collections::BTreeMap::new();
        for (c, x) in row {
            if pos[*c] != usize::MAX {
                for (j, y) in &rref.rows[pos[*c]] {
                    *acc.entry(*j).or_insert_with(BigRational::zero) += x * y;
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        acc.len() == row.len() && row.iter().all(|(c, x)| acc.get(c) == Some(x))
    })
}

/// Exact RREF by multi-modular lifting; `None` if `max_primes` did not suffice.
pub fn rref_multimodular(rows: &[SparseVec<BigRational>], ncols: usize, max_primes: usize) -> Option<Rref<BigRational>> {
    let mut primes = primes();
    // First prime: pick the independent rows, which fixes the work for the rest.
    let (first, independent, p0) = loop {
        let p = primes.next()?;
        if let Some((m, ind)) = rref_mod(rows, ncols, p) {
            break (m, ind, p);
        }
    };
    let selected: Vec<SparseVec<BigRational>> = independent.iter().map(|&i| rows[i].clone()).collect();
    let pivots = first.pivots.clone();
    let mut acc: Vec<Vec<BigInt>> = first.rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut modulus = BigInt::from(p0);
    let mut used = 1;
    let mut next_check = 1;
    loop {
        if used >= next_check {
            if let Some(rref) = lift(&acc, &modulus, &pivots, ncols) {
                if certify(rows, &rref) {
                    return Some(rref);
                }
            }
            next_check = used * 2;
        }
        if used >= max_primes {
            return None;
        }
        let p = primes.next()?;
        let Some((m, _)) = rref_mod(&selected, ncols, p) else { continue };
        if m.pivots != pivots {
            // Unlucky prime: rank dropped or pivots moved right.
            continue;
        }
        let pb = BigInt::from(p);
        // x ≡ a (mod M), x ≡ b (mod p):  x = a + M * ((b - a) * M^{-1} mod p)
        let minv = pow_mod(residue(&modulus, p), p - 2, p);
        for (arow, mrow) in acc.iter_mut().zip(&m.rows) {
            for (a, &b) in arow.iter_mut().zip(mrow) {
                let ar = residue(a, p);
                let t = (b + p - ar) % p * minv % p;
                if t != 0 {
                    *a += &modulus * BigInt::from(t);
                }
            }
        }
        modulus *= pb;
        used += 1;
    }
}

fn lift(acc: &[Vec<BigInt>], modulus: &BigInt, pivots: &[usize], ncols: usize) -> Option<Rref<BigRational>> {
    let mut rows = Vec::with_capacity(acc.len());
    for arow in acc {
        let mut row = Vec::new();
        for (c, a) in arow.iter().enumerate() {
            if !a.is_zero() {
                row.push((c, reconstruct(a, modulus)?));
            }
        }
        rows.push(row);
    }
    Some(Rref { ncols, rows, pivots: pivots.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rref, SparseMatrix};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn reconstruction_roundtrip() {
        let m = BigInt::from(2147483647u64) * BigInt::from(2147483629u64);
        for (n, d) in [(1, 2), (-7, 10), (13, 240), (-1, 3870720)] {
            let x = q(n, d);
            let r1 = rational_residue(&x, 2147483647).unwrap();
            let r2 = rational_residue(&x, 2147483629).unwrap();
            let p1 = BigInt::from(2147483647u64);
            let inv = pow_mod(2147483647 % 2147483629, 2147483627, 2147483629);
            let t = (r2 + 2147483629 - r1 % 2147483629) % 2147483629 * inv % 2147483629;
            let c = BigInt::from(r1) + p1 * BigInt::from(t);
            assert_eq!(reconstruct(&c, &m), Some(x));
        }
    }

    #[test]
    fn matches_exact_rref() {
        let dense: Vec<Vec<BigRational>> = (0..12)
            .map(|i| (0..9).map(|j| q(((i * 7 + j * 3) % 11) as i64 - 5, ((i + 2 * j) % 5 + 1) as i64)).collect())
            .collect();
        let m = SparseMatrix::from_dense(&dense);
        let exact = rref(&m);
        assert_eq!(rref_multimodular(&m.rows, m.ncols, 64), Some(exact));
    }
}
