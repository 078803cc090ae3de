use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::zeta::{Monomial, ZetaPoly};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// (6n)! / ((3n)! (2n)!)
pub fn a_coeff(n: u32) -> BigRational {
    let n = n as u64;
    BigRational::new(factorial(6 * n), factorial(3 * n) * factorial(2 * n))
}

/// (6n+1)/(6n-1) · (6n)! / ((3n)! (2n)!)
pub fn b_coeff(n: u32) -> BigRational {
    let m = 6 * n as i64;
    a_coeff(n) * BigRational::new(BigInt::from(m + 1), BigInt::from(m - 1))
}

fn univariate<S: Scalar>(order: u32, f: fn(u32) -> BigRational) -> ZetaPoly<S> {
    let mut p = ZetaPoly::zero(order, 0, 0);
    for n in 0..=order {
        p.add_term(Monomial { t: n, psi: vec![], kappa: vec![], zeta: 0 }, S::from_rational(&f(n)));
    }
    p
}

/// A(T) truncated above T^order.
pub fn series_a<S: Scalar>(order: u32) -> ZetaPoly<S> {
    univariate(order, a_coeff)
}

/// B(T) truncated above T^order.
pub fn series_b<S: Scalar>(order: u32) -> ZetaPoly<S> {
    univariate(order, b_coeff)
}

/// Coefficients of A(T)B(-T) + A(-T)B(T) + 2 up to T^order; all zero.
pub fn ab_identity_coefficients(order: u32) -> Vec<BigRational> {
    let a: Vec<BigRational> = (0..=order).map(a_coeff).collect();
    let b: Vec<BigRational> = (0..=order).map(b_coeff).collect();
    (0..=order as usize)
        .map(|n| {
            let mut c: BigRational = (0..=n)
                .map(|i| {
                    let j = n - i;
                    let sign = (if j % 2 == 0 { 1 } else { -1 }) + (if i % 2 == 0 { 1 } else { -1 });
                    &a[i] * &b[j] * BigRational::from_integer(sign.into())
                })
                .sum();
            if n == 0 {
                c += BigRational::from_integer(2.into());
            }
            c
        })
        .collect()
}

fn monomial(n_psi: usize, n_vertices: usize, t: u32, psi: &[(usize, u32)], zeta: u64) -> Monomial {
    let mut m = Monomial::one(n_psi, n_vertices);
    m.t = t;
    for &(i, e) in psi {
        m.psi[i] += e;
    }
    m.zeta = zeta;
    m
}

/// Ĉ_a(ψT, ζ_v): T^i A(ζψT)·(ψ)^i for a = 3i, and ζ T^i B(ζψT)·(ψ)^i for a = 3i + 1.
pub fn chat<S: Scalar>(
    a: u32,
    psi: usize,
    vertex: usize,
    order: u32,
    n_psi: usize,
    n_vertices: usize,
) -> Result<ZetaPoly<S>> {
    let i = a / 3;
    let z = 1u64 << vertex;
    let mut p = ZetaPoly::zero(order, n_psi, n_vertices);
    match a % 3 {
        0 => {
            for n in 0..=order.saturating_sub(i) {
                let zeta = if n % 2 == 1 { z } else { 0 };
                p.add_term(monomial(n_psi, n_vertices, n + i, &[(psi, n + i)], zeta), S::from_rational(&a_coeff(n)));
            }
        }
        1 => {
            for n in 0..=order.saturating_sub(i) {
                let zeta = if n % 2 == 0 { z } else { 0 };
                p.add_term(monomial(n_psi, n_vertices, n + i, &[(psi, n + i)], zeta), S::from_rational(&b_coeff(n)));
            }
        }
        _ => return Err(Error::invalid(format!("insertion index {a} is 2 mod 3"))),
    }
    Ok(p)
}

/// The edge factor Δ_e for half-edge symbols `psi1`, `psi2` at vertices `v1`, `v2`.
///
/// The numerator is divided by (ψ′ + ψ″)T with synthetic division in each
/// T-degree and ζ-word; a nonzero remainder is reported as an inconsistency.
pub fn edge_factor<S: Scalar>(
    psi1: usize,
    psi2: usize,
    v1: usize,
    v2: usize,
    order: u32,
    n_psi: usize,
    n_vertices: usize,
) -> Result<ZetaPoly<S>> {
    let (z1, z2) = (1u64 << v1, 1u64 << v2);
    let parity = |z: u64, k: u32| if k % 2 == 1 { z } else { 0 };
    // numerator[(degree, zeta)][m] = coefficient of ψ′^m ψ″^(degree-m)
    let mut num: BTreeMap<(u32, u64), Vec<S>> = BTreeMap::new();
    let top = order + 1;
    let a: Vec<S> = (0..=top).map(|n| S::from_rational(&a_coeff(n))).collect();
    let b: Vec<S> = (0..=top).map(|n| S::from_rational(&b_coeff(n))).collect();
    let mut add = |d: u32, zeta: u64, m: u32, c: S| {
        let row = num.entry((d, zeta)).or_insert_with(|| vec![S::zero(); d as usize + 1]);
        row[m as usize] += c;
    };
    for d in 0..=top {
        for m in 0..=d {
            let k = d - m;
            // A(ζ′ψ′T) ζ″ B(ζ″ψ″T)
            add(d, parity(z1, m) ^ parity(z2, k + 1), m, a[m as usize].clone() * b[k as usize].clone());
            // ζ′ B(ζ′ψ′T) A(ζ″ψ″T)
            add(d, parity(z1, m + 1) ^ parity(z2, k), m, b[m as usize].clone() * a[k as usize].clone());
        }
    }
    add(0, z1, 0, S::one());
    add(0, z2, 0, S::one());
    let mut out = ZetaPoly::zero(order, n_psi, n_vertices);
    for ((d, zeta), c) in num {
        if d == 0 {
            if !c[0].is_negligible() {
                return Err(Error::inconsistent("edge factor numerator has a constant term"));
            }
            continue;
        }
        let mut q: Vec<S> = Vec::with_capacity(d as usize);
        for j in 0..d as usize {
            let prev = if j == 0 { S::zero() } else { q[j - 1].clone() };
            q.push(c[j].clone() - prev);
        }
        if !(c[d as usize].clone() - q[d as usize - 1].clone()).is_negligible() {
            return Err(Error::inconsistent(format!("edge factor division not exact at T^{d}")));
        }
        for (j, qj) in q.into_iter().enumerate() {
            let m = monomial(n_psi, n_vertices, d - 1, &[(psi1, j as u32), (psi2, d - 1 - j as u32)], zeta);
            out.add_term(m, qj);
        }
    }
    Ok(out)
}
