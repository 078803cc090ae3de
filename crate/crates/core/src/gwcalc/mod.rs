//! Correlator calculus on the big phase space.
//!
//! A product of correlators such as `<<W T(g^a)>>_1 <<g_a V1 V2>>_0` is stored
//! as a decorated graph: every factor is a vertex of its genus, every
//! contracted index pair is an edge, the insertions `W = V0, V1, V2, ...` are
//! legs `0, 1, 2, ...`, and `T^k` on an insertion is ψ^k on the corresponding
//! leg or half-edge. Quantum products `{X o Y} = <<X Y g^a>>_0 g_a` become
//! genus-0 vertices. Canonical strata keys then make terms invariant under
//! index renaming and slot permutations for free.
//!
//! Reduction first removes T from every vertex a rule applies to (genus 0
//! with at least three points, genus 1, and the stored genus-2/3 rules with
//! all their derivatives), then brings the genus-0 parts to a normal form
//! modulo WDVV.

mod json;
mod rules;
mod text;
mod wdvv;

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::One;

pub use json::{expr_from_json, expr_to_json};
pub use rules::{differentiate, Rule, RuleSet};
pub use text::{format_term, parse_expr};
pub use wdvv::wdvv_normalize;

use crate::error::{Error, Result};
use crate::strata::{DecoratedStratum, StrataVector, StratumKey};

/// How the shorthand `D` (Δ) is expanded when parsing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DeltaReading {
    /// `D` is the pair `g^x g_x` placed in the enclosing correlator.
    Contraction,
    /// `D` is the vector field `{g^x o g_x}`.
    #[default]
    Alt,
}

impl FromStr for DeltaReading {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contraction" => Ok(DeltaReading::Contraction),
            "alt" => Ok(DeltaReading::Alt),
            _ => Err(Error::invalid(format!("unknown delta reading {s:?} (expected contraction or alt)"))),
        }
    }
}

impl fmt::Display for DeltaReading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeltaReading::Contraction => "contraction",
            DeltaReading::Alt => "alt",
        })
    }
}

/// Formal rational combination of correlator products of total genus `g`
/// with insertions `W, V1, ..., V(n-1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorExpr(pub StrataVector<BigRational>);

impl CorrelatorExpr {
    pub fn zero(g: u32, n: usize) -> Self {
        CorrelatorExpr(StrataVector::zero(g, n))
    }

    pub fn genus(&self) -> u32 {
        self.0.g
    }

    pub fn legs(&self) -> usize {
        self.0.n
    }

    pub fn add_term(&mut self, key: StratumKey, c: BigRational) {
        self.0.add_term(key, c);
    }

    pub fn add_scaled(&mut self, other: &CorrelatorExpr, c: &BigRational) {
        self.0.add_scaled(&other.0, c);
    }

    pub fn scaled(&self, c: &BigRational) -> Self {
        CorrelatorExpr(self.0.scaled(c))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StratumKey, &BigRational)> {
        self.0.iter()
    }

    pub fn get(&self, key: &StratumKey) -> Option<&BigRational> {
        self.0.get(key)
    }

    /// Parses the text syntax of [`parse_expr`].
    pub fn parse(s: &str, reading: DeltaReading) -> Result<Self> {
        parse_expr(s, reading)
    }
}

impl std::ops::Sub for CorrelatorExpr {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        CorrelatorExpr(self.0 - rhs.0)
    }
}

impl std::ops::Add for CorrelatorExpr {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        CorrelatorExpr(self.0 + rhs.0)
    }
}

impl fmt::Display for CorrelatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let term = k.decode().map_err(|_| fmt::Error)?;
            write!(f, "{}", format_term(c, &term))?;
        }
        Ok(())
    }
}

/// Reads a κ-free relation `Σ c_i [Γ_i] = 0` as the correlator equation
/// `Σ c_i <<Γ_i>> = 0`; ψ on a point becomes T on that insertion.
pub fn translate(relation: &StrataVector<BigRational>) -> Result<CorrelatorExpr> {
    let mut out = CorrelatorExpr::zero(relation.g, relation.n);
    for (k, c) in relation.iter() {
        if k.has_kappa() {
            return Err(Error::invalid(format!("cannot translate a kappa-decorated stratum {k}")));
        }
        out.add_term(k.clone(), c.clone());
    }
    Ok(out)
}

/// Solves a translated relation for the term `target`: returns the right side
/// of `target = ...`, or `None` when `target` does not occur.
pub fn solve_term(relation: &CorrelatorExpr, target: &StratumKey) -> Option<CorrelatorExpr> {
    let c = relation.get(target)?.clone();
    let mut rhs = CorrelatorExpr::zero(relation.genus(), relation.legs());
    for (k, v) in relation.iter().filter(|(k, _)| *k != target) {
        rhs.add_term(k.clone(), -v.clone() / c.clone());
    }
    Some(rhs)
}

/// Key of the single correlator `<<T^k(W)>>_g`.
pub fn psi_power_key(g: u32, k: u32) -> StratumKey {
    DecoratedStratum::psi_power(g, 1, k).key_unchecked()
}

/// Both sides of
/// `<<T^(2g+r)(W)>>_g = Σ_{g1+g2=g, gi>0} Σ_{a+b=2g-1+r} (-1)^a g2/g <<W T^a(g^x)>>_g1 <<T^b(g_x)>>_g2`.
pub fn top_psi_identity(g: u32, r: u32) -> Result<(CorrelatorExpr, CorrelatorExpr)> {
    if g == 0 {
        return Err(Error::invalid("the identity needs genus at least 1"));
    }
    let wrap = |k: u32, x: &str| if k == 0 { x.to_string() } else { format!("T^{k}({x})") };
    let lhs = parse_expr(&format!("<<{}>>_{g}", wrap(2 * g + r, "W")), DeltaReading::Alt)?;
    let mut text = String::new();
    for g1 in 1..g {
        let g2 = g - g1;
        for a in 0..=2 * g - 1 + r {
            let b = 2 * g - 1 + r - a;
            let sign = if a % 2 == 0 { '+' } else { '-' };
            text.push_str(&format!(" {sign}{g2}/{g} <<W {}>>_{g1} <<{}>>_{g2}", wrap(a, "g^x"), wrap(b, "g_x")));
        }
    }
    let rhs = if text.is_empty() { CorrelatorExpr::zero(g, 1) } else { parse_expr(&text, DeltaReading::Alt)? };
    Ok((lhs, rhs))
}

/// Outcome of [`verify_identity`].
#[derive(Clone, Debug, PartialEq)]
pub struct Verification {
    pub holds: bool,
    pub lhs: CorrelatorExpr,
    pub rhs: CorrelatorExpr,
    /// Normal form of `lhs - rhs`.
    pub residual: CorrelatorExpr,
}

/// Reduces both sides to normal form and compares them.
pub fn verify_identity(lhs: &CorrelatorExpr, rhs: &CorrelatorExpr, rules: &RuleSet) -> Result<Verification> {
    if (lhs.genus(), lhs.legs()) != (rhs.genus(), rhs.legs()) && !lhs.is_zero() && !rhs.is_zero() {
        return Err(Error::invalid("the two sides have different genus or insertions"));
    }
    let l = rules.reduce(lhs)?;
    let r = rules.reduce(rhs)?;
    let residual = l.clone() - r.clone();
    Ok(Verification { holds: residual.is_zero(), lhs: l, rhs: r, residual })
}

fn one() -> BigRational {
    BigRational::one()
}
