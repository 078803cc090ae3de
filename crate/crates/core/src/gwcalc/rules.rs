//! Topological recursion rules and T-reduction.
//!
//! A rule for genus g states `<<T^k(W)>>_g = E_0(W)` (genus 0 is the
//! three-point statement `<<T(W) V1 V2>>_0 = 0`). Differentiating along
//! constant fields with `∇_V T(X) = T(∇_V X) - X o V` gives the templates
//!
//! ```text
//! <<T^k(W) V1 .. Vm>>_g = ∇_Vm E_{m-1} + Σ_{i<k} <<T^{k-1-i}({T^i(W) o Vm}) V1 .. V(m-1)>>_g
//! ```
//!
//! and every template is tensorial, so it applies to a vertex whose slot
//! carries `T^p(X)` with `p >= k` by gluing, with `W = T^{p-k}(X)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_rational::BigRational;
use num_traits::Zero;

use super::{one, parse_expr, wdvv_normalize, CorrelatorExpr, DeltaReading};
use crate::error::{Error, Result};
use crate::graphs::{Point, StableGraph};
use crate::strata::{substitute, DecoratedStratum, Decoration, StratumKey};

/// `<<T^power(W) V1 .. V_base>>_genus = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub genus: u32,
    pub power: u32,
    pub base: usize,
    pub rhs: CorrelatorExpr,
}

const GENUS2: &str = include_str!("../../data/genus2.rel");
const GENUS3: &str = include_str!("../../data/genus3.rel");
const GENUS4: &str = include_str!("../../data/genus4.rel");

impl Rule {
    /// `<<T(W) V1 V2>>_0 = 0`.
    pub fn genus0() -> Rule {
        Rule { genus: 0, power: 1, base: 2, rhs: CorrelatorExpr::zero(0, 3) }
    }

    /// `<<T(W)>>_1 = c <<W g^a g_a>>_0`.
    pub fn genus1(c: BigRational) -> Rule {
        let rhs = parse_expr("<<W g^a g_a>>_0", DeltaReading::Alt).expect("fixed text").scaled(&c);
        Rule { genus: 1, power: 1, base: 0, rhs }
    }

    /// `<<T^power(W)>>_genus = rhs` with `rhs` in the text syntax.
    pub fn from_text(genus: u32, power: u32, rhs: &str) -> Result<Rule> {
        let rhs = parse_expr(rhs, DeltaReading::Alt)?;
        if rhs.legs() != 1 || rhs.genus() != genus {
            return Err(Error::invalid(format!("rule right side must have genus {genus} and the single insertion W")));
        }
        Ok(Rule { genus, power, base: 0, rhs })
    }

    /// The shipped rule for genus 2, 3 or 4 (`T^g` on the left).
    pub fn stored(genus: u32) -> Result<Rule> {
        let text = match genus {
            2 => GENUS2,
            3 => GENUS3,
            4 => GENUS4,
            _ => return Err(Error::invalid(format!("no stored rule for genus {genus}"))),
        };
        Rule::from_text(genus, genus, text)
    }

    /// Source text of a stored rule.
    pub fn stored_text(genus: u32) -> Option<&'static str> {
        match genus {
            2 => Some(GENUS2),
            3 => Some(GENUS3),
            4 => Some(GENUS4),
            _ => None,
        }
    }
}

/// Derivative along a new constant field `V_n` (the next insertion).
pub fn differentiate(expr: &CorrelatorExpr) -> CorrelatorExpr {
    let mut out = CorrelatorExpr::zero(expr.genus(), expr.legs() + 1);
    for (k, c) in expr.iter() {
        let t = k.decode().expect("valid key");
        for (s, sign) in differentiate_term(&t) {
            let c = if sign { c.clone() } else { -c.clone() };
            out.add_term(s.key_unchecked(), c);
        }
    }
    out
}

fn differentiate_term(t: &DecoratedStratum) -> Vec<(DecoratedStratum, bool)> {
    let g = &t.graph;
    let new_leg = g.num_legs();
    let mut out = Vec::new();
    for v in 0..g.num_vertices() {
        let mut s = t.clone();
        s.graph.legs.push(v);
        s.deco.psi_legs.push(0);
        out.push((s, true));
    }
    let points: Vec<(Point, u32)> = (0..g.num_legs())
        .map(|i| (Point::Leg(i), t.deco.psi_legs[i]))
        .chain((0..g.num_half_edges()).map(|h| (Point::Half(h), t.deco.psi_half_edges[h])))
        .collect();
    for (p, psi) in points {
        let v = g.point_vertex(p);
        for i in 0..psi {
            let mut s = t.clone();
            let u = s.graph.genera.len();
            s.graph.genera.push(0);
            s.deco.kappa.push(Vec::new());
            match p {
                Point::Leg(j) => {
                    s.graph.legs[j] = u;
                    s.deco.psi_legs[j] = i;
                }
                Point::Half(h) => {
                    let e = &mut s.graph.edges[h / 2];
                    if h % 2 == 0 {
                        e.0 = u;
                    } else {
                        e.1 = u;
                    }
                    s.deco.psi_half_edges[h] = i;
                }
            }
            s.graph.legs.push(u);
            s.deco.psi_legs.push(0);
            s.graph.edges.push((v, u));
            s.deco.psi_half_edges.extend([psi - 1 - i, 0]);
            debug_assert_eq!(s.graph.num_legs(), new_leg + 1);
            out.push((s, false));
        }
    }
    out
}

/// A set of rules with cached templates and normal forms.
#[derive(Debug)]
pub struct RuleSet {
    rules: BTreeMap<u32, Rule>,
    templates: Mutex<HashMap<(u32, usize), Arc<CorrelatorExpr>>>,
    normal: Mutex<HashMap<StratumKey, Arc<CorrelatorExpr>>>,
}

impl Clone for RuleSet {
    fn clone(&self) -> Self {
        RuleSet::new(self.rules.values().cloned().collect())
    }
}

/// Where a rule applies: vertex, position of the `W` point among its points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Redex {
    vertex: usize,
    point: usize,
}

impl RuleSet {
    pub fn new(rules: Vec<Rule>) -> RuleSet {
        RuleSet {
            rules: rules.into_iter().map(|r| (r.genus, r)).collect(),
            templates: Mutex::new(HashMap::new()),
            normal: Mutex::new(HashMap::new()),
        }
    }

    /// Genus 0 and 1 rules (with `c` for the genus-1 coefficient) and the
    /// stored genus-2 and genus-3 rules.
    pub fn standard_with_genus1(c: BigRational) -> RuleSet {
        let mut rules = vec![Rule::genus0(), Rule::genus1(c)];
        for g in [2, 3] {
            rules.push(Rule::stored(g).expect("shipped rule parses"));
        }
        RuleSet::new(rules)
    }

    pub fn standard() -> RuleSet {
        RuleSet::standard_with_genus1(BigRational::new(1.into(), 24.into()))
    }

    /// Adds or replaces a rule.
    pub fn with_rule(mut self, rule: Rule) -> RuleSet {
        self.rules.insert(rule.genus, rule);
        RuleSet::new(std::mem::take(&mut self.rules).into_values().collect())
    }

    pub fn rule(&self, genus: u32) -> Option<&Rule> {
        self.rules.get(&genus)
    }

    pub fn max_genus(&self) -> u32 {
        self.rules.keys().copied().max().unwrap_or(0)
    }

    fn redexes(&self, t: &DecoratedStratum) -> Vec<Redex> {
        let g = &t.graph;
        let mut out = Vec::new();
        for v in 0..g.num_vertices() {
            let Some(rule) = self.rules.get(&g.genera[v]) else { continue };
            let pts = g.points_at(v);
            if pts.len() < rule.base + 1 {
                continue;
            }
            for (i, p) in pts.iter().enumerate() {
                if psi_at(t, *p) >= rule.power {
                    out.push(Redex { vertex: v, point: i });
                }
            }
        }
        out
    }

    /// The default redex: first reducible vertex, the point with the highest
    /// power (first on ties).
    fn first_redex(&self, t: &DecoratedStratum) -> Option<Redex> {
        let all = self.redexes(t);
        let v = all.first()?.vertex;
        let pts = t.graph.points_at(v);
        all.into_iter()
            .filter(|r| r.vertex == v)
            .max_by(|a, b| psi_at(t, pts[a.point]).cmp(&psi_at(t, pts[b.point])).then(b.point.cmp(&a.point)))
    }

    /// `<<T^k(W) V1 .. Vm>>_g`, T-reduced, as an expression in legs `W, V1..Vm`.
    pub fn template(&self, genus: u32, m: usize) -> Result<Arc<CorrelatorExpr>> {
        if let Some(t) = self.templates.lock().unwrap().get(&(genus, m)) {
            return Ok(t.clone());
        }
        let rule = self.rules.get(&genus).ok_or_else(|| Error::invalid(format!("no rule for genus {genus}")))?;
        let raw = if m < rule.base {
            return Err(Error::invalid(format!("genus {genus} rule needs at least {} other insertions", rule.base)));
        } else if m == rule.base {
            if rule.rhs.legs() != m + 1 {
                return Err(Error::invalid("rule right side has the wrong number of insertions"));
            }
            rule.rhs.clone()
        } else {
            let prev = self.template(genus, m - 1)?;
            let mut e = differentiate(&prev);
            let k = rule.power;
            for i in 0..k {
                // genus-g vertex with V1..V(m-1), joined to a genus-0 vertex with (T^i W, Vm)
                let mut legs = vec![1usize; m + 1];
                legs[0] = 1;
                for l in legs.iter_mut().take(m).skip(1) {
                    *l = 0;
                }
                legs[m] = 1;
                let graph = StableGraph { genera: vec![genus, 0], legs, edges: vec![(0, 1)] };
                let mut psi_legs = vec![0; m + 1];
                psi_legs[0] = i;
                let deco = Decoration { kappa: vec![Vec::new(); 2], psi_legs, psi_half_edges: vec![k - 1 - i, 0] };
                e.add_term(DecoratedStratum { graph, deco }.key_unchecked(), one());
            }
            e
        };
        let reduced = Arc::new(self.reduce_t(&raw)?);
        self.templates.lock().unwrap().insert((genus, m), reduced.clone());
        Ok(reduced)
    }

    /// Applies the rule at `r` to the term `t`.
    fn apply(&self, t: &DecoratedStratum, r: Redex) -> Result<Vec<(DecoratedStratum, BigRational)>> {
        let g = &t.graph;
        let genus = g.genera[r.vertex];
        let rule = &self.rules[&genus];
        let pts = g.points_at(r.vertex);
        let m = pts.len() - 1;
        let template = self.template(genus, m)?;
        // template leg -> position among the points at the vertex
        let mut pos = Vec::with_capacity(m + 1);
        pos.push(r.point);
        pos.extend((0..pts.len()).filter(|&i| i != r.point));
        let mut outer_deco = t.deco.clone();
        match pts[r.point] {
            Point::Leg(i) => outer_deco.psi_legs[i] -= rule.power,
            Point::Half(h) => outer_deco.psi_half_edges[h] -= rule.power,
        }
        let mut out = Vec::with_capacity(template.len());
        for (k, c) in template.iter() {
            let inner = k.decode()?;
            let mut legs = vec![0; m + 1];
            let mut psi_legs = vec![0; m + 1];
            for (tl, &p) in pos.iter().enumerate() {
                legs[p] = inner.graph.legs[tl];
                psi_legs[p] = inner.deco.psi_legs[tl];
            }
            let graph = StableGraph { genera: inner.graph.genera.clone(), legs, edges: inner.graph.edges.clone() };
            let deco = Decoration { psi_legs, ..inner.deco.clone() };
            let (sg, sd) = substitute(g, &outer_deco, r.vertex, &graph, &deco);
            out.push((DecoratedStratum { graph: sg, deco: sd }, c.clone()));
        }
        Ok(out)
    }

    fn check_scope(&self, t: &DecoratedStratum) -> Result<()> {
        let max = self.max_genus();
        let g = &t.graph;
        for v in 0..g.num_vertices() {
            if g.genera[v] > max && g.points_at(v).iter().any(|p| psi_at(t, *p) > 0) {
                return Err(Error::invalid(format!(
                    "T at a genus-{} correlator is outside the rule set: {}",
                    g.genera[v],
                    super::format_term(&one(), t)
                )));
            }
        }
        Ok(())
    }

    /// T-normal form of one term (memoized).
    fn normal_t(&self, key: &StratumKey) -> Result<Arc<CorrelatorExpr>> {
        if let Some(e) = self.normal.lock().unwrap().get(key) {
            return Ok(e.clone());
        }
        let t = key.decode()?;
        let (g, n) = (t.graph.genus(), t.graph.num_legs());
        let mut out = CorrelatorExpr::zero(g, n);
        match self.first_redex(&t) {
            None => {
                self.check_scope(&t)?;
                out.add_term(key.clone(), one());
            }
            Some(r) => {
                for (s, c) in self.apply(&t, r)? {
                    let sub = self.normal_t(&s.key_unchecked())?;
                    out.add_scaled(&sub, &c);
                }
            }
        }
        let out = Arc::new(out);
        self.normal.lock().unwrap().insert(key.clone(), out.clone());
        Ok(out)
    }

    /// Removes every T a rule applies to.
    pub fn reduce_t(&self, expr: &CorrelatorExpr) -> Result<CorrelatorExpr> {
        let mut out = CorrelatorExpr::zero(expr.genus(), expr.legs());
        for (k, c) in expr.iter() {
            out.add_scaled(&*self.normal_t(k)?, c);
        }
        Ok(out)
    }

    /// Full normal form: T-reduction followed by WDVV normalization.
    pub fn reduce(&self, expr: &CorrelatorExpr) -> Result<CorrelatorExpr> {
        wdvv_normalize(&self.reduce_t(expr)?)
    }

    /// T-reduction where `choose(n)` picks which of the `n` available redexes
    /// of a term to apply next; used to check that the normal form does not
    /// depend on rule order.
    pub fn reduce_with(&self, expr: &CorrelatorExpr, choose: &mut dyn FnMut(usize) -> usize) -> Result<CorrelatorExpr> {
        let mut pending: BTreeMap<StratumKey, BigRational> = expr.iter().map(|(k, c)| (k.clone(), c.clone())).collect();
        let mut done = CorrelatorExpr::zero(expr.genus(), expr.legs());
        let mut steps = 0usize;
        while let Some((k, c)) = pending.pop_first() {
            steps += 1;
            if steps > 10_000_000 {
                return Err(Error::inconsistent("reduction step budget exhausted"));
            }
            let t = k.decode()?;
            let all = self.redexes(&t);
            if all.is_empty() {
                self.check_scope(&t)?;
                done.add_term(k, c);
                continue;
            }
            let r = all[choose(all.len()) % all.len()];
            for (s, d) in self.apply(&t, r)? {
                let e = pending.entry(s.key_unchecked()).or_insert_with(BigRational::zero);
                *e += &c * d;
            }
            pending.retain(|_, v| !v.is_zero());
        }
        wdvv_normalize(&done)
    }
}

fn psi_at(t: &DecoratedStratum, p: Point) -> u32 {
    match p {
        Point::Leg(i) => t.deco.psi_legs[i],
        Point::Half(h) => t.deco.psi_half_edges[h],
    }
}
