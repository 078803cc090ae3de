//! Plain-text syntax for correlator expressions.
//!
//! ```text
//! +7/10 <<g^a>>_1 <<{g_a o W}>>_1
//! -1/252 <<W T(g_a o g^a)>>_2
//! +1/1152 <<D D W>>_0
//! ```
//!
//! A term is an optional signed rational followed by factors `<<...>>_g`.
//! Slots are `W`, `V1`, `V2`, ..., indices `g^x` / `g_x` (each name used once
//! up and once down per term), `T(s)`, `T^k(s)`, quantum products
//! `{s o s o ...}` (left nested) and the shorthand `D`. Inside `T(...)` a bare
//! chain `s o s` is also a quantum product. Terms may be split over lines; `#`
//! starts a comment.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Signed;

use super::{CorrelatorExpr, DeltaReading};
use crate::error::{Error, Result};
use crate::graphs::StableGraph;
use crate::scalar::{format_rational, parse_rational};
use crate::strata::{DecoratedStratum, Decoration};

#[derive(Clone, Debug, PartialEq)]
enum Slot {
    Leg(usize),
    Index(String, bool),
    Delta,
    Product(Vec<Slot>),
    T(u32, Box<Slot>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Open,
    Close(u32),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Circ,
    Sign(bool),
    Coeff(BigRational),
    Word(String),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    let err = |m: String| Error::Parse(m);
    while i < chars.len() {
        let c = chars[i];
        match c {
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_whitespace() => i += 1,
            '<' if chars.get(i + 1) == Some(&'<') => {
                out.push(Tok::Open);
                i += 2;
            }
            '>' if chars.get(i + 1) == Some(&'>') => {
                i += 2;
                if chars.get(i) != Some(&'_') {
                    return Err(err("expected _g after >>".into()));
                }
                i += 1;
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let g: String = chars[start..i].iter().collect();
                out.push(Tok::Close(g.parse().map_err(|_| err(format!("bad genus {g:?}")))?));
            }
            '{' => {
                out.push(Tok::LBrace);
                i += 1;
            }
            '}' => {
                out.push(Tok::RBrace);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '+' | '-' => {
                out.push(Tok::Sign(c == '-'));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '/') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push(Tok::Coeff(parse_rational(&text)?));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '^' || chars[i] == '_') {
                    i += 1;
                }
                let w: String = chars[start..i].iter().collect();
                if w == "o" {
                    out.push(Tok::Circ);
                } else {
                    out.push(Tok::Word(w));
                }
            }
            _ => return Err(err(format!("unexpected character {c:?}"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        match self.next() {
            Some(ref x) if *x == t => Ok(()),
            other => Err(Error::Parse(format!("expected {t:?}, found {other:?}"))),
        }
    }

    /// `slot (o slot)*`
    fn chain(&mut self) -> Result<Slot> {
        let mut items = vec![self.slot()?];
        while self.peek() == Some(&Tok::Circ) {
            self.pos += 1;
            items.push(self.slot()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Slot::Product(items) })
    }

    fn slot(&mut self) -> Result<Slot> {
        match self.next() {
            Some(Tok::LBrace) => {
                let s = self.chain()?;
                self.expect(Tok::RBrace)?;
                match s {
                    Slot::Product(_) => Ok(s),
                    _ => Err(Error::Parse("braces must contain a quantum product".into())),
                }
            }
            Some(Tok::Word(w)) => self.word(&w),
            other => Err(Error::Parse(format!("expected an insertion, found {other:?}"))),
        }
    }

    fn word(&mut self, w: &str) -> Result<Slot> {
        if w == "W" {
            return Ok(Slot::Leg(0));
        }
        if w == "D" {
            return Ok(Slot::Delta);
        }
        if let Some(num) = w.strip_prefix('V') {
            let i: usize = num.parse().map_err(|_| Error::Parse(format!("bad insertion {w:?}")))?;
            if i == 0 {
                return Err(Error::Parse("insertions are numbered from V1".into()));
            }
            return Ok(Slot::Leg(i));
        }
        if let Some(name) = w.strip_prefix("g^") {
            return Ok(Slot::Index(name.to_string(), true));
        }
        if let Some(name) = w.strip_prefix("g_") {
            return Ok(Slot::Index(name.to_string(), false));
        }
        if w == "T" || w.starts_with("T^") {
            let k: u32 = if w == "T" {
                1
            } else {
                w[2..].parse().map_err(|_| Error::Parse(format!("bad power in {w:?}")))?
            };
            self.expect(Tok::LParen)?;
            let inner = self.chain()?;
            self.expect(Tok::RParen)?;
            return Ok(Slot::T(k, Box::new(inner)));
        }
        Err(Error::Parse(format!("unknown insertion {w:?}")))
    }
}

#[derive(Clone, Debug)]
enum Pending {
    Leg(usize),
    Index(String, bool),
    /// End of an internal edge: (edge id, which end).
    End(usize, bool),
}

#[derive(Default)]
struct Builder {
    genera: Vec<u32>,
    points: Vec<Vec<(Pending, u32)>>,
    internal_edges: usize,
    fresh: usize,
}

impl Builder {
    fn vertex(&mut self, g: u32) -> usize {
        self.genera.push(g);
        self.points.push(Vec::new());
        self.genera.len() - 1
    }

    fn place(&mut self, s: &Slot, v: usize, psi: u32, reading: DeltaReading) -> Result<()> {
        match s {
            Slot::Leg(i) => self.points[v].push((Pending::Leg(*i), psi)),
            Slot::Index(n, up) => self.points[v].push((Pending::Index(n.clone(), *up), psi)),
            Slot::T(k, inner) => self.place(inner, v, psi + k, reading)?,
            Slot::Delta => {
                let name = format!("#{}", self.fresh);
                self.fresh += 1;
                let pair = [Slot::Index(name.clone(), true), Slot::Index(name, false)];
                match reading {
                    DeltaReading::Alt => self.place(&Slot::Product(pair.to_vec()), v, psi, reading)?,
                    DeltaReading::Contraction => {
                        if psi > 0 {
                            return Err(Error::Parse("T(D) needs the alt reading of D".into()));
                        }
                        for p in &pair {
                            self.place(p, v, 0, reading)?;
                        }
                    }
                }
            }
            Slot::Product(items) => {
                let u = self.vertex(0);
                let e = self.internal_edges;
                self.internal_edges += 1;
                self.points[v].push((Pending::End(e, false), psi));
                self.points[u].push((Pending::End(e, true), 0));
                let (last, init) = items.split_last().expect("product has items");
                if init.len() == 1 {
                    self.place(&init[0], u, 0, reading)?;
                } else {
                    self.place(&Slot::Product(init.to_vec()), u, 0, reading)?;
                }
                self.place(last, u, 0, reading)?;
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<DecoratedStratum> {
        let mut legs: BTreeMap<usize, (usize, u32)> = BTreeMap::new();
        let mut ends: BTreeMap<(bool, String), Vec<(usize, u32, bool)>> = BTreeMap::new();
        for (v, pts) in self.points.iter().enumerate() {
            for (p, psi) in pts {
                match p {
                    Pending::Leg(i) => {
                        if legs.insert(*i, (v, *psi)).is_some() {
                            return Err(Error::Parse(format!("insertion {} appears twice", leg_name(*i))));
                        }
                    }
                    Pending::Index(name, up) => ends.entry((false, name.clone())).or_default().push((v, *psi, *up)),
                    Pending::End(e, first) => ends.entry((true, format!("{e:08}"))).or_default().push((v, *psi, *first)),
                }
            }
        }
        if legs.keys().copied().ne(0..legs.len()) {
            return Err(Error::Parse("insertions must be W, V1, ..., Vk without gaps".into()));
        }
        let mut edges = Vec::new();
        let mut psi_half_edges = Vec::new();
        for ((internal, name), list) in &ends {
            let ok = list.len() == 2 && (*internal || list[0].2 != list[1].2);
            if !ok {
                return Err(Error::Parse(format!("index {name} must occur once up and once down")));
            }
            let (a, b) = if list[0].2 { (list[0], list[1]) } else { (list[1], list[0]) };
            edges.push((a.0, b.0));
            psi_half_edges.extend([a.1, b.1]);
        }
        let graph = StableGraph {
            genera: self.genera,
            legs: legs.values().map(|x| x.0).collect(),
            edges,
        };
        graph.validate()?;
        let deco = Decoration {
            kappa: vec![Vec::new(); graph.num_vertices()],
            psi_legs: legs.values().map(|x| x.1).collect(),
            psi_half_edges,
        };
        DecoratedStratum::new(graph, deco)
    }
}

fn leg_name(i: usize) -> String {
    if i == 0 {
        "W".into()
    } else {
        format!("V{i}")
    }
}

/// Parses a sum of terms. All terms must share total genus and insertions.
pub fn parse_expr(s: &str, reading: DeltaReading) -> Result<CorrelatorExpr> {
    let mut p = Parser { toks: tokenize(s)?, pos: 0 };
    let mut terms: Vec<(BigRational, DecoratedStratum)> = Vec::new();
    while p.peek().is_some() {
        let negative = match p.peek() {
            Some(Tok::Sign(neg)) => {
                let neg = *neg;
                p.pos += 1;
                neg
            }
            _ => false,
        };
        let mut coeff = match p.peek() {
            Some(Tok::Coeff(c)) => {
                let c = c.clone();
                p.pos += 1;
                c
            }
            _ => BigRational::from_integer(1.into()),
        };
        if negative {
            coeff = -coeff;
        }
        let mut b = Builder::default();
        let mut factors = 0;
        while p.peek() == Some(&Tok::Open) {
            p.pos += 1;
            let mut slots = Vec::new();
            while !matches!(p.peek(), Some(Tok::Close(_)) | None) {
                slots.push(p.slot()?);
            }
            let Some(Tok::Close(g)) = p.next() else {
                return Err(Error::Parse("unterminated correlator".into()));
            };
            let v = b.vertex(g);
            for s in &slots {
                b.place(s, v, 0, reading)?;
            }
            factors += 1;
        }
        if factors == 0 {
            return Err(Error::Parse(format!("expected a correlator, found {:?}", p.peek())));
        }
        terms.push((coeff, b.finish()?));
    }
    let Some((_, first)) = terms.first() else {
        return Err(Error::Parse("empty expression".into()));
    };
    let (g, n) = (first.graph.genus(), first.graph.num_legs());
    let mut out = CorrelatorExpr::zero(g, n);
    for (c, t) in terms {
        if (t.graph.genus(), t.graph.num_legs()) != (g, n) {
            return Err(Error::Parse(format!("term of genus {} with {} insertions in a genus {g} expression with {n}", t.graph.genus(), t.graph.num_legs())));
        }
        out.add_term(t.key_unchecked(), c);
    }
    Ok(out)
}

fn index_name(e: usize) -> String {
    const LETTERS: &[u8] = b"abcdefhijklmnpqrstuvwxyz";
    let l = LETTERS[e % LETTERS.len()] as char;
    if e < LETTERS.len() {
        l.to_string()
    } else {
        format!("{l}{}", e / LETTERS.len())
    }
}

fn wrap(name: String, k: u32) -> String {
    match k {
        0 => name,
        1 => format!("T({name})"),
        _ => format!("T^{k}({name})"),
    }
}

/// One term in the text syntax, with flat factors (no quantum products).
pub fn format_term(c: &BigRational, t: &DecoratedStratum) -> String {
    let sign = if c.is_negative() { "-" } else { "+" };
    let mut s = format!("{sign}{}", format_rational(&c.abs()));
    let g = &t.graph;
    for v in 0..g.num_vertices() {
        let mut slots = Vec::new();
        for (i, &w) in g.legs.iter().enumerate() {
            if w == v {
                slots.push(wrap(leg_name(i), t.deco.psi_legs[i]));
            }
        }
        for h in 0..g.num_half_edges() {
            if g.half_edge_vertex(h) == v {
                let arrow = if h % 2 == 0 { '^' } else { '_' };
                slots.push(wrap(format!("g{arrow}{}", index_name(h / 2)), t.deco.psi_half_edges[h]));
            }
        }
        s.push_str(&format!(" <<{}>>_{}", slots.join(" "), g.genera[v]));
    }
    s
}
