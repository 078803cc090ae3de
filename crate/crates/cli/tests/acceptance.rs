//! Acceptance suite: one PASS/FAIL line per criterion. Every comparison is
//! exact rational equality; there are no floating-point tolerances.
//!
//! Exits nonzero when a criterion's outcome differs from the recorded one.
//! Set `TAUTREC_SKIP_GENUS4=1` to skip the one-minute genus-4 derivation.

#[path = "../../core/tests/support/graph_oracle.rs"]
mod graph_oracle;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};
use tautrec::graphs::{automorphism_count, canonical_form, enumerate_stable_graphs, StableGraph};
use tautrec::gwcalc::{
    expr_from_json, parse_expr, top_psi_identity, verify_identity, CorrelatorExpr, DeltaReading, Rule, RuleSet,
};
use tautrec::linalg::{membership, rref, rref_filtered, to_sparse, SparseMatrix};
use tautrec::pixton::relation_set;
use tautrec::strata::{ab_identity_coefficients, basis, pushforward, DecoratedStratum, Decoration, KappaVariant, StrataVector};
use tautrec::Rational;
use tautrec_cli::{run, Command, JobConfig, KappaSwitch};

const TOLERANCE: &str = "exact rational equality";

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn parse(s: &str) -> CorrelatorExpr {
    parse_expr(s, DeltaReading::Alt).unwrap()
}

struct Report {
    pass: bool,
    /// Whether every non-counted sub-check held.
    notes_ok: bool,
    detail: String,
    checks: Vec<(bool, String)>,
}

impl Report {
    fn new() -> Self {
        Report { pass: true, notes_ok: true, detail: String::new(), checks: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.pass &= ok;
        self.checks.push((ok, what.into()));
    }

    /// A sub-check reported but not counted toward the criterion.
    fn note(&mut self, ok: bool, what: impl Into<String>) {
        self.notes_ok &= ok;
        self.checks.push((ok, what.into()));
    }
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn derive(g: u32, r: u32, within: Option<PathBuf>, kappa: KappaSwitch) -> Value {
    let mut c = JobConfig::new(Command::Derive).with_gnr(g, 1, Some(r));
    c.within = within;
    c.kappa_variant = kappa;
    run(&c).unwrap().payload
}

fn solved_rhs(payload: &Value) -> Option<CorrelatorExpr> {
    let sol = payload.get("solution").filter(|s| !s.is_null())?;
    Some(expr_from_json(&sol["rhs"]).unwrap())
}

fn coefficient(e: &CorrelatorExpr, term: &str) -> Option<Rational> {
    let t = parse(term);
    let (k, _) = t.iter().next()?;
    e.get(k).cloned()
}

fn verify_spec(dir: &Path, name: &str, spec: Value) -> Value {
    let p = dir.join(name);
    fs::write(&p, spec.to_string()).unwrap();
    let mut c = JobConfig::new(Command::Verify);
    c.input = Some(p);
    run(&c).unwrap().payload
}

fn factorial(n: u64) -> Rational {
    (1..=n).fold(q(1, 1), |acc, k| acc * q(k as i64, 1))
}

fn criterion_1() -> Report {
    let mut rep = Report::new();
    let order = 50u64;
    let a: Vec<Rational> = (0..=order).map(|n| factorial(6 * n) / (factorial(3 * n) * factorial(2 * n))).collect();
    let b: Vec<Rational> = (0..=order).map(|n| a[n as usize].clone() * q(6 * n as i64 + 1, 6 * n as i64 - 1)).collect();
    let oracle_zero = (0..=order as usize).all(|m| {
        let mut c: Rational = (0..=m)
            .map(|i| {
                let sign = if (m - i) % 2 == 0 { 1 } else { -1 } + if i % 2 == 0 { 1 } else { -1 };
                a[i].clone() * b[m - i].clone() * q(sign, 1)
            })
            .sum();
        if m == 0 {
            c += q(2, 1);
        }
        c == q(0, 1)
    });
    rep.check(oracle_zero, "factorial oracle: every coefficient through T^50 vanishes");
    let lib = ab_identity_coefficients(50);
    rep.check(lib.len() == 51 && lib.iter().all(|c| *c == q(0, 1)), "library series: every coefficient through T^50 vanishes");
    rep
}

fn criterion_2() -> Report {
    let mut rep = Report::new();
    let mut pairs = Vec::new();
    for g in 0u32..=2 {
        for n in 0usize..=7 {
            if 2 * g as i64 - 2 + n as i64 > 0 && 3 * g as i64 - 3 + n as i64 <= 4 {
                pairs.push((g, n));
            }
        }
    }
    for (g, n) in pairs {
        let c = JobConfig::new(Command::Graphs).with_gnr(g, n, None);
        let count = run(&c).unwrap().payload["count"].as_u64().unwrap() as usize;
        let oracle = graph_oracle::count_stable_graphs(g, n);
        rep.check(count == oracle, format!("({g},{n}): {count} graphs, oracle {oracle}"));
    }
    let c11 = graph_oracle::count_stable_graphs(1, 1);
    let c20 = graph_oracle::count_stable_graphs(2, 0);
    rep.check(c11 == 2 && c20 == 7, format!("(1,1) -> {c11}, (2,0) -> {c20}"));
    rep
}

fn criterion_3() -> Report {
    let mut rep = Report::new();
    let p = derive(1, 1, None, KappaSwitch::Printed);
    let rhs = solved_rhs(&p);
    rep.check(rhs == Some(parse("1/24 <<W g^a g_a>>_0")), "<<T(W)>>_1 = 1/24 <<W g^a g_a>>_0");
    rep.detail = format!("{} kappa-free relations", p["kappa_free"]);
    rep
}

const G2_TERMS: [(&str, i64, i64); 5] = [
    ("<<g^a>>_1 <<{g_a o W}>>_1", 7, 10),
    ("<<g^a {g_a o W}>>_1", 1, 10),
    ("<<W {g^a o g_a}>>_1", -1, 240),
    ("<<W g^a g_a g^b>>_0 <<g_b>>_1", 13, 240),
    ("<<W g^a g_a g^b g_b>>_0", 1, 960),
];

fn criterion_4() -> Report {
    let mut rep = Report::new();
    let p = derive(2, 2, Some(data("genus2.rel")), KappaSwitch::Printed);
    rep.check(p["solution"]["unique"] == true, "unique within the displayed support");
    let rhs = solved_rhs(&p).unwrap_or_else(|| CorrelatorExpr::zero(2, 1));
    rep.check(rhs.len() == 5, format!("{} terms", rhs.len()));
    for (t, n, d) in G2_TERMS {
        let c = coefficient(&rhs, t);
        rep.check(c == Some(q(n, d)), format!("{n}/{d} on {t}"));
    }
    let per_vertex = derive(2, 2, Some(data("genus2.rel")), KappaSwitch::PerVertex);
    let pv = solved_rhs(&per_vertex);
    rep.check(pv.as_ref() != Some(&rhs), "per-vertex kappa variant does not reproduce it (switch fixed to printed)");
    rep
}

fn criterion_5() -> Report {
    let mut rep = Report::new();
    let p = derive(3, 3, Some(data("genus3.rel")), KappaSwitch::Printed);
    rep.check(p["solution"]["unique"] == true, "unique within the displayed support");
    let rhs = solved_rhs(&p).unwrap_or_else(|| CorrelatorExpr::zero(3, 1));
    let shown = Rule::stored(3).unwrap().rhs;
    rep.check(rhs == shown, format!("all {} displayed coefficients", shown.len()));
    for (t, n, d) in [
        ("<<T(g^a)>>_2 <<{g_a o W}>>_1", 41, 21),
        ("<<{W o g_a o g^a}>>_2", -13, 168),
        ("<<W g^a g_a g_b g^b g_m g^m>>_0", 1, 53760),
        ("<<W g_a g_b g_m>>_1 <<g^a g^b g^m>>_0", 1, 3780),
    ] {
        rep.check(coefficient(&rhs, t) == Some(q(n, d)), format!("{n}/{d} on {t}"));
    }
    rep
}

const G2_NORMAL: &str = "1/1152 <<D D W>>_0";
const G3_NORMAL: &str = "7/5760 <<{W o D o D}>>_1 + 11/2903040 <<W D D D>>_0 \
    + 19/967680 <<{W o D} D g^a g_a>>_0 + 1/120960 <<W {D o D} g^a g_a>>_0 \
    + 1/60480 <<{W o g^a} g_a D D>>_0 + 1/11520 <<{W o D o g^a} g_a g^b g_b>>_0";
const G3_DISPLAYED_RHS: &str = "1/3 <<W T^4(g^a)>>_2 <<T(g_a)>>_1 - 1/3 <<W T^5(g^a)>>_2 <<g_a>>_1";

fn g2_spec(genus1: &str) -> Value {
    json!({
        "lhs": "<<T^4(W)>>_2",
        "rhs": "1/2 <<W T^2(g^a)>>_1 <<T(g_a)>>_1",
        "normal_form": G2_NORMAL,
        "genus1": genus1,
    })
}

fn criterion_6(dir: &Path) -> Report {
    let mut rep = Report::new();
    let b = basis(2, 1, 4).unwrap();
    let rows = relation_set::<Rational>(2, 1, 4, KappaVariant::Printed).unwrap();
    let sparse: Vec<_> = rows.iter().map(|v| to_sparse(v, &b).unwrap()).collect();
    let (red, _) = rref_filtered(&sparse, b.len());
    let (lhs, rhs) = top_psi_identity(2, 0).unwrap();
    let mut strata = StrataVector::zero(2, 1);
    for (k, c) in (lhs - rhs).0.iter() {
        if k.decode().unwrap().within_dimension() {
            strata.add_term(k.clone(), c.clone());
        }
    }
    rep.check(
        membership(&strata, &red, &b).unwrap(),
        format!("strata form ({} terms after dropping classes zero by dimension) lies in the row space on (2,1), codim 4", strata.len()),
    );
    let v = verify_spec(dir, "g2.json", g2_spec("1/24"));
    rep.check(v["holds"] == true, "both sides reduce to the same normal form");
    rep.check(v["normal_form_matches"] == true, format!("normal form is {G2_NORMAL}"));
    let nf = expr_from_json(&v["lhs"]).unwrap();
    rep.check(nf.len() == 1 && nf.iter().next().unwrap().1 == &q(1, 1152), "single term with coefficient 1/1152");
    rep
}

fn criterion_7(dir: &Path) -> Report {
    let mut rep = Report::new();
    let v = verify_spec(
        dir,
        "g3.json",
        json!({"lhs": "<<T^6(W)>>_3", "rhs": G3_DISPLAYED_RHS, "normal_form": G3_NORMAL}),
    );
    rep.check(v["holds"] == true, "displayed right side reduces to the left side's normal form");
    rep.note(v["normal_form_matches"] == true, "left side normal form equals the displayed 6-term expression");
    let rules = RuleSet::standard();
    let omitted = parse("2/3 <<W T^2(g^a)>>_1 <<T^3(g_a)>>_2 - 2/3 <<W T(g^a)>>_1 <<T^4(g_a)>>_2");
    let residual = expr_from_json(&v["residual"]).unwrap();
    rep.note(residual == rules.reduce(&omitted).unwrap(), "residual is exactly the omitted (g1,g2) = (1,2) terms");
    let (l, r) = top_psi_identity(3, 0).unwrap();
    rep.note(verify_identity(&l, &r, &rules).unwrap().holds, "identity with all (g1,g2) terms holds");
    rep.detail = "displayed right side omits nonzero terms; see README".into();
    rep
}

fn criterion_8() -> Option<Report> {
    if std::env::var_os("TAUTREC_SKIP_GENUS4").is_some() {
        return None;
    }
    let mut rep = Report::new();
    let p = derive(4, 4, Some(data("genus4.rel")), KappaSwitch::Printed);
    rep.detail = "full derivation".into();
    rep.check(p["solution"]["unique"] == true, "unique within the displayed support");
    let rhs = solved_rhs(&p).unwrap_or_else(|| CorrelatorExpr::zero(4, 1));
    let shown = Rule::stored(4).unwrap().rhs;
    rep.check(rhs == shown, format!("all {} transcribed coefficients", shown.len()));
    rep.check(coefficient(&rhs, "<<g^a W g^b>>_0 <<T(g_a) T(g_b)>>_3") == Some(q(-1, 20)), "first: -1/20");
    rep.check(
        coefficient(&rhs, "<<W g^a g_a g^b g_b g^c g_c g^d g_d>>_0") == Some(q(1, 3870720)),
        "last: 1/3870720",
    );
    Some(rep)
}

fn relabel(g: &StableGraph, vp: &[usize], flip: &[bool], ep: &[usize]) -> StableGraph {
    let mut edges = vec![(0, 0); g.edges.len()];
    for (e, &(a, b)) in g.edges.iter().enumerate() {
        let (a, b) = (vp[a], vp[b]);
        edges[ep[e]] = if flip[e] { (b, a) } else { (a, b) };
    }
    let mut genera = vec![0; g.genera.len()];
    for (v, &x) in g.genera.iter().enumerate() {
        genera[vp[v]] = x;
    }
    StableGraph { genera, legs: g.legs.iter().map(|&v| vp[v]).collect(), edges }
}

/// Renames index letters and shuffles slots inside every correlator.
fn scramble(term: &str, rng: &mut StdRng) -> String {
    let letters: Vec<char> = "abcdefhijk".chars().collect();
    let mut renamed = letters.clone();
    renamed.shuffle(rng);
    let mut s = String::new();
    let mut chars = term.chars().peekable();
    while let Some(c) = chars.next() {
        s.push(c);
        if (c == '^' || c == '_') && chars.peek().is_some_and(|n| letters.contains(n)) {
            let n = chars.next().unwrap();
            s.push(renamed[letters.iter().position(|&l| l == n).unwrap()]);
        }
    }
    let mut out = String::new();
    let mut rest = s.as_str();
    while let Some(i) = rest.find("<<") {
        out.push_str(&rest[..i]);
        let j = rest[i..].find(">>").unwrap() + i;
        let mut slots = Vec::new();
        let (mut depth, mut cur) = (0, String::new());
        for ch in rest[i + 2..j].chars() {
            match ch {
                '{' | '(' => depth += 1,
                '}' | ')' => depth -= 1,
                _ => {}
            }
            if ch.is_whitespace() && depth == 0 {
                if !cur.is_empty() {
                    slots.push(std::mem::take(&mut cur));
                }
            } else {
                cur.push(ch);
            }
        }
        if !cur.is_empty() {
            slots.push(cur);
        }
        slots.shuffle(rng);
        out.push_str("<<");
        out.push_str(&slots.join(" "));
        rest = &rest[j..];
    }
    out.push_str(rest);
    out
}

fn corpus() -> Vec<String> {
    let mut out: Vec<String> = [
        "<<T^4(W)>>_2",
        "<<W T^2(g^a)>>_1 <<T(g_a)>>_1",
        "<<T^6(W)>>_3",
        "<<W T^4(g^a)>>_2 <<T(g_a)>>_1",
        "<<W T^5(g^a)>>_2 <<g_a>>_1",
        "<<T^2(W) V1 V2>>_1",
        "<<T(W) T(V1) V2 V3>>_0",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for g in [2, 3] {
        let text = Rule::stored_text(g).unwrap();
        out.extend(text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')).map(|l| l.to_string()));
    }
    out
}

fn criterion_9(dir: &Path) -> Report {
    let mut rep = Report::new();
    let mut rng = StdRng::seed_from_u64(2024);

    let b = basis(3, 1, 3).unwrap();
    let rows = relation_set::<Rational>(3, 1, 3, KappaVariant::Printed).unwrap();
    let sparse: Vec<_> = rows.iter().map(|v| to_sparse(v, &b).unwrap()).collect();
    let reduce_on = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| rref_filtered(&sparse, b.len()).0)
    };
    let one = reduce_on(1);
    rep.check(one == reduce_on(4) && one == reduce_on(7), "RREF identical on 1, 4 and 7 threads ((3,1), codim 3)");
    let again = rref_filtered(&one.rows, b.len()).0;
    let mut m = SparseMatrix::new(b.len());
    m.rows = one.rows.clone();
    rep.check(again == one && rref(&m) == one, "RREF of an RREF is itself (modular and exact paths)");

    let inner = basis(1, 2, 1).unwrap().strata();
    let outer = StableGraph::new(vec![1, 1], vec![0], vec![(0, 1)]).unwrap();
    let deco = Decoration::trivial(&outer);
    let push = |v: &StrataVector<Rational>| pushforward(v, &outer, 0, &deco).unwrap();
    let mut linear = true;
    for _ in 0..40 {
        let (i, j) = (rng.gen_range(0..inner.len()), rng.gen_range(0..inner.len()));
        let (ca, cb) = (q(rng.gen_range(-9..10), rng.gen_range(1..7)), q(rng.gen_range(-9..10), rng.gen_range(1..7)));
        let x = StrataVector::single(1, 2, inner[i].key().unwrap(), q(1, 1));
        let y = StrataVector::single(1, 2, inner[j].key().unwrap(), q(1, 1));
        let mut comb = x.scaled(&ca);
        comb.add_scaled(&y, &cb);
        let mut expect = push(&x).scaled(&ca);
        expect.add_scaled(&push(&y), &cb);
        linear &= push(&comb) == expect;
    }
    rep.check(linear, "pushforward is linear (40 random combinations)");
    let mut normalized = true;
    for (g, n) in [(2, 0), (1, 2), (0, 5), (2, 1)] {
        for gr in enumerate_stable_graphs(g, n).unwrap().iter() {
            for v in 0..gr.num_vertices() {
                let one = DecoratedStratum::undecorated(StableGraph::smooth(gr.genera[v], gr.valence(v))).key().unwrap();
                let unit = StrataVector::single(gr.genera[v], gr.valence(v), one, q(1, 1));
                let out = pushforward(&unit, gr, v, &Decoration::trivial(gr)).unwrap();
                let expect = StrataVector::single(g, n, DecoratedStratum::undecorated(gr.clone()).key().unwrap(), q(1, 1));
                normalized &= out == expect;
            }
        }
    }
    rep.check(normalized, "fundamental class pushes forward to its stratum with coefficient 1");

    let mut canon = true;
    for (g, n) in [(1, 2), (2, 1), (0, 5), (1, 3), (2, 0)] {
        for gr in enumerate_stable_graphs(g, n).unwrap().iter() {
            let c = canonical_form(gr);
            canon &= canonical_form(&c.graph).code == c.code;
            for _ in 0..6 {
                let mut vp: Vec<usize> = (0..gr.num_vertices()).collect();
                vp.shuffle(&mut rng);
                let mut ep: Vec<usize> = (0..gr.num_edges()).collect();
                ep.shuffle(&mut rng);
                let flip: Vec<bool> = (0..gr.num_edges()).map(|_| rng.gen()).collect();
                let h = relabel(gr, &vp, &flip, &ep);
                canon &= canonical_form(&h).code == c.code && automorphism_count(&h) == automorphism_count(gr);
            }
        }
    }
    rep.check(canon, "canonical form idempotent and invariant under relabeling, |Aut| preserved");

    let corpus = corpus();
    let mut invariant = true;
    for t in &corpus {
        for _ in 0..4 {
            invariant &= parse(t) == parse(&scramble(t, &mut rng));
        }
    }
    rep.check(invariant, format!("index renaming and slot permutation invariance ({} terms x 4)", corpus.len()));

    let rules = RuleSet::standard();
    let mut confluent = true;
    for t in &corpus {
        let e = parse(t);
        let nf = rules.reduce(&e).unwrap();
        for _ in 0..3 {
            confluent &= rules.reduce_with(&e, &mut |k| rng.gen_range(0..k)).unwrap() == nf;
        }
    }
    rep.check(confluent, "random redex order gives one normal form on the corpus");

    let v = verify_spec(dir, "perturbed.json", g2_spec("1/23"));
    rep.check(v["holds"] == false, "genus-2 identity fails with the genus-1 coefficient 1/23");
    rep
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    // Criterion 7 is expected to fail: the displayed genus-3 right side is incomplete.
    let expected_fail = [7];
    let criteria: Vec<(usize, &str, Box<dyn Fn() -> Option<Report>>)> = vec![
        (1, "series identity through T^50", Box::new(|| Some(criterion_1()))),
        (2, "graph counts match the brute-force oracle, 3g-3+n <= 4", Box::new(|| Some(criterion_2()))),
        (3, "genus-1 derivation gives 1/24", Box::new(|| Some(criterion_3()))),
        (4, "genus-2 derivation coefficient vector", Box::new(|| Some(criterion_4()))),
        (5, "genus-3 derivation coefficient list", Box::new(|| Some(criterion_5()))),
        (6, "top-psi identity at genus 2: membership and verification", Box::new(|| Some(criterion_6(dir.path())))),
        (7, "top-psi identity at genus 3 as displayed", Box::new(|| Some(criterion_7(dir.path())))),
        (8, "genus-4 derivation", Box::new(criterion_8)),
        (9, "property suites", Box::new(|| Some(criterion_9(dir.path())))),
    ];
    println!("acceptance (tolerance: {TOLERANCE})");
    let mut unexpected = Vec::new();
    for (i, name, f) in &criteria {
        let t = Instant::now();
        let Some(rep) = f() else {
            println!("criterion {i}: SKIP  {name} (TAUTREC_SKIP_GENUS4 set)");
            continue;
        };
        let status = if rep.pass { "PASS" } else { "FAIL" };
        let detail = if rep.detail.is_empty() { String::new() } else { format!("; {}", rep.detail) };
        println!("criterion {i}: {status}  {name} ({:.1} s{detail})", t.elapsed().as_secs_f64());
        for (ok, what) in &rep.checks {
            println!("    {} {what}", if *ok { "ok  " } else { "FAIL" });
        }
        if rep.pass == expected_fail.contains(i) || !rep.notes_ok {
            unexpected.push(*i);
        }
    }
    if unexpected.is_empty() {
        println!("all criteria match their recorded outcomes (expected failures: {expected_fail:?})");
    } else {
        println!("unexpected outcomes for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
