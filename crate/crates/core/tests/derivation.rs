use num_rational::BigRational;
use proptest::prelude::*;

use tautrec::graphs::{automorphism_count, automorphisms, canonical_form, enumerate_stable_graphs, StableGraph};
use tautrec::gwcalc::{parse_expr, psi_power_key, solve_term, translate, DeltaReading, Rule};
use tautrec::linalg::{kappa_free_relations, membership, rref_filtered, solve_for, solve_within_rational, to_sparse};
use tautrec::pixton::relation_set;
use tautrec::strata::{basis, pushforward, DecoratedStratum, Decoration, KappaVariant, StrataVector};
use tautrec::Rational;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn row_space(g: u32, n: usize, r: u32) -> (std::sync::Arc<tautrec::strata::Basis>, tautrec::linalg::Rref<Rational>) {
    let b = basis(g, n, r).unwrap();
    let rows = relation_set::<Rational>(g, n, r, KappaVariant::Printed).unwrap();
    let sparse: Vec<_> = rows.iter().map(|v| to_sparse(v, &b).unwrap()).collect();
    let (red, _) = rref_filtered(&sparse, b.len());
    (b, red)
}

#[test]
fn genus_one_psi_is_a_twenty_fourth_of_the_loop() {
    let (b, red) = row_space(1, 1, 1);
    let rels = kappa_free_relations(&red, &b);
    let target = psi_power_key(1, 1);
    let rel = solve_for(&target, &rels).unwrap();
    let rhs = solve_term(&translate(&rel).unwrap(), &target).unwrap();
    assert_eq!(rhs, parse_expr("1/24 <<W g^a g_a>>_0", DeltaReading::Alt).unwrap());
}

fn restricted(g: u32) -> (tautrec::gwcalc::CorrelatorExpr, bool) {
    let rows = relation_set::<Rational>(g, 1, g, KappaVariant::Printed).unwrap();
    let rule = Rule::stored(g).unwrap();
    let target = psi_power_key(g, g);
    let allowed: Vec<_> = rule.rhs.iter().map(|(k, _)| k.clone()).collect();
    let sol = solve_within_rational(&target, &rows, &allowed).unwrap();
    (solve_term(&translate(&sol.relation).unwrap(), &target).unwrap(), sol.unique)
}

#[test]
fn genus_two_rule_is_derived() {
    let (rhs, unique) = restricted(2);
    assert!(unique);
    assert_eq!(rhs, Rule::stored(2).unwrap().rhs);
    let shown = parse_expr(
        "7/10 <<g^a>>_1 <<{g_a o W}>>_1 + 1/10 <<g^a {g_a o W}>>_1 - 1/240 <<W {g^a o g_a}>>_1 \
         + 13/240 <<W g^a g_a g^b>>_0 <<g_b>>_1 + 1/960 <<W g^a g_a g^b g_b>>_0",
        DeltaReading::Alt,
    )
    .unwrap();
    assert_eq!(rhs, shown);
}

#[test]
fn genus_three_rule_is_derived() {
    let (rhs, unique) = restricted(3);
    assert!(unique);
    assert_eq!(rhs, Rule::stored(3).unwrap().rhs);
    let coeff = |s: &str| {
        let e = parse_expr(s, DeltaReading::Alt).unwrap();
        let (k, _) = e.iter().next().unwrap();
        rhs.get(k).cloned().unwrap()
    };
    assert_eq!(coeff("<<T(g^a)>>_2 <<{g_a o W}>>_1"), q(41, 21));
    assert_eq!(coeff("<<{W o g_a o g^a}>>_2"), q(-13, 168));
    assert_eq!(coeff("<<W g^a g_a g_b g^b g_m g^m>>_0"), q(1, 53760));
    assert_eq!(coeff("<<W g_a g_b g_m>>_1 <<g^a g^b g^m>>_0"), q(1, 3780));
}

#[test]
fn genus_two_top_psi_relation_is_tautological() {
    let (b, red) = row_space(2, 1, 4);
    let e = parse_expr("<<T^4(W)>>_2 - 1/2 <<W T^2(g^a)>>_1 <<T(g_a)>>_1", DeltaReading::Alt).unwrap();
    assert!(membership(&e.0, &red, &b).unwrap());
    let wrong = parse_expr("<<T^4(W)>>_2 - 1/3 <<W T^2(g^a)>>_1 <<T(g_a)>>_1", DeltaReading::Alt).unwrap();
    assert!(!membership(&wrong.0, &red, &b).unwrap());
}

#[test]
fn psi_on_m04_is_a_boundary_point() {
    let (b, red) = row_space(0, 4, 1);
    let psi = DecoratedStratum::psi_power(0, 4, 1).key().unwrap();
    let d = StableGraph::new(vec![0, 0], vec![0, 0, 1, 1], vec![(0, 1)]).unwrap();
    let d = DecoratedStratum::undecorated(d).key().unwrap();
    let mut v = StrataVector::single(0, 4, psi, q(1, 1));
    v.add_term(d, q(-1, 1));
    assert!(membership(&v, &red, &b).unwrap());
}

#[test]
fn rref_does_not_depend_on_thread_count() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| row_space(2, 1, 2).1)
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(3));
}

fn arb_graph() -> impl Strategy<Value = StableGraph> {
    let pool: Vec<StableGraph> =
        [(1, 2), (2, 1), (0, 5), (1, 3)].iter().flat_map(|&(g, n)| enumerate_stable_graphs(g, n).unwrap().to_vec()).collect();
    prop::sample::select(pool)
}

/// Relabels vertices by `vp`, reverses edges where `flip` says so and permutes edges by `ep`.
fn relabel(g: &StableGraph, vp: &[usize], ep: &[usize], flip: &[bool]) -> StableGraph {
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn canonical_form_is_idempotent_and_label_free(
        g in arb_graph(),
        seed in any::<u64>(),
    ) {
        use rand::{seq::SliceRandom, Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut vp: Vec<usize> = (0..g.num_vertices()).collect();
        vp.shuffle(&mut rng);
        let mut ep: Vec<usize> = (0..g.num_edges()).collect();
        ep.shuffle(&mut rng);
        let flip: Vec<bool> = (0..g.num_edges()).map(|_| rng.gen()).collect();
        let h = relabel(&g, &vp, &ep, &flip);
        let c = canonical_form(&g);
        prop_assert_eq!(&canonical_form(&h).code, &c.code);
        prop_assert_eq!(&canonical_form(&c.graph).code, &c.code);
        prop_assert_eq!(automorphisms(&g).len(), automorphisms(&h).len());
        prop_assert_eq!(automorphism_count(&h), automorphisms(&h).len() as u64);
        for a in automorphisms(&h).iter() {
            for (e, &(x, y)) in h.edges.iter().enumerate() {
                let (h0, h1) = (a.half_edge[2 * e], a.half_edge[2 * e + 1]);
                prop_assert_eq!(h0 / 2, h1 / 2);
                prop_assert_eq!(h.half_edge_vertex(h0), a.vertex[x]);
                prop_assert_eq!(h.half_edge_vertex(h1), a.vertex[y]);
            }
            for (i, &v) in h.legs.iter().enumerate() {
                prop_assert_eq!(h.legs[i], a.vertex[v]);
            }
        }
    }

    #[test]
    fn pushforward_is_linear(a in -6i64..7, b in 1i64..5, i in 0usize..64, j in 0usize..64) {
        let inner = basis(1, 2, 1).unwrap();
        let strata = inner.strata();
        let x = StrataVector::single(1, 2, strata[i % strata.len()].key().unwrap(), q(1, 1));
        let y = StrataVector::single(1, 2, strata[j % strata.len()].key().unwrap(), q(2, 3));
        let outer = StableGraph::new(vec![1, 1], vec![0], vec![(0, 1)]).unwrap();
        let deco = Decoration::trivial(&outer);
        let (ca, cb) = (q(a, 1), q(1, b));
        let mut comb = x.scaled(&ca);
        comb.add_scaled(&y, &cb);
        let lhs = pushforward(&comb, &outer, 0, &deco).unwrap();
        let mut rhs = pushforward(&x, &outer, 0, &deco).unwrap().scaled(&ca);
        rhs.add_scaled(&pushforward(&y, &outer, 0, &deco).unwrap(), &cb);
        prop_assert_eq!(lhs, rhs);
    }
}
