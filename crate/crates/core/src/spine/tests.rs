use std::sync::Arc;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::algebra::{FactorSignature, Word};
use crate::gog::{rev, GraphOfGroups, LoopRep, Step, VertexGroup};
use crate::sample::{random_edge_choice, random_ideal_forest, random_patch};

fn ctx(orders: &[usize], k: usize) -> Arc<Context> {
    Context::standard(FactorSignature::cyclic(orders, k).unwrap()).unwrap()
}

/// Independent length oracle: repeatedly delete a cyclically adjacent `e 1 ē`
/// anywhere in the loop (merging neighbours) until none is left.
fn oracle_length(m: &MarkedGraph, l: &LoopRep) -> usize {
    let mut s: Vec<Step> = l.steps().to_vec();
    loop {
        let n = s.len();
        if n < 2 {
            return n;
        }
        let hit = (0..n).find(|&i| s[(i + 1) % n].edge == rev(s[i].edge) && s[i].elem == 0);
        let Some(i) = hit else { return n };
        let j = (i + 1) % n;
        let v = m.graph.terminus(s[j].edge);
        let merged = m.graph.vmul(m.sig(), v, s[(i + n - 1) % n].elem, s[j].elem);
        if n == 2 {
            return 0;
        }
        let prev = (i + n - 1) % n;
        s[prev].elem = merged;
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        s.remove(b);
        s.remove(a);
    }
}

#[test]
fn briar_patch_21_lengths_and_norm() {
    let m = MarkedGraph::seed(ctx(&[2, 2], 1)).unwrap();
    assert_eq!(m.translation_length("s1").unwrap(), 1);
    assert_eq!(m.translation_length("s1.A2:1").unwrap(), 3);
    assert_eq!(m.translation_length("A1:1.A2:1").unwrap(), 2);
    let lengths: Vec<usize> = m.loops.iter().map(LoopRep::length).collect();
    assert_eq!(lengths, [2, 1, 1, 1, 3, 3]);
    assert_eq!(m.norm().unwrap(), 11);
    for l in &m.loops {
        assert_eq!(oracle_length(&m, l), l.length());
    }
    assert!(matches!(m.translation_length("s2"), Err(SpineError::UnknownWord(_))));
}

#[test]
fn star_graph_of_rose_and_edge() {
    let sig = FactorSignature::cyclic(&[], 1).unwrap();
    let c = Context::custom(sig.clone(), vec![Word::parse(&sig, "s1").unwrap()]);
    let g = GraphOfGroups::new(vec![VertexGroup::Trivial], vec![(0, 0)]).unwrap();
    let m = MarkedGraph::from_parts(c, g, vec![LoopRep::Cycle(vec![Step::new(0, 0)])]).unwrap();
    let s = m.star_graph();
    assert_eq!(s.locals[0].graph.edge_count(), 1);

    let sig = FactorSignature::cyclic(&[2, 2], 0).unwrap();
    let c = Context::custom(sig.clone(), vec![Word::parse(&sig, "A1:1 A2:1").unwrap()]);
    let m = MarkedGraph::seed(c).unwrap();
    let s = m.star_graph();
    assert_eq!(s.locals[0].graph.edge_count(), 2);
    assert_eq!(s.locals[1].graph.edge_count(), 2);
    assert_eq!(s.norm_from_star(), Ratio::from_integer(m.norm().unwrap()));
    assert_eq!(m.norm().unwrap(), 2);

    let empty = Context::custom(sig, vec![]);
    let m = MarkedGraph::seed(empty).unwrap();
    assert_eq!(m.star_graph().norm_from_star(), Ratio::from_integer(0));
    assert_eq!(m.norm().unwrap(), 0);
}

/// Orbit count by brute force over all direction subsets.
fn oracle_ideal_edge_classes(m: &MarkedGraph, v: usize, max_size: usize) -> usize {
    let st = m.graph.star(v);
    let q = m.graph.group_order(m.sig(), v);
    let dirs: Vec<Direction> = st.iter().flat_map(|&e| (0..q).map(move |g| Direction::new(e, g))).collect();
    let mut classes: std::collections::BTreeSet<Vec<Direction>> = Default::default();
    for mask in 1u32..(1 << dirs.len()) {
        let set: Vec<Direction> = (0..dirs.len()).filter(|i| mask >> i & 1 == 1).map(|i| dirs[i]).collect();
        if set.len() < 2 || set.len() > max_size || dirs.len() - set.len() < 2 {
            continue;
        }
        let mut edges: Vec<usize> = set.iter().map(|d| d.edge).collect();
        edges.dedup();
        if edges.len() != set.len() || !edges.iter().any(|&e| !edges.contains(&rev(e))) {
            continue;
        }
        let orbit_min = (0..q)
            .map(|h| {
                let mut t: Vec<Direction> = set
                    .iter()
                    .map(|d| Direction::new(d.edge, m.graph.vmul(m.sig(), v, h, d.elem)))
                    .collect();
                t.sort();
                t
            })
            .min()
            .unwrap();
        classes.insert(orbit_min);
    }
    classes.len()
}

#[test]
fn ideal_edge_enumeration_matches_orbit_count() {
    let m = MarkedGraph::seed(ctx(&[2, 2, 2, 2], 0)).unwrap();
    let found = enumerate_ideal_edges(&m, 0, 2).unwrap();
    assert_eq!(found.len(), oracle_ideal_edge_classes(&m, 0, 2));
    assert_eq!(found.len(), 6);
    assert!(matches!(enumerate_ideal_edges(&m, 1, 2), Err(SpineError::InactiveVertex(1))));
    for (orders, k) in [(vec![2, 3], 1), (vec![3], 2), (vec![2, 2], 2)] {
        let m = MarkedGraph::seed(ctx(&orders, k)).unwrap();
        for v in m.active_vertices() {
            let all = enumerate_ideal_edges(&m, v, usize::MAX).unwrap();
            assert_eq!(all.len(), oracle_ideal_edge_classes(&m, v, usize::MAX));
            for a in &all {
                assert!(!a.d_edges().is_empty());
            }
        }
    }
}

#[test]
fn blow_up_round_trip_and_moves_are_reduced() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (orders, k) in [(vec![2, 2], 1), (vec![2, 2, 2], 0), (vec![2, 3], 2), (vec![3], 2)] {
        let seed = MarkedGraph::seed(ctx(&orders, k)).unwrap();
        let m = random_patch(&seed, 3, 200, &mut rng);
        let key = m.canonical_key();
        for alpha in all_ideal_edges(&m, usize::MAX) {
            let b = blow_up_single(&m, &alpha);
            let back = b.collapse_edge(b.graph.num_edges() - 1).unwrap();
            assert_eq!(back.canonical_key(), key);
            for e in alpha.d_edges() {
                let r = whitehead_move(&m, &alpha, e).unwrap();
                assert!(r.is_reduced());
                let star = m.star_graph();
                let predicted = m.norm().unwrap() as i64 + ideal_abs(&star, &alpha) as i64
                    - star.edge_abs(&m.graph, e) as i64;
                assert_eq!(r.norm().unwrap() as i64, predicted);
            }
        }
    }
}

#[test]
fn equivalent_ideal_edges_give_equivalent_blow_ups() {
    let m = MarkedGraph::seed(ctx(&[3, 2], 1)).unwrap();
    for alpha in all_ideal_edges(&m, usize::MAX) {
        let v = alpha.vertex;
        let base = blow_up_single(&m, &alpha).canonical_key();
        for h in 0..m.graph.group_order(m.sig(), v) {
            let moved = IdealEdge { vertex: v, dirs: alpha.translate(m.sig(), &m.graph, h) };
            assert_eq!(blow_up_single(&m, &moved).canonical_key(), base);
        }
    }
}

#[test]
fn disjoint_blow_ups_commute() {
    let m = MarkedGraph::seed(ctx(&[2, 2], 2)).unwrap();
    let pool = all_ideal_edges(&m, usize::MAX);
    let mut checked = 0;
    for a in &pool {
        for b in &pool {
            if a < b && a.disjoint_from(b) {
                let ab = blow_up(&m, &[a.clone(), b.clone()]).unwrap().marked.canonical_key();
                let ba = blow_up(&m, &[b.clone(), a.clone()]).unwrap().marked.canonical_key();
                let seq = blow_up_single(&blow_up_single(&m, a), b).canonical_key();
                assert_eq!(ab, ba);
                assert_eq!(ab, seq);
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn eq_star_on_random_forests() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (orders, k) in [(vec![2, 2], 2), (vec![2, 2, 2, 2], 0), (vec![2], 2)] {
        let seed = MarkedGraph::seed(ctx(&orders, k)).unwrap();
        let mut done = 0;
        for _ in 0..200 {
            let m = random_patch(&seed, 2, 200, &mut rng);
            let phi = random_ideal_forest(&m, 3, &mut rng);
            if phi.is_empty() {
                continue;
            }
            let Some(edges) = random_edge_choice(&m, &phi, &mut rng) else { continue };
            let r = check_eq_star(&m, &phi, &edges).unwrap();
            assert!(r.holds, "{r:?} for {phi:?} / {edges:?}");
            done += 1;
        }
        assert!(done > 50);
    }
}

#[test]
fn canonical_key_ignores_relabeling() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let seed = MarkedGraph::seed(ctx(&[2, 3], 2)).unwrap();
    for _ in 0..20 {
        let m = random_patch(&seed, 3, 200, &mut rng);
        // Reverse every edge and shift elements by a twist at each end.
        let sig = m.sig().clone();
        let mut g = m.graph.clone();
        for e in &mut g.edges {
            *e = (e.1, e.0);
        }
        let loops: Vec<LoopRep> = m
            .loops
            .iter()
            .map(|l| match l {
                LoopRep::Cycle(s) => {
                    LoopRep::Cycle(s.iter().map(|st| Step::new(st.edge ^ 1, st.elem)).collect())
                }
                other => other.clone(),
            })
            .collect();
        let loops: Vec<LoopRep> = loops
            .iter()
            .map(|l| l.cyclically_reduce(&sig, &g).unwrap())
            .collect();
        let flipped = MarkedGraph::from_parts(m.ctx().clone(), g, loops).unwrap();
        assert_eq!(flipped.canonical_key(), m.canonical_key());
        assert_eq!(flipped.norm().unwrap(), m.norm().unwrap());
    }
}

#[test]
fn ball_errors_and_small_ball() {
    let seed = MarkedGraph::seed(ctx(&[2, 2, 2], 0)).unwrap();
    let n = seed.norm().unwrap();
    assert!(matches!(
        explore_ball(&seed, n - 1, &BallConfig::default()),
        Err(SpineError::RadiusBelowSeed { .. })
    ));
    let tight = BallConfig { budget: 1, ..BallConfig::default() };
    assert!(matches!(explore_ball(&seed, n + 6, &tight), Err(SpineError::BallNotFinite { .. })));
    let cfg = BallConfig { with_c: true, with_blowups: true, ..BallConfig::default() };
    let ball = explore_ball(&seed, n + 4, &cfg).unwrap();
    assert!(ball.patches.len() > 1);
    assert!(ball.n_r.unwrap() >= ball.radius);
    assert_eq!(ball.blowup_cycle_rank(), 0);
}
