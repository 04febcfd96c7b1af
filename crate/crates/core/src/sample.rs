//! Seeded random sampling of marked graphs, ideal forests and edge choices.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::connectivity::{reroute_compatible, ConnectivityError, StandardPath};
use crate::gog::is_forest;
use crate::spine::ideal::{all_ideal_edges, ideal_forests};
use crate::spine::{all_moves, blow_up, whitehead_move, IdealEdge, MarkedGraph, Move};

/// Random walk of `steps` Whitehead moves from `start`, never exceeding `max_norm`.
pub fn random_patch<R: Rng>(start: &MarkedGraph, steps: usize, max_norm: u64, rng: &mut R) -> MarkedGraph {
    let mut cur = start.clone();
    for _ in 0..steps {
        let norm = cur.total_length() as i64;
        let star = cur.star_graph();
        let moves: Vec<_> = all_moves(&cur, &star)
            .into_iter()
            .filter(|(_, d)| norm + d <= max_norm as i64)
            .collect();
        let Some((mv, _)) = moves.choose(rng) else { break };
        cur = whitehead_move(&cur, &mv.alpha, mv.edge).expect("valid move");
    }
    cur
}

/// A random nonempty ideal forest of `m` (uniform over forests with at most `max_members`).
pub fn random_ideal_forest<R: Rng>(m: &MarkedGraph, max_members: usize, rng: &mut R) -> Vec<IdealEdge> {
    let pool = all_ideal_edges(m, usize::MAX);
    let forests = ideal_forests(m.sig(), &m.graph, &pool, max_members);
    let nonempty: Vec<&Vec<usize>> = forests.iter().filter(|f| !f.is_empty()).collect();
    match nonempty.choose(rng) {
        Some(f) => f.iter().map(|&i| pool[i].clone()).collect(),
        None => Vec::new(),
    }
}

/// One oriented edge from each `D(alpha_i)` such that the underlying edges form
/// a collapsible forest of the blow-up, if any such choice exists.
pub fn random_edge_choice<R: Rng>(m: &MarkedGraph, phi: &[IdealEdge], rng: &mut R) -> Option<Vec<usize>> {
    let bu = blow_up(m, phi).ok()?;
    let options: Vec<Vec<usize>> = phi.iter().map(IdealEdge::d_edges).collect();
    let mut all = vec![Vec::new()];
    for opts in &options {
        let mut next = Vec::new();
        for prefix in &all {
            for &e in opts {
                if prefix.iter().all(|&x: &usize| x >> 1 != e >> 1) {
                    let mut p = prefix.clone();
                    p.push(e);
                    next.push(p);
                }
            }
        }
        all = next;
    }
    let valid: Vec<Vec<usize>> = all
        .into_iter()
        .filter(|c| is_forest(&bu.marked.graph, &c.iter().map(|&e| e >> 1).collect::<Vec<_>>()))
        .collect();
    valid.choose(rng).cloned()
}

/// Standard path of random strictly increasing moves from `start` until the
/// norm exceeds `above`.
pub fn increasing_walk<R: Rng>(start: &MarkedGraph, above: u64, rng: &mut R) -> Result<StandardPath, ConnectivityError> {
    let mut moves: Vec<Move> = Vec::new();
    let mut cur = start.clone();
    while cur.total_length() <= above {
        let star = cur.star_graph();
        let up: Vec<Move> = all_moves(&cur, &star).into_iter().filter(|(_, d)| *d > 0).map(|(m, _)| m).collect();
        let mv = up.choose(rng).ok_or(ConnectivityError::NoIncreasingMove)?.clone();
        cur = whitehead_move(&cur, &mv.alpha, mv.edge)?;
        moves.push(mv);
    }
    StandardPath::from_moves(start, &moves)
}

/// Two independent increasing walks out of `bottom`, joined there: a standard
/// path whose endpoints lie above `above` and which passes through `bottom`.
pub fn valley_path<R: Rng>(bottom: &MarkedGraph, above: u64, rng: &mut R) -> Result<StandardPath, ConnectivityError> {
    let left = increasing_walk(bottom, above, rng)?;
    let right = increasing_walk(bottom, above, rng)?;
    left.reversed().concat(&right)
}

/// A closed standard path at `m` around a random pair of distinct compatible
/// increasing moves, rerouted so that every other patch lies above `m`.
pub fn square_loop<R: Rng>(m: &MarkedGraph, rng: &mut R) -> Option<StandardPath> {
    let star = m.star_graph();
    let up: Vec<Move> = all_moves(m, &star).into_iter().filter(|(_, d)| *d > 0).map(|(mv, _)| mv).collect();
    let mut pairs: Vec<(usize, usize)> = (0..up.len())
        .flat_map(|i| (0..up.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && up[i].alpha.compatible(m.sig(), &m.graph, &up[j].alpha))
        .collect();
    pairs.shuffle(rng);
    for (i, j) in pairs {
        let Ok((p, _)) = reroute_compatible(m, &up[i], &up[j]) else { continue };
        let there = StandardPath::from_moves(m, &[up[i].clone()]).ok()?;
        let back = StandardPath::from_moves(m, &[up[j].clone()]).ok()?.reversed();
        let lp = there.concat(&p).ok()?.concat(&back).ok()?;
        if lp.validate().is_ok() {
            return Some(lp);
        }
    }
    None
}
