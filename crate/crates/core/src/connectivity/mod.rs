//! Standard paths in the spine and their homotopies.
//!
//! A standard path alternates reduced marked graphs with single blow-ups, each
//! collapsing onto both neighbours by one edge. Every rewrite here is recorded
//! as a [`Replacement`]: a segment of the current path swapped for another with
//! the same endpoints, where every vertex of both lies in the star of a single
//! center. Such a swap is a homotopy through the star, and [`check::Checker`]
//! replays the whole record without using this module's code.

pub mod check;
pub mod polygon;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{classify, Ends};
use crate::calculus::{find_size_two_increasing, CalculusError};
use crate::gog::{forest_exchange, is_forest, maximal_forests, rev};
use crate::spine::{
    all_ideal_edges, all_moves, blow_up, blow_up_single, ideal_abs, whitehead_move, CanonicalKey, IdealEdge, MarkedGraph,
    Move, SpineError, StarGraph,
};

pub use check::{Checker, ReplayReport};
pub use polygon::{
    find_good_polygon, sized_ideal_edges, validate_good_polygon, GoodPolygon, PolygonKind, PolygonOutcome, PolygonSource,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConnectivityError {
    #[error("not a path: {0}")]
    NotAPath(String),
    #[error("ideal edges are not compatible")]
    IncompatibleEdges,
    #[error("hypotheses not met: {0}")]
    HypothesesNotMet(String),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("an endpoint has norm {endpoint} but the path must clear {needed}")]
    EndpointsTooLow { endpoint: u64, needed: u64 },
    #[error("the spine is not one-ended for this signature")]
    NotOneEnded,
    #[error("no strictly increasing move from this marked graph")]
    NoIncreasingMove,
    #[error("loop is not based at a point of the ray")]
    BasepointMismatch,
    #[error(transparent)]
    Spine(#[from] SpineError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
}

type Result<T> = std::result::Result<T, ConnectivityError>;

fn same(a: &MarkedGraph, b: &MarkedGraph) -> bool {
    a.graph.num_edges() == b.graph.num_edges() && (a == b || a.canonical_key() == b.canonical_key())
}

/// `big` collapses onto `small` along some forest (or they are isomorphic).
fn collapses_onto(big: &MarkedGraph, small: &MarkedGraph) -> bool {
    let (nb, ns) = (big.graph.num_edges(), small.graph.num_edges());
    if nb < ns {
        return false;
    }
    let target = small.canonical_key();
    let d = nb - ns;
    let mut pick = Vec::new();
    fn rec(big: &MarkedGraph, target: &CanonicalKey, d: usize, start: usize, pick: &mut Vec<usize>) -> bool {
        if pick.len() == d {
            return big.collapse(pick).is_ok_and(|c| c.canonical_key() == *target);
        }
        for e in start..big.graph.num_edges() {
            pick.push(e);
            if is_forest(&big.graph, pick) && rec(big, target, d, e + 1, pick) {
                return true;
            }
            pick.pop();
        }
        false
    }
    rec(big, &target, d, 0, &mut pick)
}

fn comparable(a: &MarkedGraph, b: &MarkedGraph) -> bool {
    if a.graph.num_edges() >= b.graph.num_edges() {
        collapses_onto(a, b)
    } else {
        collapses_onto(b, a)
    }
}

#[derive(Clone, Debug)]
pub struct StandardPath {
    pub vertices: Vec<MarkedGraph>,
}

impl StandardPath {
    pub fn trivial(m: &MarkedGraph) -> Self {
        Self { vertices: vec![m.clone()] }
    }

    pub fn from_moves(start: &MarkedGraph, moves: &[Move]) -> Result<Self> {
        let mut vertices = vec![start.clone()];
        for mv in moves {
            let cur = vertices.last().expect("nonempty");
            if !mv.alpha.d_edges().contains(&mv.edge) {
                return Err(SpineError::NotInDalpha(mv.edge).into());
            }
            let x = blow_up_single(cur, &mv.alpha);
            let next = x.collapse_edge(mv.edge >> 1)?;
            vertices.push(x);
            vertices.push(next);
        }
        Ok(Self { vertices })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn first(&self) -> &MarkedGraph {
        &self.vertices[0]
    }

    pub fn last(&self) -> &MarkedGraph {
        self.vertices.last().expect("nonempty path")
    }

    pub fn patches(&self) -> impl Iterator<Item = &MarkedGraph> {
        self.vertices.iter().step_by(2)
    }

    pub fn patch_norms(&self) -> Vec<u64> {
        self.patches().map(MarkedGraph::total_length).collect()
    }

    pub fn reversed(&self) -> Self {
        Self { vertices: self.vertices.iter().rev().cloned().collect() }
    }

    pub fn is_closed(&self) -> bool {
        same(self.first(), self.last())
    }

    pub fn concat(&self, other: &StandardPath) -> Result<Self> {
        if !same(self.last(), other.first()) {
            return Err(ConnectivityError::NotAPath("paths do not meet".into()));
        }
        let mut vertices = self.vertices.clone();
        vertices.extend(other.vertices.iter().skip(1).cloned());
        Ok(Self { vertices })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(ConnectivityError::NotAPath(s));
        if self.vertices.len().is_multiple_of(2) {
            return bad(format!("even length {}", self.vertices.len()));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if i % 2 == 0 && !v.is_reduced() {
                return bad(format!("entry {i} is not reduced"));
            }
            if i % 2 == 1 {
                for j in [i - 1, i + 1] {
                    let w = &self.vertices[j];
                    if v.graph.num_edges() != w.graph.num_edges() + 1 || !collapses_onto(v, w) {
                        return bad(format!("entry {i} does not collapse onto entry {j}"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn ids(&self) -> Vec<String> {
        self.vertices.iter().map(|m| m.canonical_key().id()).collect()
    }
}

/// One elementary homotopy: `old` (found at `at`) becomes `new`, inside the
/// star of `center`.
#[derive(Clone, Debug)]
pub struct Replacement {
    pub at: usize,
    pub center: MarkedGraph,
    pub old: Vec<MarkedGraph>,
    pub new: Vec<MarkedGraph>,
}

#[derive(Clone, Debug)]
pub struct HomotopyCertificate {
    pub start: Vec<MarkedGraph>,
    pub steps: Vec<Replacement>,
}

impl HomotopyCertificate {
    pub fn identity(p: &StandardPath) -> Self {
        Self { start: p.vertices.clone(), steps: vec![] }
    }

    /// JSON form: vertices by canonical id, with a table of their data.
    pub fn to_json(&self) -> serde_json::Value {
        let mut table = serde_json::Map::new();
        let mut id = |m: &MarkedGraph| {
            let k = m.canonical_key().id();
            table.entry(k.clone()).or_insert_with(|| serde_json::to_value(m.data()).expect("serializable"));
            k
        };
        let start: Vec<String> = self.start.iter().map(&mut id).collect();
        let steps: Vec<serde_json::Value> = self
            .steps
            .iter()
            .map(|s| {
                serde_json::json!({
                    "at": s.at,
                    "center": id(&s.center),
                    "old": s.old.iter().map(&mut id).collect::<Vec<_>>(),
                    "new": s.new.iter().map(&mut id).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({ "start": start, "steps": steps, "vertices": table })
    }
}

struct Rewriter {
    path: Vec<MarkedGraph>,
    cert: HomotopyCertificate,
}

impl Rewriter {
    fn new(path: &[MarkedGraph]) -> Self {
        Self { path: path.to_vec(), cert: HomotopyCertificate { start: path.to_vec(), steps: vec![] } }
    }

    fn replace(&mut self, at: usize, old_len: usize, new: Vec<MarkedGraph>, center: MarkedGraph) {
        let old: Vec<MarkedGraph> = self.path[at..at + old_len].to_vec();
        debug_assert!(same(&old[0], &new[0]) && same(&old[old_len - 1], &new[new.len() - 1]));
        self.path.splice(at..at + old_len, new.iter().cloned());
        self.cert.steps.push(Replacement { at, center, old, new });
    }

    /// Drops every `(a, x, a)` with both ends the same patch, inside the star of `x`.
    fn remove_backtracks(&mut self) {
        let mut i = 1;
        while i + 1 < self.path.len() {
            if same(&self.path[i - 1], &self.path[i + 1]) {
                let a = self.path[i - 1].clone();
                let x = self.path[i].clone();
                self.replace(i - 1, 3, vec![a], x);
                i = i.saturating_sub(2).max(1);
            } else {
                i += 2;
            }
        }
    }

    fn finish(self) -> (StandardPath, HomotopyCertificate) {
        (StandardPath { vertices: self.path }, self.cert)
    }
}

/// Turns an edge path in the spine (consecutive entries comparable, reduced
/// endpoints) into a standard path, recording the homotopy.
pub fn standardize_path(vertices: &[MarkedGraph]) -> Result<(StandardPath, HomotopyCertificate)> {
    let m = vertices.len();
    if m == 0 {
        return Err(ConnectivityError::NotAPath("empty".into()));
    }
    if !vertices[0].is_reduced() || !vertices[m - 1].is_reduced() {
        return Err(ConnectivityError::NotAPath("endpoints must be reduced".into()));
    }
    for (i, w) in vertices.windows(2).enumerate() {
        if !comparable(&w[0], &w[1]) {
            return Err(ConnectivityError::NotAPath(format!("entries {i} and {} are not comparable", i + 1)));
        }
    }
    let mut rw = Rewriter::new(vertices);
    if m == 1 {
        return Ok(rw.finish());
    }
    let first_reduced = |x: &MarkedGraph| -> MarkedGraph {
        if x.is_reduced() {
            x.clone()
        } else {
            x.reduced_collapses().swap_remove(0).1
        }
    };
    let r: Vec<MarkedGraph> = vertices.iter().map(first_reduced).collect();
    // Backtracks x_i -> r_i -> x_i at each interior vertex, right to left.
    for i in (1..m - 1).rev() {
        rw.replace(i, 1, vec![vertices[i].clone(), r[i].clone(), vertices[i].clone()], vertices[i].clone());
    }
    // Segment j runs from r_j to r_{j+1}; after the insertions it starts at 3j - 1 (3j - 2 + 1) for j > 0.
    let start_of = |j: usize| if j == 0 { 0 } else { 3 * j - 1 };
    let mut centers = vec![MarkedGraph::clone(&vertices[0]); m - 1];
    for j in (0..m - 1).rev() {
        let len = 2 + usize::from(j > 0) + usize::from(j + 1 < m - 1);
        let (x, y) = (&vertices[j], &vertices[j + 1]);
        let u = if x.graph.num_edges() >= y.graph.num_edges() { x } else { y };
        centers[j] = u.clone();
        rw.replace(start_of(j), len, vec![r[j].clone(), u.clone(), r[j + 1].clone()], u.clone());
    }
    // Now r_0, u_0, r_1, ..., u_{m-2}, r_{m-1}; interpolate maximal forests inside each u_j.
    for j in (0..m - 1).rev() {
        let u = &centers[j];
        let walk = forest_walk(u, &r[j], &r[j + 1])?;
        rw.replace(2 * j, 3, walk, u.clone());
    }
    rw.remove_backtracks();
    let out = rw.finish();
    out.0.validate()?;
    Ok(out)
}

/// Standard path from `a` to `b` through collapses of `u` by maximal forests,
/// exchanging one edge at a time.
fn forest_walk(u: &MarkedGraph, a: &MarkedGraph, b: &MarkedGraph) -> Result<Vec<MarkedGraph>> {
    if u.is_reduced() {
        return Ok(vec![a.clone()]);
    }
    let forests = maximal_forests(&u.graph);
    let find = |t: &MarkedGraph| {
        let key = t.canonical_key();
        forests
            .iter()
            .find(|f| u.collapse(f).is_ok_and(|c| c.canonical_key() == key))
            .cloned()
            .ok_or_else(|| ConnectivityError::NotAPath("endpoint is not a reduced collapse of the center".into()))
    };
    let (mut cur, target) = (find(a)?, find(b)?);
    let mut out = vec![a.clone()];
    while let Some(&e2) = target.iter().find(|e| !cur.contains(e)) {
        let e = forest_exchange(&u.graph, &cur, &target, e2).map_err(SpineError::from)?;
        let mut next: Vec<usize> = cur.iter().copied().filter(|&x| x != e).chain([e2]).collect();
        next.sort();
        let common: Vec<usize> = cur.iter().copied().filter(|&x| x != e).collect();
        out.push(u.collapse(&common)?);
        out.push(u.collapse(&next)?);
        cur = next;
    }
    let last = out.len() - 1;
    out[last] = b.clone();
    Ok(out)
}

fn strict(star: &StarGraph, m: &MarkedGraph, mv: &Move) -> bool {
    ideal_abs(star, &mv.alpha) > star.edge_abs(&m.graph, mv.edge)
}

fn weak(star: &StarGraph, m: &MarkedGraph, mv: &Move) -> bool {
    ideal_abs(star, &mv.alpha) >= star.edge_abs(&m.graph, mv.edge)
}

/// Standard path from `m^a_e` to `m^b_f` through collapses of one center.
fn reroute_raw(m: &MarkedGraph, star: &StarGraph, a: &Move, b: &Move) -> Result<(Vec<MarkedGraph>, MarkedGraph)> {
    if !(strict(star, m, a) && weak(star, m, b)) {
        if strict(star, m, b) && weak(star, m, a) {
            let (mut p, c) = reroute_raw(m, star, b, a)?;
            p.reverse();
            return Ok((p, c));
        }
        return Err(ConnectivityError::HypothesesNotMet(
            "one move must strictly increase the norm and the other must not decrease it".into(),
        ));
    }
    let sig = m.sig();
    if !a.alpha.compatible(sig, &m.graph, &b.alpha) {
        return Err(ConnectivityError::IncompatibleEdges);
    }
    let (e, f) = (a.edge >> 1, b.edge >> 1);
    if a.alpha.equivalent(sig, &m.graph, &b.alpha) {
        let x = blow_up_single(m, &a.alpha);
        let bx = blow_up_single(m, &b.alpha);
        let path = vec![x.collapse_edge(e)?, x.clone(), bx.collapse_edge(f)?];
        return Ok((path, x));
    }
    let bu = blow_up(m, &[a.alpha.clone(), b.alpha.clone()])?;
    let g = bu.marked;
    let (ea, eb) = (bu.new_edges[0], bu.new_edges[1]);
    let c = |s: &[usize]| g.collapse(s);
    let path = if e == f {
        vec![c(&[eb, e])?, c(&[e])?, c(&[ea, e])?]
    } else if is_forest(&g.graph, &[e, f]) {
        vec![c(&[eb, e])?, c(&[e])?, c(&[e, f])?, c(&[f])?, c(&[ea, f])?]
    } else if star.edge_abs(&m.graph, a.edge) >= star.edge_abs(&m.graph, b.edge) {
        vec![c(&[eb, e])?, c(&[eb])?, c(&[eb, f])?, c(&[f])?, c(&[ea, f])?]
    } else {
        vec![c(&[eb, e])?, c(&[e])?, c(&[ea, e])?, c(&[ea])?, c(&[ea, f])?]
    };
    Ok((path, g))
}

/// Replaces `(m^a_e, m^a, m, m^b, m^b_f)` by a standard path whose interior
/// patches have norm above `‖m‖`, for compatible `a` and `b` with one of them
/// strictly increasing and the other not decreasing.
pub fn reroute_compatible(m: &MarkedGraph, a: &Move, b: &Move) -> Result<(StandardPath, HomotopyCertificate)> {
    let star = m.star_graph();
    let xa = blow_up_single(m, &a.alpha);
    let xb = blow_up_single(m, &b.alpha);
    let start = vec![whitehead_move(m, &a.alpha, a.edge)?, xa, m.clone(), xb, whitehead_move(m, &b.alpha, b.edge)?];
    let (mut path, center) = reroute_raw(m, &star, a, b)?;
    let last = path.len() - 1;
    path[0] = start[0].clone();
    path[last] = start[4].clone();
    let mut rw = Rewriter::new(&start);
    rw.replace(0, 5, path, center);
    Ok(rw.finish())
}

/// Best strictly increasing move for `alpha`: largest `|alpha| - |e|`, then smallest `e`.
fn best_move(m: &MarkedGraph, star: &StarGraph, alpha: &IdealEdge) -> Option<Move> {
    let a = ideal_abs(star, alpha);
    alpha
        .d_edges()
        .into_iter()
        .filter(|&e| a > star.edge_abs(&m.graph, e))
        .min_by_key(|&e| (star.edge_abs(&m.graph, e), e))
        .map(|edge| Move { alpha: alpha.clone(), edge })
}

/// A strictly increasing move whose ideal edge is a size-two subset of
/// `mv.alpha`, for a move that does not decrease the norm. Pairs from a trio
/// of pairwise non-opposite directions come first.
pub fn shrink_to_size_two(m: &MarkedGraph, mv: &Move) -> Result<Move> {
    let star = m.star_graph();
    if !weak(&star, m, mv) {
        return Err(ConnectivityError::HypothesesNotMet("the move decreases the norm".into()));
    }
    if mv.alpha.size() == 2 {
        return Ok(mv.clone());
    }
    let dirs = &mv.alpha.dirs;
    let opposite = |i: usize, j: usize| dirs[i].edge == rev(dirs[j].edge);
    let n = dirs.len();
    let mut pairs: Vec<(usize, usize, bool)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if opposite(i, j) {
                continue;
            }
            let in_trio = (0..n).any(|l| l != i && l != j && !opposite(i, l) && !opposite(j, l));
            pairs.push((i, j, in_trio));
        }
    }
    pairs.sort_by_key(|&(i, j, t)| (!t, i, j));
    for (i, j, _) in pairs {
        let Ok(sigma) = IdealEdge::new(m.sig(), &m.graph, mv.alpha.vertex, &[dirs[i], dirs[j]]) else { continue };
        if let Some(found) = best_move(m, &star, &sigma) {
            return Ok(found);
        }
    }
    Err(ConnectivityError::SearchExhausted(format!("no strictly increasing size-two subset of {:?}", mv.alpha)))
}

/// Which construction supplied the chain of moves around a local minimum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ChainSource {
    Compatible,
    OtherVertex,
    Shrunk,
    Union,
    Polygon { polygon: PolygonKind, source: PolygonSource },
}

#[derive(Clone, Debug, Serialize)]
pub struct Elimination {
    pub index: usize,
    pub norm: u64,
    pub chain_len: usize,
    pub source: ChainSource,
}

/// The move `(alpha, e)` at `m` with `m^alpha ≅ x` and `m^alpha_e ≅ p`.
fn recover_move(m: &MarkedGraph, x: &MarkedGraph, p: &MarkedGraph) -> Result<Move> {
    let (kx, kp) = (x.canonical_key(), p.canonical_key());
    for alpha in all_ideal_edges(m, usize::MAX) {
        if blow_up_single(m, &alpha).canonical_key() != kx {
            continue;
        }
        for e in alpha.d_edges() {
            if whitehead_move(m, &alpha, e)?.canonical_key() == kp {
                return Ok(Move { alpha, edge: e });
            }
        }
    }
    Err(ConnectivityError::NotAPath("neighbour is not a Whitehead move of the patch".into()))
}

/// Moves from `left` to `right`, consecutive ones compatible, interior ones
/// strictly increasing.
fn build_chain(m: &MarkedGraph, star: &StarGraph, left: &Move, right: &Move) -> Result<(Vec<Move>, ChainSource)> {
    let sig = m.sig();
    let g = &m.graph;
    if left.alpha.compatible(sig, g, &right.alpha) {
        return Ok((vec![left.clone(), right.clone()], ChainSource::Compatible));
    }
    let active = m.active_vertices();
    if let Some(&w) = active.iter().find(|&&w| w != left.alpha.vertex) {
        let gamma = find_size_two_increasing(m, w)?;
        return Ok((vec![left.clone(), gamma, right.clone()], ChainSource::OtherVertex));
    }
    let l2 = shrink_to_size_two(m, left)?;
    let r2 = shrink_to_size_two(m, right)?;
    let mut middle: Vec<Move> = Vec::new();
    let mut source = ChainSource::Shrunk;
    if !l2.alpha.compatible(sig, g, &r2.alpha) {
        // The polygon's weak corner is whichever side is not strictly increasing.
        let right_strict = strict(star, m, &r2);
        let (pa, pb) = if right_strict { (&l2, &r2) } else { (&r2, &l2) };
        match find_good_polygon(m, &pa.alpha, &pb.alpha)? {
            PolygonOutcome::UnionNonreductive { union } => {
                middle.push(best_move(m, star, &union).expect("non-reductive"));
                source = ChainSource::Union;
            }
            PolygonOutcome::Polygon { polygon } => {
                let walk = polygon.boundary_walk(m, star);
                let mut inner: Vec<Move> = walk[1..walk.len() - 1]
                    .iter()
                    .map(|s| best_move(m, star, s).ok_or(ConnectivityError::NoIncreasingMove))
                    .collect::<Result<_>>()?;
                // The walk runs from pb to pa.
                if right_strict {
                    inner.reverse();
                }
                middle = inner;
                source = ChainSource::Polygon { polygon: polygon.kind, source: polygon.source };
            }
        }
    }
    let mut chain = vec![left.clone()];
    if l2 != *left {
        chain.push(l2.clone());
    }
    chain.extend(middle);
    if r2 != *right {
        chain.push(r2.clone());
    }
    chain.push(right.clone());
    for w in chain.windows(2) {
        if !w[0].alpha.compatible(sig, g, &w[1].alpha) {
            return Err(ConnectivityError::IncompatibleEdges);
        }
    }
    Ok((chain, source))
}

fn check_dimension(m: &MarkedGraph) -> Result<()> {
    let (n, k) = (m.sig().n(), m.sig().k());
    if 2 * k + n < 4 || (n, k) == (2, 1) {
        return Err(ConnectivityError::HypothesesNotMet("needs dim L >= 2 and not A1*A2*Z".into()));
    }
    Ok(())
}

/// Removes the patch at even index `i`, which must not exceed either
/// neighbouring patch and lie strictly below one of them. Every patch the new
/// path introduces has norm above the removed one.
pub fn eliminate_local_min(path: &StandardPath, i: usize) -> Result<(StandardPath, HomotopyCertificate, Elimination)> {
    let mut rw = Rewriter::new(&path.vertices);
    let e = eliminate_in(&mut rw, i)?;
    let (p, c) = rw.finish();
    Ok((p, c, e))
}

fn eliminate_in(rw: &mut Rewriter, i: usize) -> Result<Elimination> {
    let p = &rw.path;
    if !i.is_multiple_of(2) || i < 2 || i + 2 >= p.len() {
        return Err(ConnectivityError::HypothesesNotMet(format!("index {i} is not an interior patch")));
    }
    let tau = p[i].clone();
    check_dimension(&tau)?;
    let nt = tau.total_length();
    let (nl, nr) = (p[i - 2].total_length(), p[i + 2].total_length());
    if nl < nt || nr < nt || (nl == nt && nr == nt) {
        return Err(ConnectivityError::HypothesesNotMet("patch is not a local minimum with a strict side".into()));
    }
    let star = tau.star_graph();
    let left = recover_move(&tau, &p[i - 1], &p[i - 2])?;
    let right = recover_move(&tau, &p[i + 1], &p[i + 2])?;
    let (chain, source) = build_chain(&tau, &star, &left, &right)?;
    let m = chain.len() - 1;
    let sig = tau.sig();
    let equiv = |a: &Move, b: &Move| a.alpha.equivalent(sig, &tau.graph, &b.alpha);

    let patches: Vec<MarkedGraph> = (0..=m)
        .map(|j| match j {
            0 => Ok(p[i - 2].clone()),
            j if j == m => Ok(p[i + 2].clone()),
            j => Ok(whitehead_move(&tau, &chain[j].alpha, chain[j].edge)?),
        })
        .collect::<Result<_>>()?;
    let blowups: Vec<MarkedGraph> = (0..=m)
        .map(|j| match j {
            0 => p[i - 1].clone(),
            j if j == m => p[i + 1].clone(),
            j => blow_up_single(&tau, &chain[j].alpha),
        })
        .collect();

    // Up-cone at tau: (tau^g0, tau, tau^gm) becomes tau^g0, tau^{g0,g1}, tau^g1, ...
    let mut cone = vec![blowups[0].clone()];
    let mut q = vec![i - 1];
    for j in 0..m {
        if !equiv(&chain[j], &chain[j + 1]) {
            cone.push(blow_up(&tau, &[chain[j].alpha.clone(), chain[j + 1].alpha.clone()])?.marked);
        }
        q.push(i - 1 + cone.len());
        cone.push(blowups[j + 1].clone());
    }
    rw.replace(i - 1, 3, cone, tau.clone());
    for j in (1..m).rev() {
        let b = blowups[j].clone();
        rw.replace(q[j], 1, vec![b.clone(), patches[j].clone(), b.clone()], b);
    }
    // After the backtracks, patch j sits at q_j + 2(j-1) + 1 for 0 < j < m.
    let pos = |j: usize| match j {
        0 => i - 2,
        j if j == m => q[m] + 2 * (m - 1) + 1,
        j => q[j] + 2 * (j - 1) + 1,
    };
    for j in (0..m).rev() {
        let (from, to) = (pos(j), pos(j + 1));
        let (mut seg, center) = reroute_raw(&tau, &star, &chain[j], &chain[j + 1])?;
        let last = seg.len() - 1;
        seg[0] = patches[j].clone();
        seg[last] = patches[j + 1].clone();
        rw.replace(from, to - from + 1, seg, center);
    }
    Ok(Elimination { index: i, norm: nt, chain_len: chain.len(), source })
}

/// Smallest norm of a reduced collapse.
fn min_collapse_norm(m: &MarkedGraph) -> u64 {
    if m.is_reduced() {
        return m.total_length();
    }
    m.reduced_collapses().iter().map(|(_, c)| c.total_length()).min().expect("some maximal forest")
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct PushReport {
    /// Smallest interior patch norm before each elimination; never decreases.
    pub thresholds: Vec<u64>,
    pub eliminations: Vec<Elimination>,
    pub final_length: usize,
}

const MAX_ELIMINATIONS: usize = 20_000;

/// Homotopes a standard path, rel endpoints, into the complement of the ball
/// of radius `k`, by repeatedly removing a lowest interior patch.
pub fn push_outside_ball(path: &StandardPath, k: u64) -> Result<(StandardPath, HomotopyCertificate, PushReport)> {
    path.validate()?;
    let first = path.first();
    if classify(first.sig().n(), first.sig().k()).ends != Ends::One {
        return Err(ConnectivityError::NotOneEnded);
    }
    check_dimension(first)?;
    let endpoint = path.first().total_length().min(path.last().total_length());
    if endpoint <= k {
        return Err(ConnectivityError::EndpointsTooLow { endpoint, needed: k + 1 });
    }
    let mut rw = Rewriter::new(&path.vertices);
    let mut report = PushReport::default();
    loop {
        rw.remove_backtracks();
        let p = &rw.path;
        let norms: Vec<u64> = p.iter().step_by(2).map(MarkedGraph::total_length).collect();
        let interior = || 1..norms.len().saturating_sub(1);
        let low_patch = interior().any(|j| norms[j] <= k);
        let low_odd = !low_patch && p.iter().skip(1).step_by(2).any(|x| min_collapse_norm(x) <= k);
        if !low_patch && !low_odd {
            break;
        }
        let Some(t) = interior().map(|j| norms[j]).min() else {
            return Err(ConnectivityError::EndpointsTooLow { endpoint, needed: endpoint + 1 });
        };
        if t >= endpoint {
            return Err(ConnectivityError::EndpointsTooLow { endpoint, needed: t + 1 });
        }
        if report.eliminations.len() >= MAX_ELIMINATIONS {
            return Err(ConnectivityError::SearchExhausted("elimination budget exceeded".into()));
        }
        let j = interior()
            .find(|&j| norms[j] == t && (norms[j - 1] > t || norms[j + 1] > t))
            .expect("runs of minimal patches end next to a higher patch");
        report.thresholds.push(t);
        let e = eliminate_in(&mut rw, 2 * j)?;
        report.eliminations.push(e);
    }
    report.final_length = rw.path.len();
    let (p, c) = rw.finish();
    Ok((p, c, report))
}

/// A ray of reduced marked graphs with strictly increasing norms.
#[derive(Clone, Debug)]
pub struct Ray {
    pub patches: Vec<MarkedGraph>,
    pub moves: Vec<Move>,
}

impl Ray {
    pub fn norms(&self) -> Vec<u64> {
        self.patches.iter().map(MarkedGraph::total_length).collect()
    }

    /// Standard path along the ray from index `a` to index `b` (either order).
    pub fn path(&self, a: usize, b: usize) -> Result<StandardPath> {
        let (lo, hi) = (a.min(b), a.max(b));
        let p = StandardPath::from_moves(&self.patches[lo], &self.moves[lo..hi])?;
        Ok(if a <= b { p } else { p.reversed() })
    }

    pub fn position(&self, m: &MarkedGraph) -> Option<usize> {
        let key = m.canonical_key();
        self.patches.iter().position(|r| r.canonical_key() == key)
    }
}

/// Greedy ray: at each step the move maximising `|alpha| - |e|`, ties broken
/// by the smallest move.
pub fn build_ray(seed: &MarkedGraph, length: usize) -> Result<Ray> {
    if !seed.is_reduced() {
        return Err(SpineError::NotReduced.into());
    }
    let mut ray = Ray { patches: vec![seed.clone()], moves: vec![] };
    for _ in 0..length {
        let cur = ray.patches.last().expect("nonempty");
        let star = cur.star_graph();
        let best = all_moves(cur, &star)
            .into_iter()
            .filter(|(_, d)| *d > 0)
            .max_by(|(a, da), (b, db)| da.cmp(db).then_with(|| b.cmp(a)));
        let Some((mv, _)) = best else { return Err(ConnectivityError::NoIncreasingMove) };
        let next = whitehead_move(cur, &mv.alpha, mv.edge)?;
        ray.patches.push(next);
        ray.moves.push(mv);
    }
    Ok(ray)
}

/// Outcome of pushing a loop based on a ray.
#[derive(Clone, Debug)]
pub struct LoopPush {
    /// Ray indices of the original and the new basepoint.
    pub base: usize,
    pub new_base: usize,
    /// The loop conjugated along the ray to the new basepoint.
    pub conjugated: StandardPath,
    pub pushed: StandardPath,
    pub certificate: HomotopyCertificate,
    pub report: PushReport,
}

/// Moves a closed standard path based on the ray out past the ball of radius
/// `n`: conjugate along the ray to the first ray point that lets the push
/// clear the ball, then push.
pub fn push_loop(lp: &StandardPath, n: u64, ray: &Ray) -> Result<LoopPush> {
    lp.validate()?;
    if !lp.is_closed() {
        return Err(ConnectivityError::NotAPath("loop is not closed".into()));
    }
    let base = ray.position(lp.first()).ok_or(ConnectivityError::BasepointMismatch)?;
    let norms = ray.norms();
    let mut last_err = ConnectivityError::EndpointsTooLow { endpoint: norms[norms.len() - 1], needed: n + 1 };
    for b in base..ray.patches.len() {
        if norms[b] <= n {
            continue;
        }
        let conjugated = ray.path(b, base)?.concat(lp)?.concat(&ray.path(base, b)?)?;
        match push_outside_ball(&conjugated, n) {
            Ok((pushed, certificate, report)) => {
                return Ok(LoopPush { base, new_base: b, conjugated, pushed, certificate, report });
            }
            Err(e @ ConnectivityError::EndpointsTooLow { .. }) => last_err = e,
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}
