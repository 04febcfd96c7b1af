//! Good polygons in the star of a marked graph with one active vertex.
//!
//! The search runs on a corner graph: nodes are size-two ideal edges, and two
//! nodes are joined when some size-three ideal edge contains both. A polygon is
//! a cycle of length 3, 4 or 6 through `alpha` and `beta`. Candidates drawn from
//! the edges spanned by `alpha`, `beta` and one further direction are tried
//! first; the unrestricted corner graph is the fallback.

use serde::Serialize;

use super::ConnectivityError;
use crate::gog::rev;
use crate::spine::{Direction, IdealEdge, MarkedGraph, StarGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PolygonKind {
    Triangle,
    Rectangle,
    Hexagon,
}

impl PolygonKind {
    fn from_len(n: usize) -> Option<Self> {
        match n {
            3 => Some(Self::Triangle),
            4 => Some(Self::Rectangle),
            6 => Some(Self::Hexagon),
            _ => None,
        }
    }

    pub fn corners(self) -> usize {
        match self {
            Self::Triangle => 3,
            Self::Rectangle => 4,
            Self::Hexagon => 6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PolygonSource {
    ProofGuided,
    Exhaustive,
}

/// Corners in cyclic order with `corners[0] = alpha`; `midpoints[i]` sits on
/// the side from `corners[i]` to `corners[i + 1]`.
#[derive(Clone, Debug, Serialize)]
pub struct GoodPolygon {
    pub kind: PolygonKind,
    pub vertex: usize,
    pub corners: Vec<IdealEdge>,
    pub midpoints: Vec<IdealEdge>,
    pub beta_index: usize,
    pub source: PolygonSource,
}

impl GoodPolygon {
    /// Ideal edges along the boundary from `beta` to `alpha`, avoiding the
    /// reductive midpoint if there is one.
    pub fn boundary_walk(&self, m: &MarkedGraph, star: &StarGraph) -> Vec<IdealEdge> {
        let n = self.corners.len();
        let red = |s: &IdealEdge| crate::spine::is_reductive(m, star, s);
        let forward: Vec<IdealEdge> = (self.beta_index..n)
            .flat_map(|i| [self.corners[i].clone(), self.midpoints[i].clone()])
            .chain(std::iter::once(self.corners[0].clone()))
            .collect();
        let backward: Vec<IdealEdge> = (1..=self.beta_index)
            .rev()
            .flat_map(|i| [self.corners[i].clone(), self.midpoints[i - 1].clone()])
            .chain(std::iter::once(self.corners[0].clone()))
            .collect();
        let clean = |w: &[IdealEdge]| w.iter().skip(1).step_by(2).all(|s| !red(s));
        if clean(&forward) {
            forward
        } else {
            backward
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "outcome", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PolygonOutcome {
    UnionNonreductive { union: IdealEdge },
    Polygon { polygon: GoodPolygon },
}

/// Every ideal edge of exactly `size` directions at `v`, one per orbit.
pub fn sized_ideal_edges(m: &MarkedGraph, v: usize, size: usize) -> Vec<IdealEdge> {
    let g = &m.graph;
    let q = g.group_order(m.sig(), v);
    let st = g.star(v);
    let mut out: Vec<IdealEdge> = Vec::new();
    let mut pick: Vec<usize> = Vec::new();
    fn rec(
        m: &MarkedGraph,
        v: usize,
        q: usize,
        st: &[usize],
        size: usize,
        start: usize,
        pick: &mut Vec<usize>,
        out: &mut Vec<IdealEdge>,
    ) {
        if pick.len() == size {
            let mut elems = vec![0usize; size];
            loop {
                let dirs: Vec<Direction> = pick.iter().zip(&elems).map(|(&e, &x)| Direction::new(e, x)).collect();
                if let Ok(a) = IdealEdge::new(m.sig(), &m.graph, v, &dirs) {
                    if !out.contains(&a) {
                        out.push(a);
                    }
                }
                // First element stays 0; count through the rest.
                let mut i = 1;
                while i < size {
                    elems[i] += 1;
                    if elems[i] < q {
                        break;
                    }
                    elems[i] = 0;
                    i += 1;
                }
                if i >= size {
                    break;
                }
            }
            return;
        }
        for i in start..st.len() {
            pick.push(st[i]);
            rec(m, v, q, st, size, i + 1, pick, out);
            pick.pop();
        }
    }
    rec(m, v, q, &st, size, 0, &mut pick, &mut out);
    out.sort();
    out
}

fn hypotheses(m: &MarkedGraph, star: &StarGraph, alpha: &IdealEdge, beta: &IdealEdge) -> Result<usize, ConnectivityError> {
    let bad = |s: &str| Err(ConnectivityError::HypothesesNotMet(s.into()));
    let sig = m.sig();
    let (n, k) = (sig.n(), sig.k());
    if n < 1 || 2 * k + n < 4 || (n == 2 && k == 1) {
        return bad("needs n >= 1, edge number at least three, and not A1*A2*Z");
    }
    if !m.is_reduced() {
        return bad("marked graph is not reduced");
    }
    let active = m.active_vertices();
    if active.len() != 1 {
        return bad("needs exactly one active vertex");
    }
    let v = active[0];
    if alpha.vertex != v || beta.vertex != v || alpha.size() != 2 || beta.size() != 2 {
        return bad("alpha and beta must be size-two ideal edges at the active vertex");
    }
    if alpha.compatible(sig, &m.graph, beta) {
        return bad("alpha and beta are compatible");
    }
    let a = crate::spine::ideal_abs(star, alpha);
    if !alpha.d_edges().iter().any(|&e| a >= star.edge_abs(&m.graph, e)) {
        return bad("alpha supports no move with |alpha| >= |e|");
    }
    if crate::spine::is_reductive(m, star, beta) {
        return bad("beta is reductive");
    }
    Ok(v)
}

struct CornerGraph<'a> {
    m: &'a MarkedGraph,
    nodes: Vec<IdealEdge>,
    reductive: Vec<bool>,
    /// Best midpoint for each ordered pair and whether it is reductive.
    mid: Vec<Vec<Option<(usize, bool)>>>,
    triples: &'a [IdealEdge],
}

impl<'a> CornerGraph<'a> {
    fn new(m: &'a MarkedGraph, star: &StarGraph, nodes: Vec<IdealEdge>, triples: &'a [IdealEdge], triple_red: &[bool]) -> Self {
        let sig = m.sig();
        let reductive: Vec<bool> = nodes.iter().map(|c| crate::spine::is_reductive(m, star, c)).collect();
        let n = nodes.len();
        let mut mid = vec![vec![None; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let mut best: Option<(usize, bool)> = None;
                for (t, s) in triples.iter().enumerate() {
                    if nodes[i].contained_in(sig, &m.graph, s) && nodes[j].contained_in(sig, &m.graph, s) {
                        let r = triple_red[t];
                        if best.is_none_or(|(_, br)| br && !r) {
                            best = Some((t, r));
                        }
                    }
                }
                mid[i][j] = best;
                mid[j][i] = best;
            }
        }
        Self { m, nodes, reductive, mid, triples }
    }

    /// A cycle through nodes `a` and `b` of one of the admissible lengths.
    fn search(&self, a: usize, b: usize, source: PolygonSource) -> Option<GoodPolygon> {
        for len in [3, 4, 6] {
            let mut path = vec![a];
            if let Some(p) = self.dfs(&mut path, len, b, 0) {
                let corners: Vec<IdealEdge> = p.iter().map(|&i| self.nodes[i].clone()).collect();
                let midpoints = (0..len)
                    .map(|i| self.triples[self.mid[p[i]][p[(i + 1) % len]].expect("adjacent").0].clone())
                    .collect();
                return Some(GoodPolygon {
                    kind: PolygonKind::from_len(len).expect("admissible length"),
                    vertex: self.nodes[a].vertex,
                    corners,
                    midpoints,
                    beta_index: p.iter().position(|&i| i == b).expect("beta on the cycle"),
                    source,
                });
            }
        }
        None
    }

    fn dfs(&self, path: &mut Vec<usize>, len: usize, b: usize, bad_mids: usize) -> Option<Vec<usize>> {
        let last = *path.last().expect("nonempty");
        if path.len() == len {
            let (_, r) = self.mid[last][path[0]]?;
            let total = bad_mids + usize::from(r);
            return (total <= 1 && path.contains(&b)).then(|| path.clone());
        }
        let remaining = len - path.len();
        for next in 0..self.nodes.len() {
            if path.contains(&next) || self.reductive[next] {
                continue;
            }
            if remaining == 1 && !path.contains(&b) && next != b {
                continue;
            }
            let Some((_, r)) = self.mid[last][next] else { continue };
            let total = bad_mids + usize::from(r);
            if total > 1 {
                continue;
            }
            let _ = self.m;
            path.push(next);
            if let Some(found) = self.dfs(path, len, b, total) {
                return Some(found);
            }
            path.pop();
        }
        None
    }
}

/// Either a non-reductive size-three ideal edge containing both `alpha` and
/// `beta`, or a good polygon from `alpha` to `beta`.
pub fn find_good_polygon(m: &MarkedGraph, alpha: &IdealEdge, beta: &IdealEdge) -> Result<PolygonOutcome, ConnectivityError> {
    let star = m.star_graph();
    let v = hypotheses(m, &star, alpha, beta)?;
    let sig = m.sig();
    let triples = sized_ideal_edges(m, v, 3);
    let triple_red: Vec<bool> = triples.iter().map(|s| crate::spine::is_reductive(m, &star, s)).collect();
    for (s, &r) in triples.iter().zip(&triple_red) {
        if !r && alpha.contained_in(sig, &m.graph, s) && beta.contained_in(sig, &m.graph, s) {
            return Ok(PolygonOutcome::UnionNonreductive { union: s.clone() });
        }
    }
    let pairs = sized_ideal_edges(m, v, 2);
    let index_of = |nodes: &[IdealEdge], x: &IdealEdge| nodes.iter().position(|c| c == x);

    // Edges spanned by alpha and beta with their reverses, plus one more edge.
    let mut base: Vec<usize> = alpha.edges().chain(beta.edges()).collect();
    for e in base.clone() {
        if m.graph.origin(rev(e)) == v {
            base.push(rev(e));
        }
    }
    base.sort();
    base.dedup();
    let extras: Vec<Option<usize>> = std::iter::once(None)
        .chain(m.graph.star(v).into_iter().filter(|e| !base.contains(e)).map(Some))
        .collect();
    for extra in extras {
        let support = |c: &IdealEdge| c.edges().all(|e| base.contains(&e) || Some(e) == extra);
        let nodes: Vec<IdealEdge> = pairs.iter().filter(|c| support(c)).cloned().collect();
        let (Some(a), Some(b)) = (index_of(&nodes, alpha), index_of(&nodes, beta)) else { continue };
        let graph = CornerGraph::new(m, &star, nodes, &triples, &triple_red);
        if let Some(p) = graph.search(a, b, PolygonSource::ProofGuided) {
            return Ok(PolygonOutcome::Polygon { polygon: p });
        }
    }
    let (Some(a), Some(b)) = (index_of(&pairs, alpha), index_of(&pairs, beta)) else {
        return Err(ConnectivityError::HypothesesNotMet("alpha or beta is not normalized".into()));
    };
    let graph = CornerGraph::new(m, &star, pairs, &triples, &triple_red);
    match graph.search(a, b, PolygonSource::Exhaustive) {
        Some(p) => Ok(PolygonOutcome::Polygon { polygon: p }),
        None => Err(ConnectivityError::SearchExhausted(format!(
            "no good polygon from {alpha:?} to {beta:?} in {m:?}"
        ))),
    }
}

/// Checks the defining conditions of a good polygon from `alpha` to `beta`
/// directly on the star graph of `m`.
pub fn validate_good_polygon(m: &MarkedGraph, alpha: &IdealEdge, beta: &IdealEdge, p: &GoodPolygon) -> Result<(), String> {
    let g = &m.graph;
    let sig = m.sig();
    let star = m.star_graph();
    let local = star.local(p.vertex);
    let abs = |dirs: &[Direction]| -> u64 {
        let idx: Vec<usize> = dirs.iter().map(|&d| local.index(d)).collect();
        local.graph.absolute(&idx)
    };
    // An ideal edge is reductive when no collapsible edge has smaller absolute value.
    let reductive = |s: &IdealEdge| {
        let a = abs(&s.dirs);
        s.dirs
            .iter()
            .filter(|d| !s.dirs.iter().any(|x| x.edge == rev(d.edge)))
            .all(|d| a <= abs(&[Direction::new(d.edge, 0)]))
    };
    let n = p.corners.len();
    if p.kind.corners() != n || p.midpoints.len() != n {
        return Err(format!("{:?} needs {} corners and midpoints", p.kind, p.kind.corners()));
    }
    // The center is the marked graph itself: every corner and midpoint is based there.
    for s in p.corners.iter().chain(&p.midpoints) {
        if s.vertex != p.vertex || IdealEdge::new(sig, g, s.vertex, &s.dirs).is_err() {
            return Err(format!("{s:?} is not an ideal edge at the center's vertex {}", p.vertex));
        }
    }
    if p.corners.iter().any(|c| c.size() != 2) {
        return Err("a corner is not of size two".into());
    }
    let equiv = |x: &IdealEdge, y: &IdealEdge| x.equivalent(sig, g, y);
    if !equiv(&p.corners[0], alpha) || p.beta_index >= n || !equiv(&p.corners[p.beta_index], beta) {
        return Err("alpha and beta are not corners".into());
    }
    if p.midpoints.iter().any(|s| s.size() != 3) {
        return Err("a midpoint is not of size three".into());
    }
    for i in 0..n {
        let s = &p.midpoints[i];
        for c in [&p.corners[i], &p.corners[(i + 1) % n]] {
            if !c.compatible(sig, g, s) {
                return Err(format!("midpoint {i} is not compatible with its corner {c:?}"));
            }
        }
    }
    let red_mids = p.midpoints.iter().filter(|s| reductive(s)).count();
    if red_mids > 1 {
        return Err(format!("{red_mids} reductive midpoints"));
    }
    if p.corners.iter().skip(1).any(reductive) {
        return Err("a corner other than alpha is reductive".into());
    }
    Ok(())
}
