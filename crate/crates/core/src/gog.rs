//! Graphs of finite groups with trivial edge groups, edge paths and loops in
//! them, edge collapses, and collapsible forests.
//!
//! Oriented edges are numbered `2*i` (as stored) and `2*i + 1` (reversed), so
//! reversal is `o ^ 1`. A group element at a trivial vertex is always `0`.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{least_rotation, FactorSignature, FiniteGroupTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GogError {
    #[error("edges do not chain: {0}")]
    Incidence(String),
    #[error("illegal collapse of edge {edge}: {reason}")]
    IllegalCollapse { edge: usize, reason: String },
    #[error("exchange impossible: {0}")]
    ExchangeImpossible(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VertexGroup {
    Trivial,
    Factor(usize),
}

impl VertexGroup {
    pub fn is_trivial(self) -> bool {
        self == VertexGroup::Trivial
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GraphOfGroups {
    pub vertices: Vec<VertexGroup>,
    /// Unoriented edges as stored `(initial, terminal)`.
    pub edges: Vec<(usize, usize)>,
}

#[inline]
pub fn rev(o: usize) -> usize {
    o ^ 1
}

#[inline]
pub fn underlying(o: usize) -> usize {
    o >> 1
}

impl GraphOfGroups {
    pub fn new(vertices: Vec<VertexGroup>, edges: Vec<(usize, usize)>) -> Result<Self, GogError> {
        let nv = vertices.len();
        if nv == 0 {
            return Err(GogError::InvalidGraph("no vertices".into()));
        }
        if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= nv || b >= nv) {
            return Err(GogError::InvalidGraph(format!("edge ({a},{b}) out of range")));
        }
        let g = Self { vertices, edges };
        if !g.is_connected() {
            return Err(GogError::InvalidGraph("graph is not connected".into()));
        }
        Ok(g)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_oriented(&self) -> usize {
        2 * self.edges.len()
    }

    #[inline]
    pub fn origin(&self, o: usize) -> usize {
        let (a, b) = self.edges[o >> 1];
        if o & 1 == 0 {
            a
        } else {
            b
        }
    }

    #[inline]
    pub fn terminus(&self, o: usize) -> usize {
        self.origin(o ^ 1)
    }

    pub fn is_loop_edge(&self, e: usize) -> bool {
        let (a, b) = self.edges[e];
        a == b
    }

    /// Oriented edges starting at `v`, in increasing order.
    pub fn star(&self, v: usize) -> Vec<usize> {
        (0..self.num_oriented()).filter(|&o| self.origin(o) == v).collect()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|&(a, b)| usize::from(a == v) + usize::from(b == v))
            .sum()
    }

    pub fn group<'a>(&self, sig: &'a FactorSignature, v: usize) -> Option<&'a FiniteGroupTable> {
        match self.vertices[v] {
            VertexGroup::Trivial => None,
            VertexGroup::Factor(i) => Some(sig.factor(i)),
        }
    }

    pub fn group_order(&self, sig: &FactorSignature, v: usize) -> usize {
        self.group(sig, v).map_or(1, FiniteGroupTable::order)
    }

    #[inline]
    pub fn vmul(&self, sig: &FactorSignature, v: usize, a: usize, b: usize) -> usize {
        match self.vertices[v] {
            VertexGroup::Trivial => 0,
            VertexGroup::Factor(i) => sig.factor(i).mul(a, b),
        }
    }

    #[inline]
    pub fn vinv(&self, sig: &FactorSignature, v: usize, a: usize) -> usize {
        match self.vertices[v] {
            VertexGroup::Trivial => 0,
            VertexGroup::Factor(i) => sig.factor(i).inv(a),
        }
    }

    pub fn is_connected(&self) -> bool {
        self.components(&[]).len() <= 1
    }

    /// Connected components after deleting the given unoriented edges.
    fn components(&self, removed: &[usize]) -> Vec<Vec<usize>> {
        let nv = self.num_vertices();
        let mut adj = vec![Vec::new(); nv];
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            if !removed.contains(&i) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        let mut comp = vec![usize::MAX; nv];
        let mut out = Vec::new();
        for s in 0..nv {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            comp[s] = id;
            let mut i = 0;
            while i < members.len() {
                let x = members[i];
                i += 1;
                for &y in &adj[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = id;
                        members.push(y);
                    }
                }
            }
            out.push(members);
        }
        out
    }

    /// Rank of the fundamental group of the underlying graph.
    pub fn rank(&self) -> usize {
        self.num_edges() + 1 - self.num_vertices()
    }
}

/// One edge of a graph-of-groups path followed by the group element at its terminus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Step {
    pub edge: usize,
    pub elem: usize,
}

impl Step {
    pub fn new(edge: usize, elem: usize) -> Self {
        Self { edge, elem }
    }
}

/// `g0 e1 g1 ... em gm` starting at `base`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgePath {
    pub base: usize,
    pub g0: usize,
    pub steps: Vec<Step>,
}

impl EdgePath {
    pub fn end(&self, g: &GraphOfGroups) -> usize {
        self.steps.last().map_or(self.base, |s| g.terminus(s.edge))
    }

    pub fn validate(&self, sig: &FactorSignature, g: &GraphOfGroups) -> Result<(), GogError> {
        let check_elem = |v: usize, x: usize| {
            if x >= g.group_order(sig, v) {
                Err(GogError::Incidence(format!("element {x} not in the group at vertex {v}")))
            } else {
                Ok(())
            }
        };
        if self.base >= g.num_vertices() {
            return Err(GogError::Incidence(format!("no vertex {}", self.base)));
        }
        check_elem(self.base, self.g0)?;
        let mut at = self.base;
        for s in &self.steps {
            if s.edge >= g.num_oriented() {
                return Err(GogError::Incidence(format!("no oriented edge {}", s.edge)));
            }
            if g.origin(s.edge) != at {
                return Err(GogError::Incidence(format!(
                    "oriented edge {} does not start at vertex {at}",
                    s.edge
                )));
            }
            at = g.terminus(s.edge);
            check_elem(at, s.elem)?;
        }
        Ok(())
    }

    pub fn inverse(&self, sig: &FactorSignature, g: &GraphOfGroups) -> EdgePath {
        let m = self.steps.len();
        let end = self.end(g);
        let last = self.steps.last().map_or(self.g0, |s| s.elem);
        let mut steps = Vec::with_capacity(m);
        for i in (0..m).rev() {
            let before = if i == 0 { self.g0 } else { self.steps[i - 1].elem };
            let v = g.origin(self.steps[i].edge);
            steps.push(Step::new(rev(self.steps[i].edge), g.vinv(sig, v, before)));
        }
        EdgePath { base: end, g0: g.vinv(sig, end, last), steps }
    }

    /// Concatenation; the end of `self` must be the base of `other`.
    pub fn concat(&self, sig: &FactorSignature, g: &GraphOfGroups, other: &EdgePath) -> EdgePath {
        let at = self.end(g);
        let mut out = self.clone();
        match out.steps.last_mut() {
            Some(s) => s.elem = g.vmul(sig, at, s.elem, other.g0),
            None => out.g0 = g.vmul(sig, at, out.g0, other.g0),
        }
        out.steps.extend_from_slice(&other.steps);
        out
    }
}

/// Appends a step to a reduced chain, cancelling `e 1 ē` backtracks.
fn push_step(sig: &FactorSignature, g: &GraphOfGroups, g0: &mut usize, out: &mut Vec<Step>, s: Step) {
    if let Some(top) = out.last() {
        if top.edge == rev(s.edge) && top.elem == 0 {
            out.pop();
            let v = g.terminus(s.edge);
            match out.last_mut() {
                Some(t) => t.elem = g.vmul(sig, v, t.elem, s.elem),
                None => *g0 = g.vmul(sig, v, *g0, s.elem),
            }
            return;
        }
    }
    out.push(s);
}

pub fn reduce_path(sig: &FactorSignature, g: &GraphOfGroups, p: &EdgePath) -> Result<EdgePath, GogError> {
    p.validate(sig, g)?;
    let mut g0 = p.g0;
    let mut out = Vec::with_capacity(p.steps.len());
    for &s in &p.steps {
        push_step(sig, g, &mut g0, &mut out, s);
    }
    Ok(EdgePath { base: p.base, g0, steps: out })
}

/// A conjugacy class in the fundamental group, as a cyclically reduced loop in
/// canonical rotation. `steps[i].elem` sits between `steps[i].edge` and
/// `steps[i+1].edge` (cyclically).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LoopRep {
    Elliptic { vertex: usize, elem: usize },
    Cycle(Vec<Step>),
}

impl LoopRep {
    pub fn length(&self) -> usize {
        match self {
            LoopRep::Elliptic { .. } => 0,
            LoopRep::Cycle(s) => s.len(),
        }
    }

    pub fn steps(&self) -> &[Step] {
        match self {
            LoopRep::Elliptic { .. } => &[],
            LoopRep::Cycle(s) => s,
        }
    }

    /// The loop read as a closed path based at the origin of its first edge.
    pub fn to_path(&self, g: &GraphOfGroups) -> EdgePath {
        match self {
            LoopRep::Elliptic { vertex, elem } => EdgePath { base: *vertex, g0: *elem, steps: vec![] },
            LoopRep::Cycle(s) => EdgePath { base: g.origin(s[0].edge), g0: 0, steps: s.clone() },
        }
    }

    /// Turns crossed by the loop: at position `i`, the pair
    /// `{(1, ē_i), (x_i, e_{i+1})}` at the terminus of `e_i`.
    pub fn turns(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let s = self.steps();
        let m = s.len();
        (0..m).map(move |i| (rev(s[i].edge), s[i].elem, s[(i + 1) % m].edge))
    }

    pub fn cyclically_reduce(&self, sig: &FactorSignature, g: &GraphOfGroups) -> Result<LoopRep, GogError> {
        close_path(sig, g, &self.to_path(g))
    }
}

/// Conjugacy class of a closed path, cyclically reduced and canonically rotated.
pub fn close_path(sig: &FactorSignature, g: &GraphOfGroups, p: &EdgePath) -> Result<LoopRep, GogError> {
    let r = reduce_path(sig, g, p)?;
    if r.end(g) != r.base {
        return Err(GogError::Incidence("path is not closed".into()));
    }
    Ok(close_reduced(sig, g, r))
}

pub(crate) fn close_reduced(sig: &FactorSignature, g: &GraphOfGroups, r: EdgePath) -> LoopRep {
    if r.steps.is_empty() {
        return elliptic(sig, g, r.base, r.g0);
    }
    let mut d: VecDeque<Step> = r.steps.into();
    let back = d.back_mut().expect("nonempty");
    back.elem = g.vmul(sig, r.base, back.elem, r.g0);
    while d.len() >= 2 {
        let (first, last) = (d[0], d[d.len() - 1]);
        if last.edge != rev(first.edge) || last.elem != 0 {
            break;
        }
        d.pop_back();
        d.pop_front();
        let v = g.terminus(first.edge);
        match d.back_mut() {
            Some(b) => b.elem = g.vmul(sig, v, b.elem, first.elem),
            None => return elliptic(sig, g, v, first.elem),
        }
    }
    let v: Vec<Step> = d.into();
    LoopRep::Cycle(least_rotation(&v))
}

fn elliptic(sig: &FactorSignature, g: &GraphOfGroups, vertex: usize, elem: usize) -> LoopRep {
    let elem = match g.group(sig, vertex) {
        None => 0,
        Some(t) => (0..t.order()).map(|h| t.conjugate(h, elem)).min().unwrap_or(elem),
    };
    LoopRep::Elliptic { vertex, elem }
}

/// Result of collapsing edges: the new graph, rewritten loops and index maps.
#[derive(Clone, Debug)]
pub struct Collapsed {
    pub graph: GraphOfGroups,
    pub loops: Vec<LoopRep>,
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<Option<usize>>,
}

pub fn check_collapsible(g: &GraphOfGroups, e: usize) -> Result<(), GogError> {
    if e >= g.num_edges() {
        return Err(GogError::IllegalCollapse { edge: e, reason: "no such edge".into() });
    }
    let (a, b) = g.edges[e];
    if a == b {
        return Err(GogError::IllegalCollapse { edge: e, reason: "edge is a loop".into() });
    }
    if !g.vertices[a].is_trivial() && !g.vertices[b].is_trivial() {
        return Err(GogError::IllegalCollapse {
            edge: e,
            reason: "both endpoints carry nontrivial groups".into(),
        });
    }
    Ok(())
}

pub fn collapse_edge(
    sig: &FactorSignature,
    g: &GraphOfGroups,
    loops: &[LoopRep],
    e: usize,
) -> Result<Collapsed, GogError> {
    check_collapsible(g, e)?;
    let (a, b) = g.edges[e];
    let (keep, gone) = if g.vertices[b].is_trivial() { (a, b) } else { (b, a) };
    let vertex_map: Vec<usize> = (0..g.num_vertices())
        .map(|x| {
            let x = if x == gone { keep } else { x };
            x - usize::from(x > gone)
        })
        .collect();
    let edge_map: Vec<Option<usize>> = (0..g.num_edges())
        .map(|j| (j != e).then(|| j - usize::from(j > e)))
        .collect();
    let mut vertices = g.vertices.clone();
    vertices.remove(gone);
    let edges = g
        .edges
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != e)
        .map(|(_, &(x, y))| (vertex_map[x], vertex_map[y]))
        .collect();
    let graph = GraphOfGroups { vertices, edges };
    let remap = |o: usize| 2 * edge_map[o >> 1].expect("kept edge") + (o & 1);
    let loops = loops
        .iter()
        .map(|l| {
            let p = l.to_path(g);
            let mut g0 = p.g0;
            let mut steps: Vec<Step> = Vec::with_capacity(p.steps.len());
            for s in &p.steps {
                if underlying(s.edge) == e {
                    // Endpoints merge into `keep`; the element at `gone` is the identity.
                    match steps.last_mut() {
                        Some(t) => t.elem = g.vmul(sig, keep, t.elem, s.elem),
                        None => g0 = g.vmul(sig, keep, g0, s.elem),
                    }
                } else {
                    steps.push(Step::new(remap(s.edge), s.elem));
                }
            }
            let np = EdgePath { base: vertex_map[p.base], g0, steps };
            close_path(sig, &graph, &np).expect("collapse preserves incidence")
        })
        .collect();
    Ok(Collapsed { graph, loops, vertex_map, edge_map })
}

/// Collapses a forest, one edge at a time, tracking indices.
pub fn collapse_forest(
    sig: &FactorSignature,
    g: &GraphOfGroups,
    loops: &[LoopRep],
    forest: &[usize],
) -> Result<Collapsed, GogError> {
    let mut cur = Collapsed {
        graph: g.clone(),
        loops: loops.to_vec(),
        vertex_map: (0..g.num_vertices()).collect(),
        edge_map: (0..g.num_edges()).map(Some).collect(),
    };
    for &e in forest {
        let now = cur.edge_map[e].ok_or_else(|| GogError::IllegalCollapse {
            edge: e,
            reason: "edge listed twice".into(),
        })?;
        let step = collapse_edge(sig, &cur.graph, &cur.loops, now)?;
        for v in &mut cur.vertex_map {
            *v = step.vertex_map[*v];
        }
        for m in &mut cur.edge_map {
            *m = m.and_then(|x| step.edge_map[x]);
        }
        cur.graph = step.graph;
        cur.loops = step.loops;
    }
    Ok(cur)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    Disconnected,
    LowValenceTrivial { vertex: usize, valence: usize },
    NonSurvivingEdge { edge: usize },
}

/// Checks the defining conditions for a vertex of the spine; an empty list means it is one.
pub fn vertex_of_l_violations(g: &GraphOfGroups) -> Vec<Violation> {
    if !g.is_connected() {
        return vec![Violation::Disconnected];
    }
    let mut out = Vec::new();
    for v in 0..g.num_vertices() {
        let val = g.valence(v);
        if g.vertices[v].is_trivial() && val <= 2 {
            out.push(Violation::LowValenceTrivial { vertex: v, valence: val });
        }
    }
    for e in 0..g.num_edges() {
        let comps = g.components(&[e]);
        if comps.len() > 1
            && comps
                .iter()
                .any(|c| c.iter().all(|&v| g.vertices[v].is_trivial()))
        {
            out.push(Violation::NonSurvivingEdge { edge: e });
        }
    }
    out
}

pub fn is_vertex_of_l(g: &GraphOfGroups) -> bool {
    vertex_of_l_violations(g).is_empty()
}

/// No non-loop edge has a trivial endpoint.
pub fn is_reduced(g: &GraphOfGroups) -> bool {
    g.edges
        .iter()
        .all(|&(a, b)| a == b || (!g.vertices[a].is_trivial() && !g.vertices[b].is_trivial()))
}

struct Dsu {
    parent: Vec<usize>,
    nontrivial: Vec<bool>,
}

impl Dsu {
    fn new(g: &GraphOfGroups) -> Self {
        Self {
            parent: (0..g.num_vertices()).collect(),
            nontrivial: g.vertices.iter().map(|v| !v.is_trivial()).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    /// Joins the components of `a` and `b` if that keeps a collapsible forest.
    fn try_union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb || (self.nontrivial[ra] && self.nontrivial[rb]) {
            return false;
        }
        self.parent[ra] = rb;
        self.nontrivial[rb] |= self.nontrivial[ra];
        true
    }
}

/// Static forest test: acyclic, no loops, at most one nontrivial vertex per tree.
pub fn is_forest(g: &GraphOfGroups, edges: &[usize]) -> bool {
    let mut d = Dsu::new(g);
    edges.iter().all(|&e| {
        let (a, b) = g.edges[e];
        d.try_union(a, b)
    })
}

pub fn is_maximal_forest(g: &GraphOfGroups, edges: &[usize]) -> bool {
    if !is_forest(g, edges) {
        return false;
    }
    let mut with: Vec<usize> = edges.to_vec();
    (0..g.num_edges()).filter(|e| !edges.contains(e)).all(|e| {
        with.push(e);
        let ok = !is_forest(g, &with);
        with.pop();
        ok
    })
}

/// All inclusion-maximal collapsible forests, each sorted, in lexicographic order.
pub fn maximal_forests(g: &GraphOfGroups) -> Vec<Vec<usize>> {
    fn rec(g: &GraphOfGroups, i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == g.num_edges() {
            if is_maximal_forest(g, cur) {
                out.push(cur.clone());
            }
            return;
        }
        cur.push(i);
        if is_forest(g, cur) {
            rec(g, i + 1, cur, out);
        }
        cur.pop();
        rec(g, i + 1, cur, out);
    }
    let mut out = Vec::new();
    rec(g, 0, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Given maximal forests `f`, `f2` and `e2 ∈ f2 ∖ f`, finds `e ∈ f ∖ f2` with
/// `f ∪ {e2} ∖ {e}` maximal, by searching the cycle or the path between two
/// nontrivial vertices that `e2` creates in `f`.
pub fn forest_exchange(g: &GraphOfGroups, f: &[usize], f2: &[usize], e2: usize) -> Result<usize, GogError> {
    if !is_maximal_forest(g, f) || !is_maximal_forest(g, f2) {
        return Err(GogError::ExchangeImpossible("inputs must be maximal forests".into()));
    }
    if f.contains(&e2) || !f2.contains(&e2) {
        return Err(GogError::ExchangeImpossible(format!("edge {e2} is not in F' - F")));
    }
    let (a, b) = g.edges[e2];
    let path_in_f = |from: usize, to: usize| forest_path(g, f, from, to);
    let circuit: Vec<usize> = if let Some(p) = path_in_f(a, b) {
        p
    } else {
        let nearest = |s: usize| {
            (0..g.num_vertices())
                .filter(|&v| !g.vertices[v].is_trivial())
                .filter_map(|v| path_in_f(s, v))
                .min_by_key(Vec::len)
        };
        match (nearest(a), nearest(b)) {
            (Some(pa), Some(pb)) => pa.into_iter().chain(pb).collect(),
            _ => return Err(GogError::ExchangeImpossible("F + e' is still a forest".into())),
        }
    };
    let candidates: BTreeSet<usize> = circuit.into_iter().filter(|e| !f2.contains(e)).collect();
    for e in candidates {
        let mut h: Vec<usize> = f.iter().copied().filter(|&x| x != e).collect();
        h.push(e2);
        if is_maximal_forest(g, &h) {
            return Ok(e);
        }
    }
    Err(GogError::ExchangeImpossible("no edge on the circuit works".into()))
}

/// Unoriented edges on the path from `from` to `to` inside forest `f`, if connected.
fn forest_path(g: &GraphOfGroups, f: &[usize], from: usize, to: usize) -> Option<Vec<usize>> {
    let nv = g.num_vertices();
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; nv];
    let mut seen = vec![false; nv];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        if x == to {
            let mut out = Vec::new();
            let mut y = to;
            while let Some((p, e)) = prev[y] {
                out.push(e);
                y = p;
            }
            return Some(out);
        }
        for &e in f {
            let (a, b) = g.edges[e];
            let y = if a == x { b } else if b == x { a } else { continue };
            if !seen[y] {
                seen[y] = true;
                prev[y] = Some((x, e));
                queue.push_back(y);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use VertexGroup::{Factor, Trivial};

    fn sig21() -> FactorSignature {
        FactorSignature::cyclic(&[2, 2], 1).unwrap()
    }

    /// A1 vertex with loop s (edge 0) and edge t (edge 1) to the A2 vertex.
    fn patch21() -> GraphOfGroups {
        GraphOfGroups::new(vec![Factor(0), Factor(1)], vec![(0, 0), (0, 1)]).unwrap()
    }

    #[test]
    fn backtrack_cancels_only_through_identity() {
        let sig = sig21();
        let g = patch21();
        let t = 2;
        let p = EdgePath { base: 0, g0: 0, steps: vec![Step::new(t, 0), Step::new(rev(t), 0)] };
        let r = reduce_path(&sig, &g, &p).unwrap();
        assert!(r.steps.is_empty());
        let p = EdgePath { base: 0, g0: 0, steps: vec![Step::new(t, 1), Step::new(rev(t), 0)] };
        assert_eq!(reduce_path(&sig, &g, &p).unwrap(), p);
        let p = EdgePath { base: 0, g0: 1, steps: vec![Step::new(t, 0), Step::new(rev(t), 1)] };
        let r = reduce_path(&sig, &g, &p).unwrap();
        assert_eq!((r.g0, r.steps.len()), (0, 0));
    }

    #[test]
    fn bad_incidence_is_rejected() {
        let sig = sig21();
        let g = patch21();
        let p = EdgePath { base: 1, g0: 0, steps: vec![Step::new(0, 0)] };
        assert!(matches!(reduce_path(&sig, &g, &p), Err(GogError::Incidence(_))));
    }

    #[test]
    fn loops_close_and_rotate() {
        let sig = sig21();
        let g = patch21();
        // a1 t a2 t̄ is already reduced, length 2.
        let p = EdgePath { base: 0, g0: 1, steps: vec![Step::new(2, 1), Step::new(3, 0)] };
        let l = close_path(&sig, &g, &p).unwrap();
        assert_eq!(l.length(), 2);
        // t 1 t̄ closes to the identity.
        let p = EdgePath { base: 0, g0: 0, steps: vec![Step::new(2, 0), Step::new(3, 0)] };
        assert_eq!(close_path(&sig, &g, &p).unwrap(), LoopRep::Elliptic { vertex: 0, elem: 0 });
    }

    #[test]
    fn collapse_single_edge() {
        let sig = FactorSignature::cyclic(&[2], 0).unwrap();
        let g = GraphOfGroups::new(vec![Factor(0), Trivial], vec![(0, 1)]).unwrap();
        let c = collapse_edge(&sig, &g, &[], 0).unwrap();
        assert_eq!(c.graph.vertices, vec![Factor(0)]);
        assert!(c.graph.edges.is_empty());
        assert!(collapse_edge(&sig, &patch21(), &[], 0).is_err());
        assert!(collapse_edge(&sig21(), &patch21(), &[], 1).is_err());
    }

    #[test]
    fn vertex_of_l_examples() {
        let rose = GraphOfGroups::new(vec![Factor(0)], vec![(0, 0)]).unwrap();
        assert!(is_vertex_of_l(&rose));
        let bad = GraphOfGroups::new(vec![Trivial, Trivial], vec![(0, 1)]).unwrap();
        assert!(vertex_of_l_violations(&bad)
            .iter()
            .any(|v| matches!(v, Violation::LowValenceTrivial { .. })));
        // A1 with a loop, and a bridge to a trivial vertex carrying two loops.
        let g = GraphOfGroups::new(vec![Factor(0), Trivial], vec![(0, 0), (0, 1), (1, 1), (1, 1)]).unwrap();
        assert!(vertex_of_l_violations(&g).contains(&Violation::NonSurvivingEdge { edge: 1 }));
    }

    #[test]
    fn reducedness_examples() {
        let g = GraphOfGroups::new(vec![Factor(0), Factor(1)], vec![(0, 1)]).unwrap();
        assert!(is_reduced(&g));
        assert!(is_reduced(&patch21()));
        let g = GraphOfGroups::new(
            vec![Factor(0), Trivial, Factor(1), Factor(2)],
            vec![(0, 0), (0, 1), (1, 2), (1, 3)],
        )
        .unwrap();
        assert!(!is_reduced(&g));
    }

    #[test]
    fn tripod_has_three_maximal_forests() {
        let g = GraphOfGroups::new(
            vec![Trivial, Factor(0), Factor(1), Factor(2)],
            vec![(0, 1), (0, 2), (0, 3)],
        )
        .unwrap();
        assert_eq!(maximal_forests(&g), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(forest_exchange(&g, &[0], &[1], 1).unwrap(), 0);
        assert!(forest_exchange(&g, &[0], &[0], 0).is_err());
    }

    #[test]
    fn triangle_of_collapsible_edges() {
        // A trivial triangle hanging off A1 by its corners: every spanning tree of the triangle is a forest.
        let g = GraphOfGroups::new(
            vec![Factor(0), Trivial, Trivial],
            vec![(0, 1), (1, 2), (2, 0)],
        )
        .unwrap();
        let forests = maximal_forests(&g);
        assert_eq!(forests.len(), 3);
        assert!(forests.iter().all(|f| f.len() == 2));
        let e = forest_exchange(&g, &[0, 1], &[1, 2], 2).unwrap();
        assert_eq!(e, 0);
    }
}
