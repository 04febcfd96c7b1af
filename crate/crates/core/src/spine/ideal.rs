use serde::{Deserialize, Serialize};

use super::star::Direction;
use super::{MarkedGraph, SpineError};
use crate::algebra::FactorSignature;
use crate::gog::{rev, GraphOfGroups};

/// A set of directions at one vertex, at most one per edge, stored sorted by
/// edge and normalized so the first element is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IdealEdge {
    pub vertex: usize,
    pub dirs: Vec<Direction>,
}

impl IdealEdge {
    /// Validates the three defining conditions and normalizes.
    pub fn new(
        sig: &FactorSignature,
        g: &GraphOfGroups,
        vertex: usize,
        dirs: &[Direction],
    ) -> Result<Self, SpineError> {
        let bad = |m: String| Err(SpineError::InvalidIdealEdge(m));
        let mut dirs = dirs.to_vec();
        dirs.sort();
        if dirs.windows(2).any(|w| w[0].edge == w[1].edge) {
            return bad("two directions on the same edge".into());
        }
        let order = g.group_order(sig, vertex);
        for d in &dirs {
            if d.edge >= g.num_oriented() || g.origin(d.edge) != vertex || d.elem >= order {
                return bad(format!("direction ({}, {}) is not at vertex {vertex}", d.elem, d.edge));
            }
        }
        let total = g.valence(vertex) * order;
        if dirs.len() < 2 || total - dirs.len() < 2 {
            return bad("ideal edge and its complement need at least two directions".into());
        }
        let a = Self::normalized(sig, g, vertex, dirs);
        if a.d_edges().is_empty() {
            return bad("no direction whose reverse edge is outside the set".into());
        }
        Ok(a)
    }

    pub(crate) fn normalized(sig: &FactorSignature, g: &GraphOfGroups, vertex: usize, mut dirs: Vec<Direction>) -> Self {
        dirs.sort();
        if let Some(first) = dirs.first() {
            let h = g.vinv(sig, vertex, first.elem);
            for d in &mut dirs {
                d.elem = g.vmul(sig, vertex, h, d.elem);
            }
        }
        Self { vertex, dirs }
    }

    pub fn size(&self) -> usize {
        self.dirs.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.dirs.iter().map(|d| d.edge)
    }

    pub fn has_edge(&self, e: usize) -> bool {
        self.dirs.iter().any(|d| d.edge == e)
    }

    pub fn elem_of(&self, e: usize) -> Option<usize> {
        self.dirs.iter().find(|d| d.edge == e).map(|d| d.elem)
    }

    /// Oriented edges `e` of the set with `ē` not in it.
    pub fn d_edges(&self) -> Vec<usize> {
        self.edges().filter(|&e| !self.has_edge(rev(e))).collect()
    }

    pub fn translate(&self, sig: &FactorSignature, g: &GraphOfGroups, h: usize) -> Vec<Direction> {
        self.dirs
            .iter()
            .map(|d| Direction::new(d.edge, g.vmul(sig, self.vertex, h, d.elem)))
            .collect()
    }

    /// Some translate `h·self` is a subset of `other`.
    pub fn contained_in(&self, sig: &FactorSignature, g: &GraphOfGroups, other: &IdealEdge) -> bool {
        if self.vertex != other.vertex || self.size() > other.size() {
            return false;
        }
        let Some(first) = other.elem_of(self.dirs[0].edge) else {
            return false;
        };
        // self is normalized, so h is the element of `other` on self's first edge.
        self.dirs.iter().all(|d| {
            other.elem_of(d.edge) == Some(g.vmul(sig, self.vertex, first, d.elem))
        })
    }

    pub fn disjoint_from(&self, other: &IdealEdge) -> bool {
        self.vertex != other.vertex || !self.edges().any(|e| other.has_edge(e))
    }

    pub fn compatible(&self, sig: &FactorSignature, g: &GraphOfGroups, other: &IdealEdge) -> bool {
        self.disjoint_from(other) || self.contained_in(sig, g, other) || other.contained_in(sig, g, self)
    }

    /// Same orbit, or complementary at a vertex with trivial group.
    pub fn equivalent(&self, sig: &FactorSignature, g: &GraphOfGroups, other: &IdealEdge) -> bool {
        if self.size() == other.size() && self.contained_in(sig, g, other) {
            return true;
        }
        self.vertex == other.vertex
            && g.vertices[self.vertex].is_trivial()
            && g.star(self.vertex).iter().all(|&e| self.has_edge(e) != other.has_edge(e))
    }

    /// Union of the direction sets, if it still has at most one direction per edge.
    pub fn union(&self, other: &IdealEdge) -> Option<Vec<Direction>> {
        if self.vertex != other.vertex {
            return None;
        }
        let mut out = self.dirs.clone();
        for d in &other.dirs {
            match self.elem_of(d.edge) {
                Some(x) if x != d.elem => return None,
                Some(_) => {}
                None => out.push(*d),
            }
        }
        out.sort();
        Some(out)
    }
}

/// Representatives of every equivalence class of ideal edges at `v` of size at most `max_size`.
pub fn enumerate_ideal_edges(m: &MarkedGraph, v: usize, max_size: usize) -> Result<Vec<IdealEdge>, SpineError> {
    enumerate_in(m.sig(), &m.graph, v, max_size)
}

pub(crate) fn enumerate_in(
    sig: &FactorSignature,
    g: &GraphOfGroups,
    v: usize,
    max_size: usize,
) -> Result<Vec<IdealEdge>, SpineError> {
    if v >= g.num_vertices() {
        return Err(SpineError::Invalid(format!("no vertex {v}")));
    }
    if g.valence(v) < 2 {
        return Err(SpineError::InactiveVertex(v));
    }
    let st = g.star(v);
    let order = g.group_order(sig, v);
    let total = st.len() * order;
    let trivial = g.vertices[v].is_trivial();
    let mut out = Vec::new();
    let m = st.len();
    for mask in 1u64..(1u64 << m) {
        let size = mask.count_ones() as usize;
        if size < 2 || size > max_size || total - size < 2 {
            continue;
        }
        let edges: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| st[i]).collect();
        if !edges.iter().any(|&e| !edges.contains(&rev(e))) {
            continue;
        }
        if trivial {
            let comp: Vec<usize> = st.iter().copied().filter(|e| !edges.contains(e)).collect();
            let comp_ok = comp.len() >= 2 && comp.iter().any(|&e| !comp.contains(&rev(e)));
            if comp_ok && comp < edges {
                continue;
            }
        }
        // Elements on every edge but the first, the first pinned to the identity.
        let mut elems = vec![0usize; size];
        loop {
            let dirs = edges.iter().zip(&elems).map(|(&e, &x)| Direction::new(e, x)).collect();
            out.push(IdealEdge { vertex: v, dirs });
            let mut i = 1;
            while i < size {
                elems[i] += 1;
                if elems[i] < order {
                    break;
                }
                elems[i] = 0;
                i += 1;
            }
            if i == size {
                break;
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Every ideal edge of a marked graph, over all active vertices.
pub fn all_ideal_edges(m: &MarkedGraph, max_size: usize) -> Vec<IdealEdge> {
    (0..m.graph.num_vertices())
        .filter(|&v| m.graph.valence(v) >= 2)
        .flat_map(|v| enumerate_in(m.sig(), &m.graph, v, max_size).expect("active vertex"))
        .collect()
}

/// Checks pairwise compatibility and that no two members are equivalent.
pub fn check_forest(sig: &FactorSignature, g: &GraphOfGroups, phi: &[IdealEdge]) -> Result<(), SpineError> {
    for (i, a) in phi.iter().enumerate() {
        for b in &phi[i + 1..] {
            if !a.compatible(sig, g, b) {
                return Err(SpineError::IncompatibleForest(format!("{a:?} and {b:?} are incompatible")));
            }
            if a.equivalent(sig, g, b) {
                return Err(SpineError::IncompatibleForest(format!("{a:?} and {b:?} are equivalent")));
            }
        }
    }
    Ok(())
}

/// All ideal forests (sets of pairwise compatible, pairwise inequivalent ideal
/// edges, including the empty one) drawn from `pool`, up to `limit` members.
pub fn ideal_forests(sig: &FactorSignature, g: &GraphOfGroups, pool: &[IdealEdge], limit: usize) -> Vec<Vec<usize>> {
    let n = pool.len();
    let mut ok = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            ok[i * n + j] = i != j
                && pool[i].compatible(sig, g, &pool[j])
                && !pool[i].equivalent(sig, g, &pool[j]);
        }
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(n: usize, ok: &[bool], start: usize, limit: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if cur.len() == limit {
            return;
        }
        for i in start..n {
            if cur.iter().all(|&j| ok[i * n + j]) {
                cur.push(i);
                rec(n, ok, i + 1, limit, cur, out);
                cur.pop();
            }
        }
    }
    rec(n, &ok, 0, limit, &mut cur, &mut out);
    out
}
