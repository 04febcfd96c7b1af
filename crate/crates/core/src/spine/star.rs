use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::algebra::FactorSignature;
use crate::calculus::MultiGraph;
use crate::gog::{GraphOfGroups, LoopRep};

/// A direction `(elem, edge)` at the origin of the oriented edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Direction {
    pub edge: usize,
    pub elem: usize,
}

impl Direction {
    pub fn new(edge: usize, elem: usize) -> Self {
        Self { edge, elem }
    }
}

/// The part of the star graph on the directions at one vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalStar {
    pub vertex: usize,
    pub order: usize,
    /// `st(v)`; the direction `(g, edges[i])` has local index `i * order + g`.
    pub edges: Vec<usize>,
    pub graph: MultiGraph,
}

impl LocalStar {
    pub fn index(&self, d: Direction) -> usize {
        let pos = self.edges.iter().position(|&e| e == d.edge).expect("edge in st(v)");
        pos * self.order + d.elem
    }

    pub fn direction(&self, i: usize) -> Direction {
        Direction::new(self.edges[i / self.order], i % self.order)
    }

    pub fn num_directions(&self) -> usize {
        self.graph.len()
    }

    pub fn indices(&self, dirs: &[Direction]) -> Vec<usize> {
        dirs.iter().map(|&d| self.index(d)).collect()
    }

    pub fn absolute(&self, dirs: &[Direction]) -> u64 {
        self.graph.absolute(&self.indices(dirs))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarGraph {
    pub locals: Vec<LocalStar>,
}

impl StarGraph {
    /// Every turn taken by every loop contributes its full orbit, one edge per
    /// group element. A turn whose orbit has only half as many distinct pairs
    /// (same edge, involutive middle element) therefore yields doubled edges.
    pub fn build(sig: &FactorSignature, g: &GraphOfGroups, loops: &[LoopRep]) -> Self {
        let mut locals: Vec<LocalStar> = (0..g.num_vertices())
            .map(|v| {
                let edges = g.star(v);
                let order = g.group_order(sig, v);
                let n = edges.len() * order;
                LocalStar { vertex: v, order, edges, graph: MultiGraph::new(n) }
            })
            .collect();
        for l in loops {
            for (a, x, b) in l.turns() {
                let v = g.origin(a);
                let local = &mut locals[v];
                let (ia, ib) = (local.index(Direction::new(a, 0)), local.index(Direction::new(b, 0)));
                for h in 0..local.order {
                    let hx = g.vmul(sig, v, h, x);
                    local
                        .graph
                        .add_edge(ia + h, ib + hx, 1)
                        .expect("turns of cyclically reduced loops are nondegenerate");
                }
            }
        }
        StarGraph { locals }
    }

    pub fn local(&self, v: usize) -> &LocalStar {
        &self.locals[v]
    }

    /// `|e|` for an oriented edge, the valence of the direction `(1, e)`.
    pub fn edge_abs(&self, g: &GraphOfGroups, e: usize) -> u64 {
        let local = &self.locals[g.origin(e)];
        local.graph.valence(local.index(Direction::new(e, 0)))
    }

    pub fn abs_at(&self, v: usize, dirs: &[Direction]) -> u64 {
        self.locals[v].absolute(dirs)
    }

    /// `½ Σ_v Σ_{d ∈ D_v} valence(d) / |G_v|`.
    pub fn norm_from_star(&self) -> Ratio<u64> {
        let mut total = Ratio::from_integer(0u64);
        for l in &self.locals {
            let s: u64 = (0..l.num_directions()).map(|i| l.graph.valence(i)).sum();
            total += Ratio::new(s, l.order as u64);
        }
        total / 2
    }

    pub fn component_count(&self) -> usize {
        self.locals.iter().map(|l| l.graph.components()).sum()
    }
}

pub fn norm_from_star(s: &StarGraph) -> Ratio<u64> {
    s.norm_from_star()
}
