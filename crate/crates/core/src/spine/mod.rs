//! Marked graphs of groups carried as loop data for a fixed word set, with
//! norms, star graphs, ideal edges, blow-ups and Whitehead moves.

pub mod ball;
pub mod canon;
pub mod ideal;
pub mod star;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{build_standard_w, AlgebraError, FactorSignature, Letter, Word};
use crate::gog::{
    close_path, collapse_edge, collapse_forest, is_forest, is_reduced, EdgePath, GogError,
    GraphOfGroups, LoopRep, Step, VertexGroup,
};

pub use ball::{explore_ball, Ball, BallConfig};
pub use canon::{canonical_key, CanonicalKey};
pub use ideal::{all_ideal_edges, enumerate_ideal_edges, IdealEdge};
pub use star::{norm_from_star, Direction, LocalStar, StarGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpineError {
    #[error("unknown word {0}")]
    UnknownWord(String),
    #[error("marked graph is not reduced")]
    NotReduced,
    #[error("vertex {0} is not active")]
    InactiveVertex(usize),
    #[error("invalid ideal edge: {0}")]
    InvalidIdealEdge(String),
    #[error("incompatible ideal forest: {0}")]
    IncompatibleForest(String),
    #[error("edge {0} is not in D(alpha)")]
    NotInDalpha(usize),
    #[error("bad edge choice: {0}")]
    BadEdgeChoice(String),
    #[error("ball exceeded the budget of {budget} briar patches")]
    BallNotFinite { budget: usize },
    #[error("radius {radius} is below the seed norm {seed_norm}")]
    RadiusBelowSeed { radius: u64, seed_norm: u64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid marked graph: {0}")]
    Invalid(String),
    #[error(transparent)]
    Gog(#[from] GogError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// The signature together with the word set whose loops carry the marking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    pub sig: FactorSignature,
    pub words: Vec<Word>,
}

impl Context {
    pub fn standard(sig: FactorSignature) -> Result<Arc<Self>, SpineError> {
        let words = build_standard_w(&sig)?;
        Ok(Arc::new(Self { sig, words }))
    }

    /// The standard words followed by `extra` (duplicates dropped).
    pub fn with_extra(sig: FactorSignature, extra: &[Word]) -> Result<Arc<Self>, SpineError> {
        let mut words = build_standard_w(&sig)?;
        for w in extra {
            if !words.contains(w) {
                words.push(w.clone());
            }
        }
        Ok(Arc::new(Self { sig, words }))
    }

    pub fn custom(sig: FactorSignature, words: Vec<Word>) -> Arc<Self> {
        Arc::new(Self { sig, words })
    }

    pub fn word_index(&self, key: &str) -> Option<usize> {
        self.words.iter().position(|w| w.key() == key)
    }
}

#[derive(Clone)]
pub struct MarkedGraph {
    ctx: Arc<Context>,
    pub graph: GraphOfGroups,
    /// One loop per word of the context, in order.
    pub loops: Vec<LoopRep>,
}

impl fmt::Debug for MarkedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MarkedGraph")
            .field("graph", &self.graph)
            .field("loops", &self.loops)
            .finish()
    }
}

impl PartialEq for MarkedGraph {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ctx, &other.ctx) && self.graph == other.graph && self.loops == other.loops
    }
}

/// Serializable description of a marked graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedGraphData {
    pub vertices: Vec<VertexGroup>,
    pub edges: Vec<(usize, usize)>,
    pub loops: Vec<(String, LoopRep)>,
}

/// Closed path in `g` reading a word, where the word's letters are given by
/// `image` as paths based at `base`.
fn word_path<F>(sig: &FactorSignature, g: &GraphOfGroups, base: usize, w: &Word, image: F) -> EdgePath
where
    F: Fn(Letter) -> EdgePath,
{
    let mut p = EdgePath { base, g0: 0, steps: vec![] };
    for &l in w.letters() {
        p = p.concat(sig, g, &image(l));
    }
    p
}

impl MarkedGraph {
    /// The rose-and-star graph: the vertex of `A_1` joined to each other
    /// factor vertex by an edge `t_j`, with `k` loops `s_i` at the `A_1` vertex.
    pub fn seed(ctx: Arc<Context>) -> Result<Self, SpineError> {
        let sig = &ctx.sig;
        let (n, k) = (sig.n(), sig.k());
        if n == 0 {
            return Err(SpineError::Unsupported("at least one finite factor is required".into()));
        }
        let vertices = (0..n).map(VertexGroup::Factor).collect();
        let mut edges: Vec<(usize, usize)> = (1..n).map(|j| (0, j)).collect();
        edges.extend((0..k).map(|_| (0, 0)));
        let graph = GraphOfGroups::new(vertices, edges)?;
        let image = |l: Letter| match l {
            Letter::Factor { factor: 0, elem } => EdgePath { base: 0, g0: elem, steps: vec![] },
            Letter::Factor { factor, elem } => {
                let t = 2 * (factor - 1);
                EdgePath { base: 0, g0: 0, steps: vec![Step::new(t, elem), Step::new(t + 1, 0)] }
            }
            Letter::Free { gen, inverse } => {
                let s = 2 * (n - 1 + gen) + usize::from(inverse);
                EdgePath { base: 0, g0: 0, steps: vec![Step::new(s, 0)] }
            }
        };
        let loops = ctx
            .words
            .iter()
            .map(|w| close_path(sig, &graph, &word_path(sig, &graph, 0, w, image)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { ctx, graph, loops })
    }

    /// Builds from explicit parts, validating the structure.
    pub fn from_parts(ctx: Arc<Context>, graph: GraphOfGroups, loops: Vec<LoopRep>) -> Result<Self, SpineError> {
        let sig = &ctx.sig;
        for i in 0..sig.n() {
            let count = graph.vertices.iter().filter(|&&v| v == VertexGroup::Factor(i)).count();
            if count != 1 {
                return Err(SpineError::Invalid(format!(
                    "factor {} appears on {count} vertices",
                    sig.name(i)
                )));
            }
        }
        if graph.vertices.iter().any(|v| matches!(v, VertexGroup::Factor(i) if *i >= sig.n())) {
            return Err(SpineError::Invalid("vertex group outside the signature".into()));
        }
        if !graph.is_connected() {
            return Err(SpineError::Invalid("graph is not connected".into()));
        }
        if graph.rank() != sig.k() {
            return Err(SpineError::Invalid(format!(
                "graph has rank {}, signature has free rank {}",
                graph.rank(),
                sig.k()
            )));
        }
        if loops.len() != ctx.words.len() {
            return Err(SpineError::Invalid(format!(
                "{} loops for {} words",
                loops.len(),
                ctx.words.len()
            )));
        }
        let loops = loops
            .iter()
            .map(|l| {
                let p = l.to_path(&graph);
                p.validate(sig, &graph)?;
                close_path(sig, &graph, &p)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { ctx, graph, loops })
    }

    pub(crate) fn from_raw(ctx: Arc<Context>, graph: GraphOfGroups, loops: Vec<LoopRep>) -> Self {
        Self { ctx, graph, loops }
    }

    pub fn ctx(&self) -> &Arc<Context> {
        &self.ctx
    }

    pub fn sig(&self) -> &FactorSignature {
        &self.ctx.sig
    }

    pub fn words(&self) -> &[Word] {
        &self.ctx.words
    }

    pub fn is_reduced(&self) -> bool {
        is_reduced(&self.graph)
    }

    pub fn translation_length(&self, key: &str) -> Result<usize, SpineError> {
        let i = self.ctx.word_index(key).ok_or_else(|| SpineError::UnknownWord(key.into()))?;
        Ok(self.loops[i].length())
    }

    /// Sum of loop lengths, defined for any marked graph.
    pub fn total_length(&self) -> u64 {
        self.loops.iter().map(|l| l.length() as u64).sum()
    }

    pub fn norm(&self) -> Result<u64, SpineError> {
        if !self.is_reduced() {
            return Err(SpineError::NotReduced);
        }
        Ok(self.total_length())
    }

    pub fn star_graph(&self) -> StarGraph {
        StarGraph::build(self.sig(), &self.graph, &self.loops)
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        canonical_key(self.sig(), &self.graph, &self.loops)
    }

    pub fn active_vertices(&self) -> Vec<usize> {
        (0..self.graph.num_vertices()).filter(|&v| self.graph.valence(v) >= 2).collect()
    }

    pub fn data(&self) -> MarkedGraphData {
        MarkedGraphData {
            vertices: self.graph.vertices.clone(),
            edges: self.graph.edges.clone(),
            loops: self.words().iter().map(Word::key).zip(self.loops.iter().cloned()).collect(),
        }
    }

    /// Inverse of [`MarkedGraph::data`]; loops are matched to words by key.
    pub fn from_data(ctx: Arc<Context>, data: &MarkedGraphData) -> Result<Self, SpineError> {
        let graph = GraphOfGroups::new(data.vertices.clone(), data.edges.clone())?;
        let loops = ctx
            .words
            .iter()
            .map(|w| {
                let key = w.key();
                data.loops
                    .iter()
                    .find(|(k, _)| *k == key)
                    .map(|(_, l)| l.clone())
                    .ok_or_else(|| SpineError::Invalid(format!("no loop for word {key}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if data.loops.len() != loops.len() {
            return Err(SpineError::Invalid("loops for words outside the context".into()));
        }
        Self::from_parts(ctx, graph, loops)
    }

    pub fn collapse(&self, edges: &[usize]) -> Result<MarkedGraph, SpineError> {
        let c = collapse_forest(self.sig(), &self.graph, &self.loops, edges)?;
        Ok(Self::from_raw(self.ctx.clone(), c.graph, c.loops))
    }

    pub fn collapse_edge(&self, e: usize) -> Result<MarkedGraph, SpineError> {
        let c = collapse_edge(self.sig(), &self.graph, &self.loops, e)?;
        Ok(Self::from_raw(self.ctx.clone(), c.graph, c.loops))
    }

    /// All reduced marked graphs obtained by collapsing a maximal forest.
    pub fn reduced_collapses(&self) -> Vec<(Vec<usize>, MarkedGraph)> {
        crate::gog::maximal_forests(&self.graph)
            .into_iter()
            .map(|f| {
                let m = self.collapse(&f).expect("maximal forests are collapsible");
                (f, m)
            })
            .collect()
    }
}

/// Blows up one direction set at `v`, returning the new graph, lifted loops,
/// and the index of the new (trivial) vertex; the new edge is the last one,
/// oriented from `v` to the new vertex.
pub(crate) fn blow_up_one(
    sig: &FactorSignature,
    g: &GraphOfGroups,
    loops: &[LoopRep],
    v: usize,
    dirs: &[Direction],
) -> (GraphOfGroups, Vec<LoopRep>, usize) {
    let nv = g.num_vertices();
    let alpha = 2 * g.num_edges();
    let mut elem_on = vec![None; g.num_oriented()];
    for d in dirs {
        elem_on[d.edge] = Some(d.elem);
    }
    let mut ng = g.clone();
    ng.vertices.push(VertexGroup::Trivial);
    for d in dirs {
        let (a, b) = &mut ng.edges[d.edge >> 1];
        if d.edge & 1 == 0 {
            *a = nv;
        } else {
            *b = nv;
        }
    }
    ng.edges.push((v, nv));
    let new_loops = loops
        .iter()
        .map(|l| {
            let s = match l {
                LoopRep::Elliptic { .. } => return l.clone(),
                LoopRep::Cycle(s) => s,
            };
            let m = s.len();
            let mut out = Vec::with_capacity(m + 4);
            for i in 0..m {
                let (a, x, b) = (s[i].edge, s[i].elem, s[(i + 1) % m].edge);
                if g.terminus(a) != v {
                    out.push(s[i]);
                    continue;
                }
                let ga = elem_on[a ^ 1];
                let gb = elem_on[b];
                match (ga, gb) {
                    (None, None) => out.push(s[i]),
                    (Some(ga), Some(gb)) => {
                        let mid = g.vmul(sig, v, g.vmul(sig, v, ga, x), g.vinv(sig, v, gb));
                        out.push(Step::new(a, 0));
                        out.push(Step::new(alpha + 1, mid));
                        out.push(Step::new(alpha, 0));
                    }
                    (Some(ga), None) => {
                        out.push(Step::new(a, 0));
                        out.push(Step::new(alpha + 1, g.vmul(sig, v, ga, x)));
                    }
                    (None, Some(gb)) => {
                        out.push(Step::new(a, g.vmul(sig, v, x, g.vinv(sig, v, gb))));
                        out.push(Step::new(alpha, 0));
                    }
                }
            }
            let p = EdgePath { base: ng.origin(out[0].edge), g0: 0, steps: out };
            close_path(sig, &ng, &p).expect("lifted loops chain")
        })
        .collect();
    (ng, new_loops, nv)
}

/// Result of blowing up an ideal forest.
#[derive(Clone, Debug)]
pub struct BlowUp {
    pub marked: MarkedGraph,
    /// New edge index for each member of the forest, in input order.
    pub new_edges: Vec<usize>,
}

pub fn blow_up(m: &MarkedGraph, phi: &[IdealEdge]) -> Result<BlowUp, SpineError> {
    let sig = m.sig();
    ideal::check_forest(sig, &m.graph, phi)?;
    let mut order: Vec<usize> = (0..phi.len()).collect();
    order.sort_by(|&a, &b| phi[b].size().cmp(&phi[a].size()).then(phi[a].cmp(&phi[b])));
    let mut graph = m.graph.clone();
    let mut loops = m.loops.clone();
    let mut new_edges = vec![0; phi.len()];
    let mut new_vertex = vec![usize::MAX; phi.len()];
    for (pos, &i) in order.iter().enumerate() {
        let a = &phi[i];
        let container = order[..pos]
            .iter()
            .copied()
            .filter(|&j| a.contained_in(sig, &m.graph, &phi[j]))
            .min_by_key(|&j| phi[j].size());
        let (v, dirs) = match container {
            Some(j) => (new_vertex[j], a.dirs.iter().map(|d| Direction::new(d.edge, 0)).collect()),
            None => (a.vertex, a.dirs.clone()),
        };
        let (g2, l2, nv) = blow_up_one(sig, &graph, &loops, v, &dirs);
        graph = g2;
        loops = l2;
        new_vertex[i] = nv;
        new_edges[i] = graph.num_edges() - 1;
    }
    Ok(BlowUp { marked: MarkedGraph::from_raw(m.ctx.clone(), graph, loops), new_edges })
}

pub fn blow_up_single(m: &MarkedGraph, alpha: &IdealEdge) -> MarkedGraph {
    let (g, l, _) = blow_up_one(m.sig(), &m.graph, &m.loops, alpha.vertex, &alpha.dirs);
    MarkedGraph::from_raw(m.ctx.clone(), g, l)
}

/// An elementary Whitehead move: blow up `alpha`, collapse the edge under `edge ∈ D(alpha)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub alpha: IdealEdge,
    pub edge: usize,
}

pub fn whitehead_move(m: &MarkedGraph, alpha: &IdealEdge, edge: usize) -> Result<MarkedGraph, SpineError> {
    if !alpha.d_edges().contains(&edge) {
        return Err(SpineError::NotInDalpha(edge));
    }
    blow_up_single(m, alpha).collapse_edge(edge >> 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MoveClass {
    StrictDecrease,
    Equal,
    Increase,
}

pub fn ideal_abs(star: &StarGraph, alpha: &IdealEdge) -> u64 {
    star.abs_at(alpha.vertex, &alpha.dirs)
}

pub fn move_reductivity(m: &MarkedGraph, star: &StarGraph, alpha: &IdealEdge, edge: usize) -> MoveClass {
    let a = ideal_abs(star, alpha);
    let e = star.edge_abs(&m.graph, edge);
    match a.cmp(&e) {
        std::cmp::Ordering::Less => MoveClass::StrictDecrease,
        std::cmp::Ordering::Equal => MoveClass::Equal,
        std::cmp::Ordering::Greater => MoveClass::Increase,
    }
}

/// `|alpha| <= |e|` for every `e ∈ D(alpha)`.
pub fn is_reductive(m: &MarkedGraph, star: &StarGraph, alpha: &IdealEdge) -> bool {
    let a = ideal_abs(star, alpha);
    alpha.d_edges().iter().all(|&e| a <= star.edge_abs(&m.graph, e))
}

/// Every elementary move with its predicted norm change `|alpha| - |e|`.
pub fn all_moves(m: &MarkedGraph, star: &StarGraph) -> Vec<(Move, i64)> {
    let mut out = Vec::new();
    for alpha in all_ideal_edges(m, usize::MAX) {
        let a = ideal_abs(star, &alpha) as i64;
        for e in alpha.d_edges() {
            let de = a - star.edge_abs(&m.graph, e) as i64;
            out.push((Move { alpha: alpha.clone(), edge: e }, de));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqStarReport {
    pub before: u64,
    pub after: u64,
    pub alpha_sum: u64,
    pub edge_sum: u64,
    pub holds: bool,
}

/// Recomputes both sides of the norm-change identity for a forest blow-up
/// followed by collapsing one edge from each `D(alpha_i)`.
pub fn check_eq_star(m: &MarkedGraph, phi: &[IdealEdge], edges: &[usize]) -> Result<EqStarReport, SpineError> {
    if phi.len() != edges.len() {
        return Err(SpineError::BadEdgeChoice("one edge per ideal edge".into()));
    }
    for (a, &e) in phi.iter().zip(edges) {
        if !a.d_edges().contains(&e) {
            return Err(SpineError::BadEdgeChoice(format!("edge {e} is not in D(alpha)")));
        }
    }
    let under: Vec<usize> = edges.iter().map(|&e| e >> 1).collect();
    let bu = blow_up(m, phi)?;
    if !is_forest(&bu.marked.graph, &under) {
        return Err(SpineError::BadEdgeChoice("edges do not form a collapsible forest".into()));
    }
    let star = m.star_graph();
    let before = m.norm()?;
    let after = bu.marked.collapse(&under)?.total_length();
    let alpha_sum: u64 = phi.iter().map(|a| ideal_abs(&star, a)).sum();
    let edge_sum: u64 = edges.iter().map(|&e| star.edge_abs(&m.graph, e)).sum();
    let holds = after + edge_sum == before + alpha_sum;
    Ok(EqStarReport { before, after, alpha_sum, edge_sum, holds })
}

#[cfg(test)]
mod tests;
