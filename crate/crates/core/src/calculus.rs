//! Dot products and absolute values on loop-free multigraphs, and oracles for
//! the counting lemmas about star graphs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gog::rev;
use crate::spine::{ideal_abs, is_reductive, Direction, IdealEdge, MarkedGraph, Move, StarGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CalculusError {
    #[error("vertex sets overlap")]
    OverlappingSets,
    #[error("loop edge at vertex {0}")]
    LoopEdge(usize),
    #[error("hypotheses not met: {0}")]
    HypothesesNotMet(String),
    #[error("no strictly increasing size-two move: {0}")]
    NotFound(String),
}

/// Dense symmetric multiplicity matrix without loop edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiGraph {
    n: usize,
    mult: Vec<u32>,
}

impl MultiGraph {
    pub fn new(n: usize) -> Self {
        Self { n, mult: vec![0; n * n] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn add_edge(&mut self, i: usize, j: usize, k: u32) -> Result<(), CalculusError> {
        if i == j {
            return Err(CalculusError::LoopEdge(i));
        }
        self.mult[i * self.n + j] += k;
        self.mult[j * self.n + i] += k;
        Ok(())
    }

    #[inline]
    pub fn m(&self, i: usize, j: usize) -> u32 {
        self.mult[i * self.n + j]
    }

    pub fn valence(&self, i: usize) -> u64 {
        self.mult[i * self.n..(i + 1) * self.n].iter().map(|&x| u64::from(x)).sum()
    }

    pub fn edge_count(&self) -> u64 {
        (0..self.n).map(|i| self.valence(i)).sum::<u64>() / 2
    }

    /// Edges (with multiplicity) between `s` and `t`.
    pub fn dot(&self, s: &[usize], t: &[usize]) -> Result<u64, CalculusError> {
        if s.iter().any(|x| t.contains(x)) {
            return Err(CalculusError::OverlappingSets);
        }
        Ok(self.dot_unchecked(s, t))
    }

    pub(crate) fn dot_unchecked(&self, s: &[usize], t: &[usize]) -> u64 {
        let mut total = 0u64;
        for &i in s {
            let row = &self.mult[i * self.n..(i + 1) * self.n];
            for &j in t {
                total += u64::from(row[j]);
            }
        }
        total
    }

    /// `|S| = S · S^c`.
    pub fn absolute(&self, s: &[usize]) -> u64 {
        let mut inside = vec![false; self.n];
        for &i in s {
            inside[i] = true;
        }
        let mut total = 0u64;
        for &i in s {
            let row = &self.mult[i * self.n..(i + 1) * self.n];
            for (j, &x) in row.iter().enumerate() {
                if !inside[j] {
                    total += u64::from(x);
                }
            }
        }
        total
    }

    pub fn components(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut count = 0;
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for y in 0..self.n {
                    if !seen[y] && self.m(x, y) > 0 {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        count
    }

    /// Erdős–Rényi style sample with multiplicities in `0..=cap`.
    pub fn random<R: rand::Rng>(rng: &mut R, n: usize, p: f64, cap: u32) -> Self {
        let mut g = Self::new(n);
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(p) {
                    let k = rng.gen_range(1..=cap);
                    g.add_edge(i, j, k).expect("distinct endpoints");
                }
            }
        }
        g
    }
}

pub fn dot_product(g: &MultiGraph, s: &[usize], t: &[usize]) -> Result<u64, CalculusError> {
    g.dot(s, t)
}

pub fn absolute_value(g: &MultiGraph, s: &[usize]) -> u64 {
    g.absolute(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LemmaId {
    ThreeDirections,
    WhenReductive,
    TwoReductive,
    OneReductiveSizeTwo,
    ReallyTwoReductive,
    TriosIncreasing,
    EFFbar,
    SizeTwoExists,
}

impl LemmaId {
    pub const ALL: [LemmaId; 8] = [
        LemmaId::ThreeDirections,
        LemmaId::WhenReductive,
        LemmaId::TwoReductive,
        LemmaId::OneReductiveSizeTwo,
        LemmaId::ReallyTwoReductive,
        LemmaId::TriosIncreasing,
        LemmaId::EFFbar,
        LemmaId::SizeTwoExists,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::ThreeDirections => "THREE_DIRECTIONS",
            LemmaId::WhenReductive => "WHEN_REDUCTIVE",
            LemmaId::TwoReductive => "TWO_REDUCTIVE",
            LemmaId::OneReductiveSizeTwo => "ONE_REDUCTIVE_SIZE_TWO",
            LemmaId::ReallyTwoReductive => "REALLY_TWO_REDUCTIVE",
            LemmaId::TriosIncreasing => "TRIOS_INCREASING",
            LemmaId::EFFbar => "E_F_FBAR",
            LemmaId::SizeTwoExists => "SIZE_TWO_EXISTS",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let norm = s.to_ascii_uppercase().replace('-', "_");
        Self::ALL.into_iter().find(|l| l.name() == norm)
    }

    /// Lemmas about arbitrary multigraphs; the rest need a marked graph.
    pub fn is_graph_lemma(self) -> bool {
        matches!(
            self,
            LemmaId::ThreeDirections
                | LemmaId::WhenReductive
                | LemmaId::TwoReductive
                | LemmaId::ReallyTwoReductive
                | LemmaId::TriosIncreasing
        )
    }
}

impl std::fmt::Display for LemmaId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One instance of a lemma's hypotheses.
#[derive(Clone, Copy, Debug)]
pub enum LemmaContext<'a> {
    /// `picks` are the named vertices in the lemma's order; for
    /// `WHEN_REDUCTIVE` the first pick is `x` and the rest complete `S`,
    /// for `TWO_REDUCTIVE` the picks are `T`.
    Graph { graph: &'a MultiGraph, picks: &'a [usize] },
    /// Directions at `vertex`, in the lemma's order; empty for `SIZE_TWO_EXISTS`.
    Patch { marked: &'a MarkedGraph, star: &'a StarGraph, vertex: usize, picks: &'a [Direction] },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Holds,
    Violation { witness: serde_json::Value },
}

fn unmet<T>(why: impl Into<String>) -> Result<T, CalculusError> {
    Err(CalculusError::HypothesesNotMet(why.into()))
}

fn distinct(p: &[usize]) -> bool {
    p.iter().enumerate().all(|(i, x)| !p[..i].contains(x))
}

/// Evaluates the lemma's conclusion on one instance after checking its hypotheses.
pub fn check_lemma(id: LemmaId, ctx: LemmaContext<'_>) -> Result<Verdict, CalculusError> {
    match ctx {
        LemmaContext::Graph { graph, picks } => {
            if !id.is_graph_lemma() {
                return unmet(format!("{id} needs a marked graph"));
            }
            if picks.iter().any(|&p| p >= graph.len()) || !distinct(picks) {
                return unmet("picks must be distinct vertices");
            }
            graph_lemma(id, graph, picks)
        }
        LemmaContext::Patch { marked, star, vertex, picks } => {
            if vertex >= marked.graph.num_vertices() {
                return unmet("no such vertex");
            }
            if id.is_graph_lemma() && id != LemmaId::TriosIncreasing {
                let local = star.local(vertex);
                let idx: Vec<usize> = picks
                    .iter()
                    .map(|d| {
                        if marked.graph.origin(d.edge) == vertex {
                            Ok(local.index(*d))
                        } else {
                            unmet("direction not at vertex")
                        }
                    })
                    .collect::<Result<_, _>>()?;
                if !distinct(&idx) {
                    return unmet("picks must be distinct directions");
                }
                return graph_lemma(id, &local.graph, &idx);
            }
            patch_lemma(id, marked, star, vertex, picks)
        }
    }
}

fn graph_lemma(id: LemmaId, g: &MultiGraph, p: &[usize]) -> Result<Verdict, CalculusError> {
    let abs = |s: &[usize]| g.absolute(s);
    let dot = |s: &[usize], t: &[usize]| g.dot_unchecked(s, t);
    let rest = |ex: &[usize]| (0..g.len()).filter(|i| !ex.contains(i)).collect::<Vec<_>>();
    let verdict = |ok: bool, w: serde_json::Value| if ok { Verdict::Holds } else { Verdict::Violation { witness: w } };
    match id {
        LemmaId::ThreeDirections => {
            let [u, v, w] = p else { return unmet("needs u, v, w") };
            let (u, v, w) = (*u, *v, *w);
            if abs(&[u, v]) > abs(&[v]) || abs(&[u, w]) > abs(&[w]) {
                return unmet("|{u,v}| <= |v| and |{u,w}| <= |w|");
            }
            let s = rest(&[u, v, w]);
            let (uv, uw, us) = (dot(&[u], &[v]), dot(&[u], &[w]), dot(&[u], &s));
            Ok(verdict(uv == uw && us == 0, serde_json::json!({"u": u, "v": v, "w": w, "uv": uv, "uw": uw, "uS": us})))
        }
        LemmaId::WhenReductive => {
            let Some((&x, t)) = p.split_first() else { return unmet("S must be nonempty") };
            let mut s = t.to_vec();
            s.push(x);
            let (sa, xa) = (abs(&s), abs(&[x]));
            let (xt2, ta) = (2 * dot(&[x], t), abs(t));
            let ok = (sa <= xa) == (xt2 >= ta) && (sa == xa) == (xt2 == ta);
            Ok(verdict(ok, serde_json::json!({"x": x, "T": t, "|S|": sa, "|x|": xa, "2x.T": xt2, "|T|": ta})))
        }
        LemmaId::TwoReductive => {
            if p.is_empty() {
                return unmet("T must be nonempty");
            }
            // With |T| = 0 every vertex outside T qualifies.
            if abs(p) == 0 {
                return unmet("|T| must be positive");
            }
            let good: Vec<usize> = rest(p)
                .into_iter()
                .filter(|&x| {
                    let mut s = p.to_vec();
                    s.push(x);
                    abs(&s) <= abs(&[x])
                })
                .collect();
            let mut ok = good.len() <= 2;
            if good.len() == 2 {
                for &x in &good {
                    let mut s = p.to_vec();
                    s.push(x);
                    ok &= abs(&s) == abs(&[x]);
                }
                let mut allowed = p.to_vec();
                allowed.extend(&good);
                ok &= dot(p, &rest(&allowed)) == 0;
            }
            Ok(verdict(ok, serde_json::json!({"T": p, "choices": good})))
        }
        LemmaId::ReallyTwoReductive => {
            let [u, v, w, x, y] = p else { return unmet("needs u, v, w, x, y") };
            let (u, v, w, x, y) = (*u, *v, *w, *x, *y);
            let (au, av, aw) = (abs(&[u]), abs(&[v]), abs(&[w]));
            let (uv, uw) = (abs(&[u, v]), abs(&[u, w]));
            let hyp = abs(&[u, v, w]) <= au.min(av).min(aw)
                && uv >= au.min(av)
                && uw >= au.min(aw)
                && (uv > au.min(av) || uw > au.min(aw))
                && abs(&[u, v, x]) <= abs(&[x]);
            if !hyp {
                return unmet("inequalities on u, v, w, x");
            }
            let (lhs, ay) = (abs(&[u, w, y]), abs(&[y]));
            Ok(verdict(lhs > ay, serde_json::json!({"picks": p, "|{u,w,y}|": lhs, "|y|": ay})))
        }
        LemmaId::TriosIncreasing => {
            let [u, v, w] = p else { return unmet("needs u, v, w") };
            let (u, v, w) = (*u, *v, *w);
            // Stands in for the nonvanishing of absolute values in star graphs.
            if abs(&[u, v, w]) == 0 {
                return unmet("{u,v,w} is a union of components");
            }
            let inc = |a: usize, b: usize| abs(&[a, b]) > abs(&[a]).min(abs(&[b]));
            Ok(verdict(inc(u, v) || inc(u, w) || inc(v, w), serde_json::json!({"u": u, "v": v, "w": w})))
        }
        _ => unmet(format!("{id} needs a marked graph")),
    }
}

/// `Some(non-reductive)` when `dirs` is an ideal edge at `v`.
fn increasing(m: &MarkedGraph, star: &StarGraph, v: usize, dirs: &[Direction]) -> Option<bool> {
    let a = IdealEdge::new(m.sig(), &m.graph, v, dirs).ok()?;
    Some(!is_reductive(m, star, &a))
}

fn patch_lemma(
    id: LemmaId,
    m: &MarkedGraph,
    star: &StarGraph,
    v: usize,
    p: &[Direction],
) -> Result<Verdict, CalculusError> {
    let g = &m.graph;
    let sig = m.sig();
    let at_v = |d: &Direction| g.origin(d.edge) == v && d.elem < g.group_order(sig, v);
    if !p.iter().all(at_v) {
        return unmet("direction not at vertex");
    }
    if !m.is_reduced() {
        return unmet("marked graph is not reduced");
    }
    match id {
        LemmaId::TriosIncreasing => {
            let [u, x, w] = p else { return unmet("needs u, v, w") };
            let es = [u.edge, x.edge, w.edge];
            if !distinct(&es) || es.iter().any(|&e| es.contains(&rev(e))) {
                return unmet("not a trio");
            }
            let pairs = [[*u, *x], [*u, *w], [*x, *w]];
            let mut any = false;
            for pr in &pairs {
                match increasing(m, star, v, pr) {
                    Some(b) => any |= b,
                    None => return unmet("a pair is not an ideal edge"),
                }
            }
            Ok(if any { Verdict::Holds } else { Verdict::Violation { witness: serde_json::json!({"vertex": v, "trio": p}) } })
        }
        LemmaId::EFFbar => {
            let [u, x, xb] = p else { return unmet("needs u, v, v-bar") };
            if u.edge == x.edge || u.edge == xb.edge || xb.edge != rev(x.edge) || x.edge >> 1 == u.edge >> 1 {
                return unmet("underlying edges are not {e, f, f-bar}");
            }
            let Ok(alpha) = IdealEdge::new(sig, g, v, p) else { return unmet("not an ideal edge") };
            if ideal_abs(star, &alpha) < star.edge_abs(g, u.edge) {
                return unmet("|alpha| < |e|");
            }
            let a = increasing(m, star, v, &[*u, *x]);
            let b = increasing(m, star, v, &[*u, *xb]);
            let ok = a == Some(true) || b == Some(true);
            Ok(if ok { Verdict::Holds } else { Verdict::Violation { witness: serde_json::json!({"vertex": v, "alpha": p}) } })
        }
        LemmaId::OneReductiveSizeTwo => {
            let [u, x] = p else { return unmet("needs u, v") };
            let q = g.group_order(sig, v);
            if q == 1 || g.valence(v) < 3 {
                return unmet("needs a nontrivial vertex group and valence at least three");
            }
            let mut reductive = Vec::new();
            for h in 0..q {
                let hx = Direction::new(x.edge, g.vmul(sig, v, h, x.elem));
                match increasing(m, star, v, &[*u, hx]) {
                    None => return unmet("{u, h.v} is not an ideal edge"),
                    Some(false) => reductive.push(h),
                    Some(true) => {}
                }
            }
            Ok(if reductive.len() <= 1 {
                Verdict::Holds
            } else {
                Verdict::Violation { witness: serde_json::json!({"vertex": v, "u": u, "v": x, "reductive_h": reductive}) }
            })
        }
        LemmaId::SizeTwoExists => {
            if sig.n() < 2 || g.valence(v) < 2 {
                return unmet("needs n >= 2 and valence at least two");
            }
            Ok(match find_size_two_increasing(m, v) {
                Ok(_) => Verdict::Holds,
                Err(e) => Verdict::Violation { witness: serde_json::json!({"vertex": v, "error": e.to_string()}) },
            })
        }
        _ => unreachable!("graph lemmas are dispatched earlier"),
    }
}

/// A strictly increasing Whitehead move of size two at `v`.
///
/// Follows the existence argument: take a star-graph edge between two
/// directions `d, d'` on the same oriented edge and try `({d, c}, c)` for
/// directions `c` on other edges; then falls back to a full scan.
pub fn find_size_two_increasing(m: &MarkedGraph, v: usize) -> Result<Move, CalculusError> {
    let g = &m.graph;
    let sig = m.sig();
    if sig.n() < 2 {
        return unmet("needs at least two finite factors");
    }
    if v >= g.num_vertices() || g.valence(v) < 2 {
        return unmet("needs a vertex of valence at least two");
    }
    if !m.is_reduced() {
        return unmet("marked graph is not reduced");
    }
    let star = m.star_graph();
    let local = star.local(v);
    let nd = local.num_directions();
    let try_move = |dirs: [Direction; 2], e: usize| -> Option<Move> {
        let a = IdealEdge::new(sig, g, v, &dirs).ok()?;
        (a.d_edges().contains(&e) && ideal_abs(&star, &a) > star.edge_abs(g, e)).then_some(Move { alpha: a, edge: e })
    };
    for i in 0..nd {
        for j in i + 1..nd {
            let (d, d2) = (local.direction(i), local.direction(j));
            if d.edge != d2.edge || local.graph.m(i, j) == 0 {
                continue;
            }
            for k in 0..nd {
                let c = local.direction(k);
                if c.edge >> 1 == d.edge >> 1 {
                    continue;
                }
                if let Some(mv) = try_move([d, c], c.edge) {
                    return Ok(mv);
                }
            }
        }
    }
    for i in 0..nd {
        for j in i + 1..nd {
            let dirs = [local.direction(i), local.direction(j)];
            for e in [dirs[0].edge, dirs[1].edge] {
                if let Some(mv) = try_move(dirs, e) {
                    return Ok(mv);
                }
            }
        }
    }
    Err(CalculusError::NotFound(format!("vertex {v}")))
}

/// Instances examined and violations found while scanning one lemma.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LemmaScan {
    pub instances: usize,
    pub violations: Vec<serde_json::Value>,
}

impl LemmaScan {
    fn record(&mut self, r: Result<Verdict, CalculusError>) {
        match r {
            Ok(Verdict::Holds) => self.instances += 1,
            Ok(Verdict::Violation { witness }) => {
                self.instances += 1;
                self.violations.push(witness);
            }
            Err(_) => {}
        }
    }

    pub fn merge(&mut self, other: LemmaScan) {
        self.instances += other.instances;
        self.violations.extend(other.violations);
    }
}

/// Checks a graph lemma on every tuple of vertices satisfying its hypotheses.
pub fn scan_graph(id: LemmaId, g: &MultiGraph) -> LemmaScan {
    let mut scan = LemmaScan::default();
    let n = g.len();
    let mut run = |picks: &[usize]| scan.record(check_lemma(id, LemmaContext::Graph { graph: g, picks }));
    match id {
        LemmaId::ThreeDirections | LemmaId::TriosIncreasing => {
            for u in 0..n {
                for v in 0..n {
                    for w in 0..n {
                        if distinct(&[u, v, w]) && (id == LemmaId::ThreeDirections || (u < v && v < w)) {
                            run(&[u, v, w]);
                        }
                    }
                }
            }
        }
        LemmaId::WhenReductive | LemmaId::TwoReductive => {
            let cap = if n <= 10 { n } else { 3 };
            for mask in 1u32..(1 << n) {
                let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                if s.len() > cap {
                    continue;
                }
                if id == LemmaId::TwoReductive {
                    run(&s);
                } else {
                    for &x in &s {
                        let mut p = vec![x];
                        p.extend(s.iter().filter(|&&y| y != x));
                        run(&p);
                    }
                }
            }
        }
        LemmaId::ReallyTwoReductive => {
            for u in 0..n {
                for v in 0..n {
                    for w in v + 1..n {
                        if !distinct(&[u, v, w]) {
                            continue;
                        }
                        for (v, w) in [(v, w), (w, v)] {
                            for x in 0..n {
                                if !distinct(&[u, v, w, x]) || g.absolute(&[u, v, x]) > g.absolute(&[x]) {
                                    continue;
                                }
                                for y in 0..n {
                                    if distinct(&[u, v, w, x, y]) {
                                        run(&[u, v, w, x, y]);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        _ => {}
    }
    scan
}

/// Checks a lemma on every admissible instance in the star graph of `m`.
pub fn scan_patch(id: LemmaId, m: &MarkedGraph, star: &StarGraph) -> LemmaScan {
    let mut scan = LemmaScan::default();
    for v in 0..m.graph.num_vertices() {
        let local = star.local(v);
        if id.is_graph_lemma() && id != LemmaId::TriosIncreasing {
            let s = scan_graph(id, &local.graph);
            let dirs = |w: &serde_json::Value| serde_json::json!({"vertex": v, "local": w});
            scan.instances += s.instances;
            scan.violations.extend(s.violations.iter().map(dirs));
            continue;
        }
        let nd = local.num_directions();
        let mut run = |picks: &[Direction]| {
            scan.record(check_lemma(id, LemmaContext::Patch { marked: m, star, vertex: v, picks }))
        };
        match id {
            LemmaId::SizeTwoExists => run(&[]),
            LemmaId::OneReductiveSizeTwo => {
                for i in 0..nd {
                    for j in 0..nd {
                        let (a, b) = (local.direction(i), local.direction(j));
                        if a.elem == 0 && a.edge < b.edge && b.elem == 0 {
                            run(&[a, b]);
                        }
                    }
                }
            }
            LemmaId::TriosIncreasing | LemmaId::EFFbar => {
                for i in 0..nd {
                    for j in 0..nd {
                        for k in 0..nd {
                            let (a, b, c) = (local.direction(i), local.direction(j), local.direction(k));
                            let keep = if id == LemmaId::TriosIncreasing {
                                a.elem == 0 && a.edge < b.edge && b.edge < c.edge
                            } else {
                                a.elem == 0 && c.edge == rev(b.edge) && b.edge < c.edge
                            };
                            if keep {
                                run(&[a, b, c]);
                            }
                        }
                    }
                }
            }
            _ => {}
        }
    }
    scan
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FactorSignature;
    use crate::sample::random_patch;
    use crate::spine::Context;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path3() -> MultiGraph {
        let mut g = MultiGraph::new(3);
        g.add_edge(0, 1, 1).unwrap();
        g.add_edge(1, 2, 1).unwrap();
        g
    }

    #[test]
    fn path_examples() {
        let g = path3();
        assert_eq!(g.dot(&[0], &[1]), Ok(1));
        assert_eq!(g.dot(&[0], &[2]), Ok(0));
        assert_eq!(g.dot(&[], &[2]), Ok(0));
        assert_eq!(g.dot(&[0, 1], &[1]), Err(CalculusError::OverlappingSets));
        assert_eq!(g.absolute(&[0, 2]), 2);
        assert_eq!(g.absolute(&[0, 1, 2]), 0);
        assert_eq!(g.absolute(&[]), 0);
        assert_eq!(MultiGraph::new(2).add_edge(1, 1, 1), Err(CalculusError::LoopEdge(1)));
    }

    #[test]
    fn three_directions_rejects_unmet_hypotheses() {
        let mut g = MultiGraph::new(4);
        g.add_edge(0, 3, 2).unwrap();
        g.add_edge(1, 2, 1).unwrap();
        // |{0,1}| = 3 > |1| = 1.
        let r = check_lemma(LemmaId::ThreeDirections, LemmaContext::Graph { graph: &g, picks: &[0, 1, 2] });
        assert!(matches!(r, Err(CalculusError::HypothesesNotMet(_))));
        let r = check_lemma(LemmaId::SizeTwoExists, LemmaContext::Graph { graph: &g, picks: &[] });
        assert!(matches!(r, Err(CalculusError::HypothesesNotMet(_))));
    }

    fn subset(n: usize, mask: u32) -> Vec<usize> {
        (0..n).filter(|i| mask >> i & 1 == 1).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn dot_is_symmetric_and_additive(seed in any::<u64>(), n in 4usize..12, a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = MultiGraph::random(&mut rng, n, 0.4, 3);
            let full = (1u32 << n) - 1;
            let (s, t) = (b & full & !(a & full), c & full & !(a & full) & !(b & full));
            let (a, s, t) = (subset(n, a & full), subset(n, s), subset(n, t));
            let st: Vec<usize> = s.iter().chain(&t).copied().collect();
            prop_assert_eq!(g.dot(&s, &t).unwrap(), g.dot(&t, &s).unwrap());
            let rest: Vec<usize> = (0..n).filter(|x| !st.contains(x)).collect();
            let ar: Vec<usize> = a.iter().copied().filter(|x| rest.contains(x)).collect();
            prop_assert_eq!(
                g.dot(&ar, &st).unwrap(),
                g.dot(&ar, &s).unwrap() + g.dot(&ar, &t).unwrap()
            );
            let comp: Vec<usize> = (0..n).filter(|x| !a.contains(x)).collect();
            prop_assert_eq!(g.absolute(&a), g.absolute(&comp));
        }

        #[test]
        fn graph_lemmas_hold(seed in any::<u64>(), n in 4usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = MultiGraph::random(&mut rng, n, 0.5, 3);
            for id in LemmaId::ALL.into_iter().filter(|l| l.is_graph_lemma()) {
                let s = scan_graph(id, &g);
                prop_assert!(s.violations.is_empty(), "{id}: {:?}", s.violations);
            }
        }
    }

    #[test]
    fn absolute_value_is_invariant_under_the_group_action() {
        let ctx = Context::standard(FactorSignature::cyclic(&[3, 2], 1).unwrap()).unwrap();
        let m = random_patch(&MarkedGraph::seed(ctx).unwrap(), 3, 100, &mut ChaCha8Rng::seed_from_u64(2));
        let star = m.star_graph();
        for alpha in crate::spine::all_ideal_edges(&m, usize::MAX) {
            let a = ideal_abs(&star, &alpha);
            for h in 0..m.graph.group_order(m.sig(), alpha.vertex) {
                assert_eq!(star.abs_at(alpha.vertex, &alpha.translate(m.sig(), &m.graph, h)), a);
            }
        }
    }

    #[test]
    fn size_two_move_at_the_21_patch() {
        let ctx = Context::standard(FactorSignature::cyclic(&[2, 2], 1).unwrap()).unwrap();
        let m = MarkedGraph::seed(ctx).unwrap();
        let v = (0..m.graph.num_vertices()).find(|&v| m.graph.valence(v) == 3).unwrap();
        let mv = find_size_two_increasing(&m, v).unwrap();
        assert_eq!(mv.alpha.size(), 2);
        let after = crate::spine::whitehead_move(&m, &mv.alpha, mv.edge).unwrap();
        assert!(after.norm().unwrap() > m.norm().unwrap());

        let ctx = Context::standard(FactorSignature::cyclic(&[2], 2).unwrap()).unwrap();
        let m = MarkedGraph::seed(ctx).unwrap();
        assert!(matches!(find_size_two_increasing(&m, 0), Err(CalculusError::HypothesesNotMet(_))));
    }

    #[test]
    fn patch_lemmas_hold_on_sampled_patches() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (orders, k) in [(vec![2, 2], 1), (vec![2, 2, 2], 0), (vec![2, 3], 2), (vec![2], 2), (vec![2, 2, 2, 2], 0)] {
            let ctx = Context::standard(FactorSignature::cyclic(&orders, k).unwrap()).unwrap();
            let seed = MarkedGraph::seed(ctx).unwrap();
            let mut counts = [0usize; 8];
            for _ in 0..6 {
                let m = random_patch(&seed, 3, 200, &mut rng);
                let star = m.star_graph();
                for (i, id) in LemmaId::ALL.into_iter().enumerate() {
                    let s = scan_patch(id, &m, &star);
                    assert!(s.violations.is_empty(), "{id} at {orders:?},{k}: {:?} in {m:?}", s.violations);
                    counts[i] += s.instances;
                }
            }
            assert!(counts[1] > 0 && counts[2] > 0);
        }
    }
}
