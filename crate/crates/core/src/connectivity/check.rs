//! Certificate replay with its own collapse, reduction, isomorphism and norm
//! code. Nothing here calls the generator's collapse, canonical form or norm.

use std::collections::HashMap;

use serde::Serialize;

use super::{HomotopyCertificate, StandardPath};
use crate::algebra::FiniteGroupTable;
use crate::gog::{LoopRep, Step, VertexGroup};
use crate::spine::MarkedGraph;

/// Plain copy of a marked graph that the checker manipulates.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Raw {
    verts: Vec<VertexGroup>,
    edges: Vec<(usize, usize)>,
    loops: Vec<RawLoop>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum RawLoop {
    Point(usize, usize),
    Cyc(Vec<(usize, usize)>),
}

struct Groups<'a> {
    tables: &'a [FiniteGroupTable],
    auts: Vec<Vec<Vec<usize>>>,
}

impl<'a> Groups<'a> {
    fn new(tables: &'a [FiniteGroupTable]) -> Self {
        Self { tables, auts: tables.iter().map(automorphisms).collect() }
    }

    fn mul(&self, g: VertexGroup, a: usize, b: usize) -> usize {
        match g {
            VertexGroup::Trivial => 0,
            VertexGroup::Factor(i) => self.tables[i].mul(a, b),
        }
    }

    fn inv(&self, g: VertexGroup, a: usize) -> usize {
        match g {
            VertexGroup::Trivial => 0,
            VertexGroup::Factor(i) => self.tables[i].inv(a),
        }
    }

    fn order(&self, g: VertexGroup) -> usize {
        match g {
            VertexGroup::Trivial => 1,
            VertexGroup::Factor(i) => self.tables[i].order(),
        }
    }

    fn conjugate(&self, g: VertexGroup, a: usize, b: usize) -> bool {
        (0..self.order(g)).any(|h| self.mul(g, self.mul(g, h, a), self.inv(g, h)) == b)
    }
}

/// Automorphisms by extending maps of a generating set, checked on the whole table.
fn automorphisms(t: &FiniteGroupTable) -> Vec<Vec<usize>> {
    let n = t.order();
    let closure = |gens: &[usize]| {
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut list = vec![0];
        let mut i = 0;
        while i < list.len() {
            for &s in gens {
                let y = t.mul(list[i], s);
                if !seen[y] {
                    seen[y] = true;
                    list.push(y);
                }
            }
            i += 1;
        }
        list.len()
    };
    let mut gens: Vec<usize> = Vec::new();
    for x in 1..n {
        if closure(&gens) == n {
            break;
        }
        let mut with = gens.clone();
        with.push(x);
        if closure(&with) > closure(&gens) {
            gens = with;
        }
    }
    let elem_order = |x: usize| {
        let (mut y, mut k) = (x, 1);
        while y != 0 {
            y = t.mul(y, x);
            k += 1;
        }
        k
    };
    let mut out = Vec::new();
    let mut images = vec![0usize; gens.len()];
    loop {
        if gens.iter().zip(&images).all(|(&g, &h)| elem_order(g) == elem_order(h)) {
            // Extend along a spanning tree of the Cayley graph.
            let mut map = vec![usize::MAX; n];
            map[0] = 0;
            let mut list = vec![0];
            let mut i = 0;
            while i < list.len() {
                for (j, &s) in gens.iter().enumerate() {
                    let y = t.mul(list[i], s);
                    if map[y] == usize::MAX {
                        map[y] = t.mul(map[list[i]], images[j]);
                        list.push(y);
                    }
                }
                i += 1;
            }
            let mut inj = vec![false; n];
            let bijective = map.iter().all(|&y| y < n && !std::mem::replace(&mut inj[y], true));
            if bijective && (0..n).all(|a| (0..n).all(|b| map[t.mul(a, b)] == t.mul(map[a], map[b]))) {
                out.push(map);
            }
        }
        let mut i = 0;
        while i < images.len() {
            images[i] += 1;
            if images[i] < n {
                break;
            }
            images[i] = 0;
            i += 1;
        }
        if i == images.len() {
            break;
        }
    }
    out
}

fn raw(m: &MarkedGraph) -> Raw {
    Raw {
        verts: m.graph.vertices.clone(),
        edges: m.graph.edges.clone(),
        loops: m
            .loops
            .iter()
            .map(|l| match l {
                LoopRep::Elliptic { vertex, elem } => RawLoop::Point(*vertex, *elem),
                LoopRep::Cycle(s) => RawLoop::Cyc(s.iter().map(|&Step { edge, elem }| (edge, elem)).collect()),
            })
            .collect(),
    }
}

impl Raw {
    fn origin(&self, o: usize) -> usize {
        let (a, b) = self.edges[o / 2];
        if o.is_multiple_of(2) {
            a
        } else {
            b
        }
    }

    fn term(&self, o: usize) -> usize {
        self.origin(o ^ 1)
    }

    fn is_reduced(&self) -> bool {
        self.edges
            .iter()
            .all(|&(a, b)| a == b || (self.verts[a] != VertexGroup::Trivial && self.verts[b] != VertexGroup::Trivial))
    }

    fn norm(&self) -> usize {
        self.loops
            .iter()
            .map(|l| match l {
                RawLoop::Point(..) => 0,
                RawLoop::Cyc(s) => s.len(),
            })
            .sum()
    }

    /// Components of `set` as a labelling, if `set` is a collapsible forest.
    fn forest_labels(&self, set: &[usize]) -> Option<Vec<usize>> {
        let mut label: Vec<usize> = (0..self.verts.len()).collect();
        for &e in set {
            let (a, b) = self.edges[e];
            let (la, lb) = (label[a], label[b]);
            if la == lb {
                return None;
            }
            let heavy = |l: usize| (0..self.verts.len()).any(|v| label[v] == l && self.verts[v] != VertexGroup::Trivial);
            if heavy(la) && heavy(lb) {
                return None;
            }
            for x in &mut label {
                if *x == lb {
                    *x = la;
                }
            }
        }
        Some(label)
    }

    fn collapse(&self, set: &[usize], gr: &Groups) -> Option<Raw> {
        let label = self.forest_labels(set)?;
        let mut reps: Vec<usize> = label.clone();
        reps.sort();
        reps.dedup();
        let new_of = |v: usize| reps.iter().position(|&r| r == label[v]).expect("label");
        let verts: Vec<VertexGroup> = reps
            .iter()
            .map(|&r| {
                (0..self.verts.len())
                    .filter(|&v| label[v] == r)
                    .map(|v| self.verts[v])
                    .find(|g| *g != VertexGroup::Trivial)
                    .unwrap_or(VertexGroup::Trivial)
            })
            .collect();
        let kept: Vec<usize> = (0..self.edges.len()).filter(|e| !set.contains(e)).collect();
        let edges: Vec<(usize, usize)> = kept.iter().map(|&e| (new_of(self.edges[e].0), new_of(self.edges[e].1))).collect();
        let new_edge = |o: usize| kept.iter().position(|&e| e == o / 2).map(|i| 2 * i + o % 2);
        let mut out = Raw { verts, edges, loops: Vec::new() };
        for l in &self.loops {
            let nl = match l {
                RawLoop::Point(v, x) => RawLoop::Point(new_of(*v), *x),
                RawLoop::Cyc(s) => {
                    let len = s.len();
                    match (0..len).find(|&i| new_edge(s[i].0).is_some()) {
                        None => {
                            let v = new_of(self.term(s[len - 1].0));
                            let g = out.verts[v];
                            let prod = s.iter().fold(0, |acc, &(_, x)| gr.mul(g, acc, x));
                            RawLoop::Point(v, prod)
                        }
                        Some(k0) => {
                            let mut steps = vec![(new_edge(s[k0].0).expect("kept"), s[k0].1)];
                            for j in 1..len {
                                let (e, x) = s[(k0 + j) % len];
                                match new_edge(e) {
                                    Some(ne) => steps.push((ne, x)),
                                    None => {
                                        let last = steps.last_mut().expect("nonempty");
                                        let g = out.verts[out.term(last.0)];
                                        last.1 = gr.mul(g, last.1, x);
                                    }
                                }
                            }
                            RawLoop::Cyc(steps)
                        }
                    }
                }
            };
            let reduced = out.reduce(nl, gr);
            out.loops.push(reduced);
        }
        Some(out)
    }

    /// Cancels cyclically adjacent `e 1 ē` until none is left.
    fn reduce(&self, l: RawLoop, gr: &Groups) -> RawLoop {
        let RawLoop::Cyc(mut s) = l else { return l };
        loop {
            let n = s.len();
            let hit = (0..n).find(|&i| n >= 2 && s[i].1 == 0 && s[(i + 1) % n].0 == s[i].0 ^ 1);
            let Some(i) = hit else { return RawLoop::Cyc(s) };
            let j = (i + 1) % n;
            let u = self.term(s[j].0);
            if n == 2 {
                return RawLoop::Point(u, s[j].1);
            }
            let p = (i + n - 1) % n;
            s[p].1 = gr.mul(self.verts[u], s[p].1, s[j].1);
            let (a, b) = (i.min(j), i.max(j));
            s.remove(b);
            s.remove(a);
        }
    }

    /// Smallest norm over all reduced graphs reachable by collapses.
    fn min_reduced_norm(&self, gr: &Groups) -> usize {
        if self.is_reduced() {
            return self.norm();
        }
        (0..self.edges.len())
            .filter_map(|e| self.collapse(&[e], gr))
            .map(|c| c.min_reduced_norm(gr))
            .min()
            .expect("a non-reduced graph has a collapsible edge")
    }
}

fn vertex_maps(a: &Raw, b: &Raw) -> Vec<Vec<usize>> {
    let n = a.verts.len();
    let val = |r: &Raw, v: usize| r.edges.iter().map(|&(x, y)| usize::from(x == v) + usize::from(y == v)).sum::<usize>();
    let mut out = Vec::new();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn rec(a: &Raw, b: &Raw, i: usize, map: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>, val: &dyn Fn(&Raw, usize) -> usize) {
        if i == a.verts.len() {
            out.push(map.clone());
            return;
        }
        for w in 0..b.verts.len() {
            if !used[w] && a.verts[i] == b.verts[w] && val(a, i) == val(b, w) {
                used[w] = true;
                map[i] = w;
                rec(a, b, i + 1, map, used, out, val);
                used[w] = false;
            }
        }
    }
    rec(a, b, 0, &mut map, &mut used, &mut out, &val);
    out
}

fn edge_maps(a: &Raw, b: &Raw, vm: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut map = vec![usize::MAX; a.edges.len()];
    let mut used = vec![false; b.edges.len()];
    fn rec(a: &Raw, b: &Raw, vm: &[usize], i: usize, map: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if i == a.edges.len() {
            out.push(map.clone());
            return;
        }
        let (x, y) = a.edges[i];
        for f in 0..b.edges.len() {
            if used[f] {
                continue;
            }
            for flip in 0..2 {
                let (p, q) = b.edges[f];
                let (p, q) = if flip == 0 { (p, q) } else { (q, p) };
                if p == vm[x] && q == vm[y] {
                    used[f] = true;
                    map[i] = 2 * f + flip;
                    rec(a, b, vm, i + 1, map, used, out);
                    used[f] = false;
                }
                if p == q {
                    break;
                }
            }
        }
    }
    rec(a, b, vm, 0, &mut map, &mut used, &mut out);
    out
}

/// Image of oriented edge `o` of `a` under an edge map.
fn img(em: &[usize], o: usize) -> usize {
    em[o / 2] ^ (o % 2)
}

struct Solver<'g, 'a> {
    gr: &'g Groups<'a>,
    a: &'g Raw,
    b: &'g Raw,
    vm: &'g [usize],
    em: &'g [usize],
    psi: &'g [Vec<usize>],
}

impl Solver<'_, '_> {
    /// Twist `c_o` for each oriented edge of `a`, or `None` when unassigned.
    /// Loops are matched in order; twist choices stay open until the last loop.
    fn solve(&self, li: usize, c: &mut Vec<Option<usize>>) -> bool {
        if li == self.a.loops.len() {
            return true;
        }
        match (&self.a.loops[li], &self.b.loops[li]) {
            (RawLoop::Point(v, x), RawLoop::Point(w, y)) => {
                let g = self.a.verts[*v];
                self.vm[*v] == *w && self.gr.conjugate(g, self.psi[*v][*x], *y) && self.solve(li + 1, c)
            }
            (RawLoop::Cyc(s), RawLoop::Cyc(t)) if s.len() == t.len() => {
                let n = s.len();
                (0..n).any(|r| {
                    (0..n).all(|i| img(self.em, s[i].0) == t[(i + r) % n].0)
                        && self.constrain(li, s, t, r, 0, &mut c.clone())
                })
            }
            _ => false,
        }
    }

    /// Requires `c_{ē_i}^{-1} ψ(x_i) c_{e_{i+1}} = y_{i+r}` for positions `i..`,
    /// then moves on to the next loop.
    fn constrain(&self, li: usize, s: &[(usize, usize)], t: &[(usize, usize)], r: usize, i: usize, c: &mut Vec<Option<usize>>) -> bool {
        let n = s.len();
        if i == n {
            return self.solve(li + 1, c);
        }
        let (din, dout) = (s[i].0 ^ 1, s[(i + 1) % n].0);
        let v = self.a.origin(dout);
        let g = self.a.verts[v];
        let gr = self.gr;
        let px = self.psi[v][s[i].1];
        let y = t[(i + r) % n].1;
        let holds = |p: usize, q: usize| gr.mul(g, gr.mul(g, gr.inv(g, p), px), q) == y;
        let next = |c: &mut Vec<Option<usize>>| self.constrain(li, s, t, r, i + 1, c);
        match (c[din], c[dout]) {
            (Some(p), Some(q)) => holds(p, q) && next(c),
            (Some(p), None) => {
                let q = gr.mul(g, gr.inv(g, px), gr.mul(g, p, y));
                let mut trial = c.clone();
                trial[dout] = Some(q);
                next(&mut trial)
            }
            (None, Some(q)) => {
                let p = gr.mul(g, gr.mul(g, px, q), gr.inv(g, y));
                let mut trial = c.clone();
                trial[din] = Some(p);
                next(&mut trial)
            }
            (None, None) => (0..gr.order(g)).any(|p| {
                let mut trial = c.clone();
                trial[din] = Some(p);
                if din == dout {
                    return holds(p, p) && next(&mut trial);
                }
                trial[dout] = Some(gr.mul(g, gr.inv(g, px), gr.mul(g, p, y)));
                next(&mut trial)
            }),
        }
    }
}

fn isomorphic(a: &Raw, b: &Raw, gr: &Groups) -> bool {
    if a == b {
        return true;
    }
    if a.verts.len() != b.verts.len() || a.edges.len() != b.edges.len() || a.loops.len() != b.loops.len() {
        return false;
    }
    let shape = |l: &RawLoop| match l {
        RawLoop::Point(..) => 0,
        RawLoop::Cyc(s) => s.len(),
    };
    if a.loops.iter().zip(&b.loops).any(|(x, y)| shape(x) != shape(y)) {
        return false;
    }
    for vm in vertex_maps(a, b) {
        for em in edge_maps(a, b, &vm) {
            // One automorphism per factor vertex, in every combination.
            let factor_vs: Vec<usize> = (0..a.verts.len()).filter(|&v| a.verts[v] != VertexGroup::Trivial).collect();
            let choices: Vec<&Vec<Vec<usize>>> = factor_vs
                .iter()
                .map(|&v| match a.verts[v] {
                    VertexGroup::Factor(i) => &gr.auts[i],
                    VertexGroup::Trivial => unreachable!(),
                })
                .collect();
            let mut idx = vec![0usize; factor_vs.len()];
            loop {
                let mut psi: Vec<Vec<usize>> = vec![vec![0]; a.verts.len()];
                for (j, &v) in factor_vs.iter().enumerate() {
                    psi[v] = choices[j][idx[j]].clone();
                }
                let solver = Solver { gr, a, b, vm: &vm, em: &em, psi: &psi };
                let mut c: Vec<Option<usize>> = (0..2 * a.edges.len())
                    .map(|o| (a.verts[a.origin(o)] == VertexGroup::Trivial).then_some(0))
                    .collect();
                if solver.solve(0, &mut c) {
                    return true;
                }
                let mut j = 0;
                while j < idx.len() {
                    idx[j] += 1;
                    if idx[j] < choices[j].len() {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == idx.len() {
                    break;
                }
            }
        }
    }
    false
}

/// Edge subsets of the given size, in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

/// `big` collapses onto `small` along some forest.
fn collapses_to(big: &Raw, small: &Raw, gr: &Groups) -> bool {
    let d = big.edges.len() - small.edges.len();
    subsets(big.edges.len(), d)
        .iter()
        .filter_map(|s| big.collapse(s, gr))
        .any(|c| isomorphic(&c, small, gr))
}

fn comparable(a: &Raw, b: &Raw, gr: &Groups) -> bool {
    use std::cmp::Ordering::*;
    match a.edges.len().cmp(&b.edges.len()) {
        Equal => isomorphic(a, b, gr),
        Greater => collapses_to(a, b, gr),
        Less => collapses_to(b, a, gr),
    }
}

/// Outcome of a successful replay.
#[derive(Clone, Debug, Serialize)]
pub struct ReplayReport {
    pub steps: usize,
    pub vertices_checked: usize,
    pub final_length: usize,
    /// Smallest reduced-collapse norm met by any vertex or center along the way.
    pub min_norm_seen: usize,
}

pub struct Checker<'a> {
    gr: Groups<'a>,
    norms: HashMap<Vec<RawLoopKey>, usize>,
}

impl<'a> Checker<'a> {
    pub fn new(tables: &'a [FiniteGroupTable]) -> Self {
        Self { gr: Groups::new(tables), norms: HashMap::new() }
    }

    pub fn isomorphic(&self, a: &MarkedGraph, b: &MarkedGraph) -> bool {
        isomorphic(&raw(a), &raw(b), &self.gr)
    }

    pub fn comparable(&self, a: &MarkedGraph, b: &MarkedGraph) -> bool {
        comparable(&raw(a), &raw(b), &self.gr)
    }

    /// Smallest norm of a reduced collapse; the norm itself for reduced input.
    pub fn min_norm(&mut self, m: &MarkedGraph) -> usize {
        self.norm_of(&raw(m))
    }

    fn norm_of(&mut self, r: &Raw) -> usize {
        let key = loop_key(r);
        if let Some(&n) = self.norms.get(&key) {
            return n;
        }
        let n = r.min_reduced_norm(&self.gr);
        self.norms.insert(key, n);
        n
    }

    /// Even entries reduced; each odd entry one edge larger and collapsing
    /// onto both neighbours.
    pub fn check_standard(&self, p: &[MarkedGraph]) -> Result<(), String> {
        if p.len().is_multiple_of(2) {
            return Err(format!("standard path of even length {}", p.len()));
        }
        let rs: Vec<Raw> = p.iter().map(raw).collect();
        for (i, r) in rs.iter().enumerate() {
            if i % 2 == 0 && !r.is_reduced() {
                return Err(format!("entry {i} is not reduced"));
            }
            if i % 2 == 1 {
                for j in [i - 1, i + 1] {
                    if r.edges.len() != rs[j].edges.len() + 1 || !collapses_to(r, &rs[j], &self.gr) {
                        return Err(format!("entry {i} does not collapse onto entry {j}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Replays every replacement from the certificate's start. Each replaced
    /// segment must match the current path, share its endpoints with the new
    /// one, and together with it lie in the star of the center. When `avoid`
    /// is given, every vertex and center must have all reduced collapses of
    /// norm above it.
    pub fn replay(&mut self, cert: &HomotopyCertificate, result: &StandardPath, avoid: Option<usize>) -> Result<ReplayReport, String> {
        let mut path: Vec<Raw> = cert.start.iter().map(raw).collect();
        let mut checked = 0usize;
        let mut min_seen = usize::MAX;
        for r in &path {
            min_seen = min_seen.min(self.norm_of(r));
        }
        for (si, step) in cert.steps.iter().enumerate() {
            let fail = |m: String| Err(format!("step {si}: {m}"));
            let old: Vec<Raw> = step.old.iter().map(raw).collect();
            let new: Vec<Raw> = step.new.iter().map(raw).collect();
            let center = raw(&step.center);
            if old.is_empty() || new.is_empty() {
                return fail("empty segment".into());
            }
            if step.at + old.len() > path.len() {
                return fail("segment runs past the end of the path".into());
            }
            for (j, o) in old.iter().enumerate() {
                if !isomorphic(o, &path[step.at + j], &self.gr) {
                    return fail(format!("old segment differs from the path at {}", step.at + j));
                }
            }
            if !isomorphic(&old[0], &new[0], &self.gr) || !isomorphic(&old[old.len() - 1], &new[new.len() - 1], &self.gr) {
                return fail("endpoints differ".into());
            }
            for x in old.iter().chain(&new) {
                if !comparable(&center, x, &self.gr) {
                    return fail("vertex outside the star of the center".into());
                }
                checked += 1;
            }
            for w in new.windows(2) {
                if !comparable(&w[0], &w[1], &self.gr) {
                    return fail("new segment is not a path".into());
                }
            }
            for r in new.iter().chain(std::iter::once(&center)) {
                let n = self.norm_of(r);
                min_seen = min_seen.min(n);
                if let Some(k) = avoid {
                    if n <= k {
                        return fail(format!("a vertex meets the ball of radius {k} (norm {n})"));
                    }
                }
            }
            path.splice(step.at..step.at + old.len(), new);
        }
        let want: Vec<Raw> = result.vertices.iter().map(raw).collect();
        if want.len() != path.len() || !want.iter().zip(&path).all(|(x, y)| isomorphic(x, y, &self.gr)) {
            return Err("replay does not end at the claimed path".into());
        }
        self.check_standard(&result.vertices)?;
        if let Some(k) = avoid {
            for (i, r) in path.iter().enumerate() {
                let n = self.norm_of(r);
                if n <= k {
                    return Err(format!("final vertex {i} meets the ball of radius {k}"));
                }
            }
        }
        Ok(ReplayReport { steps: cert.steps.len(), vertices_checked: checked, final_length: path.len(), min_norm_seen: min_seen })
    }
}

type RawLoopKey = (Vec<(usize, usize)>, Vec<(usize, usize, usize)>);

fn loop_key(r: &Raw) -> Vec<RawLoopKey> {
    let v: Vec<(usize, usize)> = r.verts.iter().map(|g| match g {
        VertexGroup::Trivial => (0, 0),
        VertexGroup::Factor(i) => (1, *i),
    }).collect();
    let mut out = vec![(v, vec![])];
    out.push((r.edges.clone(), vec![]));
    for l in &r.loops {
        match l {
            RawLoop::Point(a, b) => out.push((vec![], vec![(0, *a, *b)])),
            RawLoop::Cyc(s) => out.push((s.clone(), vec![])),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FiniteGroupTable;

    #[test]
    fn automorphism_counts() {
        let count = |t: FiniteGroupTable| automorphisms(&t).len();
        assert_eq!(count(FiniteGroupTable::cyclic(2).unwrap()), 1);
        assert_eq!(count(FiniteGroupTable::cyclic(5).unwrap()), 4);
        assert_eq!(count(FiniteGroupTable::cyclic(6).unwrap()), 2);
        assert_eq!(count(FiniteGroupTable::dihedral(3).unwrap()), 6);
        assert_eq!(count(FiniteGroupTable::dihedral(4).unwrap()), 8);
    }
}

