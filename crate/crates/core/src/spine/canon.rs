//! Canonical forms for marked graphs up to graph-of-groups isomorphism.
//!
//! An isomorphism is a label-preserving bijection of vertices and oriented
//! edges, an automorphism of each vertex group, and a twist `δ_o` at every
//! edge end. A loop value `x` between arriving `e_i` and leaving `e_{i+1}`
//! becomes `δ_{ē_i}^{-1} φ(x) δ_{e_{i+1}}`. The key is the minimum, over the
//! vertex/edge bijections giving the least underlying graph, of the loop
//! serialization with each loop rotated to its least edge skeleton. Values at
//! different vertices involve disjoint unknowns, so they are minimized one
//! vertex at a time.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::algebra::{FactorSignature, FiniteGroupTable};
use crate::gog::{GraphOfGroups, LoopRep, VertexGroup};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalKey(pub Vec<u32>);

impl CanonicalKey {
    /// Short stable identifier (FNV-1a over the key).
    pub fn id(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &x in &self.0 {
            for b in x.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        format!("{h:016x}")
    }
}

/// Branch cap for edge bijections and rotation ties; beyond it the search
/// still runs but is truncated, which would only ever split a class.
const BRANCH_CAP: usize = 1 << 16;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn rec(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == p.len() {
            out.push(p.clone());
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(k + 1, p, out);
            p.swap(k, i);
        }
    }
    rec(0, &mut p, &mut out);
    out
}

fn automorphisms_cached(sig: &FactorSignature, f: usize) -> Vec<Vec<usize>> {
    static CACHE: OnceLock<std::sync::Mutex<BTreeMap<Vec<Vec<usize>>, Vec<Vec<usize>>>>> = OnceLock::new();
    let table = sig.factor(f);
    let rows = table.rows();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(a) = cache.lock().expect("cache").get(&rows) {
        return a.clone();
    }
    let a = table.automorphisms();
    cache.lock().expect("cache").insert(rows, a.clone());
    a
}

/// A position whose value is minimized at one vertex.
#[derive(Clone, Copy)]
enum Pos {
    Turn { a: usize, b: usize, x: usize },
    Elliptic { x: usize },
}

pub fn canonical_key(sig: &FactorSignature, g: &GraphOfGroups, loops: &[LoopRep]) -> CanonicalKey {
    let nv = g.num_vertices();
    // Nontrivial vertices first, in factor order; trivial vertices are permuted.
    let mut fixed: Vec<(usize, usize)> = (0..nv)
        .filter_map(|v| match g.vertices[v] {
            VertexGroup::Factor(i) => Some((i, v)),
            VertexGroup::Trivial => None,
        })
        .collect();
    fixed.sort();
    let trivial: Vec<usize> = (0..nv).filter(|&v| g.vertices[v].is_trivial()).collect();
    let p = fixed.len();

    let mut best_graph: Option<Vec<(u32, u32)>> = None;
    let mut vmaps: Vec<Vec<usize>> = Vec::new();
    for perm in permutations(trivial.len()) {
        let mut vmap = vec![0usize; nv];
        for (new, &(_, v)) in fixed.iter().enumerate() {
            vmap[v] = new;
        }
        for (k, &pi) in perm.iter().enumerate() {
            vmap[trivial[k]] = p + pi;
        }
        let mut pairs: Vec<(u32, u32)> = g
            .edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (vmap[a] as u32, vmap[b] as u32);
                (x.min(y), x.max(y))
            })
            .collect();
        pairs.sort();
        match &best_graph {
            Some(b) if pairs > *b => {}
            Some(b) if pairs == *b => vmaps.push(vmap),
            _ => {
                best_graph = Some(pairs);
                vmaps = vec![vmap];
            }
        }
    }
    let pairs = best_graph.expect("at least one vertex map");

    let mut header: Vec<u32> = vec![nv as u32];
    for new in 0..nv {
        header.push(if new < p { fixed[new].0 as u32 + 1 } else { 0 });
    }
    header.push(pairs.len() as u32);
    for &(a, b) in &pairs {
        header.push(a);
        header.push(b);
    }

    let mut best: Option<Vec<u32>> = None;
    let mut budget = BRANCH_CAP;
    for vmap in &vmaps {
        for omap in edge_maps(g, vmap, &pairs) {
            for rot in rotation_choices(loops, &omap) {
                if budget == 0 {
                    break;
                }
                budget -= 1;
                let key = serialize(sig, g, loops, vmap, &omap, &rot, &header);
                if best.as_ref().is_none_or(|b| key < *b) {
                    best = Some(key);
                }
            }
        }
    }
    CanonicalKey(best.expect("at least one branch"))
}

/// All bijections of oriented edges compatible with `vmap` that list the edges
/// in the order of `pairs`.
fn edge_maps(g: &GraphOfGroups, vmap: &[usize], pairs: &[(u32, u32)]) -> Vec<Vec<usize>> {
    // Group old edges by their image endpoint pair; new ids run along `pairs`.
    let mut classes: Vec<((u32, u32), Vec<usize>)> = Vec::new();
    for (i, &(a, b)) in g.edges.iter().enumerate() {
        let (x, y) = (vmap[a] as u32, vmap[b] as u32);
        let key = (x.min(y), x.max(y));
        match classes.iter_mut().find(|c| c.0 == key) {
            Some(c) => c.1.push(i),
            None => classes.push((key, vec![i])),
        }
    }
    classes.sort();
    let mut maps: Vec<Vec<usize>> = vec![vec![usize::MAX; g.num_oriented()]];
    let mut next_id = 0usize;
    for (key, members) in &classes {
        debug_assert_eq!(pairs[next_id], *key);
        let is_loop = key.0 == key.1;
        let k = members.len();
        let mut extended = Vec::new();
        for perm in permutations(k) {
            let flips = if is_loop { 1usize << k } else { 1 };
            for flip in 0..flips {
                for base in &maps {
                    let mut m = base.clone();
                    for (slot, &pi) in perm.iter().enumerate() {
                        let old = members[pi];
                        let new = next_id + slot;
                        let (a, _) = g.edges[old];
                        let forward = if is_loop {
                            flip >> slot & 1 == 0
                        } else {
                            vmap[a] as u32 == key.0
                        };
                        let (o0, o1) = if forward { (2 * new, 2 * new + 1) } else { (2 * new + 1, 2 * new) };
                        m[2 * old] = o0;
                        m[2 * old + 1] = o1;
                    }
                    extended.push(m);
                    if extended.len() >= BRANCH_CAP {
                        break;
                    }
                }
            }
        }
        maps = extended;
        next_id += k;
    }
    maps
}

/// For each loop, the rotations achieving the least mapped edge skeleton;
/// returns the cartesian product of choices.
fn rotation_choices(loops: &[LoopRep], omap: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::with_capacity(loops.len())];
    for l in loops {
        let s = l.steps();
        let m = s.len();
        let skel: Vec<usize> = s.iter().map(|st| omap[st.edge]).collect();
        let mut best: Vec<usize> = Vec::new();
        let mut best_seq: Option<Vec<usize>> = None;
        for r in 0..m.max(1) {
            let seq: Vec<usize> = (0..m).map(|j| skel[(r + j) % m]).collect();
            match &best_seq {
                Some(b) if seq > *b => {}
                Some(b) if seq == *b => best.push(r),
                _ => {
                    best_seq = Some(seq);
                    best = vec![r];
                }
            }
        }
        if best.len() == 1 {
            for o in &mut out {
                o.push(best[0]);
            }
        } else {
            let mut next = Vec::with_capacity(out.len() * best.len());
            for o in &out {
                for &r in &best {
                    let mut c = o.clone();
                    c.push(r);
                    next.push(c);
                }
            }
            out = next;
            out.truncate(BRANCH_CAP);
        }
    }
    out
}

fn serialize(
    sig: &FactorSignature,
    g: &GraphOfGroups,
    loops: &[LoopRep],
    vmap: &[usize],
    omap: &[usize],
    rot: &[usize],
    header: &[u32],
) -> Vec<u32> {
    let nv = g.num_vertices();
    // Slots in the output for each loop value, with the positions grouped by vertex.
    let mut per_vertex: Vec<Vec<(usize, Pos)>> = vec![Vec::new(); nv];
    let mut out: Vec<u32> = header.to_vec();
    for (l, &r) in loops.iter().zip(rot) {
        match l {
            LoopRep::Elliptic { vertex, elem } => {
                out.push(0);
                out.push(vmap[*vertex] as u32);
                per_vertex[*vertex].push((out.len(), Pos::Elliptic { x: *elem }));
                out.push(0);
            }
            LoopRep::Cycle(s) => {
                let m = s.len();
                out.push(m as u32);
                for j in 0..m {
                    let i = (r + j) % m;
                    let cur = s[i];
                    let next = s[(i + 1) % m];
                    out.push(omap[cur.edge] as u32);
                    let v = g.terminus(cur.edge);
                    per_vertex[v].push((out.len(), Pos::Turn { a: cur.edge ^ 1, b: next.edge, x: cur.elem }));
                    out.push(0);
                }
            }
        }
    }
    for (v, positions) in per_vertex.iter().enumerate() {
        let VertexGroup::Factor(f) = g.vertices[v] else { continue };
        if positions.is_empty() {
            continue;
        }
        let table = sig.factor(f);
        let pos: Vec<Pos> = positions.iter().map(|p| p.1).collect();
        let values = minimize_vertex(sig, f, table, g, &pos);
        for ((slot, _), val) in positions.iter().zip(values) {
            out[*slot] = val as u32;
        }
    }
    out
}

fn minimize_vertex(
    sig: &FactorSignature,
    f: usize,
    table: &FiniteGroupTable,
    g: &GraphOfGroups,
    pos: &[Pos],
) -> Vec<usize> {
    let auts = automorphisms_cached(sig, f);
    let abelian = table.is_abelian();
    let mut best: Option<Vec<usize>> = None;
    for phi in &auts {
        let vals = if abelian {
            greedy_twists(table, g, phi, pos)
        } else {
            brute_twists(table, g, phi, pos)
        };
        if best.as_ref().is_none_or(|b| vals < *b) {
            best = Some(vals);
        }
    }
    best.expect("identity automorphism")
}

fn min_conjugate(table: &FiniteGroupTable, x: usize) -> usize {
    (0..table.order()).map(|h| table.conjugate(h, x)).min().unwrap_or(x)
}

/// Exact lexicographic minimization for abelian vertex groups: each twist is
/// an offset from its union-find root, and a position joining two components
/// can always be made the identity.
fn greedy_twists(table: &FiniteGroupTable, g: &GraphOfGroups, phi: &[usize], pos: &[Pos]) -> Vec<usize> {
    let n = g.num_oriented();
    let mut parent: Vec<usize> = (0..n).collect();
    // δ_o = off[o] * δ_parent
    let mut off = vec![0usize; n];
    fn find(parent: &mut [usize], off: &mut [usize], t: &FiniteGroupTable, x: usize) -> (usize, usize) {
        let mut path = Vec::new();
        let mut r = x;
        while parent[r] != r {
            path.push(r);
            r = parent[r];
        }
        // Recompute offsets to the root from the top down.
        for &y in path.iter().rev() {
            let p = parent[y];
            let po = if p == r { 0 } else { off[p] };
            off[y] = t.mul(off[y], po);
            parent[y] = r;
        }
        (r, if x == r { 0 } else { off[x] })
    }
    let _ = g;
    pos.iter()
        .map(|p| match *p {
            Pos::Elliptic { x } => min_conjugate(table, phi[x]),
            Pos::Turn { a, b, x } => {
                let y = phi[x];
                let (ra, ca) = find(&mut parent, &mut off, table, a);
                let (rb, cb) = find(&mut parent, &mut off, table, b);
                // value = δ_a^{-1} y δ_b = ca^{-1} R_a^{-1} y cb R_b
                if ra == rb {
                    table.mul(table.mul(table.inv(ca), y), cb)
                } else {
                    // Choose R_b = R_a (ca^{-1} y cb)^{-1}, abelian so order is free.
                    let z = table.mul(table.mul(table.inv(ca), y), cb);
                    parent[rb] = ra;
                    off[rb] = table.inv(z);
                    0
                }
            }
        })
        .collect()
}

fn brute_twists(table: &FiniteGroupTable, g: &GraphOfGroups, phi: &[usize], pos: &[Pos]) -> Vec<usize> {
    let mut ends: Vec<usize> = Vec::new();
    for p in pos {
        if let Pos::Turn { a, b, .. } = *p {
            for e in [a, b] {
                if !ends.contains(&e) {
                    ends.push(e);
                }
            }
        }
    }
    let q = table.order();
    let mut delta = vec![0usize; g.num_oriented()];
    let mut choice = vec![0usize; ends.len()];
    let mut best: Option<Vec<usize>> = None;
    loop {
        for (i, &e) in ends.iter().enumerate() {
            delta[e] = choice[i];
        }
        let vals: Vec<usize> = pos
            .iter()
            .map(|p| match *p {
                Pos::Elliptic { x } => min_conjugate(table, phi[x]),
                Pos::Turn { a, b, x } => table.mul(table.mul(table.inv(delta[a]), phi[x]), delta[b]),
            })
            .collect();
        if best.as_ref().is_none_or(|b| vals < *b) {
            best = Some(vals);
        }
        let mut i = 0;
        loop {
            if i == choice.len() {
                return best.expect("one assignment");
            }
            choice[i] += 1;
            if choice[i] < q {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_matches_brute_force_on_random_positions() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let g = GraphOfGroups { vertices: vec![VertexGroup::Factor(0)], edges: vec![(0, 0), (0, 0)] };
        for m in [2usize, 3, 4, 6] {
            let t = FiniteGroupTable::cyclic(m).unwrap();
            let phi: Vec<usize> = (0..m).collect();
            for _ in 0..200 {
                let len = rng.gen_range(1..8);
                let pos: Vec<Pos> = (0..len)
                    .map(|_| Pos::Turn { a: rng.gen_range(0..4), b: rng.gen_range(0..4), x: rng.gen_range(0..m) })
                    .collect();
                assert_eq!(greedy_twists(&t, &g, &phi, &pos), brute_twists(&t, &g, &phi, &pos));
            }
        }
    }
}
