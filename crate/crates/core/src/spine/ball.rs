use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use super::canon::CanonicalKey;
use super::ideal::{all_ideal_edges, ideal_forests};
use super::{all_moves, blow_up, blow_up_single, whitehead_move, MarkedGraph, SpineError};

#[derive(Clone, Debug)]
pub struct BallConfig {
    /// Maximum number of briar patches before giving up.
    pub budget: usize,
    /// Also compute the patches whose stars meet the ball, and their maximum norm.
    pub with_c: bool,
    /// Also record blow-up vertices and collapse edges among them (the 1-skeleton inside the ball).
    pub with_blowups: bool,
}

impl Default for BallConfig {
    fn default() -> Self {
        let budget = std::env::var("LSPINE_BALL_BUDGET")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(20_000);
        Self { budget, with_c: false, with_blowups: false }
    }
}

#[derive(Clone, Debug)]
pub struct Ball {
    pub radius: u64,
    pub patches: Vec<MarkedGraph>,
    pub keys: Vec<CanonicalKey>,
    pub norms: Vec<u64>,
    pub index: HashMap<CanonicalKey, usize>,
    /// Whitehead-move adjacency among patches, `i < j`, deduplicated.
    pub moves: BTreeSet<(usize, usize)>,
    /// Blow-ups of ball patches by a single ideal edge.
    pub blowups: Vec<CanonicalKey>,
    /// Collapse edges `(blow-up index, patch index)` inside the ball.
    pub blowup_edges: BTreeSet<(usize, usize)>,
    /// Patches whose stars meet the ball, with their norms.
    pub c_r: BTreeMap<CanonicalKey, u64>,
    /// Maximum norm over `c_r`, when computed.
    pub n_r: Option<u64>,
}

#[derive(Serialize)]
pub struct BallReport {
    pub radius: u64,
    pub vertices: Vec<(String, u64)>,
    pub adjacency: Vec<(String, String)>,
    pub c_r: Vec<(String, u64)>,
    pub n_r: Option<u64>,
}

impl Ball {
    pub fn contains_patch(&self, key: &CanonicalKey) -> bool {
        self.index.contains_key(key)
    }

    /// A marked graph lies in the ball iff one of its reduced collapses does.
    pub fn contains(&self, m: &MarkedGraph) -> bool {
        if m.is_reduced() {
            return m.total_length() <= self.radius && self.contains_patch(&m.canonical_key());
        }
        m.reduced_collapses()
            .iter()
            .any(|(_, c)| c.total_length() <= self.radius && self.contains_patch(&c.canonical_key()))
    }

    pub fn report(&self) -> BallReport {
        BallReport {
            radius: self.radius,
            vertices: self.keys.iter().zip(&self.norms).map(|(k, &n)| (k.id(), n)).collect(),
            adjacency: self
                .moves
                .iter()
                .map(|&(i, j)| (self.keys[i].id(), self.keys[j].id()))
                .collect(),
            c_r: self.c_r.iter().map(|(k, &n)| (k.id(), n)).collect(),
            n_r: self.n_r,
        }
    }

    /// Counts independent cycles in the graph of patches and single blow-ups
    /// joined by collapses (zero iff that graph is a forest).
    pub fn blowup_cycle_rank(&self) -> usize {
        let nodes = self.patches.len() + self.blowups.len();
        let mut parent: Vec<usize> = (0..nodes).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut cycles = 0;
        for &(b, t) in &self.blowup_edges {
            let (x, y) = (find(&mut parent, self.patches.len() + b), find(&mut parent, t));
            if x == y {
                cycles += 1;
            } else {
                parent[x] = y;
            }
        }
        cycles
    }
}

pub fn explore_ball(seed: &MarkedGraph, radius: u64, cfg: &BallConfig) -> Result<Ball, SpineError> {
    if seed.sig().n() == 0 {
        return Err(SpineError::Unsupported("ball exploration needs at least one finite factor".into()));
    }
    let seed_norm = seed.norm()?;
    if radius < seed_norm {
        return Err(SpineError::RadiusBelowSeed { radius, seed_norm });
    }
    let mut ball = Ball {
        radius,
        patches: vec![],
        keys: vec![],
        norms: vec![],
        index: HashMap::new(),
        moves: BTreeSet::new(),
        blowups: vec![],
        blowup_edges: BTreeSet::new(),
        c_r: BTreeMap::new(),
        n_r: None,
    };
    let k0 = seed.canonical_key();
    ball.index.insert(k0.clone(), 0);
    ball.keys.push(k0);
    ball.norms.push(seed_norm);
    ball.patches.push(seed.clone());
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let found: Vec<Vec<(MarkedGraph, CanonicalKey, u64)>> = frontier
            .par_iter()
            .map(|&i| {
                let m = &ball.patches[i];
                let norm = ball.norms[i];
                let star = m.star_graph();
                all_moves(m, &star)
                    .into_iter()
                    .filter(|(_, d)| norm as i64 + d <= radius as i64)
                    .map(|(mv, _)| {
                        let r = whitehead_move(m, &mv.alpha, mv.edge).expect("valid move");
                        let k = r.canonical_key();
                        let n = r.total_length();
                        (r, k, n)
                    })
                    .collect()
            })
            .collect();
        let mut next = Vec::new();
        for (&i, results) in frontier.iter().zip(found) {
            for (r, k, n) in results {
                let j = match ball.index.get(&k) {
                    Some(&j) => j,
                    None => {
                        let j = ball.patches.len();
                        if j >= cfg.budget {
                            return Err(SpineError::BallNotFinite { budget: cfg.budget });
                        }
                        ball.index.insert(k.clone(), j);
                        ball.keys.push(k);
                        ball.norms.push(n);
                        ball.patches.push(r);
                        next.push(j);
                        j
                    }
                };
                if i != j {
                    ball.moves.insert((i.min(j), i.max(j)));
                }
            }
        }
        frontier = next;
    }
    if cfg.with_blowups {
        record_blowups(&mut ball);
    }
    if cfg.with_c {
        compute_c(&mut ball);
    }
    Ok(ball)
}

fn record_blowups(ball: &mut Ball) {
    let per_patch: Vec<Vec<(CanonicalKey, Vec<CanonicalKey>)>> = ball
        .patches
        .par_iter()
        .map(|m| {
            all_ideal_edges(m, usize::MAX)
                .into_iter()
                .map(|alpha| {
                    let b = blow_up_single(m, &alpha);
                    let collapses = b.reduced_collapses().into_iter().map(|(_, c)| c.canonical_key()).collect();
                    (b.canonical_key(), collapses)
                })
                .collect()
        })
        .collect();
    let mut bindex: HashMap<CanonicalKey, usize> = HashMap::new();
    for list in per_patch {
        for (bk, collapses) in list {
            let b = *bindex.entry(bk.clone()).or_insert_with(|| {
                ball.blowups.push(bk);
                ball.blowups.len() - 1
            });
            for ck in collapses {
                if let Some(&t) = ball.index.get(&ck) {
                    ball.blowup_edges.insert((b, t));
                }
            }
        }
    }
}

fn compute_c(ball: &mut Ball) {
    let found: Vec<Vec<(CanonicalKey, u64)>> = ball
        .patches
        .par_iter()
        .map(|m| {
            let pool = all_ideal_edges(m, usize::MAX);
            let mut out = Vec::new();
            for phi in ideal_forests(m.sig(), &m.graph, &pool, usize::MAX) {
                if phi.is_empty() {
                    continue;
                }
                let members: Vec<_> = phi.iter().map(|&i| pool[i].clone()).collect();
                let b = blow_up(m, &members).expect("compatible forest");
                for (_, c) in b.marked.reduced_collapses() {
                    out.push((c.canonical_key(), c.total_length()));
                }
            }
            out
        })
        .collect();
    for (k, n) in ball.keys.iter().zip(&ball.norms) {
        ball.c_r.insert(k.clone(), *n);
    }
    for list in found {
        for (k, n) in list {
            ball.c_r.insert(k, n);
        }
    }
    ball.n_r = ball.c_r.values().copied().max();
}
