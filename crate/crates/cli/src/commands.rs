use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context as _, Result};
use lspine::gog::VertexGroup;
use lspine::sample::{random_patch, square_loop, valley_path};
use lspine::spine::{all_ideal_edges, all_moves, ideal_abs, is_reductive, Direction};
use lspine::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{Cli, Command, SCHEMA_VERSION};

pub struct Output {
    pub report: Value,
    /// Printed verbatim instead of the report (DOT output).
    pub raw: Option<String>,
    pub witness: Option<Value>,
}

fn ok(command: &str, body: Value) -> Result<Output> {
    let mut report = json!({ "schema_version": SCHEMA_VERSION, "command": command });
    if let (Value::Object(head), Value::Object(rest)) = (&mut report, body) {
        head.extend(rest);
    }
    Ok(Output { report, raw: None, witness: None })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_graph(path: &Path) -> Result<MarkedGraph> {
    parse_marked_graph(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn read_path(path: &Path) -> Result<connectivity::StandardPath> {
    let v: Value = serde_json::from_str(&read(path)?).with_context(|| format!("{} is not JSON", path.display()))?;
    path_from_json(&v).with_context(|| format!("in {}", path.display()))
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).expect("serializable") + "\n";
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn edge_token(o: usize) -> String {
    if o.is_multiple_of(2) {
        format!("e{}", o / 2)
    } else {
        format!("e{}^-1", o / 2)
    }
}

fn dir_label(m: &MarkedGraph, v: usize, d: Direction) -> String {
    let g = match m.graph.vertices[v] {
        VertexGroup::Factor(i) if d.elem != 0 => format!("{}:{}", m.sig().name(i), d.elem),
        _ => "1".into(),
    };
    format!("{g}.{}", edge_token(d.edge))
}

fn ideal_row(m: &MarkedGraph, star: &StarGraph, a: &IdealEdge) -> Value {
    json!({
        "vertex": a.vertex,
        "size": a.size(),
        "directions": a.dirs.iter().map(|&d| dir_label(m, a.vertex, d)).collect::<Vec<_>>(),
        "abs": ideal_abs(star, a),
        "reductive": is_reductive(m, star, a),
        "d_edges": a.d_edges().into_iter().map(edge_token).collect::<Vec<_>>(),
    })
}

pub fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Classify { n, k } => {
            let c = classify(*n, *k);
            ok("classify", json!({ "n": c.n, "k": c.k, "ends": c.ends, "dim": c.dim_l, "edge_number": c.edge_number }))
        }
        Command::Norm { graph } => {
            let m = read_graph(graph)?;
            let norm = m.norm()?;
            let star = m.star_graph().norm_from_star();
            ok(
                "norm",
                json!({
                    "norm": norm,
                    "norm_from_star": star.to_string(),
                    "vertices": m.graph.num_vertices(),
                    "edges": m.graph.num_edges(),
                    "words": m.words().len(),
                    "id": m.canonical_key().id(),
                }),
            )
        }
        Command::Stargraph { graph, dot } => stargraph(&read_graph(graph)?, *dot),
        Command::IdealEdges { graph, vertex, max_size } => {
            let m = read_graph(graph)?;
            let star = m.star_graph();
            let rows: Vec<Value> = all_ideal_edges(&m, max_size.unwrap_or(usize::MAX))
                .iter()
                .filter(|a| vertex.is_none_or(|v| a.vertex == v))
                .map(|a| ideal_row(&m, &star, a))
                .collect();
            ok("ideal-edges", json!({ "count": rows.len(), "ideal_edges": rows }))
        }
        Command::Move { graph, apply, output } => moves(&read_graph(graph)?, *apply, output.as_deref()),
        Command::Ball { graph, radius, budget, with_c, dot } => {
            let m = read_graph(graph)?;
            let mut cfg = BallConfig { with_c: *with_c, ..BallConfig::default() };
            if let Some(b) = budget {
                cfg.budget = *b;
            }
            let ball = explore_ball(&m, *radius, &cfg)?;
            let r = ball.report();
            if *dot {
                let mut s = String::from("graph ball {\n");
                for (id, n) in &r.vertices {
                    writeln!(s, "  \"{id}\" [label=\"{id}\\n{n}\"];").unwrap();
                }
                for (a, b) in &r.adjacency {
                    writeln!(s, "  \"{a}\" -- \"{b}\";").unwrap();
                }
                s.push_str("}\n");
                return Ok(Output { report: Value::Null, raw: Some(s), witness: None });
            }
            ok(
                "ball",
                json!({
                    "radius": r.radius,
                    "patches": r.vertices.len(),
                    "moves": r.adjacency.len(),
                    "n_r": r.n_r,
                    "vertices": r.vertices.iter().map(|(id, n)| json!({"id": id, "norm": n})).collect::<Vec<_>>(),
                    "adjacency": r.adjacency.iter().map(|(a, b)| json!({"from": a, "to": b})).collect::<Vec<_>>(),
                    "c_r": r.c_r.iter().map(|(id, n)| json!({"id": id, "norm": n})).collect::<Vec<_>>(),
                }),
            )
        }
        Command::VerifyLemmas { lemma, trials, signatures } => verify_lemmas(cli.seed, lemma, *trials, signatures),
        Command::Push { input, generate, radius, emit_certificate, certificate, output } => {
            let mut extra = json!({});
            let path = match (input, generate) {
                (Some(p), _) => read_path(p)?,
                (None, Some(g)) => {
                    let start = read_graph(g)?;
                    let ball = explore_ball(&start, *radius, &BallConfig { with_c: true, ..BallConfig::default() })?;
                    let nk = ball.n_r.ok_or_else(|| anyhow!("ball has no N(k)"))?;
                    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                    let bottom = &ball.patches[rng.gen_range(0..ball.patches.len())];
                    extra = json!({ "n_k": nk, "bottom_norm": bottom.total_length() });
                    valley_path(bottom, nk, &mut rng)?
                }
                (None, None) => unreachable!("clap requires one"),
            };
            push(&path, *radius, extra, emit_certificate.then_some(certificate.as_path()), output.as_deref())
        }
        Command::PushLoop { loop_path, generate, start, k, n, ray_length, emit_certificate, certificate, output } => {
            let (lp, start) = match (loop_path, generate) {
                (Some(p), _) => {
                    let lp = read_path(p)?;
                    let start = match start {
                        Some(s) => read_graph(s)?,
                        None => MarkedGraph::seed(lp.first().ctx().clone())?,
                    };
                    (lp, start)
                }
                (None, Some(g)) => {
                    let start = read_graph(g)?;
                    let ball = explore_ball(&start, *k, &BallConfig { with_c: true, ..BallConfig::default() })?;
                    let nk = ball.n_r.ok_or_else(|| anyhow!("ball has no N(k)"))?;
                    let ray = build_ray(&start, *ray_length)?;
                    let b0 = ray
                        .norms()
                        .iter()
                        .position(|&x| x > nk)
                        .ok_or_else(|| anyhow!("no ray patch above N(k) = {nk}; raise --ray-length"))?;
                    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                    let lp = square_loop(&ray.patches[b0], &mut rng)
                        .ok_or_else(|| anyhow!("no loop found at ray index {b0}"))?;
                    (lp, start)
                }
                (None, None) => unreachable!("clap requires one"),
            };
            push_loop_cmd(&lp, &start, *k, *n, *ray_length, emit_certificate.then_some(certificate.as_path()), output.as_deref())
        }
        Command::Ray { graph, length, emit_path, emit_loop, output } => {
            let m = read_graph(graph)?;
            let ray = build_ray(&m, *length)?;
            let mut written = Value::Null;
            if let (Some(range), Some(out)) = (emit_path, output) {
                let (a, b) = range
                    .split_once(':')
                    .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
                    .ok_or_else(|| anyhow!("--emit-path expects A:B, got `{range}`"))?;
                if a.max(b) >= ray.patches.len() {
                    bail!("ray has only {} patches", ray.patches.len());
                }
                write_json(out, &path_to_json(&ray.path(a, b)?))?;
                written = json!(out.display().to_string());
            }
            if let (Some(i), Some(out)) = (emit_loop, output) {
                let p = ray.patches.get(*i).ok_or_else(|| anyhow!("ray has only {} patches", ray.patches.len()))?;
                let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                let lp = square_loop(p, &mut rng).ok_or_else(|| anyhow!("no loop found at ray index {i}"))?;
                write_json(out, &path_to_json(&lp))?;
                written = json!(out.display().to_string());
            }
            let rows: Vec<Value> = ray
                .patches
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let mv = i.checked_sub(1).map(|j| &ray.moves[j]);
                    json!({
                        "index": i,
                        "id": p.canonical_key().id(),
                        "norm": p.total_length(),
                        "move_vertex": mv.map(|m| m.alpha.vertex),
                        "move_size": mv.map(|m| m.alpha.size()),
                        "move_edge": mv.map(|m| edge_token(m.edge)),
                    })
                })
                .collect();
            ok("ray", json!({ "length": ray.moves.len(), "patches": rows, "written": written }))
        }
        Command::VerifyPresentation { a1, a2 } => {
            let (a1, a2) = (group_arg(a1)?, group_arg(a2)?);
            let r = catalog_report(&a1, &a2)?;
            let row = |r: &presentation::ItemResult, key: &str| {
                json!({ key: r.item, "instances": r.instances, "passed": r.passed, "status": if r.ok() { "PASS" } else { "FAIL" } })
            };
            let body = json!({
                "a1_order": r.a1_order,
                "a2_order": r.a2_order,
                "relations": r.items.iter().map(|i| row(i, "item")).collect::<Vec<_>>(),
                "checks": r.checks.iter().map(|i| row(i, "check")).collect::<Vec<_>>(),
                "negative_control": { "instances": r.negative_control.instances, "rejected": r.negative_control.passed },
                "all_pass": r.all_pass(),
            });
            let mut out = ok("verify-presentation", body)?;
            if !r.all_pass() {
                let mut failures: Vec<&presentation::ItemResult> = r.failures().collect();
                if !r.negative_control.ok() || r.negative_control.instances == 0 {
                    failures.push(&r.negative_control);
                }
                out.witness = Some(json!({ "schema_version": SCHEMA_VERSION, "failures": failures }));
            }
            Ok(out)
        }
    }
}

fn group_arg(s: &str) -> Result<FiniteGroupTable> {
    if let Ok(m) = s.parse::<usize>() {
        return Ok(FiniteGroupTable::cyclic(m)?);
    }
    Ok(parse_group_file(&read(Path::new(s))?)?)
}

fn stargraph(m: &MarkedGraph, dot: bool) -> Result<Output> {
    let star = m.star_graph();
    let mut locals = Vec::new();
    let mut s = String::from("graph star {\n");
    for l in &star.locals {
        let n = l.num_directions();
        let dirs: Vec<String> = (0..n).map(|i| dir_label(m, l.vertex, l.direction(i))).collect();
        let mut edges = Vec::new();
        writeln!(s, "  subgraph cluster_{} {{\n    label=\"vertex {}\";", l.vertex, l.vertex).unwrap();
        for d in &dirs {
            writeln!(s, "    \"{}/{d}\" [label=\"{d}\"];", l.vertex).unwrap();
        }
        s.push_str("  }\n");
        for i in 0..n {
            for j in i..n {
                let k = l.graph.m(i, j);
                if k > 0 {
                    edges.push(json!({ "from": dirs[i], "to": dirs[j], "multiplicity": k }));
                    writeln!(s, "  \"{v}/{}\" -- \"{v}/{}\" [label=\"{k}\"];", dirs[i], dirs[j], v = l.vertex).unwrap();
                }
            }
        }
        locals.push(json!({
            "vertex": l.vertex,
            "order": l.order,
            "directions": dirs,
            "components": l.graph.components(),
            "edges": edges,
        }));
    }
    s.push_str("}\n");
    if dot {
        return Ok(Output { report: Value::Null, raw: Some(s), witness: None });
    }
    let abs: Vec<Value> = (0..m.graph.num_oriented())
        .map(|o| json!({ "edge": edge_token(o), "abs": star.edge_abs(&m.graph, o) }))
        .collect();
    ok(
        "stargraph",
        json!({
            "norm_from_star": star.norm_from_star().to_string(),
            "components": star.component_count(),
            "vertices": m.graph.num_vertices(),
            "edge_abs": abs,
            "locals": locals,
        }),
    )
}

fn moves(m: &MarkedGraph, apply: Option<usize>, output: Option<&Path>) -> Result<Output> {
    let star = m.star_graph();
    let all = all_moves(m, &star);
    let row = |i: usize, mv: &Move, d: i64| {
        json!({
            "index": i,
            "vertex": mv.alpha.vertex,
            "size": mv.alpha.size(),
            "directions": mv.alpha.dirs.iter().map(|&x| dir_label(m, mv.alpha.vertex, x)).collect::<Vec<_>>(),
            "edge": edge_token(mv.edge),
            "norm_change": d,
        })
    };
    let Some(i) = apply else {
        let rows: Vec<Value> = all.iter().enumerate().map(|(i, (mv, d))| row(i, mv, *d)).collect();
        return ok("move", json!({ "norm": m.total_length(), "count": rows.len(), "moves": rows }));
    };
    let (mv, d) = all.get(i).ok_or_else(|| anyhow!("move index {i} out of range ({} moves)", all.len()))?;
    let next = whitehead_move(m, &mv.alpha, mv.edge)?;
    let text = write_marked_graph(&next);
    let mut body = json!({
        "applied": row(i, mv, *d),
        "from_norm": m.total_length(),
        "to_norm": next.total_length(),
        "id": next.canonical_key().id(),
    });
    match output {
        Some(p) => {
            fs::write(p, &text).with_context(|| format!("cannot write {}", p.display()))?;
            body["output"] = json!(p.display().to_string());
        }
        None => body["graph"] = json!(text),
    }
    ok("move", body)
}

fn parse_signature(s: &str) -> Result<(Vec<usize>, usize)> {
    let (orders, k) = s.split_once(':').ok_or_else(|| anyhow!("signature `{s}` should look like `2,2:1`"))?;
    let orders = orders
        .split(',')
        .filter(|x| !x.is_empty())
        .map(|x| x.trim().parse::<usize>().map_err(|_| anyhow!("bad order `{x}` in `{s}`")))
        .collect::<Result<Vec<_>>>()?;
    let k = k.trim().parse().map_err(|_| anyhow!("bad rank in `{s}`"))?;
    Ok((orders, k))
}

fn verify_lemmas(seed: u64, lemma: &str, trials: usize, signatures: &[String]) -> Result<Output> {
    let lemmas: Vec<LemmaId> = if lemma.eq_ignore_ascii_case("all") {
        LemmaId::ALL.to_vec()
    } else {
        let names: Vec<&str> = LemmaId::ALL.iter().map(|l| l.name()).collect();
        vec![LemmaId::parse(lemma).ok_or_else(|| anyhow!("unknown lemma `{lemma}`; known: all, {}", names.join(", ")))?]
    };
    let mut seeds = Vec::new();
    for s in signatures {
        let (orders, k) = parse_signature(s)?;
        let ctx = Context::standard(FactorSignature::cyclic(&orders, k)?)?;
        seeds.push((s.clone(), MarkedGraph::seed(ctx)?));
    }

    // Each trial has its own generator, so results do not depend on --jobs.
    let graph_scans: Vec<Vec<calculus::LemmaScan>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let g = MultiGraph::random(&mut rng, 4 + i % 9, 0.5, 3);
            lemmas.iter().map(|&id| if id.is_graph_lemma() { scan_graph(id, &g) } else { Default::default() }).collect()
        })
        .collect();
    let mut sources = vec![("multigraphs".to_string(), graph_scans)];
    for (j, (name, start)) in seeds.iter().enumerate() {
        let bound = start.total_length() + 30;
        let scans: Vec<Vec<calculus::LemmaScan>> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(((j as u64 + 1) << 32) + i as u64));
                let m = random_patch(start, 1 + i % 6, bound, &mut rng);
                let star = m.star_graph();
                lemmas.iter().map(|&id| scan_patch(id, &m, &star)).collect()
            })
            .collect();
        sources.push((name.clone(), scans));
    }

    let mut rows = Vec::new();
    let mut witnesses = Vec::new();
    for (source, scans) in &sources {
        for (li, id) in lemmas.iter().enumerate() {
            if source == "multigraphs" && !id.is_graph_lemma() {
                continue;
            }
            let (mut instances, mut violations) = (0, 0);
            for (trial, per) in scans.iter().enumerate() {
                instances += per[li].instances;
                violations += per[li].violations.len();
                for w in &per[li].violations {
                    witnesses.push(json!({ "lemma": id.name(), "source": source, "trial": trial, "witness": w }));
                }
            }
            let verdict = match (violations, instances) {
                (0, 0) => "NO_INSTANCES",
                (0, _) => "HOLDS",
                _ => "VIOLATION",
            };
            rows.push(json!({
                "lemma": id.name(),
                "source": source,
                "instances": instances,
                "violations": violations,
                "verdict": verdict,
            }));
        }
    }
    let mut out = ok("verify-lemmas", json!({ "seed": seed, "trials": trials, "results": rows }))?;
    if !witnesses.is_empty() {
        out.witness = Some(json!({ "schema_version": SCHEMA_VERSION, "seed": seed, "violations": witnesses }));
    }
    Ok(out)
}

fn push(
    path: &connectivity::StandardPath,
    k: u64,
    extra: Value,
    certificate: Option<&Path>,
    output: Option<&Path>,
) -> Result<Output> {
    let (pushed, cert, report) = push_outside_ball(path, k)?;
    let sig = path.first().sig().clone();
    let mut checker = Checker::new(sig.factors());
    let cert_json = cert.to_json();
    if let Some(p) = certificate {
        write_json(p, &cert_json)?;
    }
    if let Some(p) = output {
        write_json(p, &path_to_json(&pushed))?;
    }
    let replay = checker.replay(&cert, &pushed, None);
    let lowest = pushed.vertices.iter().map(|x| checker.min_norm(x)).min().unwrap_or(0);
    let mut body = json!({
        "radius": k,
        "input_length": path.len(),
        "input_min_norm": path.vertices.iter().map(|x| checker.min_norm(x)).min(),
        "pushed_length": pushed.len(),
        "pushed_min_norm": lowest,
        "thresholds": report.thresholds,
        "eliminations": report.eliminations.len(),
        "certificate_steps": cert.steps.len(),
        "certificate": certificate.map(|p| p.display().to_string()),
        "output": output.map(|p| p.display().to_string()),
        "generated": extra,
    });
    let failure = match &replay {
        Err(e) => Some(format!("certificate rejected: {e}")),
        Ok(_) if lowest as u64 <= k => Some(format!("pushed path meets the ball: norm {lowest} <= {k}")),
        Ok(_) => None,
    };
    body["replay"] = match &replay {
        Ok(r) => json!({ "ok": true, "steps": r.steps, "min_norm_seen": r.min_norm_seen }),
        Err(e) => json!({ "ok": false, "error": e }),
    };
    let mut out = ok("push", body)?;
    if let Some(f) = failure {
        out.witness = Some(json!({ "schema_version": SCHEMA_VERSION, "failure": f, "input": path_to_json(path), "certificate": cert_json }));
    }
    Ok(out)
}

fn push_loop_cmd(
    lp: &connectivity::StandardPath,
    start: &MarkedGraph,
    k: u64,
    n: u64,
    ray_length: usize,
    certificate: Option<&Path>,
    output: Option<&Path>,
) -> Result<Output> {
    let sig = start.sig().clone();
    let mut checker = Checker::new(sig.factors());
    let loop_min = lp.vertices.iter().map(|x| checker.min_norm(x)).min().unwrap_or(0);
    if loop_min as u64 <= k {
        bail!("the loop meets the ball of radius {k} (a vertex has norm {loop_min})");
    }
    let ray = build_ray(start, ray_length)?;
    let r = push_loop(lp, n, &ray)?;
    let cert_json = r.certificate.to_json();
    if let Some(p) = certificate {
        write_json(p, &cert_json)?;
    }
    if let Some(p) = output {
        write_json(p, &path_to_json(&r.pushed))?;
    }
    let replay = checker.replay(&r.certificate, &r.pushed, Some(k as usize));
    let lowest = r.pushed.vertices.iter().map(|x| checker.min_norm(x)).min().unwrap_or(0);
    let norms = ray.norms();
    let mut body = json!({
        "k": k,
        "n": n,
        "loop_length": lp.len(),
        "loop_min_norm": loop_min,
        "base": r.base,
        "new_base": r.new_base,
        "new_base_norm": norms[r.new_base],
        "pushed_length": r.pushed.len(),
        "pushed_min_norm": lowest,
        "eliminations": r.report.eliminations.len(),
        "certificate_steps": r.certificate.steps.len(),
        "certificate": certificate.map(|p| p.display().to_string()),
        "output": output.map(|p| p.display().to_string()),
    });
    let failure = match &replay {
        Err(e) => Some(format!("certificate rejected: {e}")),
        Ok(_) if lowest as u64 <= n => Some(format!("pushed loop meets the ball: norm {lowest} <= {n}")),
        Ok(_) => None,
    };
    body["replay"] = match &replay {
        Ok(x) => json!({ "ok": true, "steps": x.steps, "min_norm_seen": x.min_norm_seen }),
        Err(e) => json!({ "ok": false, "error": e }),
    };
    let mut out = ok("push-loop", body)?;
    if let Some(f) = failure {
        out.witness = Some(json!({ "schema_version": SCHEMA_VERSION, "failure": f, "loop": path_to_json(lp), "certificate": cert_json }));
    }
    Ok(out)
}
