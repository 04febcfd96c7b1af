//! Text formats for group tables, signatures and marked graphs.
//!
//! ```text
//! group A1 cyclic 2
//! group A2 table 3 / 0 1 2 / 1 2 0 / 2 0 1
//! signature factors A1 A2 rank 1
//! word w1 A1:1 s1        # optional; the standard W is used when absent
//! vertex 0 A1
//! vertex 1 A2
//! edge 0 0 1
//! edge 1 0 0
//! base 0
//! loop w1 base 0 : A1:1 e1 1
//! ```
//!
//! A loop line lists `g0 e1 g1 ... em gm` with `e<id>` or `e<id>^-1` for
//! oriented edges and `1` or `<factor>:<index>` for vertex-group elements.
//! An elliptic loop is a single element token. A file that says `seed`
//! instead of listing a graph stands for the rose-and-star marked graph.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{build_standard_w, AlgebraError, FactorSignature, FiniteGroupTable, Letter, Word};
use crate::gog::{close_path, EdgePath, GogError, GraphOfGroups, LoopRep, Step, VertexGroup};
use crate::connectivity::StandardPath;
use crate::spine::{Context, MarkedGraph, MarkedGraphData, SpineError};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Gog(#[from] GogError),
    #[error(transparent)]
    Spine(#[from] SpineError),
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, msg: msg.into() }
}

fn num(line: usize, tok: Option<&str>, what: &str) -> Result<usize, ParseError> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| syntax(line, format!("bad {what} `{tok}`")))
}

/// Parses a `group` line (the leading keyword already consumed).
fn parse_group(line: usize, rest: &str) -> Result<(String, FiniteGroupTable), ParseError> {
    let mut it = rest.split_whitespace();
    let name = it.next().ok_or_else(|| syntax(line, "missing group name"))?.to_string();
    match it.next() {
        Some("cyclic") => Ok((name, FiniteGroupTable::cyclic(num(line, it.next(), "order")?)?)),
        Some("dihedral") => Ok((name, FiniteGroupTable::dihedral(num(line, it.next(), "degree")?)?)),
        Some("table") => {
            let m = num(line, it.next(), "order")?;
            let body: Vec<&str> = it.collect();
            let rows: Vec<Vec<usize>> = body
                .join(" ")
                .split('/')
                .map(str::trim)
                .filter(|r| !r.is_empty())
                .map(|r| {
                    r.split_whitespace()
                        .map(|x| x.parse().map_err(|_| syntax(line, format!("bad table entry `{x}`"))))
                        .collect()
                })
                .collect::<Result<_, _>>()?;
            if rows.len() != m {
                return Err(syntax(line, format!("expected {m} rows, found {}", rows.len())));
            }
            Ok((name, FiniteGroupTable::from_rows(rows)?))
        }
        other => Err(syntax(line, format!("unknown group kind {other:?}"))),
    }
}

/// Joins `/`-continuation lines onto the previous line and strips comments.
fn logical_lines(text: &str) -> Vec<(usize, String)> {
    let mut out: Vec<(usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        match out.last_mut() {
            Some(prev) if l.starts_with('/') => {
                prev.1.push(' ');
                prev.1.push_str(l);
            }
            _ => out.push((i + 1, l.to_string())),
        }
    }
    out
}

/// Reads a file holding one `group` line.
pub fn parse_group_file(text: &str) -> Result<FiniteGroupTable, ParseError> {
    if let Some((line, l)) = logical_lines(text).into_iter().next() {
        if let Some(rest) = l.strip_prefix("group ") {
            return Ok(parse_group(line, rest)?.1);
        }
        return Err(syntax(line, "expected a `group` line"));
    }
    Err(syntax(0, "no group found"))
}

fn parse_letter(sig: &FactorSignature, line: usize, tok: &str) -> Result<Letter, ParseError> {
    if let Some((name, e)) = tok.split_once(':') {
        let f = sig.factor_index(name).ok_or_else(|| syntax(line, format!("unknown factor `{name}`")))?;
        let e: usize = e.parse().map_err(|_| syntax(line, format!("bad element in `{tok}`")))?;
        let l = Letter::factor(f, e);
        l.validate(sig)?;
        return Ok(l);
    }
    let l = Letter::parse(tok)?;
    l.validate(sig)?;
    Ok(l)
}

pub fn parse_word(sig: &FactorSignature, line: usize, tokens: &[&str]) -> Result<Word, ParseError> {
    let letters = tokens
        .iter()
        .filter(|t| **t != "1")
        .map(|t| parse_letter(sig, line, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Word::from_letters(sig, &letters))
}

fn word_text(sig: &FactorSignature, w: &Word) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.letters()
        .iter()
        .map(|l| match *l {
            Letter::Factor { factor, elem } => format!("{}:{elem}", sig.name(factor)),
            other => other.to_string(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn elem_token(sig: &FactorSignature, g: &GraphOfGroups, v: usize, x: usize) -> String {
    match g.vertices[v] {
        _ if x == 0 => "1".into(),
        VertexGroup::Factor(i) => format!("{}:{x}", sig.name(i)),
        VertexGroup::Trivial => unreachable!("trivial vertex with a nontrivial element"),
    }
}

/// Parses a marked-graph file.
pub fn parse_marked_graph(text: &str) -> Result<MarkedGraph, ParseError> {
    let lines = logical_lines(text);
    let mut groups: Vec<(String, FiniteGroupTable)> = Vec::new();
    let mut sig: Option<FactorSignature> = None;
    let mut words: Vec<(String, Word)> = Vec::new();
    let mut vertices: Vec<(usize, String)> = Vec::new();
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    let mut loops: Vec<(usize, String, usize, Vec<String>)> = Vec::new();
    let mut seed = false;
    for (line, l) in &lines {
        let line = *line;
        let mut it = l.split_whitespace();
        let kw = it.next().unwrap();
        match kw {
            "group" => groups.push(parse_group(line, l["group".len()..].trim())?),
            "signature" => {
                if it.next() != Some("factors") {
                    return Err(syntax(line, "expected `signature factors <name>... rank <k>`"));
                }
                let toks: Vec<&str> = it.collect();
                let r = toks.iter().position(|t| *t == "rank").ok_or_else(|| syntax(line, "missing `rank`"))?;
                let k = num(line, toks.get(r + 1).copied(), "rank")?;
                let mut tables = Vec::new();
                let mut names = Vec::new();
                for name in &toks[..r] {
                    let t = groups
                        .iter()
                        .find(|(n, _)| n == name)
                        .ok_or_else(|| syntax(line, format!("no group named `{name}`")))?;
                    tables.push(t.1.clone());
                    names.push(name.to_string());
                }
                sig = Some(FactorSignature::with_names(tables, names, k)?);
            }
            "word" => {
                let s = sig.as_ref().ok_or_else(|| syntax(line, "`word` before `signature`"))?;
                let name = it.next().ok_or_else(|| syntax(line, "missing word name"))?;
                let toks: Vec<&str> = it.collect();
                words.push((name.to_string(), parse_word(s, line, &toks)?));
            }
            "vertex" => {
                let id = num(line, it.next(), "vertex id")?;
                let g = it.next().ok_or_else(|| syntax(line, "missing vertex group"))?;
                vertices.push((id, g.to_string()));
            }
            "edge" => {
                let id = num(line, it.next(), "edge id")?;
                edges.push((id, num(line, it.next(), "origin")?, num(line, it.next(), "terminus")?));
            }
            "base" => {
                num(line, it.next(), "base vertex")?;
            }
            "loop" => {
                let name = it.next().ok_or_else(|| syntax(line, "missing loop name"))?.to_string();
                if it.next() != Some("base") {
                    return Err(syntax(line, "expected `loop <name> base <v> : ...`"));
                }
                let v = num(line, it.next(), "base vertex")?;
                if it.next() != Some(":") {
                    return Err(syntax(line, "expected `:`"));
                }
                loops.push((line, name, v, it.map(str::to_string).collect()));
            }
            "seed" => seed = true,
            other => return Err(syntax(line, format!("unknown keyword `{other}`"))),
        }
    }
    let sig = sig.ok_or_else(|| syntax(0, "missing `signature` line"))?;
    let names: Vec<String>;
    let ctx = if words.is_empty() {
        let w = build_standard_w(&sig)?;
        names = (1..=w.len()).map(|i| format!("w{i}")).collect();
        Arc::new(Context { sig: sig.clone(), words: w })
    } else {
        names = words.iter().map(|(n, _)| n.clone()).collect();
        Context::custom(sig.clone(), words.into_iter().map(|(_, w)| w).collect())
    };
    if seed {
        if !vertices.is_empty() || !loops.is_empty() {
            return Err(syntax(0, "`seed` cannot be combined with an explicit graph"));
        }
        return Ok(MarkedGraph::seed(ctx)?);
    }

    vertices.sort();
    if vertices.iter().enumerate().any(|(i, (id, _))| *id != i) {
        return Err(syntax(0, "vertex ids must be 0..n without gaps"));
    }
    let vgroups = vertices
        .iter()
        .map(|(_, g)| match g.as_str() {
            "trivial" => Ok(VertexGroup::Trivial),
            name => sig
                .factor_index(name)
                .map(VertexGroup::Factor)
                .ok_or_else(|| syntax(0, format!("unknown vertex group `{name}`"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    edges.sort();
    if edges.iter().enumerate().any(|(i, e)| e.0 != i) {
        return Err(syntax(0, "edge ids must be 0..m without gaps"));
    }
    let graph = GraphOfGroups::new(vgroups, edges.iter().map(|e| (e.1, e.2)).collect())?;

    let mut by_name: HashMap<String, LoopRep> = HashMap::new();
    for (line, name, v, toks) in loops {
        if v >= graph.num_vertices() {
            return Err(syntax(line, format!("no vertex {v}")));
        }
        let elem = |tok: &str, at: usize| -> Result<usize, ParseError> {
            if tok == "1" {
                return Ok(0);
            }
            let Letter::Factor { factor, elem } = parse_letter(&sig, line, tok)? else {
                return Err(syntax(line, format!("expected a group element, found `{tok}`")));
            };
            if graph.vertices[at] != VertexGroup::Factor(factor) {
                return Err(syntax(line, format!("`{tok}` is not in the group at vertex {at}")));
            }
            Ok(elem)
        };
        if toks.is_empty() || toks.len() % 2 == 0 {
            return Err(syntax(line, "a loop alternates elements and edges, starting and ending with an element"));
        }
        let g0 = elem(&toks[0], v)?;
        let mut at = v;
        let mut steps = Vec::new();
        for pair in toks[1..].chunks(2) {
            let (e, inv) = match pair[0].strip_suffix("^-1") {
                Some(e) => (e, true),
                None => (pair[0].as_str(), false),
            };
            let id: usize = e
                .strip_prefix('e')
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| syntax(line, format!("bad edge token `{}`", pair[0])))?;
            if id >= graph.num_edges() {
                return Err(syntax(line, format!("no edge {id}")));
            }
            let o = 2 * id + usize::from(inv);
            if graph.origin(o) != at {
                return Err(syntax(line, format!("edge token `{}` does not start at vertex {at}", pair[0])));
            }
            at = graph.terminus(o);
            steps.push(Step::new(o, elem(&pair[1], at)?));
        }
        if at != v {
            return Err(syntax(line, "loop does not close up"));
        }
        let l = close_path(&sig, &graph, &EdgePath { base: v, g0, steps })?;
        if by_name.insert(name.clone(), l).is_some() {
            return Err(syntax(line, format!("loop `{name}` given twice")));
        }
    }
    let ordered = names
        .iter()
        .map(|n| by_name.remove(n).ok_or_else(|| syntax(0, format!("no loop for word `{n}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(extra) = by_name.keys().next() {
        return Err(syntax(0, format!("loop `{extra}` names no word")));
    }
    Ok(MarkedGraph::from_parts(ctx, graph, ordered)?)
}

fn write_group(out: &mut String, name: &str, t: &FiniteGroupTable) {
    let cyclic = FiniteGroupTable::cyclic(t.order()).ok();
    if cyclic.as_ref() == Some(t) {
        writeln!(out, "group {name} cyclic {}", t.order()).unwrap();
    } else {
        let rows: Vec<String> = t
            .rows()
            .iter()
            .map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "))
            .collect();
        writeln!(out, "group {name} table {} / {}", t.order(), rows.join(" / ")).unwrap();
    }
}

pub fn write_signature(out: &mut String, sig: &FactorSignature) {
    for i in 0..sig.n() {
        write_group(out, sig.name(i), sig.factor(i));
    }
    writeln!(out, "signature factors {} rank {}", sig.names().join(" "), sig.k()).unwrap();
}

/// Serializes a marked graph; `parse_marked_graph` reads it back.
pub fn write_marked_graph(m: &MarkedGraph) -> String {
    let sig = m.sig();
    let g = &m.graph;
    let mut out = String::new();
    write_signature(&mut out, sig);
    for (i, w) in m.ctx().words.iter().enumerate() {
        writeln!(out, "word w{} {}", i + 1, word_text(sig, w)).unwrap();
    }
    for (v, vg) in g.vertices.iter().enumerate() {
        match vg {
            VertexGroup::Trivial => writeln!(out, "vertex {v} trivial").unwrap(),
            VertexGroup::Factor(i) => writeln!(out, "vertex {v} {}", sig.name(*i)).unwrap(),
        }
    }
    for (e, (a, b)) in g.edges.iter().enumerate() {
        writeln!(out, "edge {e} {a} {b}").unwrap();
    }
    writeln!(out, "base 0").unwrap();
    for (i, l) in m.loops.iter().enumerate() {
        match l {
            LoopRep::Elliptic { vertex, elem } => {
                writeln!(out, "loop w{} base {vertex} : {}", i + 1, elem_token(sig, g, *vertex, *elem)).unwrap();
            }
            LoopRep::Cycle(steps) => {
                let base = g.origin(steps[0].edge);
                let mut toks = vec!["1".to_string()];
                for s in steps {
                    let id = s.edge / 2;
                    toks.push(if s.edge % 2 == 0 { format!("e{id}") } else { format!("e{id}^-1") });
                    toks.push(elem_token(sig, g, g.terminus(s.edge), s.elem));
                }
                writeln!(out, "loop w{} base {base} : {}", i + 1, toks.join(" ")).unwrap();
            }
        }
    }
    out
}

/// Writes the group, signature and word lines shared by every marked graph
/// in `ctx`.
pub fn write_context(ctx: &Context) -> String {
    let mut out = String::new();
    write_signature(&mut out, &ctx.sig);
    for (i, w) in ctx.words.iter().enumerate() {
        writeln!(out, "word w{} {}", i + 1, word_text(&ctx.sig, w)).unwrap();
    }
    out
}

pub fn parse_context(text: &str) -> Result<Arc<Context>, ParseError> {
    Ok(parse_marked_graph(&format!("{text}\nseed\n"))?.ctx().clone())
}

/// JSON form of a standard path: a context header, the vertex sequence by
/// canonical id, and a table from id to graph data.
pub fn path_to_json(p: &StandardPath) -> serde_json::Value {
    let mut table = serde_json::Map::new();
    let ids: Vec<String> = p
        .vertices
        .iter()
        .map(|m| {
            let k = m.canonical_key().id();
            table.entry(k.clone()).or_insert_with(|| serde_json::to_value(m.data()).expect("serializable"));
            k
        })
        .collect();
    let ctx = p.vertices.first().map(|m| write_context(m.ctx())).unwrap_or_default();
    serde_json::json!({ "context": ctx, "vertices": ids, "table": table })
}

pub fn path_from_json(v: &serde_json::Value) -> Result<StandardPath, ParseError> {
    let bad = |msg: &str| syntax(0, msg.to_string());
    let ctx = parse_context(v["context"].as_str().ok_or_else(|| bad("missing `context`"))?)?;
    let table = v["table"].as_object().ok_or_else(|| bad("missing `table`"))?;
    let mut built: HashMap<&str, MarkedGraph> = HashMap::new();
    for (id, d) in table {
        let data: MarkedGraphData =
            serde_json::from_value(d.clone()).map_err(|e| syntax(0, format!("vertex {id}: {e}")))?;
        built.insert(id, MarkedGraph::from_data(ctx.clone(), &data)?);
    }
    let vertices = v["vertices"]
        .as_array()
        .ok_or_else(|| bad("missing `vertices`"))?
        .iter()
        .map(|x| {
            let id = x.as_str().ok_or_else(|| bad("vertex ids are strings"))?;
            built.get(id).cloned().ok_or_else(|| syntax(0, format!("no table entry for {id}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if vertices.is_empty() {
        return Err(bad("empty path"));
    }
    let p = StandardPath { vertices };
    p.validate().map_err(|e| syntax(0, e.to_string()))?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::sample::random_patch;

    #[test]
    fn round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (orders, k) in [(vec![2, 2], 1), (vec![3, 2], 2), (vec![2, 2, 2, 2], 0)] {
            let ctx = Context::standard(FactorSignature::cyclic(&orders, k).unwrap()).unwrap();
            let seed = MarkedGraph::seed(ctx).unwrap();
            for _ in 0..10 {
                let m = random_patch(&seed, 3, 200, &mut rng);
                let text = write_marked_graph(&m);
                let back = parse_marked_graph(&text).unwrap();
                assert_eq!(back.canonical_key(), m.canonical_key(), "{text}");
                assert_eq!(back.norm().unwrap(), m.norm().unwrap());
                assert_eq!(write_marked_graph(&back), text);
            }
        }
    }

    #[test]
    fn hand_written_patch() {
        let text = "group A1 cyclic 2\ngroup A2 cyclic 2\nsignature factors A1 A2 rank 1\n\
                    vertex 0 A1\nvertex 1 A2\nedge 0 0 1\nedge 1 0 0\nbase 0\n\
                    loop w1 base 1 : A2:1 e0^-1 A1:1 e0 1\nloop w2 base 0 : 1 e1 1\nloop w3 base 0 : A1:1 e1 1\n\
                    loop w4 base 0 : 1 e1 A1:1\nloop w5 base 0 : 1 e1 1 e0 A2:1 e0^-1 1\nloop w6 base 0 : 1 e0 A2:1 e0^-1 1 e1 1\n";
        let m = parse_marked_graph(text).unwrap();
        assert_eq!(m.norm().unwrap(), 11);
        let seed = parse_marked_graph("group A1 cyclic 2\ngroup A2 cyclic 2\nsignature factors A1 A2 rank 1\nseed\n").unwrap();
        assert_eq!(seed.canonical_key(), m.canonical_key());
    }

    #[test]
    fn tables_and_errors() {
        let t = parse_group_file("group S table 3 / 0 1 2 / 1 2 0\n / 2 0 1\n").unwrap();
        assert_eq!(t, FiniteGroupTable::cyclic(3).unwrap());
        assert!(parse_group_file("group S table 2 / 0 1 / 1 1\n").is_err());
        let bad = "group A1 cyclic 2\nsignature factors A1 rank 2\nvertex 0 A1\nedge 0 0 0\nedge 1 0 0\nloop w1 base 0 : 1 e3 1\n";
        let err = parse_marked_graph(bad).unwrap_err().to_string();
        assert!(err.contains("line 6"), "{err}");
        assert!(parse_marked_graph("vertex 0 A1\n").is_err());
        assert!(parse_marked_graph("group A1 cyclic 2\nsignature factors A1 rank 2\nfrobnicate\n").is_err());
    }

    #[test]
    fn path_json_round_trip() {
        let ctx = Context::standard(FactorSignature::cyclic(&[2, 3, 2], 0).unwrap()).unwrap();
        let seed = MarkedGraph::seed(ctx).unwrap();
        let ray = crate::connectivity::build_ray(&seed, 3).unwrap();
        let p = ray.path(3, 0).unwrap();
        let json = path_to_json(&p);
        let back = path_from_json(&serde_json::from_str(&json.to_string()).unwrap()).unwrap();
        assert_eq!(back.ids(), p.ids());
        assert_eq!(path_to_json(&back), json);
        let mut broken = json.clone();
        broken["vertices"].as_array_mut().unwrap().pop();
        assert!(path_from_json(&broken).is_err());
    }
}
