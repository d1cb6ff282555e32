//! Text formats for signatures, diagrams, models and terms, and DOT output.
//!
//! All formats are line oriented and whitespace separated; `#` starts a
//! comment. A word is a list of object names, or `1` for the empty word.
//!
//! ```text
//! # signature
//! object A
//! gen f : A -> A A
//!
//! # diagram
//! use fgh.sig
//! node x f
//! node n id@A A
//! edge e1 x n
//! ord e1 < e2
//!
//! # model
//! dim A 2
//! mat f 1,0; 0,1; 1/2,-1; 0,3;
//! ```

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use num_rational::BigRational;
use thiserror::Error;

use crate::diagram::{is_name, Diagram, DiagramError};
use crate::layering::{segmentation, LayerError};
use crate::readout::LayeredTerm;
use crate::semantics::{MatrixModel, RationalMatrix};
use crate::signature::{Factor, ObjectWord, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

fn err<T>(line: usize, reason: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        reason: reason.into(),
    })
}

/// Non-blank lines with comments stripped, numbered from 1.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = l.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn word(toks: &[&str]) -> ObjectWord {
    match toks {
        ["1"] => ObjectWord::unit(),
        _ => ObjectWord::new(toks.iter().copied()),
    }
}

pub fn parse_signature(text: &str) -> Result<Signature, ParseError> {
    let mut sig = Signature::new();
    for (n, toks) in lines(text) {
        match toks.as_slice() {
            ["object", name] => sig.add_object(name),
            ["object", ..] => return err(n, "expected `object <Name>`"),
            ["gen", name, ":", rest @ ..] => {
                let Some(arrow) = rest.iter().position(|t| *t == "->") else {
                    return err(n, "expected `->` in generator declaration");
                };
                let (dom, cod) = (&rest[..arrow], &rest[arrow + 1..]);
                if dom.is_empty() || cod.is_empty() {
                    return err(n, "empty word; write `1` for the unit");
                }
                sig.add_gen(name, word(dom), word(cod))
            }
            ["gen", ..] => return err(n, "expected `gen <name> : <word> -> <word>`"),
            [other, ..] => return err(n, format!("unknown directive `{other}`")),
            [] => unreachable!(),
        }
        .or_else(|e| err(n, e.to_string()))?;
    }
    Ok(sig)
}

pub fn print_signature(sig: &Signature) -> String {
    let mut out = String::new();
    for o in sig.objects() {
        let _ = writeln!(out, "object {o}");
    }
    for g in sig.gens() {
        let _ = writeln!(out, "gen {} : {} -> {}", g.name, g.dom, g.cod);
    }
    out
}

fn fail(line: usize, reason: impl Into<String>) -> LoadError {
    LoadError::Parse(ParseError {
        line,
        reason: reason.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    /// The file parsed but its horizontal order cannot be closed.
    #[error(transparent)]
    Closure(DiagramError),
}

/// Parses a diagram. `load` resolves the path of the `use` line to a
/// signature. Unless `raw` is set, the horizontal order is closed under
/// conditional construction; diagrams with a vertical cycle are returned
/// unclosed so that validation can report the cycle.
pub fn parse_diagram(
    text: &str,
    mut load: impl FnMut(&str) -> Result<Arc<Signature>, String>,
    raw: bool,
) -> Result<Diagram, LoadError> {
    let mut builder = None;
    let mut nodes = HashSet::new();
    let mut edges = HashSet::new();
    let mut ends = HashSet::new();
    let mut last = 0;
    for (n, toks) in lines(text) {
        last = n;
        if let ["use", path] = toks.as_slice() {
            if builder.is_some() {
                return Err(fail(n, "`use` must appear once, before declarations"));
            }
            let sig = load(path).or_else(|e| err(n, format!("cannot load `{path}`: {e}")))?;
            builder = Some((Diagram::builder(sig.clone()), sig));
            continue;
        }
        let Some((b, sig)) = builder.take() else {
            return Err(fail(n, "expected `use <signature path>` first"));
        };
        let b = match toks.as_slice() {
            ["node", id, label @ ..] if !label.is_empty() => {
                if !is_name(id) {
                    return Err(fail(n, format!("bad node id `{id}`")));
                }
                let factor = match label {
                    [single] if !single.starts_with("id@") => Factor::gen(*single),
                    [first, rest @ ..] if first.starts_with("id@") => {
                        let mut toks = vec![&first[3..]];
                        toks.extend(rest.iter().copied());
                        toks.retain(|t| !t.is_empty());
                        if toks.is_empty() {
                            return Err(fail(n, "empty word; write `id@1` for the unit"));
                        }
                        Factor::IdOn(word(&toks))
                    }
                    _ => {
                        return Err(fail(
                            n,
                            "expected `node <id> <gen>` or `node <id> id@<word>`",
                        ))
                    }
                };
                sig.check_factor(&factor)
                    .or_else(|e| err(n, e.to_string()))?;
                if !nodes.insert(id.to_string()) {
                    return Err(fail(n, format!("duplicate node `{id}`")));
                }
                b.node(*id, factor)
            }
            ["edge", id, src, dst] => {
                if !is_name(id) {
                    return Err(fail(n, format!("bad edge id `{id}`")));
                }
                for v in [src, dst] {
                    if !nodes.contains(*v) {
                        return Err(fail(n, format!("undeclared node `{v}`")));
                    }
                }
                if !edges.insert(id.to_string()) {
                    return Err(fail(n, format!("duplicate edge `{id}`")));
                }
                if !ends.insert((src.to_string(), dst.to_string())) {
                    return Err(fail(n, format!("second edge from `{src}` to `{dst}`")));
                }
                b.edge(*id, *src, *dst)
            }
            ["ord", lo, "<", hi] => {
                for e in [lo, hi] {
                    if !edges.contains(*e) {
                        return Err(fail(n, format!("undeclared edge `{e}`")));
                    }
                }
                b.order(*lo, *hi)
            }
            [other, ..] => {
                let hint = match *other {
                    "node" => "expected `node <id> <gen>` or `node <id> id@<word>`",
                    "edge" => "expected `edge <eid> <src> <dst>`",
                    "ord" => "expected `ord <eid> < <eid>`",
                    _ => "",
                };
                if hint.is_empty() {
                    return Err(fail(n, format!("unknown directive `{other}`")));
                }
                return Err(fail(n, hint));
            }
            [] => unreachable!(),
        };
        builder = Some((b, sig));
    }
    let Some((b, _)) = builder else {
        return Err(fail(last.max(1), "missing `use <signature path>`"));
    };
    let d = b.build_raw().or_else(|e| err(last, e.to_string()))?;
    if raw || !d.is_acyclic() {
        return Ok(d);
    }
    d.cc_closure().map_err(LoadError::Closure)
}

fn factor_tokens(f: &Factor) -> String {
    match f {
        Factor::Gen(g) => g.clone(),
        Factor::IdOn(w) => format!("id@{w}"),
    }
}

/// Prints a diagram; `ord` lines list the covering pairs of the order.
pub fn print_diagram(d: &Diagram, sig_path: &str) -> String {
    let mut out = format!("use {sig_path}\n");
    for (id, label) in d.nodes() {
        let _ = writeln!(out, "node {id} {}", factor_tokens(label));
    }
    for e in d.edges() {
        let _ = writeln!(out, "edge {} {} {}", e.id, e.src, e.dst);
    }
    for (lo, hi) in d.order_generators() {
        let _ = writeln!(out, "ord {lo} < {hi}");
    }
    out
}

pub fn parse_model(text: &str) -> Result<MatrixModel, ParseError> {
    let mut model = MatrixModel::new();
    for (n, toks) in lines(text) {
        match toks.as_slice() {
            ["dim", obj, d] => {
                let d: usize = d
                    .parse()
                    .or_else(|_| err(n, format!("bad dimension `{d}`")))?;
                model.set_dim(obj, d).or_else(|e| err(n, e.to_string()))?;
            }
            ["mat", gen, rest @ ..] if !rest.is_empty() => {
                let body = rest.join(" ");
                let mut rows: Vec<Vec<BigRational>> = Vec::new();
                for row in body.split(';').map(str::trim).filter(|r| !r.is_empty()) {
                    let entries = row
                        .split(',')
                        .map(|x| {
                            x.trim()
                                .parse::<BigRational>()
                                .or_else(|_| err(n, format!("bad entry `{}`", x.trim())))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    rows.push(entries);
                }
                let cols = rows.first().map_or(0, Vec::len);
                if rows.is_empty() || rows.iter().any(|r| r.len() != cols) {
                    return err(n, "rows must be nonempty and of equal length");
                }
                let m = RationalMatrix::new(rows.len(), cols, rows.concat())
                    .or_else(|e| err(n, e.to_string()))?;
                model.set_mat(gen, m);
            }
            ["dim", ..] => return err(n, "expected `dim <Object> <n>`"),
            ["mat", ..] => return err(n, "expected `mat <gen> <row>; <row>; ...`"),
            [other, ..] => return err(n, format!("unknown directive `{other}`")),
            [] => unreachable!(),
        }
    }
    Ok(model)
}

pub fn print_model(m: &MatrixModel) -> String {
    let mut out = String::new();
    for (o, d) in m.dims() {
        let _ = writeln!(out, "dim {o} {d}");
    }
    for (g, mat) in m.mats() {
        let _ = writeln!(out, "mat {g} {mat}");
    }
    out
}

/// Tab-separated records: `dom`, one `layer` per layer, `cod`, one token
/// per object or factor.
pub fn term_porcelain(t: &LayeredTerm) -> String {
    let mut out = String::new();
    let words = |w: &ObjectWord| {
        w.factors()
            .iter()
            .map(|o| format!("\t{o}"))
            .collect::<String>()
    };
    let _ = writeln!(out, "dom{}", words(t.dom()));
    for (k, layer) in t.layers().iter().enumerate() {
        let _ = write!(out, "layer\t{}", k + 1);
        for f in layer {
            let _ = write!(out, "\t{f}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "cod{}", words(t.cod()));
    out
}

struct Quoted<'a>(&'a str);

impl fmt::Display for Quoted<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "\"{}\"",
            self.0.replace('\\', "\\\\").replace('"', "\\\"")
        )
    }
}

/// DOT digraph: one same-rank group per layer, drawn bottom to top, with
/// invisible edges fixing the left-to-right order inside each layer.
pub fn render_dot(d: &Diagram) -> Result<String, LayerError> {
    let seg = segmentation(d)?;
    let mut out = String::from("digraph diagram {\n  rankdir=BT;\n  node [shape=box];\n");
    for (k, layer) in seg.layers().iter().enumerate() {
        let _ = writeln!(out, "  subgraph layer{} {{\n    rank=same;", k + 1);
        for v in layer {
            let label = d.label(v).expect("node of this diagram").to_string();
            let _ = writeln!(
                out,
                "    {} [label={}];",
                Quoted(v.as_str()),
                Quoted(&label)
            );
        }
        for pair in layer.windows(2) {
            let _ = writeln!(
                out,
                "    {} -> {} [style=invis];",
                Quoted(pair[0].as_str()),
                Quoted(pair[1].as_str())
            );
        }
        out.push_str("  }\n");
    }
    for e in d.edges() {
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            Quoted(e.src.as_str()),
            Quoted(e.dst.as_str()),
            Quoted(e.id.as_str())
        );
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iso::diagram_iso;

    const SIG: &str = "\
# objects
object A
object B
gen f : A -> A A
gen g : A -> B
gen h : A -> B
gen u : B -> 1
";

    const FGH: &str = "\
use fgh.sig
node x f
node y g
node z h   # right branch
edge e1 x y
edge e2 x z
ord e1 < e2
";

    fn load(sig: &Arc<Signature>) -> impl FnMut(&str) -> Result<Arc<Signature>, String> + '_ {
        move |_| Ok(sig.clone())
    }

    fn sig() -> Arc<Signature> {
        Arc::new(parse_signature(SIG).unwrap())
    }

    #[test]
    fn signature_round_trip() {
        let s = parse_signature(SIG).unwrap();
        assert_eq!(s.gen("u").unwrap().cod, ObjectWord::unit());
        assert_eq!(parse_signature(&print_signature(&s)).unwrap(), s);
    }

    #[test]
    fn signature_errors_have_lines() {
        let e = parse_signature("object A\ngen f : A -> C\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.reason.contains("unknown object"));
        let e = parse_signature("object A\n\nfoo\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(parse_signature("gen f : A A\n").is_err());
    }

    #[test]
    fn fgh_file() {
        let s = sig();
        let d = parse_diagram(FGH, load(&s), false).unwrap();
        assert_eq!((d.node_count(), d.edge_count()), (3, 2));
        assert_eq!(d.order_generators().len(), 1);
        let printed = print_diagram(&d, "fgh.sig");
        let back = parse_diagram(&printed, load(&s), false).unwrap();
        let m = diagram_iso(&d, &back).unwrap().unwrap();
        assert!(m.iter().all(|(a, b)| a == b));
        assert_eq!(back, d);
    }

    #[test]
    fn identity_nodes() {
        let s = sig();
        let text = "use s\nnode a id@A B\nnode b id@1\nedge e a b\n";
        let d = parse_diagram(text, load(&s), false).unwrap();
        assert_eq!(
            d.label(&"a".into()),
            Some(&Factor::IdOn(ObjectWord::new(["A", "B"])))
        );
        assert_eq!(
            d.label(&"b".into()),
            Some(&Factor::IdOn(ObjectWord::unit()))
        );
        let back = parse_diagram(&print_diagram(&d, "s"), load(&s), false).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn lone_node_parses() {
        let s = sig();
        let d = parse_diagram("use s\nnode a f\n", load(&s), false).unwrap();
        assert!(!d.validate().is_valid());
    }

    #[test]
    fn reflexive_ord_is_harmless() {
        let s = sig();
        let text = "use s\nnode a f\nnode b g\nedge e1 a b\nord e1 < e1\n";
        let d = parse_diagram(text, load(&s), false).unwrap();
        assert!(d.order_pairs().is_empty());
        assert!(d.validate().is_valid());
    }

    #[test]
    fn diagram_errors() {
        let s = sig();
        let cases = [
            ("node a f\n", 1, "use"),
            ("use s\nnode a f\nnode a g\n", 3, "duplicate node"),
            ("use s\nnode a zz\n", 2, "unknown generator"),
            (
                "use s\nnode a f\nnode b f\nedge e a b\nord e < q\n",
                5,
                "undeclared edge",
            ),
            ("use s\nnode a f\nedge e a b\n", 3, "undeclared node"),
            ("use s\nnode a f\nedge e\n", 3, "expected `edge"),
            ("use s\nfrob\n", 2, "unknown directive"),
        ];
        for (text, line, needle) in cases {
            match parse_diagram(text, load(&s), false) {
                Err(LoadError::Parse(e)) => {
                    assert_eq!(e.line, line, "{text}");
                    assert!(e.reason.contains(needle), "{text}: {}", e.reason);
                }
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn model_round_trip() {
        let m = parse_model("dim A 2\nmat f 1,2; -1,1/2;\nmat c 1; 2;\n").unwrap();
        assert_eq!(m.mat("f").unwrap().get(1, 1).to_string(), "1/2");
        assert_eq!(m.mat("c").unwrap().shape(), (2, 1));
        assert_eq!(parse_model(&print_model(&m)).unwrap(), m);
        assert!(parse_model("mat f 1,2; 3;\n").is_err());
        assert!(parse_model("mat f 1/0;\n").is_err());
        assert!(parse_model("dim A 0\n").is_err());
    }

    #[test]
    fn dot_is_layered_and_stable() {
        let s = sig();
        let d = parse_diagram(FGH, load(&s), false).unwrap();
        let dot = render_dot(&d).unwrap();
        assert!(dot.contains("subgraph layer2 {\n    rank=same;\n    \"y\" [label=\"g\"];\n    \"z\" [label=\"h\"];\n    \"y\" -> \"z\" [style=invis];"));
        assert_eq!(dot, render_dot(&d).unwrap());
    }
}
