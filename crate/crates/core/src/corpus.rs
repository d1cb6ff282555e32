//! Exhaustive corpora of small diagrams, for tests and benchmarks.
//!
//! All diagrams are over [`corpus_signature`]: one object `A` and the
//! generators `p: A -> A`, `m: A A -> A`, `d: A -> A A`.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::diagram::{Diagram, DiagramBuilder};
use crate::iso::{canonical_form, CanonicalForm};
use crate::readout::check_validity;
use crate::relation::Relation;
use crate::signature::{Factor, Signature};

pub const GENERATORS: [&str; 3] = ["p", "m", "d"];

pub fn corpus_signature() -> Arc<Signature> {
    Arc::new(
        Signature::new()
            .with_object("A")
            .with_gen("p", &["A"], &["A"])
            .with_gen("m", &["A", "A"], &["A"])
            .with_gen("d", &["A"], &["A", "A"]),
    )
}

/// Every edge set on `n` nodes that is irreflexive, antisymmetric, acyclic
/// and covers every node.
pub fn comparators(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let mut out = Vec::new();
    let total = 3usize.pow(pairs.len() as u32);
    for code in 0..total {
        let mut c = code;
        let mut edges = Vec::new();
        for &(a, b) in &pairs {
            match c % 3 {
                1 => edges.push((a, b)),
                2 => edges.push((b, a)),
                _ => {}
            }
            c /= 3;
        }
        let mut reach = Relation::empty(n);
        let mut covered = vec![false; n];
        for &(a, b) in &edges {
            reach.insert(a, b);
            covered[a] = true;
            covered[b] = true;
        }
        reach.close_transitively();
        if covered.iter().all(|&c| c) && (0..n).all(|v| !reach.contains(v, v)) {
            out.push(edges);
        }
    }
    out
}

fn node_name(v: usize) -> String {
    format!("n{v}")
}

fn edge_name((a, b): (usize, usize)) -> String {
    format!("e{a}{b}")
}

fn skeleton(sig: &Arc<Signature>, edges: &[(usize, usize)], labels: &[&str]) -> DiagramBuilder {
    let mut b = Diagram::builder(sig.clone());
    for (v, l) in labels.iter().enumerate() {
        b = b.node(node_name(v), Factor::gen(*l));
    }
    for &e in edges {
        b = b.edge(edge_name(e), node_name(e.0), node_name(e.1));
    }
    b
}

/// Seeds for the horizontal order: every set of at most two ordered pairs
/// of distinct edges.
pub fn seeds(edge_count: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..edge_count)
        .flat_map(|a| {
            (0..edge_count)
                .filter(move |&b| b != a)
                .map(move |b| (a, b))
        })
        .collect();
    let mut out = vec![Vec::new()];
    for (i, &p) in pairs.iter().enumerate() {
        out.push(vec![p]);
        for &q in &pairs[i + 1..] {
            out.push(vec![p, q]);
        }
    }
    out
}

/// The axiom corpus on `2..=max_nodes` nodes. Node `v` is labelled with
/// generator `v mod 3`.
#[derive(Clone, Debug, Default)]
pub struct AxiomCorpus {
    /// One diagram per comparator and seed, with the seed's reflexive
    /// transitive closure as order.
    pub raw: Vec<Diagram>,
    /// The same diagrams closed under conditional construction, where the
    /// closure exists.
    pub closed: Vec<Diagram>,
    /// Seeds whose closure is inconsistent.
    pub inconsistent: usize,
}

pub fn axiom_corpus(max_nodes: usize) -> AxiomCorpus {
    let sig = corpus_signature();
    let mut corpus = AxiomCorpus::default();
    for n in 2..=max_nodes {
        let labels: Vec<&str> = (0..n).map(|v| GENERATORS[v % 3]).collect();
        for edges in comparators(n) {
            for seed in seeds(edges.len()) {
                let b = seed
                    .iter()
                    .fold(skeleton(&sig, &edges, &labels), |b, &(x, y)| {
                        b.order(edge_name(edges[x]), edge_name(edges[y]))
                    });
                let raw = b.build_raw().expect("corpus diagrams are well formed");
                match raw.cc_closure() {
                    Ok(d) => corpus.closed.push(d),
                    Err(_) => corpus.inconsistent += 1,
                }
                corpus.raw.push(raw);
            }
        }
    }
    corpus
}

/// Valid closed corpus diagrams, one per isomorphism class of the
/// unlabelled structure.
pub fn valid_shapes(max_nodes: usize) -> Vec<Diagram> {
    let mut seen = BTreeSet::new();
    axiom_corpus(max_nodes)
        .closed
        .into_iter()
        .filter(|d| d.validate().is_valid())
        .filter(|d| seen.insert(shape_form(d)))
        .collect()
}

fn shape_form(d: &Diagram) -> CanonicalForm {
    canonical_form(&relabel(d, &vec!["p"; d.node_count()]))
}

fn relabel(d: &Diagram, labels: &[&str]) -> Diagram {
    let mut b = Diagram::builder(d.signature().clone());
    for ((id, _), l) in d.nodes().zip(labels) {
        b = b.node(id.clone(), Factor::gen(*l));
    }
    for e in d.edges() {
        b = b.edge(e.id, e.src, e.dst);
    }
    for (lo, hi) in d.order_pairs() {
        b = b.order(lo, hi);
    }
    b.build_raw().expect("relabelling keeps the structure")
}

/// Every labelling of every valid shape whose readout exists, one per
/// isomorphism class.
pub fn readout_corpus(max_nodes: usize) -> Vec<Diagram> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for shape in valid_shapes(max_nodes) {
        let n = shape.node_count();
        for code in 0..3usize.pow(n as u32) {
            let labels: Vec<&str> = (0..n)
                .map(|v| GENERATORS[(code / 3usize.pow(v as u32)) % 3])
                .collect();
            let d = relabel(&shape, &labels);
            if check_validity(&d).is_ok_and(|r| r.is_valid()) && seen.insert(canonical_form(&d)) {
                out.push(d);
            }
        }
    }
    out
}
