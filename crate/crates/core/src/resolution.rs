//! Resolution of layer-skipping edges by incision.
//!
//! Incising an edge `e = (s, t)` replaces it by `s -> n -> t` through a fresh
//! node `n` labelled with the identity on the codomain of `s`. Every new edge
//! is mapped back to the edge it came from by the cohesion map, and the new
//! horizontal order is the strict pullback of the old one along that map,
//! closed under conditional construction.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::diagram::{Diagram, DiagramError, Edge, EdgeId, NodeId, ValidationReport};
use crate::layering::{layer_extension, skip_edges};
use crate::relation::Relation;
use crate::signature::Factor;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("diagram is invalid: {}", .0.violations.first().map(ToString::to_string).unwrap_or_default())]
    Invalid(ValidationReport),
    #[error("edge `{0}` does not skip a layer")]
    NotUnresolved(EdgeId),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Incision {
    pub removed: Edge,
    pub inserted_node: NodeId,
    pub inserted_edges: (Edge, Edge),
    /// Every edge of the incised diagram, mapped to the edge it came from.
    pub cohesion: BTreeMap<EdgeId, EdgeId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResolutionTrace {
    pub steps: Vec<Incision>,
}

impl ResolutionTrace {
    /// Number of incisions performed.
    pub fn resistivity(&self) -> usize {
        self.steps.len()
    }

    /// The original edge a final edge descends from, following every
    /// cohesion map back to the input diagram.
    pub fn origin(&self, e: &EdgeId) -> Option<EdgeId> {
        self.steps
            .iter()
            .rev()
            .try_fold(e.clone(), |e, step| step.cohesion.get(&e).cloned())
    }
}

fn require_valid(d: &Diagram) -> Result<(), ResolveError> {
    let report = d.validate();
    if report.is_valid() {
        Ok(())
    } else {
        Err(ResolveError::Invalid(report))
    }
}

/// Incises one layer-skipping edge of a valid diagram.
pub fn incise(d: &Diagram, e: &EdgeId) -> Result<(Diagram, Incision), ResolveError> {
    require_valid(d)?;
    let i = d.edge_idx(e)?;
    let geo = d.geometry().expect("valid diagrams are acyclic");
    let (s, t) = d.ends()[i];
    if geo.layer[t] < geo.layer[s] + 2 {
        return Err(ResolveError::NotUnresolved(e.clone()));
    }
    incise_unchecked(d, i, 1)
}

fn fresh<T: Eq>(taken: impl Fn(&T) -> bool, make: impl Fn(usize) -> T, from: usize) -> T {
    (from..)
        .map(make)
        .find(|c| !taken(c))
        .expect("unbounded search")
}

fn incise_unchecked(
    d: &Diagram,
    i: usize,
    step: usize,
) -> Result<(Diagram, Incision), ResolveError> {
    let (s, t) = d.ends()[i];
    let removed = d.edge_at(i);
    let sig = d.signature().clone();
    let (_, cod) = sig
        .factor_dom_cod(&d.labels()[s])
        .expect("labels are checked at construction");

    let node = fresh(
        |c: &NodeId| d.label(c).is_some(),
        |k| NodeId::new(format!("{}%{}%{}", removed.src, removed.dst, k)),
        step,
    );
    let edge_name = |suffix: &str| {
        let base = format!("{}.{}", removed.id, suffix);
        fresh(
            |c: &EdgeId| d.edge(c).is_some(),
            |k| EdgeId::new(format!("{}{}", base, "'".repeat(k))),
            0,
        )
    };
    let (lower, upper) = (edge_name("1"), edge_name("2"));

    let n = d.node_count();
    let mut nodes = d.node_ids().to_vec();
    nodes.push(node.clone());
    let mut labels = d.labels().to_vec();
    labels.push(Factor::IdOn(cod));

    let kept: Vec<usize> = (0..d.edge_count()).filter(|&j| j != i).collect();
    let mut edge_ids: Vec<EdgeId> = kept.iter().map(|&j| d.edge_ids()[j].clone()).collect();
    let mut ends: Vec<(usize, usize)> = kept.iter().map(|&j| d.ends()[j]).collect();
    let mut source = kept;
    edge_ids.extend([lower.clone(), upper.clone()]);
    ends.extend([(s, n), (n, t)]);
    source.extend([i, i]);

    let old = d.order_relation();
    let mut order = Relation::identity(ends.len());
    for (a, &ca) in source.iter().enumerate() {
        for (b, &cb) in source.iter().enumerate() {
            if ca != cb && old.contains(ca, cb) {
                order.insert(a, b);
            }
        }
    }
    let cohesion = edge_ids
        .iter()
        .zip(&source)
        .map(|(e, &c)| (e.clone(), d.edge_ids()[c].clone()))
        .collect();
    let next = Diagram::from_parts(sig, nodes, labels, edge_ids, ends, order).cc_closure()?;
    let incision = Incision {
        removed: removed.clone(),
        inserted_node: node.clone(),
        inserted_edges: (
            Edge {
                id: lower,
                src: removed.src.clone(),
                dst: node.clone(),
            },
            Edge {
                id: upper,
                src: node,
                dst: removed.dst,
            },
        ),
        cohesion,
    };
    Ok((next, incision))
}

/// Sort key of an edge: source layer and position, then target layer and
/// position.
fn edge_keys(d: &Diagram) -> Vec<(usize, usize, usize, usize)> {
    let (layers, _) = layer_extension(d);
    let mut place = vec![(0, 0); d.node_count()];
    for (l, layer) in layers.iter().enumerate() {
        for (p, &v) in layer.iter().enumerate() {
            place[v] = (l + 1, p);
        }
    }
    d.ends()
        .iter()
        .map(|&(s, t)| (place[s].0, place[s].1, place[t].0, place[t].1))
        .collect()
}

/// Incises the least unresolved edge until none remain.
pub fn resolve(d: &Diagram) -> Result<(Diagram, ResolutionTrace), ResolveError> {
    require_valid(d)?;
    let mut current = d.clone();
    let mut trace = ResolutionTrace::default();
    loop {
        let skipping = skip_edges(&current);
        if skipping.is_empty() {
            return Ok((current, trace));
        }
        let keys = edge_keys(&current);
        let i = skipping
            .iter()
            .map(|e| current.edge_idx(&e.id).expect("edge of this diagram"))
            .min_by_key(|&i| keys[i])
            .expect("nonempty");
        let (next, incision) = incise_unchecked(&current, i, trace.steps.len() + 1)?;
        trace.steps.push(incision);
        current = next;
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::layering::{segmentation, unresolved_edges};
    use crate::signature::{ObjectWord, Signature};

    fn sig() -> Arc<Signature> {
        Arc::new(
            Signature::new()
                .with_object("A")
                .with_gen("p", &["A"], &["A"])
                .with_gen("m", &["A", "A"], &["A"]),
        )
    }

    fn skip() -> Diagram {
        Diagram::builder(sig())
            .node("x", Factor::gen("p"))
            .node("y", Factor::gen("p"))
            .node("z", Factor::gen("p"))
            .node("w", Factor::gen("m"))
            .edge("xw", "x", "w")
            .edge("yz", "y", "z")
            .edge("zw", "z", "w")
            .order("xw", "yz")
            .build()
            .unwrap()
    }

    fn layer_names(d: &Diagram) -> Vec<Vec<String>> {
        segmentation(d)
            .unwrap()
            .layers()
            .iter()
            .map(|l| l.iter().map(ToString::to_string).collect())
            .collect()
    }

    #[test]
    fn incise_skip_edge() {
        let d = skip();
        let (r, inc) = incise(&d, &"xw".into()).unwrap();
        assert_eq!(inc.inserted_node.as_str(), "x%w%1");
        assert_eq!(
            r.label(&inc.inserted_node),
            Some(&Factor::IdOn(ObjectWord::new(["A"])))
        );
        assert_eq!(
            layer_names(&r),
            vec![vec!["x", "y"], vec!["x%w%1", "z"], vec!["w"]]
        );
        assert!(r.validate().is_valid());
        assert!(unresolved_edges(&r).unwrap().is_empty());
        let mut image: Vec<&str> = inc.cohesion.values().map(EdgeId::as_str).collect();
        image.sort_unstable();
        image.dedup();
        assert_eq!(image, vec!["xw", "yz", "zw"]);
        assert_eq!(inc.cohesion[&"xw.1".into()].as_str(), "xw");
        assert_eq!(inc.cohesion[&"xw.2".into()].as_str(), "xw");
        assert_eq!(
            incise(&r, &"yz".into()),
            Err(ResolveError::NotUnresolved("yz".into()))
        );
    }

    #[test]
    fn resolve_counts_incisions() {
        let (r, trace) = resolve(&skip()).unwrap();
        assert_eq!(trace.resistivity(), 1);
        assert_eq!(trace.origin(&"xw.2".into()), Some("xw".into()));
        assert_eq!(trace.origin(&"yz".into()), Some("yz".into()));
        let (again, t2) = resolve(&r).unwrap();
        assert_eq!(again, r);
        assert_eq!(t2.resistivity(), 0);
    }

    #[test]
    fn two_layer_skip_needs_two_incisions() {
        let d = Diagram::builder(sig())
            .node("a", Factor::gen("p"))
            .node("b", Factor::gen("p"))
            .node("c", Factor::gen("p"))
            .node("d", Factor::gen("p"))
            .node("s", Factor::gen("p"))
            .edge("ab", "a", "b")
            .edge("bc", "b", "c")
            .edge("cd", "c", "d")
            .edge("sd", "s", "d")
            .order("ab", "sd")
            .build()
            .unwrap();
        let (r, trace) = resolve(&d).unwrap();
        assert_eq!(trace.resistivity(), 2);
        assert!(r.validate().is_valid());
        let layers = layer_names(&r);
        assert_eq!(layers.len(), 4);
        assert_eq!(layers[1], vec!["b", "s%d%1"]);
        assert_eq!(layers[2], vec!["c", "s%d%1%d%2"]);
    }
}
