//! Monoidal diagrams: a node set with a vertical comparator `E` (edges), a
//! horizontal comparator `H` (a partial order on edges) and a labelling of
//! nodes by morphisms of a [`Signature`].
//!
//! # Positions
//!
//! The horizontal order is compared layer by layer. Every node sits on the
//! layer given by the longest `E`-chain ending at it, and an edge occupies
//! every layer from its source's to its target's. At its endpoints an edge is
//! positioned at the endpoint node; at each layer strictly in between it has a
//! virtual position of its own. The induced first-order relation `S*` of an
//! edge relation `S` relates the positions of `e1` and `e2` at every layer both
//! occupy, whenever `e1 S e2` and the positions differ.
//!
//! `H` is *conditionally constructed* when, for all edges `e1`, `e2`, if
//! some position of `e1` is `H*`-before some position of `e2` on the same
//! layer, then `e1 H e2`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::relation::Relation;
use crate::signature::{Factor, Signature, SignatureError};

/// Node and edge names: ASCII alphanumerics and `_ % . ' -`.
pub fn is_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '%' | '.' | '\'' | '-'))
}

macro_rules! name_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                $name(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }
    };
}

name_type!(NodeId);
name_type!(EdgeId);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub id: EdgeId,
    pub src: NodeId,
    pub dst: NodeId,
}

/// A finite set of ordered node pairs.
pub type NodeRelation = BTreeSet<(NodeId, NodeId)>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("`{0}` is not a valid node or edge name")]
    BadName(String),
    #[error("node `{0}` declared twice")]
    DuplicateNode(NodeId),
    #[error("edge `{0}` declared twice")]
    DuplicateEdge(EdgeId),
    #[error("edges `{0}` and `{1}` join the same pair of nodes")]
    ParallelEdges(EdgeId, EdgeId),
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("unknown edge `{0}`")]
    UnknownEdge(EdgeId),
    #[error("label of node `{node}`: {source}")]
    Label {
        node: NodeId,
        #[source]
        source: SignatureError,
    },
    #[error("the vertical comparator has a cycle")]
    CyclicComparator,
    #[error("horizontal order is inconsistent: `{0}` and `{1}` are forced both ways")]
    InconsistentOrder(EdgeId, EdgeId),
    #[error("diagrams are over different signatures")]
    SignatureMismatch,
}

/// Layer assignment and edge positions. Only exists when `E` is acyclic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Geometry {
    /// 1-based layer of each node.
    pub layer: Vec<usize>,
    pub rank: usize,
    /// Layer of each position; positions `0..n` are the nodes themselves.
    pub point_layer: Vec<usize>,
    /// Positions of each edge, one per layer from source to target.
    pub edge_points: Vec<Vec<usize>>,
    /// Edges occupying each position.
    pub touching: Vec<Vec<usize>>,
}

impl Geometry {
    fn compute(node_count: usize, ends: &[(usize, usize)]) -> Option<Geometry> {
        let mut indeg = vec![0usize; node_count];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); node_count];
        for &(s, t) in ends {
            indeg[t] += 1;
            out[s].push(t);
        }
        let mut layer = vec![1usize; node_count];
        let mut queue: VecDeque<usize> = (0..node_count).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop_front() {
            seen += 1;
            for &t in &out[v] {
                layer[t] = layer[t].max(layer[v] + 1);
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    queue.push_back(t);
                }
            }
        }
        if seen != node_count {
            return None;
        }
        let rank = layer.iter().copied().max().unwrap_or(0);
        let mut point_layer = layer.clone();
        let mut touching: Vec<Vec<usize>> = vec![Vec::new(); node_count];
        let mut edge_points = Vec::with_capacity(ends.len());
        for (e, &(s, t)) in ends.iter().enumerate() {
            let mut pts = vec![s];
            touching[s].push(e);
            for l in layer[s] + 1..layer[t] {
                pts.push(point_layer.len());
                point_layer.push(l);
                touching.push(vec![e]);
            }
            pts.push(t);
            touching[t].push(e);
            edge_points.push(pts);
        }
        Some(Geometry {
            layer,
            rank,
            point_layer,
            edge_points,
            touching,
        })
    }

    pub fn point_count(&self) -> usize {
        self.point_layer.len()
    }

    fn first_layer(&self, e: usize) -> usize {
        self.point_layer[self.edge_points[e][0]]
    }

    /// Position of edge `e` on layer `l`, if it occupies that layer.
    pub fn point_at(&self, e: usize, l: usize) -> Option<usize> {
        let first = self.first_layer(e);
        l.checked_sub(first)
            .and_then(|k| self.edge_points[e].get(k).copied())
    }

    /// The induced first-order relation of an edge relation, over positions.
    pub fn induced(&self, order: &Relation) -> Relation {
        let mut s = Relation::empty(self.point_count());
        for (i, j) in order.strict_pairs() {
            let lo = self.first_layer(i).max(self.first_layer(j));
            let hi = (self.first_layer(i) + self.edge_points[i].len())
                .min(self.first_layer(j) + self.edge_points[j].len());
            for l in lo..hi {
                let a = self.point_at(i, l).expect("layer inside span");
                let b = self.point_at(j, l).expect("layer inside span");
                if a != b {
                    s.insert(a, b);
                }
            }
        }
        s
    }

    /// Transitive closure of the induced relation, restricted to nodes.
    pub fn node_order(&self, order: &Relation, node_count: usize) -> Relation {
        let mut s = self.induced(order);
        s.close_transitively();
        let mut r = Relation::empty(node_count);
        for (a, b) in s.pairs() {
            if a < node_count && b < node_count {
                r.insert(a, b);
            }
        }
        r
    }

    /// Smallest conditionally constructed order containing `seed`, or the
    /// pair of edges forced in both directions.
    pub fn close(&self, seed: &Relation) -> Result<Relation, (usize, usize)> {
        let mut h = seed.clone();
        h.close_reflexively();
        h.close_transitively();
        if let Some(p) = h.symmetric_pair() {
            return Err(p);
        }
        loop {
            let s = self.induced(&h);
            let mut changed = false;
            for (u, v) in s.pairs() {
                for &e in &self.touching[u] {
                    for &f in &self.touching[v] {
                        changed |= h.insert(e, f);
                    }
                }
            }
            if !changed {
                return Ok(h);
            }
            h.close_transitively();
            if let Some(p) = h.symmetric_pair() {
                return Err(p);
            }
        }
    }
}

/// A monoidal diagram over a [`Signature`].
///
/// The horizontal comparator is stored as its reflexive-transitive closure.
/// Construction only checks that names resolve; the diagram axioms are
/// checked by [`Diagram::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagram {
    sig: Arc<Signature>,
    nodes: Vec<NodeId>,
    labels: Vec<Factor>,
    node_index: HashMap<NodeId, usize>,
    edge_ids: Vec<EdgeId>,
    ends: Vec<(usize, usize)>,
    edge_index: HashMap<EdgeId, usize>,
    order: Relation,
    geometry: Option<Geometry>,
}

/// Incremental construction of a [`Diagram`].
#[derive(Clone, Debug)]
pub struct DiagramBuilder {
    sig: Arc<Signature>,
    nodes: Vec<(NodeId, Factor)>,
    edges: Vec<(EdgeId, NodeId, NodeId)>,
    order: Vec<(EdgeId, EdgeId)>,
}

impl DiagramBuilder {
    pub fn node(mut self, id: impl Into<NodeId>, label: Factor) -> Self {
        self.nodes.push((id.into(), label));
        self
    }

    pub fn edge(
        mut self,
        id: impl Into<EdgeId>,
        src: impl Into<NodeId>,
        dst: impl Into<NodeId>,
    ) -> Self {
        self.edges.push((id.into(), src.into(), dst.into()));
        self
    }

    /// Declares `lo` left of `hi` in the horizontal comparator.
    pub fn order(mut self, lo: impl Into<EdgeId>, hi: impl Into<EdgeId>) -> Self {
        self.order.push((lo.into(), hi.into()));
        self
    }

    /// Builds the diagram with `H` the reflexive-transitive closure of the
    /// declared pairs. No conditional-construction closure is applied.
    pub fn build_raw(self) -> Result<Diagram, DiagramError> {
        let mut node_index = HashMap::new();
        let mut nodes = Vec::with_capacity(self.nodes.len());
        let mut labels = Vec::with_capacity(self.nodes.len());
        for (id, label) in self.nodes {
            if !is_name(id.as_str()) {
                return Err(DiagramError::BadName(id.0));
            }
            self.sig
                .check_factor(&label)
                .map_err(|source| DiagramError::Label {
                    node: id.clone(),
                    source,
                })?;
            if node_index.insert(id.clone(), nodes.len()).is_some() {
                return Err(DiagramError::DuplicateNode(id));
            }
            nodes.push(id);
            labels.push(label);
        }
        let mut edge_index = HashMap::new();
        let mut by_ends: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edge_ids: Vec<EdgeId> = Vec::with_capacity(self.edges.len());
        let mut ends = Vec::with_capacity(self.edges.len());
        for (id, src, dst) in self.edges {
            if !is_name(id.as_str()) {
                return Err(DiagramError::BadName(id.0));
            }
            let s = *node_index.get(&src).ok_or(DiagramError::UnknownNode(src))?;
            let t = *node_index.get(&dst).ok_or(DiagramError::UnknownNode(dst))?;
            if edge_index.contains_key(&id) {
                return Err(DiagramError::DuplicateEdge(id));
            }
            if let Some(&other) = by_ends.get(&(s, t)) {
                return Err(DiagramError::ParallelEdges(edge_ids[other].clone(), id));
            }
            by_ends.insert((s, t), edge_ids.len());
            edge_index.insert(id.clone(), edge_ids.len());
            edge_ids.push(id);
            ends.push((s, t));
        }
        let mut order = Relation::identity(edge_ids.len());
        for (lo, hi) in self.order {
            let a = *edge_index.get(&lo).ok_or(DiagramError::UnknownEdge(lo))?;
            let b = *edge_index.get(&hi).ok_or(DiagramError::UnknownEdge(hi))?;
            order.insert(a, b);
        }
        order.close_transitively();
        Ok(Diagram::from_parts(
            self.sig, nodes, labels, edge_ids, ends, order,
        ))
    }

    /// [`DiagramBuilder::build_raw`] followed by [`Diagram::cc_closure`].
    pub fn build(self) -> Result<Diagram, DiagramError> {
        self.build_raw()?.cc_closure()
    }
}

impl Diagram {
    pub fn builder(sig: Arc<Signature>) -> DiagramBuilder {
        DiagramBuilder {
            sig,
            nodes: Vec::new(),
            edges: Vec::new(),
            order: Vec::new(),
        }
    }

    /// `order` must already be reflexive and transitive.
    pub(crate) fn from_parts(
        sig: Arc<Signature>,
        nodes: Vec<NodeId>,
        labels: Vec<Factor>,
        edge_ids: Vec<EdgeId>,
        ends: Vec<(usize, usize)>,
        order: Relation,
    ) -> Diagram {
        debug_assert_eq!(nodes.len(), labels.len());
        debug_assert_eq!(order.size(), ends.len());
        let node_index = nodes.iter().cloned().zip(0..).collect();
        let edge_index = edge_ids.iter().cloned().zip(0..).collect();
        let geometry = Geometry::compute(nodes.len(), &ends);
        Diagram {
            sig,
            nodes,
            labels,
            node_index,
            edge_ids,
            ends,
            edge_index,
            order,
            geometry,
        }
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn same_signature(&self, other: &Diagram) -> bool {
        Arc::ptr_eq(&self.sig, &other.sig) || self.sig == other.sig
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.ends.len()
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edge_ids(&self) -> &[EdgeId] {
        &self.edge_ids
    }

    pub fn label(&self, node: &NodeId) -> Option<&Factor> {
        self.node_index.get(node).map(|&i| &self.labels[i])
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&NodeId, &Factor)> {
        self.nodes.iter().zip(&self.labels)
    }

    pub fn edge(&self, id: &EdgeId) -> Option<Edge> {
        self.edge_index.get(id).map(|&i| self.edge_at(i))
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.ends.len()).map(|i| self.edge_at(i))
    }

    /// True when `lo` is strictly left of `hi` in `H`.
    pub fn precedes(&self, lo: &EdgeId, hi: &EdgeId) -> bool {
        match (self.edge_index.get(lo), self.edge_index.get(hi)) {
            (Some(&a), Some(&b)) => a != b && self.order.contains(a, b),
            _ => false,
        }
    }

    /// The strict part of `H`.
    pub fn order_pairs(&self) -> Vec<(EdgeId, EdgeId)> {
        self.order
            .strict_pairs()
            .map(|(a, b)| (self.edge_ids[a].clone(), self.edge_ids[b].clone()))
            .collect()
    }

    /// A generating set for `H`: its covering pairs.
    pub fn order_generators(&self) -> Vec<(EdgeId, EdgeId)> {
        self.order
            .covering_pairs()
            .into_iter()
            .map(|(a, b)| (self.edge_ids[a].clone(), self.edge_ids[b].clone()))
            .collect()
    }

    /// True when `E` has no cycles, so layers and positions are defined.
    pub fn is_acyclic(&self) -> bool {
        self.geometry.is_some()
    }

    /// The induced first-order relation of a relation on this diagram's
    /// edges, restricted to nodes.
    pub fn induced_first_order(
        &self,
        pairs: &[(EdgeId, EdgeId)],
    ) -> Result<NodeRelation, DiagramError> {
        let geo = self
            .geometry
            .as_ref()
            .ok_or(DiagramError::CyclicComparator)?;
        let mut rel = Relation::empty(self.edge_count());
        for (a, b) in pairs {
            rel.insert(self.edge_idx(a)?, self.edge_idx(b)?);
        }
        let n = self.node_count();
        Ok(geo
            .induced(&rel)
            .pairs()
            .filter(|&(a, b)| a < n && b < n)
            .map(|(a, b)| (self.nodes[a].clone(), self.nodes[b].clone()))
            .collect())
    }

    /// Replaces `H` with the least conditionally constructed partial order
    /// containing it.
    pub fn cc_closure(&self) -> Result<Diagram, DiagramError> {
        let geo = self
            .geometry
            .as_ref()
            .ok_or(DiagramError::CyclicComparator)?;
        let order = geo.close(&self.order).map_err(|(a, b)| {
            DiagramError::InconsistentOrder(self.edge_ids[a].clone(), self.edge_ids[b].clone())
        })?;
        let mut d = self.clone();
        d.order = order;
        Ok(d)
    }

    /// Checks every diagram axiom and reports each violation with a witness.
    pub fn validate(&self) -> ValidationReport {
        let mut out = BTreeSet::new();
        let n = self.node_count();

        for (i, &(s, t)) in self.ends.iter().enumerate() {
            if s == t {
                out.insert(Violation::ReflexiveEdge(self.edge_ids[i].clone()));
            }
        }
        for (i, &(s, t)) in self.ends.iter().enumerate() {
            if let Some(j) = self.ends.iter().position(|&p| p == (t, s)) {
                if s != t && i < j {
                    out.insert(Violation::symmetric_edges(
                        self.edge_ids[i].clone(),
                        self.edge_ids[j].clone(),
                    ));
                }
            }
        }
        let mut touched = vec![false; n];
        for &(s, t) in &self.ends {
            touched[s] = true;
            touched[t] = true;
        }
        for v in (0..n).filter(|&v| !touched[v]) {
            out.insert(Violation::LoneNode(self.nodes[v].clone()));
        }
        if self.geometry.is_none() {
            let mut reach = Relation::empty(n);
            for &(s, t) in &self.ends {
                reach.insert(s, t);
            }
            reach.close_transitively();
            for v in (0..n).filter(|&v| reach.contains(v, v)) {
                out.insert(Violation::VerticalCycle(self.nodes[v].clone()));
            }
        }

        if self.order.symmetric_pair().is_some() {
            for a in 0..self.edge_count() {
                for b in a + 1..self.edge_count() {
                    if self.order.contains(a, b) && self.order.contains(b, a) {
                        out.insert(Violation::order_cycle(
                            self.edge_ids[a].clone(),
                            self.edge_ids[b].clone(),
                        ));
                    }
                }
            }
        }

        for a in 0..self.edge_count() {
            for b in a + 1..self.edge_count() {
                let (ea, eb) = (self.ends[a], self.ends[b]);
                if (ea.0 == eb.0 || ea.1 == eb.1) && !self.order.comparable(a, b) {
                    out.insert(Violation::unordered_triangle(
                        self.edge_ids[a].clone(),
                        self.edge_ids[b].clone(),
                    ));
                }
            }
        }

        if let Some(geo) = &self.geometry {
            let node_order = geo.node_order(&self.order, n);
            let minima: Vec<usize> = (0..n).filter(|&v| geo.layer[v] == 1).collect();
            for (k, &a) in minima.iter().enumerate() {
                for &b in &minima[k + 1..] {
                    if !node_order.comparable(a, b) {
                        out.insert(Violation::incomparable_minima(
                            self.nodes[a].clone(),
                            self.nodes[b].clone(),
                        ));
                    }
                }
            }
            let induced = geo.induced(&self.order);
            for (u, v) in induced.pairs() {
                for &e in &geo.touching[u] {
                    for &f in &geo.touching[v] {
                        if !self.order.contains(e, f) {
                            out.insert(Violation::NotConditionallyConstructed {
                                lo: self.edge_ids[e].clone(),
                                hi: self.edge_ids[f].clone(),
                            });
                        }
                    }
                }
            }
        }
        ValidationReport {
            violations: out.into_iter().collect(),
        }
    }

    pub(crate) fn geometry(&self) -> Option<&Geometry> {
        self.geometry.as_ref()
    }

    pub(crate) fn order_relation(&self) -> &Relation {
        &self.order
    }

    pub(crate) fn ends(&self) -> &[(usize, usize)] {
        &self.ends
    }

    pub(crate) fn labels(&self) -> &[Factor] {
        &self.labels
    }

    pub(crate) fn edge_idx(&self, id: &EdgeId) -> Result<usize, DiagramError> {
        self.edge_index
            .get(id)
            .copied()
            .ok_or_else(|| DiagramError::UnknownEdge(id.clone()))
    }

    pub(crate) fn edge_at(&self, i: usize) -> Edge {
        let (s, t) = self.ends[i];
        Edge {
            id: self.edge_ids[i].clone(),
            src: self.nodes[s].clone(),
            dst: self.nodes[t].clone(),
        }
    }
}

/// A violated diagram axiom together with its witness.
///
/// Witnesses of symmetric conditions are stored with the smaller name first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Violation {
    /// An edge from a node to itself.
    ReflexiveEdge(EdgeId),
    /// Two edges joining the same nodes in opposite directions.
    SymmetricEdges(EdgeId, EdgeId),
    /// A node that lies on an `E`-cycle.
    VerticalCycle(NodeId),
    /// A node in no edge.
    LoneNode(NodeId),
    /// Two edges ordered both ways by `H`.
    OrderCycle(EdgeId, EdgeId),
    /// Two edges sharing a source or a target, not `H`-comparable.
    UnorderedTriangle(EdgeId, EdgeId),
    /// Two `E`-minimal nodes not comparable in the node order.
    IncomparableMinima(NodeId, NodeId),
    /// `lo H hi` is forced by the induced relation but missing.
    NotConditionallyConstructed { lo: EdgeId, hi: EdgeId },
}

fn sorted<T: Ord>(a: T, b: T) -> (T, T) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Violation {
    pub fn symmetric_edges(a: EdgeId, b: EdgeId) -> Self {
        let (a, b) = sorted(a, b);
        Violation::SymmetricEdges(a, b)
    }

    pub fn order_cycle(a: EdgeId, b: EdgeId) -> Self {
        let (a, b) = sorted(a, b);
        Violation::OrderCycle(a, b)
    }

    pub fn unordered_triangle(a: EdgeId, b: EdgeId) -> Self {
        let (a, b) = sorted(a, b);
        Violation::UnorderedTriangle(a, b)
    }

    pub fn incomparable_minima(a: NodeId, b: NodeId) -> Self {
        let (a, b) = sorted(a, b);
        Violation::IncomparableMinima(a, b)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ReflexiveEdge(e) => write!(f, "edge {e} is a loop"),
            Violation::SymmetricEdges(a, b) => write!(f, "edges {a} and {b} point both ways"),
            Violation::VerticalCycle(v) => write!(f, "node {v} lies on a vertical cycle"),
            Violation::LoneNode(v) => write!(f, "node {v} is in no edge"),
            Violation::OrderCycle(a, b) => write!(f, "edges {a} and {b} are ordered both ways"),
            Violation::UnorderedTriangle(a, b) => {
                write!(f, "edges {a} and {b} share an endpoint but are unordered")
            }
            Violation::IncomparableMinima(a, b) => {
                write!(f, "minimal nodes {a} and {b} are incomparable")
            }
            Violation::NotConditionallyConstructed { lo, hi } => {
                write!(f, "order {lo} < {hi} is forced but missing")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}
