//! Rank, segmentation into layers, per-layer order and layer-skipping edges.

use std::collections::HashMap;

use thiserror::Error;

use crate::diagram::{Diagram, Edge, NodeId, ValidationReport};
use crate::relation::Relation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayerError {
    #[error("diagram is invalid: {}", first_violation(.0))]
    Invalid(ValidationReport),
    #[error("layer {layer}: nodes `{a}` and `{b}` are not strictly ordered")]
    NotTotal { layer: usize, a: NodeId, b: NodeId },
    #[error("layer {k} out of range 1..={rank}")]
    OutOfRange { k: usize, rank: usize },
}

fn first_violation(r: &ValidationReport) -> String {
    r.violations
        .first()
        .map_or_else(String::new, ToString::to_string)
}

/// The layers of a diagram, each in its horizontal order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segmentation {
    layers: Vec<Vec<NodeId>>,
    place: HashMap<NodeId, (usize, usize)>,
}

impl Segmentation {
    /// Layers, first (`E`-minimal) layer first.
    pub fn layers(&self) -> &[Vec<NodeId>] {
        &self.layers
    }

    pub fn rank(&self) -> usize {
        self.layers.len()
    }

    /// 1-based layer index of a node.
    pub fn layer_of(&self, v: &NodeId) -> Option<usize> {
        self.place.get(v).map(|&(l, _)| l)
    }

    /// 0-based position of a node within its layer.
    pub fn position_of(&self, v: &NodeId) -> Option<usize> {
        self.place.get(v).map(|&(_, p)| p)
    }
}

fn require_valid(d: &Diagram) -> Result<(), LayerError> {
    let report = d.validate();
    if report.is_valid() {
        Ok(())
    } else {
        Err(LayerError::Invalid(report))
    }
}

/// Length of the longest `E`-chain.
pub fn rank(d: &Diagram) -> Result<usize, LayerError> {
    require_valid(d)?;
    Ok(d.geometry().map_or(0, |g| g.rank))
}

/// Segmentation of a valid diagram. Fails if some layer is not totally
/// ordered, which can only happen while edges still skip layers.
pub fn segmentation(d: &Diagram) -> Result<Segmentation, LayerError> {
    require_valid(d)?;
    segment_unchecked(d)
}

/// The horizontal order of layer `k` (1-based).
pub fn layer_order(d: &Diagram, k: usize) -> Result<Vec<NodeId>, LayerError> {
    let seg = segmentation(d)?;
    let rank = seg.rank();
    if k == 0 || k > rank {
        return Err(LayerError::OutOfRange { k, rank });
    }
    Ok(seg.layers[k - 1].clone())
}

/// Edges whose target lies at least two layers above their source.
pub fn unresolved_edges(d: &Diagram) -> Result<Vec<Edge>, LayerError> {
    require_valid(d)?;
    Ok(skip_edges(d))
}

pub(crate) fn skip_edges(d: &Diagram) -> Vec<Edge> {
    let Some(geo) = d.geometry() else {
        return Vec::new();
    };
    d.ends()
        .iter()
        .enumerate()
        .filter(|(_, &(s, t))| geo.layer[t] >= geo.layer[s] + 2)
        .map(|(i, _)| d.edge_at(i))
        .collect()
}

/// Node indices grouped by layer, each layer in a linear extension of the
/// node order (ties broken by name). For resolved valid diagrams this is the
/// layer order itself.
pub(crate) fn layer_extension(d: &Diagram) -> (Vec<Vec<usize>>, Relation) {
    let Some(geo) = d.geometry() else {
        return (Vec::new(), Relation::empty(0));
    };
    let n = d.node_count();
    let order = geo.node_order(d.order_relation(), n);
    let mut layers = vec![Vec::new(); geo.rank];
    for v in 0..n {
        layers[geo.layer[v] - 1].push(v);
    }
    for layer in &mut layers {
        let below = |v: usize, layer: &[usize]| {
            layer
                .iter()
                .filter(|&&u| u != v && order.contains(u, v))
                .count()
        };
        let keys: HashMap<usize, usize> = layer.iter().map(|&v| (v, below(v, layer))).collect();
        layer.sort_by(|&x, &y| {
            keys[&x]
                .cmp(&keys[&y])
                .then_with(|| d.node_ids()[x].cmp(&d.node_ids()[y]))
        });
    }
    (layers, order)
}

pub(crate) fn segment_unchecked(d: &Diagram) -> Result<Segmentation, LayerError> {
    let (layers, order) = layer_extension(d);
    let ids = d.node_ids();
    for (k, layer) in layers.iter().enumerate() {
        for (i, &a) in layer.iter().enumerate() {
            for &b in &layer[i + 1..] {
                if !order.contains(a, b) || order.contains(b, a) || order.contains(a, a) {
                    return Err(LayerError::NotTotal {
                        layer: k + 1,
                        a: ids[a].clone(),
                        b: ids[b].clone(),
                    });
                }
            }
        }
    }
    let mut place = HashMap::new();
    let layers = layers
        .iter()
        .enumerate()
        .map(|(k, layer)| {
            layer
                .iter()
                .enumerate()
                .map(|(p, &v)| {
                    place.insert(ids[v].clone(), (k + 1, p));
                    ids[v].clone()
                })
                .collect()
        })
        .collect();
    Ok(Segmentation { layers, place })
}
