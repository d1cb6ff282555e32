//! Reading a diagram as a layered term, and the diagram operations that the
//! readout turns into tensor and composition.

use std::fmt;

use thiserror::Error;

use crate::diagram::{Diagram, DiagramError, EdgeId, NodeId, ValidationReport};
use crate::layering::{layer_extension, segment_unchecked, skip_edges, LayerError};
use crate::relation::Relation;
use crate::resolution::{resolve, ResolveError};
use crate::semantics::{eval_term, MatrixModel, ModelError, RationalMatrix};
use crate::signature::{word_concat, Factor, ObjectWord, Signature, SignatureError};

/// One layer of a term: factors tensored left to right.
pub type Layer = Vec<Factor>;

/// A composite of layers, first layer applied first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LayeredTerm {
    dom: ObjectWord,
    layers: Vec<Layer>,
    cod: ObjectWord,
}

/// Domain and codomain of a layer.
pub fn layer_boundary(
    sig: &Signature,
    layer: &[Factor],
) -> Result<(ObjectWord, ObjectWord), SignatureError> {
    let mut doms = Vec::with_capacity(layer.len());
    let mut cods = Vec::with_capacity(layer.len());
    for f in layer {
        let (d, c) = sig.factor_dom_cod(f)?;
        doms.push(d);
        cods.push(c);
    }
    Ok((word_concat(&doms), word_concat(&cods)))
}

impl LayeredTerm {
    /// The identity on `w`: no layers.
    pub fn identity(w: ObjectWord) -> Self {
        LayeredTerm {
            dom: w.clone(),
            layers: Vec::new(),
            cod: w,
        }
    }

    /// Builds a term, checking that consecutive layers meet.
    pub fn new(sig: &Signature, dom: ObjectWord, layers: Vec<Layer>) -> Result<Self, ReadoutError> {
        let mut cod = dom.clone();
        for (k, layer) in layers.iter().enumerate() {
            let (d, c) = layer_boundary(sig, layer)?;
            if d != cod {
                return Err(ReadoutError::Boundary {
                    boundary: k,
                    cod,
                    dom: d,
                });
            }
            cod = c;
        }
        Ok(LayeredTerm { dom, layers, cod })
    }

    pub(crate) fn from_layers_unchecked(
        dom: ObjectWord,
        layers: Vec<Layer>,
        cod: ObjectWord,
    ) -> Self {
        LayeredTerm { dom, layers, cod }
    }

    pub fn dom(&self) -> &ObjectWord {
        &self.dom
    }

    pub fn cod(&self) -> &ObjectWord {
        &self.cod
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Re-checks boundary coherence against a signature.
    pub fn check(&self, sig: &Signature) -> Result<(), ReadoutError> {
        let rebuilt = LayeredTerm::new(sig, self.dom.clone(), self.layers.clone())?;
        if rebuilt.cod != self.cod {
            return Err(ReadoutError::Boundary {
                boundary: self.layers.len(),
                cod: rebuilt.cod,
                dom: self.cod.clone(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for LayeredTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dom: {}", self.dom)?;
        for (k, layer) in self.layers.iter().enumerate() {
            write!(f, "layer {}: ", k + 1)?;
            if layer.is_empty() {
                write!(f, "id[]")?;
            }
            for (i, factor) in layer.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ⊗ ")?;
                }
                write!(f, "{factor}")?;
            }
            writeln!(f)?;
        }
        writeln!(f, "cod: {}", self.cod)
    }
}

/// A boundary between consecutive layers whose words disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    /// Layers `boundary` and `boundary + 1` (1-based) fail to meet.
    pub boundary: usize,
    pub cod: ObjectWord,
    pub dom: ObjectWord,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidityReport {
    pub mismatches: Vec<Mismatch>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.mismatches.is_empty()
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.mismatches {
            writeln!(f, "boundary {}: cod {} vs dom {}", m.boundary, m.cod, m.dom)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReadoutError {
    #[error("diagram is invalid: {}", .0.violations.first().map(ToString::to_string).unwrap_or_default())]
    Invalid(ValidationReport),
    #[error("edge `{0}` skips a layer; resolve the diagram first")]
    Unresolved(EdgeId),
    #[error("layers do not compose at boundary {}", .0.mismatches.first().map_or(0, |m| m.boundary))]
    NotValid(ValidityReport),
    #[error("boundary {boundary}: codomain {cod} does not match domain {dom}")]
    Boundary {
        boundary: usize,
        cod: ObjectWord,
        dom: ObjectWord,
    },
    #[error("attach needs at least one diagram")]
    Empty,
    #[error(transparent)]
    Layer(#[from] LayerError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn require_valid(d: &Diagram) -> Result<(), ReadoutError> {
    let report = d.validate();
    if report.is_valid() {
        Ok(())
    } else {
        Err(ReadoutError::Invalid(report))
    }
}

/// The labels of a resolved diagram, layer by layer in horizontal order.
pub fn reading(d: &Diagram) -> Result<Vec<Layer>, ReadoutError> {
    require_valid(d)?;
    reading_unchecked(d)
}

fn reading_unchecked(d: &Diagram) -> Result<Vec<Layer>, ReadoutError> {
    if let Some(e) = skip_edges(d).into_iter().next() {
        return Err(ReadoutError::Unresolved(e.id));
    }
    let seg = segment_unchecked(d)?;
    Ok(seg
        .layers()
        .iter()
        .map(|layer| {
            layer
                .iter()
                .map(|v| d.label(v).expect("node of this diagram").clone())
                .collect()
        })
        .collect())
}

fn assemble(
    sig: &Signature,
    layers: Vec<Layer>,
) -> Result<(LayeredTerm, ValidityReport), ReadoutError> {
    let mut bounds = Vec::with_capacity(layers.len());
    for layer in &layers {
        bounds.push(layer_boundary(sig, layer)?);
    }
    let mismatches = bounds
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].1 != w[1].0)
        .map(|(k, w)| Mismatch {
            boundary: k + 1,
            cod: w[0].1.clone(),
            dom: w[1].0.clone(),
        })
        .collect();
    let dom = bounds.first().map(|b| b.0.clone()).unwrap_or_default();
    let cod = bounds.last().map(|b| b.1.clone()).unwrap_or_default();
    Ok((
        LayeredTerm::from_layers_unchecked(dom, layers, cod),
        ValidityReport { mismatches },
    ))
}

fn resolved_term(d: &Diagram) -> Result<(LayeredTerm, ValidityReport), ReadoutError> {
    let (resolved, _) = resolve(d).map_err(|e| match e {
        ResolveError::Invalid(r) => ReadoutError::Invalid(r),
        e => e.into(),
    })?;
    assemble(d.signature(), reading_unchecked(&resolved)?)
}

/// Resolves the diagram and reports every layer boundary that fails to meet.
pub fn check_validity(d: &Diagram) -> Result<ValidityReport, ReadoutError> {
    Ok(resolved_term(d)?.1)
}

/// The layered term a valid diagram denotes.
pub fn readout(d: &Diagram) -> Result<LayeredTerm, ReadoutError> {
    let (term, report) = resolved_term(d)?;
    if !report.is_valid() {
        return Err(ReadoutError::NotValid(report));
    }
    debug_assert!(term.check(d.signature()).is_ok());
    Ok(term)
}

fn top_node(d: &Diagram) -> Option<usize> {
    let (layers, _) = layer_extension(d);
    layers.last().and_then(|l| l.first().copied())
}

/// Extends a valid, nonempty diagram to `rank` layers with a chain of
/// identities on its codomain above its leftmost top node. The readout only
/// gains identity layers.
pub fn pad_to_rank(d: &Diagram, rank: usize) -> Result<Diagram, ReadoutError> {
    let cod = readout(d)?.cod;
    let current = d.geometry().map_or(0, |g| g.rank);
    let Some(top) = top_node(d) else {
        return Ok(d.clone());
    };
    if current >= rank {
        return Ok(d.clone());
    }
    let mut nodes = d.node_ids().to_vec();
    let mut labels = d.labels().to_vec();
    let mut edge_ids = d.edge_ids().to_vec();
    let mut ends = d.ends().to_vec();
    let mut below = top;
    let mut k = 0;
    for _ in current..rank {
        let node = loop {
            k += 1;
            let c = NodeId::new(format!("%pad{k}"));
            if d.label(&c).is_none() {
                break c;
            }
        };
        let edge = (k..)
            .map(|j| EdgeId::new(format!("%pad{j}")))
            .find(|c| d.edge(c).is_none())
            .expect("unbounded search");
        nodes.push(node);
        labels.push(Factor::IdOn(cod.clone()));
        edge_ids.push(edge);
        ends.push((below, nodes.len() - 1));
        below = nodes.len() - 1;
    }
    let mut order = Relation::identity(ends.len());
    for (a, b) in d.order_relation().pairs() {
        order.insert(a, b);
    }
    Ok(
        Diagram::from_parts(d.signature().clone(), nodes, labels, edge_ids, ends, order)
            .cc_closure()?,
    )
}

struct Union {
    nodes: Vec<NodeId>,
    labels: Vec<Factor>,
    edge_ids: Vec<EdgeId>,
    ends: Vec<(usize, usize)>,
    pairs: Vec<(usize, usize)>,
    /// First edge index of each component.
    edge_start: Vec<usize>,
    node_start: Vec<usize>,
}

/// Disjoint union, renaming `x` of component `i` to `x.i` (1-based).
fn disjoint_union(ds: &[Diagram]) -> Union {
    let mut u = Union {
        nodes: Vec::new(),
        labels: Vec::new(),
        edge_ids: Vec::new(),
        ends: Vec::new(),
        pairs: Vec::new(),
        edge_start: Vec::new(),
        node_start: Vec::new(),
    };
    for (i, d) in ds.iter().enumerate() {
        let (n0, e0) = (u.nodes.len(), u.edge_ids.len());
        u.node_start.push(n0);
        u.edge_start.push(e0);
        u.nodes.extend(
            d.node_ids()
                .iter()
                .map(|v| NodeId::new(format!("{}.{}", v, i + 1))),
        );
        u.labels.extend(d.labels().iter().cloned());
        u.edge_ids.extend(
            d.edge_ids()
                .iter()
                .map(|e| EdgeId::new(format!("{}.{}", e, i + 1))),
        );
        u.ends
            .extend(d.ends().iter().map(|&(s, t)| (s + n0, t + n0)));
        u.pairs
            .extend(d.order_relation().pairs().map(|(a, b)| (a + e0, b + e0)));
    }
    u.edge_start.push(u.edge_ids.len());
    u.node_start.push(u.nodes.len());
    u
}

impl Union {
    fn finish(self, sig: &std::sync::Arc<Signature>) -> Result<Diagram, ReadoutError> {
        let mut order = Relation::identity(self.ends.len());
        for (a, b) in self.pairs {
            order.insert(a, b);
        }
        order.close_transitively();
        Ok(Diagram::from_parts(
            sig.clone(),
            self.nodes,
            self.labels,
            self.edge_ids,
            self.ends,
            order,
        )
        .cc_closure()?)
    }
}

fn same_signature(ds: &[Diagram]) -> Result<(), ReadoutError> {
    match ds.iter().skip(1).find(|d| !d.same_signature(&ds[0])) {
        Some(_) => Err(DiagramError::SignatureMismatch.into()),
        None => Ok(()),
    }
}

/// Places diagrams side by side, left to right in sequence order.
///
/// Components of lower rank are first padded with identity layers so that all
/// components share the top layer.
pub fn attach(ds: &[Diagram]) -> Result<Diagram, ReadoutError> {
    if ds.is_empty() {
        return Err(ReadoutError::Empty);
    }
    same_signature(ds)?;
    for d in ds {
        require_valid(d)?;
    }
    let rank = ds
        .iter()
        .map(|d| d.geometry().map_or(0, |g| g.rank))
        .max()
        .unwrap_or(0);
    let padded = ds
        .iter()
        .map(|d| pad_to_rank(d, rank))
        .collect::<Result<Vec<_>, _>>()?;
    let mut u = disjoint_union(&padded);
    for i in 0..padded.len() {
        for j in i + 1..padded.len() {
            for a in u.edge_start[i]..u.edge_start[i + 1] {
                for b in u.edge_start[j]..u.edge_start[j + 1] {
                    u.pairs.push((a, b));
                }
            }
        }
    }
    u.finish(ds[0].signature())
}

/// Stacks `upper` on top of `lower`.
///
/// The leftmost top node of `lower` gets an edge to every minimal node of
/// `upper`, and these edges are ordered like the minimal nodes they reach.
pub fn compose_vertical(lower: &Diagram, upper: &Diagram) -> Result<Diagram, ReadoutError> {
    same_signature(&[lower.clone(), upper.clone()])?;
    let r1 = readout(lower)?;
    let r2 = readout(upper)?;
    if r1.cod != r2.dom {
        return Err(ReadoutError::Boundary {
            boundary: r1.layers.len(),
            cod: r1.cod,
            dom: r2.dom,
        });
    }
    let top = top_node(lower);
    let minima = layer_extension(upper)
        .0
        .into_iter()
        .next()
        .unwrap_or_default();
    let mut u = disjoint_union(&[lower.clone(), upper.clone()]);
    if let Some(top) = top {
        let first = u.edge_ids.len();
        for (k, &m) in minima.iter().enumerate() {
            u.edge_ids.push(EdgeId::new(format!("%c{}", k + 1)));
            u.ends.push((top, u.node_start[1] + m));
            u.pairs.push((first + k, first + k));
            if k > 0 {
                u.pairs.push((first + k - 1, first + k));
            }
        }
    }
    u.finish(lower.signature())
}

/// True iff the readout of the attachment evaluates to the ordered
/// Kronecker product of the components' evaluations.
pub fn readout_functor_check(ds: &[Diagram], model: &MatrixModel) -> Result<bool, ReadoutError> {
    let whole = eval_term(model, &readout(&attach(ds)?)?)?;
    let mut parts = RationalMatrix::identity(1);
    for d in ds {
        parts = parts.kron(&eval_term(model, &readout(d)?)?);
    }
    Ok(whole == parts)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::iso::diagram_iso;

    fn w(s: &[&str]) -> ObjectWord {
        ObjectWord::new(s.iter().copied())
    }

    fn sig() -> Arc<Signature> {
        Arc::new(
            Signature::new()
                .with_object("A")
                .with_object("B")
                .with_gen("f", &["A"], &["A", "A"])
                .with_gen("g", &["A"], &["B"])
                .with_gen("h", &["A"], &["B"])
                .with_gen("u", &["A"], &["A"])
                .with_gen("v", &["A"], &["A"]),
        )
    }

    fn fgh() -> Diagram {
        Diagram::builder(sig())
            .node("x", Factor::gen("f"))
            .node("y", Factor::gen("g"))
            .node("z", Factor::gen("h"))
            .edge("e1", "x", "y")
            .edge("e2", "x", "z")
            .order("e1", "e2")
            .build()
            .unwrap()
    }

    fn chain(a: &str, b: &str) -> Diagram {
        Diagram::builder(sig())
            .node("a", Factor::gen(a))
            .node("b", Factor::gen(b))
            .edge("e", "a", "b")
            .build()
            .unwrap()
    }

    #[test]
    fn fgh_readout() {
        let t = readout(&fgh()).unwrap();
        assert_eq!(t.dom(), &w(&["A"]));
        assert_eq!(t.cod(), &w(&["B", "B"]));
        assert_eq!(
            t.layers(),
            &[
                vec![Factor::gen("f")],
                vec![Factor::gen("g"), Factor::gen("h")]
            ]
        );
        assert_eq!(
            t.to_string(),
            "dom: A\nlayer 1: f\nlayer 2: g ⊗ h\ncod: B B\n"
        );
    }

    #[test]
    fn mismatch_is_reported() {
        let d = Diagram::builder(sig())
            .node("x", Factor::gen("f"))
            .node("y", Factor::gen("g"))
            .edge("e", "x", "y")
            .build()
            .unwrap();
        let r = check_validity(&d).unwrap();
        assert_eq!(
            r.mismatches,
            vec![Mismatch {
                boundary: 1,
                cod: w(&["A", "A"]),
                dom: w(&["A"])
            }]
        );
        assert!(matches!(readout(&d), Err(ReadoutError::NotValid(_))));
    }

    #[test]
    fn identity_chain() {
        let s = sig();
        let d = Diagram::builder(s)
            .node("a", Factor::IdOn(w(&["A"])))
            .node("b", Factor::IdOn(w(&["A"])))
            .edge("e", "a", "b")
            .build()
            .unwrap();
        let t = readout(&d).unwrap();
        assert_eq!((t.dom(), t.cod()), (&w(&["A"]), &w(&["A"])));
    }

    #[test]
    fn resolved_reading_has_identity_in_place() {
        let skip = Diagram::builder(sig())
            .node("x", Factor::gen("u"))
            .node("y", Factor::gen("u"))
            .node("z", Factor::gen("v"))
            .node("w", Factor::gen("u"))
            .edge("xw", "x", "w")
            .edge("yz", "y", "z")
            .edge("zw", "z", "w")
            .order("xw", "yz")
            .build()
            .unwrap();
        let (r, _) = resolve(&skip).unwrap();
        let layers = reading(&r).unwrap();
        assert_eq!(layers[1], vec![Factor::IdOn(w(&["A"])), Factor::gen("v")]);
        assert!(matches!(reading(&skip), Err(ReadoutError::Unresolved(_))));
    }

    #[test]
    fn attach_two_edges() {
        let d = attach(&[chain("u", "v"), chain("v", "u")]).unwrap();
        assert!(d.validate().is_valid());
        let seg = crate::layering::segmentation(&d).unwrap();
        let names: Vec<Vec<&str>> = seg
            .layers()
            .iter()
            .map(|l| l.iter().map(NodeId::as_str).collect())
            .collect();
        assert_eq!(names, vec![vec!["a.1", "a.2"], vec!["b.1", "b.2"]]);
        let t = readout(&d).unwrap();
        assert_eq!(t.dom(), &w(&["A", "A"]));
        assert_eq!(t.layers()[0], vec![Factor::gen("u"), Factor::gen("v")]);
    }

    #[test]
    fn unary_attach_is_isomorphic() {
        let d = fgh();
        let a = attach(std::slice::from_ref(&d)).unwrap();
        assert!(diagram_iso(&d, &a).unwrap().is_some());
        assert_eq!(attach(&[]), Err(ReadoutError::Empty));
    }

    #[test]
    fn attach_pads_lower_rank() {
        let d = attach(&[chain("u", "v"), fgh()]).unwrap();
        let t = readout(&d).unwrap();
        assert_eq!(t.dom(), &w(&["A", "A"]));
        assert_eq!(t.cod(), &w(&["A", "B", "B"]));
        let tall = Diagram::builder(sig())
            .node("a", Factor::gen("u"))
            .node("b", Factor::gen("u"))
            .node("c", Factor::gen("u"))
            .edge("ab", "a", "b")
            .edge("bc", "b", "c")
            .build()
            .unwrap();
        let t = readout(&attach(&[chain("u", "v"), tall]).unwrap()).unwrap();
        assert_eq!(t.layers().len(), 3);
        assert_eq!(
            t.layers()[2],
            vec![Factor::IdOn(w(&["A"])), Factor::gen("u")]
        );
    }

    #[test]
    fn compose_chains() {
        let d = compose_vertical(&chain("u", "v"), &chain("v", "u")).unwrap();
        let t = readout(&d).unwrap();
        let names: Vec<String> = t.layers().iter().map(|l| l[0].to_string()).collect();
        assert_eq!(names, vec!["u", "v", "v", "u"]);
        let bad = compose_vertical(&fgh(), &chain("u", "v"));
        assert!(matches!(bad, Err(ReadoutError::Boundary { .. })));
    }
}
