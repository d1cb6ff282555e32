//! Isomorphism of monoidal diagrams.

use std::collections::{BTreeMap, HashMap};

use crate::diagram::{Diagram, DiagramError, NodeId};
use crate::signature::Factor;

/// A node renaming from one diagram onto another.
pub type NodeBijection = BTreeMap<NodeId, NodeId>;

/// Finds a node bijection that is a digraph isomorphism of `E`, an order
/// isomorphism of `H` on the induced edge bijection, and preserves labels.
///
/// Candidates are pruned by label, in/out degree and layer, and explored in
/// lexicographic node order, so the result is deterministic.
pub fn diagram_iso(a: &Diagram, b: &Diagram) -> Result<Option<NodeBijection>, DiagramError> {
    if !a.same_signature(b) {
        return Err(DiagramError::SignatureMismatch);
    }
    if a.node_count() != b.node_count() || a.edge_count() != b.edge_count() {
        return Ok(None);
    }
    let inv_a = invariants(a);
    let inv_b = invariants(b);
    let mut by_name_a: Vec<usize> = (0..a.node_count()).collect();
    by_name_a.sort_by(|&x, &y| a.node_ids()[x].cmp(&a.node_ids()[y]));
    let mut by_name_b: Vec<usize> = (0..b.node_count()).collect();
    by_name_b.sort_by(|&x, &y| b.node_ids()[x].cmp(&b.node_ids()[y]));
    let cands = (0..a.node_count())
        .map(|v| {
            by_name_b
                .iter()
                .copied()
                .filter(|&w| inv_a[v] == inv_b[w])
                .collect()
        })
        .collect();
    let mut search = Search {
        a,
        b,
        adj_a: adjacency(a),
        adj_b: adjacency(b),
        visit: by_name_a,
        cands,
        image: vec![None; a.node_count()],
        used: vec![false; b.node_count()],
        mapped_edges: Vec::new(),
    };
    if !search.extend(0) {
        return Ok(None);
    }
    Ok(Some(
        search
            .image
            .iter()
            .enumerate()
            .map(|(v, w)| {
                (
                    a.node_ids()[v].clone(),
                    b.node_ids()[w.expect("complete mapping")].clone(),
                )
            })
            .collect(),
    ))
}

type Invariant<'d> = (&'d Factor, usize, usize, usize);

fn invariants(d: &Diagram) -> Vec<Invariant<'_>> {
    let mut indeg = vec![0; d.node_count()];
    let mut outdeg = vec![0; d.node_count()];
    for &(s, t) in d.ends() {
        outdeg[s] += 1;
        indeg[t] += 1;
    }
    let layers = d.geometry().map(|g| g.layer.clone());
    (0..d.node_count())
        .map(|v| {
            let layer = layers.as_ref().map_or(0, |l| l[v]);
            (&d.labels()[v], indeg[v], outdeg[v], layer)
        })
        .collect()
}

fn adjacency(d: &Diagram) -> HashMap<(usize, usize), usize> {
    d.ends().iter().copied().zip(0..).collect()
}

struct Search<'d> {
    a: &'d Diagram,
    b: &'d Diagram,
    adj_a: HashMap<(usize, usize), usize>,
    adj_b: HashMap<(usize, usize), usize>,
    visit: Vec<usize>,
    cands: Vec<Vec<usize>>,
    image: Vec<Option<usize>>,
    used: Vec<bool>,
    mapped_edges: Vec<(usize, usize)>,
}

impl Search<'_> {
    fn extend(&mut self, k: usize) -> bool {
        let Some(&v) = self.visit.get(k) else {
            return true;
        };
        for i in 0..self.cands[v].len() {
            let w = self.cands[v][i];
            if self.used[w] {
                continue;
            }
            let Some(new_edges) = self.try_map(v, w) else {
                continue;
            };
            let mark = self.mapped_edges.len();
            if !self.orders_agree(&new_edges) {
                continue;
            }
            self.mapped_edges.extend(new_edges);
            self.image[v] = Some(w);
            self.used[w] = true;
            if self.extend(k + 1) {
                return true;
            }
            self.image[v] = None;
            self.used[w] = false;
            self.mapped_edges.truncate(mark);
        }
        false
    }

    /// Edges completed by mapping `v` to `w`, or `None` if adjacency differs.
    fn try_map(&self, v: usize, w: usize) -> Option<Vec<(usize, usize)>> {
        let mut out = Vec::new();
        let mut pair =
            |x: (usize, usize), y: (usize, usize)| match (self.adj_a.get(&x), self.adj_b.get(&y)) {
                (None, None) => true,
                (Some(&ea), Some(&eb)) => {
                    out.push((ea, eb));
                    true
                }
                _ => false,
            };
        if !pair((v, v), (w, w)) {
            return None;
        }
        for (u, x) in self.image.iter().enumerate() {
            if let Some(x) = *x {
                if !pair((v, u), (w, x)) || !pair((u, v), (x, w)) {
                    return None;
                }
            }
        }
        Some(out)
    }

    fn orders_agree(&self, new_edges: &[(usize, usize)]) -> bool {
        let (ha, hb) = (self.a.order_relation(), self.b.order_relation());
        new_edges.iter().all(|&(ea, eb)| {
            self.mapped_edges.iter().chain(new_edges).all(|&(fa, fb)| {
                ha.contains(ea, fa) == hb.contains(eb, fb)
                    && ha.contains(fa, ea) == hb.contains(fb, eb)
            })
        })
    }
}

/// A name-independent description of a diagram: two diagrams over the same
/// signature are isomorphic iff their canonical forms are equal.
///
/// Computed by trying every node permutation, so only meant for small
/// diagrams.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm {
    labels: Vec<Factor>,
    edges: Vec<(usize, usize)>,
    order: Vec<((usize, usize), (usize, usize))>,
}

pub fn canonical_form(d: &Diagram) -> CanonicalForm {
    let n = d.node_count();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<CanonicalForm> = None;
    loop {
        let form = relabel(d, &perm);
        if best.as_ref().is_none_or(|b| form < *b) {
            best = Some(form);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.expect("at least one permutation")
}

fn relabel(d: &Diagram, perm: &[usize]) -> CanonicalForm {
    let mut labels = vec![Factor::Gen(String::new()); perm.len()];
    for (v, &p) in perm.iter().enumerate() {
        labels[p] = d.labels()[v].clone();
    }
    let ends: Vec<(usize, usize)> = d.ends().iter().map(|&(s, t)| (perm[s], perm[t])).collect();
    let mut edges = ends.clone();
    edges.sort_unstable();
    let mut order: Vec<_> = d
        .order_relation()
        .strict_pairs()
        .map(|(a, b)| (ends[a], ends[b]))
        .collect();
    order.sort_unstable();
    CanonicalForm {
        labels,
        edges,
        order,
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len())
        .rev()
        .find(|&j| p[j] > p[i - 1])
        .expect("pivot");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::signature::Signature;

    fn sig() -> Arc<Signature> {
        Arc::new(
            Signature::new()
                .with_object("A")
                .with_gen("f", &["A"], &["A", "A"])
                .with_gen("g", &["A"], &["A"]),
        )
    }

    fn split(names: [&str; 3], sig: Arc<Signature>) -> Diagram {
        Diagram::builder(sig)
            .node(names[0], Factor::gen("f"))
            .node(names[1], Factor::gen("g"))
            .node(names[2], Factor::gen("g"))
            .edge("l", names[0], names[1])
            .edge("r", names[0], names[2])
            .order("l", "r")
            .build()
            .unwrap()
    }

    #[test]
    fn identity_and_renaming() {
        let s = sig();
        let d = split(["x", "y", "z"], s.clone());
        let id = diagram_iso(&d, &d).unwrap().unwrap();
        assert!(id.iter().all(|(a, b)| a == b));
        let renamed = split(["p", "q", "r"], s);
        let m = diagram_iso(&d, &renamed).unwrap().unwrap();
        assert_eq!(m[&NodeId::from("x")], NodeId::from("p"));
        assert_eq!(m[&NodeId::from("y")], NodeId::from("q"));
        assert_eq!(m[&NodeId::from("z")], NodeId::from("r"));
        assert_eq!(canonical_form(&d), canonical_form(&renamed));
    }

    #[test]
    fn mirrored_order_maps_branches_across() {
        let s = sig();
        let d = split(["x", "y", "z"], s.clone());
        let mirrored = Diagram::builder(s)
            .node("x", Factor::gen("f"))
            .node("y", Factor::gen("g"))
            .node("z", Factor::gen("g"))
            .edge("l", "x", "y")
            .edge("r", "x", "z")
            .order("r", "l")
            .build()
            .unwrap();
        let m = diagram_iso(&d, &mirrored).unwrap().unwrap();
        assert_eq!(m[&NodeId::from("y")], NodeId::from("z"));
    }

    #[test]
    fn labels_must_agree() {
        let s = sig();
        let one = |g: &str| {
            Diagram::builder(s.clone())
                .node("a", Factor::gen(g))
                .node("b", Factor::gen("g"))
                .edge("e", "a", "b")
                .build()
                .unwrap()
        };
        assert_eq!(diagram_iso(&one("f"), &one("g")).unwrap(), None);
        assert_ne!(canonical_form(&one("f")), canonical_form(&one("g")));
    }

    #[test]
    fn signatures_must_agree() {
        let d = split(["x", "y", "z"], sig());
        let other = Arc::new(Signature::new().with_object("B"));
        let e = Diagram::builder(other).build().unwrap();
        assert_eq!(diagram_iso(&d, &e), Err(DiagramError::SignatureMismatch));
    }

    #[test]
    fn permutations_are_exhaustive() {
        let mut p = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 24);
    }
}
