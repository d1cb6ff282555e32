//! Finite unbiased tensors: integer compositions, the n-ary tensor obtained
//! by folding the binary one from the unit, and checks of the coherence and
//! interchange laws.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::readout::LayeredTerm;
use crate::semantics::{eval_term, MatrixModel, ModelError};
use crate::signature::{Factor, ObjectWord, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnbiasedError {
    #[error("outer partition has {expected} parts but {found} inner partitions were given")]
    InnerCount { expected: usize, found: usize },
    #[error("inner partition {index} sums to {found}, expected {expected}")]
    InnerTotal {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("cannot tensor words with terms")]
    MixedKinds,
}

/// A finite sequence of naturals together with its sum. Zero parts are
/// allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<usize>,
    total: usize,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Self {
        let total = parts.iter().sum();
        Partition { parts, total }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Splits `items` into consecutive blocks of the part sizes.
    pub fn split<'a, T>(&self, items: &'a [T]) -> Vec<&'a [T]> {
        debug_assert_eq!(items.len(), self.total);
        let mut rest = items;
        self.parts
            .iter()
            .map(|&k| {
                let (head, tail) = rest.split_at(k);
                rest = tail;
                head
            })
            .collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Every length-`gamma` sequence of naturals summing to `alpha`, in
/// lexicographic order.
pub fn enumerate_partitions(alpha: usize, gamma: usize) -> Vec<Partition> {
    fn go(rest: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if slots == 0 {
            if rest == 0 {
                out.push(Partition::new(prefix.clone()));
            }
            return;
        }
        let first = if slots == 1 { rest } else { 0 };
        for k in first..=rest {
            prefix.push(k);
            go(rest - k, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(alpha, gamma, &mut Vec::with_capacity(gamma), &mut out);
    out
}

/// An outer partition together with a partition of each of its parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoublePartition {
    outer: Partition,
    inners: Vec<Partition>,
}

impl DoublePartition {
    pub fn new(outer: Partition, inners: Vec<Partition>) -> Result<Self, UnbiasedError> {
        if inners.len() != outer.len() {
            return Err(UnbiasedError::InnerCount {
                expected: outer.len(),
                found: inners.len(),
            });
        }
        for (index, (inner, &part)) in inners.iter().zip(outer.parts()).enumerate() {
            if inner.total() != part {
                return Err(UnbiasedError::InnerTotal {
                    index,
                    expected: part,
                    found: inner.total(),
                });
            }
        }
        Ok(DoublePartition { outer, inners })
    }

    pub fn outer(&self) -> &Partition {
        &self.outer
    }

    pub fn inners(&self) -> &[Partition] {
        &self.inners
    }

    /// The partition `(δ_1, ..., δ_γ)` of inner lengths.
    pub fn lengths(&self) -> Partition {
        Partition::new(self.inners.iter().map(Partition::len).collect())
    }
}

/// Concatenation of the inner partitions.
pub fn flatten(dp: &DoublePartition) -> Partition {
    Partition::new(
        dp.inners
            .iter()
            .flat_map(|p| p.parts.iter().copied())
            .collect(),
    )
}

/// A strict binary tensor with a unit.
pub trait Tensor: Clone {
    fn unit() -> Self;
    fn tensor(&self, rhs: &Self) -> Self;
}

impl Tensor for ObjectWord {
    fn unit() -> Self {
        ObjectWord::unit()
    }

    fn tensor(&self, rhs: &Self) -> Self {
        ObjectWord::tensor(self, rhs)
    }
}

fn padding_layer(w: &ObjectWord) -> Vec<Factor> {
    if w.is_empty() {
        Vec::new()
    } else {
        vec![Factor::IdOn(w.clone())]
    }
}

impl Tensor for LayeredTerm {
    fn unit() -> Self {
        LayeredTerm::identity(ObjectWord::unit())
    }

    /// Pads the shorter term with identity layers on top, then tensors
    /// layer by layer.
    fn tensor(&self, rhs: &Self) -> Self {
        let height = self.layers().len().max(rhs.layers().len());
        let layer = |t: &LayeredTerm, k: usize| {
            t.layers()
                .get(k)
                .cloned()
                .unwrap_or_else(|| padding_layer(t.cod()))
        };
        let layers = (0..height)
            .map(|k| {
                let mut l = layer(self, k);
                l.extend(layer(rhs, k));
                l
            })
            .collect();
        LayeredTerm::from_layers_unchecked(
            self.dom().tensor(rhs.dom()),
            layers,
            self.cod().tensor(rhs.cod()),
        )
    }
}

/// `F(0) = I`, `F(k + 1) = F(k) ⊗ args[k]`.
pub fn fold_tensor<T: Tensor>(args: &[T]) -> T {
    args.iter().fold(T::unit(), |acc, x| acc.tensor(x))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TensorArg {
    Word(ObjectWord),
    Term(LayeredTerm),
}

/// The n-ary tensor of words or of terms. The nullary tensor is the empty
/// word.
pub fn derived_tensor(args: &[TensorArg]) -> Result<TensorArg, UnbiasedError> {
    let words: Option<Vec<ObjectWord>> = args
        .iter()
        .map(|a| match a {
            TensorArg::Word(w) => Some(w.clone()),
            TensorArg::Term(_) => None,
        })
        .collect();
    if let Some(words) = words {
        return Ok(TensorArg::Word(fold_tensor(&words)));
    }
    let terms: Option<Vec<LayeredTerm>> = args
        .iter()
        .map(|a| match a {
            TensorArg::Term(t) => Some(t.clone()),
            TensorArg::Word(_) => None,
        })
        .collect();
    terms
        .map(|t| TensorArg::Term(fold_tensor(&t)))
        .ok_or(UnbiasedError::MixedKinds)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoherenceReport {
    /// Number of equations checked.
    pub checked: usize,
    pub counterexamples: Vec<String>,
}

/// The `k`-th nonempty word over `objects`, in length-then-lexicographic
/// order, so that distinct indices give distinct words.
fn nth_word(objects: &[&str], mut k: usize) -> ObjectWord {
    let b = objects.len();
    let mut len = 1;
    let mut count = b;
    while k >= count {
        k -= count;
        len += 1;
        count *= b;
    }
    let mut letters = vec![objects[0]; len];
    for slot in letters.iter_mut().rev() {
        *slot = objects[k % b];
        k /= b;
    }
    ObjectWord::new(letters)
}

/// Argument lists of length `beta`: all distinct words, and distinct words
/// interleaved with units.
fn argument_lists(beta: usize) -> Vec<Vec<ObjectWord>> {
    let objects = ["A", "B"];
    let distinct: Vec<ObjectWord> = (0..beta).map(|k| nth_word(&objects, k)).collect();
    let with_units = (0..beta)
        .map(|k| {
            if k % 3 == 1 {
                ObjectWord::unit()
            } else {
                nth_word(&objects, k)
            }
        })
        .collect();
    vec![distinct, with_units]
}

/// Every way to give part `i` of `outer` an inner partition, using at most
/// `budget` inner parts in total.
fn inner_choices(outer: &Partition, budget: usize) -> Vec<Vec<Partition>> {
    fn go(parts: &[usize], budget: usize, acc: &mut Vec<Partition>, out: &mut Vec<Vec<Partition>>) {
        let Some((&p, rest)) = parts.split_first() else {
            out.push(acc.clone());
            return;
        };
        for delta in 0..=budget {
            for inner in enumerate_partitions(p, delta) {
                acc.push(inner);
                go(rest, budget - delta, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(outer.parts(), budget, &mut Vec::new(), &mut out);
    out
}

fn tensor_blocks(p: &Partition, args: &[ObjectWord]) -> Vec<ObjectWord> {
    p.split(args).into_iter().map(fold_tensor).collect()
}

/// Checks, on object words, that every route through the n-ary tensors
/// agrees: `T_γ ∘ ∏ T_{p_i} = T_β` for every partition `p` of `β ≤ α` into
/// `γ ≤ α` parts, and for every double partition the nested route, the
/// flattened route and `T_β` all coincide. Also checks `T_1 = id`.
pub fn check_coherence(max_alpha: usize) -> CoherenceReport {
    let mut report = CoherenceReport::default();
    let mut expect = |label: &dyn Fn() -> String, lhs: &ObjectWord, rhs: &ObjectWord| {
        report.checked += 1;
        if lhs != rhs {
            report
                .counterexamples
                .push(format!("{}: {} vs {}", label(), lhs, rhs));
        }
    };
    for beta in 0..=max_alpha {
        for args in argument_lists(beta) {
            let direct = fold_tensor(&args);
            for w in &args {
                expect(
                    &|| format!("unit law on {w}"),
                    &fold_tensor(std::slice::from_ref(w)),
                    w,
                );
            }
            for gamma in 0..=max_alpha {
                for p in enumerate_partitions(beta, gamma) {
                    let outer_route = fold_tensor(&tensor_blocks(&p, &args));
                    expect(&|| format!("partition {p}"), &outer_route, &direct);
                    for inners in inner_choices(&p, max_alpha) {
                        let dp = DoublePartition::new(p.clone(), inners)
                            .expect("inner totals match by construction");
                        let blocks = p.split(&args);
                        let nested: Vec<ObjectWord> = dp
                            .inners()
                            .iter()
                            .zip(blocks)
                            .map(|(q, block)| fold_tensor(&tensor_blocks(q, block)))
                            .collect();
                        let nested = fold_tensor(&nested);
                        let flat = fold_tensor(&tensor_blocks(&flatten(&dp), &args));
                        let label = || format!("double partition {p} / {:?}", dp.inners());
                        expect(&label, &nested, &direct);
                        expect(&label, &flat, &direct);
                    }
                }
            }
        }
    }
    report
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InterchangeReport {
    pub trials: usize,
    pub failures: Vec<String>,
}

fn random_word(rng: &mut ChaCha8Rng, sig: &Signature) -> ObjectWord {
    let len = rng.gen_range(0..=2);
    ObjectWord::new((0..len).map(|_| {
        sig.objects()
            .choose(rng)
            .expect("signature has objects")
            .clone()
    }))
}

/// A generator or identity, starting at `dom` when given.
fn random_morphism(
    rng: &mut ChaCha8Rng,
    sig: &Signature,
    dom: Option<&ObjectWord>,
) -> (Factor, ObjectWord) {
    let mut options: Vec<(Factor, ObjectWord)> = sig
        .gens()
        .iter()
        .filter(|g| dom.is_none_or(|d| g.dom == *d))
        .map(|g| (Factor::gen(&g.name), g.cod.clone()))
        .collect();
    let id = dom.cloned().unwrap_or_else(|| random_word(rng, sig));
    options.push((Factor::IdOn(id.clone()), id));
    options
        .choose(rng)
        .expect("identity is always an option")
        .clone()
}

/// Samples composable `f, g` and `h, j` and compares `(g∘f) ⊗ (j∘h)` with
/// `(g ⊗ j) ∘ (f ⊗ h)` exactly. Deterministic in `seed`.
pub fn check_interchange(
    sig: &Signature,
    model: &MatrixModel,
    trials: usize,
    seed: u64,
) -> Result<InterchangeReport, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = InterchangeReport {
        trials,
        failures: Vec::new(),
    };
    let dom = |f: &Factor| {
        sig.factor_dom_cod(f)
            .map(|(d, _)| d)
            .expect("sampled from the signature")
    };
    for trial in 0..trials {
        let (f, f_cod) = random_morphism(&mut rng, sig, None);
        let (g, _) = random_morphism(&mut rng, sig, Some(&f_cod));
        let (h, h_cod) = random_morphism(&mut rng, sig, None);
        let (j, _) = random_morphism(&mut rng, sig, Some(&h_cod));
        let column = |a: &Factor, b: &Factor| {
            LayeredTerm::new(sig, dom(a), vec![vec![a.clone()], vec![b.clone()]])
                .expect("composable by construction")
        };
        let (gf, jh) = (column(&f, &g), column(&h, &j));
        let left = eval_term(model, &gf)?.kron(&eval_term(model, &jh)?);
        let right = eval_term(model, &gf.tensor(&jh))?;
        if left != right {
            report
                .failures
                .push(format!("trial {trial}: f={f} g={g} h={h} j={j}"));
        }
    }
    Ok(report)
}
