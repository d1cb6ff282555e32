//! Exact matrix semantics.
//!
//! A [`MatrixModel`] gives every object generator a dimension and every
//! morphism generator a rational matrix. Words evaluate to the product of
//! their factors' dimensions, layers to the Kronecker product of their
//! factors, and a layered term to `M_k ... M_1`: matrices act on column
//! vectors, so the first layer is applied first.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::readout::LayeredTerm;
use crate::signature::{Factor, ObjectWord, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("no dimension for object `{0}`")]
    UnknownObject(String),
    #[error("no matrix for generator `{0}`")]
    UnknownGenerator(String),
    #[error("dimension of `{0}` must be positive")]
    ZeroDimension(String),
    #[error("`{gen}` needs a {}x{} matrix, found {}x{}", .expected.0, .expected.1, .found.0, .found.1)]
    Shape {
        gen: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("matrix with {rows} rows and {cols} columns cannot hold {len} entries")]
    Ragged {
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("cannot multiply a {}x{} matrix by a {}x{} matrix", .0.0, .0.1, .1.0, .1.1)]
    Mismatch((usize, usize), (usize, usize)),
    #[error("dimension overflow")]
    Overflow,
}

/// A dense matrix of exact rationals, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigRational>) -> Result<Self, ModelError> {
        if entries.len() != rows * cols {
            return Err(ModelError::Ragged {
                rows,
                cols,
                len: entries.len(),
            });
        }
        Ok(RationalMatrix {
            rows,
            cols,
            entries,
        })
    }

    /// Integer entries, row-major. Panics if the length is wrong.
    pub fn from_ints(rows: usize, cols: usize, entries: &[i64]) -> Self {
        let entries = entries
            .iter()
            .map(|&x| BigRational::from_integer(BigInt::from(x)))
            .collect();
        Self::new(rows, cols, entries).expect("entry count matches shape")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            entries: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = BigRational::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.entries[r * self.cols + c]
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    /// `self * rhs`.
    pub fn mul(&self, rhs: &RationalMatrix) -> Result<RationalMatrix, ModelError> {
        if self.cols != rhs.rows {
            return Err(ModelError::Mismatch(self.shape(), rhs.shape()));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * rhs.cols + j] += product(a, b);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &RationalMatrix) -> RationalMatrix {
        let (rows, cols) = (self.rows * rhs.rows, self.cols * rhs.cols);
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        let b = rhs.get(k, l);
                        if !b.is_zero() {
                            out.entries[(i * rhs.rows + k) * cols + j * rhs.cols + l] =
                                product(a, b);
                        }
                    }
                }
            }
        }
        out
    }
}

fn product(a: &BigRational, b: &BigRational) -> BigRational {
    if a.is_integer() && b.is_integer() {
        BigRational::from_integer(a.numer() * b.numer())
    } else {
        a * b
    }
}

impl fmt::Display for RationalMatrix {
    /// Rows as comma-separated entries, each row terminated by `;`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            if r > 0 {
                f.write_str(" ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
            f.write_str(";")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatrixModel {
    dims: BTreeMap<String, usize>,
    mats: BTreeMap<String, RationalMatrix>,
}

impl MatrixModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_dim(&mut self, object: &str, dim: usize) -> Result<(), ModelError> {
        if dim == 0 {
            return Err(ModelError::ZeroDimension(object.to_owned()));
        }
        self.dims.insert(object.to_owned(), dim);
        Ok(())
    }

    pub fn set_mat(&mut self, gen: &str, m: RationalMatrix) {
        self.mats.insert(gen.to_owned(), m);
    }

    pub fn dims(&self) -> &BTreeMap<String, usize> {
        &self.dims
    }

    pub fn mats(&self) -> &BTreeMap<String, RationalMatrix> {
        &self.mats
    }

    pub fn mat(&self, gen: &str) -> Result<&RationalMatrix, ModelError> {
        self.mats
            .get(gen)
            .ok_or_else(|| ModelError::UnknownGenerator(gen.to_owned()))
    }

    /// Checks that every generator of `sig` has a matrix of the right shape.
    pub fn check_covers(&self, sig: &Signature) -> Result<(), ModelError> {
        for g in sig.gens() {
            let expected = (eval_word(self, &g.cod)?, eval_word(self, &g.dom)?);
            let found = self.mat(&g.name)?.shape();
            if expected != found {
                return Err(ModelError::Shape {
                    gen: g.name.clone(),
                    expected,
                    found,
                });
            }
        }
        Ok(())
    }
}

/// Product of the factors' dimensions; the empty word has dimension 1.
pub fn eval_word(model: &MatrixModel, w: &ObjectWord) -> Result<usize, ModelError> {
    w.factors().iter().try_fold(1usize, |acc, o| {
        let d = *model
            .dims
            .get(o)
            .ok_or_else(|| ModelError::UnknownObject(o.clone()))?;
        acc.checked_mul(d).ok_or(ModelError::Overflow)
    })
}

pub fn eval_factor(model: &MatrixModel, f: &Factor) -> Result<RationalMatrix, ModelError> {
    match f {
        Factor::Gen(name) => model.mat(name).cloned(),
        Factor::IdOn(w) => Ok(RationalMatrix::identity(eval_word(model, w)?)),
    }
}

/// Kronecker product of a layer's factors, in order.
pub fn eval_layer(model: &MatrixModel, layer: &[Factor]) -> Result<RationalMatrix, ModelError> {
    layer
        .iter()
        .try_fold(RationalMatrix::identity(1), |acc, f| {
            Ok(acc.kron(&eval_factor(model, f)?))
        })
}

pub fn eval_term(model: &MatrixModel, t: &LayeredTerm) -> Result<RationalMatrix, ModelError> {
    let expected = (eval_word(model, t.cod())?, eval_word(model, t.dom())?);
    let small = |q: &BigRational| {
        if q.is_integer() {
            q.numer().to_i64()
        } else {
            None
        }
    };
    let out = match sparse_product(model, t, small)? {
        Some((shape, entries)) => RationalMatrix {
            rows: shape.0,
            cols: shape.1,
            entries: entries
                .into_iter()
                .map(|x| BigRational::from_integer(BigInt::from(x)))
                .collect(),
        },
        None => {
            let (shape, entries) = sparse_product(model, t, |q: &BigRational| Some(q.clone()))?
                .expect("rational arithmetic does not overflow");
            RationalMatrix {
                rows: shape.0,
                cols: shape.1,
                entries,
            }
        }
    };
    if out.shape() != expected {
        return Err(ModelError::Mismatch(expected, out.shape()));
    }
    Ok(out)
}

/// Exact scalars for [`sparse_product`]; `None` signals overflow.
trait Scalar: Clone + Sized {
    fn nil() -> Self;
    fn unit() -> Self;
    fn vanishes(&self) -> bool;
    fn times(&self, other: &Self) -> Option<Self>;
    fn plus(&self, other: &Self) -> Option<Self>;
}

impl Scalar for i64 {
    fn nil() -> Self {
        0
    }
    fn unit() -> Self {
        1
    }
    fn vanishes(&self) -> bool {
        *self == 0
    }
    fn times(&self, other: &Self) -> Option<Self> {
        self.checked_mul(*other)
    }
    fn plus(&self, other: &Self) -> Option<Self> {
        self.checked_add(*other)
    }
}

impl Scalar for BigRational {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn times(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn plus(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
}

/// Nonzero entries `(row, col, value)` of a matrix.
struct Sparse<T> {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> Sparse<T> {
    fn identity(n: usize) -> Self {
        Sparse {
            rows: n,
            cols: n,
            entries: (0..n).map(|i| (i, i, T::unit())).collect(),
        }
    }

    fn kron(&self, rhs: &Sparse<T>) -> Option<Sparse<T>> {
        let mut entries = Vec::with_capacity(self.entries.len() * rhs.entries.len());
        for (i, j, a) in &self.entries {
            for (k, l, b) in &rhs.entries {
                entries.push((i * rhs.rows + k, j * rhs.cols + l, a.times(b)?));
            }
        }
        Some(Sparse {
            rows: self.rows * rhs.rows,
            cols: self.cols * rhs.cols,
            entries,
        })
    }
}

/// Evaluates `t` by applying each layer, built as a sparse Kronecker
/// product, to a dense accumulator. Returns `Ok(None)` if an entry cannot
/// be converted or the arithmetic overflows.
#[allow(clippy::type_complexity)]
fn sparse_product<T: Scalar>(
    model: &MatrixModel,
    t: &LayeredTerm,
    convert: impl Fn(&BigRational) -> Option<T>,
) -> Result<Option<((usize, usize), Vec<T>)>, ModelError> {
    let n = eval_word(model, t.dom())?;
    let mut rows = n;
    let mut acc = vec![T::nil(); n * n];
    for i in 0..n {
        acc[i * n + i] = T::unit();
    }
    for layer in t.layers() {
        let mut l = Sparse::<T>::identity(1);
        for f in layer {
            let m = match f {
                Factor::IdOn(w) => Sparse::identity(eval_word(model, w)?),
                Factor::Gen(g) => {
                    let m = model.mat(g)?;
                    let mut entries = Vec::new();
                    for r in 0..m.rows {
                        for c in 0..m.cols {
                            let q = m.get(r, c);
                            if !Zero::is_zero(q) {
                                let Some(x) = convert(q) else {
                                    return Ok(None);
                                };
                                entries.push((r, c, x));
                            }
                        }
                    }
                    Sparse {
                        rows: m.rows,
                        cols: m.cols,
                        entries,
                    }
                }
            };
            let Some(next) = l.kron(&m) else {
                return Ok(None);
            };
            l = next;
        }
        if l.cols != rows {
            return Err(ModelError::Mismatch((l.rows, l.cols), (rows, n)));
        }
        let mut out = vec![T::nil(); l.rows * n];
        for (r, c, v) in &l.entries {
            for j in 0..n {
                let x = &acc[c * n + j];
                if x.vanishes() {
                    continue;
                }
                let Some(sum) = v.times(x).and_then(|p| out[r * n + j].plus(&p)) else {
                    return Ok(None);
                };
                out[r * n + j] = sum;
            }
        }
        acc = out;
        rows = l.rows;
    }
    Ok(Some(((rows, n), acc)))
}

/// The built-in two-object signature: `A`, `B` and a few generators.
pub fn default_signature() -> Signature {
    crate::format::parse_signature(include_str!("../data/default.sig"))
        .expect("built-in signature parses")
}

/// The built-in model of [`default_signature`], with `dim A = 2`, `dim B = 3`.
pub fn default_model() -> MatrixModel {
    crate::format::parse_model(include_str!("../data/default.model"))
        .expect("built-in model parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::ObjectWord;

    fn w(s: &[&str]) -> ObjectWord {
        ObjectWord::new(s.iter().copied())
    }

    fn model() -> MatrixModel {
        let mut m = MatrixModel::new();
        m.set_dim("A", 2).unwrap();
        m.set_dim("B", 3).unwrap();
        m.set_mat("swap", RationalMatrix::from_ints(2, 2, &[0, 1, 1, 0]));
        m.set_mat("u", RationalMatrix::from_ints(2, 2, &[1, 2, 3, 4]));
        m
    }

    #[test]
    fn word_dimensions() {
        let m = model();
        assert_eq!(eval_word(&m, &w(&[])).unwrap(), 1);
        assert_eq!(eval_word(&m, &w(&["A"])).unwrap(), 2);
        assert_eq!(eval_word(&m, &w(&["A", "A", "B"])).unwrap(), 12);
        assert_eq!(
            eval_word(&m, &w(&["C"])),
            Err(ModelError::UnknownObject("C".into()))
        );
    }

    #[test]
    fn identity_layer() {
        let t = LayeredTerm::from_layers_unchecked(
            w(&["A"]),
            vec![vec![Factor::IdOn(w(&["A"]))]],
            w(&["A"]),
        );
        assert_eq!(
            eval_term(&model(), &t).unwrap(),
            RationalMatrix::identity(2)
        );
    }

    #[test]
    fn swap_twice_is_identity() {
        let swap = vec![Factor::gen("swap")];
        let t = LayeredTerm::from_layers_unchecked(w(&["A"]), vec![swap.clone(), swap], w(&["A"]));
        assert_eq!(
            eval_term(&model(), &t).unwrap(),
            RationalMatrix::identity(2)
        );
    }

    #[test]
    fn kronecker_with_identity() {
        let layer = [Factor::gen("u"), Factor::IdOn(w(&["A"]))];
        let got = eval_layer(&model(), &layer).unwrap();
        // u ⊗ I2 written out by hand
        let expected =
            RationalMatrix::from_ints(4, 4, &[1, 0, 2, 0, 0, 1, 0, 2, 3, 0, 4, 0, 0, 3, 0, 4]);
        assert_eq!(got, expected);
    }

    #[test]
    fn product_is_column_convention() {
        let a = RationalMatrix::from_ints(2, 2, &[1, 1, 0, 1]);
        let b = RationalMatrix::from_ints(2, 2, &[1, 0, 1, 1]);
        assert_eq!(
            a.mul(&b).unwrap(),
            RationalMatrix::from_ints(2, 2, &[2, 1, 1, 1])
        );
        assert!(a.mul(&RationalMatrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn fractional_entries_fall_back_to_rationals() {
        let model = default_model();
        let layers = vec![
            vec![Factor::gen("g")],
            vec![Factor::gen("k")],
            vec![Factor::gen("f")],
        ];
        let t = LayeredTerm::from_layers_unchecked(w(&["A"]), layers.clone(), w(&["A"]));
        let mut expected = RationalMatrix::identity(2);
        for l in &layers {
            expected = eval_layer(&model, l).unwrap().mul(&expected).unwrap();
        }
        assert_eq!(eval_term(&model, &t).unwrap(), expected);
    }

    #[test]
    fn overflow_falls_back_to_rationals() {
        let mut m = MatrixModel::new();
        m.set_dim("A", 1).unwrap();
        m.set_mat("big", RationalMatrix::from_ints(1, 1, &[1 << 40]));
        let big = vec![Factor::gen("big")];
        let t = LayeredTerm::from_layers_unchecked(w(&["A"]), vec![big; 3], w(&["A"]));
        let expected = BigRational::from_integer(BigInt::from(1u8) << 120usize);
        assert_eq!(eval_term(&m, &t).unwrap().get(0, 0), &expected);
    }

    #[test]
    fn default_model_covers_default_signature() {
        default_model().check_covers(&default_signature()).unwrap();
    }
}
