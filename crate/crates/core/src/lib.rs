//! Algebraic monoidal diagrams over a free strict monoidal signature.
//!
//! A [`Diagram`] is validated against the diagram axioms, segmented into
//! layers, resolved so that no edge skips a layer, and read out as a
//! [`LayeredTerm`]. A [`MatrixModel`] evaluates terms to exact rational
//! matrices, which is how the categorical laws are checked.

mod relation;

pub mod corpus;
pub mod diagram;
pub mod format;
pub mod iso;
pub mod layering;
pub mod readout;
pub mod resolution;
pub mod semantics;
pub mod signature;
pub mod unbiased;

pub use diagram::{
    Diagram, DiagramBuilder, DiagramError, Edge, EdgeId, NodeId, NodeRelation, ValidationReport,
    Violation,
};
pub use iso::{canonical_form, diagram_iso, CanonicalForm, NodeBijection};
pub use layering::{layer_order, rank, segmentation, unresolved_edges, LayerError, Segmentation};
pub use readout::{
    attach, check_validity, compose_vertical, reading, readout, readout_functor_check, LayeredTerm,
    ReadoutError, ValidityReport,
};
pub use resolution::{incise, resolve, Incision, ResolutionTrace, ResolveError};
pub use semantics::{eval_term, eval_word, MatrixModel, ModelError, RationalMatrix};
pub use signature::{word_concat, Factor, MorGen, ObjectWord, Signature, SignatureError};
pub use unbiased::{
    check_coherence, check_interchange, derived_tensor, enumerate_partitions, flatten,
    DoublePartition, Partition, TensorArg,
};
