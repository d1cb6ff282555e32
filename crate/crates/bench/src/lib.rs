//! Fixtures shared by the pipeline benchmarks.

use monodiag::corpus::readout_corpus;
use monodiag::{Diagram, MatrixModel, RationalMatrix};

/// Readout-valid corpus diagrams on up to four nodes.
pub fn diagrams() -> Vec<Diagram> {
    readout_corpus(4)
}

/// An integral model of the corpus signature with `dim A = 2`.
pub fn model() -> MatrixModel {
    let mut m = MatrixModel::new();
    m.set_dim("A", 2).expect("positive dimension");
    m.set_mat("p", RationalMatrix::from_ints(2, 2, &[1, 2, 3, -1]));
    m.set_mat(
        "m",
        RationalMatrix::from_ints(2, 4, &[1, 0, 2, 1, 0, 1, -1, 3]),
    );
    m.set_mat(
        "d",
        RationalMatrix::from_ints(4, 2, &[1, 2, 0, 1, 3, 0, -1, 1]),
    );
    m
}
