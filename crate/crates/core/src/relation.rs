//! Dense homogeneous relations over `0..size`.

/// A finite relation stored as a row-major boolean matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Relation {
    size: usize,
    bits: Vec<bool>,
}

impl Relation {
    pub fn empty(size: usize) -> Self {
        Relation {
            size,
            bits: vec![false; size * size],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut r = Self::empty(size);
        for i in 0..size {
            r.insert(i, i);
        }
        r
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.size + b]
    }

    /// Returns true if the pair was not already present.
    #[inline]
    pub fn insert(&mut self, a: usize, b: usize) -> bool {
        let slot = &mut self.bits[a * self.size + b];
        let fresh = !*slot;
        *slot = true;
        fresh
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.contains(a, b) || self.contains(b, a)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.size;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &set)| set)
            .map(move |(k, _)| (k / n, k % n))
    }

    /// Pairs `(a, b)` with `a != b`.
    pub fn strict_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs().filter(|(a, b)| a != b)
    }

    /// Warshall's algorithm, in place.
    pub fn close_transitively(&mut self) {
        let n = self.size;
        for k in 0..n {
            for i in 0..n {
                if !self.contains(i, k) {
                    continue;
                }
                for j in 0..n {
                    if self.contains(k, j) {
                        self.bits[i * n + j] = true;
                    }
                }
            }
        }
    }

    pub fn close_reflexively(&mut self) {
        for i in 0..self.size {
            self.insert(i, i);
        }
    }

    /// First pair `(a, b)`, `a < b`, related in both directions.
    pub fn symmetric_pair(&self) -> Option<(usize, usize)> {
        (0..self.size)
            .flat_map(|a| (a + 1..self.size).map(move |b| (a, b)))
            .find(|&(a, b)| self.contains(a, b) && self.contains(b, a))
    }

    /// Pairs of the strict part that are not implied by transitivity.
    pub fn covering_pairs(&self) -> Vec<(usize, usize)> {
        self.strict_pairs()
            .filter(|&(a, b)| {
                !(0..self.size)
                    .any(|c| c != a && c != b && self.contains(a, c) && self.contains(c, b))
            })
            .collect()
    }
}
