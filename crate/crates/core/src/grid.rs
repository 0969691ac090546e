//! Centered frequency grids and the grid difference `O:K`.
//!
//! Every grid in the crate is addressed by centered multi-indices
//! `k = (k1, k2)` with `k_j ∈ {-⌊N_j/2⌋, …, ⌊(N_j-1)/2⌋}`. Storage is row-major
//! with the second axis fastest; the only conversion between a centered index
//! and a storage offset is `k_j ↦ k_j + ⌊N_j/2⌋` (see [`CenteredGrid::offset`]).

use crate::error::{Result, SlrmError};

/// A two-dimensional multi-index on a centered grid.
pub type Index2 = [i64; 2];

/// Rectangular symmetric index set of extents `(n1, n2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CenteredGrid {
    n1: usize,
    n2: usize,
}

impl CenteredGrid {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(SlrmError::InvalidGrid(format!(
                "extents must be positive, got {n1}x{n2}"
            )));
        }
        Ok(Self { n1, n2 })
    }

    /// Square `n × n` grid.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    /// One-dimensional grid of `n` samples, stored as `n × 1`.
    pub fn line(n: usize) -> Result<Self> {
        Self::new(n, 1)
    }

    pub fn extents(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Smallest index on each axis, `-⌊N/2⌋`.
    pub fn lo(&self) -> Index2 {
        [-((self.n1 / 2) as i64), -((self.n2 / 2) as i64)]
    }

    /// Largest index on each axis, `⌊(N-1)/2⌋`.
    pub fn hi(&self) -> Index2 {
        [((self.n1 - 1) / 2) as i64, ((self.n2 - 1) / 2) as i64]
    }

    pub fn contains(&self, k: Index2) -> bool {
        let (lo, hi) = (self.lo(), self.hi());
        k[0] >= lo[0] && k[0] <= hi[0] && k[1] >= lo[1] && k[1] <= hi[1]
    }

    /// Storage offset of a centered index, if it lies on the grid.
    pub fn offset(&self, k: Index2) -> Option<usize> {
        if self.contains(k) {
            Some(self.offset_unchecked(k))
        } else {
            None
        }
    }

    #[inline]
    pub fn offset_unchecked(&self, k: Index2) -> usize {
        let r = (k[0] + (self.n1 / 2) as i64) as usize;
        let c = (k[1] + (self.n2 / 2) as i64) as usize;
        r * self.n2 + c
    }

    /// Storage offset of `k` reduced periodically onto the grid.
    #[inline]
    pub fn offset_periodic(&self, k: Index2) -> usize {
        let h = [(self.n1 / 2) as i64, (self.n2 / 2) as i64];
        let r = (k[0] + h[0]).rem_euclid(self.n1 as i64) as usize;
        let c = (k[1] + h[1]).rem_euclid(self.n2 as i64) as usize;
        r * self.n2 + c
    }

    /// Inverse of [`offset`](Self::offset).
    #[inline]
    pub fn index_at(&self, offset: usize) -> Index2 {
        let r = offset / self.n2;
        let c = offset % self.n2;
        [
            r as i64 - (self.n1 / 2) as i64,
            c as i64 - (self.n2 / 2) as i64,
        ]
    }

    /// All indices in storage order.
    pub fn indices(&self) -> impl Iterator<Item = Index2> + '_ {
        (0..self.len()).map(move |o| self.index_at(o))
    }
}

/// The set `O:K = { k ∈ O : k + K ⊆ O }` for an outer grid `O` and inner grid `K`.
///
/// Members form a rectangle `[start, start + extents)`; their storage order is
/// row-major and is the row order of every Hankel lift.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridDifference {
    outer: CenteredGrid,
    inner: CenteredGrid,
    start: Index2,
    m1: usize,
    m2: usize,
}

impl GridDifference {
    pub fn new(outer: CenteredGrid, inner: CenteredGrid) -> Result<Self> {
        let (n1, n2) = outer.extents();
        let (k1, k2) = inner.extents();
        if k1 > n1 || k2 > n2 {
            return Err(SlrmError::InvalidGrid(format!(
                "inner grid {k1}x{k2} does not fit in outer grid {n1}x{n2}; O:K is empty"
            )));
        }
        let start = [
            outer.lo()[0] - inner.lo()[0],
            outer.lo()[1] - inner.lo()[1],
        ];
        Ok(Self {
            outer,
            inner,
            start,
            m1: n1 - k1 + 1,
            m2: n2 - k2 + 1,
        })
    }

    pub fn outer(&self) -> CenteredGrid {
        self.outer
    }

    pub fn inner(&self) -> CenteredGrid {
        self.inner
    }

    pub fn start(&self) -> Index2 {
        self.start
    }

    pub fn extents(&self) -> (usize, usize) {
        (self.m1, self.m2)
    }

    pub fn len(&self) -> usize {
        self.m1 * self.m2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: Index2) -> bool {
        k[0] >= self.start[0]
            && k[0] < self.start[0] + self.m1 as i64
            && k[1] >= self.start[1]
            && k[1] < self.start[1] + self.m2 as i64
    }

    /// Position of `k` in member storage order.
    pub fn position(&self, k: Index2) -> Option<usize> {
        if self.contains(k) {
            let r = (k[0] - self.start[0]) as usize;
            let c = (k[1] - self.start[1]) as usize;
            Some(r * self.m2 + c)
        } else {
            None
        }
    }

    pub fn member_at(&self, pos: usize) -> Index2 {
        [
            self.start[0] + (pos / self.m2) as i64,
            self.start[1] + (pos % self.m2) as i64,
        ]
    }

    pub fn members(&self) -> impl Iterator<Item = Index2> + '_ {
        (0..self.len()).map(move |p| self.member_at(p))
    }
}

/// Builds an `n1 × n2` centered grid.
pub fn make_centered_grid(n1: usize, n2: usize) -> Result<CenteredGrid> {
    CenteredGrid::new(n1, n2)
}

/// Computes `outer:inner`.
pub fn grid_difference(outer: CenteredGrid, inner: CenteredGrid) -> Result<GridDifference> {
    GridDifference::new(outer, inner)
}
