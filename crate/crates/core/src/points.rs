//! Row-major point storage and column-blocked samples.

use std::ops::Range;

use rand::Rng;

use crate::error::{MintError, Result};
use crate::rng;

/// An `n × d` matrix of finite coordinates, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl PointSet {
    pub fn new(data: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(MintError::InvalidInput("dimension must be at least 1".into()));
        }
        if n < 2 {
            return Err(MintError::InvalidInput(format!(
                "need at least 2 points, got {n}"
            )));
        }
        if data.len() != n * d {
            return Err(MintError::InvalidInput(format!(
                "buffer of length {} cannot hold {n} x {d} points",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(MintError::NonFinite {
                row: pos / d,
                col: pos % d,
            });
        }
        Ok(PointSet { data, n, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(MintError::InvalidInput("rows have unequal lengths".into()));
        }
        let data = rows.iter().flatten().copied().collect();
        Self::new(data, rows.len(), d)
    }

    /// One-dimensional point set from a slice of values.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec(), values.len(), 1)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Copy of the columns in `cols`, in order.
    pub fn select_columns(&self, cols: Range<usize>) -> PointSet {
        let width = cols.len();
        let mut data = Vec::with_capacity(self.n * width);
        for r in self.rows() {
            data.extend_from_slice(&r[cols.clone()]);
        }
        PointSet {
            data,
            n: self.n,
            d: width,
        }
    }

    /// Copy of the rows in `rows`.
    pub fn select_rows(&self, rows: Range<usize>) -> Result<PointSet> {
        let data = self.data[rows.start * self.d..rows.end * self.d].to_vec();
        PointSet::new(data, rows.len(), self.d)
    }

    /// Column-wise concatenation `[self | other]`.
    pub fn hstack(&self, other: &PointSet) -> Result<PointSet> {
        if self.n != other.n {
            return Err(MintError::InvalidInput(format!(
                "cannot join point sets with {} and {} rows",
                self.n, other.n
            )));
        }
        let mut data = Vec::with_capacity(self.n * (self.d + other.d));
        for (a, b) in self.rows().zip(other.rows()) {
            data.extend_from_slice(a);
            data.extend_from_slice(b);
        }
        Ok(PointSet {
            data,
            n: self.n,
            d: self.d + other.d,
        })
    }

    /// Indices of rows that coincide exactly with another row, sorted.
    pub fn duplicate_rows(&self) -> Vec<usize> {
        // Adding 0.0 maps -0.0 to 0.0 so that signed zeros compare equal.
        let cmp_rows = |a: usize, b: usize| {
            self.row(a)
                .iter()
                .zip(self.row(b))
                .map(|(x, y)| (x + 0.0).total_cmp(&(y + 0.0)))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        };
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| cmp_rows(a, b));
        let mut dups = Vec::new();
        for w in order.windows(2) {
            if cmp_rows(w[0], w[1]).is_eq() {
                dups.push(w[0]);
                dups.push(w[1]);
            }
        }
        dups.sort_unstable();
        dups.dedup();
        dups
    }

    /// Adds seeded uniform noise of magnitude `1e-10 × range` to every column.
    ///
    /// Meant for real data with tied values; simulated continuous data never needs it.
    pub fn jittered(&self, seed: u64) -> PointSet {
        let mut rng = rng::stream(seed, rng::Domain::Jitter, 0);
        let ranges: Vec<f64> = (0..self.d)
            .map(|j| {
                let (lo, hi) = self
                    .rows()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                        (lo.min(r[j]), hi.max(r[j]))
                    });
                let range = hi - lo;
                if range > 0.0 {
                    range
                } else {
                    1.0
                }
            })
            .collect();
        let mut data = self.data.clone();
        for row in data.chunks_exact_mut(self.d) {
            for (v, range) in row.iter_mut().zip(&ranges) {
                *v += 1e-10 * range * rng.random_range(-1.0..1.0);
            }
        }
        PointSet {
            data,
            n: self.n,
            d: self.d,
        }
    }
}

/// A point set whose columns are partitioned into contiguous blocks
/// (typically an X-block followed by a Y-block).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockedSample {
    points: PointSet,
    blocks: Vec<Range<usize>>,
}

impl BlockedSample {
    pub fn new(points: PointSet, blocks: Vec<Range<usize>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(MintError::InvalidInput("at least one block required".into()));
        }
        let mut next = 0;
        for b in &blocks {
            if b.start != next || b.end <= b.start {
                return Err(MintError::InvalidInput(format!(
                    "blocks must be non-empty, contiguous and in order; got {blocks:?}"
                )));
            }
            next = b.end;
        }
        if next != points.d() {
            return Err(MintError::InvalidInput(format!(
                "blocks cover {next} columns but the sample has {}",
                points.d()
            )));
        }
        if points.n() < 4 {
            return Err(MintError::InvalidInput(format!(
                "need at least 4 observations, got {}",
                points.n()
            )));
        }
        Ok(BlockedSample { points, blocks })
    }

    /// Two-block sample from separate X and Y point sets.
    pub fn from_xy(x: &PointSet, y: &PointSet) -> Result<Self> {
        let joint = x.hstack(y)?;
        Self::new(joint, vec![0..x.d(), x.d()..x.d() + y.d()])
    }

    /// Sample from any number of blocks, joined column-wise.
    pub fn from_blocks(parts: &[PointSet]) -> Result<Self> {
        let (first, rest) = parts
            .split_first()
            .ok_or_else(|| MintError::InvalidInput("no blocks given".into()))?;
        let mut joint = first.clone();
        let mut blocks = vec![0..first.d()];
        for p in rest {
            let start = joint.d();
            joint = joint.hstack(p)?;
            blocks.push(start..joint.d());
        }
        Self::new(joint, blocks)
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.points.n()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, i: usize) -> PointSet {
        self.points.select_columns(self.blocks[i].clone())
    }

    /// Joint sample in which block `j ≥ 1` has its rows reordered by `perms[j - 1]`:
    /// row `i` becomes `(B₀[i], B₁[τ₁(i)], …)`.
    pub fn permuted(&self, perms: &[Vec<usize>]) -> PointSet {
        debug_assert_eq!(perms.len() + 1, self.blocks.len());
        let d = self.points.d();
        let mut data = Vec::with_capacity(self.n() * d);
        for i in 0..self.n() {
            let first = &self.blocks[0];
            data.extend_from_slice(&self.points.row(i)[first.clone()]);
            for (block, perm) in self.blocks[1..].iter().zip(perms) {
                data.extend_from_slice(&self.points.row(perm[i])[block.clone()]);
            }
        }
        PointSet {
            data,
            n: self.n(),
            d,
        }
    }

    /// Joint sample with the last block replaced by `y`.
    pub fn with_last_block(&self, y: &PointSet) -> Result<PointSet> {
        let last = self.blocks.last().expect("non-empty blocks");
        if y.d() != last.len() {
            return Err(MintError::SamplerDimensionMismatch {
                expected: last.len(),
                got: y.d(),
            });
        }
        self.points.select_columns(0..last.start).hstack(y)
    }
}
