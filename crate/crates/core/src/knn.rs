//! Exact k-nearest-neighbour distances under the Euclidean metric.
//!
//! The kd-tree splits at the median of the widest coordinate and stops at
//! leaves of [`LEAF_SIZE`] points. Squared distances are accumulated in
//! coordinate order by one shared routine and the square root is taken once
//! at output, so the tree and the brute-force path return bit-identical
//! distances.

use rayon::prelude::*;

use crate::error::{MintError, Result};
use crate::points::PointSet;

pub const LEAF_SIZE: usize = 16;

/// Below this many query points the per-point loop runs on one thread.
const PARALLEL_QUERY_THRESHOLD: usize = 4096;

/// Search strategy for [`knn_distances_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KnnMethod {
    #[default]
    KdTree,
    BruteForce,
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| {
        let t = x - y;
        acc + t * t
    })
}

/// `rho[i][j]` is the distance from point `i` to its `(j+1)`-th nearest
/// neighbour among the other points.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighbourDistances {
    rho: Vec<f64>,
    n: usize,
    k: usize,
}

impl NeighbourDistances {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Distances from point `i` to its 1st, …, k-th nearest neighbours.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rho[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rho.chunks_exact(self.k)
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Sorted buffer of the `k` smallest squared distances seen so far.
struct KBest {
    k: usize,
    dists: Vec<f64>,
}

impl KBest {
    fn new(k: usize) -> Self {
        KBest {
            k,
            dists: Vec::with_capacity(k + 1),
        }
    }

    fn clear(&mut self) {
        self.dists.clear();
    }

    #[inline]
    fn worst(&self) -> f64 {
        if self.dists.len() < self.k {
            f64::INFINITY
        } else {
            self.dists[self.k - 1]
        }
    }

    #[inline]
    fn offer(&mut self, d: f64) {
        if d >= self.worst() {
            return;
        }
        let pos = self.dists.partition_point(|&x| x <= d);
        self.dists.insert(pos, d);
        self.dists.truncate(self.k);
    }
}

/// Immutable kd-tree over a point set. Safe to query from many threads.
#[derive(Debug, Clone)]
pub struct KdTree {
    coords: Vec<f64>,
    /// `position[i]` is the slot of original row `i` in `coords`.
    position: Vec<usize>,
    nodes: Vec<Node>,
    n: usize,
    d: usize,
}

impl KdTree {
    /// Builds the index. Fails if two rows coincide.
    pub fn build(points: &PointSet) -> Result<Self> {
        let dups = points.duplicate_rows();
        if !dups.is_empty() {
            return Err(MintError::DuplicatePoints(dups));
        }
        let (n, d) = (points.n(), points.d());
        let mut order: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::new();
        build_node(points, &mut order, 0, &mut nodes);

        let mut coords = Vec::with_capacity(n * d);
        let mut position = vec![0; n];
        for (slot, &orig) in order.iter().enumerate() {
            coords.extend_from_slice(points.row(orig));
            position[orig] = slot;
        }
        Ok(KdTree {
            coords,
            position,
            nodes,
            n,
            d,
        })
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    #[inline]
    fn slot(&self, s: usize) -> &[f64] {
        &self.coords[s * self.d..(s + 1) * self.d]
    }

    /// Sorted squared distances from original row `i` to its `k` nearest
    /// other points, written into `best`.
    fn query_row(&self, i: usize, best: &mut KBest) {
        best.clear();
        let own = self.position[i];
        let q = self.slot(own);
        self.search(0, q, own, best);
    }

    fn search(&self, node: usize, q: &[f64], own: usize, best: &mut KBest) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for s in start..end {
                    if s != own {
                        best.offer(sq_dist(q, self.slot(s)));
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = q[dim] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, own, best);
                // Every point across the plane is at least |diff| away along `dim`,
                // and rounding is monotone, so this test never drops a neighbour.
                if diff * diff < best.worst() {
                    self.search(far, q, own, best);
                }
            }
        }
    }

    /// Exact k-NN distances for every indexed point.
    pub fn knn_distances(&self, k: usize) -> Result<NeighbourDistances> {
        check_k(k, self.n)?;
        let run = |i: usize, best: &mut KBest, out: &mut [f64]| {
            self.query_row(i, best);
            for (o, &sq) in out.iter_mut().zip(&best.dists) {
                *o = sq.sqrt();
            }
        };
        let mut rho = vec![0.0; self.n * k];
        if self.n >= PARALLEL_QUERY_THRESHOLD {
            rho.par_chunks_mut(k)
                .enumerate()
                .for_each_init(|| KBest::new(k), |best, (i, out)| run(i, best, out));
        } else {
            let mut best = KBest::new(k);
            for (i, out) in rho.chunks_mut(k).enumerate() {
                run(i, &mut best, out);
            }
        }
        Ok(NeighbourDistances { rho, n: self.n, k })
    }
}

fn build_node(points: &PointSet, idx: &mut [usize], offset: usize, nodes: &mut Vec<Node>) -> usize {
    let me = nodes.len();
    if idx.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: offset,
            end: offset + idx.len(),
        });
        return me;
    }
    let d = points.d();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for &i in idx.iter() {
        for (j, &v) in points.row(i).iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    let dim = (0..d)
        .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a)))
        .unwrap_or(0);
    let mid = idx.len() / 2;
    idx.select_nth_unstable_by(mid, |&a, &b| points.row(a)[dim].total_cmp(&points.row(b)[dim]));
    let value = points.row(idx[mid])[dim];

    nodes.push(Node::Leaf { start: 0, end: 0 });
    let (l, r) = idx.split_at_mut(mid);
    let left = build_node(points, l, offset, nodes);
    let right = build_node(points, r, offset + mid, nodes);
    nodes[me] = Node::Split {
        dim,
        value,
        left,
        right,
    };
    me
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 {
        return Err(MintError::InvalidInput("k must be at least 1".into()));
    }
    if k > n - 1 {
        return Err(MintError::KTooLarge { k, n });
    }
    Ok(())
}

/// Exact distances by full pairwise comparison; O(n²).
pub fn brute_force_knn(points: &PointSet, k: usize) -> Result<NeighbourDistances> {
    check_k(k, points.n())?;
    let dups = points.duplicate_rows();
    if !dups.is_empty() {
        return Err(MintError::DuplicatePoints(dups));
    }
    let n = points.n();
    let mut rho = Vec::with_capacity(n * k);
    let mut all = Vec::with_capacity(n - 1);
    for i in 0..n {
        all.clear();
        all.extend(
            (0..n)
                .filter(|&m| m != i)
                .map(|m| sq_dist(points.row(i), points.row(m))),
        );
        all.select_nth_unstable_by(k - 1, f64::total_cmp);
        let head = &mut all[..k];
        head.sort_unstable_by(f64::total_cmp);
        rho.extend(head.iter().map(|s| s.sqrt()));
    }
    Ok(NeighbourDistances { rho, n, k })
}

/// Exact k-NN distances using the kd-tree.
pub fn knn_distances(points: &PointSet, k: usize) -> Result<NeighbourDistances> {
    knn_distances_with(points, k, KnnMethod::KdTree)
}

pub fn knn_distances_with(
    points: &PointSet,
    k: usize,
    method: KnnMethod,
) -> Result<NeighbourDistances> {
    match method {
        KnnMethod::KdTree => {
            check_k(k, points.n())?;
            KdTree::build(points)?.knn_distances(k)
        }
        KnnMethod::BruteForce => brute_force_knn(points, k),
    }
}
