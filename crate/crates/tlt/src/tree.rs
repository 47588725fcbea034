//! Geometry of the rooted regular tree: shapes, vertex addressing, ancestry.
//!
//! Vertices are addressed as `(depth, index)` where `index` is read as a
//! base-`b` string of branch choices from the root. Leaf indices therefore
//! run over `[0, b^n)` and the parent of `(d, i)` is `(d-1, i / b)`.

use crate::error::{Result, TltError};
use serde::{Deserialize, Serialize};

/// Maximum admissible `n * log2(b)`: keeps every leaf index (and the total
/// vertex count) comfortably inside 64 bits. The depth-first samplers never
/// materialize the leaf set, so this is an indexing limit, not a memory one.
pub const MAX_LOG2_LEAVES: f64 = 48.0;

/// Dense per-vertex storage (local-time and visit fields) is only allowed up
/// to this depth.
pub const MAX_DENSE_DEPTH: u32 = 16;

/// Branching factor and depth of the regular tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeShape {
    b: u32,
    n: u32,
}

impl TreeShape {
    pub fn new(b: u32, n: u32) -> Result<Self> {
        if b < 2 {
            return Err(TltError::invalid_parameter(format!(
                "branching factor must be >= 2, got {b}"
            )));
        }
        let log2_leaves = n as f64 * (b as f64).log2();
        if log2_leaves > MAX_LOG2_LEAVES {
            return Err(TltError::invalid_parameter(format!(
                "n*log2(b) = {log2_leaves:.1} exceeds the 48-bit leaf index cap (b={b}, n={n})"
            )));
        }
        Ok(TreeShape { b, n })
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of leaves `b^n`.
    pub fn leaf_count(&self) -> u64 {
        (self.b as u64).pow(self.n)
    }

    /// Number of vertices at a given depth.
    pub fn width_at(&self, depth: u32) -> u64 {
        assert!(depth <= self.n);
        (self.b as u64).pow(depth)
    }

    /// Total vertex count `(b^{n+1} - 1) / (b - 1)`.
    pub fn vertex_count(&self) -> u64 {
        ((self.b as u128).pow(self.n + 1) - 1) as u64 / (self.b as u64 - 1)
    }

    /// Offset of the first vertex at `depth` in depth-major dense storage.
    pub fn level_offset(&self, depth: u32) -> u64 {
        ((self.b as u128).pow(depth) - 1) as u64 / (self.b as u64 - 1)
    }

    /// Flat dense index of a vertex.
    pub fn dense_index(&self, v: VertexId) -> usize {
        (self.level_offset(v.depth) + v.index) as usize
    }

    /// Neighbor count in the walk graph: `b` at the root, `b + 1` at internal
    /// vertices, `1` at leaves. The depth-0 tree is a single isolated vertex.
    pub fn degree(&self, depth: u32) -> u32 {
        if self.n == 0 {
            0
        } else if depth == 0 {
            self.b
        } else if depth == self.n {
            1
        } else {
            self.b + 1
        }
    }

    /// Depth of the deepest common ancestor of two leaves, i.e. the length of
    /// the common prefix of their branch strings. Equals `n` on the diagonal.
    pub fn common_ancestor_depth(&self, leaf_a: u64, leaf_b: u64) -> u32 {
        debug_assert!(leaf_a < self.leaf_count() && leaf_b < self.leaf_count());
        let base = self.b as u64;
        let mut a = leaf_a;
        let mut c = leaf_b;
        let mut depth = self.n;
        while a != c {
            a /= base;
            c /= base;
            depth -= 1;
        }
        depth
    }

    /// Common ancestor depth for two arbitrary vertices.
    pub fn common_ancestor_depth_vertices(&self, x: VertexId, y: VertexId) -> u32 {
        let base = self.b as u64;
        let (mut a, mut da) = (x.index, x.depth);
        let (mut c, mut dc) = (y.index, y.depth);
        while da > dc {
            a /= base;
            da -= 1;
        }
        while dc > da {
            c /= base;
            dc -= 1;
        }
        let mut depth = da;
        while a != c {
            a /= base;
            c /= base;
            depth -= 1;
        }
        depth
    }
}

/// A vertex of the tree, addressed by depth and base-`b` branch string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VertexId {
    pub depth: u32,
    pub index: u64,
}

impl VertexId {
    pub const ROOT: VertexId = VertexId { depth: 0, index: 0 };

    pub fn new(depth: u32, index: u64) -> Self {
        VertexId { depth, index }
    }

    pub fn is_root(&self) -> bool {
        self.depth == 0
    }

    pub fn parent(&self, shape: &TreeShape) -> Option<VertexId> {
        if self.depth == 0 {
            None
        } else {
            Some(VertexId {
                depth: self.depth - 1,
                index: self.index / shape.b() as u64,
            })
        }
    }

    pub fn child(&self, shape: &TreeShape, branch: u32) -> VertexId {
        debug_assert!(branch < shape.b());
        debug_assert!(self.depth < shape.n());
        VertexId {
            depth: self.depth + 1,
            index: self.index * shape.b() as u64 + branch as u64,
        }
    }

    /// Ancestor at a shallower depth.
    pub fn ancestor_at(&self, shape: &TreeShape, depth: u32) -> VertexId {
        debug_assert!(depth <= self.depth);
        let mut idx = self.index;
        for _ in depth..self.depth {
            idx /= shape.b() as u64;
        }
        VertexId { depth, index: idx }
    }
}
