//! Field containers: dense per-vertex local times, integer visit counts and
//! per-replica reduced summaries.

use crate::error::{Result, TltError};
use crate::stats::zstats::{FieldStats, FieldStatsAcc};
use crate::tree::{TreeShape, VertexId, MAX_DENSE_DEPTH};
use serde::{Deserialize, Serialize};

/// Receives `(leaf_index, value)` callbacks in increasing index order.
/// Local-time samplers invoke it once per leaf with positive local time and
/// never for pruned leaves; the branching-random-walk sampler invokes it for
/// every leaf.
pub trait LeafCollector {
    fn leaf(&mut self, index: u64, value: f64);
}

/// Discards everything.
pub struct NullCollector;

impl LeafCollector for NullCollector {
    fn leaf(&mut self, _index: u64, _value: f64) {}
}

/// Collects into a vector.
#[derive(Default)]
pub struct VecCollector {
    pub leaves: Vec<(u64, f64)>,
}

impl LeafCollector for VecCollector {
    fn leaf(&mut self, index: u64, value: f64) {
        self.leaves.push((index, value));
    }
}

impl<F: FnMut(u64, f64)> LeafCollector for F {
    fn leaf(&mut self, index: u64, value: f64) {
        self(index, value)
    }
}

/// Dense per-vertex local times of one replica, depth-major.
#[derive(Debug, Clone)]
pub struct LocalTimeField {
    shape: TreeShape,
    values: Vec<f64>,
}

impl LocalTimeField {
    pub fn zeroed(shape: TreeShape) -> Result<Self> {
        if shape.n() > MAX_DENSE_DEPTH {
            return Err(TltError::CapacityExceeded(format!(
                "dense fields are limited to depth {MAX_DENSE_DEPTH}, got {}",
                shape.n()
            )));
        }
        Ok(LocalTimeField {
            shape,
            values: vec![0.0; shape.vertex_count() as usize],
        })
    }

    pub fn shape(&self) -> TreeShape {
        self.shape
    }

    pub fn root_value(&self) -> f64 {
        self.values[0]
    }

    pub fn value(&self, v: VertexId) -> f64 {
        self.values[self.shape.dense_index(v)]
    }

    pub fn set(&mut self, v: VertexId, value: f64) {
        let i = self.shape.dense_index(v);
        self.values[i] = value;
    }

    pub fn leaf_value(&self, leaf_index: u64) -> f64 {
        self.value(VertexId::new(self.shape.n(), leaf_index))
    }

    /// All `(leaf_index, value)` pairs in index order, zeros included.
    pub fn leaves(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        let off = self.shape.level_offset(self.shape.n()) as usize;
        self.values[off..]
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as u64, v))
    }

    /// Local times along the path from depth 1 down to the leaf with the
    /// given index (the root is excluded).
    pub fn path_to_leaf(&self, leaf_index: u64) -> Vec<f64> {
        let n = self.shape.n();
        let leaf = VertexId::new(n, leaf_index);
        (1..=n)
            .map(|d| self.value(leaf.ancestor_at(&self.shape, d)))
            .collect()
    }

    /// Checks that a zero parent never has a positive strict descendant
    /// (local time flows only through the parent).
    pub fn zero_heredity_ok(&self) -> bool {
        for d in 0..self.shape.n() {
            for i in 0..self.shape.width_at(d) {
                let v = VertexId::new(d, i);
                if self.value(v) == 0.0 && !v.is_root() {
                    for br in 0..self.shape.b() {
                        if self.value(v.child(&self.shape, br)) != 0.0 {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Integer visit counts of the embedded jump chain, depth-major. Counts are
/// arrivals including the initial position.
#[derive(Debug, Clone)]
pub struct VisitField {
    shape: TreeShape,
    visits: Vec<u64>,
    total_jumps: u64,
}

impl VisitField {
    pub(crate) fn new(shape: TreeShape, visits: Vec<u64>, total_jumps: u64) -> Self {
        VisitField {
            shape,
            visits,
            total_jumps,
        }
    }

    pub fn shape(&self) -> TreeShape {
        self.shape
    }

    pub fn visits(&self, v: VertexId) -> u64 {
        self.visits[self.shape.dense_index(v)]
    }

    pub fn root_visits(&self) -> u64 {
        self.visits[0]
    }

    pub fn total_jumps(&self) -> u64 {
        self.total_jumps
    }

    pub fn sum_visits(&self) -> u64 {
        self.visits.iter().sum()
    }

    pub(crate) fn raw(&self) -> &[u64] {
        &self.visits
    }
}

/// Per-replica reduced statistics: the leaf maximum, its location, the hit
/// flag, and the log-space statistic values.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FieldSummary {
    /// `max_x sqrt(L(x))` over leaves for local-time fields; the plain leaf
    /// maximum for branching-random-walk fields.
    pub max_sqrt_l: f64,
    /// Lowest leaf index attaining the maximum (ties have probability zero;
    /// the rule guards floating-point coincidences).
    pub argmax_leaf: u64,
    /// Some leaf carries positive local time.
    pub hit: bool,
    pub nonzero_leaves: u64,
    pub stats: FieldStats,
}

impl FieldSummary {
    pub fn miss() -> Self {
        FieldSummary {
            max_sqrt_l: 0.0,
            argmax_leaf: 0,
            hit: false,
            nonzero_leaves: 0,
            stats: FieldStats::default(),
        }
    }

    /// Summarize a dense local-time field. `t` is the root-time parameter
    /// used by the statistics (pass the field's root value for root-started
    /// fields, 0 for leaf-started ones).
    pub fn from_field(field: &LocalTimeField, t: f64) -> Self {
        let mut builder = SummaryBuilder::new(field.shape(), t);
        for (i, v) in field.leaves() {
            if v > 0.0 {
                builder.leaf(i, v);
            }
        }
        builder.finalize()
    }
}

/// Streaming construction of [`FieldSummary`] from nonzero leaves in
/// increasing index order.
pub struct SummaryBuilder {
    max_sqrt_l: f64,
    argmax_leaf: u64,
    nonzero_leaves: u64,
    acc: FieldStatsAcc,
}

impl SummaryBuilder {
    pub fn new(shape: TreeShape, t: f64) -> Self {
        SummaryBuilder {
            max_sqrt_l: 0.0,
            argmax_leaf: 0,
            nonzero_leaves: 0,
            acc: FieldStatsAcc::new(shape, t),
        }
    }

    #[inline]
    pub fn leaf(&mut self, index: u64, value: f64) {
        debug_assert!(value > 0.0);
        self.nonzero_leaves += 1;
        let sq = value.sqrt();
        if sq > self.max_sqrt_l {
            self.max_sqrt_l = sq;
            self.argmax_leaf = index;
        }
        self.acc.leaf(index, value);
    }

    pub fn finalize(self) -> FieldSummary {
        let hit = self.nonzero_leaves > 0;
        FieldSummary {
            max_sqrt_l: self.max_sqrt_l,
            argmax_leaf: if hit { self.argmax_leaf } else { 0 },
            hit,
            nonzero_leaves: self.nonzero_leaves,
            stats: self.acc.finalize(hit),
        }
    }
}
