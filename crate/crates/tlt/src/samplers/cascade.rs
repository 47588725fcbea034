//! The cascade sampler: exact recursive construction of the leaf local-time
//! field via the Markov property of the root-parametrized local time.
//!
//! Conditional on a vertex carrying local time `u`, its children carry
//! independent Compound Poisson-Exponential draws with parameter `u`, so a
//! depth-first pass reproduces the exact joint leaf law of the walk sampler
//! while visiting only the positive cluster: the `e^{-u}` atom at zero
//! prunes entire subtrees, which is the central performance lever at small
//! `t`.

use crate::error::{Result, TltError};
use crate::field::{FieldSummary, LeafCollector, LocalTimeField, SummaryBuilder};
use crate::rng::RngState;
use crate::samplers::cpe::sample_cpe;
use crate::tree::{TreeShape, VertexId};

fn validate_t(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(TltError::invalid_parameter(format!(
            "root local time must be finite and >= 0, got {t}"
        )));
    }
    Ok(())
}

/// Sample one replica of the leaf field; nonzero leaves stream through the
/// collector in increasing index order. The depth-first pass is iterative
/// with an explicit stack (depth is capped at 48).
pub fn sample_cascade(
    shape: TreeShape,
    t: f64,
    rng: &mut RngState,
    collector: &mut dyn LeafCollector,
) -> Result<FieldSummary> {
    validate_t(t)?;
    let mut builder = SummaryBuilder::new(shape, t);
    let n = shape.n();
    let b = shape.b();
    if t == 0.0 {
        return Ok(builder.finalize());
    }
    if n == 0 {
        // The root is the single leaf.
        collector.leaf(0, t);
        builder.leaf(0, t);
        return Ok(builder.finalize());
    }
    // Stack of vertices with known positive values; children are drawn at
    // expansion time in branch order and pushed reversed so that leaf
    // indices stream in increasing order.
    let mut stack: Vec<(u32, u64, f64)> = Vec::with_capacity(64);
    stack.push((0, 0, t));
    let mut scratch: Vec<f64> = vec![0.0; b as usize];
    while let Some((depth, index, value)) = stack.pop() {
        if depth == n {
            collector.leaf(index, value);
            builder.leaf(index, value);
            continue;
        }
        for slot in scratch.iter_mut() {
            *slot = sample_cpe(rng, value)?;
        }
        for branch in (0..b).rev() {
            let child_value = scratch[branch as usize];
            if child_value > 0.0 {
                stack.push((depth + 1, index * b as u64 + branch as u64, child_value));
            }
        }
    }
    Ok(builder.finalize())
}

/// Dense variant filling every vertex (subject to the dense-depth cap);
/// pruned subtrees stay zero.
pub fn sample_cascade_field(shape: TreeShape, t: f64, rng: &mut RngState) -> Result<LocalTimeField> {
    validate_t(t)?;
    let mut field = LocalTimeField::zeroed(shape)?;
    field.set(VertexId::ROOT, t);
    if t == 0.0 || shape.n() == 0 {
        return Ok(field);
    }
    let b = shape.b();
    let mut stack: Vec<(u32, u64, f64)> = vec![(0, 0, t)];
    let mut scratch: Vec<f64> = vec![0.0; b as usize];
    while let Some((depth, index, value)) = stack.pop() {
        if depth == shape.n() {
            continue;
        }
        for slot in scratch.iter_mut() {
            *slot = sample_cpe(rng, value)?;
        }
        for branch in (0..b).rev() {
            let child_value = scratch[branch as usize];
            if child_value > 0.0 {
                let child = VertexId::new(depth + 1, index * b as u64 + branch as u64);
                field.set(child, child_value);
                stack.push((child.depth, child.index, child_value));
            }
        }
    }
    Ok(field)
}

/// Local times along a single root-to-leaf line: iterate the Compound
/// Poisson-Exponential kernel from `L(x_0) = t`. Componentwise square roots
/// follow the integer-time law of the 0-dimensional Bessel process started
/// at `sqrt(2t)`, scaled by `1/sqrt(2)`.
pub fn sample_line_chain(n: u32, t: f64, rng: &mut RngState) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(TltError::invalid_parameter("line chain needs n >= 1".into()));
    }
    validate_t(t)?;
    let mut out = Vec::with_capacity(n as usize);
    let mut value = t;
    for _ in 0..n {
        value = sample_cpe(rng, value)?;
        out.push(value);
    }
    Ok(out)
}
