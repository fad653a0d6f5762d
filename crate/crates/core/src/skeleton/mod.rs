//! Dyadic skeletonization of layer-to-base conversions.
//!
//! Layers are grouped into blocks of `b` consecutive orders. Inside a block every layer is
//! carried to the block base by Givens rotations generated on the fly. Block bases are
//! connected by precomputed layer decompositions arranged as a binary tree: block `s`
//! sends its data to block `s − lowbit(s)`, so every path to block 0 has at most
//! ⌈log₂ J⌉ decompositions for J blocks.

mod coeffs;

use std::time::Instant;

use rayon::prelude::*;

pub use coeffs::{CoefficientBlock, Layout, Representation};

use crate::dc::DcOptions;
use crate::error::{Error, Result};
use crate::gevp::{default_buffer, layer_decomposition, Connection, SolverPath};
use crate::givens::GivensSequence;
use crate::linalg::DenseMatrix;
use crate::scalar::Real;
use crate::special::{GeometryKind, JacobiParams};

const COLUMN_CHUNK: usize = 32;

/// Block size policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockSize {
    Auto,
    Fixed(usize),
}

/// Direction of execution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    ToBase,
    FromBase,
}

/// Per-node solver diagnostics, available for nodes computed in this process.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeDiagnostics<T> {
    pub residual: T,
    pub trim_decay: T,
    pub eigenvalue_error: T,
    pub path: SolverPath,
    pub seconds: f64,
}

/// Numeric payload of a tree node.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeData<T> {
    pub eigenvalues: Vec<T>,
    /// `(section + step) × section` connection block.
    pub u: DenseMatrix<T>,
    pub diagnostics: Option<NodeDiagnostics<T>>,
}

impl<T: Real> NodeData<T> {
    pub fn storage_bytes(&self) -> u64 {
        (std::mem::size_of::<T>() * (self.eigenvalues.len() + self.u.rows() * self.u.cols())) as u64
    }
}

/// One arrow of the dyadic tree.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanNode<T> {
    pub family: usize,
    pub level: u32,
    pub source_block: usize,
    pub target_block: usize,
    pub source: usize,
    pub target: usize,
    pub section: usize,
    pub buffer: usize,
    pub data: Option<NodeData<T>>,
}

/// Skeleton and (after [`TransformPlan::precompute`]) numerics of a transform.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformPlan<T> {
    kind: GeometryKind<T>,
    degree: usize,
    block: usize,
    blocks: usize,
    nodes: Vec<PlanNode<T>>,
}

/// Execution counters.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExecStats {
    pub rotations: u64,
    pub node_flops: u64,
    pub seconds: f64,
}

/// Structural and measured costs of a plan.
#[derive(Clone, Debug, PartialEq)]
pub struct CostReport {
    pub kind: &'static str,
    pub degree: usize,
    pub block: usize,
    pub blocks: usize,
    pub levels: u32,
    pub families: usize,
    pub decompositions: usize,
    pub decompositions_per_family: usize,
    /// Σ_{i=1}^{levels} 2^{i−1}.
    pub dyadic_sum: usize,
    pub max_path_length: usize,
    /// Rotations applied by one execution.
    pub givens_rotations: u64,
    /// Rotations applied by the all-Givens path.
    pub all_givens_rotations: u64,
    /// Multiply-adds ×2 spent in node products by one execution.
    pub node_flops: u64,
    pub storage_bytes: u64,
    pub node_storage_bytes: Vec<u64>,
    pub node_seconds: Vec<f64>,
    /// Σ (N + p)³ over nodes.
    pub precompute_work: f64,
}

fn lowbit(s: usize) -> usize {
    s & s.wrapping_neg()
}

fn ceil_log2(j: usize) -> u32 {
    if j <= 1 {
        0
    } else {
        usize::BITS - (j - 1).leading_zeros()
    }
}

/// Automatic block size: round(√n), at least 2, even for sphere and disk, and n once it
/// reaches n.
pub fn auto_block(layout: Layout, n: usize) -> usize {
    let mut b = ((n as f64).sqrt().round() as usize).max(2);
    if layout != Layout::Triangle && b % 2 == 1 {
        b += 1;
    }
    b.min(n).max(1)
}

/// Rotations needed to carry one layer from `source` down to `target` at degree `n`.
pub fn givens_rotation_count(layout: Layout, n: usize, target: usize, source: usize) -> u64 {
    if source <= target {
        return 0;
    }
    let n0 = layout.layer_len(n, source) as u64;
    match layout {
        Layout::Sphere => {
            let k = ((source - target) / 2) as u64;
            k * n0 + k * k.saturating_sub(1)
        }
        Layout::Disk => {
            let k = ((source - target) / 2) as u64;
            k * n0 + k * k.saturating_sub(1) / 2
        }
        Layout::Triangle => {
            let k = (source - target) as u64;
            k * n0 + k * k.saturating_sub(1) / 2
        }
    }
}

/// Builds the plan skeleton (no numerics).
pub fn build_plan<T: Real>(kind: GeometryKind<T>, degree: usize, block: BlockSize) -> Result<TransformPlan<T>> {
    if degree == 0 {
        return Err(Error::InvalidParameter("degree must be at least 1".into()));
    }
    if let GeometryKind::Triangle { alpha, beta, gamma } = kind {
        GeometryKind::triangle(alpha, beta, gamma)?;
    }
    let layout = Layout::of(&kind);
    let b = match block {
        BlockSize::Auto => auto_block(layout, degree),
        BlockSize::Fixed(b) => {
            if b == 0 || b > degree {
                return Err(Error::InvalidParameter(format!("block size {b} must lie in 1..={degree}")));
            }
            if layout != Layout::Triangle && b < degree && b % 2 == 1 {
                return Err(Error::InvalidParameter(format!(
                    "block size {b} must be even for {} transforms",
                    layout.name()
                )));
            }
            b
        }
    };
    let blocks = degree.div_ceil(b).max(1);
    let mut plan = TransformPlan { kind, degree, block: b, blocks, nodes: Vec::new() };
    let levels = plan.levels();
    for family in plan.families() {
        for s in 1..blocks {
            let t = s - lowbit(s);
            let source = plan.base_order(family, s);
            let target = plan.base_order(family, t);
            let section = layout.layer_len(degree, source);
            let conn = plan.connection(target, source)?;
            plan.nodes.push(PlanNode {
                family,
                level: levels - lowbit(s).trailing_zeros(),
                source_block: s,
                target_block: t,
                source,
                target,
                section,
                buffer: default_buffer(section, conn.step()),
                data: None,
            });
        }
    }
    Ok(plan)
}

impl<T: Real> TransformPlan<T> {
    pub fn kind(&self) -> &GeometryKind<T> {
        &self.kind
    }

    pub fn layout(&self) -> Layout {
        Layout::of(&self.kind)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn levels(&self) -> u32 {
        ceil_log2(self.blocks)
    }

    pub fn nodes(&self) -> &[PlanNode<T>] {
        &self.nodes
    }

    pub fn families(&self) -> Vec<usize> {
        match self.layout() {
            Layout::Triangle => vec![0],
            _ => vec![0, 1],
        }
    }

    pub fn family_of(&self, order: usize) -> usize {
        match self.layout() {
            Layout::Triangle => 0,
            _ => order % 2,
        }
    }

    pub fn block_of(&self, order: usize) -> usize {
        (order / self.block).min(self.blocks - 1)
    }

    pub fn base_order(&self, family: usize, block: usize) -> usize {
        block * self.block + family
    }

    /// Blocks visited from the block of `order` down to block 0 (excluding block 0).
    pub fn path(&self, order: usize) -> Vec<usize> {
        let mut s = self.block_of(order);
        let mut p = Vec::new();
        while s > 0 {
            p.push(s);
            s -= lowbit(s);
        }
        p
    }

    pub fn decomposition_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_precomputed(&self) -> bool {
        self.nodes.iter().all(|n| n.data.is_some())
    }

    fn node_index(&self, family: usize, s: usize) -> usize {
        let pos = self.families().iter().position(|&f| f == family).expect("family");
        pos * (self.blocks - 1) + (s - 1)
    }

    /// Connection from layer `source` down to layer `target`.
    pub fn connection(&self, target: usize, source: usize) -> Result<Connection<T>> {
        match self.kind {
            GeometryKind::Sphere => Connection::sphere(target, source),
            GeometryKind::Disk => Connection::jacobi(
                JacobiParams::new(T::zero(), T::of(target))?,
                JacobiParams::new(T::zero(), T::of(source))?,
            ),
            GeometryKind::Triangle { alpha, beta, gamma } => {
                let first = |m: usize| T::lit(2.0) * T::of(m) + beta + gamma + T::one();
                Connection::jacobi(JacobiParams::new(first(target), alpha)?, JacobiParams::new(first(source), alpha)?)
            }
        }
    }

    /// Sets the buffer of every node and discards computed numerics.
    pub fn set_buffer(&mut self, buffer: usize) {
        for n in &mut self.nodes {
            n.buffer = buffer;
            n.data = None;
        }
    }

    /// Attaches numeric data to node `index` (used when loading plans).
    pub(crate) fn set_node_data(&mut self, index: usize, buffer: usize, data: NodeData<T>) -> Result<()> {
        let (target, source) = match self.nodes.get(index) {
            Some(n) => (n.target, n.source),
            None => return Err(Error::Corrupt(format!("node {index} out of range"))),
        };
        let step = self.connection(target, source)?.step();
        let node = &mut self.nodes[index];
        if data.u.cols() != node.section || data.u.rows() != node.section + step || data.eigenvalues.len() != node.section {
            return Err(Error::Corrupt(format!("node {index} payload has the wrong shape")));
        }
        node.buffer = buffer;
        node.data = Some(data);
        Ok(())
    }

    /// Computes every missing layer decomposition, in parallel over nodes.
    pub fn precompute(&mut self, opts: &DcOptions<T>) -> Result<()> {
        let conns: Vec<Connection<T>> =
            self.nodes.iter().map(|n| self.connection(n.target, n.source)).collect::<Result<_>>()?;
        let results: Vec<Result<()>> = self
            .nodes
            .par_iter_mut()
            .zip(conns.par_iter())
            .map(|(node, conn)| {
                if node.data.is_some() {
                    return Ok(());
                }
                let start = Instant::now();
                let d = layer_decomposition(conn, node.section, node.buffer, opts).map_err(|e| Error::NodeFailure {
                    target_order: node.target,
                    source_order: node.source,
                    section: node.section,
                    buffer: node.buffer,
                    cause: Box::new(e),
                })?;
                let seconds = start.elapsed().as_secs_f64();
                log::debug!(
                    "node {} -> {} N={} p={} residual={:e} in {:.3}s",
                    node.source,
                    node.target,
                    node.section,
                    node.buffer,
                    d.residual.to_f64().unwrap_or(f64::NAN),
                    seconds
                );
                node.data = Some(NodeData {
                    eigenvalues: d.eigenvalues,
                    u: d.u,
                    diagnostics: Some(NodeDiagnostics {
                        residual: d.residual,
                        trim_decay: d.trim_decay,
                        eigenvalue_error: d.eigenvalue_error,
                        path: d.path,
                        seconds,
                    }),
                });
                Ok(())
            })
            .collect();
        results.into_iter().collect()
    }

    fn within_block(&self, order: usize) -> Result<Vec<GivensSequence<T>>> {
        let base = self.base_order(self.family_of(order), self.block_of(order));
        if base == order {
            return Ok(Vec::new());
        }
        Ok(self.connection(base, order)?.givens_sequences(self.layout().layer_len(self.degree, order)))
    }

    /// Runs the transform in the given direction.
    pub fn execute(&self, coeffs: &CoefficientBlock<T>, direction: Direction) -> Result<(CoefficientBlock<T>, ExecStats)> {
        if !self.is_precomputed() {
            return Err(Error::InvalidParameter("plan has not been precomputed".into()));
        }
        if coeffs.degree() != self.degree || coeffs.layout() != self.layout() {
            return Err(Error::DataMismatch(format!(
                "plan is {} of degree {}, coefficients are {} of degree {}",
                self.layout().name(),
                self.degree,
                coeffs.layout().name(),
                coeffs.degree()
            )));
        }
        let start = Instant::now();
        let mut stats = match direction {
            Direction::ToBase => {
                coeffs.check_support(Representation::Native)?;
                self.run_to_base(coeffs)
            }
            Direction::FromBase => {
                coeffs.check_support(Representation::Base)?;
                self.run_from_base(coeffs)
            }
        }?;
        stats.1.seconds = start.elapsed().as_secs_f64();
        Ok(stats)
    }

    pub fn to_base(&self, coeffs: &CoefficientBlock<T>) -> Result<CoefficientBlock<T>> {
        Ok(self.execute(coeffs, Direction::ToBase)?.0)
    }

    pub fn from_base(&self, coeffs: &CoefficientBlock<T>) -> Result<CoefficientBlock<T>> {
        Ok(self.execute(coeffs, Direction::FromBase)?.0)
    }

    fn column_orders(&self) -> Vec<usize> {
        let layout = self.layout();
        (0..layout.columns(self.degree)).map(|c| layout.column_order(c).unsigned_abs() as usize).collect()
    }

    fn run_to_base(&self, coeffs: &CoefficientBlock<T>) -> Result<(CoefficientBlock<T>, ExecStats)> {
        let layout = self.layout();
        let orders = self.column_orders();
        let carried: Vec<Result<(Vec<T>, u64)>> = orders
            .par_iter()
            .enumerate()
            .map(|(c, &order)| {
                let mut v = coeffs.read_layer(c, order);
                let mut rotations = 0u64;
                for seq in self.within_block(order)? {
                    v.resize(seq.rows(), T::zero());
                    seq.forward_in_place(&mut v);
                    rotations += seq.rotation_count() as u64;
                }
                Ok((v, rotations))
            })
            .collect();
        let mut state = Vec::with_capacity(orders.len());
        let mut stats = ExecStats::default();
        for r in carried {
            let (v, rot) = r?;
            stats.rotations += rot;
            state.push(v);
        }
        let mut at: Vec<usize> = orders.iter().map(|&o| self.block_of(o)).collect();
        for s in (1..self.blocks).rev() {
            for family in self.families() {
                let node = &self.nodes[self.node_index(family, s)];
                let u = &node.data.as_ref().expect("precomputed").u;
                let cols: Vec<usize> =
                    (0..orders.len()).filter(|&c| at[c] == s && self.family_of(orders[c]) == family).collect();
                stats.node_flops += 2 * (u.rows() * u.cols() * cols.len()) as u64;
                apply_to_columns(u, &cols, &mut state);
                for &c in &cols {
                    at[c] = node.target_block;
                }
            }
        }
        let mut out = CoefficientBlock::zeros(layout, self.degree);
        for (c, v) in state.iter().enumerate() {
            out.write_layer(c, layout.base_order(orders[c]), v);
        }
        Ok((out, stats))
    }

    fn run_from_base(&self, coeffs: &CoefficientBlock<T>) -> Result<(CoefficientBlock<T>, ExecStats)> {
        let layout = self.layout();
        let orders = self.column_orders();
        let mut state: Vec<Vec<T>> =
            orders.iter().enumerate().map(|(c, &o)| coeffs.read_layer(c, layout.base_order(o))).collect();
        let paths: Vec<Vec<usize>> = orders.iter().map(|&o| self.path(o)).collect();
        let mut stats = ExecStats::default();
        for s in 1..self.blocks {
            for family in self.families() {
                let node = &self.nodes[self.node_index(family, s)];
                let ut = node.data.as_ref().expect("precomputed").u.transpose();
                let cols: Vec<usize> = (0..orders.len())
                    .filter(|&c| self.family_of(orders[c]) == family && paths[c].contains(&s))
                    .collect();
                stats.node_flops += 2 * (ut.rows() * ut.cols() * cols.len()) as u64;
                apply_to_columns(&ut, &cols, &mut state);
            }
        }
        let carried: Vec<Result<(Vec<T>, u64)>> = orders
            .par_iter()
            .zip(state.into_par_iter())
            .map(|(&order, mut v)| {
                let mut rotations = 0u64;
                for seq in self.within_block(order)?.iter().rev() {
                    seq.inverse_in_place(&mut v[..seq.rows()]);
                    v.truncate(seq.cols());
                    rotations += seq.rotation_count() as u64;
                }
                Ok((v, rotations))
            })
            .collect();
        let mut out = CoefficientBlock::zeros(layout, self.degree);
        for (c, r) in carried.into_iter().enumerate() {
            let (v, rot) = r?;
            stats.rotations += rot;
            out.write_layer(c, orders[c], &v);
        }
        Ok((out, stats))
    }

    /// Rotations applied by the all-Givens path (every layer carried straight to its base).
    pub fn all_givens_rotations(&self) -> u64 {
        let layout = self.layout();
        self.column_orders()
            .iter()
            .map(|&o| givens_rotation_count(layout, self.degree, layout.base_order(o), o))
            .sum()
    }

    /// Rotations applied inside blocks by one execution.
    pub fn block_givens_rotations(&self) -> u64 {
        let layout = self.layout();
        self.column_orders()
            .iter()
            .map(|&o| {
                let base = self.base_order(self.family_of(o), self.block_of(o));
                givens_rotation_count(layout, self.degree, base, o)
            })
            .sum()
    }

    pub fn cost_report(&self) -> CostReport {
        let orders = self.column_orders();
        let mut node_flops = 0u64;
        for node in &self.nodes {
            let through = orders
                .iter()
                .filter(|&&o| self.family_of(o) == node.family && self.path(o).contains(&node.source_block))
                .count() as u64;
            let rows = self.layout().layer_len(self.degree, node.target) as u64;
            node_flops += 2 * rows * node.section as u64 * through;
        }
        let node_storage_bytes: Vec<u64> =
            self.nodes.iter().map(|n| n.data.as_ref().map_or(0, |d| d.storage_bytes())).collect();
        let levels = self.levels();
        CostReport {
            kind: self.layout().name(),
            degree: self.degree,
            block: self.block,
            blocks: self.blocks,
            levels,
            families: self.families().len(),
            decompositions: self.nodes.len(),
            decompositions_per_family: self.blocks - 1,
            dyadic_sum: (1..=levels).map(|i| 1usize << (i - 1)).sum(),
            max_path_length: (0..=self.degree).map(|o| self.path(o).len()).max().unwrap_or(0),
            givens_rotations: self.block_givens_rotations(),
            all_givens_rotations: self.all_givens_rotations(),
            node_flops,
            storage_bytes: node_storage_bytes.iter().sum(),
            node_storage_bytes,
            node_seconds: self
                .nodes
                .iter()
                .map(|n| n.data.as_ref().and_then(|d| d.diagnostics.as_ref()).map_or(0.0, |d| d.seconds))
                .collect(),
            precompute_work: self.nodes.iter().map(|n| ((n.section + n.buffer) as f64).powi(3)).sum(),
        }
    }
}

/// Replaces `state[c]` by `m · state[c]` for every listed column, in fixed-size chunks.
fn apply_to_columns<T: Real>(m: &DenseMatrix<T>, cols: &[usize], state: &mut [Vec<T>]) {
    if cols.is_empty() {
        return;
    }
    let inputs: Vec<&[T]> = cols.iter().map(|&c| state[c].as_slice()).collect();
    let outputs: Vec<DenseMatrix<T>> = inputs
        .par_chunks(COLUMN_CHUNK)
        .map(|chunk| {
            let mut data = Vec::with_capacity(m.cols() * chunk.len());
            for v in chunk {
                debug_assert_eq!(v.len(), m.cols());
                data.extend_from_slice(v);
            }
            let x = DenseMatrix::from_col_major(m.cols(), chunk.len(), data).expect("shape");
            m.matmul(&x)
        })
        .collect();
    for (chunk, y) in cols.chunks(COLUMN_CHUNK).zip(outputs) {
        for (j, &c) in chunk.iter().enumerate() {
            state[c] = y.col(j).to_vec();
        }
    }
}
