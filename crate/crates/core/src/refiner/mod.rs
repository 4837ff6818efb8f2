//! Greedy quadtree refinement driven by the modified error.
//!
//! Every iteration marks all leaves whose modified error equals the current
//! maximum (bit-exactly) and splits each of them into four congruent children.
//! Leaves whose shorter side is below 16 pixels are never split, so no
//! element ever gets smaller than the 8x8 JPEG grid. The loop stops once the
//! global error drops to the tolerance, or when the maximum is attained only
//! by leaves that may not be split any further.

mod queue;

pub use queue::{HeapQueue, LeafQueue, ScanQueue};

use alloc::collections::btree_map::{BTreeMap, Entry};
use alloc::vec::Vec;

use crate::estimator::{modified_error_children, ElementError, ErrorNorm, NormKind};
use crate::image::Plane;
use crate::transform::{CoeffBlock, QuantMatrix, TlTransform, BLOCK, QUANT_MATRIX};
use crate::{Error, Result};

/// Smallest side length an element must have to be split.
pub const MIN_SPLIT: usize = 2 * BLOCK;

/// Rectangular pixel block; `row`/`col` is the zero-based top-left pixel and
/// `level` the number of bisections from the full channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    pub row: usize,
    pub col: usize,
    pub height: usize,
    pub width: usize,
    pub level: u8,
}

impl Element {
    pub fn root(height: usize, width: usize) -> Self {
        Self {
            row: 0,
            col: 0,
            height,
            width,
            level: 0,
        }
    }

    pub fn area(&self) -> usize {
        self.height * self.width
    }

    pub fn can_split(&self) -> bool {
        self.height.min(self.width) >= MIN_SPLIT
    }

    /// Position key of the lexicographic element order.
    pub fn origin(&self) -> (usize, usize) {
        (self.row, self.col)
    }

    pub fn contains(&self, other: &Element) -> bool {
        other.row >= self.row
            && other.col >= self.col
            && other.row + other.height <= self.row + self.height
            && other.col + other.width <= self.col + self.width
    }

    pub fn overlaps(&self, other: &Element) -> bool {
        self.row < other.row + other.height
            && other.row < self.row + self.height
            && self.col < other.col + other.width
            && other.col < self.col + self.width
    }
}

/// The four children of `e` in the order top-left, top-right, bottom-left, bottom-right.
pub fn refine_element(e: &Element) -> Result<[Element; 4]> {
    if !e.height.is_multiple_of(2) || !e.width.is_multiple_of(2) {
        return Err(Error::OddDimension {
            height: e.height,
            width: e.width,
        });
    }
    let (h, w) = (e.height / 2, e.width / 2);
    let child = |dr, dc| Element {
        row: e.row + dr,
        col: e.col + dc,
        height: h,
        width: w,
        level: e.level + 1,
    };
    Ok([child(0, 0), child(0, w), child(h, 0), child(h, w)])
}

#[derive(Clone, Debug)]
pub struct Node {
    pub element: Element,
    pub parent: Option<usize>,
    pub first_child: Option<usize>,
    pub error: ElementError,
}

/// Arena-backed quadtree; the leaves form the mesh. Children of a node are
/// stored at four consecutive ids.
#[derive(Clone, Debug)]
pub struct MeshTree {
    nodes: Vec<Node>,
    leaf_count: usize,
}

impl MeshTree {
    pub fn new(height: usize, width: usize) -> Self {
        Self {
            nodes: alloc::vec![Node {
                element: Element::root(height, width),
                parent: None,
                first_child: None,
                error: ElementError::default(),
            }],
            leaf_count: 1,
        }
    }

    pub const ROOT: usize = 0;

    pub fn root(&self) -> &Element {
        &self.nodes[0].element
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        self.nodes[id].first_child.is_none()
    }

    pub fn children(&self, id: usize) -> Option<[usize; 4]> {
        self.nodes[id].first_child.map(|c| [c, c + 1, c + 2, c + 3])
    }

    pub fn set_error(&mut self, id: usize, error: ElementError) {
        self.nodes[id].error = error;
    }

    /// Splits leaf `id` and returns the ids of its children.
    pub fn refine(&mut self, id: usize) -> Result<[usize; 4]> {
        if !self.is_leaf(id) {
            return Err(Error::InvalidParameter("only leaves can be refined"));
        }
        let children = refine_element(&self.nodes[id].element)?;
        let first = self.nodes.len();
        for element in children {
            self.nodes.push(Node {
                element,
                parent: Some(id),
                first_child: None,
                error: ElementError::default(),
            });
        }
        self.nodes[id].first_child = Some(first);
        self.leaf_count += 3;
        Ok([first, first + 1, first + 2, first + 3])
    }

    pub fn leaf_ids(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&id| self.is_leaf(id))
    }

    /// Leaves in lexicographic order of their top-left pixels.
    pub fn leaves(&self) -> Vec<Element> {
        order_elements(self.leaf_ids().map(|id| self.nodes[id].element).collect())
    }

    /// Leaf ids in lexicographic order of their top-left pixels.
    pub fn ordered_leaf_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.leaf_ids().collect();
        ids.sort_by_key(|&id| self.nodes[id].element.origin());
        ids
    }
}

/// Sorts elements by (row, column) of the top-left pixel.
pub fn order_elements(mut elements: Vec<Element>) -> Vec<Element> {
    elements.sort_by_key(|e| e.origin());
    elements
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Why refinement stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// The global error reached the tolerance.
    Tolerance,
    /// The maximal modified error sits on leaves that cannot be split.
    Saturated,
    /// Every leaf was split down to the minimum size.
    Uniform,
}

/// Result of a single refinement iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    /// This many leaves were split.
    Refined(usize),
    Converged,
    Saturated,
}

/// Verifies that a channel can be meshed.
pub fn check_channel(channel: &Plane) -> Result<()> {
    let (h, w) = channel.dims();
    if h < BLOCK || w < BLOCK {
        return Err(Error::TooSmall {
            height: h,
            width: w,
            min: BLOCK,
        });
    }
    if !h.is_power_of_two() || !w.is_power_of_two() {
        return Err(Error::NotPowerOfTwo { height: h, width: w });
    }
    Ok(())
}

/// Computes unquantized element errors with cached partial transforms.
#[derive(Clone, Debug)]
pub struct ElementEstimator<'a> {
    channel: &'a Plane,
    norm: ErrorNorm,
    transforms: BTreeMap<(usize, usize), TlTransform>,
}

impl<'a> ElementEstimator<'a> {
    pub fn new(channel: &'a Plane, norm: ErrorNorm) -> Self {
        Self {
            channel,
            norm,
            transforms: BTreeMap::new(),
        }
    }

    pub fn norm(&self) -> &ErrorNorm {
        &self.norm
    }

    fn transform(&mut self, height: usize, width: usize) -> Result<&TlTransform> {
        Ok(match self.transforms.entry((height, width)) {
            Entry::Occupied(o) => o.into_mut(),
            Entry::Vacant(v) => v.insert(TlTransform::new(height, width)?),
        })
    }

    /// `eta(R)` from the approximation that keeps the top-left 8x8 frequencies.
    pub fn eta(&mut self, e: &Element) -> Result<f64> {
        if e.height <= BLOCK && e.width <= BLOCK {
            // all frequencies are kept
            return Ok(0.0);
        }
        let block = self.channel.sub(e.row, e.col, e.height, e.width);
        let norm = self.norm;
        let approx = self.transform(e.height, e.width)?.approximate(&block);
        norm.local_error(&block, &approx)
    }

    /// Quantized coefficients and the error of their reconstruction.
    pub fn quantize(&mut self, e: &Element, q: &QuantMatrix) -> Result<(CoeffBlock, f64)> {
        let block = self.channel.sub(e.row, e.col, e.height, e.width);
        let norm = self.norm;
        let t = self.transform(e.height, e.width)?;
        let coeffs = t.encode(&block, q);
        let approx = t.decode(&coeffs, q);
        Ok((coeffs, norm.local_error(&block, &approx)?))
    }
}

/// Algorithm state for one channel.
pub struct Refiner<'a, Q: LeafQueue = HeapQueue> {
    estimator: ElementEstimator<'a>,
    tree: MeshTree,
    queue: Q,
    // largest modified error among leaves that cannot be split
    frozen_max: f64,
    sum: CompensatedSum,
    iterations: usize,
}

impl<'a> Refiner<'a, HeapQueue> {
    pub fn new(channel: &'a Plane, kind: NormKind) -> Result<Self> {
        Self::with_queue(channel, kind, HeapQueue::new())
    }
}

impl<'a, Q: LeafQueue> Refiner<'a, Q> {
    pub fn with_queue(channel: &'a Plane, kind: NormKind, queue: Q) -> Result<Self> {
        check_channel(channel)?;
        let (h, w) = channel.dims();
        let mut r = Self {
            estimator: ElementEstimator::new(channel, ErrorNorm::new(kind, h, w)),
            tree: MeshTree::new(h, w),
            queue,
            frozen_max: f64::NEG_INFINITY,
            sum: CompensatedSum::default(),
            iterations: 0,
        };
        let eta = r.estimator.eta(r.tree.root())?;
        r.insert(MeshTree::ROOT, ElementError::root(eta));
        Ok(r)
    }

    fn contribution(&self, eta: f64) -> f64 {
        match self.estimator.norm.kind() {
            NormKind::L2 => eta * eta,
            NormKind::Bv => eta,
        }
    }

    fn insert(&mut self, id: usize, error: ElementError) {
        self.tree.set_error(id, error);
        self.sum.add(self.contribution(error.eta));
        if self.tree.node(id).element.can_split() {
            self.queue.push(id, error.eta_tilde);
        } else {
            self.frozen_max = self.frozen_max.max(error.eta_tilde);
        }
    }

    pub fn tree(&self) -> &MeshTree {
        &self.tree
    }

    pub fn into_tree(self) -> MeshTree {
        self.tree
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn norm(&self) -> &ErrorNorm {
        self.estimator.norm()
    }

    /// Global error from the running sum.
    pub fn error(&self) -> f64 {
        let s = self.sum.value().max(0.0);
        match self.estimator.norm.kind() {
            NormKind::L2 => libm::sqrt(s),
            NormKind::Bv => s,
        }
    }

    /// Global error recomputed from the leaves.
    pub fn exact_error(&self) -> f64 {
        let etas: Vec<f64> = self.tree.leaf_ids().map(|id| self.tree.node(id).error.eta).collect();
        self.estimator.norm.global_error(&etas)
    }

    /// One pass of mark and refine, unless the tolerance is already met.
    pub fn step(&mut self, tolerance: f64) -> Result<StepOutcome> {
        if self.error() <= tolerance && self.exact_error() <= tolerance {
            return Ok(StepOutcome::Converged);
        }
        let Some(max) = self.queue.peek_max() else {
            return Ok(StepOutcome::Saturated);
        };
        if self.frozen_max > max {
            return Ok(StepOutcome::Saturated);
        }
        let (_, marked) = self.queue.pop_max_group().ok_or(Error::EmptyQueue)?;
        for &id in &marked {
            self.refine_leaf(id)?;
        }
        self.iterations += 1;
        Ok(StepOutcome::Refined(marked.len()))
    }

    fn refine_leaf(&mut self, id: usize) -> Result<()> {
        let parent = self.tree.node(id).error;
        let children = self.tree.refine(id)?;
        let mut etas = [0.0; 4];
        for (eta, &c) in etas.iter_mut().zip(&children) {
            let e = self.tree.node(c).element;
            *eta = self.estimator.eta(&e)?;
        }
        let tilde = modified_error_children(parent.eta, parent.eta_tilde, &etas);
        self.sum.add(-self.contribution(parent.eta));
        for (&eta, &c) in etas.iter().zip(&children) {
            self.insert(c, ElementError { eta, eta_tilde: tilde });
        }
        Ok(())
    }

    /// Iterates until convergence or saturation.
    pub fn run(&mut self, tolerance: f64) -> Result<Termination> {
        loop {
            match self.step(tolerance)? {
                StepOutcome::Refined(_) => {}
                StepOutcome::Converged => return Ok(Termination::Tolerance),
                StepOutcome::Saturated => return Ok(Termination::Saturated),
            }
        }
    }
}

/// A channel's final mesh with its quantized coefficients.
#[derive(Clone, Debug)]
pub struct MeshResult {
    pub tree: MeshTree,
    /// Leaves in lexicographic order.
    pub leaves: Vec<Element>,
    /// Quantized coefficients, aligned with `leaves`.
    pub blocks: Vec<CoeffBlock>,
    /// Global error of the unquantized approximation.
    pub error: f64,
    /// Global error of the quantized approximation.
    pub quantized_error: f64,
    pub iterations: usize,
    pub termination: Termination,
}

fn finish(
    channel: &Plane,
    tree: MeshTree,
    kind: NormKind,
    error: f64,
    iterations: usize,
    termination: Termination,
) -> Result<MeshResult> {
    let (h, w) = channel.dims();
    let mut est = ElementEstimator::new(channel, ErrorNorm::new(kind, h, w));
    let leaves = tree.leaves();
    let mut blocks = Vec::with_capacity(leaves.len());
    let mut etas = Vec::with_capacity(leaves.len());
    for e in &leaves {
        let (b, eta) = est.quantize(e, &QUANT_MATRIX)?;
        blocks.push(b);
        etas.push(eta);
    }
    Ok(MeshResult {
        tree,
        leaves,
        blocks,
        error,
        quantized_error: est.norm().global_error(&etas),
        iterations,
        termination,
    })
}

/// Adaptive mesh for tolerance `tolerance` followed by quantization of every leaf.
pub fn run_adaptive(channel: &Plane, tolerance: f64, kind: NormKind) -> Result<MeshResult> {
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(Error::InvalidParameter("tolerance must be nonnegative"));
    }
    let mut r = Refiner::new(channel, kind)?;
    let termination = r.run(tolerance)?;
    let error = r.exact_error();
    let iterations = r.iterations();
    finish(channel, r.into_tree(), kind, error, iterations, termination)
}

/// Finest mesh: every element split while its shorter side is at least 16.
pub fn uniform_mesh(channel: &Plane, kind: NormKind) -> Result<MeshResult> {
    check_channel(channel)?;
    let (h, w) = channel.dims();
    let mut tree = MeshTree::new(h, w);
    let mut frontier = alloc::vec![MeshTree::ROOT];
    let mut iterations = 0;
    loop {
        let mut next = Vec::new();
        for &id in &frontier {
            if tree.node(id).element.can_split() {
                next.extend(tree.refine(id)?);
            }
        }
        if next.is_empty() {
            break;
        }
        iterations += 1;
        frontier = next;
    }
    let mut est = ElementEstimator::new(channel, ErrorNorm::new(kind, h, w));
    let mut etas = Vec::with_capacity(tree.leaf_count());
    for id in tree.leaf_ids().collect::<Vec<_>>() {
        let eta = est.eta(&tree.node(id).element)?;
        tree.set_error(id, ElementError { eta, eta_tilde: eta });
        etas.push(eta);
    }
    let error = est.norm().global_error(&etas);
    finish(channel, tree, kind, error, iterations, Termination::Uniform)
}

#[cfg(test)]
mod tests;
