//! Max-priority structures over leaf ids keyed on the modified error.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

/// Priority structure over markable leaves.
pub trait LeafQueue {
    fn push(&mut self, id: usize, key: f64);

    /// Largest key currently stored.
    fn peek_max(&self) -> Option<f64>;

    /// Removes every entry whose key equals the maximum bit-exactly and
    /// returns them in ascending id order.
    fn pop_max_group(&mut self) -> Option<(f64, Vec<usize>)>;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    key: f64,
    id: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key).then_with(|| other.id.cmp(&self.id))
    }
}

/// Binary max-heap; `O(log n)` per insertion and removal.
#[derive(Clone, Debug, Default)]
pub struct HeapQueue {
    heap: BinaryHeap<Entry>,
}

impl HeapQueue {
    pub fn new() -> Self {
        Self::default()
    }
}

impl LeafQueue for HeapQueue {
    fn push(&mut self, id: usize, key: f64) {
        self.heap.push(Entry { key, id });
    }

    fn peek_max(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.key)
    }

    fn pop_max_group(&mut self) -> Option<(f64, Vec<usize>)> {
        let top = self.heap.pop()?;
        let mut ids = alloc::vec![top.id];
        while let Some(e) = self.heap.peek() {
            if e.key.to_bits() != top.key.to_bits() {
                break;
            }
            ids.push(e.id);
            self.heap.pop();
        }
        ids.sort_unstable();
        Some((top.key, ids))
    }

    fn len(&self) -> usize {
        self.heap.len()
    }
}

/// Unsorted list scanned on every query; the reference implementation.
#[derive(Clone, Debug, Default)]
pub struct ScanQueue {
    entries: Vec<(usize, f64)>,
}

impl ScanQueue {
    pub fn new() -> Self {
        Self::default()
    }
}

impl LeafQueue for ScanQueue {
    fn push(&mut self, id: usize, key: f64) {
        self.entries.push((id, key));
    }

    fn peek_max(&self) -> Option<f64> {
        self.entries.iter().map(|&(_, k)| k).max_by(|a, b| a.total_cmp(b))
    }

    fn pop_max_group(&mut self) -> Option<(f64, Vec<usize>)> {
        let max = self.peek_max()?;
        let mut ids = Vec::new();
        self.entries.retain(|&(id, k)| {
            if k.to_bits() == max.to_bits() {
                ids.push(id);
                false
            } else {
                true
            }
        });
        ids.sort_unstable();
        Some((max, ids))
    }

    fn len(&self) -> usize {
        self.entries.len()
    }
}
