use std::collections::BinaryHeap;

use crate::graph::Dist;
use crate::index::ObjectId;

/// The k best objects seen so far, as a max-heap on (distance, id).
#[derive(Debug, Clone)]
pub struct KnnHeap {
    k: usize,
    heap: BinaryHeap<(Dist, ObjectId)>,
}

impl KnnHeap {
    pub fn new(k: usize) -> Self {
        KnnHeap {
            k,
            heap: BinaryHeap::with_capacity(k.min(1024)),
        }
    }

    pub fn capacity(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.heap.len() >= self.k
    }

    pub fn top_distance(&self) -> Option<Dist> {
        self.heap.peek().map(|e| e.0)
    }

    /// Adds the object if there is room or it beats the current top on
    /// (distance, id). Returns whether the heap changed.
    pub fn offer(&mut self, id: ObjectId, d: Dist) -> bool {
        if self.k == 0 {
            return false;
        }
        if self.heap.len() < self.k {
            self.heap.push((d, id));
            return true;
        }
        let top = *self.heap.peek().unwrap();
        if (d, id) < top {
            self.heap.pop();
            self.heap.push((d, id));
            return true;
        }
        false
    }

    /// Contents ascending by (distance, id).
    pub fn into_sorted(self) -> Vec<(ObjectId, Dist)> {
        self.heap.into_sorted_vec().into_iter().map(|(d, id)| (id, d)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_k_smallest_with_id_ties() {
        let mut h = KnnHeap::new(2);
        assert!(h.offer(5, 10));
        assert!(h.offer(3, 10));
        assert!(!h.offer(7, 10));
        assert!(h.offer(1, 10));
        assert_eq!(h.into_sorted(), vec![(1, 10), (3, 10)]);
    }

    #[test]
    fn zero_capacity_accepts_nothing() {
        let mut h = KnnHeap::new(0);
        assert!(!h.offer(1, 1));
        assert!(h.is_full());
    }
}
