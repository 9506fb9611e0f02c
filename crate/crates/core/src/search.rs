use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Min-heap entry ordered by `(priority, hops, node)` so that equal-cost
/// ties always resolve the same way.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Entry {
    pub priority: f64,
    pub hops: usize,
    pub node: usize,
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
        other.priority.total_cmp(&self.priority).then(other.hops.cmp(&self.hops)).then(other.node.cmp(&self.node))
    }
}

pub(crate) type Frontier = BinaryHeap<Entry>;

/// Label-setting bookkeeping for one node.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Label {
    pub cost: f64,
    pub hops: usize,
    pub pred: usize,
    pub settled: bool,
}

impl Label {
    pub const UNSEEN: Label = Label { cost: f64::INFINITY, hops: usize::MAX, pred: usize::MAX, settled: false };

    /// Whether a candidate `(cost, hops, pred)` should replace this label.
    /// Costs within `eps` count as equal and fall back to fewer hops, then
    /// the smaller predecessor.
    pub fn improved_by(&self, cost: f64, hops: usize, pred: usize, eps: f64) -> bool {
        if self.settled {
            return false;
        }
        if cost < self.cost - eps {
            return true;
        }
        cost <= self.cost + eps && (hops, pred) < (self.hops, self.pred)
    }
}
