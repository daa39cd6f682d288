use serde::Serialize;

use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transition {
    pub context: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
}

/// Fixed-capacity ring of single-step transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        let capacity = capacity.max(1);
        Self { capacity, items: Vec::with_capacity(capacity.min(1 << 16)), next: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// Up to `batch` distinct transitions, uniformly.
    pub fn sample(&self, batch: usize, rng: &mut RngStream) -> Vec<&Transition> {
        rng.sample_distinct(self.items.len(), batch).into_iter().map(|i| &self.items[i]).collect()
    }
}
