use rand::Rng;

use super::MasacError;

/// One joint step: every agent's observation, action (environment units),
/// reward and next observation.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTransition<O, A> {
    pub x: Vec<O>,
    pub a: Vec<A>,
    pub r: Vec<f64>,
    pub x_next: Vec<O>,
    pub done: bool,
}

impl<O, A> JointTransition<O, A> {
    pub fn n_agents(&self) -> usize {
        self.x.len()
    }

    pub fn is_well_formed(&self) -> bool {
        let n = self.x.len();
        n > 0 && self.a.len() == n && self.r.len() == n && self.x_next.len() == n
    }
}

/// Bounded FIFO store with uniform sampling with replacement.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    items: Vec<T>,
    write_index: usize,
}

impl<T> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            write_index: 0,
        }
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

    /// Appends, evicting the oldest entry once full.
    pub fn push(&mut self, item: T) {
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            self.items[self.write_index] = item;
        }
        self.write_index = (self.write_index + 1) % self.capacity;
    }

    /// Contents from oldest to newest.
    pub fn iter_oldest_first(&self) -> impl Iterator<Item = &T> {
        let split = if self.items.len() < self.capacity { 0 } else { self.write_index };
        self.items[split..].iter().chain(self.items[..split].iter())
    }

    /// Indices drawn uniformly with replacement. Any non-empty buffer can
    /// serve any batch size; the trainer gates updates on `len() >= batch_n`.
    pub fn sample_indices<R: Rng + ?Sized>(
        &self,
        batch_n: usize,
        rng: &mut R,
    ) -> Result<Vec<usize>, MasacError> {
        if self.items.is_empty() {
            return Err(MasacError::BufferUnderfilled { have: 0, need: batch_n.max(1) });
        }
        Ok((0..batch_n).map(|_| rng.random_range(0..self.items.len())).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, batch_n: usize, rng: &mut R) -> Result<Vec<&T>, MasacError> {
        Ok(self
            .sample_indices(batch_n, rng)?
            .into_iter()
            .map(|i| &self.items[i])
            .collect())
    }

    pub fn get(&self, index: usize) -> Option<&T> {
        self.items.get(index)
    }
}
