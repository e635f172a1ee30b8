use alloc::collections::VecDeque;

use crate::packets::Interest;
use crate::SimTime;

/// Application-layer FIFO that releases at most one Interest per pacing
/// interval. A zero interval disables pacing.
#[derive(Debug, Clone, Default)]
pub struct InterestQueue {
    queue: VecDeque<Interest>,
    pace_interval: SimTime,
    last_dequeue: Option<SimTime>,
}

impl InterestQueue {
    pub fn new(pace_interval: SimTime) -> Self {
        InterestQueue { queue: VecDeque::new(), pace_interval, last_dequeue: None }
    }

    pub fn enqueue(&mut self, i: Interest) {
        self.queue.push_back(i);
    }

    pub fn dequeue_ready(&mut self, now: SimTime) -> Option<Interest> {
        if let Some(at) = self.next_ready_at() {
            if now < at {
                return None;
            }
        }
        let i = self.queue.pop_front()?;
        self.last_dequeue = Some(now);
        Some(i)
    }

    /// Earliest time the head may leave, if pacing currently holds it back.
    pub fn next_ready_at(&self) -> Option<SimTime> {
        if self.pace_interval == SimTime::ZERO {
            return None;
        }
        self.last_dequeue.map(|t| t + self.pace_interval)
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }
}
