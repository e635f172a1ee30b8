use alloc::collections::BinaryHeap;
use core::cmp::{Ordering, Reverse};
use core::fmt;

use crate::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchedulingInPast {
    pub now: SimTime,
    pub requested: SimTime,
}

impl fmt::Display for SchedulingInPast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot schedule at {} before now ({})", self.requested, self.now)
    }
}

impl core::error::Error for SchedulingInPast {}

struct Entry<A> {
    key: Reverse<(SimTime, u64)>,
    action: A,
}

impl<A> PartialEq for Entry<A> {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl<A> Eq for Entry<A> {}

impl<A> PartialOrd for Entry<A> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<A> Ord for Entry<A> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}

/// Event queue ordered by `(time, seq)`, where `seq` is the scheduling
/// order. Equal-time events therefore run first-scheduled first.
pub struct Scheduler<A> {
    heap: BinaryHeap<Entry<A>>,
    now: SimTime,
    seq: u64,
    executed: u64,
}

impl<A> Default for Scheduler<A> {
    fn default() -> Self {
        Scheduler { heap: BinaryHeap::new(), now: SimTime::ZERO, seq: 0, executed: 0 }
    }
}

impl<A> Scheduler<A> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.heap.len()
    }

    /// Events popped so far.
    pub fn executed(&self) -> u64 {
        self.executed
    }

    pub fn schedule(&mut self, at: SimTime, action: A) -> Result<(), SchedulingInPast> {
        if at < self.now {
            return Err(SchedulingInPast { now: self.now, requested: at });
        }
        self.seq += 1;
        self.heap.push(Entry { key: Reverse((at, self.seq)), action });
        Ok(())
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|e| e.key.0 .0)
    }

    /// Removes the next event with time `<= t_end`, advancing the clock.
    pub fn pop_until(&mut self, t_end: SimTime) -> Option<(SimTime, A)> {
        if self.peek_time()? > t_end {
            return None;
        }
        let e = self.heap.pop()?;
        let t = e.key.0 .0;
        self.now = t;
        self.executed += 1;
        Some((t, e.action))
    }

    /// Runs every event with time `<= t_end` through `handler`, which may
    /// schedule more. Returns the number of events executed.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F) -> u64
    where
        F: FnMut(&mut Self, SimTime, A),
    {
        let mut count = 0;
        while let Some((t, a)) = self.pop_until(t_end) {
            handler(self, t, a);
            count += 1;
        }
        count
    }
}
