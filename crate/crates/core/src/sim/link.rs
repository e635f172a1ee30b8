use alloc::collections::VecDeque;

use crate::SimTime;

/// Serialization time of `bytes` at `bandwidth_bps`, rounded up to a whole
/// nanosecond.
pub fn tx_time(bytes: usize, bandwidth_bps: u64) -> SimTime {
    let bits = bytes as u128 * 8 * 1_000_000_000;
    let bw = u128::from(bandwidth_bps);
    SimTime(bits.div_ceil(bw) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transmission {
    pub start: SimTime,
    pub end: SimTime,
    pub delivery: SimTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxError {
    /// The queue was full; the arriving packet is discarded.
    QueueFull,
    LinkDown,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinkDirStats {
    pub packets: u64,
    pub bytes: u64,
    pub queue_drops: u64,
    /// Packets offered while the link was down.
    pub down_attempts: u64,
    pub down_interest_attempts: u64,
    pub max_queue: usize,
}

/// One direction of a point-to-point link: a FIFO transmitter with a
/// droptail queue. The packet being transmitted is not counted against the
/// queue capacity.
#[derive(Debug, Clone)]
pub struct LinkDir {
    pub bandwidth_bps: u64,
    pub prop_delay: SimTime,
    pub queue_capacity: usize,
    busy_until: SimTime,
    /// Start times of accepted packets that may still be waiting.
    waiting: VecDeque<SimTime>,
    pub stats: LinkDirStats,
}

impl LinkDir {
    pub fn new(bandwidth_bps: u64, prop_delay: SimTime, queue_capacity: usize) -> Self {
        LinkDir {
            bandwidth_bps,
            prop_delay,
            queue_capacity,
            busy_until: SimTime::ZERO,
            waiting: VecDeque::new(),
            stats: LinkDirStats::default(),
        }
    }

    pub fn busy_until(&self) -> SimTime {
        self.busy_until
    }

    /// Packets waiting behind the one in transmission at `now`.
    pub fn queue_len(&mut self, now: SimTime) -> usize {
        while self.waiting.front().is_some_and(|&s| s <= now) {
            self.waiting.pop_front();
        }
        self.waiting.len()
    }

    pub fn transmit(&mut self, bytes: usize, now: SimTime) -> Result<Transmission, TxError> {
        let start = self.busy_until.max(now);
        if start > now {
            let q = self.queue_len(now);
            if q >= self.queue_capacity {
                self.stats.queue_drops += 1;
                return Err(TxError::QueueFull);
            }
            self.waiting.push_back(start);
            self.stats.max_queue = self.stats.max_queue.max(q + 1);
        }
        let end = start + tx_time(bytes, self.bandwidth_bps);
        self.busy_until = end;
        self.stats.packets += 1;
        self.stats.bytes += bytes as u64;
        Ok(Transmission { start, end, delivery: end + self.prop_delay })
    }

    /// Discards everything queued or in transmission.
    pub fn flush(&mut self, now: SimTime) {
        self.waiting.clear();
        self.busy_until = now;
    }
}
