use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::topology::Dir;
use crate::apps::DataArrival;
use crate::forwarder::FaceId;
use crate::packets::Name;
use crate::{LinkId, NodeId, SimTime};

/// Fraction of one sampling interval a link direction spent transmitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilSample {
    /// End of the interval.
    pub time: SimTime,
    pub link: LinkId,
    pub dir: Dir,
    pub utilization: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategySample {
    pub time: SimTime,
    pub node: NodeId,
    pub prefix: Name,
    pub face: FaceId,
    pub current: bool,
    pub satisfaction: Option<f64>,
    pub ewma_delay_ms: Option<f64>,
    pub interests_sent: u64,
    pub data_received: u64,
    pub probes: u64,
    pub spillovers: u64,
    pub switches: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketKind {
    Interest,
    Data,
    Nack,
}

/// One accepted link transmission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkEvent {
    pub time: SimTime,
    pub link: LinkId,
    pub from: NodeId,
    pub to: NodeId,
    pub kind: PacketKind,
    pub name: Name,
}

/// Busy periods of one link direction not yet folded into a sample.
#[derive(Debug, Clone, Default)]
pub(crate) struct BusyTracker {
    spans: VecDeque<(SimTime, SimTime)>,
}

impl BusyTracker {
    pub(crate) fn push(&mut self, start: SimTime, end: SimTime) {
        self.spans.push_back((start, end));
    }

    /// Drops transmission time after `now` (the transmitter was flushed).
    pub(crate) fn truncate(&mut self, now: SimTime) {
        self.spans.retain(|&(s, _)| s < now);
        if let Some(last) = self.spans.back_mut() {
            last.1 = last.1.min(now);
        }
    }

    /// Busy nanoseconds inside `[from, to)`; forgets spans that end by `to`.
    pub(crate) fn take(&mut self, from: SimTime, to: SimTime) -> u64 {
        let mut busy = 0;
        for &(s, e) in &self.spans {
            if s >= to {
                break;
            }
            let lo = s.max(from);
            let hi = e.min(to);
            if hi > lo {
                busy += (hi - lo).as_nanos();
            }
        }
        while self.spans.front().is_some_and(|&(_, e)| e <= to) {
            self.spans.pop_front();
        }
        busy
    }
}

/// Highest payload rate in bits per second over any window of length
/// `window` ending at an arrival.
pub fn max_window_rate(arrivals: &[DataArrival], window: SimTime) -> f64 {
    let mut best = 0u64;
    let mut lo = 0;
    let mut sum = 0u64;
    for (hi, a) in arrivals.iter().enumerate() {
        sum += a.bytes as u64;
        while arrivals[lo].time + window <= a.time {
            sum -= arrivals[lo].bytes as u64;
            lo += 1;
        }
        debug_assert!(lo <= hi);
        best = best.max(sum);
    }
    best as f64 * 8.0 / window.as_secs_f64()
}

/// Data packets per origin for arrivals inside `[from, to)`.
pub fn provenance_between(arrivals: &[DataArrival], from: SimTime, to: SimTime) -> Vec<(NodeId, u64)> {
    let mut out: Vec<(NodeId, u64)> = Vec::new();
    for a in arrivals.iter().filter(|a| a.time >= from && a.time < to) {
        match out.iter_mut().find(|(n, _)| *n == a.origin) {
            Some((_, c)) => *c += 1,
            None => out.push((a.origin, 1)),
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn arr(ms: u64, bytes: usize) -> DataArrival {
        DataArrival { time: SimTime::from_millis(ms), origin: NodeId(0), bytes }
    }

    #[test]
    fn sliding_window_rate() {
        // 10 packets of 1000 B within 500 ms, then a gap
        let mut a: Vec<_> = (0..10).map(|k| arr(k * 50, 1000)).collect();
        a.push(arr(3000, 1000));
        let r = max_window_rate(&a, SimTime::from_secs(1));
        assert_eq!(r, 80_000.0);
        assert_eq!(max_window_rate(&[], SimTime::from_secs(1)), 0.0);
    }

    #[test]
    fn window_excludes_left_edge() {
        let a = [arr(0, 100), arr(1000, 100)];
        assert_eq!(max_window_rate(&a, SimTime::from_secs(1)), 800.0);
    }

    #[test]
    fn busy_overlap() {
        let mut b = BusyTracker::default();
        b.push(SimTime::from_millis(5), SimTime::from_millis(15));
        b.push(SimTime::from_millis(15), SimTime::from_millis(18));
        assert_eq!(b.take(SimTime::ZERO, SimTime::from_millis(10)), 5_000_000);
        assert_eq!(b.take(SimTime::from_millis(10), SimTime::from_millis(20)), 8_000_000);
        assert_eq!(b.take(SimTime::from_millis(20), SimTime::from_millis(30)), 0);
    }

    #[test]
    fn truncate_cuts_future() {
        let mut b = BusyTracker::default();
        b.push(SimTime::from_millis(0), SimTime::from_millis(10));
        b.push(SimTime::from_millis(10), SimTime::from_millis(20));
        b.truncate(SimTime::from_millis(4));
        assert_eq!(b.take(SimTime::ZERO, SimTime::from_millis(50)), 4_000_000);
    }

    #[test]
    fn provenance_split() {
        let mut a = vec![arr(1, 1), arr(2, 1), arr(30, 1)];
        a[2].origin = NodeId(4);
        let p = provenance_between(&a, SimTime::ZERO, SimTime::from_millis(10));
        assert_eq!(p, [(NodeId(0), 2)]);
        let all = provenance_between(&a, SimTime::ZERO, SimTime::MAX);
        assert_eq!(all, [(NodeId(0), 2), (NodeId(4), 1)]);
    }
}
