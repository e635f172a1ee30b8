use core::fmt;

use crate::SimTime;

/// Download statistics for one peer.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsTable {
    pub samples: u64,
    pub delay_sum_ms: f64,
    pub bytes_received: u64,
    pub start_time: SimTime,
    pub total_bytes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsSummary {
    pub average_latency_ms: f64,
    pub download_rate_bps: f64,
    /// `None` while the rate is still zero.
    pub estimated_completion_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsError {
    NoSamples,
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("no samples recorded")
    }
}

impl core::error::Error for StatsError {}

impl StatsTable {
    pub fn new(start_time: SimTime, total_bytes: u64) -> Self {
        StatsTable { samples: 0, delay_sum_ms: 0.0, bytes_received: 0, start_time, total_bytes }
    }

    pub fn record(&mut self, delay_ms: f64, bytes: u64) {
        self.samples += 1;
        self.delay_sum_ms += delay_ms;
        self.bytes_received += bytes;
    }

    pub fn summary(&self, now: SimTime) -> Result<StatsSummary, StatsError> {
        if self.samples == 0 {
            return Err(StatsError::NoSamples);
        }
        let elapsed_s = now.saturating_sub(self.start_time).as_secs_f64();
        let rate = if elapsed_s > 0.0 { 8.0 * self.bytes_received as f64 / elapsed_s } else { 0.0 };
        let remaining = self.total_bytes.saturating_sub(self.bytes_received) as f64;
        Ok(StatsSummary {
            average_latency_ms: self.delay_sum_ms / self.samples as f64,
            download_rate_bps: rate,
            estimated_completion_ms: (rate > 0.0).then(|| remaining * 8.0 / rate * 1e3),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample() {
        let mut st = StatsTable::new(SimTime::from_secs(2), 4096);
        st.record(10.0, 1024);
        let s = st.summary(SimTime::from_secs(3)).unwrap();
        assert_eq!(s.average_latency_ms, 10.0);
        assert_eq!(s.download_rate_bps, 8192.0);
        assert_eq!(s.estimated_completion_ms, Some(3000.0));
    }

    #[test]
    fn mean_of_two() {
        let mut st = StatsTable::new(SimTime::ZERO, 0);
        st.record(10.0, 1);
        st.record(30.0, 1);
        assert_eq!(st.summary(SimTime::from_secs(1)).unwrap().average_latency_ms, 20.0);
    }

    #[test]
    fn eta_halves_when_rate_doubles() {
        let mut slow = StatsTable::new(SimTime::ZERO, 10_000);
        slow.record(1.0, 1000);
        let mut fast = StatsTable::new(SimTime::ZERO, 11_000);
        fast.record(1.0, 2000);
        let a = slow.summary(SimTime::from_secs(1)).unwrap();
        let b = fast.summary(SimTime::from_secs(1)).unwrap();
        assert_eq!(b.download_rate_bps, 2.0 * a.download_rate_bps);
        assert_eq!(b.estimated_completion_ms.unwrap() * 2.0, a.estimated_completion_ms.unwrap());
    }

    #[test]
    fn empty_table() {
        let st = StatsTable::new(SimTime::ZERO, 0);
        assert_eq!(st.summary(SimTime::from_secs(1)), Err(StatsError::NoSamples));
    }
}
