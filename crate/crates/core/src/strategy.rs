//! Adaptive multipath forwarding strategy.
//!
//! For every FIB prefix a node keeps one [`StrategyState`]: the face
//! currently used for forwarding plus per-face statistics (Interests sent,
//! Data returned, consecutive failures, EWMA of retrieval delay). Decisions:
//!
//! - every `probe_interval`-th Interest goes to an alternative face (a probe);
//! - a probed face that has returned `min_samples` Data with a lower EWMA
//!   delay than the current face becomes the current face;
//! - `max_consecutive_failures` failures in a row, or a satisfaction rate
//!   below `satisfaction_threshold`, on the current face moves forwarding to
//!   the best alternative;
//! - while the current face is saturated (inflated delay or a recent loss),
//!   Interests spill over to the lowest-delay unsaturated alternative without
//!   changing the current face;
//! - when every candidate has been tried the forwarder is told to Nack.
//!
//! A face whose consecutive failures reached the limit is considered dead:
//! it is skipped for probes, spill-over and failover while any live
//! alternative exists, and becomes live again as soon as it returns Data.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::forwarder::{FaceId, FibEntry};
use crate::packets::Name;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig {
    pub satisfaction_threshold: f64,
    pub max_consecutive_failures: u32,
    pub probe_interval: u32,
    pub ewma_alpha: f64,
    pub saturation_inflation: f64,
    pub min_samples: u32,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            satisfaction_threshold: 0.5,
            max_consecutive_failures: 3,
            probe_interval: 50,
            ewma_alpha: 0.125,
            saturation_inflation: 2.0,
            min_samples: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyConfigError(pub &'static str);

impl fmt::Display for StrategyConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid strategy config: {}", self.0)
    }
}

impl core::error::Error for StrategyConfigError {}

impl StrategyConfig {
    pub fn validate(&self) -> Result<(), StrategyConfigError> {
        let t = self.satisfaction_threshold;
        if !(t > 0.0 && t < 1.0) {
            return Err(StrategyConfigError("satisfaction_threshold must be in (0,1)"));
        }
        if self.max_consecutive_failures == 0 {
            return Err(StrategyConfigError("max_consecutive_failures must be positive"));
        }
        if self.probe_interval == 0 {
            return Err(StrategyConfigError("probe_interval must be positive"));
        }
        if !(self.ewma_alpha > 0.0 && self.ewma_alpha <= 1.0) {
            return Err(StrategyConfigError("ewma_alpha must be in (0,1]"));
        }
        if self.saturation_inflation.is_nan() || self.saturation_inflation <= 1.0 {
            return Err(StrategyConfigError("saturation_inflation must exceed 1"));
        }
        if self.min_samples == 0 {
            return Err(StrategyConfigError("min_samples must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceStats {
    pub face: FaceId,
    pub interests_sent: u64,
    pub data_received: u64,
    pub consecutive_failures: u32,
    pub failures: u64,
    pub ewma_delay_ms: Option<f64>,
    /// Minimum EWMA observed.
    pub base_delay_ms: Option<f64>,
    /// Value of the state's sent counter when this face was last probed.
    pub last_probe_counter: Option<u64>,
    /// `interests_sent` at the time of the most recent failure.
    pub last_failure_sent: Option<u64>,
    pub probes: u64,
    pub spillovers: u64,
}

impl FaceStats {
    pub fn new(face: FaceId) -> Self {
        FaceStats {
            face,
            interests_sent: 0,
            data_received: 0,
            consecutive_failures: 0,
            failures: 0,
            ewma_delay_ms: None,
            base_delay_ms: None,
            last_probe_counter: None,
            last_failure_sent: None,
            probes: 0,
            spillovers: 0,
        }
    }

    /// Interests sent that have neither returned Data nor failed.
    pub fn outstanding(&self) -> u64 {
        self.interests_sent.saturating_sub(self.data_received + self.failures)
    }

    /// Data returned per Interest sent, `None` before the first send.
    pub fn satisfaction_rate(&self) -> Option<f64> {
        (self.interests_sent > 0).then(|| self.data_received as f64 / self.interests_sent as f64)
    }
}

/// Delay inflated beyond `saturation_inflation × base`, or a failure within
/// the last `probe_interval` Interests sent on the face.
pub fn is_saturated(stats: &FaceStats, cfg: &StrategyConfig) -> bool {
    let inflated = match (stats.ewma_delay_ms, stats.base_delay_ms) {
        (Some(e), Some(b)) => e > cfg.saturation_inflation * b,
        _ => false,
    };
    let recent_loss =
        stats.last_failure_sent.is_some_and(|at| stats.interests_sent - at < u64::from(cfg.probe_interval));
    inflated || recent_loss
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChoiceKind {
    Current,
    Probe,
    SpillOver,
    /// The current face was excluded (it is the incoming face or was already
    /// tried), so the best remaining candidate was used.
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    Forward { face: FaceId, kind: ChoiceKind },
    Exhausted,
}

impl Choice {
    pub fn face(self) -> Option<FaceId> {
        match self {
            Choice::Forward { face, .. } => Some(face),
            Choice::Exhausted => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Timeout,
    Nack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchReason {
    LowerLatency,
    ConsecutiveFailures,
    LowSatisfaction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwitchDecision {
    pub from: FaceId,
    pub to: FaceId,
    pub reason: SwitchReason,
}

/// Strategy state for one FIB prefix at one node.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyState {
    pub current_face: FaceId,
    pub stats: BTreeMap<FaceId, FaceStats>,
    pub sent_counter: u64,
    pub switches: u64,
}

impl StrategyState {
    /// Starts on the lowest-cost nexthop. Panics if `entry` has none.
    pub fn new(entry: &FibEntry) -> Self {
        StrategyState { current_face: entry.nexthops[0].face, stats: BTreeMap::new(), sent_counter: 0, switches: 0 }
    }

    pub fn face_stats(&self, face: FaceId) -> Option<&FaceStats> {
        self.stats.get(&face)
    }

    fn stats_mut(&mut self, face: FaceId) -> &mut FaceStats {
        self.stats.entry(face).or_insert_with(|| FaceStats::new(face))
    }

    fn is_dead(&self, face: FaceId, cfg: &StrategyConfig) -> bool {
        self.stats.get(&face).is_some_and(|s| s.consecutive_failures >= cfg.max_consecutive_failures)
    }

    /// Saturation as seen by forwarding: a face with nothing outstanding
    /// has no queue, whatever its last delay estimate says.
    fn saturated(&self, face: FaceId, cfg: &StrategyConfig) -> bool {
        self.stats.get(&face).is_some_and(|s| s.outstanding() > 0 && is_saturated(s, cfg))
    }

    fn delay_key(&self, face: FaceId, cost_ms: f64) -> (bool, f64) {
        match self.stats.get(&face).and_then(|s| s.ewma_delay_ms) {
            Some(e) => (false, e),
            None => (true, cost_ms),
        }
    }

    /// Ranks failover candidates: live before dead, measured before
    /// unmeasured, then by EWMA delay (or FIB cost), then by lowest face id.
    fn failover_order(&self, cfg: &StrategyConfig, a: (FaceId, f64), b: (FaceId, f64)) -> Ordering {
        let ka = (self.is_dead(a.0, cfg), self.delay_key(a.0, a.1));
        let kb = (self.is_dead(b.0, cfg), self.delay_key(b.0, b.1));
        ka.0.cmp(&kb.0).then(ka.1 .0.cmp(&kb.1 .0)).then(ka.1 .1.total_cmp(&kb.1 .1)).then(a.0.cmp(&b.0))
    }

    pub fn choose_face(&mut self, cfg: &StrategyConfig, entry: &FibEntry, excluded: &[FaceId]) -> Choice {
        let candidates: Vec<(FaceId, f64)> =
            entry.nexthops.iter().filter(|h| !excluded.contains(&h.face)).map(|h| (h.face, h.cost_ms)).collect();
        if candidates.is_empty() {
            return Choice::Exhausted;
        }
        let counter = self.sent_counter + 1;
        let current = self.current_face;
        let current_ok = candidates.iter().any(|&(f, _)| f == current);

        let mut choice = None;
        if counter.is_multiple_of(u64::from(cfg.probe_interval)) {
            choice = candidates
                .iter()
                .filter(|&&(f, _)| f != current && !self.is_dead(f, cfg))
                .min_by_key(|&&(f, _)| (self.stats.get(&f).and_then(|s| s.last_probe_counter), f))
                .map(|&(face, _)| (face, ChoiceKind::Probe));
        }
        if choice.is_none() && current_ok {
            if self.saturated(current, cfg) {
                choice = candidates
                    .iter()
                    .filter(|&&(f, _)| f != current && !self.is_dead(f, cfg) && !self.saturated(f, cfg))
                    .min_by(|&&a, &&b| {
                        let (ua, da) = self.delay_key(a.0, a.1);
                        let (ub, db) = self.delay_key(b.0, b.1);
                        ua.cmp(&ub).then(da.total_cmp(&db)).then(a.0.cmp(&b.0))
                    })
                    .map(|&(face, _)| (face, ChoiceKind::SpillOver));
            }
            if choice.is_none() {
                choice = Some((current, ChoiceKind::Current));
            }
        }
        let (face, kind) = choice.unwrap_or_else(|| {
            let best = candidates
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    self.saturated(a.0, cfg).cmp(&self.saturated(b.0, cfg)).then_with(|| self.failover_order(cfg, a, b))
                })
                .expect("candidates is non-empty");
            (best.0, ChoiceKind::Fallback)
        });

        self.sent_counter = counter;
        let st = self.stats_mut(face);
        st.interests_sent += 1;
        match kind {
            ChoiceKind::Probe => {
                st.probes += 1;
                st.last_probe_counter = Some(counter);
            }
            ChoiceKind::SpillOver => st.spillovers += 1,
            _ => {}
        }
        Choice::Forward { face, kind }
    }

    pub fn on_data(&mut self, cfg: &StrategyConfig, face: FaceId, rtt_ms: f64) -> Option<SwitchDecision> {
        let st = self.stats_mut(face);
        st.data_received += 1;
        st.consecutive_failures = 0;
        let ewma = match st.ewma_delay_ms {
            None => rtt_ms,
            Some(prev) => cfg.ewma_alpha * rtt_ms + (1.0 - cfg.ewma_alpha) * prev,
        };
        st.ewma_delay_ms = Some(ewma);
        st.base_delay_ms = Some(st.base_delay_ms.map_or(ewma, |b| b.min(ewma)));
        let enough = st.data_received >= u64::from(cfg.min_samples);

        // a saturated current face is kept; extra load spills over instead
        if face == self.current_face || !enough || self.saturated(self.current_face, cfg) {
            return None;
        }
        let current_ewma = self.stats.get(&self.current_face).and_then(|s| s.ewma_delay_ms);
        if current_ewma.is_none_or(|c| ewma < c) {
            let from = self.current_face;
            self.current_face = face;
            self.switches += 1;
            return Some(SwitchDecision { from, to: face, reason: SwitchReason::LowerLatency });
        }
        None
    }

    pub fn on_failure(
        &mut self,
        cfg: &StrategyConfig,
        entry: &FibEntry,
        face: FaceId,
        _kind: FailureKind,
    ) -> Option<SwitchDecision> {
        let st = self.stats_mut(face);
        st.consecutive_failures += 1;
        st.failures += 1;
        st.last_failure_sent = Some(st.interests_sent);
        let (consecutive, sent, rate) = (st.consecutive_failures, st.interests_sent, st.satisfaction_rate());
        if face != self.current_face {
            return None;
        }
        let reason = if consecutive >= cfg.max_consecutive_failures {
            SwitchReason::ConsecutiveFailures
        } else if sent >= u64::from(cfg.min_samples) && rate.is_some_and(|s| s < cfg.satisfaction_threshold) {
            SwitchReason::LowSatisfaction
        } else {
            return None;
        };
        let to = entry
            .nexthops
            .iter()
            .filter(|h| h.face != face)
            .map(|h| (h.face, h.cost_ms))
            .min_by(|&a, &b| self.failover_order(cfg, a, b))?
            .0;
        self.current_face = to;
        self.stats_mut(to).consecutive_failures = 0;
        self.switches += 1;
        Some(SwitchDecision { from: face, to, reason })
    }
}

/// The strategy instance of one node: configuration plus per-prefix state.
#[derive(Debug, Clone, Default)]
pub struct AdaptiveStrategy {
    pub cfg: StrategyConfig,
    states: BTreeMap<Name, StrategyState>,
}

impl AdaptiveStrategy {
    pub fn new(cfg: StrategyConfig) -> Self {
        AdaptiveStrategy { cfg, states: BTreeMap::new() }
    }

    fn state_mut(&mut self, entry: &FibEntry) -> &mut StrategyState {
        self.states.entry(entry.prefix.clone()).or_insert_with(|| StrategyState::new(entry))
    }

    pub fn state(&self, prefix: &Name) -> Option<&StrategyState> {
        self.states.get(prefix)
    }

    pub fn states(&self) -> impl Iterator<Item = (&Name, &StrategyState)> {
        self.states.iter()
    }

    pub fn choose_face(&mut self, entry: &FibEntry, excluded: &[FaceId]) -> Choice {
        let cfg = self.cfg;
        self.state_mut(entry).choose_face(&cfg, entry, excluded)
    }

    pub fn on_data(&mut self, entry: &FibEntry, face: FaceId, rtt_ms: f64) -> Option<SwitchDecision> {
        let cfg = self.cfg;
        self.state_mut(entry).on_data(&cfg, face, rtt_ms)
    }

    pub fn on_failure(&mut self, entry: &FibEntry, face: FaceId, kind: FailureKind) -> Option<SwitchDecision> {
        let cfg = self.cfg;
        self.state_mut(entry).on_failure(&cfg, entry, face, kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forwarder::NextHop;
    use alloc::vec;

    fn entry(faces: &[(u32, f64)]) -> FibEntry {
        FibEntry {
            prefix: Name::from_uri("/t").unwrap(),
            nexthops: faces.iter().map(|&(f, c)| NextHop { face: FaceId(f), cost_ms: c }).collect(),
        }
    }

    fn cfg() -> StrategyConfig {
        StrategyConfig::default()
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        let bad = [
            StrategyConfig { satisfaction_threshold: 1.0, ..cfg() },
            StrategyConfig { max_consecutive_failures: 0, ..cfg() },
            StrategyConfig { probe_interval: 0, ..cfg() },
            StrategyConfig { ewma_alpha: 0.0, ..cfg() },
            StrategyConfig { saturation_inflation: 1.0, ..cfg() },
            StrategyConfig { min_samples: 0, ..cfg() },
        ];
        for b in bad {
            assert!(b.validate().is_err(), "{b:?}");
        }
    }

    #[test]
    fn two_probes_per_hundred() {
        let e = entry(&[(1, 5.0), (2, 10.0)]);
        let mut s = StrategyState::new(&e);
        let mut to_f2 = 0;
        for _ in 0..100 {
            if s.choose_face(&cfg(), &e, &[]).face() == Some(FaceId(2)) {
                to_f2 += 1;
            }
        }
        assert_eq!(to_f2, 2);
        assert_eq!(s.face_stats(FaceId(2)).unwrap().probes, 2);
    }

    #[test]
    fn single_tried_nexthop_is_exhausted() {
        let e = entry(&[(1, 5.0)]);
        let mut s = StrategyState::new(&e);
        assert_eq!(s.choose_face(&cfg(), &e, &[FaceId(1)]), Choice::Exhausted);
    }

    #[test]
    fn probes_rotate_least_recently_probed() {
        let e = entry(&[(1, 1.0), (2, 2.0), (3, 3.0)]);
        let mut s = StrategyState::new(&e);
        let probes: Vec<FaceId> = (0..200)
            .filter_map(|_| match s.choose_face(&cfg(), &e, &[]) {
                Choice::Forward { face, kind: ChoiceKind::Probe } => Some(face),
                _ => None,
            })
            .collect();
        assert_eq!(probes, [FaceId(2), FaceId(3), FaceId(2), FaceId(3)]);
    }

    /// Marks `n` more Interests as sent and unanswered on `face`.
    fn pending(s: &mut StrategyState, face: FaceId, n: u64) {
        let st = s.stats.get_mut(&face).unwrap();
        st.interests_sent = st.data_received + st.failures + n;
    }

    #[test]
    fn spill_over_keeps_current() {
        let e = entry(&[(1, 5.0), (2, 10.0)]);
        let mut s = StrategyState::new(&e);
        s.on_data(&cfg(), FaceId(1), 10.0);
        for _ in 0..5 {
            s.on_data(&cfg(), FaceId(2), 12.0);
        }
        // the current face already has a lower delay, so no switch happened
        assert_eq!(s.current_face, FaceId(1));
        // inflate: base stays 10, EWMA climbs past 2 x 10
        for _ in 0..40 {
            s.on_data(&cfg(), FaceId(1), 60.0);
        }
        let f1 = s.face_stats(FaceId(1)).unwrap();
        assert!(f1.ewma_delay_ms.unwrap() > 20.0 && f1.base_delay_ms == Some(10.0));
        assert!(is_saturated(f1, &cfg()));
        // nothing pending on face 1 yet, so its queue is empty
        assert_eq!(s.choose_face(&cfg(), &e, &[]), Choice::Forward { face: FaceId(1), kind: ChoiceKind::Current });
        pending(&mut s, FaceId(1), 3);
        assert_eq!(s.choose_face(&cfg(), &e, &[]), Choice::Forward { face: FaceId(2), kind: ChoiceKind::SpillOver });
        assert_eq!(s.current_face, FaceId(1));
    }

    #[test]
    fn saturated_current_is_not_replaced_by_spill_face() {
        let e = entry(&[(1, 5.0), (2, 10.0)]);
        let mut s = StrategyState::new(&e);
        s.on_data(&cfg(), FaceId(1), 10.0);
        s.on_data(&cfg(), FaceId(1), 100.0);
        pending(&mut s, FaceId(1), 1);
        for _ in 0..10 {
            assert_eq!(
                s.choose_face(&cfg(), &e, &[]),
                Choice::Forward { face: FaceId(2), kind: ChoiceKind::SpillOver }
            );
        }
        for _ in 0..10 {
            assert!(s.on_data(&cfg(), FaceId(2), 15.0).is_none());
        }
        assert_eq!(s.current_face, FaceId(1));
        // once face 1 drains, the lower delay of face 2 wins
        s.on_data(&cfg(), FaceId(1), 100.0);
        assert_eq!(s.face_stats(FaceId(1)).unwrap().outstanding(), 0);
        let d = s.on_data(&cfg(), FaceId(2), 15.0).unwrap();
        assert_eq!(d.reason, SwitchReason::LowerLatency);
    }

    #[test]
    fn idle_face_with_stale_delay_takes_spill_over() {
        let e = entry(&[(1, 5.0), (2, 10.0), (3, 20.0)]);
        let mut s = StrategyState::new(&e);
        // face 2 has an inflated estimate but nothing pending
        s.on_data(&cfg(), FaceId(2), 10.0);
        s.on_data(&cfg(), FaceId(2), 200.0);
        s.on_data(&cfg(), FaceId(1), 10.0);
        s.on_data(&cfg(), FaceId(1), 500.0);
        pending(&mut s, FaceId(1), 4);
        assert_eq!(s.choose_face(&cfg(), &e, &[]), Choice::Forward { face: FaceId(2), kind: ChoiceKind::SpillOver });
    }

    #[test]
    fn switch_to_faster_probe() {
        let e = entry(&[(1, 5.0), (2, 10.0)]);
        let mut s = StrategyState::new(&e);
        for _ in 0..5 {
            s.on_data(&cfg(), FaceId(1), 20.0);
        }
        for k in 0..4 {
            assert!(s.on_data(&cfg(), FaceId(2), 5.0).is_none(), "sample {k}");
        }
        let d = s.on_data(&cfg(), FaceId(2), 5.0).unwrap();
        assert_eq!(d, SwitchDecision { from: FaceId(1), to: FaceId(2), reason: SwitchReason::LowerLatency });
    }

    #[test]
    fn slower_probe_does_not_switch() {
        let e = entry(&[(1, 5.0), (2, 10.0)]);
        let mut s = StrategyState::new(&e);
        for _ in 0..5 {
            s.on_data(&cfg(), FaceId(1), 20.0);
        }
        for _ in 0..10 {
            assert!(s.on_data(&cfg(), FaceId(2), 25.0).is_none());
        }
        assert_eq!(s.current_face, FaceId(1));
    }

    #[test]
    fn alpha_one_tracks_last_sample() {
        let c = StrategyConfig { ewma_alpha: 1.0, ..cfg() };
        let e = entry(&[(1, 5.0)]);
        let mut s = StrategyState::new(&e);
        for rtt in [3.0, 17.0, 8.5] {
            s.on_data(&c, FaceId(1), rtt);
            assert_eq!(s.face_stats(FaceId(1)).unwrap().ewma_delay_ms, Some(rtt));
        }
        assert_eq!(s.face_stats(FaceId(1)).unwrap().base_delay_ms, Some(3.0));
    }

    #[test]
    fn ewma_matches_closed_form() {
        let e = entry(&[(1, 5.0)]);
        let mut s = StrategyState::new(&e);
        let samples = [10.0, 30.0, 20.0, 50.0];
        let mut expect = samples[0];
        s.on_data(&cfg(), FaceId(1), samples[0]);
        for &x in &samples[1..] {
            expect = 0.125 * x + 0.875 * expect;
            s.on_data(&cfg(), FaceId(1), x);
        }
        assert!((s.face_stats(FaceId(1)).unwrap().ewma_delay_ms.unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn three_timeouts_fail_over() {
        let e = entry(&[(1, 5.0), (2, 10.0)]);
        let mut s = StrategyState::new(&e);
        assert!(s.on_failure(&cfg(), &e, FaceId(1), FailureKind::Timeout).is_none());
        assert!(s.on_failure(&cfg(), &e, FaceId(1), FailureKind::Timeout).is_none());
        let d = s.on_failure(&cfg(), &e, FaceId(1), FailureKind::Timeout).unwrap();
        assert_eq!(d.to, FaceId(2));
        assert_eq!(d.reason, SwitchReason::ConsecutiveFailures);
        assert_eq!(s.current_face, FaceId(2));
    }

    #[test]
    fn failures_on_probe_face_do_not_move_current() {
        let e = entry(&[(1, 5.0), (2, 10.0)]);
        let mut s = StrategyState::new(&e);
        for _ in 0..10 {
            assert!(s.on_failure(&cfg(), &e, FaceId(2), FailureKind::Nack).is_none());
        }
        assert_eq!(s.current_face, FaceId(1));
    }

    #[test]
    fn low_satisfaction_switches() {
        // 10 sent, 4 satisfied: s = 0.4 < 0.5
        let e = entry(&[(1, 5.0), (2, 10.0)]);
        let mut s = StrategyState::new(&e);
        let c = StrategyConfig { probe_interval: 1000, ..cfg() };
        for _ in 0..10 {
            assert_eq!(s.choose_face(&c, &e, &[]).face(), Some(FaceId(1)));
        }
        for _ in 0..4 {
            s.on_data(&c, FaceId(1), 10.0);
        }
        let d = s.on_failure(&c, &e, FaceId(1), FailureKind::Timeout).unwrap();
        assert_eq!(d.reason, SwitchReason::LowSatisfaction);
        assert_eq!(s.current_face, FaceId(2));
    }

    #[test]
    fn saturation_predicate() {
        let mut st = FaceStats::new(FaceId(1));
        assert!(!is_saturated(&st, &cfg()));
        st.base_delay_ms = Some(10.0);
        st.ewma_delay_ms = Some(25.0);
        assert!(is_saturated(&st, &cfg()));
        st.ewma_delay_ms = Some(15.0);
        assert!(!is_saturated(&st, &cfg()));
        st.interests_sent = 100;
        st.last_failure_sent = Some(60);
        assert!(is_saturated(&st, &cfg()));
        st.last_failure_sent = Some(50);
        assert!(!is_saturated(&st, &cfg()));
    }

    #[test]
    fn dead_faces_are_not_probed() {
        let e = entry(&[(1, 1.0), (2, 2.0), (3, 3.0)]);
        let mut s = StrategyState::new(&e);
        for _ in 0..3 {
            s.on_failure(&cfg(), &e, FaceId(2), FailureKind::Timeout);
        }
        for _ in 0..500 {
            assert_ne!(s.choose_face(&cfg(), &e, &[]).face(), Some(FaceId(2)));
        }
        s.on_data(&cfg(), FaceId(2), 1.0);
        let probed = (0..100).any(|_| s.choose_face(&cfg(), &e, &[]).face() == Some(FaceId(2)));
        assert!(probed);
    }

    #[test]
    fn failover_prefers_measured_live_faces() {
        // face 4 is cheapest by FIB cost but has never returned data; face 2
        // is measured but dead; face 3 is measured and alive
        let e = entry(&[(4, 1.0), (1, 5.0), (2, 10.0), (3, 15.0)]);
        let mut s = StrategyState::new(&e);
        s.current_face = FaceId(1);
        s.on_data(&cfg(), FaceId(2), 5.0);
        s.on_data(&cfg(), FaceId(3), 30.0);
        for _ in 0..3 {
            s.on_failure(&cfg(), &e, FaceId(2), FailureKind::Timeout);
        }
        for _ in 0..3 {
            s.on_failure(&cfg(), &e, FaceId(1), FailureKind::Timeout);
        }
        assert_eq!(s.current_face, FaceId(3));
    }

    #[test]
    fn fallback_when_current_is_excluded() {
        let e = entry(&[(1, 1.0), (2, 2.0), (3, 3.0)]);
        let mut s = StrategyState::new(&e);
        s.on_data(&cfg(), FaceId(3), 5.0);
        let c = s.choose_face(&cfg(), &e, &[FaceId(1)]);
        assert_eq!(c, Choice::Forward { face: FaceId(3), kind: ChoiceKind::Fallback });
        assert_eq!(s.current_face, FaceId(1));
    }

    #[test]
    fn adaptive_strategy_keeps_state_per_prefix() {
        let mut strat = AdaptiveStrategy::new(cfg());
        let a = entry(&[(1, 1.0), (2, 2.0)]);
        let mut b = a.clone();
        b.prefix = Name::from_uri("/u").unwrap();
        b.nexthops.reverse();
        strat.choose_face(&a, &[]);
        strat.choose_face(&b, &[]);
        assert_eq!(strat.state(&a.prefix).unwrap().current_face, FaceId(1));
        assert_eq!(strat.state(&b.prefix).unwrap().current_face, FaceId(2));
        assert_eq!(
            vec![a.prefix.clone(), b.prefix.clone()],
            strat.states().map(|(p, _)| p.clone()).collect::<Vec<_>>()
        );
    }
}
