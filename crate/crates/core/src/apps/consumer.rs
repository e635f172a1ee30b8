use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::{AppAction, AppCtx};
use crate::packets::{Data, Interest, Nack, Name, DEFAULT_LIFETIME_MS};
use crate::torrent::{
    classify, decode_manifest, decode_torrent_file, segment_count_from_first, segment_name, torrent_file_base,
    FileManifest, InterestQueue, NameKind, StatsSummary, StatsTable, TorrentError, TorrentManager,
};
use crate::{NodeId, SimTime};

#[derive(Debug, Clone, PartialEq)]
pub struct ConsumerConfig {
    pub torrent_name: Name,
    /// Maximum Interests in flight.
    pub window: usize,
    /// Retransmissions allowed per name before the download aborts.
    pub retry_limit: u32,
    pub lifetime_ms: u32,
    /// Extra wait past the Interest lifetime before retrying a silent request.
    pub retry_grace_ms: u32,
    /// Wait after a Nack before retrying.
    pub nack_retry_ms: u32,
    pub stats_table: bool,
    /// Pace Interests through an application queue; `None` sends at once.
    pub pace_interval_ms: Option<u64>,
}

impl ConsumerConfig {
    pub fn new(torrent_name: Name, window: usize) -> Self {
        ConsumerConfig {
            torrent_name,
            window,
            retry_limit: 16,
            lifetime_ms: DEFAULT_LIFETIME_MS,
            retry_grace_ms: 500,
            nack_retry_ms: 200,
            stats_table: false,
            pace_interval_ms: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    FetchTorrentFile,
    FetchManifests,
    FetchData,
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbortReason {
    RetriesExhausted { name: Name, retries: u32 },
    BadCatalog(TorrentError),
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbortReason::RetriesExhausted { name, retries } => {
                write!(f, "gave up on {name} after {retries} retries")
            }
            AbortReason::BadCatalog(e) => write!(f, "undecodable catalog: {e}"),
        }
    }
}

/// A torrent data packet newly stored by a consumer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DataArrival {
    pub time: SimTime,
    pub origin: NodeId,
    pub bytes: usize,
}

#[derive(Debug, Clone)]
struct Request {
    nonce: u64,
    sent: SimTime,
    retries: u32,
    token: u64,
}

/// Segments of one catalog object (torrent-file or manifest).
#[derive(Debug, Clone)]
struct Segments {
    base: Name,
    slots: Option<Vec<Option<Data>>>,
}

impl Segments {
    fn new(base: Name) -> Self {
        Segments { base, slots: None }
    }

    fn wanted(&self) -> Vec<Name> {
        match &self.slots {
            None => vec![segment_name(&self.base, 0)],
            Some(s) => {
                s.iter().enumerate().filter(|(_, d)| d.is_none()).map(|(i, _)| segment_name(&self.base, i)).collect()
            }
        }
    }

    fn complete(&self) -> Option<Vec<Data>> {
        let s = self.slots.as_ref()?;
        s.iter().cloned().collect()
    }

    /// Stores segment `d`; returns false when it does not belong here.
    fn store(&mut self, d: &Data) -> bool {
        let Some(idx) = segment_index(&self.base, &d.name) else {
            return false;
        };
        if self.slots.is_none() {
            if idx != 0 {
                return false;
            }
            let Some(n) = segment_count_from_first(d) else {
                return false;
            };
            self.slots = Some(vec![None; n]);
        }
        match self.slots.as_mut().and_then(|s| s.get_mut(idx)) {
            Some(slot @ None) => {
                *slot = Some(d.clone());
                true
            }
            _ => false,
        }
    }
}

fn segment_index(base: &Name, name: &Name) -> Option<usize> {
    if name.len() != base.len() + 1 || !base.is_prefix_of(name) {
        return None;
    }
    let c = name.last()?;
    let digits = c.strip_prefix(b"s")?;
    core::str::from_utf8(digits).ok()?.parse().ok()
}

const PACE_TOKEN: u64 = 0;

/// A leecher: fetches the torrent-file, then every manifest, then the data
/// packets in catalog order, and serves everything it holds.
#[derive(Debug, Clone)]
pub struct ConsumerApp {
    cfg: ConsumerConfig,
    phase: Phase,
    torrent_file: Segments,
    manifests: Vec<Segments>,
    tm: Option<TorrentManager>,
    issue_cursor: usize,
    in_flight: BTreeMap<Name, Request>,
    timers: BTreeMap<u64, Name>,
    next_token: u64,
    store: BTreeMap<Name, Data>,
    provenance: BTreeMap<NodeId, u64>,
    arrivals: Vec<DataArrival>,
    retries: u64,
    announced: bool,
    served: u64,
    started: Option<SimTime>,
    finished: Option<SimTime>,
    aborted: Option<AbortReason>,
    stats: Option<StatsTable>,
    data_phase_start: Option<SimTime>,
    pacing: Option<InterestQueue>,
    pace_timer_at: Option<SimTime>,
    max_in_flight: usize,
}

impl ConsumerApp {
    pub fn new(cfg: ConsumerConfig) -> Self {
        let torrent_file = Segments::new(torrent_file_base(&cfg.torrent_name));
        let pacing = cfg.pace_interval_ms.map(|ms| InterestQueue::new(SimTime::from_millis(ms)));
        ConsumerApp {
            cfg,
            phase: Phase::FetchTorrentFile,
            torrent_file,
            manifests: Vec::new(),
            tm: None,
            issue_cursor: 0,
            in_flight: BTreeMap::new(),
            timers: BTreeMap::new(),
            next_token: PACE_TOKEN + 1,
            store: BTreeMap::new(),
            provenance: BTreeMap::new(),
            arrivals: Vec::new(),
            retries: 0,
            announced: false,
            served: 0,
            started: None,
            finished: None,
            aborted: None,
            stats: None,
            data_phase_start: None,
            pacing,
            pace_timer_at: None,
            max_in_flight: 0,
        }
    }

    pub fn config(&self) -> &ConsumerConfig {
        &self.cfg
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight.len()
    }

    pub fn max_in_flight(&self) -> usize {
        self.max_in_flight
    }

    pub fn manager(&self) -> Option<&TorrentManager> {
        self.tm.as_ref()
    }

    /// Data packets obtained from each serving node.
    pub fn provenance(&self) -> &BTreeMap<NodeId, u64> {
        &self.provenance
    }

    pub fn arrivals(&self) -> &[DataArrival] {
        &self.arrivals
    }

    pub fn retries(&self) -> u64 {
        self.retries
    }

    pub fn served(&self) -> u64 {
        self.served
    }

    pub fn started_at(&self) -> Option<SimTime> {
        self.started
    }

    pub fn finished_at(&self) -> Option<SimTime> {
        self.finished
    }

    pub fn completion_time(&self) -> Option<SimTime> {
        Some(self.finished?.saturating_sub(self.started?))
    }

    pub fn aborted(&self) -> Option<&AbortReason> {
        self.aborted.as_ref()
    }

    pub fn is_stopped(&self) -> bool {
        self.phase == Phase::Done || self.aborted.is_some()
    }

    pub fn stats_summary(&self, now: SimTime) -> Option<StatsSummary> {
        self.stats.as_ref()?.summary(now).ok()
    }

    pub fn holds(&self, name: &Name) -> bool {
        self.store.contains_key(name)
    }

    pub fn start(&mut self, ctx: &mut AppCtx<'_>) {
        self.started = Some(ctx.now);
        self.fill(ctx);
    }

    /// Serves any held object, stamped with this node as origin.
    pub fn on_interest(&mut self, ctx: &mut AppCtx<'_>, i: &Interest) {
        if let Some(d) = self.store.get(&i.name) {
            self.served += 1;
            ctx.push(AppAction::SendData(d.restamped(ctx.node)));
        }
    }

    pub fn on_data(&mut self, ctx: &mut AppCtx<'_>, d: Data) {
        if self.is_stopped() {
            return;
        }
        let Some(req) = self.in_flight.remove(&d.name) else {
            return;
        };
        self.timers.remove(&req.token);
        if !d.verify() {
            self.reissue(ctx, d.name, req);
            return;
        }
        if self.cfg.stats_table && classify(&self.cfg.torrent_name, &d.name) == NameKind::DataPacket {
            if let Some(tm) = &self.tm {
                let total = (tm.catalog().len() * d.content.len()) as u64;
                let start = self.data_phase_start.unwrap_or(ctx.now);
                let st = self.stats.get_or_insert_with(|| StatsTable::new(start, total));
                st.record(ctx.now.saturating_sub(req.sent).as_millis_f64(), d.content.len() as u64);
            }
        }
        match classify(&self.cfg.torrent_name, &d.name) {
            NameKind::TorrentFileSegment => {
                if self.torrent_file.store(&d) {
                    self.store.insert(d.name.clone(), d);
                }
                self.advance(ctx);
            }
            NameKind::ManifestSegment => {
                if let Some(m) = self.manifests.iter_mut().find(|m| m.base.is_prefix_of(&d.name)) {
                    if m.store(&d) {
                        self.store.insert(d.name.clone(), d);
                    }
                }
                self.advance(ctx);
            }
            NameKind::DataPacket => self.on_packet(ctx, d),
            NameKind::Unknown => {}
        }
        self.fill(ctx);
    }

    fn on_packet(&mut self, ctx: &mut AppCtx<'_>, d: Data) {
        let Some(tm) = &mut self.tm else { return };
        if !tm.record_received(&d) {
            return;
        }
        *self.provenance.entry(d.origin).or_default() += 1;
        self.arrivals.push(DataArrival { time: ctx.now, origin: d.origin, bytes: d.content.len() });
        let done = tm.is_complete();
        self.store.insert(d.name.clone(), d);
        if !self.announced {
            self.announced = true;
            ctx.push(AppAction::Announce(self.cfg.torrent_name.clone()));
        }
        if done {
            self.phase = Phase::Done;
            self.finished = Some(ctx.now);
            ctx.push(AppAction::Finished);
        }
    }

    fn abort(&mut self, ctx: &mut AppCtx<'_>, reason: AbortReason) {
        self.aborted = Some(reason.clone());
        self.in_flight.clear();
        self.timers.clear();
        ctx.push(AppAction::Aborted(reason));
    }

    /// Moves to the next phase once the current catalog object is complete.
    fn advance(&mut self, ctx: &mut AppCtx<'_>) {
        if self.phase == Phase::FetchTorrentFile {
            let Some(segs) = self.torrent_file.complete() else { return };
            match decode_torrent_file(&self.cfg.torrent_name, &segs) {
                Ok(tf) => {
                    self.manifests = tf.manifest_names.into_iter().map(Segments::new).collect();
                    self.phase = Phase::FetchManifests;
                }
                Err(e) => return self.abort(ctx, AbortReason::BadCatalog(e)),
            }
        }
        if self.phase == Phase::FetchManifests {
            let mut decoded: Vec<FileManifest> = Vec::with_capacity(self.manifests.len());
            for m in &self.manifests {
                let Some(segs) = m.complete() else { return };
                match decode_manifest(&m.base, &segs) {
                    Ok(fm) => decoded.push(fm),
                    Err(e) => return self.abort(ctx, AbortReason::BadCatalog(e)),
                }
            }
            let catalog = decoded.into_iter().flat_map(|m| m.packet_names).collect();
            self.tm = Some(TorrentManager::new(catalog));
            self.data_phase_start = Some(ctx.now);
            self.phase = Phase::FetchData;
        }
    }

    fn next_names(&mut self, room: usize) -> Vec<Name> {
        let mut out = Vec::new();
        match self.phase {
            Phase::FetchTorrentFile => out = self.torrent_file.wanted(),
            Phase::FetchManifests => {
                for m in &self.manifests {
                    out.extend(m.wanted());
                }
            }
            Phase::FetchData => {
                let tm = self.tm.as_ref().expect("data phase has a manager");
                let cat = tm.catalog();
                while out.len() < room && self.issue_cursor < cat.len() {
                    let n = &cat[self.issue_cursor];
                    if !tm.has(n) && !self.in_flight.contains_key(n) {
                        out.push(n.clone());
                    }
                    self.issue_cursor += 1;
                }
                return out;
            }
            Phase::Done => {}
        }
        out.retain(|n| !self.in_flight.contains_key(n));
        out.truncate(room);
        out
    }

    fn fill(&mut self, ctx: &mut AppCtx<'_>) {
        if self.is_stopped() {
            return;
        }
        let room = self.cfg.window.saturating_sub(self.in_flight.len());
        if room == 0 {
            return;
        }
        for name in self.next_names(room) {
            let token = self.next_token;
            self.next_token += 1;
            let req = Request { nonce: 0, sent: ctx.now, retries: 0, token };
            self.issue(ctx, name, req);
        }
        self.max_in_flight = self.max_in_flight.max(self.in_flight.len());
    }

    fn issue(&mut self, ctx: &mut AppCtx<'_>, name: Name, mut req: Request) {
        req.nonce = ctx.next_nonce();
        req.sent = ctx.now;
        let wait = u64::from(self.cfg.lifetime_ms) + u64::from(self.cfg.retry_grace_ms);
        ctx.push(AppAction::SetTimer { at: ctx.now + SimTime::from_millis(wait), token: req.token });
        self.timers.insert(req.token, name.clone());
        let interest = Interest::new(name.clone(), req.nonce, self.cfg.lifetime_ms);
        self.in_flight.insert(name, req);
        match &mut self.pacing {
            None => ctx.push(AppAction::SendInterest(interest)),
            Some(q) => {
                q.enqueue(interest);
                self.drain_pacing(ctx);
            }
        }
    }

    fn drain_pacing(&mut self, ctx: &mut AppCtx<'_>) {
        let Some(q) = &mut self.pacing else { return };
        while let Some(i) = q.dequeue_ready(ctx.now) {
            ctx.push(AppAction::SendInterest(i));
        }
        if let Some(at) = q.next_ready_at().filter(|_| !q.is_empty()) {
            if self.pace_timer_at.is_none_or(|t| t <= ctx.now || at < t) {
                self.pace_timer_at = Some(at);
                ctx.push(AppAction::SetTimer { at, token: PACE_TOKEN });
            }
        }
    }

    fn reissue(&mut self, ctx: &mut AppCtx<'_>, name: Name, mut req: Request) {
        req.retries += 1;
        self.retries += 1;
        if req.retries > self.cfg.retry_limit {
            let retries = req.retries - 1;
            return self.abort(ctx, AbortReason::RetriesExhausted { name, retries });
        }
        self.timers.remove(&req.token);
        req.token = self.next_token;
        self.next_token += 1;
        self.issue(ctx, name, req);
    }

    pub fn on_timer(&mut self, ctx: &mut AppCtx<'_>, token: u64) {
        if self.is_stopped() {
            return;
        }
        if token == PACE_TOKEN {
            self.drain_pacing(ctx);
            return;
        }
        let Some(name) = self.timers.remove(&token) else { return };
        let Some(req) = self.in_flight.remove(&name) else { return };
        self.reissue(ctx, name, req);
    }

    /// A Nack for an outstanding request schedules its retry after
    /// `nack_retry_ms`.
    pub fn on_nack(&mut self, ctx: &mut AppCtx<'_>, n: &Nack) {
        if self.is_stopped() {
            return;
        }
        let Some(req) = self.in_flight.get_mut(&n.name) else { return };
        if req.nonce != n.nonce {
            return;
        }
        // the nonce is spent; the retry timer below re-sends with a new one
        req.nonce = 0;
        self.timers.remove(&req.token);
        let token = self.next_token;
        self.next_token += 1;
        req.token = token;
        self.timers.insert(token, n.name.clone());
        ctx.push(AppAction::SetTimer { at: ctx.now + SimTime::from_millis(u64::from(self.cfg.nack_retry_ms)), token });
    }
}
