//! Executes scenarios: builds one isolated network per run, drives it to
//! completion and turns the outcome into report rows.

use std::collections::BTreeMap;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use ntsim_core::apps::TorrentShape;
use ntsim_core::forwarder::FaceKind;
use ntsim_core::sim::{max_window_rate, AppKind, AppSpec, Dir, Network, NetworkConfig, NodeRole, Topology};
use ntsim_core::{LinkId, NodeId, SimTime};

use crate::error::HarnessError;
use crate::report::{Arrival, ConsumerReport, LinkReport, RunResult, ScenarioResult, StrategyRow, UtilRow};
use crate::scenario::{Resolved, ScenarioKind};

/// Sliding window for the download-speed metric.
pub const SPEED_WINDOW: SimTime = SimTime::from_secs(1);

/// Label used for data served from a router rather than a peer.
pub const NETWORK_SERVER: &str = "network";

/// Everything one simulation needs; owned so it can move to a worker thread.
#[derive(Debug, Clone)]
pub struct Job {
    pub label: String,
    pub topology: Topology,
    pub config: NetworkConfig,
    pub shape: TorrentShape,
    pub apps: Vec<AppSpec>,
}

/// Runs one job to completion.
pub fn run_job(job: Job) -> Result<RunResult, HarnessError> {
    let Job { label, topology, config, shape, apps } = job;
    let seed = config.seed;
    let cs_enabled = config.cs_enabled;
    let mut net = Network::new(topology, config, &shape, &apps).map_err(|e| HarnessError::Setup(e.to_string()))?;
    let summary = net.run();
    Ok(collect(&net, label, seed, cs_enabled, summary.end_time, summary.events, &apps))
}

fn node_name(topo: &Topology, n: NodeId) -> String {
    topo.node(n).name.clone()
}

fn server_label(topo: &Topology, n: NodeId) -> String {
    match topo.node(n).role {
        NodeRole::Peer => node_name(topo, n),
        NodeRole::Router => NETWORK_SERVER.to_string(),
    }
}

fn direction(topo: &Topology, link: LinkId, dir: Dir) -> String {
    let (from, to) = topo.endpoints(link, dir);
    format!("{}->{}", node_name(topo, from), node_name(topo, to))
}

fn collect(
    net: &Network,
    label: String,
    seed: u64,
    cs_enabled: bool,
    end: SimTime,
    events: u64,
    apps: &[AppSpec],
) -> RunResult {
    let topo = net.topology();

    let utilization = net
        .utilization()
        .iter()
        .map(|u| UtilRow {
            time_s: u.time.as_secs_f64(),
            link_id: u.link.0 as usize,
            direction: direction(topo, u.link, u.dir),
            utilization: u.utilization,
        })
        .collect();

    let consumers = net
        .consumers()
        .map(|(node, c)| {
            let mut provenance: BTreeMap<String, u64> = BTreeMap::new();
            for (origin, n) in c.provenance() {
                *provenance.entry(server_label(topo, *origin)).or_default() += n;
            }
            let arrivals = c
                .arrivals()
                .iter()
                .map(|a| Arrival { time_s: a.time.as_secs_f64(), server: server_label(topo, a.origin) })
                .collect();
            let start = apps.iter().find(|s| s.node == node).map(|s| s.start).unwrap_or_default();
            ConsumerReport {
                node: node_name(topo, node),
                window: c.config().window,
                start_s: start.as_secs_f64(),
                completion_s: c.completion_time().map(SimTime::as_secs_f64),
                max_speed_bps: max_window_rate(c.arrivals(), SPEED_WINDOW),
                provenance,
                retries: c.retries(),
                aborted: match (c.aborted(), c.finished_at()) {
                    (Some(r), _) => Some(r.to_string()),
                    (None, None) => Some(format!("not finished by {end}")),
                    (None, Some(_)) => None,
                },
                arrivals,
                data_packets: c.arrivals().len() as u64,
            }
        })
        .collect();

    let counters = topo.node_ids().map(|n| (node_name(topo, n), net.forwarder(n).counters())).collect();
    let producer_answers = net.producers().map(|(n, p)| (node_name(topo, n), p.answered())).collect();

    let mut links = Vec::new();
    for (i, _) in topo.links().iter().enumerate() {
        let link = LinkId(i as u32);
        for dir in [Dir::AtoB, Dir::BtoA] {
            let s = net.link_stats(link, dir);
            links.push(LinkReport {
                link_id: i,
                direction: direction(topo, link, dir),
                packets: s.packets,
                bytes: s.bytes,
                queue_drops: s.queue_drops,
                down_attempts: s.down_attempts,
                down_interest_attempts: s.down_interest_attempts,
                max_queue: s.max_queue,
            });
        }
    }

    let strategy = net
        .strategy_samples()
        .iter()
        .map(|s| {
            let fwd = net.forwarder(s.node);
            let face = match fwd.face(s.face).map(|f| f.kind) {
                Some(FaceKind::Link { neighbor, .. }) => node_name(topo, neighbor),
                Some(FaceKind::App) => "app".to_string(),
                None => s.face.to_string(),
            };
            StrategyRow {
                time_s: s.time.as_secs_f64(),
                node: node_name(topo, s.node),
                prefix: s.prefix.to_string(),
                face,
                current: s.current,
                satisfaction: s.satisfaction,
                ewma_delay_ms: s.ewma_delay_ms,
                interests_sent: s.interests_sent,
                probes: s.probes,
                spillovers: s.spillovers,
                switches: s.switches,
            }
        })
        .collect();

    let disconnects =
        apps.iter().filter_map(|a| a.disconnect_at.map(|t| (node_name(topo, a.node), t.as_secs_f64()))).collect();

    RunResult {
        label,
        seed,
        cs_enabled,
        end_time_s: end.as_secs_f64(),
        events,
        utilization,
        consumers,
        counters,
        producer_answers,
        links,
        strategy,
        disconnects,
    }
}

/// Runs jobs on scoped worker threads, keeping input order. Each thread
/// builds its own network so no simulation state is shared.
pub fn run_parallel(jobs: Vec<Job>) -> Vec<Result<RunResult, HarnessError>> {
    let workers = thread::available_parallelism().map(|n| n.get()).unwrap_or(1).max(1);
    let mut out: Vec<Option<Result<RunResult, HarnessError>>> = (0..jobs.len()).map(|_| None).collect();
    let mut queue: Vec<(usize, Job)> = jobs.into_iter().enumerate().collect();
    queue.reverse();
    while !queue.is_empty() {
        let batch: Vec<(usize, Job)> = (0..workers).filter_map(|_| queue.pop()).collect();
        thread::scope(|s| {
            let handles: Vec<_> = batch.into_iter().map(|(i, job)| (i, s.spawn(move || run_job(job)))).collect();
            for (i, h) in handles {
                out[i] = Some(h.join().expect("simulation thread panicked"));
            }
        });
    }
    out.into_iter().map(|r| r.expect("every job ran")).collect()
}

/// SHA-256 of the canonical TOML rendering, in lowercase hex.
pub fn config_hash(resolved: &Resolved) -> String {
    let canonical = toml::to_string(&resolved.scenario).unwrap_or_default();
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn with_window(apps: &[AppSpec], window: usize) -> Vec<AppSpec> {
    apps.iter()
        .cloned()
        .map(|mut a| {
            if let AppKind::Consumer(c) = &mut a.kind {
                c.window = window;
            }
            a
        })
        .collect()
}

/// Consumer start times shifted by a seeded uniform draw from `[0, jitter)`.
pub fn jittered(apps: &[AppSpec], jitter_s: f64, seed: u64) -> Vec<AppSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    apps.iter()
        .cloned()
        .map(|mut a| {
            if matches!(a.kind, AppKind::Consumer(_)) && jitter_s > 0.0 {
                let d: f64 = rng.random_range(0.0..jitter_s);
                a.start += SimTime::from_secs_f64(d);
            }
            a
        })
        .collect()
}

/// Separates the jitter stream from content generation.
const JITTER_STREAM: u64 = 0x6a69_7474_6572;

/// The runs a scenario consists of, before execution.
pub fn plan(resolved: &Resolved, seed: u64) -> Vec<Job> {
    let mut config = resolved.network.clone();
    config.seed = seed;
    let job = |label: &str, config: NetworkConfig, apps: Vec<AppSpec>| Job {
        label: label.to_string(),
        topology: resolved.topology.clone(),
        config,
        shape: resolved.shape.clone(),
        apps,
    };
    let sc = &resolved.scenario;
    match sc.sim.kind {
        ScenarioKind::Multipath => {
            let mut jobs = vec![job("main", config.clone(), resolved.apps.clone())];
            for &w in &sc.harness.window_sweep {
                jobs.push(job(&format!("window={w}"), config.clone(), with_window(&resolved.apps, w)));
            }
            jobs
        }
        ScenarioKind::Staggered | ScenarioKind::Failover => {
            vec![job("main", config, resolved.apps.clone())]
        }
        ScenarioKind::FlashCrowd => {
            let apps = jittered(&resolved.apps, sc.harness.arrival_jitter_s, seed ^ JITTER_STREAM);
            let mut off = config.clone();
            off.cs_enabled = false;
            let mut on = config;
            on.cs_enabled = true;
            vec![job("cs_off", off, apps.clone()), job("cs_on", on, apps)]
        }
    }
}

fn assemble(resolved: &Resolved, seed: u64, runs: Vec<RunResult>) -> ScenarioResult {
    let kind = match resolved.scenario.sim.kind {
        ScenarioKind::Multipath => "multipath",
        ScenarioKind::Staggered => "staggered",
        ScenarioKind::Failover => "failover",
        ScenarioKind::FlashCrowd => "flash_crowd",
    };
    let mut speeds: Vec<(usize, f64)> = runs
        .iter()
        .filter(|r| r.label.starts_with("window="))
        .filter_map(|r| r.consumers.first().map(|c| (c.window, c.max_speed_bps)))
        .collect();
    speeds.sort_by_key(|s| s.0);
    ScenarioResult {
        scenario: resolved.scenario.name.clone(),
        kind: kind.to_string(),
        seed,
        config_hash: config_hash(resolved),
        runs,
        speeds,
    }
}

/// Runs every repetition of a scenario; repetition `k` uses `base_seed + k`.
pub fn run_scenario(resolved: &Resolved, base_seed: u64, reps: usize) -> Result<Vec<ScenarioResult>, HarnessError> {
    let reps = reps.max(1);
    let mut jobs = Vec::new();
    let mut shape = Vec::with_capacity(reps);
    for k in 0..reps {
        let seed = base_seed.wrapping_add(k as u64);
        let p = plan(resolved, seed);
        shape.push((seed, p.len()));
        jobs.extend(p);
    }
    let mut results = run_parallel(jobs).into_iter();
    let mut out = Vec::with_capacity(reps);
    for (seed, n) in shape {
        let runs = results.by_ref().take(n).collect::<Result<Vec<_>, _>>()?;
        out.push(assemble(resolved, seed, runs));
    }
    Ok(out)
}

/// Runs a scenario once at its configured seed.
pub fn run_once(resolved: &Resolved) -> Result<ScenarioResult, HarnessError> {
    let seed = resolved.network.seed;
    let mut v = run_scenario(resolved, seed, 1)?;
    Ok(v.remove(0))
}

/// Fails with the first consumer that did not complete its download.
pub fn check_completed(result: &ScenarioResult) -> Result<(), HarnessError> {
    for r in &result.runs {
        for c in &r.consumers {
            if let Some(why) = &c.aborted {
                return Err(HarnessError::Aborted(format!("{} in run {}: {why}", c.node, r.label)));
            }
        }
    }
    Ok(())
}
