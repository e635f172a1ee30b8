//! Scenario files: TOML parsing, dotted-path overrides and validation into
//! the simulator's types.

use serde::{Deserialize, Serialize};
use toml::Spanned;

use ntsim_core::apps::{ConsumerConfig, TorrentShape};
use ntsim_core::sim::{AppKind, AppSpec, LinkSpec, NetworkConfig, NodeRole, NodeSpec, Topology};
use ntsim_core::strategy::StrategyConfig;
use ntsim_core::{Name, SimTime};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// One consumer, several seeders; optional window sweep.
    Multipath,
    /// Consumers starting at different times.
    Staggered,
    /// Seeders leaving during the download.
    Failover,
    /// Many consumers, run with and without in-network caching.
    FlashCrowd,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub sim: SimSection,
    pub torrent: TorrentSection,
    #[serde(default)]
    pub strategy: StrategySection,
    #[serde(default)]
    pub consumer: ConsumerSection,
    pub nodes: Vec<NodeEntry>,
    pub links: Vec<LinkEntry>,
    pub apps: Vec<AppEntry>,
    #[serde(default)]
    pub harness: HarnessSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub kind: ScenarioKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub t_end_s: f64,
    #[serde(default = "default_interval")]
    pub metrics_interval_ms: u64,
    #[serde(default)]
    pub cs_enabled: bool,
}

fn default_seed() -> u64 {
    1
}

fn default_interval() -> u64 {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorrentSection {
    pub name: String,
    pub num_files: usize,
    pub packets_per_file: usize,
    pub packet_payload_bytes: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySection {
    pub satisfaction_threshold: Option<f64>,
    pub max_consecutive_failures: Option<u32>,
    pub probe_interval: Option<u32>,
    pub ewma_alpha: Option<f64>,
    pub saturation_inflation: Option<f64>,
    pub min_samples: Option<u32>,
}

/// Defaults applied to every consumer app.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsumerSection {
    pub window: Option<usize>,
    pub retry_limit: Option<u32>,
    pub lifetime_ms: Option<u32>,
    pub retry_grace_ms: Option<u32>,
    pub nack_retry_ms: Option<u32>,
    pub stats_table: Option<bool>,
    pub pace_interval_ms: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleEntry {
    Router,
    Peer,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: Spanned<String>,
    pub role: RoleEntry,
    #[serde(default)]
    pub cs_capacity: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkEntry {
    pub a: Spanned<String>,
    pub b: Spanned<String>,
    pub bandwidth_bps: Spanned<u64>,
    pub prop_delay_ms: Spanned<f64>,
    #[serde(default = "default_queue")]
    pub queue_capacity: Spanned<usize>,
}

fn default_queue() -> Spanned<usize> {
    Spanned::new(0..0, 64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AppRole {
    Producer,
    Consumer,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppEntry {
    pub node: Spanned<String>,
    pub role: AppRole,
    #[serde(default)]
    pub start_s: f64,
    pub window: Option<usize>,
    pub disconnect_s: Option<f64>,
    pub connect_s: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessSection {
    /// Windows for the download-speed sweep (multipath scenarios).
    #[serde(default)]
    pub window_sweep: Vec<usize>,
    /// Consumer start times are shifted by a uniform draw from `[0, jitter)`.
    #[serde(default)]
    pub arrival_jitter_s: f64,
}

/// Everything needed to build one simulation run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: Scenario,
    pub topology: Topology,
    pub network: NetworkConfig,
    pub shape: TorrentShape,
    pub apps: Vec<AppSpec>,
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn at<T>(src: &str, s: &Spanned<T>, msg: String) -> ConfigError {
    let span = s.span();
    if span.start == span.end {
        ConfigError::Invalid { line: None, msg }
    } else {
        ConfigError::Invalid { line: Some(line_of(src, span.start)), msg }
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { line: None, msg: msg.into() }
}

/// Parses a value written on the command line as TOML, falling back to a
/// bare string.
fn parse_override_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&doc) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies `path=value` to a parsed document. Path segments are table keys
/// or array indices, e.g. `apps.0.window=250`.
pub fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (path, raw) =
        spec.split_once('=').ok_or_else(|| ConfigError::Override(format!("'{spec}' is not key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError::Override(format!("bad key path '{path}'")));
    }
    let value = parse_override_value(raw.trim());
    let (last, parents) = keys.split_last().expect("non-empty");
    let mut cur: &mut toml::Value = doc
        .entry(parents.first().copied().unwrap_or(last).to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    if parents.is_empty() {
        *cur = value;
        return Ok(());
    }
    for k in &parents[1..] {
        cur = step(cur, k, path)?;
    }
    match cur {
        toml::Value::Table(t) => {
            t.insert(last.to_string(), value);
        }
        toml::Value::Array(a) => {
            let i: usize =
                last.parse().map_err(|_| ConfigError::Override(format!("'{last}' is not an index in '{path}'")))?;
            let slot =
                a.get_mut(i).ok_or_else(|| ConfigError::Override(format!("index {i} out of range in '{path}'")))?;
            *slot = value;
        }
        _ => return Err(ConfigError::Override(format!("'{path}' does not name a table entry"))),
    }
    Ok(())
}

fn step<'a>(cur: &'a mut toml::Value, key: &str, path: &str) -> Result<&'a mut toml::Value, ConfigError> {
    match cur {
        toml::Value::Table(t) => Ok(t.entry(key.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()))),
        toml::Value::Array(a) => {
            let i: usize =
                key.parse().map_err(|_| ConfigError::Override(format!("'{key}' is not an index in '{path}'")))?;
            a.get_mut(i).ok_or_else(|| ConfigError::Override(format!("index {i} out of range in '{path}'")))
        }
        _ => Err(ConfigError::Override(format!("'{path}' goes through a non-table value"))),
    }
}

/// Parses scenario text, applying overrides first when there are any.
pub fn parse(src: &str, overrides: &[String]) -> Result<(Scenario, String), ConfigError> {
    let text = if overrides.is_empty() {
        src.to_string()
    } else {
        let mut doc: toml::Table = toml::from_str(src).map_err(|e| ConfigError::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        toml::to_string(&doc).map_err(|e| ConfigError::Parse(e.to_string()))?
    };
    let sc: Scenario = toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    Ok((sc, text))
}

fn secs(s: f64, what: &str) -> Result<SimTime, ConfigError> {
    if !s.is_finite() || s < 0.0 {
        return Err(invalid(format!("{what} must be a non-negative number of seconds")));
    }
    Ok(SimTime::from_secs_f64(s))
}

impl Scenario {
    /// Scales the torrent to 100 MiB at the configured payload size.
    pub fn full_scale(&mut self) {
        let total = 100 * 1024 * 1024 / self.torrent.packet_payload_bytes.max(1);
        self.torrent.packets_per_file = total.div_ceil(self.torrent.num_files.max(1));
    }

    pub fn strategy_config(&self) -> StrategyConfig {
        let d = StrategyConfig::default();
        let s = &self.strategy;
        StrategyConfig {
            satisfaction_threshold: s.satisfaction_threshold.unwrap_or(d.satisfaction_threshold),
            max_consecutive_failures: s.max_consecutive_failures.unwrap_or(d.max_consecutive_failures),
            probe_interval: s.probe_interval.unwrap_or(d.probe_interval),
            ewma_alpha: s.ewma_alpha.unwrap_or(d.ewma_alpha),
            saturation_inflation: s.saturation_inflation.unwrap_or(d.saturation_inflation),
            min_samples: s.min_samples.unwrap_or(d.min_samples),
        }
    }

    /// Validates against `src` (the text this scenario was parsed from, for
    /// line numbers) and builds the simulator inputs.
    pub fn resolve(&self, src: &str) -> Result<Resolved, ConfigError> {
        let strategy = self.strategy_config();
        strategy.validate().map_err(|e| invalid(e.to_string()))?;
        if self.sim.metrics_interval_ms == 0 {
            return Err(invalid("sim.metrics_interval_ms must be positive"));
        }
        let t_end = secs(self.sim.t_end_s, "sim.t_end_s")?;

        let t = &self.torrent;
        let name = Name::from_uri(&t.name).map_err(|e| invalid(format!("torrent.name: {e}")))?;
        if name.is_empty() {
            return Err(invalid("torrent.name must have at least one component"));
        }
        if t.num_files == 0 || t.packets_per_file == 0 {
            return Err(invalid("torrent needs at least one file and one packet per file"));
        }
        if t.packet_payload_bytes < 64 {
            return Err(invalid("torrent.packet_payload_bytes must be at least 64"));
        }
        let shape = TorrentShape {
            name: name.clone(),
            num_files: t.num_files,
            packets_per_file: t.packets_per_file,
            packet_payload_bytes: t.packet_payload_bytes,
        };

        let mut nodes = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            if n.id.get_ref().is_empty() {
                return Err(at(src, &n.id, "node id must not be empty".into()));
            }
            if nodes.iter().any(|m: &NodeSpec| &m.name == n.id.get_ref()) {
                return Err(at(src, &n.id, format!("duplicate node '{}'", n.id.get_ref())));
            }
            nodes.push(NodeSpec {
                name: n.id.get_ref().clone(),
                role: match n.role {
                    RoleEntry::Router => NodeRole::Router,
                    RoleEntry::Peer => NodeRole::Peer,
                },
                cs_capacity: n.cs_capacity,
            });
        }
        let names: Vec<String> = nodes.iter().map(|n| n.name.clone()).collect();
        let lookup = |s: &Spanned<String>| {
            names
                .iter()
                .position(|n| n == s.get_ref())
                .map(|i| ntsim_core::NodeId(i as u32))
                .ok_or_else(|| at(src, s, format!("unknown node '{}'", s.get_ref())))
        };
        let mut links = Vec::with_capacity(self.links.len());
        for l in &self.links {
            let a = lookup(&l.a)?;
            let b = lookup(&l.b)?;
            if *l.bandwidth_bps.get_ref() == 0 {
                return Err(at(src, &l.bandwidth_bps, "bandwidth_bps must be positive".into()));
            }
            let d = *l.prop_delay_ms.get_ref();
            if !d.is_finite() || d < 0.0 {
                return Err(at(src, &l.prop_delay_ms, "prop_delay_ms must be non-negative".into()));
            }
            if *l.queue_capacity.get_ref() == 0 {
                return Err(at(src, &l.queue_capacity, "queue_capacity must be positive".into()));
            }
            links.push(LinkSpec {
                a,
                b,
                bandwidth_bps: *l.bandwidth_bps.get_ref(),
                prop_delay: SimTime::from_millis_f64(d),
                queue_capacity: *l.queue_capacity.get_ref(),
            });
        }
        let topology = Topology::new(nodes, links).map_err(|e| invalid(e.to_string()))?;

        let c = &self.consumer;
        let mut apps = Vec::with_capacity(self.apps.len());
        for app in &self.apps {
            let node = lookup(&app.node)?;
            if apps.iter().any(|s: &AppSpec| s.node == node) {
                return Err(at(src, &app.node, format!("node '{}' already has an app", app.node.get_ref())));
            }
            let kind = match app.role {
                AppRole::Producer => AppKind::Producer,
                AppRole::Consumer => {
                    let mut cfg = ConsumerConfig::new(name.clone(), 1);
                    cfg.window = app.window.or(c.window).unwrap_or(cfg.window);
                    if cfg.window == 0 {
                        return Err(at(src, &app.node, "consumer window must be positive".into()));
                    }
                    cfg.retry_limit = c.retry_limit.unwrap_or(cfg.retry_limit);
                    cfg.lifetime_ms = c.lifetime_ms.unwrap_or(cfg.lifetime_ms);
                    cfg.retry_grace_ms = c.retry_grace_ms.unwrap_or(cfg.retry_grace_ms);
                    cfg.nack_retry_ms = c.nack_retry_ms.unwrap_or(cfg.nack_retry_ms);
                    cfg.stats_table = c.stats_table.unwrap_or(cfg.stats_table);
                    cfg.pace_interval_ms = c.pace_interval_ms.or(cfg.pace_interval_ms);
                    if cfg.lifetime_ms == 0 {
                        return Err(invalid("consumer.lifetime_ms must be positive"));
                    }
                    AppKind::Consumer(cfg)
                }
            };
            let disconnect_at = app.disconnect_s.map(|s| secs(s, "disconnect_s")).transpose()?;
            let connect_at = app.connect_s.map(|s| secs(s, "connect_s")).transpose()?;
            if let (Some(d), Some(c)) = (disconnect_at, connect_at) {
                if c < d {
                    return Err(at(src, &app.node, "connect_s must not precede disconnect_s".into()));
                }
            }
            apps.push(AppSpec { node, kind, start: secs(app.start_s, "start_s")?, disconnect_at, connect_at });
        }
        if !apps.iter().any(|a| a.kind == AppKind::Producer) {
            return Err(invalid("scenario needs at least one producer"));
        }
        if !apps.iter().any(|a| matches!(a.kind, AppKind::Consumer(_))) {
            return Err(invalid("scenario needs at least one consumer"));
        }
        if self.harness.window_sweep.contains(&0) {
            return Err(invalid("harness.window_sweep entries must be positive"));
        }
        let j = self.harness.arrival_jitter_s;
        if !j.is_finite() || j < 0.0 {
            return Err(invalid("harness.arrival_jitter_s must be non-negative"));
        }

        let network = NetworkConfig {
            seed: self.sim.seed,
            t_end,
            metrics_interval: SimTime::from_millis(self.sim.metrics_interval_ms),
            cs_enabled: self.sim.cs_enabled,
            strategy,
            event_log: false,
        };
        Ok(Resolved { scenario: self.clone(), topology, network, shape, apps })
    }
}

/// Parses, applies overrides and validates in one step.
pub fn load(src: &str, overrides: &[String]) -> Result<Resolved, ConfigError> {
    let (sc, text) = parse(src, overrides)?;
    sc.resolve(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI: &str = r#"
name = "mini"

[sim]
kind = "multipath"
t_end_s = 10

[torrent]
name = "/t"
num_files = 1
packets_per_file = 4
packet_payload_bytes = 256

[[nodes]]
id = "c"
role = "peer"

[[nodes]]
id = "p"
role = "peer"

[[links]]
a = "c"
b = "p"
bandwidth_bps = 1000000
prop_delay_ms = 2.5

[[apps]]
node = "p"
role = "producer"

[[apps]]
node = "c"
role = "consumer"
window = 4
"#;

    #[test]
    fn loads_minimal_scenario() {
        let r = load(MINI, &[]).unwrap();
        assert_eq!(r.topology.nodes().len(), 2);
        assert_eq!(r.topology.links()[0].queue_capacity, 64);
        assert_eq!(r.topology.links()[0].prop_delay, SimTime::from_micros(2500));
        assert_eq!(r.apps.len(), 2);
        assert_eq!(r.network.metrics_interval, SimTime::from_millis(100));
    }

    #[test]
    fn unknown_node_reports_line() {
        let bad = MINI.replace("b = \"p\"", "b = \"nowhere\"");
        match load(&bad, &[]) {
            Err(ConfigError::Invalid { line: Some(l), msg }) => {
                assert_eq!(bad.lines().nth(l - 1).unwrap().trim(), "b = \"nowhere\"");
                assert!(msg.contains("nowhere"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_bandwidth_rejected() {
        let bad = MINI.replace("bandwidth_bps = 1000000", "bandwidth_bps = 0");
        assert!(matches!(load(&bad, &[]), Err(ConfigError::Invalid { line: Some(_), .. })));
    }

    #[test]
    fn parse_error_is_surfaced() {
        assert!(matches!(load("name = ", &[]), Err(ConfigError::Parse(_))));
        let unknown = MINI.replace("[sim]", "[sim]\nbogus = 1");
        assert!(matches!(load(&unknown, &[]), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn overrides_by_path() {
        let r = load(
            MINI,
            &[
                "apps.1.window=9".into(),
                "sim.seed=77".into(),
                "strategy.probe_interval=10".into(),
                "links.0.prop_delay_ms=4".into(),
            ],
        )
        .unwrap();
        let AppKind::Consumer(c) = &r.apps[1].kind else { panic!() };
        assert_eq!(c.window, 9);
        assert_eq!(r.network.seed, 77);
        assert_eq!(r.network.strategy.probe_interval, 10);
        assert_eq!(r.topology.links()[0].prop_delay, SimTime::from_millis(4));
        assert!(matches!(load(MINI, &["apps.7.window=1".into()]), Err(ConfigError::Override(_))));
        assert!(matches!(load(MINI, &["nonsense".into()]), Err(ConfigError::Override(_))));
    }

    #[test]
    fn full_scale_is_100_mib() {
        let (mut sc, _) = parse(MINI, &[]).unwrap();
        sc.torrent.num_files = 10;
        sc.torrent.packet_payload_bytes = 1024;
        sc.full_scale();
        assert_eq!(sc.torrent.num_files * sc.torrent.packets_per_file, 102_400);
    }
}
