//! Run results, their percentile aggregation, and CSV output.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use ntsim_core::forwarder::Counters;

use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct UtilRow {
    pub time_s: f64,
    pub link_id: usize,
    /// Sender and receiver, e.g. `r3->r1`.
    pub direction: String,
    pub utilization: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arrival {
    pub time_s: f64,
    pub server: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsumerReport {
    pub node: String,
    pub window: usize,
    pub start_s: f64,
    pub completion_s: Option<f64>,
    pub max_speed_bps: f64,
    /// Serving node name (or `network` for router caches) to packet count.
    pub provenance: BTreeMap<String, u64>,
    pub retries: u64,
    pub aborted: Option<String>,
    pub arrivals: Vec<Arrival>,
    pub data_packets: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    pub link_id: usize,
    pub direction: String,
    pub packets: u64,
    pub bytes: u64,
    pub queue_drops: u64,
    pub down_attempts: u64,
    pub down_interest_attempts: u64,
    pub max_queue: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyRow {
    pub time_s: f64,
    pub node: String,
    pub prefix: String,
    pub face: String,
    pub current: bool,
    pub satisfaction: Option<f64>,
    pub ewma_delay_ms: Option<f64>,
    pub interests_sent: u64,
    pub probes: u64,
    pub spillovers: u64,
    pub switches: u64,
}

/// One simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub label: String,
    pub seed: u64,
    pub cs_enabled: bool,
    pub end_time_s: f64,
    pub events: u64,
    pub utilization: Vec<UtilRow>,
    pub consumers: Vec<ConsumerReport>,
    pub counters: Vec<(String, Counters)>,
    /// Interests answered by each producer app.
    pub producer_answers: Vec<(String, u64)>,
    pub links: Vec<LinkReport>,
    pub strategy: Vec<StrategyRow>,
    /// Disconnect times per node.
    pub disconnects: Vec<(String, f64)>,
}

impl RunResult {
    pub fn consumer(&self, node: &str) -> Option<&ConsumerReport> {
        self.consumers.iter().find(|c| c.node == node)
    }

    /// Utilization series of the direction `from->to`.
    pub fn series(&self, from: &str, to: &str) -> Vec<(f64, f64)> {
        let dir = format!("{from}->{to}");
        self.utilization.iter().filter(|u| u.direction == dir).map(|u| (u.time_s, u.utilization)).collect()
    }

    pub fn total_producer_answers(&self) -> u64 {
        self.producer_answers.iter().map(|(_, n)| n).sum()
    }
}

/// All runs that make up one scenario execution.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario: String,
    pub kind: String,
    pub seed: u64,
    pub config_hash: String,
    pub runs: Vec<RunResult>,
    /// `(window, max download speed)` from the window sweep, if any.
    pub speeds: Vec<(usize, f64)>,
}

impl ScenarioResult {
    pub fn run(&self, label: &str) -> Option<&RunResult> {
        self.runs.iter().find(|r| r.label == label)
    }

    pub fn primary(&self) -> &RunResult {
        &self.runs[0]
    }

    /// Named scalar metrics used for aggregation across repetitions.
    pub fn metrics(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        for r in &self.runs {
            for c in &r.consumers {
                if let Some(t) = c.completion_s {
                    m.insert(format!("{}/{}/completion_s", r.label, c.node), t);
                }
                m.insert(format!("{}/{}/max_speed_bps", r.label, c.node), c.max_speed_bps);
                m.insert(format!("{}/{}/retries", r.label, c.node), c.retries as f64);
            }
            m.insert(format!("{}/producer_answers", r.label), r.total_producer_answers() as f64);
        }
        for (w, s) in &self.speeds {
            m.insert(format!("sweep/window={w}/max_speed_bps"), *s);
        }
        m
    }
}

/// Nearest-rank percentile: the value at rank `ceil(p/100 * n)` (1-based)
/// of the sorted sample.
pub fn nearest_rank(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    Some(v[rank.clamp(1, n) - 1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub metric: String,
    pub runs: usize,
    pub value: f64,
}

/// Per-metric nearest-rank percentile across repetitions.
pub fn aggregate_runs(results: &[ScenarioResult], percentile: f64) -> Vec<AggregateRow> {
    let mut cells: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in results {
        for (k, v) in r.metrics() {
            cells.entry(k).or_default().push(v);
        }
    }
    cells
        .into_iter()
        .map(|(metric, vals)| AggregateRow {
            runs: vals.len(),
            value: nearest_rank(&vals, percentile).expect("cells are non-empty"),
            metric,
        })
        .collect()
}

/// Formats with six significant digits.
pub fn fmt6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // exponent after rounding to six digits, so 9.9999996 counts as 10
    let sci = format!("{x:.5e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    let prec = (5 - exp).max(0) as usize;
    format!("{x:.prec$}")
}

fn opt6(x: Option<f64>) -> String {
    x.map(fmt6).unwrap_or_default()
}

fn create(path: &Path) -> Result<csv::Writer<fs::File>, HarnessError> {
    let f = fs::File::create(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
    Ok(csv::Writer::from_writer(f))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<(), HarnessError> {
    w.flush().map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

/// Run-label column value, so several runs can share one file.
fn label_rows(result: &ScenarioResult) -> impl Iterator<Item = &RunResult> {
    result.runs.iter()
}

/// Writes the CSV files of one scenario execution into `out_dir`.
pub fn emit_csv(result: &ScenarioResult, out_dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(out_dir).map_err(|source| HarnessError::Io { path: out_dir.to_path_buf(), source })?;

    let p = out_dir.join("link_utilization.csv");
    let mut w = create(&p)?;
    w.write_record(["run", "time_s", "link_id", "direction", "utilization"])?;
    for r in label_rows(result) {
        let mut rows: Vec<&UtilRow> = r.utilization.iter().collect();
        rows.sort_by(|a, b| {
            a.time_s.total_cmp(&b.time_s).then(a.link_id.cmp(&b.link_id)).then(a.direction.cmp(&b.direction))
        });
        for u in rows {
            w.write_record([
                r.label.as_str(),
                &fmt6(u.time_s),
                &u.link_id.to_string(),
                &u.direction,
                &fmt6(u.utilization),
            ])?;
        }
    }
    finish(w, &p)?;

    let p = out_dir.join("provenance.csv");
    let mut w = create(&p)?;
    w.write_record(["run", "consumer", "server", "packets", "fraction"])?;
    for r in label_rows(result) {
        for c in &r.consumers {
            let total: u64 = c.provenance.values().sum();
            for (server, n) in &c.provenance {
                let frac = if total == 0 { 0.0 } else { *n as f64 / total as f64 };
                w.write_record([r.label.as_str(), &c.node, server, &n.to_string(), &fmt6(frac)])?;
            }
        }
    }
    finish(w, &p)?;

    if result.runs.iter().any(|r| !r.disconnects.is_empty()) {
        let p = out_dir.join("provenance_epochs.csv");
        let mut w = create(&p)?;
        w.write_record(["run", "consumer", "epoch_start_s", "epoch_end_s", "server", "packets"])?;
        for r in label_rows(result) {
            let bounds = crate::analysis::epoch_bounds(r);
            for c in &r.consumers {
                for (from, to, servers) in crate::analysis::epoch_servers(c, &bounds) {
                    let end = if to.is_finite() { fmt6(to) } else { fmt6(r.end_time_s) };
                    for (server, n) in servers {
                        w.write_record([
                            r.label.clone(),
                            c.node.clone(),
                            fmt6(from),
                            end.clone(),
                            server,
                            n.to_string(),
                        ])?;
                    }
                }
            }
        }
        finish(w, &p)?;
    }

    let p = out_dir.join("speeds.csv");
    let mut w = create(&p)?;
    w.write_record(["window", "max_speed_bps"])?;
    for (win, s) in &result.speeds {
        w.write_record([win.to_string(), fmt6(*s)])?;
    }
    finish(w, &p)?;

    let p = out_dir.join("consumers.csv");
    let mut w = create(&p)?;
    w.write_record([
        "run",
        "consumer",
        "window",
        "start_s",
        "completion_s",
        "max_speed_bps",
        "data_packets",
        "retries",
        "aborted",
    ])?;
    for r in label_rows(result) {
        for c in &r.consumers {
            w.write_record([
                r.label.clone(),
                c.node.clone(),
                c.window.to_string(),
                fmt6(c.start_s),
                opt6(c.completion_s),
                fmt6(c.max_speed_bps),
                c.data_packets.to_string(),
                c.retries.to_string(),
                c.aborted.clone().unwrap_or_default(),
            ])?;
        }
    }
    finish(w, &p)?;

    let p = out_dir.join("counters.csv");
    let mut w = create(&p)?;
    w.write_record([
        "run",
        "node",
        "interests_in",
        "interests_out",
        "data_in",
        "data_out",
        "nacks_in",
        "nacks_out",
        "cs_hits",
        "cs_inserts",
        "pit_timeouts",
        "aggregated",
        "drops",
        "unsolicited_data",
        "pit_peak",
        "producer_answers",
    ])?;
    for r in label_rows(result) {
        for (node, c) in &r.counters {
            let answers =
                r.producer_answers.iter().find(|(n, _)| n == node).map(|(_, a)| a.to_string()).unwrap_or_default();
            let vals = [
                c.interests_in,
                c.interests_out,
                c.data_in,
                c.data_out,
                c.nacks_in,
                c.nacks_out,
                c.cs_hits,
                c.cs_inserts,
                c.pit_timeouts,
                c.aggregated,
                c.drops,
                c.unsolicited_data,
                c.pit_peak,
            ];
            let mut rec = vec![r.label.clone(), node.clone()];
            rec.extend(vals.iter().map(u64::to_string));
            rec.push(answers);
            w.write_record(&rec)?;
        }
    }
    finish(w, &p)?;

    let p = out_dir.join("links.csv");
    let mut w = create(&p)?;
    w.write_record([
        "run",
        "link_id",
        "direction",
        "packets",
        "bytes",
        "queue_drops",
        "down_attempts",
        "down_interest_attempts",
        "max_queue",
    ])?;
    for r in label_rows(result) {
        for l in &r.links {
            w.write_record([
                r.label.clone(),
                l.link_id.to_string(),
                l.direction.clone(),
                l.packets.to_string(),
                l.bytes.to_string(),
                l.queue_drops.to_string(),
                l.down_attempts.to_string(),
                l.down_interest_attempts.to_string(),
                l.max_queue.to_string(),
            ])?;
        }
    }
    finish(w, &p)?;

    let p = out_dir.join("strategy.csv");
    let mut w = create(&p)?;
    w.write_record([
        "run",
        "time_s",
        "node",
        "prefix",
        "face",
        "current",
        "satisfaction",
        "ewma_delay_ms",
        "interests_sent",
        "probes",
        "spillovers",
        "switches",
    ])?;
    for r in label_rows(result) {
        for s in &r.strategy {
            w.write_record([
                r.label.clone(),
                fmt6(s.time_s),
                s.node.clone(),
                s.prefix.clone(),
                s.face.clone(),
                s.current.to_string(),
                opt6(s.satisfaction),
                opt6(s.ewma_delay_ms),
                s.interests_sent.to_string(),
                s.probes.to_string(),
                s.spillovers.to_string(),
                s.switches.to_string(),
            ])?;
        }
    }
    finish(w, &p)?;

    let p = out_dir.join("run.txt");
    let mut f = fs::File::create(&p).map_err(|source| HarnessError::Io { path: p.clone(), source })?;
    let meta = format!(
        "scenario = {}\nkind = {}\nseed = {}\nconfig_hash = {}\n",
        result.scenario, result.kind, result.seed, result.config_hash
    );
    f.write_all(meta.as_bytes()).map_err(|source| HarnessError::Io { path: p.clone(), source })?;
    Ok(())
}

pub fn emit_aggregate(rows: &[AggregateRow], percentile: f64, out_dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(out_dir).map_err(|source| HarnessError::Io { path: out_dir.to_path_buf(), source })?;
    let p = out_dir.join("aggregate.csv");
    let mut w = create(&p)?;
    w.write_record(["metric", "runs", "percentile", "value"])?;
    for r in rows {
        w.write_record([r.metric.clone(), r.runs.to_string(), fmt6(percentile), fmt6(r.value)])?;
    }
    finish(w, &p)
}
