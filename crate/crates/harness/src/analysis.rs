//! Checks over run results: link utilization phases, speed curve shape,
//! provenance tables, failover epochs and cache offload.

use std::collections::BTreeMap;

use crate::report::{ConsumerReport, RunResult, ScenarioResult};

/// Outcome of one check, with the measured values for the log line.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(pass: bool, detail: String) -> Self {
        Check { pass, detail }
    }
}

/// First sample time at which `series` satisfies `pred`.
pub fn first_time(series: &[(f64, f64)], pred: impl Fn(f64) -> bool) -> Option<f64> {
    series.iter().find(|(_, u)| pred(*u)).map(|(t, _)| *t)
}

/// Mean utilization of samples whose interval lies inside `[from, to]`.
pub fn mean_between(series: &[(f64, f64)], from: f64, to: f64) -> f64 {
    let v: Vec<f64> = series.iter().filter(|(t, _)| *t >= from && *t <= to).map(|(_, u)| *u).collect();
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// The middle half of a consumer's data phase, as `(from, to)` seconds.
pub fn steady_state(c: &ConsumerReport) -> Option<(f64, f64)> {
    let first = c.arrivals.first()?.time_s;
    let last = c.arrivals.last()?.time_s;
    let span = last - first;
    Some((first + span * 0.25, first + span * 0.75))
}

/// Primary link saturates first, then both router links stay busy.
pub fn multipath_phases(
    run: &RunResult,
    consumer: &str,
    primary: (&str, &str),
    secondary: (&str, &str),
) -> (Check, Check) {
    let p = run.series(primary.0, primary.1);
    let s = run.series(secondary.0, secondary.1);
    let t_primary = first_time(&p, |u| u >= 0.95);
    let t_secondary = first_time(&s, |u| u > 0.10);
    let ordered = match (t_primary, t_secondary) {
        (Some(a), Some(b)) => a < b,
        (Some(_), None) => true,
        _ => false,
    };
    let a = Check::new(ordered, format!("primary >=95% at {:?} s, secondary >10% at {:?} s", t_primary, t_secondary));
    let b = match run.consumer(consumer).and_then(steady_state) {
        Some((from, to)) => {
            let mp = mean_between(&p, from, to);
            let ms = mean_between(&s, from, to);
            Check::new(
                mp >= 0.95 && ms >= 0.90,
                format!("steady state [{from:.1}, {to:.1}] s: primary {mp:.3}, secondary {ms:.3}"),
            )
        }
        None => Check::new(false, format!("{consumer} received no data")),
    };
    (a, b)
}

/// Speed curve: monotone, near-linear at the low end, capped by and close
/// to the bottleneck sum.
pub fn speed_shape(speeds: &[(usize, f64)], capacity_bps: f64) -> Check {
    let get = |w: usize| speeds.iter().find(|s| s.0 == w).map(|s| s.1);
    let monotone = speeds.windows(2).all(|p| p[1].1 >= p[0].1);
    let ratio = match (get(500), get(250)) {
        (Some(a), Some(b)) if b > 0.0 => a / b,
        _ => f64::NAN,
    };
    let top = get(1000).unwrap_or(0.0);
    let pass = monotone && (1.6..=2.4).contains(&ratio) && top <= capacity_bps && top >= 0.8 * capacity_bps;
    let curve: Vec<String> = speeds.iter().map(|(w, s)| format!("{w}:{:.3}M", s / 1e6)).collect();
    Check::new(
        pass,
        format!(
            "speeds [{}], monotone {monotone}, s500/s250 {ratio:.3}, s1000/cap {:.3}",
            curve.join(" "),
            top / capacity_bps
        ),
    )
}

/// Per-server fractions of a consumer's data packets.
pub fn fractions(c: &ConsumerReport) -> BTreeMap<String, f64> {
    let total: u64 = c.provenance.values().sum();
    c.provenance.iter().map(|(k, v)| (k.clone(), if total == 0 { 0.0 } else { *v as f64 / total as f64 })).collect()
}

fn fmt_fractions(f: &BTreeMap<String, f64>) -> String {
    let v: Vec<String> = f.iter().map(|(k, x)| format!("{k}={:.2}%", x * 100.0)).collect();
    v.join(" ")
}

/// `main` serves at least `majority` and every other server is in
/// `residues` with a share inside `band`; each listed residue is present.
pub fn provenance_split(c: &ConsumerReport, main: &str, majority: f64, residues: &[&str], band: (f64, f64)) -> Check {
    let f = fractions(c);
    let main_ok = f.get(main).copied().unwrap_or(0.0) >= majority;
    let others_ok = f
        .iter()
        .filter(|(k, _)| k.as_str() != main)
        .all(|(k, x)| residues.contains(&k.as_str()) && *x >= band.0 && *x <= band.1);
    let present = residues.iter().all(|r| f.get(*r).is_some_and(|x| *x > 0.0));
    Check::new(main_ok && others_ok && present, format!("{}: {}", c.node, fmt_fractions(&f)))
}

/// Dominant server of each epoch `[bounds[i], bounds[i+1])`.
pub fn epoch_servers(c: &ConsumerReport, bounds: &[f64]) -> Vec<(f64, f64, BTreeMap<String, u64>)> {
    bounds
        .windows(2)
        .map(|w| {
            let mut m: BTreeMap<String, u64> = BTreeMap::new();
            for a in c.arrivals.iter().filter(|a| a.time_s >= w[0] && a.time_s < w[1]) {
                *m.entry(a.server.clone()).or_default() += 1;
            }
            (w[0], w[1], m)
        })
        .collect()
}

/// Epoch boundaries from a run's disconnect times.
pub fn epoch_bounds(run: &RunResult) -> Vec<f64> {
    let mut b = vec![0.0];
    let mut d: Vec<f64> = run.disconnects.iter().map(|x| x.1).collect();
    d.sort_by(f64::total_cmp);
    d.dedup();
    b.extend(d);
    b.push(f64::INFINITY);
    b
}

fn dominant(m: &BTreeMap<String, u64>) -> Option<&str> {
    m.iter().max_by_key(|(_, n)| **n).map(|(k, _)| k.as_str())
}

/// Interests a router tried to send toward `peer` over its down links.
pub fn interests_to_departed(run: &RunResult, peer: &str) -> u64 {
    let suffix = format!("->{peer}");
    run.links.iter().filter(|l| l.direction.ends_with(&suffix)).map(|l| l.down_interest_attempts).sum()
}

/// Epoch servers follow `order`, departed seeders see a bounded number of
/// Interests and the download completes.
pub fn failover(run: &RunResult, consumer: &str, order: &[&str], bound: u64) -> Check {
    let Some(c) = run.consumer(consumer) else {
        return Check::new(false, format!("no consumer {consumer}"));
    };
    let epochs = epoch_servers(c, &epoch_bounds(run));
    let doms: Vec<Option<&str>> = epochs.iter().map(|e| dominant(&e.2)).collect();
    let ordered = doms.len() == order.len() && doms.iter().zip(order).all(|(d, o)| *d == Some(*o));
    let mut late = Vec::new();
    let mut late_ok = true;
    for (peer, _) in &run.disconnects {
        let n = interests_to_departed(run, peer);
        late_ok &= n <= bound;
        late.push(format!("{peer}:{n}"));
    }
    let done = c.completion_s.is_some() && c.aborted.is_none();
    let shown: Vec<String> = doms.iter().map(|d| d.unwrap_or("-").to_string()).collect();
    Check::new(
        ordered && late_ok && done,
        format!(
            "epochs [{}], interests to departed [{}] (bound {bound}), completed {done}",
            shown.join(" -> "),
            late.join(" ")
        ),
    )
}

/// Seeder load with caches on is at most `max_ratio` of the load without.
pub fn cache_offload(result: &ScenarioResult, max_ratio: f64) -> Check {
    let (Some(off), Some(on)) = (result.run("cs_off"), result.run("cs_on")) else {
        return Check::new(false, "flash crowd needs cs_off and cs_on runs".into());
    };
    let a = off.total_producer_answers();
    let b = on.total_producer_answers();
    let ratio = if a == 0 { f64::INFINITY } else { b as f64 / a as f64 };
    let done = [off, on].iter().all(|r| r.consumers.iter().all(|c| c.aborted.is_none()));
    Check::new(
        ratio <= max_ratio && done,
        format!("seeder answers off {a}, on {b}, ratio {ratio:.3}, all completed {done}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Arrival;

    fn consumer(servers: &[(&str, f64)]) -> ConsumerReport {
        let mut provenance = BTreeMap::new();
        let arrivals = servers
            .iter()
            .map(|(s, t)| {
                *provenance.entry(s.to_string()).or_default() += 1;
                Arrival { time_s: *t, server: s.to_string() }
            })
            .collect();
        ConsumerReport {
            node: "c".into(),
            window: 1,
            start_s: 0.0,
            completion_s: Some(1.0),
            max_speed_bps: 0.0,
            provenance,
            retries: 0,
            aborted: None,
            arrivals,
            data_packets: servers.len() as u64,
        }
    }

    #[test]
    fn steady_state_is_middle_half() {
        let c = consumer(&[("a", 10.0), ("a", 30.0)]);
        assert_eq!(steady_state(&c), Some((15.0, 25.0)));
    }

    #[test]
    fn split_rejects_unlisted_residue() {
        let mut v = vec![("p1", 0.0); 95];
        v.extend([("p4", 0.0); 3]);
        v.extend([("p2", 0.0); 2]);
        let c = consumer(&v);
        assert!(provenance_split(&c, "p1", 0.9, &["p4", "p2"], (0.005, 0.08)).pass);
        assert!(!provenance_split(&c, "p1", 0.9, &["p4"], (0.005, 0.08)).pass);
        assert!(!provenance_split(&c, "p1", 0.96, &["p4", "p2"], (0.005, 0.08)).pass);
    }

    #[test]
    fn epochs_by_time() {
        let c = consumer(&[("a", 1.0), ("a", 2.0), ("b", 3.0), ("c", 6.0)]);
        let e = epoch_servers(&c, &[0.0, 2.5, 5.0, f64::INFINITY]);
        assert_eq!(e.len(), 3);
        assert_eq!(dominant(&e[0].2), Some("a"));
        assert_eq!(dominant(&e[2].2), Some("c"));
    }

    #[test]
    fn speed_shape_checks() {
        let good = [(100, 0.8e6), (250, 2e6), (500, 4e6), (750, 6e6), (1000, 7e6)];
        assert!(speed_shape(&good, 8e6).pass);
        let dip = [(100, 0.8e6), (250, 2e6), (500, 4e6), (750, 7.5e6), (1000, 7e6)];
        assert!(!speed_shape(&dip, 8e6).pass);
    }
}
