use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use super::topology::Topology;
use crate::forwarder::FaceId;
use crate::{NodeId, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownNode(pub NodeId);

impl fmt::Display for UnknownNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown node {}", self.0)
    }
}

impl core::error::Error for UnknownNode {}

/// Distance of every node to `origin`, as `(propagation delay, hops)`
/// compared lexicographically.
pub fn distances_to(topo: &Topology, origin: NodeId) -> Result<Vec<(SimTime, u32)>, UnknownNode> {
    let n = topo.nodes().len();
    if origin.0 as usize >= n {
        return Err(UnknownNode(origin));
    }
    let mut dist = vec![(SimTime::MAX, u32::MAX); n];
    dist[origin.0 as usize] = (SimTime::ZERO, 0);
    let mut heap = BinaryHeap::new();
    heap.push(Reverse(((SimTime::ZERO, 0u32), origin)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v.0 as usize] {
            continue;
        }
        for (u, link, _) in topo.neighbors(v) {
            let nd = (d.0 + topo.link(link).prop_delay, d.1 + 1);
            if nd < dist[u.0 as usize] {
                dist[u.0 as usize] = nd;
                heap.push(Reverse((nd, u)));
            }
        }
    }
    Ok(dist)
}

/// One FIB nexthop produced by an announcement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteUpdate {
    pub node: NodeId,
    pub face: FaceId,
    pub cost_ms: f64,
}

/// Nexthops that an announcement by `origin` installs: at the origin its
/// App face with cost 0, and at every other node each neighbor strictly
/// closer to the origin, costed by the delay of the path through it.
pub fn announcement_routes(topo: &Topology, origin: NodeId) -> Result<Vec<RouteUpdate>, UnknownNode> {
    let dist = distances_to(topo, origin)?;
    let mut out = vec![RouteUpdate { node: origin, face: topo.app_face(origin), cost_ms: 0.0 }];
    for v in topo.node_ids() {
        if v == origin {
            continue;
        }
        let dv = dist[v.0 as usize];
        for (u, link, face) in topo.neighbors(v) {
            let du = dist[u.0 as usize];
            if du < dv {
                let cost = topo.link(link).prop_delay + du.0;
                out.push(RouteUpdate { node: v, face, cost_ms: cost.as_millis_f64() });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::topology::{LinkSpec, NodeRole, NodeSpec};

    fn topo(n: usize, links: &[(u32, u32, u64)]) -> Topology {
        let nodes =
            (0..n).map(|i| NodeSpec { name: alloc::format!("n{i}"), role: NodeRole::Router, cs_capacity: 0 }).collect();
        let links = links
            .iter()
            .map(|&(a, b, ms)| LinkSpec {
                a: NodeId(a),
                b: NodeId(b),
                bandwidth_bps: 1_000_000,
                prop_delay: SimTime::from_millis(ms),
                queue_capacity: 8,
            })
            .collect();
        Topology::new(nodes, links).unwrap()
    }

    fn at(routes: &[RouteUpdate], node: u32) -> Vec<(FaceId, f64)> {
        routes.iter().filter(|r| r.node == NodeId(node)).map(|r| (r.face, r.cost_ms)).collect()
    }

    #[test]
    fn line_has_single_paths() {
        // A - B - C, announce at C
        let t = topo(3, &[(0, 1, 2), (1, 2, 3)]);
        let r = announcement_routes(&t, NodeId(2)).unwrap();
        assert_eq!(at(&r, 0), [(FaceId(0), 5.0)]);
        assert_eq!(at(&r, 1), [(FaceId(1), 3.0)]);
        assert_eq!(at(&r, 2), [(t.app_face(NodeId(2)), 0.0)]);
    }

    #[test]
    fn diamond_gives_two_nexthops() {
        // 0 -(1)- 1 -(1)- 3 and 0 -(2)- 2 -(2)- 3
        let t = topo(4, &[(0, 1, 1), (1, 3, 1), (0, 2, 2), (2, 3, 2)]);
        let r = announcement_routes(&t, NodeId(3)).unwrap();
        let mut near = at(&r, 0);
        near.sort_by(|a, b| a.1.total_cmp(&b.1));
        assert_eq!(near, [(FaceId(0), 2.0), (FaceId(1), 4.0)]);
    }

    #[test]
    fn hop_count_breaks_delay_ties() {
        // 0 - 1 direct with delay 2, or 0 - 2 - 1 with 1 + 1
        let t = topo(3, &[(0, 1, 2), (0, 2, 1), (2, 1, 1)]);
        let d = distances_to(&t, NodeId(1)).unwrap();
        assert_eq!(d[0], (SimTime::from_millis(2), 1));
        let r = announcement_routes(&t, NodeId(1)).unwrap();
        // node 2 is at (1 ms, 1 hop) < (2 ms, 1 hop), so node 0 uses both
        assert_eq!(at(&r, 0).len(), 2);
    }

    #[test]
    fn unknown_origin() {
        let t = topo(2, &[(0, 1, 1)]);
        assert_eq!(announcement_routes(&t, NodeId(9)).unwrap_err(), UnknownNode(NodeId(9)));
    }
}
