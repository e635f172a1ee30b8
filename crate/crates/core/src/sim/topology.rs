use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::forwarder::{Face, FaceId, FaceKind};
use crate::{LinkId, NodeId, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    Router,
    Peer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSpec {
    pub name: String,
    pub role: NodeRole,
    /// Content store capacity in packets.
    pub cs_capacity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkSpec {
    pub a: NodeId,
    pub b: NodeId,
    pub bandwidth_bps: u64,
    pub prop_delay: SimTime,
    pub queue_capacity: usize,
}

/// Direction of travel on a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    AtoB,
    BtoA,
}

impl Dir {
    pub fn index(self) -> usize {
        match self {
            Dir::AtoB => 0,
            Dir::BtoA => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopologyError {
    NoNodes,
    DuplicateNode(String),
    UnknownNode(String),
    SelfLoop(String),
    ZeroBandwidth { link: usize },
    ZeroQueue { link: usize },
    DuplicateLink { link: usize },
    Disconnected(String),
}

impl fmt::Display for TopologyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyError::NoNodes => f.write_str("topology has no nodes"),
            TopologyError::DuplicateNode(n) => write!(f, "duplicate node '{n}'"),
            TopologyError::UnknownNode(n) => write!(f, "unknown node '{n}'"),
            TopologyError::SelfLoop(n) => write!(f, "link from '{n}' to itself"),
            TopologyError::ZeroBandwidth { link } => write!(f, "link {link}: bandwidth must be positive"),
            TopologyError::ZeroQueue { link } => write!(f, "link {link}: queue capacity must be positive"),
            TopologyError::DuplicateLink { link } => write!(f, "link {link}: endpoints already linked"),
            TopologyError::Disconnected(n) => write!(f, "node '{n}' is not connected to the rest of the topology"),
        }
    }
}

impl core::error::Error for TopologyError {}

/// Validated nodes and links. Every node's faces are its link faces in link
/// order followed by one App face.
#[derive(Debug, Clone)]
pub struct Topology {
    nodes: Vec<NodeSpec>,
    links: Vec<LinkSpec>,
    faces: Vec<Vec<Face>>,
}

impl Topology {
    pub fn new(nodes: Vec<NodeSpec>, links: Vec<LinkSpec>) -> Result<Self, TopologyError> {
        if nodes.is_empty() {
            return Err(TopologyError::NoNodes);
        }
        for (i, n) in nodes.iter().enumerate() {
            if nodes[..i].iter().any(|m| m.name == n.name) {
                return Err(TopologyError::DuplicateNode(n.name.clone()));
            }
        }
        let count = nodes.len() as u32;
        for (k, l) in links.iter().enumerate() {
            for end in [l.a, l.b] {
                if end.0 >= count {
                    return Err(TopologyError::UnknownNode(alloc::format!("{end}")));
                }
            }
            if l.a == l.b {
                return Err(TopologyError::SelfLoop(nodes[l.a.0 as usize].name.clone()));
            }
            if l.bandwidth_bps == 0 {
                return Err(TopologyError::ZeroBandwidth { link: k });
            }
            if l.queue_capacity == 0 {
                return Err(TopologyError::ZeroQueue { link: k });
            }
            let same = |m: &LinkSpec| (m.a, m.b) == (l.a, l.b) || (m.a, m.b) == (l.b, l.a);
            if links[..k].iter().any(same) {
                return Err(TopologyError::DuplicateLink { link: k });
            }
        }

        let mut faces: Vec<Vec<Face>> = vec![Vec::new(); nodes.len()];
        for (k, l) in links.iter().enumerate() {
            for (me, other) in [(l.a, l.b), (l.b, l.a)] {
                let fs = &mut faces[me.0 as usize];
                fs.push(Face {
                    id: FaceId(fs.len() as u32),
                    kind: FaceKind::Link { link: LinkId(k as u32), neighbor: other },
                });
            }
        }
        for fs in &mut faces {
            fs.push(Face { id: FaceId(fs.len() as u32), kind: FaceKind::App });
        }
        let topo = Topology { nodes, links, faces };

        let mut seen = vec![false; topo.nodes.len()];
        let mut stack = vec![NodeId(0)];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for (u, _, _) in topo.neighbors(v) {
                if !seen[u.0 as usize] {
                    seen[u.0 as usize] = true;
                    stack.push(u);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(TopologyError::Disconnected(topo.nodes[i].name.clone()));
        }
        Ok(topo)
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn links(&self) -> &[LinkSpec] {
        &self.links
    }

    pub fn node(&self, id: NodeId) -> &NodeSpec {
        &self.nodes[id.0 as usize]
    }

    pub fn link(&self, id: LinkId) -> &LinkSpec {
        &self.links[id.0 as usize]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name).map(|i| NodeId(i as u32))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn faces(&self, node: NodeId) -> &[Face] {
        &self.faces[node.0 as usize]
    }

    pub fn app_face(&self, node: NodeId) -> FaceId {
        self.faces(node).last().expect("every node has an app face").id
    }

    /// The face of `node` attached to `link`.
    pub fn link_face(&self, node: NodeId, link: LinkId) -> Option<FaceId> {
        self.faces(node).iter().find_map(|f| match f.kind {
            FaceKind::Link { link: l, .. } if l == link => Some(f.id),
            _ => None,
        })
    }

    /// Direction of travel when `from` transmits on `link`.
    pub fn dir_from(&self, link: LinkId, from: NodeId) -> Dir {
        if self.link(link).a == from {
            Dir::AtoB
        } else {
            Dir::BtoA
        }
    }

    /// `(sender, receiver)` for a direction of a link.
    pub fn endpoints(&self, link: LinkId, dir: Dir) -> (NodeId, NodeId) {
        let l = self.link(link);
        match dir {
            Dir::AtoB => (l.a, l.b),
            Dir::BtoA => (l.b, l.a),
        }
    }

    /// `(neighbor, link, face toward neighbor)` for every link of `node`.
    pub fn neighbors(&self, node: NodeId) -> impl Iterator<Item = (NodeId, LinkId, FaceId)> + '_ {
        self.faces(node).iter().filter_map(|f| match f.kind {
            FaceKind::Link { link, neighbor } => Some((neighbor, link, f.id)),
            FaceKind::App => None,
        })
    }

    /// Links attached to `node`.
    pub fn links_of(&self, node: NodeId) -> impl Iterator<Item = LinkId> + '_ {
        self.neighbors(node).map(|(_, l, _)| l)
    }
}
