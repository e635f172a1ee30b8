//! NDN names and network-layer packets.
//!
//! Packets travel between nodes as bytes produced by [`encode_wire`] and are
//! turned back into values by [`decode_wire`] at the receiving end; the
//! encoded length is what the link model charges transmission time for.

mod name;
mod wire;

use alloc::vec::Vec;
use sha2::{Digest, Sha256};

use crate::NodeId;

pub use name::{Name, NameError};
pub use wire::{decode_wire, encode_wire, wire_len, DecodeError, KIND_DATA, KIND_INTEREST, KIND_NACK};
pub(crate) use wire::{put_name as wire_put_name, take_name as wire_take_name};

pub const DEFAULT_LIFETIME_MS: u32 = 4000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interest {
    pub name: Name,
    pub nonce: u64,
    pub lifetime_ms: u32,
}

impl Interest {
    pub fn new(name: Name, nonce: u64, lifetime_ms: u32) -> Self {
        Interest { name, nonce, lifetime_ms }
    }
}

/// A named content unit. `origin` is simulation metadata naming the node
/// that served this copy; it is carried on the wire but is not covered by
/// the signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Data {
    pub name: Name,
    pub content: Vec<u8>,
    pub signature: [u8; 32],
    pub origin: NodeId,
}

impl Data {
    /// Creates a signed Data packet.
    pub fn new(name: Name, content: Vec<u8>, origin: NodeId) -> Self {
        let signature = sign(&name, &content);
        Data { name, content, signature, origin }
    }

    pub fn verify(&self) -> bool {
        sign(&self.name, &self.content) == self.signature
    }

    /// Same packet, served by `origin`.
    pub fn restamped(&self, origin: NodeId) -> Data {
        Data { origin, ..self.clone() }
    }
}

/// Simulated signature: SHA-256 over the encoded name followed by the content.
pub fn sign(name: &Name, content: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    let mut buf = Vec::new();
    wire::put_name(&mut buf, name);
    h.update(&buf);
    h.update(content);
    h.finalize().into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NackReason {
    NoRoute,
    Exhausted,
    Congestion,
}

impl NackReason {
    pub fn code(self) -> u8 {
        match self {
            NackReason::NoRoute => 1,
            NackReason::Exhausted => 2,
            NackReason::Congestion => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(NackReason::NoRoute),
            2 => Some(NackReason::Exhausted),
            3 => Some(NackReason::Congestion),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nack {
    pub name: Name,
    pub nonce: u64,
    pub reason: NackReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Packet {
    Interest(Interest),
    Data(Data),
    Nack(Nack),
}

impl Packet {
    pub fn name(&self) -> &Name {
        match self {
            Packet::Interest(i) => &i.name,
            Packet::Data(d) => &d.name,
            Packet::Nack(n) => &n.name,
        }
    }

    pub fn kind_str(&self) -> &'static str {
        match self {
            Packet::Interest(_) => "interest",
            Packet::Data(_) => "data",
            Packet::Nack(_) => "nack",
        }
    }
}

impl From<Interest> for Packet {
    fn from(i: Interest) -> Self {
        Packet::Interest(i)
    }
}

impl From<Data> for Packet {
    fn from(d: Data) -> Self {
        Packet::Data(d)
    }
}

impl From<Nack> for Packet {
    fn from(n: Nack) -> Self {
        Packet::Nack(n)
    }
}
