//! Byte framing used on simulated links.
//!
//! ```text
//! packet   := kind:u8 field*
//! field    := len:u32be value[len]
//! Interest := 0x05 name nonce[8] lifetime_ms[4]
//! Data     := 0x06 name content[*] signature[32] origin[4]
//! Nack     := 0x03 name nonce[8] reason[1]
//! name     := field whose value is (len:u16be bytes[len])*
//! ```
//!
//! All integers are big-endian. Decoding rejects truncation, unknown kinds,
//! wrong fixed-field sizes, empty name components and trailing bytes.

use alloc::vec::Vec;
use core::fmt;

use super::{Data, Interest, Nack, NackReason, Name, Packet};
use crate::NodeId;

pub const KIND_INTEREST: u8 = 0x05;
pub const KIND_DATA: u8 = 0x06;
pub const KIND_NACK: u8 = 0x03;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeError {
    Truncated,
    UnknownKind(u8),
    TrailingBytes(usize),
    BadField(&'static str),
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeError::Truncated => f.write_str("truncated packet"),
            DecodeError::UnknownKind(k) => write!(f, "unknown packet kind 0x{k:02x}"),
            DecodeError::TrailingBytes(n) => write!(f, "{n} trailing bytes after packet"),
            DecodeError::BadField(which) => write!(f, "malformed {which} field"),
        }
    }
}

impl core::error::Error for DecodeError {}

fn name_value_len(name: &Name) -> usize {
    name.components().iter().map(|c| 2 + c.len()).sum()
}

/// Encoded size in bytes, without encoding.
pub fn wire_len(packet: &Packet) -> usize {
    const F: usize = 4;
    let name = F + name_value_len(packet.name());
    1 + name
        + match packet {
            Packet::Interest(_) => (F + 8) + (F + 4),
            Packet::Data(d) => (F + d.content.len()) + (F + 32) + (F + 4),
            Packet::Nack(_) => (F + 8) + (F + 1),
        }
}

fn put_field(out: &mut Vec<u8>, value: &[u8]) {
    out.extend_from_slice(&(value.len() as u32).to_be_bytes());
    out.extend_from_slice(value);
}

/// Appends the length-prefixed name field.
///
/// Panics if a component is longer than `u16::MAX` bytes.
pub(crate) fn put_name(out: &mut Vec<u8>, name: &Name) {
    out.extend_from_slice(&(name_value_len(name) as u32).to_be_bytes());
    for c in name.components() {
        let len = u16::try_from(c.len()).expect("name component longer than 65535 bytes");
        out.extend_from_slice(&len.to_be_bytes());
        out.extend_from_slice(c);
    }
}

pub fn encode_wire(packet: &Packet) -> Vec<u8> {
    let mut out = Vec::with_capacity(wire_len(packet));
    match packet {
        Packet::Interest(i) => {
            out.push(KIND_INTEREST);
            put_name(&mut out, &i.name);
            put_field(&mut out, &i.nonce.to_be_bytes());
            put_field(&mut out, &i.lifetime_ms.to_be_bytes());
        }
        Packet::Data(d) => {
            out.push(KIND_DATA);
            put_name(&mut out, &d.name);
            put_field(&mut out, &d.content);
            put_field(&mut out, &d.signature);
            put_field(&mut out, &d.origin.0.to_be_bytes());
        }
        Packet::Nack(n) => {
            out.push(KIND_NACK);
            put_name(&mut out, &n.name);
            put_field(&mut out, &n.nonce.to_be_bytes());
            put_field(&mut out, &[n.reason.code()]);
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.buf.len() < n {
            return Err(DecodeError::Truncated);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn field(&mut self) -> Result<&'a [u8], DecodeError> {
        let len = u32::from_be_bytes(self.take(4)?.try_into().unwrap());
        self.take(len as usize)
    }

    fn fixed<const N: usize>(&mut self, what: &'static str) -> Result<[u8; N], DecodeError> {
        self.field()?.try_into().map_err(|_| DecodeError::BadField(what))
    }

    fn name(&mut self) -> Result<Name, DecodeError> {
        let mut inner = Reader { buf: self.field()? };
        let mut comps = Vec::new();
        while !inner.buf.is_empty() {
            let len = u16::from_be_bytes(inner.take(2).map_err(|_| DecodeError::BadField("name"))?.try_into().unwrap());
            if len == 0 {
                return Err(DecodeError::BadField("name"));
            }
            let c = inner.take(len as usize).map_err(|_| DecodeError::BadField("name"))?;
            comps.push(c.to_vec());
        }
        Name::from_components(comps).ok_or(DecodeError::BadField("name"))
    }
}

/// Reads one name field from the front of `buf`, advancing it.
pub(crate) fn take_name(buf: &mut &[u8]) -> Option<Name> {
    let mut r = Reader { buf };
    let name = r.name().ok()?;
    *buf = r.buf;
    Some(name)
}

pub fn decode_wire(bytes: &[u8]) -> Result<Packet, DecodeError> {
    let mut r = Reader { buf: bytes };
    let kind = r.take(1)?[0];
    let packet = match kind {
        KIND_INTEREST => {
            let name = r.name()?;
            let nonce = u64::from_be_bytes(r.fixed("nonce")?);
            let lifetime_ms = u32::from_be_bytes(r.fixed("lifetime")?);
            Packet::Interest(Interest { name, nonce, lifetime_ms })
        }
        KIND_DATA => {
            let name = r.name()?;
            let content = r.field()?.to_vec();
            let signature = r.fixed("signature")?;
            let origin = NodeId(u32::from_be_bytes(r.fixed("origin")?));
            Packet::Data(Data { name, content, signature, origin })
        }
        KIND_NACK => {
            let name = r.name()?;
            let nonce = u64::from_be_bytes(r.fixed("nonce")?);
            let [code] = r.fixed::<1>("reason")?;
            let reason = NackReason::from_code(code).ok_or(DecodeError::BadField("reason"))?;
            Packet::Nack(Nack { name, nonce, reason })
        }
        other => return Err(DecodeError::UnknownKind(other)),
    };
    if !r.buf.is_empty() {
        return Err(DecodeError::TrailingBytes(r.buf.len()));
    }
    Ok(packet)
}
