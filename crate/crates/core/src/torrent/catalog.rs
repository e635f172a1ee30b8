use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::packets::{Data, Name};
use crate::NodeId;

pub const TORRENT_FILE_COMPONENT: &str = "torrent-file";
pub const MANIFEST_COMPONENT: &str = "manifest";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TorrentError {
    EmptyContent,
    NoFiles,
    ZeroPayload,
    /// Catalog segments need room for the 4-byte length header.
    PayloadTooSmall(usize),
    MissingSegment {
        base: Name,
        index: usize,
    },
    UnexpectedSegment {
        expected: Name,
        found: Name,
    },
    Corrupt(&'static str),
}

impl fmt::Display for TorrentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TorrentError::EmptyContent => f.write_str("file content is empty"),
            TorrentError::NoFiles => f.write_str("torrent has no files"),
            TorrentError::ZeroPayload => f.write_str("packet payload size must be positive"),
            TorrentError::PayloadTooSmall(n) => {
                write!(f, "payload of {n} bytes cannot hold a catalog segment")
            }
            TorrentError::MissingSegment { base, index } => {
                write!(f, "segment {index} of {base} missing")
            }
            TorrentError::UnexpectedSegment { expected, found } => {
                write!(f, "expected segment {expected}, found {found}")
            }
            TorrentError::Corrupt(what) => write!(f, "corrupt catalog: {what}"),
        }
    }
}

impl core::error::Error for TorrentError {}

pub fn file_name(torrent_name: &Name, file_index: usize) -> Name {
    torrent_name.child(format!("file{file_index}"))
}

pub fn packet_name(torrent_name: &Name, file_index: usize, packet_index: usize) -> Name {
    file_name(torrent_name, file_index).child(format!("p{packet_index}"))
}

pub fn segment_name(base: &Name, index: usize) -> Name {
    base.child(format!("s{index}"))
}

/// Base name of a torrent-file; its segments are `<base>/s<i>`.
pub fn torrent_file_base(torrent_name: &Name) -> Name {
    torrent_name.child(TORRENT_FILE_COMPONENT)
}

/// Base name of a file manifest; its segments are `<base>/s<i>`.
pub fn manifest_base(file_name: &Name) -> Name {
    file_name.child(MANIFEST_COMPONENT)
}

/// What kind of object a name under a torrent refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameKind {
    TorrentFileSegment,
    ManifestSegment,
    DataPacket,
    Unknown,
}

pub fn classify(torrent_name: &Name, name: &Name) -> NameKind {
    if !torrent_name.is_prefix_of(name) {
        return NameKind::Unknown;
    }
    let rest = &name.components()[torrent_name.len()..];
    match rest {
        [tf, s] if tf == TORRENT_FILE_COMPONENT.as_bytes() && s.starts_with(b"s") => NameKind::TorrentFileSegment,
        [f, m, s] if f.starts_with(b"file") && m == MANIFEST_COMPONENT.as_bytes() && s.starts_with(b"s") => {
            NameKind::ManifestSegment
        }
        [f, p] if f.starts_with(b"file") && p.starts_with(b"p") => NameKind::DataPacket,
        _ => NameKind::Unknown,
    }
}

/// Splits one file into Data packets named `<torrent>/file<k>/p<i>`.
pub fn segment_content(
    torrent_name: &Name,
    file_index: usize,
    content: &[u8],
    packet_payload_bytes: usize,
    origin: NodeId,
) -> Result<Vec<Data>, TorrentError> {
    if packet_payload_bytes == 0 {
        return Err(TorrentError::ZeroPayload);
    }
    if content.is_empty() {
        return Err(TorrentError::EmptyContent);
    }
    Ok(content
        .chunks(packet_payload_bytes)
        .enumerate()
        .map(|(i, chunk)| Data::new(packet_name(torrent_name, file_index, i), chunk.to_vec(), origin))
        .collect())
}

/// Names of the manifests that make up a torrent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorrentFile {
    pub torrent_name: Name,
    pub manifest_names: Vec<Name>,
}

/// Names of the data packets of one file, in segment order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileManifest {
    pub file_name: Name,
    pub packet_names: Vec<Name>,
}

impl FileManifest {
    pub fn base_name(&self) -> Name {
        manifest_base(&self.file_name)
    }
}

// Catalog serialization: u32be total length (header included), the owner
// name field, u32be entry count, then one name field per entry.
fn serialize_catalog(owner: &Name, entries: &[Name]) -> Vec<u8> {
    let mut body = Vec::new();
    crate::packets::wire_put_name(&mut body, owner);
    body.extend_from_slice(&(entries.len() as u32).to_be_bytes());
    for e in entries {
        crate::packets::wire_put_name(&mut body, e);
    }
    let total = (body.len() + 4) as u32;
    let mut out = Vec::with_capacity(body.len() + 4);
    out.extend_from_slice(&total.to_be_bytes());
    out.extend_from_slice(&body);
    out
}

fn parse_catalog(bytes: &[u8]) -> Result<(Name, Vec<Name>), TorrentError> {
    if bytes.len() < 4 {
        return Err(TorrentError::Corrupt("short header"));
    }
    let total = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
    if total != bytes.len() {
        return Err(TorrentError::Corrupt("length mismatch"));
    }
    let mut rest = &bytes[4..];
    let owner = crate::packets::wire_take_name(&mut rest).ok_or(TorrentError::Corrupt("owner"))?;
    if rest.len() < 4 {
        return Err(TorrentError::Corrupt("count"));
    }
    let count = u32::from_be_bytes(rest[..4].try_into().unwrap()) as usize;
    rest = &rest[4..];
    let mut entries = Vec::with_capacity(count.min(rest.len()));
    for _ in 0..count {
        entries.push(crate::packets::wire_take_name(&mut rest).ok_or(TorrentError::Corrupt("entry"))?);
    }
    if !rest.is_empty() {
        return Err(TorrentError::Corrupt("trailing bytes"));
    }
    Ok((owner, entries))
}

/// Size of the serialized catalog.
pub fn serialized_len(owner: &Name, entries: &[Name]) -> usize {
    serialize_catalog(owner, entries).len()
}

fn check_payload(payload: usize) -> Result<(), TorrentError> {
    if payload < 4 {
        Err(TorrentError::PayloadTooSmall(payload))
    } else {
        Ok(())
    }
}

fn segment(base: &Name, bytes: &[u8], payload: usize, origin: NodeId) -> Vec<Data> {
    bytes.chunks(payload).enumerate().map(|(i, c)| Data::new(segment_name(base, i), c.to_vec(), origin)).collect()
}

fn reassemble(base: &Name, segments: &[Data]) -> Result<Vec<u8>, TorrentError> {
    let first = segments.first().ok_or(TorrentError::MissingSegment { base: base.clone(), index: 0 })?;
    let expected = segment_count_from_first(first).ok_or(TorrentError::Corrupt("first segment"))?;
    let mut bytes = Vec::new();
    for i in 0..expected {
        let seg = segments.get(i).ok_or(TorrentError::MissingSegment { base: base.clone(), index: i })?;
        let want = segment_name(base, i);
        if seg.name != want {
            return Err(TorrentError::UnexpectedSegment { expected: want, found: seg.name.clone() });
        }
        if !seg.verify() {
            return Err(TorrentError::Corrupt("bad signature"));
        }
        bytes.extend_from_slice(&seg.content);
    }
    if segments.len() > expected {
        return Err(TorrentError::Corrupt("extra segments"));
    }
    Ok(bytes)
}

/// Number of segments of a catalog, read from its first segment: every
/// segment but the last is full, so `ceil(total_len / first_len)`.
pub fn segment_count_from_first(first: &Data) -> Option<usize> {
    let c = &first.content;
    if c.len() < 4 {
        return None;
    }
    let total = u32::from_be_bytes(c[..4].try_into().unwrap()) as usize;
    if total == 0 || total < c.len() {
        return None;
    }
    Some(total.div_ceil(c.len()))
}

pub fn encode_torrent_file(tf: &TorrentFile, payload: usize, origin: NodeId) -> Result<Vec<Data>, TorrentError> {
    check_payload(payload)?;
    let bytes = serialize_catalog(&tf.torrent_name, &tf.manifest_names);
    Ok(segment(&torrent_file_base(&tf.torrent_name), &bytes, payload, origin))
}

pub fn decode_torrent_file(torrent_name: &Name, segments: &[Data]) -> Result<TorrentFile, TorrentError> {
    let bytes = reassemble(&torrent_file_base(torrent_name), segments)?;
    let (owner, manifest_names) = parse_catalog(&bytes)?;
    if &owner != torrent_name {
        return Err(TorrentError::Corrupt("torrent name"));
    }
    Ok(TorrentFile { torrent_name: owner, manifest_names })
}

pub fn encode_manifest(m: &FileManifest, payload: usize, origin: NodeId) -> Result<Vec<Data>, TorrentError> {
    check_payload(payload)?;
    let bytes = serialize_catalog(&m.file_name, &m.packet_names);
    Ok(segment(&m.base_name(), &bytes, payload, origin))
}

/// `base` is the manifest base name (`<file>/manifest`).
pub fn decode_manifest(base: &Name, segments: &[Data]) -> Result<FileManifest, TorrentError> {
    let bytes = reassemble(base, segments)?;
    let (file_name, packet_names) = parse_catalog(&bytes)?;
    if &manifest_base(&file_name) != base {
        return Err(TorrentError::Corrupt("file name"));
    }
    Ok(FileManifest { file_name, packet_names })
}

/// Everything a seeder serves for one torrent.
#[derive(Debug, Clone)]
pub struct BuiltTorrent {
    pub torrent_file: TorrentFile,
    pub manifests: Vec<FileManifest>,
    pub packets: Vec<Data>,
    pub torrent_file_segments: Vec<Data>,
    pub manifest_segments: Vec<Vec<Data>>,
}

impl BuiltTorrent {
    /// Packet names in download order: first packet of the first file to
    /// the last packet of the last file.
    pub fn catalog(&self) -> Vec<Name> {
        self.manifests.iter().flat_map(|m| m.packet_names.iter().cloned()).collect()
    }

    /// Every Data object: torrent-file segments, manifest segments, packets.
    pub fn all_data(&self) -> impl Iterator<Item = &Data> {
        self.torrent_file_segments.iter().chain(self.manifest_segments.iter().flatten()).chain(self.packets.iter())
    }
}

pub fn build_torrent(
    torrent_name: &Name,
    files: &[Vec<u8>],
    packet_payload_bytes: usize,
    origin: NodeId,
) -> Result<BuiltTorrent, TorrentError> {
    if files.is_empty() {
        return Err(TorrentError::NoFiles);
    }
    let mut packets = Vec::new();
    let mut manifests = Vec::with_capacity(files.len());
    for (k, content) in files.iter().enumerate() {
        let data = segment_content(torrent_name, k, content, packet_payload_bytes, origin)?;
        manifests.push(FileManifest {
            file_name: file_name(torrent_name, k),
            packet_names: data.iter().map(|d| d.name.clone()).collect(),
        });
        packets.extend(data);
    }
    let torrent_file = TorrentFile {
        torrent_name: torrent_name.clone(),
        manifest_names: manifests.iter().map(FileManifest::base_name).collect(),
    };
    let torrent_file_segments = encode_torrent_file(&torrent_file, packet_payload_bytes, origin)?;
    let manifest_segments =
        manifests.iter().map(|m| encode_manifest(m, packet_payload_bytes, origin)).collect::<Result<_, _>>()?;
    Ok(BuiltTorrent { torrent_file, manifests, packets, torrent_file_segments, manifest_segments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn torrent() -> Name {
        Name::from_uri("/ntorrent/demo").unwrap()
    }

    #[test]
    fn segments_with_short_tail() {
        let pkts = segment_content(&torrent(), 0, &[1u8; 3000], 1024, NodeId(0)).unwrap();
        let sizes: Vec<usize> = pkts.iter().map(|d| d.content.len()).collect();
        assert_eq!(sizes, vec![1024, 1024, 952]);
        assert_eq!(pkts[2].name.to_uri(), "/ntorrent/demo/file0/p2");
    }

    #[test]
    fn exact_fit_is_one_packet() {
        let pkts = segment_content(&torrent(), 3, &[1u8; 1024], 1024, NodeId(0)).unwrap();
        assert_eq!(pkts.len(), 1);
        assert_eq!(pkts[0].name.to_uri(), "/ntorrent/demo/file3/p0");
    }

    #[test]
    fn full_scale_packet_count() {
        // ceil(100 * 2^20 / 1024) computed independently of chunking
        let len = 100usize << 20;
        let expected = len / 1024 + usize::from(!len.is_multiple_of(1024));
        assert_eq!(expected, 102_400);
        let pkts = segment_content(&torrent(), 0, &vec![0u8; len], 1024, NodeId(0)).unwrap();
        assert_eq!(pkts.len(), expected);
    }

    #[test]
    fn empty_content_and_zero_payload() {
        assert_eq!(segment_content(&torrent(), 0, &[], 1024, NodeId(0)), Err(TorrentError::EmptyContent));
        assert_eq!(segment_content(&torrent(), 0, &[1], 0, NodeId(0)), Err(TorrentError::ZeroPayload));
        assert_eq!(build_torrent(&torrent(), &[], 1024, NodeId(0)).unwrap_err(), TorrentError::NoFiles);
    }

    #[test]
    fn single_file_torrent_shape() {
        let t = build_torrent(&torrent(), &[vec![5u8; 2048]], 1024, NodeId(0)).unwrap();
        assert_eq!(t.torrent_file.manifest_names.len(), 1);
        assert_eq!(t.manifests[0].packet_names.len(), 2);
        assert_eq!(t.torrent_file_segments.len(), 1);
    }

    #[test]
    fn three_files_listed_in_order() {
        let files = vec![vec![1u8; 10], vec![2u8; 10], vec![3u8; 10]];
        let t = build_torrent(&torrent(), &files, 1024, NodeId(0)).unwrap();
        let names: Vec<_> = t.torrent_file.manifest_names.iter().map(Name::to_uri).collect();
        assert_eq!(
            names,
            vec!["/ntorrent/demo/file0/manifest", "/ntorrent/demo/file1/manifest", "/ntorrent/demo/file2/manifest"]
        );
    }

    #[test]
    fn torrent_file_crossing_payload_boundary() {
        // Grow the manifest list until the serialized catalog is exactly one
        // byte longer than the payload, by padding a final name component.
        let payload = 256;
        let t = torrent();
        let mut names: Vec<Name> = (0..4).map(|k| manifest_base(&file_name(&t, k))).collect();
        let base_len = serialized_len(&t, &names);
        // name field of <torrent>/<L x's>: 4 + (2+8) + (2+4) + (2+L)
        let pad = payload + 1 - base_len - (4 + 10 + 6 + 2);
        names.push(t.child(vec![b'x'; pad]));
        let tf = TorrentFile { torrent_name: t.clone(), manifest_names: names };
        let len = serialized_len(&tf.torrent_name, &tf.manifest_names);
        assert_eq!(len, payload + 1);
        let segs = encode_torrent_file(&tf, payload, NodeId(0)).unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[1].content.len(), 1);
        assert_eq!(decode_torrent_file(&t, &segs).unwrap(), tf);

        let shorter = TorrentFile { manifest_names: tf.manifest_names[..4].to_vec(), ..tf.clone() };
        assert_eq!(encode_torrent_file(&shorter, payload, NodeId(0)).unwrap().len(), 1);
    }

    #[test]
    fn one_entry_manifest_is_one_segment() {
        let m = FileManifest { file_name: file_name(&torrent(), 0), packet_names: vec![packet_name(&torrent(), 0, 0)] };
        let segs = encode_manifest(&m, 1024, NodeId(0)).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].name.to_uri(), "/ntorrent/demo/file0/manifest/s0");
        assert_eq!(decode_manifest(&m.base_name(), &segs).unwrap(), m);
    }

    #[test]
    fn decode_detects_missing_and_reordered_segments() {
        let m = FileManifest {
            file_name: file_name(&torrent(), 0),
            packet_names: (0..100).map(|i| packet_name(&torrent(), 0, i)).collect(),
        };
        let segs = encode_manifest(&m, 64, NodeId(0)).unwrap();
        assert!(segs.len() > 3);
        let base = m.base_name();
        assert!(matches!(decode_manifest(&base, &segs[..segs.len() - 1]), Err(TorrentError::MissingSegment { .. })));
        let mut swapped = segs.clone();
        swapped.swap(1, 2);
        assert!(matches!(decode_manifest(&base, &swapped), Err(TorrentError::UnexpectedSegment { .. })));
        assert!(matches!(decode_manifest(&base, &[]), Err(TorrentError::MissingSegment { index: 0, .. })));
        assert_eq!(segment_count_from_first(&segs[0]), Some(segs.len()));
    }

    #[test]
    fn classify_names() {
        let t = torrent();
        assert_eq!(classify(&t, &segment_name(&torrent_file_base(&t), 0)), NameKind::TorrentFileSegment);
        assert_eq!(classify(&t, &segment_name(&manifest_base(&file_name(&t, 2)), 1)), NameKind::ManifestSegment);
        assert_eq!(classify(&t, &packet_name(&t, 1, 7)), NameKind::DataPacket);
        assert_eq!(classify(&t, &Name::from_uri("/other/file0/p0").unwrap()), NameKind::Unknown);
    }

    proptest! {
        #[test]
        fn segment_count_matches_arithmetic(n in 1usize..400, payload in 4usize..300) {
            let t = torrent();
            let m = FileManifest {
                file_name: file_name(&t, 0),
                packet_names: (0..n).map(|i| packet_name(&t, 0, i)).collect(),
            };
            let len = serialized_len(&m.file_name, &m.packet_names);
            let segs = encode_manifest(&m, payload, NodeId(0)).unwrap();
            prop_assert_eq!(segs.len(), len.div_ceil(payload));
            prop_assert_eq!(decode_manifest(&m.base_name(), &segs).unwrap(), m);
        }

        #[test]
        fn torrent_file_round_trip(k in 1usize..40, payload in 4usize..200) {
            let t = torrent();
            let tf = TorrentFile {
                torrent_name: t.clone(),
                manifest_names: (0..k).map(|i| manifest_base(&file_name(&t, i))).collect(),
            };
            let segs = encode_torrent_file(&tf, payload, NodeId(0)).unwrap();
            prop_assert_eq!(decode_torrent_file(&t, &segs).unwrap(), tf);
        }

        #[test]
        fn generated_names_are_distinct(sizes in prop::collection::vec(1usize..5000, 1..12), payload in 1usize..1500) {
            let files: Vec<Vec<u8>> = sizes.iter().map(|&s| vec![0u8; s]).collect();
            let payload = payload.max(4);
            let t = build_torrent(&torrent(), &files, payload, NodeId(0)).unwrap();
            let mut all: Vec<Name> = t.all_data().map(|d| d.name.clone()).collect();
            let total = all.len();
            all.sort();
            all.dedup();
            prop_assert_eq!(all.len(), total);
            let expected: usize = sizes.iter().map(|s| s.div_ceil(payload)).sum();
            prop_assert_eq!(t.packets.len(), expected);
        }
    }
}
