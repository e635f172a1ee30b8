use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

/// Hierarchical NDN name: an ordered list of non-empty byte components.
///
/// Ordering is lexicographic by component, then by length, which gives every
/// table keyed by name a deterministic iteration order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Name {
    components: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NameError {
    MissingLeadingSlash,
    EmptyComponent,
    BadEscape,
}

impl fmt::Display for NameError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NameError::MissingLeadingSlash => f.write_str("malformed uri: missing leading '/'"),
            NameError::EmptyComponent => f.write_str("malformed uri: empty name component"),
            NameError::BadEscape => f.write_str("malformed uri: bad percent escape"),
        }
    }
}

impl core::error::Error for NameError {}

impl Name {
    /// The root name `/`, which has no components.
    pub const fn root() -> Self {
        Name { components: Vec::new() }
    }

    /// Builds a name from raw components. Returns `None` if any component is
    /// empty.
    pub fn from_components<I, C>(components: I) -> Option<Self>
    where
        I: IntoIterator<Item = C>,
        C: Into<Vec<u8>>,
    {
        let components: Vec<Vec<u8>> = components.into_iter().map(Into::into).collect();
        if components.iter().any(Vec::is_empty) {
            return None;
        }
        Some(Name { components })
    }

    /// Parses a `/`-separated URI. Bytes outside the unreserved set are
    /// written as `%XX`.
    pub fn from_uri(uri: &str) -> Result<Self, NameError> {
        let rest = uri.strip_prefix('/').ok_or(NameError::MissingLeadingSlash)?;
        if rest.is_empty() {
            return Ok(Name::root());
        }
        let mut components = Vec::new();
        for part in rest.split('/') {
            if part.is_empty() {
                return Err(NameError::EmptyComponent);
            }
            components.push(unescape(part)?);
        }
        Ok(Name { components })
    }

    pub fn to_uri(&self) -> String {
        let mut out = String::new();
        if self.components.is_empty() {
            out.push('/');
        }
        for c in &self.components {
            out.push('/');
            escape_into(c, &mut out);
        }
        out
    }

    /// Returns a new name with `component` appended.
    ///
    /// Panics if `component` is empty.
    pub fn child(&self, component: impl Into<Vec<u8>>) -> Name {
        let mut n = self.clone();
        n.push(component);
        n
    }

    /// Panics if `component` is empty.
    pub fn push(&mut self, component: impl Into<Vec<u8>>) {
        let c = component.into();
        assert!(!c.is_empty(), "name components must be non-empty");
        self.components.push(c);
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Vec<u8>] {
        &self.components
    }

    pub fn get(&self, i: usize) -> Option<&[u8]> {
        self.components.get(i).map(Vec::as_slice)
    }

    pub fn last(&self) -> Option<&[u8]> {
        self.components.last().map(Vec::as_slice)
    }

    /// The first `n` components (or the whole name when `n >= len`).
    pub fn prefix(&self, n: usize) -> Name {
        Name { components: self.components[..n.min(self.components.len())].to_vec() }
    }

    /// True iff `self` is a leading sub-sequence of `name`.
    pub fn is_prefix_of(&self, name: &Name) -> bool {
        self.components.len() <= name.components.len()
            && self.components.iter().zip(&name.components).all(|(a, b)| a == b)
    }
}

fn is_unreserved(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~')
}

fn escape_into(bytes: &[u8], out: &mut String) {
    const HEX: &[u8; 16] = b"0123456789ABCDEF";
    for &b in bytes {
        if is_unreserved(b) {
            out.push(b as char);
        } else {
            out.push('%');
            out.push(HEX[(b >> 4) as usize] as char);
            out.push(HEX[(b & 0xF) as usize] as char);
        }
    }
}

fn unescape(part: &str) -> Result<Vec<u8>, NameError> {
    let bytes = part.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = bytes.get(i + 1..i + 3).ok_or(NameError::BadEscape)?;
            let hi = hex_val(hex[0]).ok_or(NameError::BadEscape)?;
            let lo = hex_val(hex[1]).ok_or(NameError::BadEscape)?;
            out.push(hi << 4 | lo);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    Ok(out)
}

fn hex_val(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'a'..=b'f' => Some(b - b'a' + 10),
        b'A'..=b'F' => Some(b - b'A' + 10),
        _ => None,
    }
}

impl FromStr for Name {
    type Err = NameError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Name::from_uri(s)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_uri())
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Name({})", self.to_uri())
    }
}
