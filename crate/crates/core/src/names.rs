//! Hierarchical content names, DTN endpoint identifiers, and the textual
//! bridge that carries a content name inside a BPQ value field.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("name must begin with '/'")]
    MissingLeadingSlash,
    #[error("empty component at position {0}")]
    EmptyComponent(usize),
    #[error("malformed percent-encoding at byte {0}")]
    BadPercentEncoding(usize),
    #[error("name text is not in canonical form")]
    NonCanonical,
    #[error("name bytes are not valid UTF-8")]
    NotUtf8,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EidError {
    #[error("endpoint identifier has no ':' separator")]
    NoColon,
    #[error("endpoint identifier has an empty scheme")]
    EmptyScheme,
    #[error("scheme {0:?} is not ASCII alphanumeric")]
    BadScheme(String),
}

/// A hierarchical content name: an ordered list of non-empty byte strings.
///
/// Ordering is component-wise lexicographic on the raw bytes, so a name
/// sorts immediately before all names it is a prefix of.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name {
    components: Vec<Vec<u8>>,
}

impl Name {
    /// The empty name `/`, a prefix of every name.
    pub fn root() -> Self {
        Self::default()
    }

    pub fn from_components<I, C>(components: I) -> Result<Self, NameError>
    where
        I: IntoIterator<Item = C>,
        C: Into<Vec<u8>>,
    {
        let components: Vec<Vec<u8>> = components.into_iter().map(Into::into).collect();
        if let Some(pos) = components.iter().position(Vec::is_empty) {
            return Err(NameError::EmptyComponent(pos));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[Vec<u8>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// The first `n` components (clamped to the name length).
    pub fn prefix(&self, n: usize) -> Name {
        Name {
            components: self.components[..n.min(self.len())].to_vec(),
        }
    }

    /// Appends a component; empty components are rejected.
    pub fn child(&self, component: impl Into<Vec<u8>>) -> Result<Name, NameError> {
        let component = component.into();
        if component.is_empty() {
            return Err(NameError::EmptyComponent(self.len()));
        }
        let mut components = self.components.clone();
        components.push(component);
        Ok(Name { components })
    }

    /// True iff `self` is a component-wise initial segment of `other`.
    pub fn is_prefix_of(&self, other: &Name) -> bool {
        self.len() <= other.len() && self.components.iter().zip(&other.components).all(|(a, b)| a == b)
    }
}

pub fn is_prefix_of(prefix: &Name, name: &Name) -> bool {
    prefix.is_prefix_of(name)
}

fn must_escape(b: u8) -> bool {
    b == b'/' || b == b'%' || !(0x21..=0x7e).contains(&b)
}

fn hex_val(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'a'..=b'f' => Some(b - b'a' + 10),
        b'A'..=b'F' => Some(b - b'A' + 10),
        _ => None,
    }
}

/// Parses the canonical text form. Accepts lowercase hex escapes and
/// unescaped non-reserved bytes; use [`bpq_value_to_name`] for the strict
/// canonical check.
pub fn parse_name(text: &str) -> Result<Name, NameError> {
    let bytes = text.as_bytes();
    if bytes.first() != Some(&b'/') {
        return Err(NameError::MissingLeadingSlash);
    }
    if bytes.len() == 1 {
        return Ok(Name::root());
    }
    let mut components = Vec::new();
    let mut current = Vec::new();
    let mut i = 1;
    while i < bytes.len() {
        match bytes[i] {
            b'/' => {
                if current.is_empty() {
                    return Err(NameError::EmptyComponent(components.len()));
                }
                components.push(std::mem::take(&mut current));
                i += 1;
            }
            b'%' => {
                let hi = bytes.get(i + 1).copied().and_then(hex_val);
                let lo = bytes.get(i + 2).copied().and_then(hex_val);
                match (hi, lo) {
                    (Some(h), Some(l)) => current.push(h << 4 | l),
                    _ => return Err(NameError::BadPercentEncoding(i)),
                }
                i += 3;
            }
            b => {
                current.push(b);
                i += 1;
            }
        }
    }
    if current.is_empty() {
        return Err(NameError::EmptyComponent(components.len()));
    }
    components.push(current);
    Ok(Name { components })
}

pub fn format_name(name: &Name) -> String {
    if name.is_empty() {
        return "/".to_string();
    }
    let mut out = String::new();
    for component in &name.components {
        out.push('/');
        for &b in component {
            if must_escape(b) {
                out.push_str(&format!("%{b:02X}"));
            } else {
                out.push(b as char);
            }
        }
    }
    out
}

/// The BPQ value for a name is the UTF-8 canonical text form.
pub fn name_to_bpq_value(name: &Name) -> Vec<u8> {
    format_name(name).into_bytes()
}

/// Inverse of [`name_to_bpq_value`]; rejects anything that is not exactly
/// the canonical rendering of the decoded name.
pub fn bpq_value_to_name(value: &[u8]) -> Result<Name, NameError> {
    let text = std::str::from_utf8(value).map_err(|_| NameError::NotUtf8)?;
    let name = parse_name(text)?;
    if format_name(&name) != text {
        return Err(NameError::NonCanonical);
    }
    Ok(name)
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_name(self))
    }
}

impl FromStr for Name {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_name(s)
    }
}

impl Serialize for Name {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_name(self))
    }
}

impl<'de> Deserialize<'de> for Name {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_name(&text).map_err(serde::de::Error::custom)
    }
}

/// A DTN endpoint identifier in URI form, `scheme:ssp`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Eid {
    scheme: String,
    ssp: String,
}

impl Eid {
    pub fn new(scheme: impl Into<String>, ssp: impl Into<String>) -> Result<Self, EidError> {
        let scheme = scheme.into();
        if scheme.is_empty() {
            return Err(EidError::EmptyScheme);
        }
        if !scheme.bytes().all(|b| b.is_ascii_alphanumeric()) {
            return Err(EidError::BadScheme(scheme));
        }
        Ok(Self { scheme, ssp: ssp.into() })
    }

    /// The reserved pseudo destination `dtn:any`.
    pub fn any() -> Self {
        Self {
            scheme: "dtn".into(),
            ssp: "any".into(),
        }
    }

    /// The canonical endpoint of a simulated node, `dtn://<node>`.
    pub fn for_node(node: &str) -> Self {
        Self {
            scheme: "dtn".into(),
            ssp: format!("//{node}"),
        }
    }

    pub fn scheme(&self) -> &str {
        &self.scheme
    }

    pub fn ssp(&self) -> &str {
        &self.ssp
    }
}

pub fn parse_eid(text: &str) -> Result<Eid, EidError> {
    let (scheme, ssp) = text.split_once(':').ok_or(EidError::NoColon)?;
    Eid::new(scheme, ssp)
}

impl fmt::Display for Eid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.scheme, self.ssp)
    }
}

impl FromStr for Eid {
    type Err = EidError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_eid(s)
    }
}
