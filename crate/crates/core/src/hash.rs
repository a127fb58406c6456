//! 32-byte identifiers and the overlay's text encodings.
//!
//! Router and destination hashes are both SHA-256 digests. Their canonical
//! text form is the overlay's base64 variant: standard base64 with `+`
//! replaced by `-` and `/` replaced by `~`, so that hashes can appear in
//! file names such as `routerInfo-<hash>.dat`.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use data_encoding::{Encoding, Specification};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Number of bytes in a router or destination hash.
pub const HASH_LEN: usize = 32;

/// Length of the base64 text form of a hash, including the one `=` pad.
pub const HASH_B64_LEN: usize = 44;

pub(crate) const B64_SYMBOLS: &str =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-~";

/// The overlay's base64 alphabet with `=` padding.
pub static I2P_BASE64: LazyLock<Encoding> = LazyLock::new(|| {
    let mut spec = Specification::new();
    spec.symbols.push_str(B64_SYMBOLS);
    spec.padding = Some('=');
    spec.encoding().expect("valid base64 specification")
});

/// Encode arbitrary bytes with the overlay's base64 alphabet.
pub fn base64_encode(bytes: &[u8]) -> String {
    I2P_BASE64.encode(bytes)
}

/// Decode the overlay's base64 alphabet. Missing trailing padding is accepted.
pub fn base64_decode(text: &str) -> Result<Vec<u8>, HashParseError> {
    let text = text.trim();
    let mut padded = text.to_string();
    while padded.len() % 4 != 0 {
        padded.push('=');
    }
    I2P_BASE64
        .decode(padded.as_bytes())
        .map_err(|e| HashParseError::Base64(e.to_string()))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HashParseError {
    #[error("invalid base64: {0}")]
    Base64(String),
    #[error("invalid hex: {0}")]
    Hex(String),
    #[error("expected {HASH_LEN} bytes, got {0}")]
    Length(usize),
}

/// SHA-256 identifier of a router identity or a destination.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct RouterHash(pub [u8; HASH_LEN]);

/// Destinations are identified the same way routers are.
pub type DestinationHash = RouterHash;

impl RouterHash {
    pub const ZERO: RouterHash = RouterHash([0; HASH_LEN]);

    pub fn from_slice(bytes: &[u8]) -> Result<Self, HashParseError> {
        let array: [u8; HASH_LEN] = bytes
            .try_into()
            .map_err(|_| HashParseError::Length(bytes.len()))?;
        Ok(Self(array))
    }

    /// SHA-256 of `bytes`.
    pub fn digest(bytes: &[u8]) -> Self {
        Self(Sha256::digest(bytes).into())
    }

    pub fn as_bytes(&self) -> &[u8; HASH_LEN] {
        &self.0
    }

    pub fn to_base64(&self) -> String {
        base64_encode(&self.0)
    }

    pub fn from_base64(text: &str) -> Result<Self, HashParseError> {
        Self::from_slice(&base64_decode(text)?)
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(text: &str) -> Result<Self, HashParseError> {
        let bytes = data_encoding::HEXLOWER_PERMISSIVE
            .decode(text.trim().as_bytes())
            .map_err(|e| HashParseError::Hex(e.to_string()))?;
        Self::from_slice(&bytes)
    }

    /// Short base64 prefix for human-readable output.
    pub fn short(&self) -> String {
        let mut s = self.to_base64();
        s.truncate(12);
        s
    }
}

impl fmt::Display for RouterHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_base64())
    }
}

impl fmt::Debug for RouterHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RouterHash({})", self.to_base64())
    }
}

/// Accepts the 44-character base64 form (padding optional) or 64 hex digits.
impl FromStr for RouterHash {
    type Err = HashParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.len() == 2 * HASH_LEN && s.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Self::from_hex(s);
        }
        Self::from_base64(s)
    }
}

impl Serialize for RouterHash {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_base64())
    }
}

impl<'de> Deserialize<'de> for RouterHash {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
