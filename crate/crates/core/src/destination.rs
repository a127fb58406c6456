//! Router identities and service destinations.
//!
//! Both share one layout: 256 bytes of encryption key, 128 bytes of signing
//! key, then a certificate (1-byte type, 2-byte big-endian length, payload).
//! Everything past the certificate payload (private keys in `eepPriv.dat`,
//! the rest of a RouterInfo) is not part of the identity.

use thiserror::Error;

use crate::hash::RouterHash;

/// Offset of the certificate type byte.
pub const CERT_TYPE_OFFSET: usize = 384;

/// Size of an identity with an empty (null) certificate.
pub const MIN_IDENTITY_LEN: usize = 387;

/// Certificate type carrying a key certificate.
pub const CERT_TYPE_KEY: u8 = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DestinationError {
    #[error("identity needs at least {MIN_IDENTITY_LEN} bytes, got {0}")]
    TooShort(usize),
    #[error("certificate declares {cert_len} payload bytes, identity needs {needed} bytes but only {available} are present")]
    TruncatedCertificate {
        cert_len: u16,
        needed: usize,
        available: usize,
    },
}

/// A parsed identity, holding exactly its first `size()` bytes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Destination {
    bytes: Vec<u8>,
}

impl Destination {
    /// Parse the identity at the start of `bytes`; trailing bytes are ignored.
    pub fn parse(bytes: &[u8]) -> Result<Self, DestinationError> {
        let size = identity_len(bytes)?;
        Ok(Self {
            bytes: bytes[..size].to_vec(),
        })
    }

    /// Build an identity from its key material and certificate.
    pub fn from_parts(keys: &[u8; CERT_TYPE_OFFSET], cert_type: u8, cert_payload: &[u8]) -> Self {
        let cert_len = u16::try_from(cert_payload.len()).expect("certificate payload fits in u16");
        let mut bytes = Vec::with_capacity(MIN_IDENTITY_LEN + cert_payload.len());
        bytes.extend_from_slice(keys);
        bytes.push(cert_type);
        bytes.extend_from_slice(&cert_len.to_be_bytes());
        bytes.extend_from_slice(cert_payload);
        Self { bytes }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn cert_type(&self) -> u8 {
        self.bytes[CERT_TYPE_OFFSET]
    }

    /// Certificate payload length `L`.
    pub fn cert_len(&self) -> u16 {
        u16::from_be_bytes([self.bytes[385], self.bytes[386]])
    }

    /// Identity size `387 + L`.
    pub fn size(&self) -> usize {
        self.bytes.len()
    }

    pub fn hash(&self) -> RouterHash {
        RouterHash::digest(&self.bytes)
    }
}

impl std::fmt::Debug for Destination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Destination")
            .field("cert_type", &self.cert_type())
            .field("size", &self.size())
            .field("hash", &self.hash())
            .finish()
    }
}

/// Identity size `387 + L` read from the certificate header of `bytes`.
pub fn identity_len(bytes: &[u8]) -> Result<usize, DestinationError> {
    if bytes.len() < MIN_IDENTITY_LEN {
        return Err(DestinationError::TooShort(bytes.len()));
    }
    let cert_len = u16::from_be_bytes([bytes[385], bytes[386]]);
    let needed = MIN_IDENTITY_LEN + usize::from(cert_len);
    if bytes.len() < needed {
        return Err(DestinationError::TruncatedCertificate {
            cert_len,
            needed,
            available: bytes.len(),
        });
    }
    Ok(needed)
}

/// SHA-256 over the identity prefix of `bytes`.
pub fn hash_identity(bytes: &[u8]) -> Result<RouterHash, DestinationError> {
    let size = identity_len(bytes)?;
    Ok(RouterHash::digest(&bytes[..size]))
}
