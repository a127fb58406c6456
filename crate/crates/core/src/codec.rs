//! Strict binary codec for RouterInfo records.
//!
//! Layout:
//!
//! ```text
//! identity (387 + L bytes)
//! published          u64 big-endian, epoch milliseconds
//! address count      u8
//!   cost             u8
//!   expiration       u64 big-endian
//!   style            string
//!   options          mapping
//! peer count         u8 (always 0; any listed peers are skipped)
//! options            mapping
//! signature          remaining bytes, opaque
//! ```
//!
//! A string is a 1-byte length followed by UTF-8 bytes. A mapping is a 2-byte
//! big-endian byte length followed by `string '=' string ';'` entries, keys
//! sorted ascending.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::destination::{identity_len, Destination, DestinationError};
use crate::hash::HASH_LEN;
use crate::record::{RouterInfo, TransportAddress};

pub const MAX_MAPPING_LEN: usize = u16::MAX as usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("truncated identity at offset 0: {0}")]
    TruncatedIdentity(#[from] DestinationError),
    #[error("truncated {field} at offset {offset}: need {needed} bytes, {available} available")]
    Truncated {
        field: &'static str,
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error(
        "mapping at offset {offset} declares {declared} bytes but its entries span {consumed}"
    )]
    MappingLengthMismatch {
        offset: usize,
        declared: usize,
        consumed: usize,
    },
    #[error("malformed mapping entry at offset {offset}: {reason}")]
    MalformedMapping { offset: usize, reason: String },
    #[error("invalid UTF-8 string at offset {offset}")]
    InvalidUtf8 { offset: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("{what} mapping is {len} bytes, limit is {MAX_MAPPING_LEN}")]
    OversizeMapping { what: &'static str, len: usize },
    #[error("invalid transport style {0:?}")]
    InvalidStyle(String),
    #[error("{what} string is {len} bytes, limit is 255")]
    OversizeString { what: &'static str, len: usize },
    #[error("{0} addresses, limit is 255")]
    TooManyAddresses(usize),
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, field: &'static str) -> Result<&'a [u8], DecodeError> {
        let available = self.bytes.len() - self.pos;
        if available < n {
            return Err(DecodeError::Truncated {
                field,
                offset: self.pos,
                needed: n,
                available,
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self, field: &'static str) -> Result<u8, DecodeError> {
        Ok(self.take(1, field)?[0])
    }

    fn u16(&mut self, field: &'static str) -> Result<u16, DecodeError> {
        let b = self.take(2, field)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u64(&mut self, field: &'static str) -> Result<u64, DecodeError> {
        let b = self.take(8, field)?;
        Ok(u64::from_be_bytes(b.try_into().unwrap()))
    }

    fn string(&mut self, field: &'static str) -> Result<String, DecodeError> {
        let len = usize::from(self.u8(field)?);
        let offset = self.pos;
        let raw = self.take(len, field)?;
        String::from_utf8(raw.to_vec()).map_err(|_| DecodeError::InvalidUtf8 { offset })
    }

    fn mapping(&mut self, field: &'static str) -> Result<BTreeMap<String, String>, DecodeError> {
        let start = self.pos;
        let declared = usize::from(self.u16(field)?);
        let body = self.take(declared, field)?;
        let base = start + 2;
        let mut inner = Reader {
            bytes: body,
            pos: 0,
        };
        let mut map = BTreeMap::new();
        while inner.pos < body.len() {
            let entry_offset = base + inner.pos;
            let key = inner
                .string(field)
                .map_err(|e| in_body(e, base, start, declared))?;
            expect_byte(&mut inner, b'=', base, start, declared)?;
            let value = inner
                .string(field)
                .map_err(|e| in_body(e, base, start, declared))?;
            expect_byte(&mut inner, b';', base, start, declared)?;
            if map.insert(key.clone(), value).is_some() {
                return Err(DecodeError::MalformedMapping {
                    offset: entry_offset,
                    reason: format!("duplicate key {key:?}"),
                });
            }
        }
        Ok(map)
    }
}

// Errors from the inner reader carry body-relative offsets; truncation inside
// the body means the entries ran past the declared length.
fn in_body(e: DecodeError, base: usize, start: usize, declared: usize) -> DecodeError {
    match e {
        DecodeError::Truncated { .. } => DecodeError::MappingLengthMismatch {
            offset: start,
            declared,
            consumed: declared + 1,
        },
        DecodeError::InvalidUtf8 { offset } => DecodeError::InvalidUtf8 {
            offset: base + offset,
        },
        other => other,
    }
}

fn expect_byte(
    inner: &mut Reader<'_>,
    want: u8,
    base: usize,
    start: usize,
    declared: usize,
) -> Result<(), DecodeError> {
    let offset = base + inner.pos;
    match inner.bytes.get(inner.pos) {
        None => Err(DecodeError::MappingLengthMismatch {
            offset: start,
            declared,
            consumed: declared + 1,
        }),
        Some(&b) if b == want => {
            inner.pos += 1;
            Ok(())
        }
        Some(&b) => Err(DecodeError::MalformedMapping {
            offset,
            reason: format!("expected {:?}, found byte 0x{b:02x}", want as char),
        }),
    }
}

/// Decode one complete RouterInfo record.
pub fn decode_router_info(bytes: &[u8]) -> Result<RouterInfo, DecodeError> {
    let id_len = identity_len(bytes)?;
    let identity = Destination::parse(bytes)?;
    let mut r = Reader { bytes, pos: id_len };
    let published_ms = r.u64("published date")?;
    let count = r.u8("address count")?;
    let mut addresses = Vec::with_capacity(usize::from(count));
    for _ in 0..count {
        let cost = r.u8("address cost")?;
        let expiration_ms = r.u64("address expiration")?;
        let style = r.string("transport style")?;
        let options = r.mapping("address options")?;
        addresses.push(TransportAddress {
            cost,
            expiration_ms,
            style,
            options,
        });
    }
    let peers = usize::from(r.u8("peer count")?);
    r.take(peers * HASH_LEN, "peer list")?;
    let options = r.mapping("router options")?;
    let signature = bytes[r.pos..].to_vec();
    Ok(RouterInfo::new(
        identity,
        published_ms,
        addresses,
        options,
        signature,
    ))
}

fn put_string(out: &mut Vec<u8>, s: &str, what: &'static str) -> Result<(), EncodeError> {
    let len =
        u8::try_from(s.len()).map_err(|_| EncodeError::OversizeString { what, len: s.len() })?;
    out.push(len);
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

fn put_mapping(
    out: &mut Vec<u8>,
    map: &BTreeMap<String, String>,
    what: &'static str,
) -> Result<(), EncodeError> {
    let mut body = Vec::new();
    for (k, v) in map {
        put_string(&mut body, k, what)?;
        body.push(b'=');
        put_string(&mut body, v, what)?;
        body.push(b';');
    }
    let len = u16::try_from(body.len()).map_err(|_| EncodeError::OversizeMapping {
        what,
        len: body.len(),
    })?;
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(&body);
    Ok(())
}

fn valid_style(style: &str) -> bool {
    !style.is_empty() && style.len() <= 255 && style.bytes().all(|b| b.is_ascii_graphic())
}

/// Encode a record; [`decode_router_info`] inverts this exactly.
pub fn encode_router_info(record: &RouterInfo) -> Result<Vec<u8>, EncodeError> {
    if record.addresses.len() > 255 {
        return Err(EncodeError::TooManyAddresses(record.addresses.len()));
    }
    let mut out = Vec::with_capacity(record.identity.size() + 512 + record.signature.len());
    out.extend_from_slice(record.identity.as_bytes());
    out.extend_from_slice(&record.published_ms.to_be_bytes());
    out.push(record.addresses.len() as u8);
    for a in &record.addresses {
        if !valid_style(&a.style) {
            return Err(EncodeError::InvalidStyle(a.style.clone()));
        }
        out.push(a.cost);
        out.extend_from_slice(&a.expiration_ms.to_be_bytes());
        put_string(&mut out, &a.style, "transport style")?;
        put_mapping(&mut out, &a.options, "address options")?;
    }
    out.push(0);
    put_mapping(&mut out, &record.options, "router options")?;
    out.extend_from_slice(&record.signature);
    Ok(out)
}
