//! Best-effort field recovery from damaged or unknown record bytes.
//!
//! Works the way `strings(1)` does: find runs of at least four printable
//! bytes, then look for known option keys inside them. Values are read from
//! the raw bytes that follow `key=`, using the length prefix when it is
//! consistent and scanning to the next `;` otherwise. Nothing here can fail;
//! anything not found is simply absent.

use serde::Serialize;

use crate::record::{OPT_CAPS, OPT_KNOWN_LEASESETS, OPT_KNOWN_ROUTERS, OPT_VERSION};

/// Minimum run length, matching the `strings` default.
pub const MIN_RUN: usize = 4;

const KNOWN_STYLES: [&str; 4] = ["NTCP2", "SSU2", "NTCP", "SSU"];

/// Fields recovered by [`lenient_extract`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LenientRecord {
    pub caps: Option<String>,
    pub version: Option<String>,
    pub known_routers: Option<u64>,
    pub known_leasesets: Option<u64>,
    pub address_styles: Vec<String>,
    pub hosts: Vec<String>,
}

fn printable(b: u8) -> bool {
    (0x20..0x7f).contains(&b)
}

/// Byte ranges of printable runs of at least `min` bytes.
pub fn printable_runs(bytes: &[u8], min: usize) -> Vec<std::ops::Range<usize>> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &b) in bytes.iter().enumerate() {
        match (printable(b), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s >= min {
                    runs.push(s..i);
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        if bytes.len() - s >= min {
            runs.push(s..bytes.len());
        }
    }
    runs
}

/// Read the value that starts right after a `key=` ending at `pos`.
fn value_at(bytes: &[u8], pos: usize) -> Option<String> {
    let &len = bytes.get(pos)?;
    let len = usize::from(len);
    let end = pos + 1 + len;
    if bytes.get(end) == Some(&b';') && bytes[pos + 1..end].iter().all(|&b| printable(b)) {
        return Some(String::from_utf8_lossy(&bytes[pos + 1..end]).into_owned());
    }
    // Length byte damaged or missing: take printable bytes up to ';'.
    let start = if printable(bytes[pos]) { pos } else { pos + 1 };
    let tail = bytes.get(start..)?;
    let stop = tail.iter().position(|&b| b == b';' || !printable(b))?;
    (tail.get(stop) == Some(&b';')).then(|| String::from_utf8_lossy(&tail[..stop]).into_owned())
}

/// Every value stored under `key`, in byte order.
fn values_of(bytes: &[u8], runs: &[std::ops::Range<usize>], key: &str) -> Vec<String> {
    let needle = format!("{key}=");
    let mut out = Vec::new();
    for run in runs {
        let text = &bytes[run.clone()];
        let mut from = 0;
        while let Some(i) = find(&text[from..], needle.as_bytes()) {
            let at = run.start + from + i;
            // The key must be a whole mapping key: preceded by its length byte.
            let whole = at > 0 && usize::from(bytes[at - 1]) == key.len();
            if whole {
                if let Some(v) = value_at(bytes, at + needle.len()) {
                    out.push(v);
                }
            }
            from += i + needle.len();
        }
    }
    out
}

fn find(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).position(|w| w == needle)
}

/// Recover caps, version, known-peer counts and address styles. Never fails.
pub fn lenient_extract(bytes: &[u8]) -> LenientRecord {
    let runs = printable_runs(bytes, MIN_RUN);
    let first = |key: &str| values_of(bytes, &runs, key).into_iter().next();
    let mut styles = Vec::new();
    for (i, w) in bytes.windows(2).enumerate() {
        let len = usize::from(w[0]);
        for style in KNOWN_STYLES {
            if len == style.len() && bytes[i + 1..].starts_with(style.as_bytes()) {
                styles.push(style.to_string());
            }
        }
    }
    LenientRecord {
        caps: first(OPT_CAPS),
        version: first(OPT_VERSION),
        known_routers: first(OPT_KNOWN_ROUTERS).and_then(|v| v.parse().ok()),
        known_leasesets: first(OPT_KNOWN_LEASESETS).and_then(|v| v.parse().ok()),
        address_styles: styles,
        hosts: values_of(bytes, &runs, "host"),
    }
}
