//! Text fixture format for LeaseSets.
//!
//! One record per line:
//!
//! ```text
//! <dest_hash_b64> <b32|-> <gateway_b64>:<tunnel_id>:<expiry_ms>[,<gateway_b64>:<tunnel_id>:<expiry_ms>...]
//! ```
//!
//! The lease list may be omitted for a LeaseSet without leases. `#` starts a
//! comment. Malformed lines are skipped and reported as warnings.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dht::decode_b32;
use crate::hash::RouterHash;
use crate::record::{Lease, LeaseSet};

#[derive(Debug, Error)]
#[error("cannot read LeaseSet file {path}: {source}")]
pub struct LeaseSetFileError {
    pub path: PathBuf,
    pub source: io::Error,
}

#[derive(Debug, Clone, Default)]
pub struct LeaseSetFile {
    pub leasesets: Vec<LeaseSet>,
    pub warnings: Vec<String>,
}

pub fn load_leasesets(path: impl AsRef<Path>) -> Result<LeaseSetFile, LeaseSetFileError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| LeaseSetFileError {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_leasesets(&text))
}

pub fn parse_leasesets(text: &str) -> LeaseSetFile {
    let mut out = LeaseSetFile::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match parse_line(line) {
            Ok((ls, warning)) => {
                if let Some(w) = warning {
                    out.warnings.push(format!("line {}: {w}", n + 1));
                }
                out.leasesets.push(ls);
            }
            Err(e) => out.warnings.push(format!("line {}: {e}", n + 1)),
        }
    }
    out
}

fn parse_line(line: &str) -> Result<(LeaseSet, Option<String>), String> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if !(2..=3).contains(&fields.len()) {
        return Err(format!("expected 2 or 3 fields, found {}", fields.len()));
    }
    let destination_hash =
        RouterHash::from_base64(fields[0]).map_err(|e| format!("destination hash: {e}"))?;
    let mut warning = None;
    let b32 = match fields[1] {
        "-" => None,
        text => {
            match decode_b32(text) {
                Ok(h) if h != destination_hash => {
                    warning = Some(format!("b32 {text} does not match the destination hash"))
                }
                Ok(_) => {}
                Err(e) => warning = Some(format!("b32 {text}: {e}")),
            }
            Some(text.to_ascii_lowercase())
        }
    };
    let leases = match fields.get(2) {
        None => Vec::new(),
        Some(list) => list.split(',').map(parse_lease).collect::<Result<_, _>>()?,
    };
    Ok((
        LeaseSet {
            destination_hash,
            b32,
            leases,
        },
        warning,
    ))
}

fn parse_lease(text: &str) -> Result<Lease, String> {
    let mut parts = text.split(':');
    let (Some(gw), Some(tid), Some(exp), None) =
        (parts.next(), parts.next(), parts.next(), parts.next())
    else {
        return Err(format!("lease {text:?} is not gateway:tunnel_id:expiry_ms"));
    };
    Ok(Lease {
        gateway: RouterHash::from_base64(gw).map_err(|e| format!("gateway {gw:?}: {e}"))?,
        tunnel_id: tid.parse().map_err(|_| format!("tunnel id {tid:?}"))?,
        expiry_ms: exp.parse().map_err(|_| format!("expiry {exp:?}"))?,
    })
}

/// Render LeaseSets in the fixture format.
pub fn format_leasesets(leasesets: &[LeaseSet]) -> String {
    let mut out = String::new();
    for ls in leasesets {
        let _ = write!(
            out,
            "{} {}",
            ls.destination_hash.to_base64(),
            ls.b32.as_deref().unwrap_or("-")
        );
        if !ls.leases.is_empty() {
            let leases: Vec<String> = ls
                .leases
                .iter()
                .map(|l| format!("{}:{}:{}", l.gateway.to_base64(), l.tunnel_id, l.expiry_ms))
                .collect();
            let _ = write!(out, " {}", leases.join(","));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dht::b32_address;

    fn h(b: u8) -> RouterHash {
        RouterHash([b; 32])
    }

    #[test]
    fn empty_input() {
        let f = parse_leasesets("");
        assert!(f.leasesets.is_empty());
        assert!(f.warnings.is_empty());
    }

    #[test]
    fn two_leases() {
        let line = format!(
            "{} {} {}:7:1000,{}:8:2000  # trailing comment\n",
            h(1),
            b32_address(&h(1)),
            h(2),
            h(3)
        );
        let f = parse_leasesets(&line);
        assert!(f.warnings.is_empty(), "{:?}", f.warnings);
        assert_eq!(f.leasesets.len(), 1);
        let gws: Vec<_> = f.leasesets[0].leases.iter().map(|l| l.gateway).collect();
        assert_eq!(gws, vec![h(2), h(3)]);
        assert_eq!(f.leasesets[0].leases[1].tunnel_id, 8);
    }

    #[test]
    fn malformed_lines_become_warnings() {
        let text = format!(
            "# header\n{} -\nnot a line at all\n{} - {}:x:1\n",
            h(1),
            h(2),
            h(3)
        );
        let f = parse_leasesets(&text);
        assert_eq!(f.leasesets.len(), 1);
        assert!(f.leasesets[0].leases.is_empty());
        assert_eq!(f.warnings.len(), 2);
        assert!(f.warnings[0].starts_with("line 3"));
    }

    #[test]
    fn mismatched_b32_is_kept_with_warning() {
        let text = format!("{} {}\n", h(1), b32_address(&h(9)));
        let f = parse_leasesets(&text);
        assert_eq!(f.leasesets.len(), 1);
        assert_eq!(f.warnings.len(), 1);
    }

    #[test]
    fn format_then_parse() {
        let ls = vec![LeaseSet {
            destination_hash: h(4),
            b32: Some(b32_address(&h(4))),
            leases: vec![Lease {
                gateway: h(5),
                tunnel_id: u32::MAX,
                expiry_ms: 17,
            }],
        }];
        let f = parse_leasesets(&format_leasesets(&ls));
        assert_eq!(f.leasesets, ls);
    }

    #[test]
    fn missing_file() {
        assert!(load_leasesets("/definitely/not/here.txt").is_err());
    }
}
