use std::fmt::Write as _;
use std::fs;

use anyhow::{Context, Result};
use serde_json::json;

use shadescope::hash::base64_decode;
use shadescope::{derive_b32, Destination};

use crate::args::{B32Args, Format, GlobalArgs};
use crate::output::{csv, emit, json};
use crate::EXIT_OK;

/// Raw bytes, or base64 text if the whole file decodes as such.
fn destination_bytes(raw: Vec<u8>) -> Vec<u8> {
    std::str::from_utf8(&raw)
        .ok()
        .map(|t| t.split_whitespace().collect::<String>())
        .filter(|t| !t.is_empty())
        .and_then(|t| base64_decode(&t).ok())
        .filter(|b| b.len() >= shadescope::destination::MIN_IDENTITY_LEN)
        .unwrap_or(raw)
}

pub fn b32(global: &GlobalArgs, args: &B32Args) -> Result<u8> {
    let path = &args.dest_file;
    let raw = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let dest = Destination::parse(&destination_bytes(raw))
        .with_context(|| format!("{} is not a destination", path.display()))?;
    let addr = derive_b32(&dest);
    let text = match global.format {
        Format::Json => json(&json!({
            "b32": addr,
            "d_s": dest.size(),
            "cert_type": dest.cert_type(),
            "cert_len": dest.cert_len(),
            "hash": dest.hash(),
        }))?,
        Format::Csv => csv(
            &["b32", "d_s", "cert_type", "cert_len"],
            [[
                addr.clone(),
                dest.size().to_string(),
                dest.cert_type().to_string(),
                dest.cert_len().to_string(),
            ]],
        )?,
        Format::Table => {
            let mut out = String::new();
            writeln!(out, "{addr}")?;
            writeln!(out, "d_s = {}", dest.size())?;
            writeln!(
                out,
                "certificate type {}, length {}",
                dest.cert_type(),
                dest.cert_len()
            )?;
            out
        }
    };
    emit(&text, global.out.as_deref())?;
    Ok(EXIT_OK)
}
