use std::fmt::Write as _;

use anyhow::{bail, Result};
use serde_json::json;

use shadescope::snapshot::RecordSummary;
use shadescope::NetDbSnapshot;

use super::snapshot;
use crate::args::{Format, GlobalArgs, ScanArgs};
use crate::output::{csv, emit, json};
use crate::EXIT_OK;

pub fn scan(global: &GlobalArgs, args: &ScanArgs) -> Result<u8> {
    let Some(dir) = args.dir.as_ref().or(global.netdb.as_ref()) else {
        bail!("no NetDB directory: pass a path, --netdb or SHADESCOPE_NETDB");
    };
    let snap = snapshot(dir)?;
    let text = if args.records {
        records(&snap.export_records(), global.format)?
    } else {
        summary(&snap, global.format)?
    };
    emit(&text, global.out.as_deref())?;
    Ok(EXIT_OK)
}

fn summary(snap: &NetDbSnapshot, format: Format) -> Result<String> {
    let hist = snap.shade_histogram();
    let pct = format!("{:.1}", snap.floodfill_percent());
    match format {
        Format::Json => json(&json!({
            "files": snap.stats.total,
            "records": snap.len(),
            "floodfills": snap.stats.floodfill_count,
            "floodfill_percent": pct.parse::<f64>()?,
            "parse_failures": snap.stats.parse_failures,
            "shade_histogram": hist.iter().map(|(s, n)| (s.level().to_string(), *n)).collect::<std::collections::BTreeMap<_, _>>(),
            "failures": snap.failures,
            "warnings": snap.warnings,
        })),
        Format::Csv => {
            let mut rows = vec![
                ["files".to_string(), snap.stats.total.to_string()],
                ["records".into(), snap.len().to_string()],
                ["floodfills".into(), snap.stats.floodfill_count.to_string()],
                ["floodfill_percent".into(), pct],
                [
                    "parse_failures".into(),
                    snap.stats.parse_failures.to_string(),
                ],
            ];
            rows.extend(
                hist.iter()
                    .map(|(s, n)| [format!("shade_{}", s.level()), n.to_string()]),
            );
            csv(&["metric", "value"], rows)
        }
        Format::Table => {
            let mut out = String::new();
            if let Some(dir) = &snap.source_dir {
                writeln!(out, "NetDB snapshot {}", dir.display())?;
            }
            writeln!(out, "RouterInfo files  {}", snap.stats.total)?;
            writeln!(out, "Parsed records    {}", snap.len())?;
            writeln!(
                out,
                "Floodfills        {} ({pct}%)",
                snap.stats.floodfill_count
            )?;
            writeln!(out, "Parse failures    {}", snap.stats.parse_failures)?;
            for f in &snap.failures {
                let caps = f.recovered.caps.as_deref().unwrap_or("?");
                writeln!(
                    out,
                    "  {}: {} (recovered caps {caps})",
                    f.path.display(),
                    f.error
                )?;
            }
            writeln!(out, "Shade histogram")?;
            for (shade, n) in &hist {
                writeln!(out, "  {:<22} {n:>6}", shade.to_string())?;
            }
            writeln!(
                out,
                "  (shade 8 routers have no record and never appear in a snapshot)"
            )?;
            for w in &snap.warnings {
                writeln!(out, "warning: {w}")?;
            }
            Ok(out)
        }
    }
}

fn records(rows: &[RecordSummary], format: Format) -> Result<String> {
    match format {
        Format::Json => json(&rows),
        Format::Csv | Format::Table => {
            let rows = rows.iter().map(|r| {
                let addrs: Vec<String> = r
                    .addresses
                    .iter()
                    .map(|a| match (&a.host, a.port) {
                        (Some(h), Some(p)) => format!("{} {h}:{p}", a.style),
                        _ => a.style.clone(),
                    })
                    .collect();
                let opt = |v: Option<u64>| v.map_or(String::new(), |n| n.to_string());
                [
                    r.hash.to_base64(),
                    r.caps.clone(),
                    r.alpha.to_string(),
                    r.iota.to_string(),
                    r.version.clone().unwrap_or_default(),
                    opt(r.known_routers),
                    opt(r.known_lease_sets),
                    addrs.join(" | "),
                ]
            });
            csv(
                &[
                    "hash",
                    "caps",
                    "alpha",
                    "iota",
                    "version",
                    "known_routers",
                    "known_leasesets",
                    "addresses",
                ],
                rows,
            )
        }
    }
}
