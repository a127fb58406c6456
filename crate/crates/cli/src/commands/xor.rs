use std::fmt::Write as _;

use anyhow::{bail, Result};
use serde_json::json;

use shadescope::{association_rows, b32_address, format_date, AssociationRow};

use super::{date, leasesets, required_netdb, router_hash};
use crate::args::{Format, GlobalArgs, XorAssocArgs};
use crate::output::{csv, emit, json};
use crate::EXIT_OK;

pub fn xor_assoc(global: &GlobalArgs, args: &XorAssocArgs) -> Result<u8> {
    let target = router_hash(&args.target)?;
    let Some(ls_path) = &global.leasesets else {
        bail!("xor-assoc needs --leasesets <file>");
    };
    let snap = required_netdb(global)?;
    let file = leasesets(ls_path)?;
    let date = date(global)?;

    let floodfills = snap.floodfills();
    let mut warnings = Vec::new();
    if !floodfills.contains(&target) {
        let w = format!(
            "target {} is not a floodfill in the snapshot",
            target.short()
        );
        if args.require_floodfill {
            eprintln!("warning: {w}");
        }
        warnings.push(w);
    }
    let eepsites: Vec<String> = file
        .leasesets
        .iter()
        .map(|ls| b32_address(&ls.destination_hash))
        .collect();
    let rows: Vec<AssociationRow> = association_rows(&target, &eepsites, &floodfills, date)
        .into_iter()
        .collect::<Result<_, _>>()?;
    let matches: Vec<&str> = rows
        .iter()
        .filter(|r| r.target_is_nearest)
        .map(|r| r.b32.as_str())
        .collect();

    let text = match global.format {
        Format::Json => {
            let mut v = json!({
                "target": target,
                "date": format_date(date),
                "floodfills": floodfills.len(),
                "eepsites": eepsites.len(),
                "matches": matches,
                "warnings": warnings,
            });
            if args.distances {
                v["distances"] = serde_json::to_value(&rows)?;
            }
            json(&v)?
        }
        Format::Csv => csv(
            &[
                "b32",
                "target_distance",
                "nearest_other",
                "nearest_other_distance",
                "target_is_nearest",
            ],
            rows.iter().map(|r| {
                [
                    r.b32.clone(),
                    r.target_distance.to_hex(),
                    r.nearest_other.map_or(String::new(), |h| h.to_base64()),
                    r.nearest_other_distance
                        .map_or(String::new(), |d| d.to_hex()),
                    r.target_is_nearest.to_string(),
                ]
            }),
        )?,
        Format::Table => {
            let mut out = String::new();
            writeln!(out, "Target            {target}")?;
            writeln!(out, "Routing date      {}", format_date(date))?;
            writeln!(
                out,
                "Compared          {} floodfills, {} eepsites",
                floodfills.len(),
                eepsites.len()
            )?;
            writeln!(out, "Nearest for       {} eepsite(s)", matches.len())?;
            for m in &matches {
                writeln!(out, "  {m}")?;
            }
            if args.distances {
                writeln!(out, "Distances (leading zero bits: target / nearest other)")?;
                for r in &rows {
                    let other = r
                        .nearest_other_distance
                        .map_or("-".into(), |d| d.leading_zeros().to_string());
                    let mark = if r.target_is_nearest { "*" } else { " " };
                    writeln!(
                        out,
                        "{mark} {} {:>3} / {other:>3}",
                        r.b32,
                        r.target_distance.leading_zeros()
                    )?;
                }
            }
            for w in &warnings {
                writeln!(out, "warning: {w}")?;
            }
            out
        }
    };
    emit(&text, global.out.as_deref())?;
    Ok(EXIT_OK)
}
