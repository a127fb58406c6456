mod b32;
mod genconfig;
mod lookup;
mod scan;
mod simulate;
mod xor;

pub use b32::b32;
pub use genconfig::genconfig;
pub use lookup::lookup;
pub use scan::scan;
pub use simulate::simulate;
pub use xor::xor_assoc;

use std::path::Path;

use anyhow::{bail, Context, Result};
use chrono::{NaiveDate, Utc};

use shadescope::leaseset::{load_leasesets, LeaseSetFile};
use shadescope::{load_netdb_dir, parse_date, NetDbSnapshot, RouterHash};

use crate::args::GlobalArgs;

fn date(global: &GlobalArgs) -> Result<NaiveDate> {
    match &global.date {
        Some(text) => parse_date(text).with_context(|| format!("--date {text}")),
        None => Ok(Utc::now().date_naive()),
    }
}

fn router_hash(text: &str) -> Result<RouterHash> {
    text.trim()
        .parse()
        .with_context(|| format!("{text:?} is not a router hash (base64 or hex)"))
}

fn snapshot(dir: &Path) -> Result<NetDbSnapshot> {
    load_netdb_dir(dir).with_context(|| format!("loading NetDB from {}", dir.display()))
}

fn required_netdb(global: &GlobalArgs) -> Result<NetDbSnapshot> {
    match &global.netdb {
        Some(dir) => snapshot(dir),
        None => bail!("no NetDB directory: pass --netdb or set SHADESCOPE_NETDB"),
    }
}

fn leasesets(path: &Path) -> Result<LeaseSetFile> {
    let file = load_leasesets(path)?;
    for w in &file.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(file)
}
