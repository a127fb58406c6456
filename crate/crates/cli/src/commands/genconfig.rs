use anyhow::Result;
use serde_json::json;

use shadescope::render_config;

use crate::args::{Format, GenconfigArgs, GlobalArgs};
use crate::output::{csv, emit, json};
use crate::EXIT_OK;

pub fn genconfig(global: &GlobalArgs, args: &GenconfigArgs) -> Result<u8> {
    let profile = args.profile;
    let text = match global.format {
        Format::Table => render_config(profile),
        Format::Json => json(&json!({
            "profile": profile,
            "parameters": profile.params(),
            "text": render_config(profile),
        }))?,
        Format::Csv => csv(
            &["key", "value"],
            profile.params().iter().map(|p| [p.key, p.value]),
        )?,
    };
    emit(&text, global.out.as_deref())?;
    Ok(EXIT_OK)
}
