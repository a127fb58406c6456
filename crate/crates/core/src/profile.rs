//! `router.config` profiles for running a router that publishes nothing.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConfigParam {
    pub key: &'static str,
    pub value: &'static str,
    pub comment: Option<&'static str>,
}

const fn param(key: &'static str, value: &'static str) -> ConfigParam {
    ConfigParam {
        key,
        value,
        comment: None,
    }
}

/// The exclusive profile: no published RouterInfo, no relaying, no peer
/// tests, fresh identity on every restart.
pub const EXCLUSIVE_PARAMS: [ConfigParam; 10] = [
    param("router.isHidden", "true"),
    param("router.hiddenMode", "true"),
    ConfigParam {
        key: "i2np.udp.addressSources",
        value: "",
        comment: Some("empty"),
    },
    param("i2np.ntcp2.autoip", "false"),
    param("router.floodfillParticipant", "false"),
    param("router.maxParticipatingTunnels", "0"),
    param("router.sharePercentage", "0"),
    param("router.enablePeerTest", "false"),
    ConfigParam {
        key: "router.dynamicKeys",
        value: "true",
        comment: Some("ephemeral identity"),
    },
    param("i2np.udp.requireIntroductions", "true"),
];

/// Extra ghost-profile settings. Best effort: firewalled declaration,
/// laptop-mode identity rotation, and less self-reporting.
pub const GHOST_EXTENSIONS: [ConfigParam; 8] = [
    param("i2np.ipv4.firewalled", "true"),
    param("i2np.ipv6.firewalled", "true"),
    ConfigParam {
        key: "i2np.laptopMode",
        value: "true",
        comment: Some("new identity when the address changes"),
    },
    param("i2np.upnp.enable", "false"),
    param("i2np.ntcp.ipv6", "false"),
    param("i2np.udp.ipv6", "false"),
    param("router.publishPeerRankings", "false"),
    param("stat.full", "false"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfigProfile {
    Exclusive,
    Ghost,
}

impl ConfigProfile {
    pub fn params(self) -> Vec<ConfigParam> {
        let mut out = EXCLUSIVE_PARAMS.to_vec();
        if self == Self::Ghost {
            out.extend(GHOST_EXTENSIONS);
        }
        out
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Exclusive => "exclusive",
            Self::Ghost => "ghost",
        }
    }
}

impl fmt::Display for ConfigProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConfigProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "exclusive" => Ok(Self::Exclusive),
            "ghost" => Ok(Self::Ghost),
            other => Err(format!(
                "unknown profile {other:?} (expected exclusive or ghost)"
            )),
        }
    }
}

fn push_params(out: &mut String, params: &[ConfigParam]) {
    for p in params {
        // router.config has no inline comments, so they go on their own line.
        if let Some(c) = p.comment {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(p.key);
        out.push('=');
        out.push_str(p.value);
        out.push('\n');
    }
}

/// `key=value` lines with `#` comments, LF line endings.
pub fn render_config(profile: ConfigProfile) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {profile} profile\n"));
    out.push_str("# Merge into router.config and restart the router.\n");
    push_params(&mut out, &EXCLUSIVE_PARAMS);
    if profile == ConfigProfile::Ghost {
        out.push_str("#\n");
        out.push_str("# Ghost extensions. NON-NORMATIVE: best-effort settings beyond the\n");
        out.push_str("# exclusive profile; check them against your router version.\n");
        push_params(&mut out, &GHOST_EXTENSIONS);
    }
    out
}

/// Non-comment, non-blank lines of a config text.
pub fn parameter_lines(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty())
        .collect()
}
