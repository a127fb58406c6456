//! Shade classification.
//!
//! A router with no record in the queried view is shade 8, before any
//! capability is looked at. Otherwise the shade follows from its observable
//! properties. The criteria rows overlap, so they are applied as a ladder:
//!
//! | direct address | condition                        | shade |
//! |----------------|----------------------------------|-------|
//! | yes            | floodfill `f`                    | 1     |
//! | yes            | firewalled `U`                   | 4     |
//! | yes            | bandwidth N, O, P or X           | 2     |
//! | yes            | otherwise                        | 3     |
//! | no             | introducer declared              | 5     |
//! | no             | hidden `H`                       | 6     |
//! | no             | otherwise                        | 7     |

use serde::Serialize;
use thiserror::Error;

use crate::caps::{CapabilityProfile, ObservedProfile};
use crate::hash::RouterHash;
use crate::record::RouterInfo;
use crate::shade::Shade;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("capability map needs a record; the profile is absent")]
    AbsentProfile,
}

fn ladder(p: &ObservedProfile) -> Shade {
    let caps = &p.caps;
    if p.direct_address {
        if caps.floodfill {
            Shade::Beacon
        } else if caps.firewalled {
            Shade::Cloaked
        } else if caps.bandwidth.is_some_and(|b| b.is_high_capacity()) {
            Shade::Relay
        } else {
            Shade::Passive
        }
    } else if p.introducers {
        Shade::Veiled
    } else if caps.hidden {
        Shade::Declared
    } else {
        Shade::Phantom
    }
}

/// Capability map onto shades 1..=7. Only defined for routers with a record.
pub fn f_cap(profile: &CapabilityProfile) -> Result<Shade, ClassifyError> {
    match profile {
        CapabilityProfile::Observed(p) => Ok(ladder(p)),
        CapabilityProfile::Absent => Err(ClassifyError::AbsentProfile),
    }
}

/// Shade 8 when no record exists, the capability map otherwise.
pub fn classify(profile: &CapabilityProfile) -> Shade {
    f_cap(profile).unwrap_or(Shade::Exclusive)
}

/// [`classify`] plus notes on contradictory or ambiguous flag combinations.
pub fn classify_with_diagnostics(profile: &CapabilityProfile) -> (Shade, Vec<String>) {
    let shade = classify(profile);
    let mut notes = Vec::new();
    if let CapabilityProfile::Observed(p) = profile {
        if p.caps.hidden && p.direct_address {
            notes.push("hidden flag set but a direct address is published; address wins".into());
        }
        if p.caps.hidden && !p.direct_address && p.introducers {
            notes.push("hidden flag and introducers both set; introducers take precedence".into());
        }
        if p.caps.floodfill && !p.direct_address {
            notes.push("floodfill flag without a direct address".into());
        }
        notes.extend(p.caps.diagnostics.iter().cloned());
    }
    (shade, notes)
}

/// Where a piece of evidence came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EvidenceSource {
    LocalNetDb,
    ConsoleCache,
    FloodfillProbe,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Evidence {
    pub source: EvidenceSource,
    pub hit: bool,
    /// Cumulative floodfill probes issued when this check ran.
    pub probes_used: usize,
    /// Failed probes in this stage, or 1 for a failed lookup.
    pub failures: usize,
}

/// Final verdict of a classification run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Classified(Shade),
    /// Probes could not be carried out, so absence was not established.
    Inconclusive,
}

/// Result of a multi-source classification of one router.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadeReport {
    pub subject: RouterHash,
    pub verdict: Verdict,
    /// In source order: local, console, then one entry per probe batch.
    pub evidence: Vec<Evidence>,
    pub profile: CapabilityProfile,
    pub caps: Option<String>,
    /// The record that decided the shade, if one was found.
    pub record: Option<RouterInfo>,
    pub probes_used: usize,
    pub failed_probes: usize,
    /// Probes the plan called for: `min(max_probes, |F|)`.
    pub planned_probes: usize,
    pub diagnostics: Vec<String>,
}

impl ShadeReport {
    pub fn shade(&self) -> Option<Shade> {
        match self.verdict {
            Verdict::Classified(s) => Some(s),
            Verdict::Inconclusive => None,
        }
    }

    pub fn is_inconclusive(&self) -> bool {
        self.verdict == Verdict::Inconclusive
    }

    pub fn any_hit(&self) -> bool {
        self.evidence.iter().any(|e| e.hit)
    }

    pub fn alpha(&self) -> Option<bool> {
        self.profile.observed().map(|p| p.direct_address)
    }

    pub fn iota(&self) -> Option<bool> {
        self.profile.observed().map(|p| p.introducers)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "subject": self.subject,
            "shade": self.shade(),
            "inconclusive": self.is_inconclusive(),
            "evidence": self.evidence,
            "caps": self.caps,
            "alpha": self.alpha(),
            "iota": self.iota(),
            "probes_used": self.probes_used,
            "failed_probes": self.failed_probes,
            "diagnostics": self.diagnostics,
        })
    }
}

impl Serialize for ShadeReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}
