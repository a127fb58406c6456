//! The `caps` option of a RouterInfo and the classifier inputs derived from it.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Every flag letter a deployed router may publish in `caps`.
pub const CAPS_ALPHABET: &str = "fHURKLMNOPXDEG";

/// Bandwidth tier letter, ordered from slowest to fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BandwidthClass {
    K,
    L,
    M,
    N,
    O,
    P,
    X,
}

impl BandwidthClass {
    pub const ALL: [BandwidthClass; 7] = [
        BandwidthClass::K,
        BandwidthClass::L,
        BandwidthClass::M,
        BandwidthClass::N,
        BandwidthClass::O,
        BandwidthClass::P,
        BandwidthClass::X,
    ];

    pub fn from_letter(c: char) -> Option<Self> {
        Some(match c {
            'K' => Self::K,
            'L' => Self::L,
            'M' => Self::M,
            'N' => Self::N,
            'O' => Self::O,
            'P' => Self::P,
            'X' => Self::X,
            _ => return None,
        })
    }

    pub fn letter(self) -> char {
        match self {
            Self::K => 'K',
            Self::L => 'L',
            Self::M => 'M',
            Self::N => 'N',
            Self::O => 'O',
            Self::P => 'P',
            Self::X => 'X',
        }
    }

    /// N, O, P and X count as high capacity; K, L and M as low.
    pub fn is_high_capacity(self) -> bool {
        self >= Self::N
    }
}

impl fmt::Display for BandwidthClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Flags read from a `caps` string.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CapsFlags {
    pub floodfill: bool,
    pub hidden: bool,
    pub firewalled: bool,
    pub bandwidth: Option<BandwidthClass>,
    /// Characters outside [`CAPS_ALPHABET`], and a note when several
    /// bandwidth letters were present.
    pub diagnostics: Vec<String>,
}

/// Parse a `caps` option value. Never fails; unknown letters are noted.
pub fn parse_caps(caps: &str) -> CapsFlags {
    let mut flags = CapsFlags::default();
    let mut bandwidths = Vec::new();
    for c in caps.chars() {
        match c {
            'f' => flags.floodfill = true,
            'H' => flags.hidden = true,
            'U' => flags.firewalled = true,
            _ => {
                if let Some(bw) = BandwidthClass::from_letter(c) {
                    bandwidths.push(bw);
                } else if !CAPS_ALPHABET.contains(c) {
                    flags.diagnostics.push(format!("unknown caps flag {c:?}"));
                }
            }
        }
    }
    // Fast routers publish a legacy letter alongside their real tier
    // (e.g. "PfOR"); the highest letter is the advertised class.
    flags.bandwidth = bandwidths.iter().copied().max();
    if bandwidths.len() > 1 {
        flags.diagnostics.push(format!(
            "multiple bandwidth letters {:?}, using {}",
            bandwidths.iter().map(|b| b.letter()).collect::<String>(),
            flags.bandwidth.unwrap()
        ));
    }
    flags
}

/// Observable properties of a router that has a record in the queried view.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ObservedProfile {
    pub caps: CapsFlags,
    /// At least one address publishes an explicit host and port.
    pub direct_address: bool,
    /// At least one address declares an introducer.
    pub introducers: bool,
}

/// Classifier input: either a record's observable properties, or the fact
/// that no record exists in the queried view.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CapabilityProfile {
    Absent,
    Observed(ObservedProfile),
}

impl CapabilityProfile {
    /// Whether a record exists in the queried view.
    pub fn is_present(&self) -> bool {
        matches!(self, Self::Observed(_))
    }

    pub fn observed(&self) -> Option<&ObservedProfile> {
        match self {
            Self::Observed(p) => Some(p),
            Self::Absent => None,
        }
    }
}

impl From<ObservedProfile> for CapabilityProfile {
    fn from(p: ObservedProfile) -> Self {
        Self::Observed(p)
    }
}
