//! Directory records: RouterInfo and LeaseSet.

use std::collections::BTreeMap;

use crate::caps::{parse_caps, CapabilityProfile, ObservedProfile};
use crate::destination::Destination;
use crate::hash::{DestinationHash, RouterHash};

pub const OPT_CAPS: &str = "caps";
pub const OPT_VERSION: &str = "router.version";
pub const OPT_KNOWN_ROUTERS: &str = "netdb.knownRouters";
pub const OPT_KNOWN_LEASESETS: &str = "netdb.knownLeaseSets";

/// One published transport address.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransportAddress {
    pub cost: u8,
    pub expiration_ms: u64,
    /// Transport style such as `NTCP2` or `SSU2`.
    pub style: String,
    pub options: BTreeMap<String, String>,
}

impl TransportAddress {
    pub fn host(&self) -> Option<&str> {
        self.options
            .get("host")
            .map(String::as_str)
            .filter(|h| !h.is_empty())
    }

    pub fn port(&self) -> Option<u16> {
        self.options.get("port").and_then(|p| p.parse().ok())
    }

    /// Explicit host and port, i.e. directly reachable.
    pub fn is_direct(&self) -> bool {
        self.host().is_some() && self.port().is_some()
    }

    /// Declares an introducer via an `ih<n>` or `itag<n>` key.
    pub fn has_introducer(&self) -> bool {
        self.options.keys().any(|k| is_introducer_key(k))
    }
}

fn is_introducer_key(key: &str) -> bool {
    let indexed = |prefix: &str| {
        key.strip_prefix(prefix)
            .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
    };
    indexed("ih") || indexed("itag")
}

/// A parsed NetDB directory record. The signature is kept but not verified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouterInfo {
    pub hash: RouterHash,
    pub identity: Destination,
    pub published_ms: u64,
    pub addresses: Vec<TransportAddress>,
    pub options: BTreeMap<String, String>,
    pub signature: Vec<u8>,
}

impl RouterInfo {
    /// Assemble a record, deriving its hash from the identity.
    pub fn new(
        identity: Destination,
        published_ms: u64,
        addresses: Vec<TransportAddress>,
        options: BTreeMap<String, String>,
        signature: Vec<u8>,
    ) -> Self {
        Self {
            hash: identity.hash(),
            identity,
            published_ms,
            addresses,
            options,
            signature,
        }
    }

    pub fn caps(&self) -> &str {
        self.options.get(OPT_CAPS).map(String::as_str).unwrap_or("")
    }

    pub fn version(&self) -> Option<&str> {
        self.options.get(OPT_VERSION).map(String::as_str)
    }

    pub fn known_routers(&self) -> Option<u64> {
        self.options
            .get(OPT_KNOWN_ROUTERS)
            .and_then(|v| v.parse().ok())
    }

    pub fn known_leasesets(&self) -> Option<u64> {
        self.options
            .get(OPT_KNOWN_LEASESETS)
            .and_then(|v| v.parse().ok())
    }

    pub fn has_direct_address(&self) -> bool {
        self.addresses.iter().any(TransportAddress::is_direct)
    }

    pub fn has_introducers(&self) -> bool {
        self.addresses.iter().any(TransportAddress::has_introducer)
    }

    pub fn is_floodfill(&self) -> bool {
        self.caps().contains('f')
    }

    pub fn observed_profile(&self) -> ObservedProfile {
        ObservedProfile {
            caps: parse_caps(self.caps()),
            direct_address: self.has_direct_address(),
            introducers: self.has_introducers(),
        }
    }

    pub fn profile(&self) -> CapabilityProfile {
        CapabilityProfile::Observed(self.observed_profile())
    }
}

/// One inbound tunnel entry point of a LeaseSet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lease {
    pub gateway: RouterHash,
    pub tunnel_id: u32,
    pub expiry_ms: u64,
}

/// A service descriptor. It names tunnel gateways, never the hosting router.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeaseSet {
    pub destination_hash: DestinationHash,
    pub b32: Option<String>,
    pub leases: Vec<Lease>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn addr(pairs: &[(&str, &str)]) -> TransportAddress {
        TransportAddress {
            style: "SSU2".into(),
            options: pairs
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            ..Default::default()
        }
    }

    #[test]
    fn direct_needs_host_and_port() {
        assert!(addr(&[("host", "10.0.0.1"), ("port", "1234")]).is_direct());
        assert!(!addr(&[("host", "10.0.0.1")]).is_direct());
        assert!(!addr(&[("port", "1234")]).is_direct());
        assert!(!addr(&[("host", ""), ("port", "1234")]).is_direct());
        assert!(!addr(&[("host", "::1"), ("port", "notaport")]).is_direct());
    }

    #[test]
    fn introducer_keys() {
        assert!(addr(&[("ih0", "x")]).has_introducer());
        assert!(addr(&[("itag12", "1")]).has_introducer());
        assert!(!addr(&[("ih", "x")]).has_introducer());
        assert!(!addr(&[("ihx", "x")]).has_introducer());
        assert!(!addr(&[("iexp0", "1")]).has_introducer());
    }

    #[test]
    fn introducer_only_address_is_not_direct() {
        let a = addr(&[("ih0", "abc"), ("itag0", "42"), ("iexp0", "1700000000")]);
        assert!(!a.is_direct());
        assert!(a.has_introducer());
    }
}
