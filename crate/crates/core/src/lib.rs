//! Visibility attribution for I2P routers.
//!
//! Reads local NetDB snapshots, places routers on the eight-level shade
//! scale, computes daily routing keys and b32 addresses, associates
//! eepsites with the floodfills that store them, and runs the multi-source
//! lookup protocol against either a real snapshot or a simulated overlay.
//!
//! ```
//! use shadescope::{classify, CapabilityProfile, Shade};
//!
//! assert_eq!(classify(&CapabilityProfile::Absent), Shade::Exclusive);
//! ```

pub mod caps;
pub mod classify;
pub mod codec;
pub mod destination;
pub mod dht;
pub mod hash;
pub mod leaseset;
pub mod lenient;
pub mod profile;
pub mod protocol;
pub mod record;
pub mod shade;
pub mod sim;
pub mod snapshot;

pub use caps::{parse_caps, BandwidthClass, CapabilityProfile, CapsFlags, ObservedProfile};
pub use classify::{
    classify, classify_with_diagnostics, f_cap, ClassifyError, Evidence, EvidenceSource,
    ShadeReport, Verdict,
};
pub use codec::{decode_router_info, encode_router_info, DecodeError, EncodeError};
pub use destination::{Destination, DestinationError};
pub use dht::{
    association_rows, b32_address, decode_b32, derive_b32, derive_b32_from_bytes, format_date,
    k_nearest, parse_date, responsible_floodfill, routing_key, xor_association, xor_distance,
    AssociationRow, DhtError, RoutingKey, XorAssociation, XorDistance,
};
pub use hash::{DestinationHash, HashParseError, RouterHash};
pub use leaseset::{load_leasesets, parse_leasesets, LeaseSetFile};
pub use lenient::{lenient_extract, LenientRecord};
pub use profile::{render_config, ConfigProfile};
pub use protocol::{
    classify_remote, gateway_scan, shade8_certificate, GatewayMatch, GatewayTarget, MatchKind,
    NetDbSource, ProbePlan, ProbeRecord, SourceError,
};
pub use record::{Lease, LeaseSet, RouterInfo, TransportAddress};
pub use shade::Shade;
pub use snapshot::{load_netdb_dir, NetDbSnapshot, SnapshotError};
