//! Tests against the committed fixtures.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use shadescope::leaseset::load_leasesets;
use shadescope::{
    classify, classify_with_diagnostics, decode_router_info, derive_b32_from_bytes,
    encode_router_info, gateway_scan, load_netdb_dir, Destination, GatewayTarget, MatchKind,
    RouterHash, RouterInfo, Shade, TransportAddress,
};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

#[derive(Deserialize)]
struct Entry {
    name: String,
    caps: String,
    addresses: Vec<BTreeMap<String, String>>,
    shade: u8,
}

fn build(i: usize, e: &Entry) -> RouterInfo {
    let addresses = e
        .addresses
        .iter()
        .map(|a| {
            let mut options = a.clone();
            let style = options.remove("style").unwrap();
            TransportAddress {
                cost: 10,
                expiration_ms: 0,
                style,
                options,
            }
        })
        .collect();
    RouterInfo::new(
        Destination::from_parts(&[i as u8; 384], 0, &[]),
        1_735_689_600_000,
        addresses,
        [("caps".to_string(), e.caps.clone())].into_iter().collect(),
        vec![0; 40],
    )
}

#[test]
fn manifest_records_classify_after_wire_round_trip() {
    let entries: Vec<Entry> =
        serde_json::from_str(&fs::read_to_string(fixture("manifest.json")).unwrap()).unwrap();
    assert_eq!(entries.len(), 20);
    for (i, e) in entries.iter().enumerate() {
        let record = build(i, e);
        let decoded = decode_router_info(&encode_router_info(&record).unwrap()).unwrap();
        assert_eq!(decoded, record, "{}", e.name);
        assert_eq!(classify(&decoded.profile()).level(), e.shade, "{}", e.name);
    }
}

#[test]
fn manifest_edge_cases_carry_diagnostics() {
    let entries: Vec<Entry> =
        serde_json::from_str(&fs::read_to_string(fixture("manifest.json")).unwrap()).unwrap();
    let e = entries
        .iter()
        .position(|e| e.name.contains("floodfill flag without address"))
        .unwrap();
    let (shade, notes) = classify_with_diagnostics(&build(e, &entries[e]).profile());
    assert_eq!(shade, Shade::Phantom);
    assert!(!notes.is_empty());
}

#[test]
fn corpus_snapshot_shape() {
    let snap = load_netdb_dir(fixture("netdb")).unwrap();
    assert_eq!(snap.len(), 100);
    assert_eq!(snap.stats.floodfill_count, 48);
    assert_eq!(format!("{:.1}", snap.floodfill_percent()), "48.0");
    assert!(snap.failures.is_empty());
    assert!(snap.warnings.is_empty(), "{:?}", snap.warnings);
    let hist = snap.shade_histogram();
    assert_eq!(hist.values().sum::<usize>(), 100);
    assert_eq!(hist[&Shade::Beacon], 48);
    assert!(!hist.contains_key(&Shade::Exclusive));
}

#[test]
fn corpus_hashes_match_oracle_and_file_names() {
    for entry in walkdir::WalkDir::new(fixture("netdb"))
        .into_iter()
        .filter_map(Result::ok)
    {
        if !entry.file_type().is_file() {
            continue;
        }
        let bytes = fs::read(entry.path()).unwrap();
        let want = common::sha256(&bytes[..common::identity_len(&bytes)]);
        let name = entry.file_name().to_str().unwrap();
        assert_eq!(
            name,
            format!("routerInfo-{}.dat", common::base64_overlay(&want))
        );
        assert_eq!(decode_router_info(&bytes).unwrap().hash.0, want);
    }
}

#[test]
fn leaseset_fixture_gateway_scans() {
    let file = load_leasesets(fixture("leasesets.txt")).unwrap();
    assert_eq!(file.leasesets.len(), 69);
    assert!(file.warnings.is_empty(), "{:?}", file.warnings);

    let snap = load_netdb_dir(fixture("netdb")).unwrap();
    let gateways: Vec<RouterHash> = file
        .leasesets
        .iter()
        .flat_map(|l| l.leases.iter().map(|x| x.gateway))
        .collect();
    let relay = snap
        .records
        .values()
        .find(|r| classify(&r.profile()) == Shade::Relay && !gateways.contains(&r.hash))
        .unwrap();
    assert!(gateway_scan(&GatewayTarget::Exact(relay.hash), &file.leasesets).is_empty());

    let used = snap.records.keys().find(|h| gateways.contains(h)).unwrap();
    let hits = gateway_scan(&GatewayTarget::Exact(*used), &file.leasesets);
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].match_kind, MatchKind::ExactHash);
    let prefix = GatewayTarget::parse(&used.to_base64()[..8]).unwrap();
    assert_eq!(gateway_scan(&prefix, &file.leasesets)[0].gateway, *used);
}

#[test]
fn leaseset_b32_columns_match_destination_hashes() {
    let file = load_leasesets(fixture("leasesets.txt")).unwrap();
    for ls in &file.leasesets {
        let want = format!("{}.b32.i2p", common::base32_lower(&ls.destination_hash.0));
        assert_eq!(ls.b32.as_deref(), Some(want.as_str()));
    }
}

#[test]
fn destination_fixtures() {
    let raw = fs::read(fixture("dest391.bin")).unwrap();
    assert!(
        raw.len() > 391,
        "fixture carries trailing private key bytes"
    );
    let d = Destination::parse(&raw).unwrap();
    assert_eq!((d.size(), d.cert_type(), d.cert_len()), (391, 5, 4));
    assert_eq!(
        derive_b32_from_bytes(&raw).unwrap(),
        "ar5r72o2mwcq7r75k4misu3as52iaedtwjujvt46mv75vecq2dna.b32.i2p"
    );
    let text = fs::read_to_string(fixture("dest391.b64")).unwrap();
    let decoded = shadescope::hash::base64_decode(text.trim()).unwrap();
    assert_eq!(&decoded[..], &raw[..391]);

    let null = fs::read(fixture("dest387.bin")).unwrap();
    assert_eq!(Destination::parse(&null).unwrap().size(), 387);
    assert_eq!(
        derive_b32_from_bytes(&null).unwrap(),
        common::b32_of_destination(&null)
    );
}
