//! Multi-source shade classification and LeaseSet gateway scans.
//!
//! [`classify_remote`] checks three sources in a fixed order: the local
//! NetDB, the router console's cache, then the console again after each
//! batch of floodfill probes has widened its view. The first hit decides the
//! shade from the retrieved record. If every check misses, the router has no
//! record anywhere that was asked and is shade 8.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::caps::CapabilityProfile;
use crate::classify::{classify_with_diagnostics, Evidence, EvidenceSource, ShadeReport, Verdict};
use crate::hash::{RouterHash, B64_SYMBOLS};
use crate::record::{LeaseSet, RouterInfo};
use crate::shade::Shade;

/// Default router console address.
pub const CONSOLE_HOST: &str = "127.0.0.1";
pub const CONSOLE_PORT: u16 = 7657;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SourceError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("source does not support {0}")]
    Unsupported(&'static str),
}

/// Where records come from during a classification run.
///
/// Lookups are expected to be stable within a run except where a probe has
/// since widened the console view.
pub trait NetDbSource {
    fn lookup_local(&self, hash: &RouterHash) -> Option<RouterInfo>;

    fn lookup_console(&mut self, hash: &RouterHash) -> Result<Option<RouterInfo>, SourceError>;

    /// Ask the console to query `floodfill`, merging what it returns.
    fn probe_floodfill(&mut self, floodfill: &RouterHash) -> Result<(), SourceError>;
}

/// Request format for a live console source: `GET /netdb?r=<hash>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsoleEndpoint {
    pub host: String,
    pub port: u16,
}

impl Default for ConsoleEndpoint {
    fn default() -> Self {
        Self {
            host: CONSOLE_HOST.to_string(),
            port: CONSOLE_PORT,
        }
    }
}

impl ConsoleEndpoint {
    pub fn query_path(hash: &RouterHash) -> String {
        format!("/netdb?r={}", hash.to_base64())
    }

    pub fn url(&self, hash: &RouterHash) -> String {
        format!(
            "http://{}:{}{}",
            self.host,
            self.port,
            Self::query_path(hash)
        )
    }

    pub fn http_request(&self, hash: &RouterHash) -> String {
        format!(
            "GET {} HTTP/1.1\r\nHost: {}:{}\r\nConnection: close\r\n\r\n",
            Self::query_path(hash),
            self.host,
            self.port
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("batch size must be positive")]
    ZeroBatch,
}

/// Ordered floodfill list, batch size and probe budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbePlan {
    floodfills: Vec<RouterHash>,
    batch_size: usize,
    max_probes: usize,
}

impl ProbePlan {
    /// A plan probing every floodfill in the given order.
    pub fn new(floodfills: Vec<RouterHash>, batch_size: usize) -> Result<Self, PlanError> {
        if batch_size == 0 {
            return Err(PlanError::ZeroBatch);
        }
        Ok(Self {
            max_probes: floodfills.len(),
            floodfills,
            batch_size,
        })
    }

    pub fn with_max_probes(mut self, max_probes: usize) -> Self {
        self.max_probes = max_probes;
        self
    }

    /// Reorder the floodfills with a seeded shuffle.
    pub fn shuffled(mut self, seed: u64) -> Self {
        self.floodfills
            .shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        self
    }

    pub fn floodfills(&self) -> &[RouterHash] {
        &self.floodfills
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn max_probes(&self) -> usize {
        self.max_probes
    }

    /// `min(max_probes, |F|)`.
    pub fn planned_probes(&self) -> usize {
        self.max_probes.min(self.floodfills.len())
    }

    /// Consecutive batches over the first `planned_probes()` floodfills.
    pub fn batches(&self) -> std::slice::Chunks<'_, RouterHash> {
        self.floodfills[..self.planned_probes()].chunks(self.batch_size)
    }

    /// Cumulative probe counts at each batch boundary.
    pub fn checkpoints(&self) -> Vec<usize> {
        let mut total = 0;
        self.batches()
            .map(|b| {
                total += b.len();
                total
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeOutcome {
    Ok,
    Failed,
}

impl fmt::Display for ProbeOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ok => "ok",
            Self::Failed => "failed",
        })
    }
}

/// One row of the probe log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeRecord {
    pub probe_index: usize,
    pub floodfill: RouterHash,
    pub result: ProbeOutcome,
}

/// Probe log as CSV: `probe_index,floodfill_b64,result`.
pub fn probe_log_csv(log: &[ProbeRecord]) -> String {
    let mut out = String::from("probe_index,floodfill_b64,result\n");
    for p in log {
        out.push_str(&format!("{},{},{}\n", p.probe_index, p.floodfill, p.result));
    }
    out
}

fn found(mut report: ShadeReport, record: RouterInfo) -> (ShadeReport, Vec<ProbeRecord>) {
    let profile = record.profile();
    let (shade, notes) = classify_with_diagnostics(&profile);
    report.verdict = Verdict::Classified(shade);
    report.caps = Some(record.caps().to_string());
    report.profile = profile;
    report.record = Some(record);
    report.diagnostics.extend(notes);
    (report, Vec::new())
}

/// Classify `hash` against `source` following the probe plan.
///
/// A failed probe is logged and skipped. If no record turns up and none of
/// the network checks could be carried out (every probe failed, or every
/// console lookup failed) the verdict is [`Verdict::Inconclusive`], never
/// shade 8.
pub fn classify_remote<S: NetDbSource + ?Sized>(
    hash: &RouterHash,
    source: &mut S,
    plan: &ProbePlan,
) -> (ShadeReport, Vec<ProbeRecord>) {
    let mut report = ShadeReport {
        subject: *hash,
        verdict: Verdict::Classified(Shade::Exclusive),
        evidence: Vec::new(),
        profile: CapabilityProfile::Absent,
        caps: None,
        record: None,
        probes_used: 0,
        failed_probes: 0,
        planned_probes: plan.planned_probes(),
        diagnostics: Vec::new(),
    };
    let mut log = Vec::with_capacity(plan.planned_probes());

    let local = source.lookup_local(hash);
    report.evidence.push(Evidence {
        source: EvidenceSource::LocalNetDb,
        hit: local.is_some(),
        probes_used: 0,
        failures: 0,
    });
    if let Some(record) = local {
        return found(report, record);
    }

    let mut console_checks = 1;
    let mut console_failures = 0;
    let first = source.lookup_console(hash);
    report.evidence.push(Evidence {
        source: EvidenceSource::ConsoleCache,
        hit: matches!(first, Ok(Some(_))),
        probes_used: 0,
        failures: usize::from(first.is_err()),
    });
    match first {
        Ok(Some(record)) => return found(report, record),
        Ok(None) => {}
        Err(e) => {
            console_failures += 1;
            report
                .diagnostics
                .push(format!("console lookup failed: {e}"));
        }
    }

    for batch in plan.batches() {
        let mut stage_failures = 0;
        for floodfill in batch {
            let result = match source.probe_floodfill(floodfill) {
                Ok(()) => ProbeOutcome::Ok,
                Err(_) => {
                    stage_failures += 1;
                    ProbeOutcome::Failed
                }
            };
            log.push(ProbeRecord {
                probe_index: report.probes_used,
                floodfill: *floodfill,
                result,
            });
            report.probes_used += 1;
        }
        report.failed_probes += stage_failures;

        console_checks += 1;
        let recheck = source.lookup_console(hash);
        if recheck.is_err() {
            console_failures += 1;
            stage_failures += 1;
        }
        let hit = matches!(recheck, Ok(Some(_)));
        report.evidence.push(Evidence {
            source: EvidenceSource::FloodfillProbe,
            hit,
            probes_used: report.probes_used,
            failures: stage_failures,
        });
        if let Ok(Some(record)) = recheck {
            let (report, _) = found(report, record);
            return (report, log);
        }
    }

    let probes_all_failed = report.probes_used > 0 && report.failed_probes == report.probes_used;
    if probes_all_failed || console_failures == console_checks {
        report.verdict = Verdict::Inconclusive;
    }
    if report.failed_probes > 0 {
        report.diagnostics.push(format!(
            "{} of {} probes failed",
            report.failed_probes, report.probes_used
        ));
    }
    (report, log)
}

/// Whether the report proves absence: local miss, console miss, every
/// planned floodfill probed and missed, and nothing failed along the way.
pub fn shade8_certificate(report: &ShadeReport) -> bool {
    let has = |src| report.evidence.iter().any(|e| e.source == src && !e.hit);
    report.verdict == Verdict::Classified(Shade::Exclusive)
        && !report.profile.is_present()
        && has(EvidenceSource::LocalNetDb)
        && has(EvidenceSource::ConsoleCache)
        && report.evidence.iter().all(|e| !e.hit && e.failures == 0)
        && report.failed_probes == 0
        && report.probes_used == report.planned_probes
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GatewayTargetError {
    #[error("prefix must cover at least 4 bytes ({MIN_PREFIX_CHARS} base64 characters), got {0} characters")]
    TooShort(usize),
    #[error("prefix contains characters outside the base64 alphabet")]
    Alphabet,
}

/// Base64 characters needed to cover 4 bytes.
pub const MIN_PREFIX_CHARS: usize = 6;

/// What a gateway scan looks for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GatewayTarget {
    Exact(RouterHash),
    /// Prefix of the base64 form of the hash.
    Prefix(String),
}

impl GatewayTarget {
    /// A full hash, or a base64 prefix of at least [`MIN_PREFIX_CHARS`].
    pub fn parse(text: &str) -> Result<Self, GatewayTargetError> {
        let text = text.trim();
        if let Ok(h) = RouterHash::from_base64(text) {
            return Ok(Self::Exact(h));
        }
        let prefix = text.trim_end_matches('=');
        if !prefix.chars().all(|c| B64_SYMBOLS.contains(c)) {
            return Err(GatewayTargetError::Alphabet);
        }
        if prefix.len() < MIN_PREFIX_CHARS {
            return Err(GatewayTargetError::TooShort(prefix.len()));
        }
        Ok(Self::Prefix(prefix.to_string()))
    }

    /// Prefix given as raw bytes (at least 4).
    pub fn from_prefix_bytes(bytes: &[u8]) -> Result<Self, GatewayTargetError> {
        if bytes.len() < 4 {
            return Err(GatewayTargetError::TooShort(bytes.len() * 8 / 6));
        }
        if let Ok(h) = RouterHash::from_slice(bytes) {
            return Ok(Self::Exact(h));
        }
        // Only characters fully determined by the given bytes.
        let mut text = crate::hash::base64_encode(bytes);
        text.truncate(bytes.len() * 8 / 6);
        Ok(Self::Prefix(text))
    }

    fn matches(&self, gateway: &RouterHash) -> Option<MatchKind> {
        match self {
            Self::Exact(h) => (gateway == h).then_some(MatchKind::ExactHash),
            Self::Prefix(p) => gateway
                .to_base64()
                .starts_with(p.as_str())
                .then_some(MatchKind::Prefix),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MatchKind {
    ExactHash,
    Prefix,
}

/// A lease whose gateway is the target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GatewayMatch {
    pub leaseset_index: usize,
    pub destination_hash: RouterHash,
    pub b32: Option<String>,
    pub lease_index: usize,
    pub gateway: RouterHash,
    pub tunnel_id: u32,
    pub match_kind: MatchKind,
}

impl GatewayMatch {
    /// A gateway only forwards into the tunnel; the host sits further in.
    pub const INTERPRETATION: &'static str = "routing participation, not hosting";
}

/// Every lease across `leasesets` whose gateway matches `target`.
pub fn gateway_scan(target: &GatewayTarget, leasesets: &[LeaseSet]) -> Vec<GatewayMatch> {
    let mut out = Vec::new();
    for (i, ls) in leasesets.iter().enumerate() {
        for (j, lease) in ls.leases.iter().enumerate() {
            if let Some(kind) = target.matches(&lease.gateway) {
                out.push(GatewayMatch {
                    leaseset_index: i,
                    destination_hash: ls.destination_hash,
                    b32: ls.b32.clone(),
                    lease_index: j,
                    gateway: lease.gateway,
                    tunnel_id: lease.tunnel_id,
                    match_kind: kind,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::destination::Destination;
    use crate::record::{Lease, TransportAddress};
    use std::collections::{HashMap, HashSet};

    fn record(seed: u8, caps: &str, direct: bool) -> RouterInfo {
        let addresses = if direct {
            vec![TransportAddress {
                style: "NTCP2".into(),
                options: [("host", "203.0.113.9"), ("port", "1234")]
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect(),
                ..Default::default()
            }]
        } else {
            vec![]
        };
        RouterInfo::new(
            Destination::from_parts(&[seed; 384], 0, &[]),
            0,
            addresses,
            [("caps".to_string(), caps.to_string())]
                .into_iter()
                .collect(),
            vec![],
        )
    }

    /// Console view grows with whatever each probed floodfill knows.
    #[derive(Default)]
    struct Fake {
        local: HashMap<RouterHash, RouterInfo>,
        knowledge: HashMap<RouterHash, Vec<RouterInfo>>,
        console: HashMap<RouterHash, RouterInfo>,
        failing: HashSet<RouterHash>,
        console_down: bool,
        console_calls: usize,
        probes: Vec<RouterHash>,
    }

    impl NetDbSource for Fake {
        fn lookup_local(&self, hash: &RouterHash) -> Option<RouterInfo> {
            self.local.get(hash).cloned()
        }
        fn lookup_console(&mut self, hash: &RouterHash) -> Result<Option<RouterInfo>, SourceError> {
            self.console_calls += 1;
            if self.console_down {
                return Err(SourceError::Transport("down".into()));
            }
            Ok(self.console.get(hash).cloned())
        }
        fn probe_floodfill(&mut self, f: &RouterHash) -> Result<(), SourceError> {
            self.probes.push(*f);
            if self.failing.contains(f) {
                return Err(SourceError::Transport("timeout".into()));
            }
            for r in self.knowledge.get(f).into_iter().flatten() {
                self.console.insert(r.hash, r.clone());
            }
            Ok(())
        }
    }

    fn floodfills(n: usize) -> Vec<RouterHash> {
        (0..n)
            .map(|i| RouterHash::digest(&(i as u64).to_be_bytes()))
            .collect()
    }

    #[test]
    fn local_hit_uses_no_probes() {
        let r = record(1, "XfR", true);
        let mut src = Fake::default();
        src.local.insert(r.hash, r.clone());
        let plan = ProbePlan::new(floodfills(20), 5).unwrap();
        let (report, log) = classify_remote(&r.hash, &mut src, &plan);
        assert_eq!(report.shade(), Some(Shade::Beacon));
        assert_eq!(report.probes_used, 0);
        assert!(log.is_empty());
        assert_eq!(src.console_calls, 0);
        assert_eq!(report.evidence.len(), 1);
    }

    #[test]
    fn absent_everywhere_is_shade_8_with_full_budget() {
        let ffs = floodfills(1556);
        let plan = ProbePlan::new(ffs, 5).unwrap().with_max_probes(500);
        let mut src = Fake::default();
        let target = RouterHash([0xEE; 32]);
        let (report, log) = classify_remote(&target, &mut src, &plan);
        assert_eq!(report.shade(), Some(Shade::Exclusive));
        assert_eq!(report.probes_used, 500);
        assert_eq!(log.len(), 500);
        assert_eq!(report.evidence.len(), 2 + 100);
        assert!(report.evidence.iter().all(|e| !e.hit));
        assert!(shade8_certificate(&report));
    }

    #[test]
    fn planted_record_in_third_batch() {
        let ffs = floodfills(40);
        let r = record(7, "XR", true);
        let mut src = Fake::default();
        src.knowledge.insert(ffs[12], vec![r.clone()]);
        let plan = ProbePlan::new(ffs, 5).unwrap();
        let (report, _) = classify_remote(&r.hash, &mut src, &plan);
        assert_eq!(report.shade(), Some(Shade::Relay));
        assert_eq!(report.probes_used, 15);
        assert_eq!(src.probes.len(), 15, "no probes after the hit");
        assert!(report.evidence.last().unwrap().hit);
        assert!(!shade8_certificate(&report));
    }

    #[test]
    fn one_failed_probe_voids_the_certificate() {
        let ffs = floodfills(10);
        let mut src = Fake::default();
        src.failing.insert(ffs[3]);
        let plan = ProbePlan::new(ffs, 5).unwrap();
        let (report, log) = classify_remote(&RouterHash([1; 32]), &mut src, &plan);
        assert_eq!(report.shade(), Some(Shade::Exclusive));
        assert_eq!(report.failed_probes, 1);
        assert_eq!(log[3].result, ProbeOutcome::Failed);
        assert!(!shade8_certificate(&report));
    }

    #[test]
    fn all_probes_failing_is_inconclusive() {
        let ffs = floodfills(10);
        let mut src = Fake::default();
        src.failing.extend(ffs.iter().copied());
        let plan = ProbePlan::new(ffs, 3).unwrap();
        let (report, _) = classify_remote(&RouterHash([1; 32]), &mut src, &plan);
        assert!(report.is_inconclusive());
        assert_eq!(report.shade(), None);
        assert!(!shade8_certificate(&report));
    }

    #[test]
    fn console_down_is_inconclusive() {
        let mut src = Fake {
            console_down: true,
            ..Default::default()
        };
        let plan = ProbePlan::new(floodfills(4), 2).unwrap();
        let (report, _) = classify_remote(&RouterHash([1; 32]), &mut src, &plan);
        assert!(report.is_inconclusive());
    }

    #[test]
    fn partial_last_batch_and_checkpoints() {
        let plan = ProbePlan::new(floodfills(12), 5).unwrap();
        assert_eq!(plan.checkpoints(), vec![5, 10, 12]);
        let plan = plan.with_max_probes(7);
        assert_eq!(plan.checkpoints(), vec![5, 7]);
        assert_eq!(ProbePlan::new(vec![], 5).unwrap().planned_probes(), 0);
        assert_eq!(ProbePlan::new(vec![], 0), Err(PlanError::ZeroBatch));
    }

    #[test]
    fn shuffle_is_seeded() {
        let a = ProbePlan::new(floodfills(50), 5).unwrap().shuffled(9);
        let b = ProbePlan::new(floodfills(50), 5).unwrap().shuffled(9);
        let c = ProbePlan::new(floodfills(50), 5).unwrap().shuffled(10);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn console_request_format() {
        let h = RouterHash([0; 32]);
        let ep = ConsoleEndpoint::default();
        assert_eq!(ep.url(&h), format!("http://127.0.0.1:7657/netdb?r={h}"));
        assert!(ep
            .http_request(&h)
            .starts_with(&format!("GET /netdb?r={h} HTTP/1.1\r\n")));
    }

    #[test]
    fn probe_log_csv_header() {
        let log = vec![ProbeRecord {
            probe_index: 0,
            floodfill: RouterHash([0; 32]),
            result: ProbeOutcome::Failed,
        }];
        let csv = probe_log_csv(&log);
        assert_eq!(csv.lines().next(), Some("probe_index,floodfill_b64,result"));
        assert!(csv.lines().nth(1).unwrap().ends_with(",failed"));
    }

    fn ls(dest: u8, gateways: &[RouterHash]) -> LeaseSet {
        LeaseSet {
            destination_hash: RouterHash([dest; 32]),
            b32: None,
            leases: gateways
                .iter()
                .enumerate()
                .map(|(i, g)| Lease {
                    gateway: *g,
                    tunnel_id: i as u32,
                    expiry_ms: 0,
                })
                .collect(),
        }
    }

    #[test]
    fn gateway_scan_cases() {
        let target = RouterHash([0x11; 32]);
        let t = GatewayTarget::Exact(target);
        assert!(gateway_scan(&t, &[]).is_empty());
        let hits = gateway_scan(&t, &[ls(1, &[RouterHash([2; 32])]), ls(2, &[target])]);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].leaseset_index, 1);
        assert_eq!(hits[0].match_kind, MatchKind::ExactHash);
        let none: Vec<_> = (0..69)
            .map(|i| ls(i, &[RouterHash([i ^ 0x80; 32])]))
            .collect();
        assert!(gateway_scan(&t, &none).is_empty());
    }

    #[test]
    fn gateway_prefix_mode() {
        let target = RouterHash::digest(b"gw");
        let prefix = &target.to_base64()[..8];
        let t = GatewayTarget::parse(prefix).unwrap();
        let hits = gateway_scan(&t, &[ls(1, &[RouterHash([3; 32]), target])]);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].lease_index, 1);
        assert_eq!(hits[0].match_kind, MatchKind::Prefix);
        assert_eq!(
            GatewayTarget::parse("abc"),
            Err(GatewayTargetError::TooShort(3))
        );
        assert_eq!(
            GatewayTarget::parse("abc/def"),
            Err(GatewayTargetError::Alphabet)
        );
        assert!(matches!(
            GatewayTarget::parse(&target.to_base64()),
            Ok(GatewayTarget::Exact(_))
        ));
        let from_bytes = GatewayTarget::from_prefix_bytes(&target.0[..4]).unwrap();
        assert_eq!(gateway_scan(&from_bytes, &[ls(1, &[target])]).len(), 1);
        assert!(GatewayTarget::from_prefix_bytes(&target.0[..3]).is_err());
    }
}
