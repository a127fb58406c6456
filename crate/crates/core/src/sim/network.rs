//! Synthetic overlays with a known ground truth.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::caps::{BandwidthClass, CapabilityProfile};
use crate::destination::Destination;
use crate::dht::{daily_mod_key, format_date, k_nearest, parse_date, routing_key_with, DhtError};
use crate::hash::RouterHash;
use crate::record::{
    RouterInfo, TransportAddress, OPT_CAPS, OPT_KNOWN_LEASESETS, OPT_KNOWN_ROUTERS, OPT_VERSION,
};
use crate::shade::Shade;

pub const DEFAULT_K: usize = 4;
pub const DEFAULT_DATE: &str = "20250101";

const SUM_TOLERANCE: f64 = 1e-6;
// Guards floor() against quotas like 0.9999999999 that are 1 in exact arithmetic.
const QUOTA_EPSILON: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("infeasible network spec: {0}")]
    Infeasible(String),
    #[error("invalid network spec: {0}")]
    Invalid(String),
    #[error(transparent)]
    Date(#[from] DhtError),
    #[error("target {0} is not a router of the model")]
    UnknownTarget(RouterHash),
    #[error("probe plan names {0}, which is not a floodfill of the model")]
    UnknownFloodfill(RouterHash),
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("spec file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("curve file: {0}")]
    Csv(#[from] csv::Error),
}

/// Share of routers per shade, indexed by level 1..=8.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShadeDistribution(pub [f64; 8]);

impl ShadeDistribution {
    pub fn weight(&self, shade: Shade) -> f64 {
        self.0[shade.level() as usize - 1]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl TryFrom<BTreeMap<String, f64>> for ShadeDistribution {
    type Error = String;

    fn try_from(map: BTreeMap<String, f64>) -> Result<Self, String> {
        let mut w = [0.0; 8];
        for (key, value) in map {
            let level: usize = key
                .parse()
                .ok()
                .filter(|l| (1..=8).contains(l))
                .ok_or_else(|| format!("shade key {key:?} is not 1..8"))?;
            w[level - 1] = value;
        }
        Ok(Self(w))
    }
}

impl From<ShadeDistribution> for BTreeMap<String, f64> {
    fn from(d: ShadeDistribution) -> Self {
        (1..=8).map(|l| (l.to_string(), d.0[l - 1])).collect()
    }
}

impl Serialize for ShadeDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        BTreeMap::from(*self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ShadeDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<String, f64>::deserialize(d)?;
        Self::try_from(map).map_err(serde::de::Error::custom)
    }
}

fn default_k() -> usize {
    DEFAULT_K
}

fn default_date() -> String {
    DEFAULT_DATE.to_string()
}

/// Parameters of a generated network.
///
/// The floodfill count is `round(floodfill_fraction * n_routers)`; those
/// routers make up shade 1. The remaining routers are split over shades
/// 2..=8 in proportion to their weights. A shade-1 weight therefore only
/// signals that floodfills are wanted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub n_routers: usize,
    pub floodfill_fraction: f64,
    pub shade_distribution: ShadeDistribution,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_date")]
    pub date: String,
}

impl NetworkSpec {
    /// 3,242 routers of which 1,556 are floodfills and exactly one is
    /// exclusive (shade 8).
    pub fn reference_network(seed: u64) -> Self {
        let n = 3242.0;
        let rest = (3242.0 - 1556.0 - 1.0) / n;
        Self {
            n_routers: 3242,
            floodfill_fraction: 1556.0 / n,
            shade_distribution: ShadeDistribution([
                1556.0 / n,
                rest * 0.30,
                rest * 0.30,
                rest * 0.10,
                rest * 0.15,
                rest * 0.05,
                rest * 0.10,
                1.0 / n,
            ]),
            k: DEFAULT_K,
            seed,
            date: DEFAULT_DATE.to_string(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| SimError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn date(&self) -> Result<NaiveDate, SimError> {
        Ok(parse_date(&self.date)?)
    }

    pub fn floodfill_count(&self) -> usize {
        (self.floodfill_fraction * self.n_routers as f64).round() as usize
    }

    /// Router count per shade (index 0 is shade 1).
    pub fn shade_counts(&self) -> Result<[usize; 8], SimError> {
        let d = &self.shade_distribution;
        if !(0.0..=1.0).contains(&self.floodfill_fraction) {
            return Err(SimError::Invalid(format!(
                "floodfill_fraction {} is outside [0, 1]",
                self.floodfill_fraction
            )));
        }
        if d.0.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(SimError::Invalid("shade weights must lie in [0, 1]".into()));
        }
        if (d.sum() - 1.0).abs() > SUM_TOLERANCE {
            return Err(SimError::Invalid(format!(
                "shade distribution sums to {}, not 1",
                d.sum()
            )));
        }
        let ff = self.floodfill_count();
        if ff > 0 && d.0[0] == 0.0 {
            return Err(SimError::Infeasible(format!(
                "{ff} floodfills requested but shade 1 has no mass"
            )));
        }
        if ff == 0 && d.0[0] > 0.0 && self.n_routers > 0 {
            return Err(SimError::Infeasible(
                "shade 1 has mass but no floodfills are requested".into(),
            ));
        }
        let rest = self.n_routers - ff;
        let rest_weight: f64 = d.0[1..].iter().sum();
        if rest > 0 && rest_weight == 0.0 {
            return Err(SimError::Infeasible(format!(
                "{rest} non-floodfill routers but shades 2..8 have no mass"
            )));
        }

        let mut counts = [0usize; 8];
        counts[0] = ff;
        if rest > 0 {
            // Largest remainder over shades 2..=8; ties go to the lower shade.
            let quotas: Vec<f64> = d.0[1..]
                .iter()
                .map(|w| w / rest_weight * rest as f64)
                .collect();
            let mut assigned = 0;
            for (i, q) in quotas.iter().enumerate() {
                counts[i + 1] = (q + QUOTA_EPSILON).floor() as usize;
                assigned += counts[i + 1];
            }
            let mut order: Vec<usize> = (0..quotas.len()).collect();
            order.sort_by(|&a, &b| {
                let ra = quotas[a] - counts[a + 1] as f64;
                let rb = quotas[b] - counts[b + 1] as f64;
                rb.total_cmp(&ra).then(a.cmp(&b))
            });
            for &i in order.iter().take(rest.saturating_sub(assigned)) {
                counts[i + 1] += 1;
            }
        }
        Ok(counts)
    }
}

/// One router of the synthetic overlay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimRouter {
    pub hash: RouterHash,
    pub shade: Shade,
    /// `None` for exclusive routers: they never publish.
    pub record: Option<RouterInfo>,
}

impl SimRouter {
    pub fn profile(&self) -> CapabilityProfile {
        self.record
            .as_ref()
            .map_or(CapabilityProfile::Absent, RouterInfo::profile)
    }
}

/// Ground truth of a generated overlay: V1 (all routers), V1' (published),
/// F (floodfills), V2 (exclusive) and what each floodfill stores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkModel {
    pub routers: Vec<SimRouter>,
    pub published: BTreeSet<RouterHash>,
    /// In generation order.
    pub floodfills: Vec<RouterHash>,
    pub knowledge: HashMap<RouterHash, BTreeSet<RouterHash>>,
    pub exclusive: BTreeSet<RouterHash>,
    pub seed: u64,
    pub k: usize,
    pub date: NaiveDate,
    index: HashMap<RouterHash, usize>,
}

impl NetworkModel {
    pub fn router(&self, hash: &RouterHash) -> Option<&SimRouter> {
        self.index.get(hash).map(|&i| &self.routers[i])
    }

    pub fn record(&self, hash: &RouterHash) -> Option<&RouterInfo> {
        self.router(hash)?.record.as_ref()
    }

    pub fn contains(&self, hash: &RouterHash) -> bool {
        self.index.contains_key(hash)
    }

    pub fn is_floodfill(&self, hash: &RouterHash) -> bool {
        self.knowledge.contains_key(hash)
    }

    /// Routers of the given shade, in generation order.
    pub fn routers_with_shade(&self, shade: Shade) -> impl Iterator<Item = &SimRouter> {
        self.routers.iter().filter(move |r| r.shade == shade)
    }

    pub fn published_records(&self) -> impl Iterator<Item = &RouterInfo> {
        self.routers.iter().filter_map(|r| r.record.as_ref())
    }

    /// Floodfills storing `hash`.
    pub fn holders(&self, hash: &RouterHash) -> Vec<RouterHash> {
        self.floodfills
            .iter()
            .filter(|f| self.knowledge[*f].contains(hash))
            .copied()
            .collect()
    }

    /// Everything any floodfill stores.
    pub fn known_union(&self) -> BTreeSet<RouterHash> {
        self.knowledge.values().flatten().copied().collect()
    }

    /// Write the published records as a router `netDb/` directory.
    pub fn write_netdb(
        &self,
        dir: impl AsRef<Path>,
    ) -> Result<usize, crate::snapshot::SnapshotError> {
        crate::snapshot::write_netdb_dir(dir, self.published_records())
    }
}

impl fmt::Display for NetworkModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} routers, {} published, {} floodfills, {} exclusive (k={}, date {})",
            self.routers.len(),
            self.published.len(),
            self.floodfills.len(),
            self.exclusive.len(),
            self.k,
            format_date(self.date)
        )
    }
}

const HIGH: [BandwidthClass; 4] = [
    BandwidthClass::N,
    BandwidthClass::O,
    BandwidthClass::P,
    BandwidthClass::X,
];
const LOW: [BandwidthClass; 3] = [BandwidthClass::K, BandwidthClass::L, BandwidthClass::M];
const VERSIONS: [&str; 3] = ["0.9.63", "0.9.64", "0.9.65"];

fn pick<T: Copy>(rng: &mut ChaCha8Rng, from: &[T]) -> T {
    from[rng.gen_range(0..from.len())]
}

fn options(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

fn direct_address(rng: &mut ChaCha8Rng) -> TransportAddress {
    // 198.18.0.0/15 is reserved for benchmarking.
    let host = format!(
        "198.{}.{}.{}",
        rng.gen_range(18..=19),
        rng.gen_range(0..=255),
        rng.gen_range(1..=254)
    );
    TransportAddress {
        cost: 3,
        expiration_ms: 0,
        style: "NTCP2".into(),
        options: options(&[
            ("host", host),
            ("port", rng.gen_range(9000..31000).to_string()),
            ("v", "2".into()),
        ]),
    }
}

fn introduced_address(rng: &mut ChaCha8Rng) -> TransportAddress {
    let mut intro = [0u8; 32];
    rng.fill(&mut intro);
    TransportAddress {
        cost: 15,
        expiration_ms: 0,
        style: "SSU2".into(),
        options: options(&[
            ("ih0", RouterHash(intro).to_base64()),
            ("itag0", rng.gen::<u32>().to_string()),
            ("v", "2".into()),
        ]),
    }
}

/// Caps and addresses that the classifier maps back onto `shade`.
fn shaped_record(rng: &mut ChaCha8Rng, shade: Shade, published_ms: u64) -> RouterInfo {
    let mut key = [0u8; 384];
    rng.fill(&mut key[..]);
    let identity = Destination::from_parts(&key, 0, &[]);
    let hi = pick(rng, &HIGH).letter();
    let lo = pick(rng, &LOW).letter();
    let any = pick(rng, &[hi, lo]);
    let (caps, addresses) = match shade {
        Shade::Beacon => (format!("{hi}fR"), vec![direct_address(rng)]),
        Shade::Relay => (format!("{hi}R"), vec![direct_address(rng)]),
        Shade::Passive => (format!("{lo}R"), vec![direct_address(rng)]),
        Shade::Cloaked => (format!("{any}U"), vec![direct_address(rng)]),
        Shade::Veiled => (format!("{lo}U"), vec![introduced_address(rng)]),
        Shade::Declared => (format!("{lo}H"), vec![]),
        Shade::Phantom | Shade::Exclusive => (lo.to_string(), vec![]),
    };
    let mut opts = options(&[
        (OPT_CAPS, caps),
        ("netId", "2".into()),
        (OPT_VERSION, pick(rng, &VERSIONS).to_string()),
    ]);
    if shade == Shade::Beacon {
        opts.insert(
            OPT_KNOWN_ROUTERS.into(),
            rng.gen_range(2000..8000u32).to_string(),
        );
        opts.insert(
            OPT_KNOWN_LEASESETS.into(),
            rng.gen_range(50..400u32).to_string(),
        );
    }
    let mut signature = vec![0u8; 64];
    rng.fill(&mut signature[..]);
    RouterInfo::new(identity, published_ms, addresses, opts, signature)
}

/// Build a deterministic overlay from `spec`.
///
/// Each published record is stored on the `k` floodfills XOR-nearest to its
/// routing key for the spec's date.
pub fn generate_network(spec: &NetworkSpec) -> Result<NetworkModel, SimError> {
    let counts = spec.shade_counts()?;
    let date = spec.date()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut shades: Vec<Shade> = Shade::ALL
        .iter()
        .zip(counts)
        .flat_map(|(&s, c)| std::iter::repeat_n(s, c))
        .collect();
    shades.shuffle(&mut rng);

    let day_start_ms = date
        .and_hms_opt(0, 0, 0)
        .map_or(0, |t| t.and_utc().timestamp_millis().max(0) as u64);

    let mut routers = Vec::with_capacity(spec.n_routers);
    let mut index = HashMap::with_capacity(spec.n_routers);
    for shade in shades {
        let published_ms = day_start_ms + rng.gen_range(0..86_400_000);
        let record = shaped_record(&mut rng, shade, published_ms);
        let hash = record.hash;
        if index.insert(hash, routers.len()).is_some() {
            return Err(SimError::Infeasible(format!(
                "router hash collision on {hash}"
            )));
        }
        routers.push(SimRouter {
            hash,
            shade,
            record: (shade != Shade::Exclusive).then_some(record),
        });
    }

    let published: BTreeSet<RouterHash> = routers
        .iter()
        .filter(|r| r.record.is_some())
        .map(|r| r.hash)
        .collect();
    let exclusive: BTreeSet<RouterHash> = routers
        .iter()
        .filter(|r| r.record.is_none())
        .map(|r| r.hash)
        .collect();
    let floodfills: Vec<RouterHash> = routers
        .iter()
        .filter(|r| r.shade == Shade::Beacon)
        .map(|r| r.hash)
        .collect();

    let mod_key = daily_mod_key(date);
    let placements: Vec<(RouterHash, Vec<RouterHash>)> = routers
        .par_iter()
        .filter(|r| r.record.is_some())
        .map(|r| {
            let rk = routing_key_with(&r.hash, &mod_key, date);
            (r.hash, k_nearest(&rk.bytes, &floodfills, spec.k))
        })
        .collect();
    let mut knowledge: HashMap<RouterHash, BTreeSet<RouterHash>> =
        floodfills.iter().map(|f| (*f, BTreeSet::new())).collect();
    for (record, holders) in placements {
        for f in holders {
            knowledge.entry(f).or_default().insert(record);
        }
    }

    Ok(NetworkModel {
        routers,
        published,
        floodfills,
        knowledge,
        exclusive,
        seed: spec.seed,
        k: spec.k,
        date,
        index,
    })
}

/// Observable completeness of a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VisibilityMetrics {
    pub total: usize,
    pub published: usize,
    pub exclusive: usize,
    /// |V1'| / |V1|
    pub rho: f64,
    /// |V2| / |V1|, i.e. 1 - rho
    pub xi: f64,
}

pub fn completeness_metrics(model: &NetworkModel) -> VisibilityMetrics {
    let total = model.routers.len();
    let published = model.published.len();
    let exclusive = model.exclusive.len();
    // Both ratios straight from the counts, so 100 of 1000 gives xi = 0.1 exactly.
    let (rho, xi) = if total == 0 {
        (1.0, 0.0)
    } else {
        (
            published as f64 / total as f64,
            exclusive as f64 / total as f64,
        )
    };
    VisibilityMetrics {
        total,
        published,
        exclusive,
        rho,
        xi,
    }
}
