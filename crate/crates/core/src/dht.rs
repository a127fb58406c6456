//! Routing keys, XOR distance, floodfill responsibility and b32 addresses.
//!
//! Storage responsibility rotates daily. The routing key of a hash `h` on
//! date `D` is
//!
//! ```text
//! rk = SHA-256(h XOR SHA-256("yyyyMMdd"))
//! ```
//!
//! and the floodfill whose hash is XOR-nearest to `rk` (as a big-endian
//! unsigned integer) stores the record. Deployed routers concatenate the
//! hash and the date string instead of XOR-ing them; [`combine`] is the one
//! place that choice is made.

use std::fmt;
use std::sync::LazyLock;

use chrono::NaiveDate;
use data_encoding::{Encoding, Specification};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::destination::{Destination, DestinationError};
use crate::hash::{DestinationHash, RouterHash, HASH_LEN};

pub const B32_SUFFIX: &str = ".b32.i2p";

/// Base32 characters in an encoded 32-byte hash.
pub const B32_LEN: usize = 52;

static B32: LazyLock<Encoding> = LazyLock::new(|| {
    let mut spec = Specification::new();
    spec.symbols.push_str("abcdefghijklmnopqrstuvwxyz234567");
    spec.translate.from.push_str("ABCDEFGHIJKLMNOPQRSTUVWXYZ");
    spec.translate.to.push_str("abcdefghijklmnopqrstuvwxyz");
    spec.encoding().expect("valid base32 specification")
});

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DhtError {
    #[error("b32 address must have {B32_LEN} characters before the suffix, got {0}")]
    B32Length(usize),
    #[error("invalid b32 address: {0}")]
    B32Alphabet(String),
    #[error("floodfill set is empty")]
    NoFloodfills,
    #[error("invalid date {0:?}, expected yyyyMMdd")]
    Date(String),
    #[error(transparent)]
    Destination(#[from] DestinationError),
}

/// Parse a UTC `yyyyMMdd` date.
pub fn parse_date(text: &str) -> Result<NaiveDate, DhtError> {
    let text = text.trim();
    if text.len() != 8 || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(DhtError::Date(text.to_string()));
    }
    NaiveDate::parse_from_str(text, "%Y%m%d").map_err(|_| DhtError::Date(text.to_string()))
}

pub fn format_date(date: NaiveDate) -> String {
    date.format("%Y%m%d").to_string()
}

/// SHA-256 of the 8 ASCII bytes `yyyyMMdd`.
pub fn daily_mod_key(date: NaiveDate) -> [u8; HASH_LEN] {
    Sha256::digest(format_date(date).as_bytes()).into()
}

/// Mixes a hash with the daily modifier before the final SHA-256.
#[inline]
pub fn combine(hash: &[u8; HASH_LEN], mod_key: &[u8; HASH_LEN]) -> [u8; HASH_LEN] {
    xor_bytes(hash, mod_key)
}

#[inline]
fn xor_bytes(a: &[u8; HASH_LEN], b: &[u8; HASH_LEN]) -> [u8; HASH_LEN] {
    let mut out = [0u8; HASH_LEN];
    for i in 0..HASH_LEN {
        out[i] = a[i] ^ b[i];
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RoutingKey {
    pub bytes: [u8; HASH_LEN],
    pub date: NaiveDate,
}

impl RoutingKey {
    pub fn as_hash(&self) -> RouterHash {
        RouterHash(self.bytes)
    }
}

/// Routing key of `hash` for `date`.
pub fn routing_key(hash: &RouterHash, date: NaiveDate) -> RoutingKey {
    routing_key_with(hash, &daily_mod_key(date), date)
}

/// [`routing_key`] with a precomputed daily modifier.
pub fn routing_key_with(
    hash: &RouterHash,
    mod_key: &[u8; HASH_LEN],
    date: NaiveDate,
) -> RoutingKey {
    RoutingKey {
        bytes: Sha256::digest(combine(&hash.0, mod_key)).into(),
        date,
    }
}

/// XOR of two 256-bit values, ordered as a big-endian unsigned integer.
///
/// Lexicographic order on the big-endian bytes is numeric order, so the
/// derived `Ord` is the integer comparison.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct XorDistance(pub [u8; HASH_LEN]);

impl XorDistance {
    pub const ZERO: XorDistance = XorDistance([0; HASH_LEN]);
    pub const MAX: XorDistance = XorDistance([0xff; HASH_LEN]);

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Number of leading zero bits (256 for distance zero).
    pub fn leading_zeros(&self) -> u32 {
        let mut n = 0;
        for &b in &self.0 {
            if b == 0 {
                n += 8;
            } else {
                return n + b.leading_zeros();
            }
        }
        n
    }
}

impl fmt::Debug for XorDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "XorDistance(0x{})", self.to_hex())
    }
}

impl Serialize for XorDistance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

pub fn xor_distance(a: &[u8; HASH_LEN], b: &[u8; HASH_LEN]) -> XorDistance {
    XorDistance(xor_bytes(a, b))
}

/// The floodfill XOR-nearest to `key`; equal distances go to the smaller hash.
pub fn nearest_to_key<'a, I>(key: &[u8; HASH_LEN], floodfills: I) -> Option<RouterHash>
where
    I: IntoIterator<Item = &'a RouterHash>,
{
    floodfills
        .into_iter()
        .min_by_key(|f| (xor_distance(&f.0, key), **f))
        .copied()
}

/// The `k` floodfills XOR-nearest to `key`, nearest first, same tie rule.
pub fn k_nearest(key: &[u8; HASH_LEN], floodfills: &[RouterHash], k: usize) -> Vec<RouterHash> {
    let mut ranked: Vec<(XorDistance, RouterHash)> = floodfills
        .iter()
        .map(|f| (xor_distance(&f.0, key), *f))
        .collect();
    let k = k.min(ranked.len());
    if k == 0 {
        return Vec::new();
    }
    if k < ranked.len() {
        ranked.select_nth_unstable(k - 1);
        ranked.truncate(k);
    }
    ranked.sort_unstable();
    ranked.into_iter().map(|(_, f)| f).collect()
}

/// The floodfill responsible for `dest` on `date`.
pub fn responsible_floodfill<'a, I>(
    dest: &DestinationHash,
    date: NaiveDate,
    floodfills: I,
) -> Result<RouterHash, DhtError>
where
    I: IntoIterator<Item = &'a RouterHash>,
{
    let rk = routing_key(dest, date);
    nearest_to_key(&rk.bytes, floodfills).ok_or(DhtError::NoFloodfills)
}

/// Eepsites for which the target is the XOR-nearest floodfill.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct XorAssociation {
    /// Matching entries, in input order.
    pub matches: Vec<String>,
    pub warnings: Vec<String>,
}

/// Per-eepsite detail for distance tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssociationRow {
    pub b32: String,
    pub target_distance: XorDistance,
    /// Nearest floodfill other than the target, if any.
    pub nearest_other: Option<RouterHash>,
    pub nearest_other_distance: Option<XorDistance>,
    pub target_is_nearest: bool,
}

/// For each eepsite, decide whether `target` is XOR-nearest to its routing
/// key. Another floodfill disqualifies the target only when it is strictly
/// closer; the target itself is skipped if it appears in `floodfills`.
/// Undecodable addresses are skipped with a warning.
pub fn xor_association(
    target: &RouterHash,
    eepsites: &[String],
    floodfills: &[RouterHash],
    date: NaiveDate,
) -> XorAssociation {
    let rows = association_rows(target, eepsites, floodfills, date);
    let mut out = XorAssociation::default();
    for (site, row) in eepsites.iter().zip(rows) {
        match row {
            Ok(r) if r.target_is_nearest => out.matches.push(site.clone()),
            Ok(_) => {}
            Err(e) => out.warnings.push(format!("skipped {site}: {e}")),
        }
    }
    out
}

/// [`xor_association`] with distances kept, one entry per input eepsite.
/// Eepsites are evaluated in parallel; the output order is the input order.
pub fn association_rows(
    target: &RouterHash,
    eepsites: &[String],
    floodfills: &[RouterHash],
    date: NaiveDate,
) -> Vec<Result<AssociationRow, DhtError>> {
    let mod_key = daily_mod_key(date);
    let others: Vec<RouterHash> = floodfills
        .iter()
        .filter(|f| *f != target)
        .copied()
        .collect();
    eepsites
        .par_iter()
        .map(|site| {
            let hash = decode_b32(site)?;
            let rk = routing_key_with(&hash, &mod_key, date);
            let target_distance = xor_distance(&target.0, &rk.bytes);
            let nearest_other = others
                .iter()
                .map(|f| (xor_distance(&f.0, &rk.bytes), *f))
                .min();
            Ok(AssociationRow {
                b32: b32_address(&hash),
                target_distance,
                nearest_other: nearest_other.map(|(_, f)| f),
                nearest_other_distance: nearest_other.map(|(d, _)| d),
                target_is_nearest: nearest_other.is_none_or(|(d, _)| d >= target_distance),
            })
        })
        .collect()
}

/// Lowercase unpadded base32 of a hash, without suffix (52 characters).
pub fn b32_encode(hash: &RouterHash) -> String {
    B32.encode(&hash.0)
}

/// `<52 base32 chars>.b32.i2p`
pub fn b32_address(hash: &RouterHash) -> String {
    format!("{}{B32_SUFFIX}", b32_encode(hash))
}

/// The b32 address of a destination: base32 of SHA-256 over its identity bytes.
pub fn derive_b32(dest: &Destination) -> String {
    b32_address(&dest.hash())
}

/// [`derive_b32`] on raw bytes, e.g. the contents of `eepPriv.dat`.
pub fn derive_b32_from_bytes(bytes: &[u8]) -> Result<String, DhtError> {
    Ok(derive_b32(&Destination::parse(bytes)?))
}

/// Decode a b32 address (suffix optional, any case) to its 32-byte hash.
pub fn decode_b32(addr: &str) -> Result<DestinationHash, DhtError> {
    let addr = addr.trim();
    let body = match addr.len().checked_sub(B32_SUFFIX.len()) {
        Some(cut) if addr.is_char_boundary(cut) && addr[cut..].eq_ignore_ascii_case(B32_SUFFIX) => {
            &addr[..cut]
        }
        _ => addr,
    };
    if body.chars().count() != B32_LEN {
        return Err(DhtError::B32Length(body.chars().count()));
    }
    let bytes = B32
        .decode(body.as_bytes())
        .map_err(|e| DhtError::B32Alphabet(e.to_string()))?;
    RouterHash::from_slice(&bytes).map_err(|e| DhtError::B32Alphabet(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    fn hex(s: &str) -> [u8; 32] {
        RouterHash::from_hex(s).unwrap().0
    }

    // Digests below were computed with Python's hashlib before this module
    // was written.
    #[test]
    fn daily_key_vectors() {
        assert_eq!(
            daily_mod_key(d("20250101")),
            hex("15ccdd9f6056a69f2eab97206923d1d8027d8af36c7febf694b928b1d82b70f3")
        );
        assert_eq!(
            daily_mod_key(d("20250102")),
            hex("4337ba8d3d047d13dce5fcbb643a07d985616ef93fbc2061ea2a58eafa777387")
        );
        assert_eq!(daily_mod_key(d("20250101")), daily_mod_key(d("20250101")));
    }

    #[test]
    fn zero_hash_routing_key() {
        let rk = routing_key(&RouterHash::ZERO, d("20250101"));
        assert_eq!(
            rk.bytes,
            hex("ceee9a60fe7cf91add6a2fe22df6c35e30d2eaad6c55997e19c2cd8d6455dedc")
        );
        assert_eq!(
            rk.bytes,
            <[u8; 32]>::from(Sha256::digest(daily_mod_key(d("20250101"))))
        );
    }

    #[test]
    fn self_cancelling_routing_key() {
        let date = d("20250101");
        let h = RouterHash(daily_mod_key(date));
        assert_eq!(
            routing_key(&h, date).bytes,
            hex("66687aadf862bd776c8fc18b8e9f8e20089714856ee233b3902a591d0d5f2925")
        );
    }

    #[test]
    fn counting_hash_routing_key() {
        let mut h = [0u8; 32];
        for (i, b) in h.iter_mut().enumerate() {
            *b = i as u8;
        }
        assert_eq!(
            routing_key(&RouterHash(h), d("20250615")).bytes,
            hex("f3a6194b596ad38fc7a823ad5ae1bf9bb8525a6ff72944a7c92f76da0c79a676")
        );
    }

    #[test]
    fn thirty_consecutive_dates_give_distinct_keys() {
        let h = RouterHash([0x42; 32]);
        let start = d("20250101");
        let keys: std::collections::HashSet<_> = (0..30)
            .map(|i| routing_key(&h, start + chrono::Days::new(i)).bytes)
            .collect();
        assert_eq!(keys.len(), 30);
    }

    #[test]
    fn date_parsing() {
        assert!(parse_date("20250230").is_err());
        assert!(parse_date("2025-01-01").is_err());
        assert!(parse_date("+2025010").is_err());
        assert_eq!(format_date(d("20251231")), "20251231");
    }

    #[test]
    fn distance_extremes() {
        assert_eq!(xor_distance(&[7; 32], &[7; 32]), XorDistance::ZERO);
        assert_eq!(xor_distance(&[0; 32], &[0xff; 32]), XorDistance::MAX);
        assert_eq!(XorDistance::ZERO.leading_zeros(), 256);
        let mut one = [0u8; 32];
        one[31] = 1;
        assert_eq!(XorDistance(one).leading_zeros(), 255);
    }

    #[test]
    fn analytically_forced_nearest() {
        let low = RouterHash::ZERO;
        let mut high = [0u8; 32];
        high[0] = 0x80;
        let high = RouterHash(high);
        let mut key = [0u8; 32];
        key[0] = 0x01;
        assert_eq!(nearest_to_key(&key, &[high, low]), Some(low));
    }

    #[test]
    fn singleton_and_empty_sets() {
        let f = RouterHash([3; 32]);
        assert_eq!(
            responsible_floodfill(&RouterHash::ZERO, d("20250101"), &[f]),
            Ok(f)
        );
        assert_eq!(
            responsible_floodfill(&RouterHash::ZERO, d("20250101"), &[]),
            Err(DhtError::NoFloodfills)
        );
    }

    #[test]
    fn ties_prefer_smaller_hash() {
        let f = RouterHash([3; 32]);
        assert_eq!(nearest_to_key(&[0; 32], &[f, f]), Some(f));
        assert_eq!(
            k_nearest(&[0; 32], &[f, f, RouterHash([1; 32])], 2).len(),
            2
        );
    }

    #[test]
    fn k_nearest_is_prefix_of_full_ranking() {
        let ffs: Vec<RouterHash> = (0..50u8).map(|i| RouterHash::digest(&[i])).collect();
        let key = [0x5a; 32];
        let mut all = ffs.clone();
        all.sort_by_key(|f| xor_distance(&f.0, &key));
        assert_eq!(k_nearest(&key, &ffs, 4), all[..4].to_vec());
        assert_eq!(k_nearest(&key, &ffs, 0), vec![]);
        assert_eq!(k_nearest(&key, &ffs, 99).len(), 50);
        assert_eq!(
            k_nearest(&key, &ffs, 1)[0],
            nearest_to_key(&key, &ffs).unwrap()
        );
    }

    #[test]
    fn b32_vectors() {
        let mut dest = vec![0x41; 384];
        dest.extend_from_slice(&[5, 0, 4, 0x41, 0x41, 0x41, 0x41]);
        assert_eq!(
            derive_b32_from_bytes(&dest).unwrap(),
            "ar5r72o2mwcq7r75k4misu3as52iaedtwjujvt46mv75vecq2dna.b32.i2p"
        );
        dest.extend_from_slice(b"private key material");
        assert_eq!(
            derive_b32_from_bytes(&dest).unwrap(),
            "ar5r72o2mwcq7r75k4misu3as52iaedtwjujvt46mv75vecq2dna.b32.i2p"
        );
    }

    #[test]
    fn b32_decode_errors() {
        let good = b32_encode(&RouterHash([9; 32]));
        assert_eq!(decode_b32(&good[..51]), Err(DhtError::B32Length(51)));
        let bad = format!("{}1", &good[..51]);
        assert!(matches!(decode_b32(&bad), Err(DhtError::B32Alphabet(_))));
        assert_eq!(
            decode_b32(&good.to_uppercase()).unwrap(),
            RouterHash([9; 32])
        );
        assert_eq!(
            decode_b32(&format!("{}.B32.I2P", good.to_uppercase())).unwrap(),
            RouterHash([9; 32])
        );
    }

    #[test]
    fn association_with_only_the_target() {
        let t = RouterHash([1; 32]);
        let sites: Vec<String> = (0..5u8)
            .map(|i| b32_address(&RouterHash([i; 32])))
            .collect();
        let got = xor_association(&t, &sites, &[t], d("20250101"));
        assert_eq!(got.matches, sites);
        assert!(xor_association(&t, &[], &[t], d("20250101"))
            .matches
            .is_empty());
    }

    #[test]
    fn association_skips_bad_entries() {
        let t = RouterHash([1; 32]);
        let sites = vec!["nonsense".to_string(), b32_address(&RouterHash([2; 32]))];
        let got = xor_association(&t, &sites, &[], d("20250101"));
        assert_eq!(got.matches, vec![sites[1].clone()]);
        assert_eq!(got.warnings.len(), 1);
    }

    proptest! {
        #[test]
        fn b32_round_trip(bytes in any::<[u8; 32]>()) {
            let h = RouterHash(bytes);
            let addr = b32_address(&h);
            prop_assert_eq!(addr.len(), B32_LEN + B32_SUFFIX.len());
            prop_assert_eq!(decode_b32(&addr).unwrap(), h);
        }

        #[test]
        fn distance_is_symmetric(a in any::<[u8; 32]>(), b in any::<[u8; 32]>()) {
            prop_assert_eq!(xor_distance(&a, &b), xor_distance(&b, &a));
        }

        #[test]
        fn responsibility_ignores_order(
            seeds in proptest::collection::vec(any::<u16>(), 1..40),
            dest in any::<[u8; 32]>(),
        ) {
            let ffs: Vec<RouterHash> = seeds.iter().map(|s| RouterHash::digest(&s.to_be_bytes())).collect();
            let mut rev = ffs.clone();
            rev.reverse();
            let date = d("20250301");
            let dest = RouterHash(dest);
            prop_assert_eq!(
                responsible_floodfill(&dest, date, &ffs).unwrap(),
                responsible_floodfill(&dest, date, &rev).unwrap()
            );
        }

        #[test]
        fn association_agrees_with_responsibility(
            ff_seeds in proptest::collection::vec(any::<u32>(), 0..64),
            site_seeds in proptest::collection::vec(any::<u32>(), 0..16),
            target_seed in any::<u32>(),
        ) {
            let date = d("20250615");
            let target = RouterHash::digest(&target_seed.to_le_bytes());
            let ffs: Vec<RouterHash> = ff_seeds.iter().map(|s| RouterHash::digest(&s.to_be_bytes())).collect();
            let sites: Vec<String> = site_seeds
                .iter()
                .map(|s| b32_address(&RouterHash::digest(&[&s.to_be_bytes()[..], b"site"].concat())))
                .collect();
            let got = xor_association(&target, &sites, &ffs, date);
            let mut with_target = ffs.clone();
            with_target.push(target);
            for site in &sites {
                let h = decode_b32(site).unwrap();
                let responsible = responsible_floodfill(&h, date, &with_target).unwrap();
                prop_assert_eq!(got.matches.contains(site), responsible == target);
            }
        }
    }
}
