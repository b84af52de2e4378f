//! Placement and XOR delivery driven by a PDA, with byte-exact decoding.
//!
//! Files are split into `F` packets. User `k` caches packet `j` of every
//! file when cell `(j, k)` is a star; for each symbol `s` the server sends the
//! XOR of `W[d_k][j]` over all cells `(j, k)` holding `s`. All indices are
//! 0-based.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::ratio;
use crate::pda::{Cell, Pda};
use crate::Rational;

pub const DEFAULT_PACKET_LEN: usize = 16;

/// `N` files of `F` packets each, filled with seeded pseudo-random bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileLibrary {
    files: usize,
    packets: usize,
    packet_len: usize,
    seed: u64,
    data: Vec<u8>,
}

impl FileLibrary {
    pub fn random(files: usize, packets: usize, packet_len: usize, seed: u64) -> Result<Self> {
        if files == 0 || packets == 0 || packet_len == 0 {
            return Err(Error::InvalidArgument("files, packets and packet length must all be positive".into()));
        }
        let len = files
            .checked_mul(packets)
            .and_then(|x| x.checked_mul(packet_len))
            .filter(|&x| x <= 1 << 30)
            .ok_or_else(|| Error::InvalidArgument("library exceeds 1 GiB".into()))?;
        let mut data = vec![0u8; len];
        ChaCha8Rng::seed_from_u64(seed).fill(&mut data[..]);
        Ok(Self { files, packets, packet_len, seed, data })
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn packets(&self) -> usize {
        self.packets
    }

    pub fn packet_len(&self) -> usize {
        self.packet_len
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn packet(&self, file: usize, packet: usize) -> &[u8] {
        let start = (file * self.packets + packet) * self.packet_len;
        &self.data[start..start + self.packet_len]
    }

    pub fn file(&self, file: usize) -> &[u8] {
        let size = self.packets * self.packet_len;
        &self.data[file * size..(file + 1) * size]
    }
}

/// Cached packets per user, keyed by `(file, packet)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheContents {
    users: Vec<BTreeMap<(usize, usize), Vec<u8>>>,
}

impl CacheContents {
    pub fn users(&self) -> usize {
        self.users.len()
    }

    pub fn get(&self, user: usize, file: usize, packet: usize) -> Option<&[u8]> {
        self.users[user].get(&(file, packet)).map(Vec::as_slice)
    }

    pub fn entries(&self, user: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.users[user].keys().copied()
    }

    /// Bytes stored by `user`.
    pub fn bytes(&self, user: usize) -> usize {
        self.users[user].values().map(Vec::len).sum()
    }
}

/// User `k` stores packet `j` of every file wherever column `k` has a star.
pub fn place(pda: &Pda, library: &FileLibrary) -> Result<CacheContents> {
    if library.packets() != pda.f() {
        return Err(Error::InvalidArgument(format!(
            "library has {} packets per file but the PDA has F = {}",
            library.packets(),
            pda.f()
        )));
    }
    let users = (0..pda.k())
        .map(|k| {
            let mut cache = BTreeMap::new();
            for j in (0..pda.f()).filter(|&j| pda.is_star(j, k)) {
                for n in 0..library.files() {
                    cache.insert((n, j), library.packet(n, j).to_vec());
                }
            }
            cache
        })
        .collect();
    Ok(CacheContents { users })
}

/// One coded broadcast.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transmission {
    pub symbol: u32,
    #[serde(with = "hex_bytes")]
    pub payload: Vec<u8>,
    /// `(user, packet)` for every cell holding `symbol`, row-major.
    pub contributors: Vec<(usize, usize)>,
}

/// Everything the server sends for one demand vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeliveryTranscript {
    pub seed: u64,
    pub packet_len: usize,
    #[serde(rename = "F")]
    pub packets: usize,
    pub demands: Vec<usize>,
    pub bytes_on_wire: usize,
    pub transmissions: Vec<Transmission>,
}

impl DeliveryTranscript {
    /// Bytes sent divided by the file size.
    pub fn load(&self) -> Rational {
        ratio(self.bytes_on_wire as u64, (self.packets * self.packet_len) as u64)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        hex::decode(text).map_err(serde::de::Error::custom)
    }
}

fn xor_into(acc: &mut [u8], other: &[u8]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a ^= b;
    }
}

/// Sends one XOR per symbol `1..=S`, in increasing symbol order.
pub fn deliver(pda: &Pda, library: &FileLibrary, demands: &[usize]) -> Result<DeliveryTranscript> {
    if demands.len() != pda.k() {
        return Err(Error::InvalidArgument(format!(
            "demand vector has {} entries, expected K = {}",
            demands.len(),
            pda.k()
        )));
    }
    if let Some((k, &d)) = demands.iter().enumerate().find(|(_, &d)| d >= library.files()) {
        return Err(Error::InvalidArgument(format!(
            "user {k} demands file {d}, but only {} files exist",
            library.files()
        )));
    }
    if library.packets() != pda.f() {
        return Err(Error::InvalidArgument("library and PDA disagree on F".into()));
    }
    let transmissions: Vec<Transmission> = pda
        .symbol_cells()
        .into_iter()
        .enumerate()
        .map(|(i, cells)| {
            let mut payload = vec![0u8; library.packet_len()];
            let contributors: Vec<(usize, usize)> = cells.into_iter().map(|(j, k)| (k, j)).collect();
            for &(k, j) in &contributors {
                xor_into(&mut payload, library.packet(demands[k], j));
            }
            Transmission { symbol: i as u32 + 1, payload, contributors }
        })
        .collect();
    Ok(DeliveryTranscript {
        seed: library.seed(),
        packet_len: library.packet_len(),
        packets: pda.f(),
        demands: demands.to_vec(),
        bytes_on_wire: transmissions.len() * library.packet_len(),
        transmissions,
    })
}

/// Rebuilds the file demanded by `user` from its cache and the broadcasts.
pub fn decode(pda: &Pda, cache: &CacheContents, transcript: &DeliveryTranscript, user: usize) -> Result<Vec<u8>> {
    if user >= pda.k() || user >= cache.users() {
        return Err(Error::InvalidArgument(format!("user {user} is out of range")));
    }
    let want = transcript.demands[user];
    let mut out = Vec::with_capacity(pda.f() * transcript.packet_len);
    for j in 0..pda.f() {
        match pda.cell(j, user) {
            Cell::Star => {
                let packet =
                    cache.get(user, want, j).ok_or(Error::Unrecoverable { user, packet: j, file: want, missing: j })?;
                out.extend_from_slice(packet);
            }
            Cell::Symbol(s) => {
                let t = transcript
                    .transmissions
                    .get(s as usize - 1)
                    .filter(|t| t.symbol == s)
                    .ok_or_else(|| Error::Format(format!("transcript has no transmission for symbol {s}")))?;
                let mut packet = t.payload.clone();
                for &(k, jj) in t.contributors.iter().filter(|&&c| c != (user, j)) {
                    let file = transcript.demands[k];
                    let known =
                        cache.get(user, file, jj).ok_or(Error::Unrecoverable { user, packet: j, file, missing: jj })?;
                    xor_into(&mut packet, known);
                }
                out.extend_from_slice(&packet);
            }
        }
    }
    Ok(out)
}

/// A demand vector on which some user failed to decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandFailure {
    pub demands: Vec<usize>,
    pub user: usize,
    pub reason: String,
}

/// Aggregate outcome of [`exhaustive_demand_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandCheckReport {
    pub demands_checked: usize,
    pub demands_decoded: usize,
    /// Whether every vector in `[N]^K` was run.
    pub exhaustive: bool,
    /// First failures in demand order, at most [`DemandCheckReport::MAX_LISTED`].
    pub failures: Vec<DemandFailure>,
    /// Largest measured load over the checked demands.
    pub max_load: Rational,
    /// `S / F`.
    pub expected_load: Rational,
    /// Every checked demand measured exactly `S / F`.
    pub load_constant: bool,
    /// Every user stored exactly `Z * N * packet_len` bytes.
    pub cache_size_ok: bool,
}

impl DemandCheckReport {
    pub const MAX_LISTED: usize = 16;

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
            && self.demands_decoded == self.demands_checked
            && self.load_constant
            && self.max_load == self.expected_load
            && self.cache_size_ok
    }
}

/// The demand vectors [`exhaustive_demand_check`] will run: all of `[N]^K`
/// when that fits in `budget`, otherwise the all-equal vectors, the
/// all-distinct vector when `N >= K`, and `budget` seeded samples.
pub fn demand_vectors(users: usize, files: usize, budget: usize, seed: u64) -> (Vec<Vec<usize>>, bool) {
    let total = u32::try_from(users).ok().and_then(|k| (files as u128).checked_pow(k));
    if let Some(total) = total.filter(|&t| t <= budget as u128) {
        let all = (0..total as usize)
            .map(|mut idx| {
                let mut d = vec![0; users];
                for slot in d.iter_mut().rev() {
                    *slot = idx % files;
                    idx /= files;
                }
                d
            })
            .collect();
        return (all, true);
    }
    let mut out: Vec<Vec<usize>> = (0..files).map(|n| vec![n; users]).collect();
    if files >= users {
        out.push((0..users).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.extend((0..budget).map(|_| (0..users).map(|_| rng.gen_range(0..files)).collect()));
    (out, false)
}

/// Runs placement, delivery and decoding for every user over a set of
/// demand vectors and compares each recovered file with the library.
pub fn exhaustive_demand_check(
    pda: &Pda,
    files: usize,
    packet_len: usize,
    budget: usize,
    seed: u64,
) -> Result<DemandCheckReport> {
    let library = FileLibrary::random(files, pda.f(), packet_len, seed)?;
    let cache = place(pda, &library)?;
    let cache_size_ok = (0..pda.k()).all(|k| cache.bytes(k) == pda.z() * files * packet_len);
    let (vectors, exhaustive) = demand_vectors(pda.k(), files, budget, seed);
    let expected_load = ratio(pda.s() as u64, pda.f() as u64);

    let outcomes: Vec<(Rational, Option<DemandFailure>)> = vectors
        .par_iter()
        .map(|d| {
            let transcript = match deliver(pda, &library, d) {
                Ok(t) => t,
                Err(e) => {
                    let failure = DemandFailure { demands: d.clone(), user: 0, reason: e.to_string() };
                    return (ratio(0, 1), Some(failure));
                }
            };
            let failure = (0..pda.k()).find_map(|k| match decode(pda, &cache, &transcript, k) {
                Ok(bytes) if bytes == library.file(d[k]) => None,
                Ok(_) => Some(DemandFailure { demands: d.clone(), user: k, reason: "recovered bytes differ".into() }),
                Err(e) => Some(DemandFailure { demands: d.clone(), user: k, reason: e.to_string() }),
            });
            (transcript.load(), failure)
        })
        .collect();

    let load_constant = outcomes.iter().all(|(l, _)| *l == expected_load);
    let max_load = outcomes.iter().map(|(l, _)| l.clone()).max().unwrap_or_else(|| ratio(0, 1));
    let failed = outcomes.iter().filter(|(_, f)| f.is_some()).count();
    let failures = outcomes.into_iter().filter_map(|(_, f)| f).take(DemandCheckReport::MAX_LISTED).collect();
    Ok(DemandCheckReport {
        demands_checked: vectors.len(),
        demands_decoded: vectors.len() - failed,
        exhaustive,
        failures,
        max_load,
        expected_load,
        load_constant,
        cache_size_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nhsdp::{construct_nhsdp, Nhsdp};
    use proptest::prelude::*;

    fn example_pda() -> Pda {
        Pda::from_text("* 1 * 4\n1 * 2 *\n* 2 * 3\n4 * 3 *\n").unwrap()
    }

    fn example_two() -> Pda {
        let d = Nhsdp::from_signed(15, &[vec![-1, 1, -2, 2], vec![-4, 4, -5, 5]]).unwrap();
        Pda::from_nhsdp(&d).unwrap()
    }

    #[test]
    fn library_is_seeded() {
        let a = FileLibrary::random(3, 4, 16, 7).unwrap();
        let b = FileLibrary::random(3, 4, 16, 7).unwrap();
        let c = FileLibrary::random(3, 4, 16, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.file(1).len(), 64);
        assert_eq!(a.packet(1, 2), &a.file(1)[32..48]);
    }

    #[test]
    fn placement_of_example() {
        let p = example_pda();
        let lib = FileLibrary::random(4, 4, DEFAULT_PACKET_LEN, 0).unwrap();
        let cache = place(&p, &lib).unwrap();
        let user0: Vec<(usize, usize)> = cache.entries(0).collect();
        let expected: Vec<(usize, usize)> = (0..4).flat_map(|n| [(n, 0), (n, 2)]).collect();
        assert_eq!(user0, expected);
        assert_eq!(cache.bytes(0), 2 * 4 * DEFAULT_PACKET_LEN);
        let bad = FileLibrary::random(4, 5, 16, 0).unwrap();
        assert!(place(&p, &bad).is_err());
    }

    #[test]
    fn delivery_of_example() {
        let p = example_pda();
        let lib = FileLibrary::random(4, 4, 16, 0).unwrap();
        let t = deliver(&p, &lib, &[0, 1, 2, 3]).unwrap();
        assert_eq!(t.transmissions.len(), 4);
        let mut first = lib.packet(0, 1).to_vec();
        xor_into(&mut first, lib.packet(1, 0));
        assert_eq!(t.transmissions[0].payload, first);
        assert_eq!(t.load(), ratio(1, 1));
        let cache = place(&p, &lib).unwrap();
        assert_eq!(decode(&p, &cache, &t, 0).unwrap(), lib.file(0));
        assert!(deliver(&p, &lib, &[0, 1, 2, 4]).is_err());
        assert!(deliver(&p, &lib, &[0, 1, 2]).is_err());
    }

    #[test]
    fn all_star_pda_needs_no_broadcast() {
        let p = Pda::from_text("* *\n* *\n").unwrap();
        let lib = FileLibrary::random(3, 2, 16, 1).unwrap();
        let cache = place(&p, &lib).unwrap();
        let t = deliver(&p, &lib, &[2, 1]).unwrap();
        assert!(t.transmissions.is_empty());
        assert_eq!(t.load(), ratio(0, 1));
        assert_eq!(decode(&p, &cache, &t, 0).unwrap(), lib.file(2));
        assert_eq!(cache.bytes(1), 2 * 3 * 16);
    }

    #[test]
    fn example_two_same_demand() {
        let p = example_two();
        let lib = FileLibrary::random(2, 15, 16, 3).unwrap();
        let cache = place(&p, &lib).unwrap();
        assert_eq!(cache.bytes(4), 7 * 2 * 16);
        let t = deliver(&p, &lib, &[0; 15]).unwrap();
        assert_eq!(t.transmissions.len(), 30);
        assert_eq!(t.load(), ratio(2, 1));
        for k in 0..15 {
            assert_eq!(decode(&p, &cache, &t, k).unwrap(), lib.file(0));
        }
    }

    #[test]
    fn broken_pda_is_unrecoverable() {
        // symbol 1 at (0,1) and (1,0), but (0,0) is not a star
        let p = Pda::from_text("2 1\n1 *\n").unwrap();
        let lib = FileLibrary::random(2, 2, 4, 0).unwrap();
        let cache = place(&p, &lib).unwrap();
        let t = deliver(&p, &lib, &[0, 1]).unwrap();
        assert!(matches!(
            decode(&p, &cache, &t, 0),
            Err(Error::Unrecoverable { user: 0, packet: 1, file: 1, missing: 0 })
        ));
    }

    #[test]
    fn exhaustive_checks() {
        let r = exhaustive_demand_check(&example_pda(), 4, DEFAULT_PACKET_LEN, 1_000_000, 0).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.exhaustive);
        assert_eq!(r.demands_checked, 256);
        assert_eq!(r.max_load, ratio(1, 1));
        let small = Pda::from_nhsdp(&construct_nhsdp(3, &[1]).unwrap()).unwrap();
        let r = exhaustive_demand_check(&small, 3, DEFAULT_PACKET_LEN, 1_000_000, 0).unwrap();
        assert!(r.passed());
        assert_eq!((r.demands_checked, r.max_load.clone()), (27, ratio(1, 1)));
    }

    #[test]
    fn sampled_demands_include_corners() {
        let (v, exhaustive) = demand_vectors(15, 20, 10, 5);
        assert!(!exhaustive);
        assert_eq!(v.len(), 20 + 1 + 10);
        assert_eq!(v[20], (0..15).collect::<Vec<_>>());
        assert_eq!(demand_vectors(15, 20, 10, 5), (v, false));
        let r = exhaustive_demand_check(&example_two(), 20, 8, 50, 9).unwrap();
        assert!(r.passed());
        assert!(!r.exhaustive);
    }

    #[test]
    fn transcript_json_round_trip() {
        let p = example_pda();
        let lib = FileLibrary::random(4, 4, 16, 42).unwrap();
        let t = deliver(&p, &lib, &[3, 2, 1, 0]).unwrap();
        let json = t.to_json();
        assert!(json.contains(&hex::encode(&t.transmissions[0].payload)));
        assert!(json.contains("\"seed\": 42"));
        assert_eq!(DeliveryTranscript::from_json(&json).unwrap(), t);
    }

    proptest! {
        #[test]
        fn xor_leaves_one_contributor(seed in any::<u64>(), d in prop::collection::vec(0usize..3, 15), pick in 0usize..30) {
            let p = example_two();
            let lib = FileLibrary::random(3, 15, 16, seed).unwrap();
            let t = deliver(&p, &lib, &d).unwrap();
            let tx = &t.transmissions[pick];
            for (skip, &(k, j)) in tx.contributors.iter().enumerate() {
                let mut acc = tx.payload.clone();
                for (i, &(k2, j2)) in tx.contributors.iter().enumerate() {
                    if i != skip {
                        xor_into(&mut acc, lib.packet(d[k2], j2));
                    }
                }
                prop_assert_eq!(&acc[..], lib.packet(d[k], j));
            }
        }
    }
}
