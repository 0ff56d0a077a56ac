//! Near-duplicate detection inside a (firm, day) block.
//!
//! Documents are shingled into overlapping 5-token windows, hashed with
//! FNV-1a, summarised by 128 minhashes and bucketed with banded LSH to find
//! candidate pairs cheaply. Candidates are then verified with the exact
//! Jaccard similarity of their hashed shingle sets, so the retain/drop
//! decision never depends on the minhash estimate; the estimate exists only
//! to make bucketing cheap and is validated separately. Verified groups are
//! merged with union-find and the earliest document of each group survives.
//!
//! Everything is seeded by constants in the configuration: two runs over the
//! same block produce byte-identical outcomes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Debug)]
pub struct DedupConfig {
    /// Tokens per shingle.
    pub shingle_size: usize,
    /// Minhash functions in the signature.
    pub num_hashes: usize,
    /// LSH bands; `num_hashes = bands * rows_per_band`.
    pub bands: usize,
    pub rows_per_band: usize,
    /// Exact-Jaccard threshold at or above which two documents are duplicates.
    pub threshold: f64,
    /// Seed of the minhash family. Fixed by default so outputs reproduce.
    pub seed: u64,
}

impl Default for DedupConfig {
    fn default() -> Self {
        DedupConfig {
            shingle_size: 5,
            num_hashes: 128,
            bands: 16,
            rows_per_band: 8,
            threshold: 0.9,
            seed: 0x746f_6e65_7374_7564,
        }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Hashed shingle set of a token list. Shorter documents than one shingle
/// contribute their whole token list as a single shingle; an empty document
/// has an empty set.
pub fn shingle_set(tokens: &[String], shingle_size: usize) -> BTreeSet<u64> {
    assert!(shingle_size >= 1);
    let mut out = BTreeSet::new();
    if tokens.is_empty() {
        return out;
    }
    let mut buf = Vec::new();
    let windows: &mut dyn Iterator<Item = &[String]> = if tokens.len() < shingle_size {
        &mut core::iter::once(tokens)
    } else {
        &mut tokens.windows(shingle_size)
    };
    for w in windows {
        buf.clear();
        for (i, t) in w.iter().enumerate() {
            if i > 0 {
                buf.push(0x1f);
            }
            buf.extend_from_slice(t.as_bytes());
        }
        out.insert(fnv1a64(&buf));
    }
    out
}

/// Exact Jaccard similarity of two hashed shingle sets; two empty sets count
/// as identical.
pub fn jaccard(a: &BTreeSet<u64>, b: &BTreeSet<u64>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const MERSENNE61: u64 = (1 << 61) - 1;

/// The (a·x + b) mod p minhash family over p = 2^61 - 1.
#[derive(Clone, Debug)]
pub struct MinHashFamily {
    params: Vec<(u64, u64)>,
}

impl MinHashFamily {
    pub fn new(num_hashes: usize, seed: u64) -> Self {
        let mut state = seed;
        let mut params = Vec::with_capacity(num_hashes);
        for _ in 0..num_hashes {
            let a = splitmix64(&mut state) % (MERSENNE61 - 1) + 1;
            let b = splitmix64(&mut state) % MERSENNE61;
            params.push((a, b));
        }
        MinHashFamily { params }
    }

    /// Signature of a shingle set; an empty set gets all-sentinel values so
    /// empty documents still collide with each other in every band.
    pub fn signature(&self, shingles: &BTreeSet<u64>) -> Vec<u64> {
        if shingles.is_empty() {
            return vec![u64::MAX; self.params.len()];
        }
        let mut sig = vec![u64::MAX; self.params.len()];
        for &s in shingles {
            let x = (s % MERSENNE61) as u128;
            for (slot, &(a, b)) in sig.iter_mut().zip(&self.params) {
                let h = ((a as u128 * x + b as u128) % MERSENNE61 as u128) as u64;
                if h < *slot {
                    *slot = h;
                }
            }
        }
        sig
    }
}

/// Share of agreeing minhash slots; converges to the exact Jaccard.
pub fn estimate_jaccard(sig_a: &[u64], sig_b: &[u64]) -> f64 {
    assert_eq!(sig_a.len(), sig_b.len());
    assert!(!sig_a.is_empty());
    let agree = sig_a.iter().zip(sig_b).filter(|(a, b)| a == b).count();
    agree as f64 / sig_a.len() as f64
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = i;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Rooting at the smaller index makes the earliest element the
            // group representative.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Deduplicates one block of documents already sorted by the survival
/// priority (ascending (timestamp, doc_id)).
///
/// Returns, per document, `None` if it survives or `Some(winner)` with the
/// index of the earliest member of its duplicate group.
pub fn dedup_block(docs: &[Vec<String>], cfg: &DedupConfig) -> Vec<Option<usize>> {
    assert_eq!(cfg.bands * cfg.rows_per_band, cfg.num_hashes, "bands * rows must equal num_hashes");
    let n = docs.len();
    if n <= 1 {
        return vec![None; n];
    }
    let shingles: Vec<BTreeSet<u64>> = docs
        .iter()
        .map(|t| shingle_set(t, cfg.shingle_size))
        .collect();
    let family = MinHashFamily::new(cfg.num_hashes, cfg.seed);
    let sigs: Vec<Vec<u64>> = shingles.iter().map(|s| family.signature(s)).collect();

    let mut buckets: BTreeMap<(usize, u64), Vec<usize>> = BTreeMap::new();
    for (i, sig) in sigs.iter().enumerate() {
        for band in 0..cfg.bands {
            let slice = &sig[band * cfg.rows_per_band..(band + 1) * cfg.rows_per_band];
            let mut bytes = Vec::with_capacity(cfg.rows_per_band * 8);
            for v in slice {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
            buckets.entry((band, fnv1a64(&bytes))).or_default().push(i);
        }
    }

    let mut uf = UnionFind::new(n);
    let mut checked: BTreeSet<(usize, usize)> = BTreeSet::new();
    for members in buckets.values() {
        for (ai, &a) in members.iter().enumerate() {
            for &b in &members[ai + 1..] {
                let pair = if a < b { (a, b) } else { (b, a) };
                if !checked.insert(pair) {
                    continue;
                }
                if jaccard(&shingles[pair.0], &shingles[pair.1]) >= cfg.threshold {
                    uf.union(pair.0, pair.1);
                }
            }
        }
    }

    let mut winner = vec![usize::MAX; n];
    for i in 0..n {
        let r = uf.find(i);
        if winner[r] == usize::MAX {
            winner[r] = i;
        }
    }
    (0..n)
        .map(|i| {
            let w = winner[uf.find(i)];
            if w == i {
                None
            } else {
                Some(w)
            }
        })
        .collect()
}
