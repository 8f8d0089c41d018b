//! Small shared helpers.

use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::hash::Hash;

/// Short hex digest (16 chars of SHA-256) used to identify instances,
/// permutations, and tapes in reports and counterexamples.
pub(crate) fn short_digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    hex::encode(&hash[..8])
}

/// Key for caching per-subset solutions. Small ground sets use a bitmask.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum SubsetKey {
    Mask(u128),
    Items(Vec<usize>),
}

pub(crate) fn subset_key(items_sorted: &[usize], ground_size: usize) -> SubsetKey {
    if ground_size <= 128 {
        let mut mask = 0u128;
        for &j in items_sorted {
            mask |= 1u128 << j;
        }
        SubsetKey::Mask(mask)
    } else {
        SubsetKey::Items(items_sorted.to_vec())
    }
}

/// Insert-only cache with an entry cap; once full, lookups still work but new
/// entries are no longer stored. Keeps memory bounded on large instances where
/// revealed subsets rarely repeat anyway.
pub(crate) struct BoundedCache<K, V> {
    map: HashMap<K, V>,
    cap: usize,
}

impl<K: Eq + Hash, V: Clone> BoundedCache<K, V> {
    pub(crate) fn new(cap: usize) -> Self {
        Self {
            map: HashMap::new(),
            cap,
        }
    }

    pub(crate) fn get(&self, key: &K) -> Option<&V> {
        self.map.get(key)
    }

    pub(crate) fn insert(&mut self, key: K, value: V) {
        if self.map.len() < self.cap {
            self.map.insert(key, value);
        }
    }
}
