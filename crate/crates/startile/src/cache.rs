//! Versioned on-disk cache for semi-biorthogonal systems, keyed by the
//! construction inputs so tilings replay without recomputing nets.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semibeta::SemiBiorthogonalSystem;
use crate::space::SpaceDescriptor;
use crate::voronoi::GreedyNet;

pub const CACHE_VERSION: u32 = 1;

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "STARTILE_CACHE_DIR";

#[derive(Default, Serialize, Deserialize)]
pub struct SystemCache {
    pub version: u32,
    pub entries: BTreeMap<String, SemiBiorthogonalSystem>,
    /// Greedy separated nets, stored for custom-norm spaces where the
    /// lattice fast path does not apply.
    #[serde(default)]
    pub greedy_nets: BTreeMap<String, GreedyNet>,
}

pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Cache key for one level's system.
pub fn system_key(
    space: &SpaceDescriptor,
    level: usize,
    delta: f64,
    epsilon: f64,
    seed: u64,
) -> String {
    let payload = serde_json::to_string(&(space, level, delta.to_bits(), epsilon.to_bits(), seed))
        .expect("cache key serialization");
    format!("{:016x}", fnv1a64(payload.as_bytes()))
}

/// Cache key for one level's greedy net. The horizon is not part of the
/// key: greedy growth is prefix-stable, so any cached net with a large
/// enough horizon serves.
pub fn net_key(space: &SpaceDescriptor, level: usize, r: f64) -> String {
    let payload = serde_json::to_string(&(space, level, r.to_bits(), "net"))
        .expect("cache key serialization");
    format!("{:016x}", fnv1a64(payload.as_bytes()))
}

impl SystemCache {
    pub fn new() -> Self {
        SystemCache {
            version: CACHE_VERSION,
            entries: BTreeMap::new(),
            greedy_nets: BTreeMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<SystemCache> {
        let text = std::fs::read_to_string(path)?;
        let cache: SystemCache = serde_json::from_str(&text)?;
        if cache.version != CACHE_VERSION {
            return Err(Error::Config(format!(
                "cache version {} unsupported (expected {CACHE_VERSION})",
                cache.version
            )));
        }
        Ok(cache)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&SemiBiorthogonalSystem> {
        self.entries.get(key)
    }

    pub fn insert(&mut self, key: String, system: SemiBiorthogonalSystem) {
        self.entries.insert(key, system);
    }
}
