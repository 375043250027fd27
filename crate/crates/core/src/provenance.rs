//! Content hashes that stamp every output with the configuration behind it.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Hex SHA-256 of the value's canonical JSON encoding.
///
/// Struct fields serialize in declaration order and all maps in this crate
/// are `BTreeMap`s, so equal values always hash equally.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("configuration serializes to JSON");
    hex::encode(Sha256::digest(&bytes))
}

/// First 12 hex digits of [`config_hash`], for human-facing headers.
pub fn short_hash(full: &str) -> &str {
    &full[..full.len().min(12)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::NormalizationConfig;

    #[test]
    fn stable_and_sensitive() {
        let a = NormalizationConfig::default();
        let mut b = a.clone();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
        b.min_token_length = 3;
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(short_hash(&config_hash(&a)).len(), 12);
    }
}
